#pragma once
/*
session.hpp
-----------
Transport-independent session state machine. It is owned by the engine
thread alone; the network layer hands it messages through a queue and
delivers whatever it puts in the outbox.

Phases: idle -> running <-> paused -> finished (max_ticks reached).
  start           idle | paused -> running, else invalid_phase
  pause           running -> paused, else invalid_phase
  reset           any -> idle, world re-initialised from the scenario
  load_scenario   not while running; loads a preset or an inline document
  pose, release   latest-wins per hand, applied at the next tick boundary
  set_alpha       clamped to [0, 50], applied from the next tick

Client -> server messages:
  {"type":"hello","role":"steer"|"observe"}
  {"type":"pose","hand":"left","position":[x,y,z],"orientation":[qx,qy,qz,qw],
   "velocity":[vx,vy,vz]|null,"t":seconds}
  {"type":"release","hand":"left"}
  {"type":"set_alpha","alpha":5.0}
  {"type":"start"} {"type":"pause"} {"type":"reset"}
  {"type":"load_scenario","name":"paper-canyon"}  or  "scenario":{...}

Server -> client messages:
  {"type":"frame",...}  (see record.hpp)
  {"type":"phase","phase":"idle"|"running"|"paused"|"finished"}
  {"type":"hello","role":..,"scenario":..,"tau":..,"alpha":..,"tick":..}
  {"type":"error","code":..,"detail":..}
    codes: unknown_type, invalid_phase, bad_message, stale_pose, not_steering,
           numeric_abort (broadcast; the run is finished)

Everything applied to the engine is recorded as InputEvents stamped with the
simulation time of the tick they entered, so a headless replay of
input_events() reproduces the run bit for bit regardless of network timing.
*/

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmsteer/engine.hpp"
#include "swarmsteer/inputs.hpp"
#include "swarmsteer/scenario.hpp"

namespace swarmsteer {

using ClientId = std::uint64_t;

inline constexpr double kAlphaMax = 50.0;
inline constexpr double kPoseVelocityLimit = 10.0;  // m/s per component, finite-difference clamp

enum class SessionPhase { idle, running, paused, finished };
std::string_view to_string(SessionPhase phase);

struct Outgoing {
    std::optional<ClientId> to;  // nullopt = every client
    std::shared_ptr<const std::string> text;
    bool is_frame = false;       // frames may be dropped per client, control messages never
};

class Session {
public:
    // Builds a fresh scripted input source for each run; it drives inputs
    // alongside (or instead of) a client.
    using ScriptFactory = std::function<std::unique_ptr<InputSource>(const Scenario&)>;

    explicit Session(Scenario scenario, ScriptFactory script = {});

    void connect(ClientId client);
    void disconnect(ClientId client);
    void handle(ClientId client, std::string_view text);

    // Advances one tick when running; returns the new frame (nullptr otherwise).
    std::shared_ptr<const SimFrame> step();

    // Messages produced since the last call.
    std::vector<Outgoing> take_outbox();

    SessionPhase phase() const { return phase_; }
    const Scenario& scenario() const { return scenario_; }
    std::shared_ptr<const SimFrame> frame() const { return frame_; }
    double live_alpha() const { return live_alpha_; }
    std::optional<ClientId> steering_client() const { return steering_; }
    std::size_t connected_clients() const { return clients_.size(); }

    // Inputs applied since the last reset/load, in order.
    const std::vector<InputEvent>& input_events() const { return events_; }
    // Increments on every reset or load_scenario (a new run starts).
    std::uint64_t generation() const { return generation_; }

private:
    void reset_run();
    void set_phase(SessionPhase phase);
    void error(ClientId client, std::string_view code, const std::string& detail);
    void send(ClientId client, std::string text);
    void broadcast(std::string text);
    bool may_control(ClientId client, bool claim);
    void dispatch(ClientId client, const nlohmann::json& msg);
    void handle_pose(ClientId client, const nlohmann::json& msg);

    Scenario scenario_;
    ScriptFactory script_factory_;
    std::unique_ptr<InputSource> script_;
    SessionPhase phase_ = SessionPhase::idle;
    std::shared_ptr<const SimFrame> frame_;
    InputTimeline timeline_;
    double live_alpha_ = 0.0;
    std::optional<double> pending_alpha_;
    std::optional<InputEvent> pending_[2];
    std::optional<ControllerPose> last_received_[2];
    std::vector<InputEvent> events_;
    std::vector<ClientId> clients_;
    std::optional<ClientId> steering_;
    std::uint64_t generation_ = 0;
    std::vector<Outgoing> outbox_;
};

}  // namespace swarmsteer
