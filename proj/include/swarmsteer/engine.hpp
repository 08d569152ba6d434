#pragma once
/*
engine.hpp
----------
World state and the deterministic tick.

A tick is a synchronous (Jacobi) update: every agent reads the same previous
frame, so the result per agent id does not depend on the order of agents in
the frame. Frames are plain values; once emitted they are never mutated and
can be shared read-only between threads.
*/

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmsteer/core_dynamics.hpp"
#include "swarmsteer/influence.hpp"
#include "swarmsteer/scenario.hpp"

namespace swarmsteer {

struct SwarmMetrics {
    Vec3 mean_position;
    double mean_yaw = 0.0;      // circular mean, (-pi, pi]
    double polarization = 0.0;  // |sum heading| / N
    int crossed_count = 0;

    bool operator==(const SwarmMetrics&) const = default;
};

struct SimFrame {
    std::int64_t tick = 0;
    double time = 0.0;
    double alpha = 0.0;  // gain applied when producing this frame
    std::vector<AgentState> agents;
    std::vector<AgentInfluence> influence;  // parallel to agents
    SwarmMetrics metrics;

    bool operator==(const SimFrame&) const = default;
};

// Controller snapshot for one tick; nullopt = hand absent.
struct ControllerInputs {
    std::optional<ControllerPose> left;
    std::optional<ControllerPose> right;

    bool empty() const { return !left && !right; }
};

struct TickOptions {
    std::optional<double> alpha;    // overrides scenario.influence.alpha
    bool influence_enabled = true;  // false skips the influence path entirely
};

class SpawnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a tick produces a non-finite agent state.
class NumericAbort : public std::runtime_error {
public:
    NumericAbort(std::int64_t tick, AgentId agent);
    std::int64_t tick() const { return tick_; }
    AgentId agent() const { return agent_; }

private:
    std::int64_t tick_;
    AgentId agent_;
};

SimFrame init_world(const Scenario& scenario);

SimFrame tick(const SimFrame& frame, const ControllerInputs& inputs, const Scenario& scenario,
              const TickOptions& options = {});

// Segment entry parameter in [0, 1) if the segment from `from` to `to` passes
// through the open interior of `box`, else nullopt. `axis` receives the entry
// face axis.
std::optional<double> segment_entry(const Vec3& from, const Vec3& to, const WallBox& box,
                                    int* axis = nullptr);

// `previous` is the agent before stepping, `stepped` after. If the motion
// segment enters a wall, the agent stops 1 cm in front of the entry face and
// loses the heading component into that face.
AgentState resolve_wall_collisions(const AgentState& previous, const AgentState& stepped,
                                   std::span<const WallBox> walls);

SwarmMetrics compute_metrics(std::span<const AgentState> agents, const Scenario& scenario);

// Mean over agents' circular yaw: atan2 of summed unit yaw phasors.
double circular_mean(std::span<const double> angles);

// Owning convenience wrapper: holds the scenario and the latest frame.
class World {
public:
    explicit World(Scenario scenario);

    const Scenario& scenario() const { return scenario_; }
    const SimFrame& frame() const { return *frame_; }
    std::shared_ptr<const SimFrame> shared_frame() const { return frame_; }

    const SimFrame& step(const ControllerInputs& inputs, const TickOptions& options = {});
    bool finished() const { return frame_->tick >= scenario_.max_ticks; }

private:
    Scenario scenario_;
    std::shared_ptr<const SimFrame> frame_;
};

}  // namespace swarmsteer
