#pragma once
/*
inputs.hpp
----------
Controller input streams: recorded events, scripted pulses, the scripted
shepherd, and the per-tick snapshot rule shared by every driver.

Snapshot rule (used identically by headless runs, replays and the live
session): the inputs applied when advancing from tick k to k+1 are, per hand,
the latest event whose tick index is <= k. A pose is treated as absent once it
is older than kPoseStalenessSeconds of simulation time, or after an explicit
absent marker. Alpha events change the live gain from that tick on.
*/

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "swarmsteer/engine.hpp"
#include "swarmsteer/influence.hpp"
#include "swarmsteer/scenario.hpp"

namespace swarmsteer {

inline constexpr double kPoseStalenessSeconds = 0.5;

struct InputEvent {
    enum class Kind { pose, absent, alpha };

    double time = 0.0;  // simulation time, s
    Kind kind = Kind::absent;
    Hand hand = Hand::right;  // unused for alpha events
    ControllerPose pose;      // kind == pose
    double alpha = 0.0;       // kind == alpha

    static InputEvent make_pose(double time, const ControllerPose& pose);
    static InputEvent make_absent(double time, Hand hand);
    static InputEvent make_alpha(double time, double alpha);

    bool operator==(const InputEvent&) const = default;
};

// Tick at which an event takes effect: ceil(time / tau), tolerant to
// round-off so that k * tau maps back to k.
std::int64_t event_tick(double time, double tau);

struct PulseSpec {
    int axis = 1;  // 0 = x, 1 = y, 2 = z
    double start = 5.0;            // s
    double duration = 3.0;         // s
    double offset_distance = 8.0;  // m
    int plane_normal_sign = +1;

    void validate() const;
    bool operator==(const PulseSpec&) const = default;
};

// "axis:start:duration[:offset]", axis optionally prefixed with '-' for a
// negative normal ("-x:2:3"). Throws std::invalid_argument.
PulseSpec parse_pulse(const std::string& text);
std::string format_pulse(const PulseSpec& spec);

// One static right-hand plane, offset_distance behind the swarm mean along
// -axis*sign with normal +axis*sign and zero velocity, one pose per tick for
// the pulse duration, then an absent marker.
std::vector<InputEvent> pulse_schedule(const PulseSpec& spec, const Vec3& swarm_mean_at_start, double tau);

// Applies events in tick order and yields the per-tick snapshot.
class InputTimeline {
public:
    explicit InputTimeline(double tau) : tau_(tau) {}

    // Events must arrive with non-decreasing time.
    void push(const InputEvent& event);

    // Inputs for the step that starts at `tick`. Ticks must be non-decreasing.
    ControllerInputs snapshot(std::int64_t tick);

    // Gain set by the latest alpha event at or before the last snapshot.
    std::optional<double> alpha() const { return alpha_; }

private:
    double tau_;
    std::vector<InputEvent> pending_;
    std::size_t cursor_ = 0;
    std::optional<InputEvent> latest_[2];
    std::optional<double> alpha_;
};

// A producer of input events for the current frame (a human stand-in).
class InputSource {
public:
    virtual ~InputSource() = default;
    // Events to apply from `frame.tick` on. Called once per tick, in order.
    virtual std::vector<InputEvent> events_for(const SimFrame& frame) = 0;
};

class NoInputs final : public InputSource {
public:
    std::vector<InputEvent> events_for(const SimFrame&) override { return {}; }
};

// Fires each pulse's schedule when the run reaches its start tick, using the
// swarm mean of that frame.
class PulseSource final : public InputSource {
public:
    PulseSource(std::vector<PulseSpec> pulses, double tau);
    std::vector<InputEvent> events_for(const SimFrame& frame) override;

private:
    std::vector<PulseSpec> pulses_;
    double tau_;
    std::vector<InputEvent> queued_;
};

// Recorded events, released at their tick.
class ReplaySource final : public InputSource {
public:
    ReplaySource(std::vector<InputEvent> events, double tau);
    std::vector<InputEvent> events_for(const SimFrame& frame) override;

private:
    std::vector<InputEvent> events_;
    double tau_;
    std::size_t cursor_ = 0;
};

// Geometry and gains of the scripted canyon operator. Defaults match the
// paper-canyon preset (gap centred at x = 0 in the wall slab y in [30, 31]).
struct ShepherdConfig {
    Vec3 gap_center{0.0, 30.5, 10.0};
    Vec3 forward{0.0, 1.0, 0.0};     // traversal direction, horizontal
    double staging_offset = 6.5;     // staging point this far before the gap
    double exit_offset = 14.5;       // push target past the gap
    double straggler_offset = 9.5;   // push target for the agents left behind
    double lateral_tolerance = 1.0;  // m, swarm mean vs. gap centre
    double approach_tolerance = 3.0; // m, short of the staging point
    double rear_margin = 3.0;        // plane distance behind the rearmost agent
    double handoff_fraction = 0.5;   // crossed share that starts straggler mode
    double pass_threshold = 31.0;    // forward coordinate of the far wall face
    double height_min = 4.0;
    double height_max = 16.0;
    double straggler_height_min = 2.0;
    double straggler_height_max = 18.0;
};

// Closed-loop scripted operator steering with the right-hand plane only.
//   approach: push the swarm toward a staging point in front of the gap;
//   insert:   once lined up, push through the gap;
//   gather:   once enough agents passed, push the stragglers toward the gap;
//   clear:    when none are left, keep pushing forward.
// The plane sits rear_margin behind the rearmost agent it acts on, so every
// shepherded agent is on its pushing side.
class ShepherdScript final : public InputSource {
public:
    enum class Phase { approach, insert, gather, clear };

    explicit ShepherdScript(ShepherdConfig config = {}) : config_(config) {}
    std::vector<InputEvent> events_for(const SimFrame& frame) override;
    Phase phase() const { return phase_; }

private:
    ShepherdConfig config_;
    Phase phase_ = Phase::approach;
};

// Input recording (JSON lines): a header line then one event per line.
//   {"format":"swarmsteer-inputs","version":1,"pulses":[...]}
//   {"t":5.0,"hand":"right","pose":{"position":[..],"orientation":[qx,qy,qz,qw],"velocity":[..],"t":5.0}}
//   {"t":8.0,"hand":"right","pose":null}
//   {"t":9.0,"alpha":2.5}
struct InputLog {
    std::vector<PulseSpec> pulses;  // provenance, copied into trajectory headers
    std::vector<InputEvent> events;

    bool operator==(const InputLog&) const = default;
};

nlohmann::json event_to_json(const InputEvent& event);
InputEvent event_from_json(const nlohmann::json& j);
nlohmann::json pulse_to_json(const PulseSpec& pulse);
PulseSpec pulse_from_json(const nlohmann::json& j);

void write_input_log(std::ostream& out, const InputLog& log);
// Throws SchemaError for malformed lines or unsorted events.
InputLog read_input_log(std::istream& in);

}  // namespace swarmsteer
