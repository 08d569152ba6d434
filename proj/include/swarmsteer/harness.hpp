#pragma once
/*
harness.hpp
-----------
Single-threaded headless driver: feeds an InputSource through an
InputTimeline into the engine, tick by tick, and records everything it
applied so the run can be replayed exactly.
*/

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "swarmsteer/engine.hpp"
#include "swarmsteer/inputs.hpp"
#include "swarmsteer/scenario.hpp"

namespace swarmsteer {

struct RunOptions {
    std::optional<double> alpha;    // fixed override; beats alpha events
    bool influence_enabled = true;
    bool keep_frames = true;        // store every frame in RunResult::frames
};

struct RunResult {
    SimFrame initial;
    SimFrame last;
    std::vector<SimFrame> frames;  // ticks 1..max_ticks when keep_frames
    std::vector<InputEvent> events;  // every event applied, in order
};

using FrameCallback = std::function<void(const SimFrame&)>;

// Runs scenario.max_ticks ticks. Throws NumericAbort on non-finite state.
RunResult run_scenario(const Scenario& scenario, InputSource& source, const RunOptions& options = {},
                       const FrameCallback& on_frame = {});

// Replays recorded events; events that would apply after the last tick are
// counted in `ignored` (a caller-visible warning, not an error).
RunResult replay_inputs(const std::vector<InputEvent>& events, const Scenario& scenario,
                        const RunOptions& options = {}, const FrameCallback& on_frame = {},
                        std::size_t* ignored = nullptr);

}  // namespace swarmsteer
