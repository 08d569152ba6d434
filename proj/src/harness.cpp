#include "swarmsteer/harness.hpp"

namespace swarmsteer {

RunResult run_scenario(const Scenario& scenario, InputSource& source, const RunOptions& options,
                       const FrameCallback& on_frame) {
    RunResult result;
    result.initial = init_world(scenario);
    if (options.keep_frames) {
        result.frames.reserve(static_cast<std::size_t>(scenario.max_ticks));
    }
    InputTimeline timeline(scenario.zones.tau);
    SimFrame frame = result.initial;
    for (std::int64_t k = 0; k < scenario.max_ticks; ++k) {
        for (const InputEvent& e : source.events_for(frame)) {
            timeline.push(e);
            result.events.push_back(e);
        }
        const ControllerInputs inputs = timeline.snapshot(k);
        TickOptions tick_options;
        tick_options.alpha = options.alpha ? options.alpha : timeline.alpha();
        tick_options.influence_enabled = options.influence_enabled;
        frame = tick(frame, inputs, scenario, tick_options);
        if (on_frame) {
            on_frame(frame);
        }
        if (options.keep_frames) {
            result.frames.push_back(frame);
        }
    }
    result.last = std::move(frame);
    return result;
}

RunResult replay_inputs(const std::vector<InputEvent>& events, const Scenario& scenario, const RunOptions& options,
                        const FrameCallback& on_frame, std::size_t* ignored) {
    ReplaySource source(events, scenario.zones.tau);
    RunResult result = run_scenario(scenario, source, options, on_frame);
    if (ignored) {
        *ignored = events.size() - result.events.size();
    }
    return result;
}

}  // namespace swarmsteer
