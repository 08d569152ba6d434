#pragma once
/*
summary.hpp
-----------
Experiment summaries computed from trajectory records. The JSON document is
the contract for external plotters:

  {"format":"swarmsteer-summary","version":1,"scenario":"paper-canyon",
   "scenario_hash":"...","frames":600,
   "series":{"tick":[..],"mean_x":[..],"mean_y":[..],"mean_z":[..],
             "mean_yaw":[..],"polarization":[..],"alpha":[..]},
   "pulses":[{"pulse":"y:5:3:8","start_tick":50,"end_tick":80,"delta":[dx,dy,dz]}],
   "time_avg_polarization":p,"time_avg_mean_yaw":r,
   "final_mean_p":[..],"final_crossed":k,"max_crossed":k}

Empty records give zero frames and null aggregates.
*/

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "swarmsteer/record.hpp"

namespace swarmsteer {

inline constexpr int kSummaryVersion = 1;

struct PulseWindow {
    PulseSpec pulse;
    std::int64_t start_tick = 0;
    std::int64_t end_tick = 0;
    std::optional<Vec3> delta;  // mean position at end minus at start; nullopt if outside the record
};

struct RunSummary {
    std::string scenario_name;
    std::string scenario_hash;
    std::size_t frames = 0;
    std::vector<PulseWindow> pulses;
    std::optional<double> time_avg_polarization;
    std::optional<double> time_avg_mean_yaw;  // arithmetic mean of the per-tick circular mean
    std::optional<Vec3> final_mean_position;
    int final_crossed = 0;
    int max_crossed = 0;
};

// Mean position at `tick` (0 reads the header's initial metrics).
std::optional<Vec3> mean_position_at(const TrajectoryRecord& record, std::int64_t tick);

// `from_tick` restricts the time averages to rows with tick >= from_tick.
RunSummary summarize(const TrajectoryRecord& record, std::int64_t from_tick = 0);

nlohmann::json summary_to_json(const RunSummary& summary, const TrajectoryRecord& record);
std::string summary_text(const RunSummary& summary);

}  // namespace swarmsteer
