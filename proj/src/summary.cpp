#include "swarmsteer/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace swarmsteer {

using nlohmann::json;

std::optional<Vec3> mean_position_at(const TrajectoryRecord& record, std::int64_t tick) {
    if (tick == 0) {
        return record.header.initial.mean_position;
    }
    auto it = std::lower_bound(record.rows.begin(), record.rows.end(), tick,
                               [](const FrameRow& r, std::int64_t t) { return r.tick < t; });
    if (it == record.rows.end() || it->tick != tick) {
        return std::nullopt;
    }
    return it->metrics.mean_position;
}

RunSummary summarize(const TrajectoryRecord& record, std::int64_t from_tick) {
    RunSummary s;
    s.scenario_name = record.header.scenario.name;
    s.scenario_hash = record.header.scenario_hash;
    s.frames = record.rows.size();
    s.max_crossed = record.header.initial.crossed_count;
    s.final_crossed = record.header.initial.crossed_count;

    const double tau = record.header.scenario.zones.tau;
    for (const PulseSpec& p : record.header.pulses) {
        PulseWindow w;
        w.pulse = p;
        w.start_tick = event_tick(p.start, tau);
        w.end_tick = w.start_tick + static_cast<std::int64_t>(std::llround(p.duration / tau));
        const auto a = mean_position_at(record, w.start_tick);
        const auto b = mean_position_at(record, w.end_tick);
        if (a && b) {
            w.delta = *b - *a;
        }
        s.pulses.push_back(w);
    }

    double pol = 0.0;
    double yaw = 0.0;
    std::size_t n = 0;
    for (const FrameRow& r : record.rows) {
        s.max_crossed = std::max(s.max_crossed, r.metrics.crossed_count);
        if (r.tick >= from_tick) {
            pol += r.metrics.polarization;
            yaw += r.metrics.mean_yaw;
            ++n;
        }
    }
    if (n > 0) {
        s.time_avg_polarization = pol / static_cast<double>(n);
        s.time_avg_mean_yaw = yaw / static_cast<double>(n);
    }
    if (!record.rows.empty()) {
        s.final_mean_position = record.rows.back().metrics.mean_position;
        s.final_crossed = record.rows.back().metrics.crossed_count;
    }
    return s;
}

json summary_to_json(const RunSummary& s, const TrajectoryRecord& record) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    auto opt_vec = [](const std::optional<Vec3>& v) {
        return v ? json::array({v->x, v->y, v->z}) : json(nullptr);
    };
    json series = {{"tick", json::array()},     {"mean_x", json::array()}, {"mean_y", json::array()},
                   {"mean_z", json::array()},   {"mean_yaw", json::array()},
                   {"polarization", json::array()}, {"alpha", json::array()}};
    for (const FrameRow& r : record.rows) {
        series["tick"].push_back(r.tick);
        series["mean_x"].push_back(r.metrics.mean_position.x);
        series["mean_y"].push_back(r.metrics.mean_position.y);
        series["mean_z"].push_back(r.metrics.mean_position.z);
        series["mean_yaw"].push_back(r.metrics.mean_yaw);
        series["polarization"].push_back(r.metrics.polarization);
        series["alpha"].push_back(r.alpha);
    }
    json pulses = json::array();
    for (const PulseWindow& w : s.pulses) {
        pulses.push_back({{"pulse", format_pulse(w.pulse)},
                          {"start_tick", w.start_tick},
                          {"end_tick", w.end_tick},
                          {"delta", opt_vec(w.delta)}});
    }
    return {{"format", "swarmsteer-summary"},
            {"version", kSummaryVersion},
            {"scenario", s.scenario_name},
            {"scenario_hash", s.scenario_hash},
            {"frames", s.frames},
            {"series", series},
            {"pulses", pulses},
            {"time_avg_polarization", opt(s.time_avg_polarization)},
            {"time_avg_mean_yaw", opt(s.time_avg_mean_yaw)},
            {"final_mean_p", opt_vec(s.final_mean_position)},
            {"final_crossed", s.final_crossed},
            {"max_crossed", s.max_crossed}};
}

std::string summary_text(const RunSummary& s) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "scenario %s (%s), %zu frames\n", s.scenario_name.c_str(),
                  s.scenario_hash.c_str(), s.frames);
    out += buf;
    if (s.final_mean_position) {
        const Vec3& m = *s.final_mean_position;
        std::snprintf(buf, sizeof buf, "final mean position  (%.3f, %.3f, %.3f) m\n", m.x, m.y, m.z);
        out += buf;
    }
    if (s.time_avg_polarization) {
        std::snprintf(buf, sizeof buf, "time-avg polarization %.4f\ntime-avg mean yaw     %.4f rad\n",
                      *s.time_avg_polarization, *s.time_avg_mean_yaw);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "crossed               %d (max %d)\n", s.final_crossed, s.max_crossed);
    out += buf;
    for (const PulseWindow& w : s.pulses) {
        if (w.delta) {
            std::snprintf(buf, sizeof buf, "pulse %s ticks %lld-%lld: delta (%.3f, %.3f, %.3f) m\n",
                          format_pulse(w.pulse).c_str(), static_cast<long long>(w.start_tick),
                          static_cast<long long>(w.end_tick), w.delta->x, w.delta->y, w.delta->z);
        } else {
            std::snprintf(buf, sizeof buf, "pulse %s: window outside the record\n", format_pulse(w.pulse).c_str());
        }
        out += buf;
    }
    return out;
}

}  // namespace swarmsteer
