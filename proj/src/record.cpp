#include "swarmsteer/record.hpp"

#include <sstream>

#include "swarmsteer/errors.hpp"
#include "swarmsteer/scenario_io.hpp"

namespace swarmsteer {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) {
    return json::array({v.x, v.y, v.z});
}

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw std::invalid_argument("expected an array of 3 numbers");
    }
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json metrics_json(const SwarmMetrics& m) {
    return {{"mean_p", vec_json(m.mean_position)},
            {"mean_yaw", m.mean_yaw},
            {"polarization", m.polarization},
            {"crossed", m.crossed_count}};
}

SwarmMetrics metrics_from(const json& j) {
    SwarmMetrics m;
    m.mean_position = vec_from(j.at("mean_p"));
    m.mean_yaw = j.at("mean_yaw").get<double>();
    m.polarization = j.at("polarization").get<double>();
    m.crossed_count = j.at("crossed").get<int>();
    return m;
}

RecordHeader header_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "swarmsteer-traj") {
        throw RecordError(RecordError::Code::bad_format, "not a swarmsteer trajectory record");
    }
    if (!j.contains("version") || !j["version"].is_number_integer()) {
        throw RecordError(RecordError::Code::bad_format, "header has no version");
    }
    if (j["version"].get<int>() != kRecordVersion) {
        throw RecordError(RecordError::Code::version_mismatch,
                          "record version " + j["version"].dump() + ", expected " + std::to_string(kRecordVersion));
    }
    RecordHeader h;
    try {
        h.scenario = scenario_from_json(j.at("scenario"));
        h.scenario_hash = j.at("scenario_hash").get<std::string>();
        if (j.at("seed").get<std::uint64_t>() != h.scenario.seed) {
            throw RecordError(RecordError::Code::hash_mismatch, "header seed differs from scenario seed");
        }
        if (j.contains("pulses")) {
            for (const json& p : j["pulses"]) {
                h.pulses.push_back(pulse_from_json(p));
            }
        }
        h.initial = metrics_from(j.at("initial"));
    } catch (const RecordError&) {
        throw;
    } catch (const std::exception& e) {
        throw RecordError(RecordError::Code::bad_format, std::string("bad header: ") + e.what());
    }
    if (scenario_hash(h.scenario) != h.scenario_hash) {
        throw RecordError(RecordError::Code::hash_mismatch,
                          "scenario hash " + h.scenario_hash + " does not match scenario (" +
                              scenario_hash(h.scenario) + ")");
    }
    return h;
}

}  // namespace

RecordError::RecordError(Code code, const std::string& detail, std::int64_t last_good_tick)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), last_good_tick_(last_good_tick) {}

std::string_view to_string(RecordError::Code code) {
    switch (code) {
        case RecordError::Code::bad_format: return "bad_format";
        case RecordError::Code::version_mismatch: return "version_mismatch";
        case RecordError::Code::truncated: return "truncated";
        case RecordError::Code::hash_mismatch: return "hash_mismatch";
        case RecordError::Code::io: return "io";
        case RecordError::Code::overflow: return "overflow";
    }
    return "unknown";
}

RecordHeader make_header(const Scenario& scenario, const SimFrame& initial, std::vector<PulseSpec> pulses) {
    return RecordHeader{scenario, scenario_hash(scenario), std::move(pulses), initial.metrics};
}

FrameRow row_from_frame(const SimFrame& frame) {
    FrameRow row;
    row.tick = frame.tick;
    row.time = frame.time;
    row.alpha = frame.alpha;
    row.metrics = frame.metrics;
    row.agents.reserve(frame.agents.size());
    for (std::size_t i = 0; i < frame.agents.size(); ++i) {
        const AgentState& a = frame.agents[i];
        const Vec3 u = i < frame.influence.size() ? frame.influence[i].total : Vec3{};
        row.agents.push_back({a.id, a.position, a.heading, a.yaw, u});
    }
    return row;
}

json header_to_json(const RecordHeader& h) {
    json pulses = json::array();
    for (const PulseSpec& p : h.pulses) {
        pulses.push_back(pulse_to_json(p));
    }
    return {{"format", "swarmsteer-traj"},
            {"version", kRecordVersion},
            {"scenario", scenario_to_json(h.scenario)},
            {"seed", h.scenario.seed},
            {"scenario_hash", h.scenario_hash},
            {"pulses", pulses},
            {"initial", metrics_json(h.initial)}};
}

json row_to_json(const FrameRow& row) {
    json agents = json::array();
    for (const AgentRow& a : row.agents) {
        agents.push_back({{"id", a.id},
                          {"p", vec_json(a.position)},
                          {"h", vec_json(a.heading)},
                          {"yaw", a.yaw},
                          {"u", vec_json(a.influence)}});
    }
    json j = {{"type", "frame"}, {"tick", row.tick}, {"time", row.time}, {"alpha", row.alpha}, {"agents", agents}};
    j.update(metrics_json(row.metrics));
    return j;
}

FrameRow row_from_json(const json& j) {
    if (j.value("type", "") != "frame") {
        throw std::invalid_argument("row is not a frame");
    }
    FrameRow row;
    row.tick = j.at("tick").get<std::int64_t>();
    row.time = j.at("time").get<double>();
    row.alpha = j.at("alpha").get<double>();
    for (const json& a : j.at("agents")) {
        row.agents.push_back({a.at("id").get<AgentId>(), vec_from(a.at("p")), vec_from(a.at("h")),
                              a.at("yaw").get<double>(), vec_from(a.at("u"))});
    }
    row.metrics = metrics_from(j);
    return row;
}

std::string frame_line(const SimFrame& frame) {
    return row_to_json(row_from_frame(frame)).dump();
}

void write_record(std::ostream& out, const TrajectoryRecord& record) {
    out << header_to_json(record.header).dump() << '\n';
    for (const FrameRow& row : record.rows) {
        out << row_to_json(row).dump() << '\n';
    }
    if (!out) {
        throw RecordError(RecordError::Code::io, "write failed");
    }
}

void write_record(const std::string& path, const TrajectoryRecord& record) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RecordError(RecordError::Code::io, "cannot open " + path + " for writing");
    }
    write_record(out, record);
}

TrajectoryRecord read_record(std::istream& in) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        lines.push_back(std::move(line));
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw RecordError(RecordError::Code::bad_format, "empty file");
    }
    json header;
    try {
        header = json::parse(lines[0]);
    } catch (const json::parse_error& e) {
        throw RecordError(RecordError::Code::bad_format, std::string("header is not JSON: ") + e.what());
    }
    TrajectoryRecord record;
    record.header = header_from_json(header);

    std::int64_t last_tick = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        FrameRow row;
        try {
            row = row_from_json(json::parse(lines[i]));
        } catch (const std::exception& e) {
            if (i + 1 == lines.size()) {
                throw RecordError(RecordError::Code::truncated,
                                  "last line unreadable; last good tick " + std::to_string(last_tick), last_tick);
            }
            throw RecordError(RecordError::Code::bad_format,
                              "line " + std::to_string(i + 1) + ": " + e.what());
        }
        if (row.tick <= last_tick) {
            throw RecordError(RecordError::Code::bad_format,
                              "line " + std::to_string(i + 1) + ": ticks must strictly increase");
        }
        last_tick = row.tick;
        record.rows.push_back(std::move(row));
    }
    return record;
}

TrajectoryRecord read_record(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RecordError(RecordError::Code::io, "cannot open " + path);
    }
    return read_record(in);
}

RecordWriter::RecordWriter(const std::string& path, const RecordHeader& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) {
        throw RecordError(RecordError::Code::io, "cannot open " + path + " for writing");
    }
    append_line(header_to_json(header).dump());
}

void RecordWriter::append_line(const std::string& line) {
    out_ << line << '\n';
    if (!out_) {
        throw RecordError(RecordError::Code::io, "write to " + path_ + " failed");
    }
}

void RecordWriter::close() {
    if (out_.is_open()) {
        out_.flush();
        out_.close();
        if (out_.fail()) {
            throw RecordError(RecordError::Code::io, "closing " + path_ + " failed");
        }
    }
}

AsyncRecorder::AsyncRecorder(const std::string& path, const RecordHeader& header, std::size_t capacity)
    : writer_(path, header), capacity_(capacity), thread_([this] { run(); }) {}

AsyncRecorder::~AsyncRecorder() {
    try {
        close();
    } catch (...) {
    }
}

void AsyncRecorder::push(std::shared_ptr<const std::string> line) {
    std::lock_guard lock(mutex_);
    if (failure_) {
        std::rethrow_exception(failure_);
    }
    if (closing_) {
        throw RecordError(RecordError::Code::io, "recorder is closed");
    }
    if (queue_.size() >= capacity_) {
        throw RecordError(RecordError::Code::overflow,
                          "recorder queue full (" + std::to_string(capacity_) + " rows); refusing to drop frames");
    }
    queue_.push_back(std::move(line));
    cv_.notify_one();
}

void AsyncRecorder::close() {
    {
        std::lock_guard lock(mutex_);
        closing_ = true;
    }
    cv_.notify_one();
    if (thread_.joinable()) {
        thread_.join();
        writer_.close();
    }
    std::lock_guard lock(mutex_);
    if (failure_) {
        auto f = failure_;
        failure_ = nullptr;
        std::rethrow_exception(f);
    }
}

void AsyncRecorder::run() {
    for (;;) {
        std::shared_ptr<const std::string> line;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return closing_ || !queue_.empty(); });
            if (queue_.empty()) {
                return;
            }
            line = std::move(queue_.front());
            queue_.pop_front();
        }
        try {
            writer_.append_line(*line);
        } catch (...) {
            std::lock_guard lock(mutex_);
            failure_ = std::current_exception();
            queue_.clear();
            return;
        }
    }
}

}  // namespace swarmsteer
