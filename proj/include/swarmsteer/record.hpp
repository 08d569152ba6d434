#pragma once
/*
record.hpp
----------
Trajectory records (JSON lines).

  line 1:  {"format":"swarmsteer-traj","version":1,"scenario":{...},"seed":1,
            "scenario_hash":"...","pulses":[...],"initial":{...}}
  line 2+: one row per emitted frame, ticks 1..n, strictly increasing:
           {"type":"frame","tick":1,"time":0.1,"alpha":5,
            "agents":[{"id":0,"p":[..],"h":[..],"yaw":r,"u":[..]}],
            "mean_p":[..],"mean_yaw":r,"polarization":p,"crossed":k}

Rows are byte-for-byte the frame messages the session service broadcasts, so
a served recording is exactly what clients saw. "initial" holds the tick-0
metrics (tick 0 is not a row), which summaries need for windows starting at 0.
*/

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "swarmsteer/engine.hpp"
#include "swarmsteer/inputs.hpp"
#include "swarmsteer/scenario.hpp"

namespace swarmsteer {

inline constexpr int kRecordVersion = 1;

struct AgentRow {
    AgentId id = 0;
    Vec3 position;
    Vec3 heading;
    double yaw = 0.0;
    Vec3 influence;  // total applied u

    bool operator==(const AgentRow&) const = default;
};

struct FrameRow {
    std::int64_t tick = 0;
    double time = 0.0;
    double alpha = 0.0;
    std::vector<AgentRow> agents;
    SwarmMetrics metrics;

    bool operator==(const FrameRow&) const = default;
};

struct RecordHeader {
    Scenario scenario;
    std::string scenario_hash;
    std::vector<PulseSpec> pulses;
    SwarmMetrics initial;

    bool operator==(const RecordHeader&) const = default;
};

struct TrajectoryRecord {
    RecordHeader header;
    std::vector<FrameRow> rows;

    bool operator==(const TrajectoryRecord&) const = default;
};

class RecordError : public std::runtime_error {
public:
    enum class Code { bad_format, version_mismatch, truncated, hash_mismatch, io, overflow };

    RecordError(Code code, const std::string& detail, std::int64_t last_good_tick = -1);
    Code code() const { return code_; }
    // For `truncated`: tick of the last row that parsed (0 = header only).
    std::int64_t last_good_tick() const { return last_good_tick_; }

private:
    Code code_;
    std::int64_t last_good_tick_;
};

std::string_view to_string(RecordError::Code code);

RecordHeader make_header(const Scenario& scenario, const SimFrame& initial, std::vector<PulseSpec> pulses = {});
FrameRow row_from_frame(const SimFrame& frame);

nlohmann::json header_to_json(const RecordHeader& header);
nlohmann::json row_to_json(const FrameRow& row);
FrameRow row_from_json(const nlohmann::json& j);

// The frame message / record row text (no trailing newline).
std::string frame_line(const SimFrame& frame);

void write_record(std::ostream& out, const TrajectoryRecord& record);
void write_record(const std::string& path, const TrajectoryRecord& record);
TrajectoryRecord read_record(std::istream& in);
TrajectoryRecord read_record(const std::string& path);

// Streaming writer used by headless runs: header on open, one line per frame.
class RecordWriter {
public:
    RecordWriter(const std::string& path, const RecordHeader& header);
    void append(const SimFrame& frame) { append_line(frame_line(frame)); }
    void append_line(const std::string& line);
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

// Writes pre-serialized rows on its own thread so the tick loop never blocks
// on the file. The queue is bounded; push() throws RecordError(overflow)
// instead of dropping a row.
class AsyncRecorder {
public:
    AsyncRecorder(const std::string& path, const RecordHeader& header, std::size_t capacity = 4096);
    ~AsyncRecorder();
    AsyncRecorder(const AsyncRecorder&) = delete;
    AsyncRecorder& operator=(const AsyncRecorder&) = delete;

    void push(std::shared_ptr<const std::string> line);
    // Drains the queue and closes the file. Rethrows a writer failure.
    void close();

private:
    void run();

    RecordWriter writer_;
    std::size_t capacity_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool closing_ = false;
    std::exception_ptr failure_;
    std::thread thread_;
};

}  // namespace swarmsteer
