#include "swarmsteer/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarmsteer/errors.hpp"

namespace swarmsteer {

using nlohmann::json;

namespace {

constexpr double kTickRoundoff = 1e-9;

Vec3 axis_vector(int axis, int sign) {
    Vec3 v;
    v[axis] = static_cast<double>(sign);
    return v;
}

Vec3 vec_from(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw SchemaError(field, "expected an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ControllerPose pose_from_json(const json& j, Hand hand) {
    if (!j.is_object()) {
        throw SchemaError("pose", "expected an object or null");
    }
    ControllerPose p;
    p.hand = hand;
    p.position = vec_from(j.value("position", json()), "pose.position");
    const json& q = j.value("orientation", json());
    if (!q.is_array() || q.size() != 4) {
        throw SchemaError("pose.orientation", "expected [qx, qy, qz, qw]");
    }
    p.orientation = {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()};
    p.velocity = vec_from(j.value("velocity", json()), "pose.velocity");
    if (!j.contains("t") || !j["t"].is_number()) {
        throw SchemaError("pose.t", "expected a number");
    }
    p.timestamp = j["t"].get<double>();
    return p;
}

}  // namespace

InputEvent InputEvent::make_pose(double time, const ControllerPose& pose) {
    InputEvent e;
    e.time = time;
    e.kind = Kind::pose;
    e.hand = pose.hand;
    e.pose = pose;
    return e;
}

InputEvent InputEvent::make_absent(double time, Hand hand) {
    InputEvent e;
    e.time = time;
    e.kind = Kind::absent;
    e.hand = hand;
    return e;
}

InputEvent InputEvent::make_alpha(double time, double alpha) {
    InputEvent e;
    e.time = time;
    e.kind = Kind::alpha;
    e.alpha = alpha;
    return e;
}

std::int64_t event_tick(double time, double tau) {
    const double ticks = time / tau;
    const double nearest = std::round(ticks);
    if (std::fabs(ticks - nearest) <= kTickRoundoff * std::max(1.0, std::fabs(ticks))) {
        return static_cast<std::int64_t>(nearest);
    }
    return static_cast<std::int64_t>(std::ceil(ticks));
}

void PulseSpec::validate() const {
    if (axis < 0 || axis > 2) {
        throw std::invalid_argument("pulse axis must be x, y or z");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("pulse duration must be > 0");
    }
    if (!(offset_distance > 0.0) || !std::isfinite(offset_distance)) {
        throw std::invalid_argument("pulse offset must be > 0");
    }
    if (!(start >= 0.0) || !std::isfinite(start)) {
        throw std::invalid_argument("pulse start must be >= 0");
    }
    if (plane_normal_sign != 1 && plane_normal_sign != -1) {
        throw std::invalid_argument("pulse sign must be +1 or -1");
    }
}

PulseSpec parse_pulse(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    for (;;) {
        const std::size_t colon = text.find(':', begin);
        parts.push_back(text.substr(begin, colon - begin));
        if (colon == std::string::npos) {
            break;
        }
        begin = colon + 1;
    }
    if (parts.size() < 3 || parts.size() > 4) {
        throw std::invalid_argument("pulse must be axis:start:duration[:offset], got \"" + text + "\"");
    }
    PulseSpec spec;
    std::string axis = parts[0];
    if (!axis.empty() && (axis[0] == '-' || axis[0] == '+')) {
        spec.plane_normal_sign = axis[0] == '-' ? -1 : +1;
        axis = axis.substr(1);
    }
    if (axis == "x") {
        spec.axis = 0;
    } else if (axis == "y") {
        spec.axis = 1;
    } else if (axis == "z") {
        spec.axis = 2;
    } else {
        throw std::invalid_argument("pulse axis must be x, y or z, got \"" + parts[0] + "\"");
    }
    auto to_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw std::invalid_argument("pulse field \"" + s + "\" is not a number");
        }
        return v;
    };
    spec.start = to_double(parts[1]);
    spec.duration = to_double(parts[2]);
    if (parts.size() == 4) {
        spec.offset_distance = to_double(parts[3]);
    }
    spec.validate();
    return spec;
}

std::string format_pulse(const PulseSpec& spec) {
    static const char* names[] = {"x", "y", "z"};
    std::string out = spec.plane_normal_sign < 0 ? "-" : "";
    out += names[spec.axis];
    auto num = [](double v) { return json(v).dump(); };
    return out + ":" + num(spec.start) + ":" + num(spec.duration) + ":" + num(spec.offset_distance);
}

std::vector<InputEvent> pulse_schedule(const PulseSpec& spec, const Vec3& swarm_mean_at_start, double tau) {
    spec.validate();
    const Vec3 normal = axis_vector(spec.axis, spec.plane_normal_sign);
    ControllerPose pose;
    pose.hand = Hand::right;
    pose.position = swarm_mean_at_start - normal * spec.offset_distance;
    pose.orientation = quat_from_normal(normal);
    pose.velocity = {};

    const auto count = static_cast<std::int64_t>(std::llround(spec.duration / tau));
    const std::int64_t first = event_tick(spec.start, tau);
    std::vector<InputEvent> events;
    events.reserve(static_cast<std::size_t>(count) + 1);
    for (std::int64_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(first + k) * tau;
        pose.timestamp = t;
        events.push_back(InputEvent::make_pose(t, pose));
    }
    events.push_back(InputEvent::make_absent(static_cast<double>(first + count) * tau, Hand::right));
    return events;
}

void InputTimeline::push(const InputEvent& event) {
    if (!pending_.empty() && event.time < pending_.back().time) {
        throw std::invalid_argument("input events must be sorted by time");
    }
    pending_.push_back(event);
}

ControllerInputs InputTimeline::snapshot(std::int64_t tick) {
    while (cursor_ < pending_.size() && event_tick(pending_[cursor_].time, tau_) <= tick) {
        const InputEvent& e = pending_[cursor_++];
        if (e.kind == InputEvent::Kind::alpha) {
            alpha_ = e.alpha;
        } else {
            latest_[e.hand == Hand::left ? 0 : 1] = e;
        }
    }
    // Consumed events are no longer needed.
    if (cursor_ > 1024 && cursor_ * 2 > pending_.size()) {
        pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(cursor_));
        cursor_ = 0;
    }
    const double now = static_cast<double>(tick) * tau_;
    auto live = [&](int slot) -> std::optional<ControllerPose> {
        const auto& e = latest_[slot];
        if (!e || e->kind != InputEvent::Kind::pose) {
            return std::nullopt;
        }
        if (now - e->time > kPoseStalenessSeconds + kTickRoundoff) {
            return std::nullopt;
        }
        return e->pose;
    };
    return ControllerInputs{live(0), live(1)};
}

PulseSource::PulseSource(std::vector<PulseSpec> pulses, double tau) : pulses_(std::move(pulses)), tau_(tau) {
    for (const PulseSpec& p : pulses_) {
        p.validate();
    }
}

std::vector<InputEvent> PulseSource::events_for(const SimFrame& frame) {
    for (const PulseSpec& p : pulses_) {
        if (event_tick(p.start, tau_) == frame.tick) {
            auto scheduled = pulse_schedule(p, frame.metrics.mean_position, tau_);
            queued_.insert(queued_.end(), scheduled.begin(), scheduled.end());
        }
    }
    std::stable_sort(queued_.begin(), queued_.end(),
                     [](const InputEvent& a, const InputEvent& b) { return a.time < b.time; });
    std::vector<InputEvent> out;
    auto it = queued_.begin();
    while (it != queued_.end() && event_tick(it->time, tau_) <= frame.tick) {
        out.push_back(*it++);
    }
    queued_.erase(queued_.begin(), it);
    return out;
}

ReplaySource::ReplaySource(std::vector<InputEvent> events, double tau) : events_(std::move(events)), tau_(tau) {
    for (std::size_t i = 1; i < events_.size(); ++i) {
        if (events_[i].time < events_[i - 1].time) {
            throw std::invalid_argument("replay events must be sorted by time");
        }
    }
}

std::vector<InputEvent> ReplaySource::events_for(const SimFrame& frame) {
    std::vector<InputEvent> out;
    while (cursor_ < events_.size() && event_tick(events_[cursor_].time, tau_) <= frame.tick) {
        out.push_back(events_[cursor_++]);
    }
    return out;
}

std::vector<InputEvent> ShepherdScript::events_for(const SimFrame& frame) {
    const ShepherdConfig& c = config_;
    const Vec3 forward = c.forward.normalized();
    const Vec3 lateral = forward.cross(Vec3{0.0, 0.0, 1.0}).normalized();
    const Vec3 mean = frame.metrics.mean_position;
    const auto n_agents = static_cast<double>(frame.agents.size());

    auto left_behind = [&](const AgentState& a) { return forward.dot(a.position) <= c.pass_threshold; };
    auto waypoint = [&](double offset, double height) {
        Vec3 w = c.gap_center + forward * offset;
        w.z = height;
        return w;
    };

    if ((phase_ == Phase::approach || phase_ == Phase::insert) &&
        static_cast<double>(frame.metrics.crossed_count) >= c.handoff_fraction * n_agents) {
        phase_ = Phase::gather;
    }

    Vec3 reference = mean;
    Vec3 target;
    bool rear_anchored = true;
    if (phase_ == Phase::gather || phase_ == Phase::clear) {
        Vec3 sum;
        int count = 0;
        for (const AgentState& a : frame.agents) {
            if (left_behind(a)) {
                sum += a.position;
                ++count;
            }
        }
        if (count == 0) {
            phase_ = Phase::clear;
            target = mean + forward;
            rear_anchored = false;
        } else {
            phase_ = Phase::gather;
            reference = sum / static_cast<double>(count);
            target = waypoint(c.straggler_offset,
                              std::clamp(reference.z, c.straggler_height_min, c.straggler_height_max));
        }
    } else {
        const double height = std::clamp(mean.z, c.height_min, c.height_max);
        target = waypoint(phase_ == Phase::approach ? c.staging_offset : c.exit_offset, height);
        const Vec3 from_gap = mean - c.gap_center;
        if (phase_ == Phase::approach && std::fabs(lateral.dot(from_gap)) < c.lateral_tolerance &&
            forward.dot(from_gap) > -(c.staging_offset + c.approach_tolerance)) {
            phase_ = Phase::insert;
        }
    }

    const Vec3 normal = (target - reference).normalized();
    double rear = 0.0;
    if (rear_anchored) {
        for (const AgentState& a : frame.agents) {
            if (phase_ == Phase::gather && !left_behind(a)) {
                continue;
            }
            rear = std::min(rear, normal.dot(a.position - reference));
        }
    }
    ControllerPose pose;
    pose.hand = Hand::right;
    pose.position = reference + normal * (rear - c.rear_margin);
    pose.orientation = quat_from_normal(normal);
    pose.timestamp = frame.time;
    return {InputEvent::make_pose(frame.time, pose)};
}

json pulse_to_json(const PulseSpec& p) {
    static const char* names[] = {"x", "y", "z"};
    return {{"axis", names[p.axis]},
            {"start", p.start},
            {"duration", p.duration},
            {"offset", p.offset_distance},
            {"sign", p.plane_normal_sign}};
}

PulseSpec pulse_from_json(const json& j) {
    try {
        PulseSpec p;
        const std::string axis = j.at("axis").get<std::string>();
        p.axis = axis == "x" ? 0 : axis == "y" ? 1 : axis == "z" ? 2 : -1;
        p.start = j.at("start").get<double>();
        p.duration = j.at("duration").get<double>();
        p.offset_distance = j.at("offset").get<double>();
        p.plane_normal_sign = j.at("sign").get<int>();
        p.validate();
        return p;
    } catch (const std::exception& e) {
        throw SchemaError("pulses", e.what());
    }
}

json event_to_json(const InputEvent& e) {
    json j = {{"t", e.time}};
    switch (e.kind) {
        case InputEvent::Kind::alpha:
            j["alpha"] = e.alpha;
            break;
        case InputEvent::Kind::absent:
            j["hand"] = std::string(to_string(e.hand));
            j["pose"] = nullptr;
            break;
        case InputEvent::Kind::pose: {
            const ControllerPose& p = e.pose;
            j["hand"] = std::string(to_string(e.hand));
            j["pose"] = {{"position", {p.position.x, p.position.y, p.position.z}},
                         {"orientation", {p.orientation.x, p.orientation.y, p.orientation.z, p.orientation.w}},
                         {"velocity", {p.velocity.x, p.velocity.y, p.velocity.z}},
                         {"t", p.timestamp}};
            break;
        }
    }
    return j;
}

InputEvent event_from_json(const json& j) {
    if (!j.is_object() || !j.contains("t") || !j["t"].is_number()) {
        throw SchemaError("t", "input event needs a numeric time");
    }
    const double t = j["t"].get<double>();
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw SchemaError("t", "input event time must be >= 0");
    }
    if (j.contains("alpha")) {
        if (!j["alpha"].is_number() || j["alpha"].get<double>() < 0.0) {
            throw SchemaError("alpha", "expected a non-negative number");
        }
        return InputEvent::make_alpha(t, j["alpha"].get<double>());
    }
    if (!j.contains("hand") || !j["hand"].is_string()) {
        throw SchemaError("hand", "expected \"left\" or \"right\"");
    }
    Hand hand;
    try {
        hand = hand_from_string(j["hand"].get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw SchemaError("hand", e.what());
    }
    const json pose = j.value("pose", json());
    if (pose.is_null()) {
        return InputEvent::make_absent(t, hand);
    }
    try {
        return InputEvent::make_pose(t, pose_from_json(pose, hand));
    } catch (const json::exception& e) {
        throw SchemaError("pose", e.what());
    }
}

void write_input_log(std::ostream& out, const InputLog& log) {
    json pulses = json::array();
    for (const PulseSpec& p : log.pulses) {
        pulses.push_back(pulse_to_json(p));
    }
    out << json{{"format", "swarmsteer-inputs"}, {"version", 1}, {"pulses", pulses}}.dump() << '\n';
    for (const InputEvent& e : log.events) {
        out << event_to_json(e).dump() << '\n';
    }
    if (!out) {
        throw IoError("failed writing input log");
    }
}

InputLog read_input_log(std::istream& in) {
    InputLog log;
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("<header>", "empty input log");
    }
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw SchemaError("<header>", e.what());
    }
    if (header.value("format", "") != "swarmsteer-inputs") {
        throw SchemaError("format", "not a swarmsteer input log");
    }
    if (header.value("version", 0) != 1) {
        throw SchemaError("version", "unsupported input log version");
    }
    if (header.contains("pulses")) {
        for (const json& p : header["pulses"]) {
            log.pulses.push_back(pulse_from_json(p));
        }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError("line " + std::to_string(line_no), e.what());
        }
        InputEvent e = event_from_json(j);
        if (!log.events.empty() && e.time < log.events.back().time) {
            throw SchemaError("line " + std::to_string(line_no), "events out of time order");
        }
        log.events.push_back(e);
    }
    return log;
}

}  // namespace swarmsteer
