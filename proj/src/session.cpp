#include "swarmsteer/session.hpp"

#include <algorithm>
#include <cmath>

#include "swarmsteer/errors.hpp"
#include "swarmsteer/record.hpp"
#include "swarmsteer/scenario_io.hpp"

namespace swarmsteer {

using nlohmann::json;

namespace {

int slot(Hand hand) {
    return hand == Hand::left ? 0 : 1;
}

std::optional<Vec3> finite_vec(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        return std::nullopt;
    }
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) {
            return std::nullopt;
        }
        v[i] = j[i].get<double>();
    }
    if (!v.finite()) {
        return std::nullopt;
    }
    return v;
}

}  // namespace

std::string_view to_string(SessionPhase phase) {
    switch (phase) {
        case SessionPhase::idle: return "idle";
        case SessionPhase::running: return "running";
        case SessionPhase::paused: return "paused";
        case SessionPhase::finished: return "finished";
    }
    return "idle";
}

Session::Session(Scenario scenario, ScriptFactory script)
    : scenario_(std::move(scenario)), script_factory_(std::move(script)), timeline_(scenario_.zones.tau) {
    scenario_.validate();
    reset_run();
    generation_ = 0;
}

void Session::reset_run() {
    frame_ = std::make_shared<const SimFrame>(init_world(scenario_));
    timeline_ = InputTimeline(scenario_.zones.tau);
    live_alpha_ = scenario_.influence.alpha;
    pending_alpha_.reset();
    pending_[0].reset();
    pending_[1].reset();
    last_received_[0].reset();
    last_received_[1].reset();
    events_.clear();
    script_ = script_factory_ ? script_factory_(scenario_) : nullptr;
    ++generation_;
}

void Session::set_phase(SessionPhase phase) {
    phase_ = phase;
    broadcast(json{{"type", "phase"}, {"phase", std::string(to_string(phase))}}.dump());
}

void Session::send(ClientId client, std::string text) {
    outbox_.push_back({client, std::make_shared<const std::string>(std::move(text)), false});
}

void Session::broadcast(std::string text) {
    outbox_.push_back({std::nullopt, std::make_shared<const std::string>(std::move(text)), false});
}

void Session::error(ClientId client, std::string_view code, const std::string& detail) {
    send(client, json{{"type", "error"}, {"code", std::string(code)}, {"detail", detail}}.dump());
}

std::vector<Outgoing> Session::take_outbox() {
    std::vector<Outgoing> out;
    out.swap(outbox_);
    return out;
}

void Session::connect(ClientId client) {
    clients_.push_back(client);
    send(client, json{{"type", "phase"}, {"phase", std::string(to_string(phase_))}}.dump());
}

void Session::disconnect(ClientId client) {
    std::erase(clients_, client);
    // Its poses are left to go stale; nothing is injected on its behalf.
    if (steering_ == client) {
        steering_.reset();
    }
}

bool Session::may_control(ClientId client, bool claim) {
    if (!steering_) {
        if (claim) {
            steering_ = client;
        }
        return true;
    }
    return *steering_ == client;
}

void Session::handle(ClientId client, std::string_view text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error& e) {
        error(client, "bad_message", std::string("not valid JSON: ") + e.what());
        return;
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
        error(client, "bad_message", "message must be an object with a string \"type\"");
        return;
    }
    try {
        dispatch(client, msg);
    } catch (const json::exception& e) {
        // Wrongly typed members; the session state is untouched.
        error(client, "bad_message", e.what());
    }
}

void Session::dispatch(ClientId client, const json& msg) {
    const std::string type = msg["type"].get<std::string>();

    if (type == "hello") {
        std::string role = msg.value("role", "steer");
        if (role == "steer" && !may_control(client, true)) {
            error(client, "not_steering", "another client is steering; joined as observer");
            role = "observe";
        } else if (role != "steer") {
            role = "observe";
        }
        send(client, json{{"type", "hello"},
                          {"role", role},
                          {"scenario", scenario_.name},
                          {"tau", scenario_.zones.tau},
                          {"alpha", live_alpha_},
                          {"tick", frame_->tick}}
                         .dump());
        return;
    }

    const bool input = type == "pose" || type == "release" || type == "set_alpha";
    const bool control = type == "start" || type == "pause" || type == "reset" || type == "load_scenario";
    if (!input && !control) {
        error(client, "unknown_type", "unknown message type \"" + type + "\"");
        return;
    }
    if (!may_control(client, input)) {
        error(client, "not_steering", "only the steering client may send \"" + type + "\"");
        return;
    }

    if (type == "pose") {
        handle_pose(client, msg);
    } else if (type == "release") {
        Hand hand;
        try {
            hand = hand_from_string(msg.value("hand", ""));
        } catch (const std::invalid_argument& e) {
            error(client, "bad_message", e.what());
            return;
        }
        pending_[slot(hand)] = InputEvent::make_absent(0.0, hand);
    } else if (type == "set_alpha") {
        if (!msg.contains("alpha") || !msg["alpha"].is_number() || !std::isfinite(msg["alpha"].get<double>())) {
            error(client, "bad_message", "set_alpha needs a finite numeric \"alpha\"");
            return;
        }
        pending_alpha_ = std::clamp(msg["alpha"].get<double>(), 0.0, kAlphaMax);
    } else if (type == "start") {
        if (phase_ != SessionPhase::idle && phase_ != SessionPhase::paused) {
            error(client, "invalid_phase", "start is only valid when idle or paused");
            return;
        }
        set_phase(SessionPhase::running);
    } else if (type == "pause") {
        if (phase_ != SessionPhase::running) {
            error(client, "invalid_phase", "pause is only valid while running");
            return;
        }
        set_phase(SessionPhase::paused);
    } else if (type == "reset") {
        reset_run();
        set_phase(SessionPhase::idle);
    } else if (type == "load_scenario") {
        if (phase_ == SessionPhase::running) {
            error(client, "invalid_phase", "pause before loading a scenario");
            return;
        }
        try {
            Scenario next;
            if (msg.contains("scenario")) {
                next = scenario_from_json(msg["scenario"]);
            } else if (msg.contains("name") && msg["name"].is_string()) {
                next = preset(msg["name"].get<std::string>());
            } else {
                error(client, "bad_message", "load_scenario needs \"name\" or \"scenario\"");
                return;
            }
            scenario_ = std::move(next);
        } catch (const SchemaError& e) {
            error(client, "bad_message", e.what());
            return;
        }
        reset_run();
        set_phase(SessionPhase::idle);
    }
}

void Session::handle_pose(ClientId client, const json& msg) {
    Hand hand;
    try {
        hand = hand_from_string(msg.value("hand", ""));
    } catch (const std::invalid_argument& e) {
        error(client, "bad_message", e.what());
        return;
    }
    const auto position = finite_vec(msg.value("position", json()));
    if (!position) {
        error(client, "bad_message", "pose.position must be 3 finite numbers");
        return;
    }
    const json q = msg.value("orientation", json());
    if (!q.is_array() || q.size() != 4 || !q[0].is_number() || !q[1].is_number() || !q[2].is_number() ||
        !q[3].is_number()) {
        error(client, "bad_message", "pose.orientation must be [qx, qy, qz, qw]");
        return;
    }
    const Quat orientation{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()};
    if (!std::isfinite(orientation.norm()) || orientation.norm() < 1e-6) {
        error(client, "bad_message", "pose.orientation is degenerate");
        return;
    }
    if (!msg.contains("t") || !msg["t"].is_number() || !std::isfinite(msg["t"].get<double>())) {
        error(client, "bad_message", "pose.t must be a finite number");
        return;
    }
    const double t = msg["t"].get<double>();
    const auto& previous = last_received_[slot(hand)];
    if (previous && t <= previous->timestamp) {
        error(client, "stale_pose", "pose time must increase per hand");
        return;
    }

    ControllerPose pose;
    pose.hand = hand;
    pose.position = *position;
    pose.orientation = orientation;
    pose.timestamp = t;
    const json velocity = msg.value("velocity", json());
    if (velocity.is_null()) {
        if (previous) {
            const Vec3 v = (pose.position - previous->position) / (t - previous->timestamp);
            for (int i = 0; i < 3; ++i) {
                pose.velocity[i] = std::clamp(v[i], -kPoseVelocityLimit, kPoseVelocityLimit);
            }
        }
    } else if (auto v = finite_vec(velocity)) {
        pose.velocity = *v;
    } else {
        error(client, "bad_message", "pose.velocity must be 3 finite numbers or null");
        return;
    }
    last_received_[slot(hand)] = pose;
    pending_[slot(hand)] = InputEvent::make_pose(0.0, pose);
}

std::shared_ptr<const SimFrame> Session::step() {
    if (phase_ != SessionPhase::running) {
        return nullptr;
    }
    const std::int64_t k = frame_->tick;
    const double now = static_cast<double>(k) * scenario_.zones.tau;
    auto apply = [&](InputEvent e) {
        timeline_.push(e);
        events_.push_back(std::move(e));
    };
    if (script_) {
        for (InputEvent& e : script_->events_for(*frame_)) {
            apply(std::move(e));
        }
    }
    if (pending_alpha_) {
        live_alpha_ = *pending_alpha_;
        apply(InputEvent::make_alpha(now, live_alpha_));
        pending_alpha_.reset();
    }
    for (auto& pending : pending_) {
        if (pending) {
            pending->time = now;
            apply(*pending);
            pending.reset();
        }
    }
    const ControllerInputs inputs = timeline_.snapshot(k);
    live_alpha_ = timeline_.alpha().value_or(scenario_.influence.alpha);
    TickOptions options;
    options.alpha = timeline_.alpha();
    try {
        frame_ = std::make_shared<const SimFrame>(tick(*frame_, inputs, scenario_, options));
    } catch (const NumericAbort& e) {
        broadcast(json{{"type", "error"}, {"code", "numeric_abort"}, {"detail", e.what()}}.dump());
        set_phase(SessionPhase::finished);
        return nullptr;
    }
    outbox_.push_back({std::nullopt, std::make_shared<const std::string>(frame_line(*frame_)), true});
    if (frame_->tick >= scenario_.max_ticks) {
        set_phase(SessionPhase::finished);
    }
    return frame_;
}

}  // namespace swarmsteer
