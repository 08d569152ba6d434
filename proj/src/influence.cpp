#include "swarmsteer/influence.hpp"

#include <cmath>
#include <string>

namespace swarmsteer {

namespace {
constexpr double kMinQuatNorm = 1e-6;
}

std::string_view to_string(Hand hand) {
    return hand == Hand::left ? "left" : "right";
}

Hand hand_from_string(std::string_view text) {
    if (text == "left") {
        return Hand::left;
    }
    if (text == "right") {
        return Hand::right;
    }
    throw std::invalid_argument("hand must be \"left\" or \"right\", got \"" + std::string(text) + "\"");
}

double Quat::norm() const {
    return std::sqrt(x * x + y * y + z * z + w * w);
}

Quat quat_from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 a = axis.normalized();
    const double s = std::sin(angle / 2.0);
    return {a.x * s, a.y * s, a.z * s, std::cos(angle / 2.0)};
}

Quat quat_from_normal(const Vec3& normal) {
    const Vec3 n = normal.normalized();
    if (n.z < -1.0 + 1e-12) {
        return {1.0, 0.0, 0.0, 0.0};
    }
    // Half-way quaternion between +Z and n: (z x n, 1 + z.n), normalized.
    Quat q{-n.y, n.x, 0.0, 1.0 + n.z};
    const double len = q.norm();
    return {q.x / len, q.y / len, q.z / len, q.w / len};
}

void InfluenceParams::validate() const {
    auto non_negative = [](double v, const char* field) {
        if (!(std::isfinite(v) && v >= 0.0)) {
            throw std::invalid_argument(std::string("influence.") + field + " must be finite and >= 0");
        }
    };
    non_negative(alpha, "alpha");
    non_negative(stiffness, "K");
    non_negative(damping, "B");
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("influence_sign must be +1 or -1");
    }
}

Vec3 plane_normal(const ControllerPose& pose) {
    const double n = pose.orientation.norm();
    if (!(n >= kMinQuatNorm) || !std::isfinite(n)) {
        throw InvalidPose("controller orientation quaternion is degenerate");
    }
    const double x = pose.orientation.x / n;
    const double y = pose.orientation.y / n;
    const double z = pose.orientation.z / n;
    const double w = pose.orientation.w / n;
    // Third column of the rotation matrix.
    const Vec3 normal{2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y)};
    return normal.normalized();
}

Vec3 controller_influence(const AgentState& agent, const Vec3& agent_velocity,
                          const ControllerPose& pose, const InfluenceParams& params) {
    const Vec3 n = plane_normal(pose);
    const double normal_speed = n.dot(agent_velocity - pose.velocity);
    const double normal_offset = n.dot(agent.position - pose.position);
    const double magnitude = params.damping * normal_speed + params.stiffness * normal_offset;
    return n * (static_cast<double>(params.sign) * magnitude);
}

AgentInfluence total_influence(const AgentState& agent, const std::optional<ControllerPose>& left,
                               const std::optional<ControllerPose>& right,
                               const InfluenceParams& params) {
    AgentInfluence out;
    out.id = agent.id;
    const Vec3 v = agent.velocity();
    if (left) {
        out.left = controller_influence(agent, v, *left, params);
    }
    if (right) {
        out.right = controller_influence(agent, v, *right, params);
    }
    out.total = out.left + out.right;
    return out;
}

Vec3 blend_direction(const Vec3& desired, const Vec3& influence, double alpha) {
    if (alpha == 0.0) {
        return desired;
    }
    return desired + influence * alpha;
}

}  // namespace swarmsteer
