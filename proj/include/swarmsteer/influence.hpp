#pragma once
/*
influence.hpp
-------------
Impedance-style human influence on the swarm.

Each hand-held controller defines a plane (its local XY plane) with unit
normal n. An agent's response to one controller is

    u = s * ( B * (n . (v_i - v_c)) + K * (n . (x_i - x_c)) ) * n

with K the stiffness (1/m), B the damping (1/(m/s)) and s = +1 (shepherding
paddle: the plane pushes agents on its +n side further along +n) or s = -1
(spring: agents are pulled onto the plane). Left and right contributions are
summed and blended additively into the desired direction with gain alpha.
*/

#include <optional>
#include <stdexcept>
#include <string_view>

#include "swarmsteer/core_dynamics.hpp"
#include "swarmsteer/vec3.hpp"

namespace swarmsteer {

enum class Hand { left, right };

std::string_view to_string(Hand hand);
// Throws std::invalid_argument for anything but "left"/"right".
Hand hand_from_string(std::string_view text);

struct Quat {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 1.0;

    double norm() const;
    bool operator==(const Quat&) const = default;
};

// Unit quaternion for a rotation of `angle` radians about `axis`.
Quat quat_from_axis_angle(const Vec3& axis, double angle);

// Shortest-arc orientation whose local +Z axis points along `normal`.
Quat quat_from_normal(const Vec3& normal);

class InvalidPose : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ControllerPose {
    Hand hand = Hand::left;
    Vec3 position;     // x_c, m
    Quat orientation;  // unit
    Vec3 velocity;     // xdot_c, m/s
    double timestamp = 0.0;  // s

    bool operator==(const ControllerPose&) const = default;
};

struct InfluenceParams {
    double alpha = 0.0;      // blend gain, unitless
    double stiffness = 0.0;  // K, 1/m
    double damping = 0.0;    // B, 1/(m/s)
    int sign = +1;           // +1 paddle, -1 spring

    void validate() const;
    bool operator==(const InfluenceParams&) const = default;
};

// Per-agent influence, split by hand. total == left + right exactly.
struct AgentInfluence {
    AgentId id = 0;
    Vec3 left;
    Vec3 right;
    Vec3 total;

    bool operator==(const AgentInfluence&) const = default;
};

// The controller's local +Z axis in world frame. Throws InvalidPose when the
// quaternion norm is below 1e-6.
Vec3 plane_normal(const ControllerPose& pose);

Vec3 controller_influence(const AgentState& agent, const Vec3& agent_velocity,
                          const ControllerPose& pose, const InfluenceParams& params);

// Absent controllers contribute exactly zero.
AgentInfluence total_influence(const AgentState& agent, const std::optional<ControllerPose>& left,
                               const std::optional<ControllerPose>& right,
                               const InfluenceParams& params);

// d + alpha * u. alpha == 0 returns d unchanged (bitwise, including the sign
// of zero components).
Vec3 blend_direction(const Vec3& desired, const Vec3& influence, double alpha);

}  // namespace swarmsteer
