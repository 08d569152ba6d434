#pragma once
/*
core_dynamics.hpp
-----------------
Zone-based (Couzin) flocking rules in R^3.

Every function here is pure: the result depends only on the arguments, so
agents of one tick can be evaluated in any order (or in parallel) against the
previous tick's frozen state.
*/

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmsteer/vec3.hpp"

namespace swarmsteer {

using AgentId = std::int32_t;

struct AgentState {
    AgentId id = 0;
    Vec3 position;
    Vec3 heading{1.0, 0.0, 0.0};  // unit
    double speed = 1.0;           // m/s
    double yaw = 0.0;             // atan2(heading.y, heading.x)

    Vec3 velocity() const { return heading * speed; }
    bool operator==(const AgentState&) const = default;
};

// Builds an agent with yaw derived from the (normalized) heading.
AgentState make_agent(AgentId id, const Vec3& position, const Vec3& heading, double speed);

double yaw_of(const Vec3& heading);

struct ZoneParams {
    double r_repulsion = 1.0;     // m
    double r_orientation = 6.0;   // m
    double r_attraction = 14.0;   // m
    double max_turn_rate = 0.7;   // rad/s
    double speed = 2.0;           // m/s
    double tau = 0.1;             // s

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    bool operator==(const ZoneParams&) const = default;
};

struct NeighborSets {
    // Ascending id order, so sums over a set do not depend on frame order.
    std::vector<AgentId> repulsion_ids;
    std::vector<AgentId> orientation_ids;
    std::vector<AgentId> attraction_ids;

    std::size_t n_r() const { return repulsion_ids.size(); }
    std::size_t n_o() const { return orientation_ids.size(); }
    std::size_t n_a() const { return attraction_ids.size(); }
};

// Unit vector from `from` toward `to`. Coincident agents get a fixed
// pseudo-random direction derived from the id pair, antisymmetric in the pair.
Vec3 unit_toward(const AgentState& from, const AgentState& to);

// Deterministic unit vector for the unordered pair {a, b}.
Vec3 coincident_direction(AgentId a, AgentId b);

// Buckets each agent in `others` (self, if present by id, is skipped) into the
// half-open distance shells (0, r_r], (r_r, r_o], (r_o, r_a]. Distance zero
// counts as repulsion.
NeighborSets classify_neighbors(const AgentState& self, std::span<const AgentState> others,
                                const ZoneParams& zones);

// -sum unit(x_j - x_i). Not normalized.
Vec3 repulsion_direction(const AgentState& self, std::span<const AgentState> repulsion_neighbors);

// sum heading_j. Self is never part of the set.
Vec3 orientation_direction(std::span<const AgentState> orientation_neighbors);

// +sum unit(x_j - x_i).
Vec3 attraction_direction(const AgentState& self, std::span<const AgentState> attraction_neighbors);

// Piecewise selector: repulsion dominates; orientation and attraction are
// averaged when both present; previous heading when no neighbours at all.
Vec3 desired_direction(const AgentState& self, const NeighborSets& sets,
                       std::span<const AgentState> all_agents);

// Rotates the heading toward `target_direction` by at most max_turn_rate * tau
// and advances the position by speed * tau along the new heading.
AgentState turn_and_step(const AgentState& self, const Vec3& target_direction,
                         const ZoneParams& zones);

// Heading after a turn of at most max_angle radians from `heading` toward
// `target` (both unit). Antiparallel targets rotate about any_orthogonal().
Vec3 rotate_toward(const Vec3& heading, const Vec3& target, double max_angle);

// Looks up agents by id, in the order given. Throws std::out_of_range.
std::vector<AgentState> gather(std::span<const AgentId> ids, std::span<const AgentState> agents);

}  // namespace swarmsteer
