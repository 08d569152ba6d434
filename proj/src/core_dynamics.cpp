#include "swarmsteer/core_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace swarmsteer {

namespace {

constexpr double kMinTargetNorm = 1e-12;
constexpr double kAngleSlack = 1e-12;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

double yaw_of(const Vec3& heading) {
    const double yaw = std::atan2(heading.y, heading.x);
    // atan2 returns -pi for (-x, -0); fold it onto +pi.
    return yaw == -std::numbers::pi ? std::numbers::pi : yaw;
}

AgentState make_agent(AgentId id, const Vec3& position, const Vec3& heading, double speed) {
    AgentState a;
    a.id = id;
    a.position = position;
    a.heading = heading.normalized();
    if (a.heading.norm2() == 0.0) {
        a.heading = {1.0, 0.0, 0.0};
    }
    a.speed = speed;
    a.yaw = yaw_of(a.heading);
    return a;
}

void ZoneParams::validate() const {
    auto positive = [](double v, const char* field) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw std::invalid_argument(std::string("zones.") + field + " must be positive and finite");
        }
    };
    positive(r_repulsion, "r_repulsion");
    positive(r_orientation, "r_orientation");
    positive(r_attraction, "r_attraction");
    positive(max_turn_rate, "max_turn_rate");
    positive(speed, "speed");
    positive(tau, "tau");
    if (!(r_repulsion < r_orientation)) {
        throw std::invalid_argument("zones.r_orientation must exceed zones.r_repulsion");
    }
    if (!(r_orientation < r_attraction)) {
        throw std::invalid_argument("zones.r_attraction must exceed zones.r_orientation");
    }
}

Vec3 coincident_direction(AgentId a, AgentId b) {
    const auto lo = static_cast<std::uint32_t>(std::min(a, b));
    const auto hi = static_cast<std::uint32_t>(std::max(a, b));
    const std::uint64_t h1 = splitmix64((static_cast<std::uint64_t>(lo) << 32) | hi);
    const std::uint64_t h2 = splitmix64(h1);
    // Archimedes: z uniform in [-1, 1], azimuth uniform.
    const double z = 2.0 * unit_interval(h1) - 1.0;
    const double phi = 2.0 * std::numbers::pi * unit_interval(h2);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3{r * std::cos(phi), r * std::sin(phi), z}.normalized();
}

Vec3 unit_toward(const AgentState& from, const AgentState& to) {
    const Vec3 delta = to.position - from.position;
    const double d = delta.norm();
    if (d > 0.0) {
        return delta / d;
    }
    const Vec3 f = coincident_direction(from.id, to.id);
    return from.id < to.id ? f : -f;
}

NeighborSets classify_neighbors(const AgentState& self, std::span<const AgentState> others,
                                const ZoneParams& zones) {
    NeighborSets sets;
    for (const AgentState& other : others) {
        if (other.id == self.id) {
            continue;
        }
        const double d = (other.position - self.position).norm();
        if (d <= zones.r_repulsion) {
            sets.repulsion_ids.push_back(other.id);
        } else if (d <= zones.r_orientation) {
            sets.orientation_ids.push_back(other.id);
        } else if (d <= zones.r_attraction) {
            sets.attraction_ids.push_back(other.id);
        }
    }
    std::sort(sets.repulsion_ids.begin(), sets.repulsion_ids.end());
    std::sort(sets.orientation_ids.begin(), sets.orientation_ids.end());
    std::sort(sets.attraction_ids.begin(), sets.attraction_ids.end());
    return sets;
}

Vec3 repulsion_direction(const AgentState& self, std::span<const AgentState> repulsion_neighbors) {
    Vec3 sum;
    for (const AgentState& n : repulsion_neighbors) {
        sum += unit_toward(self, n);
    }
    return -sum;
}

Vec3 orientation_direction(std::span<const AgentState> orientation_neighbors) {
    Vec3 sum;
    for (const AgentState& n : orientation_neighbors) {
        sum += n.heading;
    }
    return sum;
}

Vec3 attraction_direction(const AgentState& self, std::span<const AgentState> attraction_neighbors) {
    Vec3 sum;
    for (const AgentState& n : attraction_neighbors) {
        sum += unit_toward(self, n);
    }
    return sum;
}

std::vector<AgentState> gather(std::span<const AgentId> ids, std::span<const AgentState> agents) {
    std::vector<AgentState> out;
    out.reserve(ids.size());
    for (AgentId id : ids) {
        auto it = std::find_if(agents.begin(), agents.end(),
                               [id](const AgentState& a) { return a.id == id; });
        if (it == agents.end()) {
            throw std::out_of_range("no agent with id " + std::to_string(id));
        }
        out.push_back(*it);
    }
    return out;
}

Vec3 desired_direction(const AgentState& self, const NeighborSets& sets,
                       std::span<const AgentState> all_agents) {
    if (sets.n_r() > 0) {
        return repulsion_direction(self, gather(sets.repulsion_ids, all_agents));
    }
    const bool has_o = sets.n_o() > 0;
    const bool has_a = sets.n_a() > 0;
    if (has_o && has_a) {
        const Vec3 d_o = orientation_direction(gather(sets.orientation_ids, all_agents));
        const Vec3 d_a = attraction_direction(self, gather(sets.attraction_ids, all_agents));
        return (d_o + d_a) * 0.5;
    }
    if (has_o) {
        return orientation_direction(gather(sets.orientation_ids, all_agents));
    }
    if (has_a) {
        return attraction_direction(self, gather(sets.attraction_ids, all_agents));
    }
    return self.heading;
}

Vec3 rotate_toward(const Vec3& heading, const Vec3& target, double max_angle) {
    const double angle = angle_between(heading, target);
    if (angle <= max_angle + kAngleSlack) {
        return target;
    }
    // Unit vector in the rotation plane, orthogonal to heading, on target's side.
    Vec3 ortho = (target - heading * heading.dot(target)).normalized();
    if (ortho.norm2() == 0.0) {
        ortho = any_orthogonal(heading);
    }
    return (heading * std::cos(max_angle) + ortho * std::sin(max_angle)).normalized();
}

AgentState turn_and_step(const AgentState& self, const Vec3& target_direction,
                         const ZoneParams& zones) {
    AgentState next = self;
    const double n = target_direction.norm();
    if (n >= kMinTargetNorm) {
        const Vec3 target = target_direction / n;
        next.heading = rotate_toward(self.heading, target, zones.max_turn_rate * zones.tau);
    }
    next.position = self.position + next.heading * (self.speed * zones.tau);
    next.yaw = yaw_of(next.heading);
    return next;
}

}  // namespace swarmsteer
