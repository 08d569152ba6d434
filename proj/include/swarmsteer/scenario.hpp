#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarmsteer/core_dynamics.hpp"
#include "swarmsteer/influence.hpp"
#include "swarmsteer/vec3.hpp"

namespace swarmsteer {

// Static axis-aligned obstacle. min < max componentwise.
struct WallBox {
    Vec3 min_corner;
    Vec3 max_corner;

    // Strictly inside (the faces themselves are free space).
    bool contains(const Vec3& p) const;
    bool operator==(const WallBox&) const = default;
};

struct Box {
    Vec3 min_corner;
    Vec3 max_corner;
    bool operator==(const Box&) const = default;
};

enum class HeadingMode { random, aligned };

// Agents count as "crossed" once their coordinate on `axis` is strictly past
// `threshold` in the `direction` (+1 or -1) sense. When a span is given, the
// other two coordinates must also lie inside [span_min, span_max] (the
// component on `axis` is ignored), so flying around the end of a wall does
// not count as passing through it.
struct CrossingPlane {
    int axis = 1;  // 0 = x, 1 = y, 2 = z
    double threshold = 0.0;
    int direction = +1;
    std::optional<Vec3> span_min;
    std::optional<Vec3> span_max;

    bool crossed(const Vec3& p) const;
    bool operator==(const CrossingPlane&) const = default;
};

struct Scenario {
    std::string name = "unnamed";
    ZoneParams zones;
    InfluenceParams influence;
    int agent_count = 16;
    Box spawn_region{{-5.0, -5.0, -5.0}, {5.0, 5.0, 5.0}};
    HeadingMode spawn_heading_mode = HeadingMode::random;
    Vec3 spawn_heading{1.0, 0.0, 0.0};  // used when aligned
    std::vector<WallBox> walls;
    std::optional<CrossingPlane> crossing;
    std::uint64_t seed = 1;
    int max_ticks = 600;

    // Throws std::invalid_argument whose message starts with the field path.
    void validate() const;
    bool operator==(const Scenario&) const = default;
};

}  // namespace swarmsteer
