#include "swarmsteer/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "swarmsteer/rng.hpp"

namespace swarmsteer {

namespace {

constexpr double kWallStandoff = 0.01;  // m
constexpr int kSpawnAttemptsPerAgent = 10000;
constexpr int kMaxWallPasses = 8;

bool boxes_overlap(const Box& a, const WallBox& b) {
    for (int k = 0; k < 3; ++k) {
        if (a.max_corner[k] <= b.min_corner[k] || b.max_corner[k] <= a.min_corner[k]) {
            return false;
        }
    }
    return true;
}

bool agent_finite(const AgentState& a) {
    return a.position.finite() && a.heading.finite() && std::isfinite(a.yaw);
}

// Heading with the component along `axis` removed; deterministic tangent when
// nothing is left.
Vec3 slide_heading(const Vec3& heading, int axis) {
    Vec3 h = heading;
    h[axis] = 0.0;
    Vec3 out = h.normalized();
    if (out.norm2() == 0.0) {
        Vec3 normal;
        normal[axis] = 1.0;
        out = any_orthogonal(normal);
    }
    return out;
}

// Pushes a point that ended up strictly inside `box` out through the nearest face.
Vec3 eject(const Vec3& p, const WallBox& box, int* axis_out) {
    int best_axis = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    double best_value = p.x;
    for (int k = 0; k < 3; ++k) {
        const double to_min = p[k] - box.min_corner[k];
        const double to_max = box.max_corner[k] - p[k];
        if (to_min < best_dist) {
            best_dist = to_min;
            best_axis = k;
            best_value = box.min_corner[k] - kWallStandoff;
        }
        if (to_max < best_dist) {
            best_dist = to_max;
            best_axis = k;
            best_value = box.max_corner[k] + kWallStandoff;
        }
    }
    Vec3 out = p;
    out[best_axis] = best_value;
    *axis_out = best_axis;
    return out;
}

}  // namespace

bool WallBox::contains(const Vec3& p) const {
    return p.x > min_corner.x && p.x < max_corner.x && p.y > min_corner.y && p.y < max_corner.y &&
           p.z > min_corner.z && p.z < max_corner.z;
}

bool CrossingPlane::crossed(const Vec3& p) const {
    const double coord = p[axis];
    if (!(direction > 0 ? coord > threshold : coord < threshold)) {
        return false;
    }
    for (int k = 0; k < 3; ++k) {
        if (k == axis) {
            continue;
        }
        if ((span_min && p[k] < (*span_min)[k]) || (span_max && p[k] > (*span_max)[k])) {
            return false;
        }
    }
    return true;
}

void Scenario::validate() const {
    zones.validate();
    influence.validate();
    if (agent_count < 1) {
        throw std::invalid_argument("agent_count must be >= 1");
    }
    if (max_ticks < 0) {
        throw std::invalid_argument("max_ticks must be >= 0");
    }
    for (int k = 0; k < 3; ++k) {
        if (!(spawn_region.min_corner[k] <= spawn_region.max_corner[k]) ||
            !spawn_region.min_corner.finite() || !spawn_region.max_corner.finite()) {
            throw std::invalid_argument("spawn_region.min must not exceed spawn_region.max");
        }
    }
    if (spawn_heading_mode == HeadingMode::aligned &&
        (!spawn_heading.finite() || spawn_heading.norm() < 1e-9)) {
        throw std::invalid_argument("spawn_heading must be a non-zero finite vector");
    }
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const WallBox& w = walls[i];
        for (int k = 0; k < 3; ++k) {
            if (!(w.min_corner[k] < w.max_corner[k])) {
                throw std::invalid_argument("walls[" + std::to_string(i) +
                                            "].min must be below max on every axis");
            }
        }
        if (boxes_overlap(spawn_region, w)) {
            throw std::invalid_argument("spawn_region overlaps walls[" + std::to_string(i) + "]");
        }
    }
    if (crossing) {
        if (crossing->axis < 0 || crossing->axis > 2) {
            throw std::invalid_argument("crossing.axis must be x, y or z");
        }
        if (crossing->direction != 1 && crossing->direction != -1) {
            throw std::invalid_argument("crossing.direction must be +1 or -1");
        }
        if (!std::isfinite(crossing->threshold)) {
            throw std::invalid_argument("crossing.threshold must be finite");
        }
        if ((crossing->span_min && !crossing->span_min->finite()) ||
            (crossing->span_max && !crossing->span_max->finite())) {
            throw std::invalid_argument("crossing.span must be finite");
        }
    }
}

NumericAbort::NumericAbort(std::int64_t tick, AgentId agent)
    : std::runtime_error("non-finite state for agent " + std::to_string(agent) + " at tick " +
                         std::to_string(tick)),
      tick_(tick),
      agent_(agent) {}

SimFrame init_world(const Scenario& scenario) {
    scenario.validate();
    Rng rng(scenario.seed);
    const double min_spacing = 0.5 * scenario.zones.r_repulsion;

    SimFrame frame;
    frame.tick = 0;
    frame.time = 0.0;
    frame.alpha = scenario.influence.alpha;
    frame.agents.reserve(static_cast<std::size_t>(scenario.agent_count));
    const Box& region = scenario.spawn_region;

    for (int id = 0; id < scenario.agent_count; ++id) {
        Vec3 p;
        bool placed = false;
        for (int attempt = 0; attempt < kSpawnAttemptsPerAgent && !placed; ++attempt) {
            p = {rng.uniform(region.min_corner.x, region.max_corner.x),
                 rng.uniform(region.min_corner.y, region.max_corner.y),
                 rng.uniform(region.min_corner.z, region.max_corner.z)};
            placed = std::none_of(frame.agents.begin(), frame.agents.end(), [&](const AgentState& a) {
                return (a.position - p).norm() < min_spacing;
            });
        }
        if (!placed) {
            throw SpawnError("spawn_region too small to place " + std::to_string(scenario.agent_count) +
                             " agents at least " + std::to_string(min_spacing) + " m apart");
        }
        const Vec3 heading = scenario.spawn_heading_mode == HeadingMode::aligned
                                 ? scenario.spawn_heading
                                 : rng.unit_vector();
        frame.agents.push_back(make_agent(id, p, heading, scenario.zones.speed));
        frame.influence.push_back(AgentInfluence{id, {}, {}, {}});
    }
    frame.metrics = compute_metrics(frame.agents, scenario);
    return frame;
}

std::optional<double> segment_entry(const Vec3& from, const Vec3& to, const WallBox& box, int* axis) {
    const Vec3 d = to - from;
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    int enter_axis = -1;
    for (int k = 0; k < 3; ++k) {
        if (d[k] == 0.0) {
            if (!(from[k] > box.min_corner[k] && from[k] < box.max_corner[k])) {
                return std::nullopt;
            }
            continue;
        }
        double t0 = (box.min_corner[k] - from[k]) / d[k];
        double t1 = (box.max_corner[k] - from[k]) / d[k];
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        if (t0 > t_enter) {
            t_enter = t0;
            enter_axis = k;
        }
        t_exit = std::min(t_exit, t1);
    }
    if (!(t_enter < t_exit) || t_exit <= 0.0 || t_enter >= 1.0 || t_enter < 0.0 || enter_axis < 0) {
        return std::nullopt;
    }
    if (axis) {
        *axis = enter_axis;
    }
    return t_enter;
}

AgentState resolve_wall_collisions(const AgentState& previous, const AgentState& stepped,
                                   std::span<const WallBox> walls) {
    AgentState out = stepped;
    double best_t = std::numeric_limits<double>::infinity();
    int best_axis = -1;
    const WallBox* best_box = nullptr;
    for (const WallBox& w : walls) {
        int axis = -1;
        if (auto t = segment_entry(previous.position, stepped.position, w, &axis); t && *t < best_t) {
            best_t = *t;
            best_axis = axis;
            best_box = &w;
        }
    }
    if (best_box) {
        const Vec3 d = stepped.position - previous.position;
        Vec3 p = previous.position + d * best_t;
        // Entry face is the one facing the motion on best_axis.
        p[best_axis] = d[best_axis] > 0.0 ? best_box->min_corner[best_axis] - kWallStandoff
                                          : best_box->max_corner[best_axis] + kWallStandoff;
        out.position = p;
        out.heading = slide_heading(stepped.heading, best_axis);
    }
    // Standoff points can land inside a neighbouring box; push out until free.
    for (int pass = 0; pass < kMaxWallPasses; ++pass) {
        auto it = std::find_if(walls.begin(), walls.end(),
                               [&](const WallBox& w) { return w.contains(out.position); });
        if (it == walls.end()) {
            break;
        }
        int axis = 0;
        out.position = eject(out.position, *it, &axis);
        out.heading = slide_heading(out.heading, axis);
    }
    out.yaw = yaw_of(out.heading);
    return out;
}

double circular_mean(std::span<const double> angles) {
    double s = 0.0;
    double c = 0.0;
    for (double a : angles) {
        s += std::sin(a);
        c += std::cos(a);
    }
    return yaw_of(Vec3{c, s, 0.0});
}

SwarmMetrics compute_metrics(std::span<const AgentState> agents, const Scenario& scenario) {
    SwarmMetrics m;
    if (agents.empty()) {
        return m;
    }
    // Sum in id order so the metrics are independent of frame order.
    std::vector<const AgentState*> ordered;
    ordered.reserve(agents.size());
    for (const AgentState& a : agents) {
        ordered.push_back(&a);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const AgentState* a, const AgentState* b) { return a->id < b->id; });

    Vec3 pos_sum;
    Vec3 heading_sum;
    std::vector<double> yaws;
    yaws.reserve(agents.size());
    for (const AgentState* a : ordered) {
        pos_sum += a->position;
        heading_sum += a->heading;
        yaws.push_back(a->yaw);
        if (scenario.crossing && scenario.crossing->crossed(a->position)) {
            ++m.crossed_count;
        }
    }
    const double n = static_cast<double>(agents.size());
    m.mean_position = pos_sum / n;
    m.polarization = heading_sum.norm() / n;
    m.mean_yaw = circular_mean(yaws);
    return m;
}

SimFrame tick(const SimFrame& frame, const ControllerInputs& inputs, const Scenario& scenario,
              const TickOptions& options) {
    const std::span<const AgentState> agents(frame.agents);
    const double alpha = options.alpha.value_or(scenario.influence.alpha);

    SimFrame next;
    next.tick = frame.tick + 1;
    next.time = static_cast<double>(next.tick) * scenario.zones.tau;
    next.alpha = options.influence_enabled ? alpha : 0.0;
    next.agents.reserve(agents.size());
    next.influence.reserve(agents.size());

    for (const AgentState& agent : agents) {
        const NeighborSets sets = classify_neighbors(agent, agents, scenario.zones);
        Vec3 direction = desired_direction(agent, sets, agents);
        AgentInfluence applied{agent.id, {}, {}, {}};
        if (options.influence_enabled) {
            applied = total_influence(agent, inputs.left, inputs.right, scenario.influence);
            direction = blend_direction(direction, applied.total, alpha);
        }
        const AgentState stepped = turn_and_step(agent, direction, scenario.zones);
        const AgentState resolved = resolve_wall_collisions(agent, stepped, scenario.walls);
        if (!agent_finite(resolved) || !applied.total.finite()) {
            throw NumericAbort(next.tick, agent.id);
        }
        next.agents.push_back(resolved);
        next.influence.push_back(applied);
    }
    next.metrics = compute_metrics(next.agents, scenario);
    return next;
}

World::World(Scenario scenario)
    : scenario_(std::move(scenario)), frame_(std::make_shared<const SimFrame>(init_world(scenario_))) {}

const SimFrame& World::step(const ControllerInputs& inputs, const TickOptions& options) {
    frame_ = std::make_shared<const SimFrame>(tick(*frame_, inputs, scenario_, options));
    return *frame_;
}

}  // namespace swarmsteer
