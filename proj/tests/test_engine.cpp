#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "swarmsteer/engine.hpp"
#include "swarmsteer/rng.hpp"
#include "swarmsteer/scenario_io.hpp"
#include "test_support.hpp"

using namespace swarmsteer;
using swarmsteer::testing::near;

namespace {

Scenario two_far_agents() {
    Scenario s;
    s.agent_count = 2;
    s.spawn_region = {{0, 0, 0}, {100, 100, 100}};
    s.influence = {5.0, 1.0, 0.5, +1};
    return s;
}

SimFrame frame_of(std::vector<AgentState> agents, const Scenario& s) {
    SimFrame f;
    f.agents = std::move(agents);
    for (const AgentState& a : f.agents) f.influence.push_back({a.id, {}, {}, {}});
    f.metrics = compute_metrics(f.agents, s);
    return f;
}

ControllerPose plane(Hand hand, Vec3 position, Vec3 normal) {
    ControllerPose p;
    p.hand = hand;
    p.position = position;
    p.orientation = quat_from_normal(normal);
    return p;
}

// Dense point sampling of the open segment against the open box interior.
bool sampled_enters(const Vec3& from, const Vec3& to, const WallBox& box) {
    constexpr int kSamples = 20000;
    for (int i = 0; i <= kSamples; ++i) {
        const double t = static_cast<double>(i) / kSamples;
        if (box.contains(from + (to - from) * t)) return true;
    }
    return false;
}

std::uint64_t fnv_frames(const std::vector<SimFrame>& frames) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&](double v) {
        unsigned char bytes[sizeof v];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
    };
    for (const SimFrame& f : frames) {
        for (const AgentState& a : f.agents) {
            mix(a.position.x), mix(a.position.y), mix(a.position.z);
            mix(a.heading.x), mix(a.heading.y), mix(a.heading.z);
        }
    }
    return h;
}

}  // namespace

TEST_CASE("init_world: seeded, sized and aligned") {
    Scenario s = preset("cohesive");
    s.seed = 12;
    const SimFrame a = init_world(s);
    const SimFrame b = init_world(s);
    CHECK(a == b);
    CHECK(a.agents.size() == 16);
    CHECK(a.tick == 0);
    for (const AgentState& ag : a.agents) {
        CHECK(ag.position.x >= s.spawn_region.min_corner.x);
        CHECK(ag.position.z <= s.spawn_region.max_corner.z);
        CHECK(std::fabs(ag.heading.norm() - 1.0) < 1e-12);
    }
    s.seed = 13;
    CHECK(!(init_world(s) == a));

    const SimFrame aligned = init_world(preset("paper-canyon"));
    CHECK(aligned.metrics.polarization == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("init_world: impossible spawn region is an error") {
    Scenario s;
    s.agent_count = 50;
    s.spawn_region = {{0, 0, 0}, {0.1, 0.1, 0.1}};
    CHECK_THROWS_AS(init_world(s), SpawnError);
}

TEST_CASE("tick: far-apart agents fly straight") {
    const Scenario s = two_far_agents();
    const SimFrame f = frame_of({make_agent(0, {0, 0, 0}, {1, 0, 0}, 2), make_agent(1, {50, 50, 50}, {0, 0, 1}, 2)}, s);
    const SimFrame n = tick(f, {}, s);
    CHECK(n.tick == 1);
    CHECK(n.time == doctest::Approx(0.1));
    CHECK(near(n.agents[0].position, {0.2, 0, 0}));
    CHECK(near(n.agents[1].position, {50, 50, 50.2}));
    CHECK(n.agents[0].heading == Vec3{1, 0, 0});
}

TEST_CASE("tick: no poses makes alpha irrelevant") {
    Scenario s = preset("cohesive");
    SimFrame a = init_world(s), b = a;
    for (int i = 0; i < 50; ++i) {
        a = tick(a, {}, s, {5.0, true});
        b = tick(b, {}, s, {0.0, true});
        REQUIRE(a.agents == b.agents);
    }
}

TEST_CASE("tick: applied influence is reported per agent") {
    Scenario s = preset("paper-canyon");
    const SimFrame f = init_world(s);
    ControllerInputs in;
    in.right = plane(Hand::right, f.metrics.mean_position - Vec3{0, 8, 0}, {0, 1, 0});
    const SimFrame n = tick(f, in, s);
    REQUIRE(n.influence.size() == n.agents.size());
    for (std::size_t i = 0; i < n.agents.size(); ++i) {
        CHECK(n.influence[i].id == n.agents[i].id);
        CHECK(n.influence[i].total.y > 0.0);
        CHECK(n.influence[i].left == Vec3{});
    }
    CHECK(n.alpha == 5.0);
}

TEST_CASE("wall: stepping into the face x = 10 stops 1 cm short and slides") {
    const std::vector<WallBox> walls{{{10, -5, -5}, {12, 5, 5}}};
    const AgentState before = make_agent(0, {9.9, 0, 0}, {0.8, 0.6, 0}, 2);
    const AgentState stepped = make_agent(0, {10.06, 0.12, 0}, {0.8, 0.6, 0}, 2);
    const AgentState out = resolve_wall_collisions(before, stepped, walls);
    CHECK(out.position.x == doctest::Approx(9.99).epsilon(1e-12));
    CHECK(out.heading.x == 0.0);
    CHECK(near(out.heading, {0, 1, 0}));
    CHECK(!walls[0].contains(out.position));
}

TEST_CASE("wall: head-on into a face picks a deterministic tangent") {
    const std::vector<WallBox> walls{{{10, -5, -5}, {12, 5, 5}}};
    const AgentState before = make_agent(0, {9.9, 0, 0}, {1, 0, 0}, 2);
    const AgentState stepped = make_agent(0, {10.1, 0, 0}, {1, 0, 0}, 2);
    const AgentState a = resolve_wall_collisions(before, stepped, walls);
    CHECK(a == resolve_wall_collisions(before, stepped, walls));
    CHECK(a.heading.x == 0.0);
    CHECK(std::fabs(a.heading.norm() - 1.0) < 1e-12);
}

TEST_CASE("wall: passing through the canyon gap is untouched") {
    const Scenario s = preset("paper-canyon");
    const AgentState before = make_agent(0, {0, 29.9, 10}, {0, 1, 0}, 2);
    const AgentState stepped = turn_and_step(before, {0, 1, 0}, s.zones);
    CHECK(resolve_wall_collisions(before, stepped, s.walls) == stepped);
}

TEST_CASE("wall: segment entry matches the sampled-segment oracle") {
    Rng rng(31);
    int hits = 0;
    for (int i = 0; i < 3000; ++i) {
        const Vec3 lo{rng.uniform(-2, 1), rng.uniform(-2, 1), rng.uniform(-2, 1)};
        const WallBox box{lo, lo + Vec3{rng.uniform(0.2, 2), rng.uniform(0.2, 2), rng.uniform(0.2, 2)}};
        const Vec3 from{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        if (box.contains(from)) continue;  // agents never start inside
        const Vec3 center = (box.min_corner + box.max_corner) * 0.5;
        const Vec3 to = i % 2 == 0 ? from + rng.unit_vector() * rng.uniform(0.05, 3)
                                   : from + (center - from) * rng.uniform(0.1, 1.5) + rng.unit_vector() * 0.3;
        const bool exact = segment_entry(from, to, box).has_value();
        const bool sampled = sampled_enters(from, to, box);
        if (exact != sampled) {
            // Only grazes thinner than the sampling step may disagree.
            const auto t = segment_entry(from, to, box);
            INFO("from " << from.x << "," << from.y << "," << from.z);
            REQUIRE(exact);
            REQUIRE(t.has_value());
        }
        hits += exact;
    }
    CHECK(hits > 600);
}

TEST_CASE("metrics: midpoint, wrap-around yaw and polarization oracle") {
    Scenario s;
    const auto m = compute_metrics(std::vector<AgentState>{make_agent(0, {0, 0, 0}, {1, 0, 0}, 2),
                                                           make_agent(1, {2, 0, 0}, {1, 0, 0}, 2)},
                                   s);
    CHECK(near(m.mean_position, {1, 0, 0}));

    const double d = 170.0 * std::numbers::pi / 180.0;
    const std::vector<double> yaws{d, -d};
    CHECK(std::fabs(circular_mean(yaws)) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(circular_mean(yaws) > 0);

    Rng rng(2);
    std::vector<AgentState> agents;
    double hx = 0, hy = 0, hz = 0;
    for (AgentId i = 0; i < 16; ++i) {
        agents.push_back(make_agent(i, {}, rng.unit_vector(), 2));
        hx += agents.back().heading.x, hy += agents.back().heading.y, hz += agents.back().heading.z;
    }
    const auto pm = compute_metrics(agents, s);
    CHECK(pm.polarization == doctest::Approx(std::sqrt(hx * hx + hy * hy + hz * hz) / 16.0).epsilon(1e-12));
    CHECK(pm.mean_yaw > -std::numbers::pi);
    CHECK(pm.mean_yaw <= std::numbers::pi);
}

TEST_CASE("metrics: crossed count respects the wall span") {
    const Scenario s = preset("paper-canyon");
    std::vector<AgentState> agents{make_agent(0, {0, 32, 10}, {0, 1, 0}, 2),    // through the gap
                                   make_agent(1, {60, 40, 10}, {0, 1, 0}, 2),   // around the end
                                   make_agent(2, {0, 30.5, 10}, {0, 1, 0}, 2)}; // still in the gap
    CHECK(compute_metrics(agents, s).crossed_count == 1);
}

TEST_CASE("numeric abort names the tick") {
    Scenario s = two_far_agents();
    SimFrame f = frame_of({make_agent(0, {0, 0, 0}, {1, 0, 0}, 2), make_agent(1, {50, 50, 50}, {1, 0, 0}, 2)}, s);
    ControllerInputs in;
    in.left = plane(Hand::left, {0, 0, 0}, {1, 0, 0});
    in.left->velocity = {std::numeric_limits<double>::infinity(), 0, 0};
    try {
        tick(f, in, s);
        FAIL("expected NumericAbort");
    } catch (const NumericAbort& e) {
        CHECK(e.tick() == 1);
        CHECK(e.agent() == 0);
    }
}

// ---- properties -------------------------------------------------------------

TEST_CASE("property: synchronous update is independent of agent order") {
    Scenario s = preset("paper-canyon");
    SimFrame f = init_world(s);
    for (int i = 0; i < 40; ++i) f = tick(f, {}, s);
    ControllerInputs in;
    in.left = plane(Hand::left, f.metrics.mean_position + Vec3{3, 0, 0}, {-1, 0.2, 0});
    SimFrame shuffled = f;
    std::reverse(shuffled.agents.begin(), shuffled.agents.end());
    std::rotate(shuffled.agents.begin(), shuffled.agents.begin() + 3, shuffled.agents.end());
    const SimFrame a = tick(f, in, s);
    const SimFrame b = tick(shuffled, in, s);
    CHECK(a.metrics == b.metrics);
    for (const AgentState& x : a.agents) {
        auto it = std::find_if(b.agents.begin(), b.agents.end(), [&](const AgentState& y) { return y.id == x.id; });
        REQUIRE(it != b.agents.end());
        CHECK(*it == x);
    }
}

TEST_CASE("property: walls are never entered and counts and ids are stable") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Scenario s = preset("milling-canyon");
        s.seed = seed;
        s.spawn_region = {{-6, 22, 4}, {6, 28, 16}};  // right in front of the wall
        SimFrame f = init_world(s);
        for (int k = 0; k < 300; ++k) {
            ControllerInputs in;
            in.right = plane(Hand::right, f.metrics.mean_position - Vec3{0, 6, 0}, {0.3, 1, 0});
            f = tick(f, in, s);
            REQUIRE(f.agents.size() == 16);
            for (std::size_t i = 0; i < f.agents.size(); ++i) {
                REQUIRE(f.agents[i].id == static_cast<AgentId>(i));
                for (const WallBox& w : s.walls) REQUIRE_FALSE(w.contains(f.agents[i].position));
            }
        }
    }
}

TEST_CASE("property: determinism across repeated runs") {
    Scenario s = preset("milling");
    SimFrame a = init_world(s), b = init_world(s);
    for (int k = 0; k < 100; ++k) {
        a = tick(a, {}, s);
        b = tick(b, {}, s);
    }
    CHECK(a == b);
}

TEST_CASE("regime sanity: cohesive polarizes, milling does not") {
    auto avg_pol = [](Scenario s) {
        double sum = 0;
        int n = 0;
        SimFrame f = init_world(s);
        for (int k = 1; k <= 400; ++k) {
            f = tick(f, {}, s);
            if (k >= 200) sum += f.metrics.polarization, ++n;
        }
        return sum / n;
    };
    for (std::uint64_t seed : {1, 2, 3}) {
        Scenario c = preset("cohesive");
        c.seed = seed;
        Scenario m = preset("milling");
        m.seed = seed;
        CHECK(avg_pol(c) > 0.8);
        CHECK(avg_pol(m) < 0.4);
    }
}

TEST_CASE("golden trajectory: 16 agents, 200 ticks") {
    Scenario s = preset("cohesive");
    s.seed = 42;
    std::vector<SimFrame> frames{init_world(s)};
    for (int k = 0; k < 200; ++k) frames.push_back(tick(frames.back(), {}, s));
    // Generated once from this build and reviewed (mean trace and polarization
    // plotted); any change to the dynamics or the PRNG shows up here.
    CHECK(fnv_frames(frames) == 0x5875f56ff3ab9a7full);
}
