#include "doctest.h"

#include <cmath>
#include <numbers>

#include "swarmsteer/influence.hpp"
#include "swarmsteer/rng.hpp"
#include "test_support.hpp"

using namespace swarmsteer;
using swarmsteer::testing::near;

namespace {

ControllerPose pose_at(Vec3 position, Quat q, Vec3 velocity = {}, Hand hand = Hand::left) {
    ControllerPose p;
    p.hand = hand;
    p.position = position;
    p.orientation = q;
    p.velocity = velocity;
    return p;
}

// Textbook rotation matrix of a unit quaternion, third column.
Vec3 matrix_third_column(double x, double y, double z, double w) {
    const double n = std::sqrt(x * x + y * y + z * z + w * w);
    x /= n, y /= n, z /= n, w /= n;
    const double m02 = 2 * (x * z + w * y);
    const double m12 = 2 * (y * z - w * x);
    const double m22 = 1 - 2 * (x * x + y * y);
    return {m02, m12, m22};
}

Quat random_quat(Rng& rng) {
    // Marsaglia-style uniform sampling is not required; any spread will do.
    return {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
}

const InfluenceParams kCanyonGains{5.0, 1.0, 0.5, +1};

}  // namespace

TEST_CASE("plane normal examples") {
    CHECK(near(plane_normal(pose_at({}, Quat{})), {0, 0, 1}));
    const double s = std::sin(std::numbers::pi / 4);
    CHECK(near(plane_normal(pose_at({}, Quat{s, 0, 0, s})), {0, -1, 0}));
    CHECK(near(plane_normal(pose_at({}, quat_from_axis_angle({1, 0, 0}, std::numbers::pi / 2))), {0, -1, 0}));
}

TEST_CASE("plane normal matches the rotation-matrix oracle") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Quat q = random_quat(rng);
        if (q.norm() < 1e-3) continue;
        const Vec3 n = plane_normal(pose_at({}, q));
        REQUIRE(near(n, matrix_third_column(q.x, q.y, q.z, q.w), 1e-9));
        REQUIRE(std::fabs(n.norm() - 1.0) <= 1e-9);
    }
}

TEST_CASE("degenerate quaternion is an invalid pose") {
    CHECK_THROWS_AS(plane_normal(pose_at({}, Quat{0, 0, 0, 0})), InvalidPose);
    CHECK_THROWS_AS(plane_normal(pose_at({}, Quat{1e-7, 0, 0, 0})), InvalidPose);
}

TEST_CASE("quat_from_normal points the local +Z axis along the normal") {
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        const Vec3 n = rng.unit_vector();
        REQUIRE(near(plane_normal(pose_at({}, quat_from_normal(n))), n, 1e-9));
    }
    CHECK(near(plane_normal(pose_at({}, quat_from_normal({0, 0, -1}))), {0, 0, -1}));
    CHECK(near(plane_normal(pose_at({}, quat_from_normal({0, 3, 0}))), {0, 1, 0}));
}

TEST_CASE("controller influence: hand-evaluated example") {
    // x_i - x_c = (1,2,3), v_i - v_c = (0,0,2), K = 1, B = 0.5, n = +z:
    // 0.5 * 2 + 1 * 3 = 4 along n.
    const AgentState agent = make_agent(0, {1, 2, 3}, {0, 0, 1}, 2.0);
    const ControllerPose pose = pose_at({0, 0, 0}, Quat{});
    CHECK(near(controller_influence(agent, agent.velocity(), pose, kCanyonGains), {0, 0, 4}));
}

TEST_CASE("controller influence: in-plane agent at rest relative to the plane is unaffected") {
    const AgentState agent = make_agent(0, {5, -2, 0}, {1, 0, 0}, 2.0);
    const ControllerPose pose = pose_at({0, 0, 0}, Quat{}, {3, 1, 0});
    CHECK(near(controller_influence(agent, agent.velocity(), pose, kCanyonGains), {0, 0, 0}));
}

TEST_CASE("controller influence: zero gains give zero") {
    Rng rng(4);
    const InfluenceParams zero{5.0, 0.0, 0.0, +1};
    for (int i = 0; i < 100; ++i) {
        const AgentState a = make_agent(0, {rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)}, rng.unit_vector(), 2);
        const ControllerPose p = pose_at({rng.uniform(-9, 9), 0, 0}, random_quat(rng), rng.unit_vector());
        REQUIRE(controller_influence(a, a.velocity(), p, zero) == Vec3{});
    }
}

TEST_CASE("influence sign flips the law") {
    const AgentState agent = make_agent(0, {1, 2, 3}, {0, 0, 1}, 2.0);
    InfluenceParams spring = kCanyonGains;
    spring.sign = -1;
    CHECK(near(controller_influence(agent, agent.velocity(), pose_at({}, Quat{}), spring), {0, 0, -4}));
}

TEST_CASE("total influence sums hands and treats absence as zero") {
    const AgentState agent = make_agent(0, {1, 2, 3}, {0, 0, 1}, 2.0);
    const auto none = total_influence(agent, std::nullopt, std::nullopt, kCanyonGains);
    CHECK(none.total == Vec3{});
    CHECK(none.left == Vec3{});
    CHECK(none.right == Vec3{});

    // Left yields (0,0,4); right plane with normal +y through y = 1 yields
    // K * (2 - 1) + B * (0 - 0) = 1 along +y.
    const ControllerPose left = pose_at({0, 0, 0}, Quat{});
    const ControllerPose right = pose_at({0, 1, 0}, quat_from_normal({0, 1, 0}), {}, Hand::right);
    const auto both = total_influence(agent, left, right, kCanyonGains);
    CHECK(near(both.left, {0, 0, 4}));
    CHECK(near(both.right, {0, 1, 0}));
    CHECK(near(both.total, {0, 1, 4}));
    CHECK(both.total == both.left + both.right);

    const auto twice = total_influence(agent, left, left, kCanyonGains);
    CHECK(twice.total == controller_influence(agent, agent.velocity(), left, kCanyonGains) * 2.0);
}

TEST_CASE("blend direction examples") {
    CHECK(blend_direction({1, 0, 0}, {0, 0, 4}, 5.0) == Vec3{1, 0, 20});
    const Vec3 d{-0.0, 0.25, -3};
    const Vec3 b = blend_direction(d, {7, -1, 2}, 0.0);
    CHECK(std::signbit(b.x));
    CHECK(b == d);
    CHECK(blend_direction(d, {0, 0, 0}, 5.0) == d);
}

TEST_CASE("influence params validation") {
    InfluenceParams p = kCanyonGains;
    p.alpha = -1;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("alpha"), std::invalid_argument);
    p = kCanyonGains;
    p.sign = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

// ---- properties -------------------------------------------------------------

TEST_CASE("property: output is parallel to the normal and linear in gains and offsets") {
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const Quat q = random_quat(rng);
        if (q.norm() < 1e-2) continue;
        const ControllerPose pose = pose_at({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)}, q,
                                            rng.unit_vector() * rng.uniform(0, 3));
        const Vec3 n = plane_normal(pose);
        const AgentState a = make_agent(0, {rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)}, rng.unit_vector(), 2);
        const InfluenceParams p{1.0, rng.uniform(0, 3), rng.uniform(0, 3), +1};
        const Vec3 u = controller_influence(a, a.velocity(), pose, p);
        REQUIRE(u.cross(n).norm() <= 1e-9 * std::max(1.0, u.norm()));

        // Stiffness and damping terms separately, then their sum.
        const Vec3 uk = controller_influence(a, a.velocity(), pose, {1.0, p.stiffness, 0.0, +1});
        const Vec3 ub = controller_influence(a, a.velocity(), pose, {1.0, 0.0, p.damping, +1});
        REQUIRE(near(u, uk + ub, 1e-9));
        const Vec3 uk2 = controller_influence(a, a.velocity(), pose, {1.0, 2 * p.stiffness, 0.0, +1});
        REQUIRE(near(uk2, uk * 2.0, 1e-9));

        // Doubling the offset from the plane doubles the stiffness term.
        AgentState far = a;
        far.position = pose.position + (a.position - pose.position) * 2.0;
        REQUIRE(near(controller_influence(far, a.velocity(), pose, {1.0, p.stiffness, 0.0, +1}), uk * 2.0, 1e-9));

        // Moving the agent within a plane parallel to the controller changes nothing.
        AgentState slid = a;
        slid.position = a.position + any_orthogonal(n) * rng.uniform(-20, 20);
        REQUIRE(near(controller_influence(slid, a.velocity(), pose, p), u, 1e-9));
    }
}

TEST_CASE("property: blend is strictly increasing in alpha along u") {
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 d = rng.unit_vector() * rng.uniform(0, 3);
        const Vec3 u = rng.unit_vector() * rng.uniform(0.01, 5);
        const double a1 = rng.uniform(0, 10);
        const double a2 = a1 + rng.uniform(0.01, 10);
        REQUIRE(blend_direction(d, u, a2).dot(u) > blend_direction(d, u, a1).dot(u));
    }
}
