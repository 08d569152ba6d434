// Acceptance run: one PASS/FAIL line per criterion, each with its runtime
// budget. Exits non-zero if any criterion fails or overruns.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "swarmsteer/core_dynamics.hpp"
#include "swarmsteer/harness.hpp"
#include "swarmsteer/influence.hpp"
#include "swarmsteer/record.hpp"
#include "swarmsteer/rng.hpp"
#include "swarmsteer/scenario_io.hpp"
#include "swarmsteer/summary.hpp"

using namespace swarmsteer;

namespace {

// Calibrated constants (see the calibration notes in the README).
constexpr double kPulseMargin = 1.0;  // m
constexpr double kYawEpsilon = 1.0;   // rad

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

// ---- helpers ----------------------------------------------------------------

struct Tally {
    int checks = 0, failed = 0;
    std::string first;
    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok && failed++ == 0) first = what;
    }
};

bool close(const Vec3& a, const Vec3& b, double tol = 1e-9) {
    return std::fabs(a.x - b.x) <= tol && std::fabs(a.y - b.y) <= tol && std::fabs(a.z - b.z) <= tol;
}

ControllerPose pose(Vec3 position, Vec3 normal, Vec3 velocity = {}, Hand hand = Hand::left) {
    ControllerPose p;
    p.hand = hand;
    p.position = position;
    p.orientation = quat_from_normal(normal);
    p.velocity = velocity;
    return p;
}

std::string record_text(const Scenario& s, const RunResult& run, const std::vector<PulseSpec>& pulses) {
    TrajectoryRecord r{make_header(s, run.initial, pulses), {}};
    for (const SimFrame& f : run.frames) r.rows.push_back(row_from_frame(f));
    std::ostringstream out;
    write_record(out, r);
    return out.str();
}

std::string count(int hits, int of) {
    return std::to_string(hits) + "/" + std::to_string(of);
}

// Holds one plane, fixed where the swarm mean was at `first`, until `last`.
class HeldPlane final : public InputSource {
public:
    HeldPlane(std::int64_t first, std::int64_t last, Vec3 offset, Vec3 normal, double tau)
        : first_(first), last_(last), offset_(offset), normal_(normal), tau_(tau) {}

    std::vector<InputEvent> events_for(const SimFrame& frame) override {
        const double t = static_cast<double>(frame.tick) * tau_;
        if (frame.tick == first_) anchor_ = frame.metrics.mean_position + offset_;
        if (frame.tick >= first_ && frame.tick < last_) {
            ControllerPose p = pose(anchor_, normal_);
            p.timestamp = t;
            return {InputEvent::make_pose(t, p)};
        }
        if (frame.tick == last_) return {InputEvent::make_absent(t, Hand::left)};
        return {};
    }

private:
    std::int64_t first_, last_;
    Vec3 offset_, normal_, anchor_;
    double tau_;
};

// ---- criteria ---------------------------------------------------------------

Outcome equation_suite() {
    Tally t;
    const ZoneParams z{};
    auto at = [&](AgentId id, Vec3 p, Vec3 h = {1, 0, 0}) { return make_agent(id, p, h, z.speed); };
    const AgentState o = at(0, {0, 0, 0});

    // Zone classification on the shell boundaries.
    std::vector<AgentState> shells{o, at(1, {1, 0, 0}), at(2, {0, 6, 0}), at(3, {0, 0, 14}), at(4, {0, 0, 14.0001}),
                                   at(5, {0.5, 0, 0})};
    const NeighborSets sets = classify_neighbors(o, shells, z);
    t.expect(sets.repulsion_ids == std::vector<AgentId>{1, 5}, "repulsion shell");
    t.expect(sets.orientation_ids == std::vector<AgentId>{2}, "orientation shell");
    t.expect(sets.attraction_ids == std::vector<AgentId>{3}, "attraction shell");

    // Repulsion: -(sum of unit offsets).
    std::vector<AgentState> r2{at(1, {1, 0, 0}), at(2, {0, 2, 0})};
    t.expect(close(repulsion_direction(o, r2), {-1, -1, 0}), "repulsion two");
    std::vector<AgentState> r1{at(1, {0, 0, 3})};
    t.expect(close(repulsion_direction(o, r1), {0, 0, -1}), "repulsion one");

    // Orientation: sum of headings.
    std::vector<AgentState> up{at(1, {0, 0, 0}, {0, 0, 1}), at(2, {1, 0, 0}, {0, 0, 1})};
    t.expect(close(orientation_direction(up), {0, 0, 2}), "orientation");

    // Attraction: sum of unit offsets.
    std::vector<AgentState> a2{at(1, {3, 0, 0}), at(2, {0, 0, 3})};
    t.expect(close(attraction_direction(o, a2), {1, 0, 1}), "attraction");

    // Desired direction: half-sum of normalised orientation and attraction terms.
    std::vector<AgentState> mix{o, at(1, {3, 0, 0}, {0, 0, 1}), at(2, {-3, 0, 0}, {0, 0, 1}), at(3, {0, 10, 0}),
                                at(4, {0, 12, 0})};
    t.expect(close(desired_direction(o, classify_neighbors(o, mix, z), mix), {0, 1, 1}), "desired mix");
    std::vector<AgentState> alone{o};
    t.expect(desired_direction(o, classify_neighbors(o, alone, z), alone) == Vec3{1, 0, 0}, "desired alone");

    // Turn-limited step: pi/4 turn budget, target at 90 degrees.
    ZoneParams slow = z;
    slow.tau = 1.0;
    slow.max_turn_rate = std::numbers::pi / 4;
    const double h = std::sqrt(0.5);
    const AgentState turned = turn_and_step(at(0, {0, 0, 0}), {0, 5, 0}, slow);
    t.expect(close(turned.heading, {h, h, 0}), "turn heading");
    t.expect(close(turned.position, {2 * h, 2 * h, 0}), "turn position");

    // Plane normal: 90 degree roll about +x sends local +z to -y.
    const double s = std::sin(std::numbers::pi / 4);
    ControllerPose rolled;
    rolled.orientation = Quat{s, 0, 0, s};
    t.expect(close(plane_normal(rolled), {0, -1, 0}), "plane normal");

    // Spring-damper influence: B*(n.dv) + K*(n.dx) along n = 0.5*2 + 1*3 = 4.
    const InfluenceParams gains{5.0, 1.0, 0.5, +1};
    const AgentState agent = make_agent(0, {1, 2, 3}, {0, 0, 1}, 2.0);
    const ControllerPose flat = pose({0, 0, 0}, {0, 0, 1});
    const Vec3 u = controller_influence(agent, agent.velocity(), flat, gains);
    t.expect(close(u, {0, 0, 4}), "influence");
    const AgentState in_plane = make_agent(0, {5, -2, 0}, {1, 0, 0}, 2.0);
    t.expect(close(controller_influence(in_plane, in_plane.velocity(), pose({}, {0, 0, 1}, {3, 1, 0}), gains), {}),
             "influence in plane");
    const auto both = total_influence(agent, flat, pose({0, 1, 0}, {0, 1, 0}, {}, Hand::right), gains);
    t.expect(close(both.total, {0, 1, 4}), "two hands");

    // Blend: d + alpha * u; alpha = 0 returns d untouched.
    t.expect(blend_direction({1, 0, 0}, u, 5.0) == Vec3{1, 0, 20}, "blend");
    t.expect(blend_direction({0.3, -0.0, 7}, {1, 2, 3}, 0.0) == Vec3{0.3, -0.0, 7}, "blend alpha 0");

    return {t.failed == 0, t.failed == 0 ? std::to_string(t.checks) + " oracle checks within 1e-9" : t.first + " mismatched"};
}

Outcome alpha_zero_equivalence() {
    int identical = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Scenario s = preset("paper-canyon");
        s.seed = seed;
        s.max_ticks = 400;
        ShepherdScript script;
        RunOptions zero;
        zero.alpha = 0.0;
        const RunResult guided = run_scenario(s, script, zero);
        NoInputs none;
        RunOptions off;
        off.influence_enabled = false;
        const RunResult disabled = run_scenario(s, none, off);
        bool same = guided.events.size() > 300;  // the poses really were live
        for (std::size_t k = 0; same && k < guided.frames.size(); ++k) {
            same = guided.frames[k].agents == disabled.frames[k].agents;
        }
        identical += same;
    }
    return {identical == 5, count(identical, 5) + " seeds bitwise identical over 400 ticks"};
}

Outcome zone_oracle() {
    Rng rng(20240601);
    const ZoneParams z{};
    int mismatches = 0;
    for (int config = 0; config < 1000; ++config) {
        std::vector<AgentState> agents;
        for (AgentId i = 0; i < 16; ++i) {
            // Every other configuration sits on an integer lattice so that
            // shell boundaries are hit exactly.
            Vec3 p = config % 2 ? Vec3{std::round(rng.uniform(-8, 8)), std::round(rng.uniform(-8, 8)),
                                       std::round(rng.uniform(-8, 8))}
                                : Vec3{rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-15, 15)};
            agents.push_back(make_agent(i, p, rng.unit_vector(), z.speed));
        }
        for (const AgentState& self : agents) {
            std::vector<AgentId> r, o, a;
            for (const AgentState& other : agents) {
                if (other.id == self.id) continue;
                const double dx = other.position.x - self.position.x;
                const double dy = other.position.y - self.position.y;
                const double dz = other.position.z - self.position.z;
                const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (d <= z.r_repulsion) r.push_back(other.id);
                else if (d <= z.r_orientation) o.push_back(other.id);
                else if (d <= z.r_attraction) a.push_back(other.id);
            }
            NeighborSets got = classify_neighbors(self, agents, z);
            for (auto* v : {&got.repulsion_ids, &got.orientation_ids, &got.attraction_ids}) std::sort(v->begin(), v->end());
            mismatches += got.repulsion_ids != r || got.orientation_ids != o || got.attraction_ids != a;
        }
    }
    return {mismatches == 0, std::to_string(16000 - mismatches) + "/16000 agent classifications match"};
}

Outcome pulse_response() {
    const PulseSpec pulse = parse_pulse("y:5:3");
    int hits = 0;
    double worst = 1e9;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Scenario s = preset("paper-canyon");
        s.seed = seed;
        s.max_ticks = 100;
        auto delta_y = [&](double alpha) {
            PulseSource src({pulse}, s.zones.tau);
            RunOptions opts;
            opts.alpha = alpha;
            const RunResult run = run_scenario(s, src, opts);
            std::istringstream in(record_text(s, run, {pulse}));
            return summarize(read_record(in)).pulses.at(0).delta->y;
        };
        const double pushed = delta_y(5.0);
        const double baseline = delta_y(0.0);
        const double margin = pushed - std::fabs(baseline);
        worst = std::min(worst, margin);
        hits += pushed > 0 && margin >= kPulseMargin;
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "%s seeds beat the baseline by >= %.1f m (need 18, worst %.2f m)",
                  count(hits, 20).c_str(), kPulseMargin, worst);
    return {hits >= 18, detail};
}

Outcome canyon_traversal() {
    int stuck = 0, guided = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Scenario s = preset("paper-canyon");
        s.seed = seed;
        s.max_ticks = 600;
        NoInputs none;
        RunOptions zero;
        zero.alpha = 0.0;
        zero.keep_frames = false;
        int max_free = 0;
        run_scenario(s, none, zero, [&](const SimFrame& f) { max_free = std::max(max_free, f.metrics.crossed_count); });
        stuck += max_free == 0;

        ShepherdScript script;
        RunOptions shepherd;
        shepherd.alpha = 5.0;
        shepherd.keep_frames = false;
        int max_guided = 0;
        run_scenario(s, script, shepherd,
                     [&](const SimFrame& f) { max_guided = std::max(max_guided, f.metrics.crossed_count); });
        guided += max_guided >= 13;
    }
    return {stuck >= 19 && guided >= 16, "alpha 0 never crosses in " + count(stuck, 20) + " (need 19), shepherd >= 13 in " +
                                             count(guided, 20) + " (need 16)"};
}

Outcome yaw_departure() {
    int calm = 0, departed = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Scenario s = preset("milling");
        s.seed = seed;
        s.max_ticks = 600;

        NoInputs none;
        double sum = 0;
        int n = 0;
        RunOptions lean;
        lean.keep_frames = false;
        run_scenario(s, none, lean, [&](const SimFrame& f) {
            if (f.tick >= 200) sum += f.metrics.mean_yaw, ++n;
        });
        calm += std::fabs(sum / n) < kYawEpsilon;

        HeldPlane plane(200, 500, {8, 0, 0}, {-1, 0, 0}, s.zones.tau);
        int run_length = 0, longest = 0;
        run_scenario(s, plane, lean, [&](const SimFrame& f) {
            run_length = std::fabs(f.metrics.mean_yaw) > 3 * kYawEpsilon ? run_length + 1 : 0;
            longest = std::max(longest, run_length);
        });
        departed += longest >= 50;
    }
    return {calm >= 45 && departed >= 45,
            "autonomous |avg yaw| < 1.0 rad in " + count(calm, 50) + ", held plane > 3.0 rad for 5 s in " +
                count(departed, 50) + " (need 45 each)"};
}

Outcome record_replay() {
    int identical = 0;
    const std::vector<PulseSpec> pulses{parse_pulse("y:5:3")};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Scenario s = preset("paper-canyon");
        s.seed = seed;
        s.max_ticks = 600;
        ShepherdScript script;
        const RunResult live = run_scenario(s, script);
        const std::string recorded = record_text(s, live, pulses);

        std::stringstream log;
        write_input_log(log, InputLog{pulses, live.events});
        const InputLog back = read_input_log(log);
        const std::string replayed = record_text(s, replay_inputs(back.events, s), back.pulses);
        identical += recorded == replayed;
    }
    return {identical == 3, count(identical, 3) + " seeds byte-identical after record, log and replay"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"equation unit suite", 1.0, equation_suite},
        {"alpha 0 equals influence disabled", 10.0, alpha_zero_equivalence},
        {"zone classification oracle", 5.0, zone_oracle},
        {"pulse response", 60.0, pulse_response},
        {"canyon traversal", 180.0, canyon_traversal},
        {"yaw departure", 60.0, yaw_departure},
        {"determinism and replay", 30.0, record_replay},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = out.pass && secs < c.budget_s;
        failures += !pass;
        std::printf("%s  %-36s %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", c.name.c_str(),
                    out.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
