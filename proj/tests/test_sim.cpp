#include <doctest.h>

#include <cmath>
#include <set>

#include "msw/config.hpp"
#include "msw/sim.hpp"
#include "oracles.hpp"

using namespace msw;

TEST_CASE("build_scenario is deterministic per (kind, seed)") {
    for (ScenarioKind kind :
         {ScenarioKind::stay_back, ScenarioKind::merger, ScenarioKind::give_way}) {
        const std::string a = scenario_to_json(build_scenario(kind, 12));
        const std::string b = scenario_to_json(build_scenario(kind, 12));
        CHECK(a == b);
        const std::string c = scenario_to_json(build_scenario(kind, 13));
        CHECK(a != c);
    }
}

TEST_CASE("30 seeds give 30 distinct initial state pairs") {
    for (ScenarioKind kind :
         {ScenarioKind::stay_back, ScenarioKind::merger, ScenarioKind::give_way}) {
        std::set<std::pair<double, double>> starts;
        for (int seed = 0; seed < 30; ++seed) {
            const ScenarioConfig cfg = build_scenario(kind, static_cast<std::uint64_t>(seed));
            starts.insert({cfg.initial.robot.x, cfg.initial.human.x});
            CHECK_FALSE(robot_collision(cfg.initial));
        }
        CHECK(starts.size() == 30);
    }
}

TEST_CASE("stay back: the bottleneck forces single file") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 0);
    // narrowest gap between opposing cone inner edges along the corridor
    double clearance = 1e9;
    for (const Cone& lower : cfg.ctx.env.cones) {
        if (lower.y > 1.5) continue;
        for (const Cone& upper : cfg.ctx.env.cones) {
            if (upper.y <= 1.5) continue;
            if (std::fabs(lower.x - upper.x) > 0.1) continue;
            clearance = std::min(clearance,
                                 (upper.y - upper.radius) - (lower.y + lower.radius));
        }
    }
    CHECK(clearance < 2.0 * kCarWidth);
    CHECK(clearance > kCarWidth);  // still drivable single-file
}

TEST_CASE("unknown scenario kinds are rejected") {
    CHECK_THROWS_AS(scenario_kind_from_name("roundabout"), Error);
    CHECK_THROWS_AS(Method::parse("zigzag"), Error);
    CHECK_THROWS_AS(Method::parse("switcher:-1"), Error);
}

TEST_CASE("collision metric: adjacent lanes clear, genuine overlap flags") {
    const State a{0, 0, 0, 8};
    const State side_by_side{0, 3, 0, 8};
    CHECK_FALSE(cars_collide(a, side_by_side));
    const State overlapping{1.5, 0.8, 0, 8};
    CHECK(cars_collide(a, overlapping));
    const State ahead{4.2, 0, 0, 8};
    CHECK_FALSE(cars_collide(a, ahead));
    const State rear_end{3.0, 0, 0, 8};
    CHECK(cars_collide(a, rear_end));
}

TEST_CASE("human_act: cruising at the limit on the goal lane is near-stationary") {
    ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 0);
    cfg.ctx.dyn.friction = 0.0;
    cfg.ctx.env.cones.clear();
    JointState js;
    js.robot = State{-300, 0, 0, 8};
    js.human = State{0, 3, 0, 10};
    SimulatedHuman h{cfg.sim_human_weights, cfg.ctx.budget, {}, false};
    const Control u = human_act(h, js, Control{0, 0}, cfg.ctx);
    CHECK(std::fabs(u.steer) < 0.02);
    CHECK(std::fabs(u.accel) < 0.15);
}

TEST_CASE("human_act: a robot nosing into the lane ahead makes the human yield") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::merger, 0);
    JointState js;
    js.robot = State{4.0, 1.2, 0.18, 8.0};  // angling into the left lane, ahead
    js.human = State{0.0, 3.0, 0.0, 8.0};
    js.others.push_back(State{12.0, 3.0, 0.0, 8.0});

    SimulatedHuman h{cfg.sim_human_weights, cfg.ctx.budget, {}, false};
    const Control intruding{0.18, 0.0};
    const Control u = human_act(h, js, intruding, cfg.ctx);
    const double hold = cfg.ctx.dyn.friction * js.human.speed;
    CHECK(u.accel < hold - 0.2);  // decelerates relative to speed-keeping

    // determinism
    SimulatedHuman h2{cfg.sim_human_weights, cfg.ctx.budget, {}, false};
    const Control v = human_act(h2, js, intruding, cfg.ctx);
    CHECK(u.steer == v.steer);
    CHECK(u.accel == v.accel);
}

TEST_CASE("run_episode: N=1 log totals equal the single step") {
    ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 0);
    cfg.episode_steps = 1;
    const EpisodeLog log = run_episode(cfg, Method::parse("naive"));
    REQUIRE(log.steps.size() == 1);
    CHECK(log.total_reward == log.steps[0].realized_reward);
    CHECK(log.total_meta_reward == log.steps[0].meta_reward);
    CHECK(log.total_plan_seconds == log.steps[0].plan_seconds);
    CHECK(log.steps_per_kind[0] == 1);
}

TEST_CASE("fixed naive and turn traces diverge only after the first differing robot control") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 3);
    const EpisodeLog naive = run_episode(cfg, Method::parse("naive"));
    const EpisodeLog turn = run_episode(cfg, Method::parse("turn"));

    int first_diff = -1;
    for (int t = 0; t < cfg.episode_steps; ++t) {
        if (naive.steps[static_cast<std::size_t>(t)].u_robot.steer !=
                turn.steps[static_cast<std::size_t>(t)].u_robot.steer ||
            naive.steps[static_cast<std::size_t>(t)].u_robot.accel !=
                turn.steps[static_cast<std::size_t>(t)].u_robot.accel) {
            first_diff = t;
            break;
        }
    }
    REQUIRE(first_diff >= 0);
    for (int t = 0; t <= first_diff; ++t) {
        const StepRecord& a = naive.steps[static_cast<std::size_t>(t)];
        const StepRecord& b = turn.steps[static_cast<std::size_t>(t)];
        // states coincide up to and including the first differing control;
        // the human sees the robot's control, so its action may differ
        // already at the divergence step but not before
        CHECK(a.state.robot.x == b.state.robot.x);
        CHECK(a.state.human.x == b.state.human.x);
        if (t < first_diff) {
            CHECK(a.u_human.steer == b.u_human.steer);
            CHECK(a.u_human.accel == b.u_human.accel);
        }
    }
}

TEST_CASE("switcher with overwhelming lambda matches the fixed lowest rung step for step") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 5);
    const EpisodeLog fixed = run_episode(cfg, Method::parse("naive"));
    const EpisodeLog sw = run_episode(cfg, Method::parse("switcher:1e9"));
    REQUIRE(fixed.steps.size() == sw.steps.size());
    for (std::size_t t = 0; t < sw.steps.size(); ++t) {
        CHECK(sw.steps[t].kind == ModelKind::naive);
        CHECK(sw.steps[t].u_robot.steer == fixed.steps[t].u_robot.steer);
        CHECK(sw.steps[t].u_robot.accel == fixed.steps[t].u_robot.accel);
    }
}

TEST_CASE("episode accounting identities hold exactly") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 7);
    const EpisodeLog log = run_episode(cfg, Method::parse("switcher:conservative"));

    double reward_sum = 0.0;
    for (const StepRecord& r : log.steps) {
        // realized reward recomputes from the executed tuple
        const double rr = reward_step(r.state, r.u_robot, r.u_human, cfg.ctx.env,
                                      cfg.ctx.robot_weights, Agent::robot, cfg.ctx.dyn, r.t,
                                      cfg.ctx.box);
        CHECK(r.realized_reward == rr);
        // meta identity: r_meta = r_R - lambda * T(M), exactly
        const double t_cost = cfg.t_base * model_cost_multiplier(r.kind);
        CHECK(r.meta_reward == r.realized_reward - cfg.lambda_conservative * t_cost);
        reward_sum += r.realized_reward;
    }
    CHECK(log.total_reward == reward_sum);
}

TEST_CASE("episodes are deterministic modulo wall-clock columns") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 9);
    const EpisodeLog a = run_episode(cfg, Method::parse("switcher:conservative"));
    const EpisodeLog b = run_episode(cfg, Method::parse("switcher:conservative"));
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        CHECK(a.steps[t].kind == b.steps[t].kind);
        CHECK(a.steps[t].u_robot.steer == b.steps[t].u_robot.steer);
        CHECK(a.steps[t].u_human.accel == b.steps[t].u_human.accel);
        CHECK(a.steps[t].realized_reward == b.steps[t].realized_reward);
        CHECK(a.steps[t].state.robot.x == b.steps[t].state.robot.x);
    }
    CHECK(a.total_reward == b.total_reward);
}

TEST_CASE("stay back over 30 seeds: turn never collides, naive does somewhere") {
    int naive_collisions = 0;
    int turn_collisions = 0;
    for (int seed = 0; seed < 30; ++seed) {
        const ScenarioConfig cfg =
            build_scenario(ScenarioKind::stay_back, static_cast<std::uint64_t>(seed));
        if (run_episode(cfg, Method::parse("naive")).collisions > 0) naive_collisions++;
        if (run_episode(cfg, Method::parse("turn")).collisions > 0) turn_collisions++;
    }
    CHECK(naive_collisions >= 1);
    CHECK(turn_collisions == 0);
}
