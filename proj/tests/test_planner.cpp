#include <doctest.h>

#include <chrono>
#include <cmath>

#include "msw/planner.hpp"
#include "msw/sim.hpp"
#include "oracles.hpp"

using namespace msw;

namespace {

PlanningContext open_road_ctx() {
    PlanningContext ctx;
    ctx.env.lanes = {Lane{0.0, 1.5}, Lane{3.0, 1.5}};
    ctx.env.y_min = -1.5;
    ctx.env.y_max = 4.5;
    FeatureWeights w;
    w[kFeatProgress] = 0.3;
    w[kFeatLane] = 0.5;
    w[kFeatHeading] = 1.0;
    w[kFeatCollision] = 3.0;
    w[kFeatBoundary] = 2.5;
    w[kFeatEffort] = 0.1;
    ctx.robot_weights = w;
    ctx.human_weights = w;
    return ctx;
}

ModelSpec spec_of(ModelKind k) {
    return ModelSpec{k, 0.1 * model_cost_multiplier(k), static_cast<int>(k)};
}

}  // namespace

TEST_CASE("plan: cruising at the limit on the centerline is near-stationary") {
    PlanningContext ctx = open_road_ctx();
    ctx.dyn.friction = 0.0;
    JointState js;
    js.robot = State{0, 0, 0, 10};
    js.human = State{200, 3, 0, 8};  // out of range

    const Plan p = plan(js, spec_of(ModelKind::naive), ctx);
    CHECK(p.ok);
    for (int k = 0; k < 5; ++k) {
        CHECK(std::fabs(p.robot_controls[k].steer) < 0.02);
        CHECK(std::fabs(p.robot_controls[k].accel) < 0.15);
    }
    // reward within 1e-3 of the stationary (zero-control) value
    ControlSeq zeros;
    zeros.resize(5);
    const double stationary =
        reward_horizon(js, zeros, p.predicted_human, ctx.env, ctx.robot_weights, Agent::robot,
                       ctx.dyn, 0, ctx.box);
    CHECK(p.predicted_reward >= stationary - 1e-3);
}

TEST_CASE("execute_first returns the plan's first control") {
    Plan p;
    p.robot_controls.push_back(Control{0.12, -0.7});
    p.robot_controls.push_back(Control{0.5, 1.0});
    const Control u = execute_first(p);
    CHECK(u.steer == 0.12);
    CHECK(u.accel == -0.7);

    Plan empty;
    CHECK_THROWS_AS(execute_first(empty), Error);

    Plan zeros;
    zeros.robot_controls.resize(3);
    CHECK(execute_first(zeros).steer == 0.0);
    CHECK(execute_first(zeros).accel == 0.0);
}

TEST_CASE("plan is deterministic given state, model, and warm start") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 3);
    for (ModelKind kind : {ModelKind::naive, ModelKind::turn, ModelKind::tom}) {
        WarmStart wa, wb;
        const Plan a = plan(cfg.initial, spec_of(kind), cfg.ctx, &wa);
        const Plan b = plan(cfg.initial, spec_of(kind), cfg.ctx, &wb);
        for (int k = 0; k < a.robot_controls.size(); ++k) {
            CHECK(a.robot_controls[k].steer == b.robot_controls[k].steer);
            CHECK(a.robot_controls[k].accel == b.robot_controls[k].accel);
            CHECK(a.predicted_human[k].steer == b.predicted_human[k].steer);
        }
        CHECK(a.predicted_reward == b.predicted_reward);
    }
}

TEST_CASE("first-step reward equals reward_step at (state, u_R[0], predicted u_H[0])") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::merger, 5);
    for (ModelKind kind : {ModelKind::naive, ModelKind::turn, ModelKind::tom}) {
        const Plan p = plan(cfg.initial, spec_of(kind), cfg.ctx);
        const double expect =
            reward_step(cfg.initial, p.robot_controls[0], p.predicted_human[0], cfg.ctx.env,
                        cfg.ctx.robot_weights, Agent::robot, cfg.ctx.dyn, 0, cfg.ctx.box);
        CHECK(p.first_step_reward == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("planning objective does not fall below the warm start (naive and turn)") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 7);
    JointState js = cfg.initial;
    js.robot.x = 10.0;  // approaching the funnel
    js.human.x = 11.0;

    for (ModelKind kind : {ModelKind::naive, ModelKind::turn}) {
        const Prediction pred = predict(kind, js, ControlSeq{}, cfg.ctx);
        WarmStart warm;
        const Plan p = plan(js, spec_of(kind), cfg.ctx, &warm);
        ControlSeq zeros;
        zeros.resize(5);
        const double at_start = reward_horizon(js, zeros, pred.controls, cfg.ctx.env,
                                               cfg.ctx.robot_weights, Agent::robot, cfg.ctx.dyn,
                                               0, cfg.ctx.box);
        CHECK(p.predicted_reward >= at_start - 1e-9);
    }
}

TEST_CASE("tom planner objective gradient matches finite differences") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::merger, 2);
    JointState js = cfg.initial;
    oracles::Rng rng(83);

    for (int trial = 0; trial < 4; ++trial) {
        js.robot.x += rng.uniform(0, 3);
        js.human.x += rng.uniform(0, 2);
        DVec ur, uh;
        for (double v : oracles::random_controls(cfg.ctx.box, 5, rng, 0.4)) ur.push_back(v);
        for (double v : oracles::random_controls(cfg.ctx.box, 5, rng, 0.4)) uh.push_back(v);

        const DVec g = tom_objective_gradient(js, ur, uh, cfg.ctx, 0);
        std::vector<double> ur_v(ur.begin(), ur.end());
        const auto fd = oracles::fd_gradient(
            [&](const std::vector<double>& v) {
                DVec u;
                for (double x : v) u.push_back(x);
                return tom_unrolled_objective(js, u, uh, cfg.ctx, 0);
            },
            ur_v);
        const double gnorm = oracles::max_abs(fd);
        for (int i = 0; i < g.size(); ++i)
            CHECK(oracles::grads_close(g[i], fd[static_cast<std::size_t>(i)], gnorm));
    }
}

TEST_CASE("approaching the bottleneck, a Turn plan brakes harder than a Naive plan") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 1);
    JointState js = cfg.initial;
    js.robot = State{12.0, 0.0, 0.0, 8.0};
    js.human = State{13.5, 3.0, -0.05, 8.0};  // slightly ahead, starting to angle in

    const Plan naive = plan(js, spec_of(ModelKind::naive), cfg.ctx);
    const Plan turn = plan(js, spec_of(ModelKind::turn), cfg.ctx);
    double naive_accel = 0.0, turn_accel = 0.0;
    for (int k = 0; k < 5; ++k) {
        naive_accel += naive.robot_controls[k].accel;
        turn_accel += turn.robot_controls[k].accel;
    }
    CHECK(turn_accel < naive_accel);
}

TEST_CASE("measured planning time orders naive < turn < tom over 30 calls") {
    const ScenarioConfig cfg = build_scenario(ScenarioKind::merger, 4);
    double sums[3] = {0, 0, 0};
    for (int rep = 0; rep < 30; ++rep) {
        for (ModelKind kind : {ModelKind::naive, ModelKind::turn, ModelKind::tom}) {
            WarmStart warm;
            const Plan p = plan(cfg.initial, spec_of(kind), cfg.ctx, &warm);
            sums[static_cast<int>(kind)] += p.plan_seconds;
        }
    }
    CHECK(sums[0] < sums[1]);
    CHECK(sums[1] < sums[2]);
}
