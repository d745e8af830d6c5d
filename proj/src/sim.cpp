#include "msw/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace msw {

const char* scenario_kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::stay_back: return "stay_back";
        case ScenarioKind::merger: return "merger";
        case ScenarioKind::give_way: return "give_way";
    }
    return "?";
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
    if (name == "stay_back") return ScenarioKind::stay_back;
    if (name == "merger") return ScenarioKind::merger;
    if (name == "give_way") return ScenarioKind::give_way;
    throw Error(Errc::invalid_argument, "unknown scenario kind: " + name);
}

namespace {

// Deterministic per-(kind, seed) jitter stream; independent of libstdc++
// distribution internals.
class Jitter {
public:
    Jitter(ScenarioKind kind, std::uint64_t seed)
        : state_(0x9E3779B97F4A7C15ull * (seed + 1) + 0x517CC1B727220A95ull *
                                                          (static_cast<std::uint64_t>(kind) + 1)) {
        next();
        next();
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
    }

private:
    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

FeatureWeights weights(double progress, double lane, double heading, double collision,
                       double boundary, double effort) {
    FeatureWeights w;
    w[kFeatProgress] = progress;
    w[kFeatLane] = lane;
    w[kFeatHeading] = heading;
    w[kFeatCollision] = collision;
    w[kFeatBoundary] = boundary;
    w[kFeatEffort] = effort;
    return w;
}

Environment two_lane_road() {
    Environment env;
    env.lanes = {Lane{0.0, 1.5}, Lane{3.0, 1.5}};
    env.y_min = -1.5;
    env.y_max = 4.5;
    env.speed_limit = 10.0;
    return env;
}

Route hold_route(const State& s, double friction, int length) {
    Route r;
    r.controls.assign(static_cast<std::size_t>(length), Control{0.0, friction * s.speed});
    return r;
}

void base_config(ScenarioConfig& cfg) {
    cfg.ctx.dyn = DynamicsParams{};
    cfg.ctx.box = ControlBox{};
    cfg.ctx.budget = OptBudget{};
    cfg.switcher = SwitcherConfig{};
    cfg.t_base = 0.25;
}

}  // namespace

ScenarioConfig build_scenario(ScenarioKind kind, std::uint64_t seed) {
    Jitter jit(kind, seed);
    ScenarioConfig cfg;
    cfg.kind = kind;
    cfg.seed = seed;
    base_config(cfg);
    cfg.ctx.env = two_lane_road();

    switch (kind) {
        case ScenarioKind::stay_back: {
            cfg.episode_steps = 52;
            cfg.weight_preset = "stay_back_v1";
            cfg.ladder_kinds = {ModelKind::naive, ModelKind::turn};
            cfg.lambda_conservative = 0.4;
            cfg.lambda_aggressive = 5.0;
            cfg.t_base = 0.06;

            // The human's lane is coned off ahead and merges down into the
            // robot's lane just in front of it; single file past the works.
            cfg.ctx.env.human_goal_lane = 1;
            cfg.ctx.env.cone_scale_margin = 0.7;
            cfg.ctx.env.headway_lane_gate = 1.0;
            cfg.ctx.env.headway_boost = 0.8;
            cfg.ctx.env.car_scale_x = 4.2;

            cfg.initial.robot =
                State{jit.uniform(-1.0, 1.0), 0.0, 0.0, 10.0 + jit.uniform(-0.2, 0.2)};
            cfg.initial.human = State{cfg.initial.robot.x + jit.uniform(0.9, 2.8), 3.0, 0.0,
                                      10.0 + jit.uniform(-0.2, 0.2)};

            auto& cones = cfg.ctx.env.cones;
            for (int i = 0; i < 7; ++i) {
                const double fx = 24.0 + 2.4 * i;
                const double t = static_cast<double>(i) / 6.0;
                cones.push_back(Cone{fx, 4.3 + t * (1.2 - 4.3), 0.4});
            }
            for (double cx = 40.8; cx <= 56.0; cx += 2.4)
                cones.push_back(Cone{cx, 1.2, 0.4});

            cfg.ctx.robot_weights = weights(0.25, 0.50, 1.0, 3.2, 2.5, 0.10);
            cfg.ctx.human_weights = weights(0.34, 1.10, 0.9, 2.4, 2.5, 0.10);
            cfg.sim_human_weights = cfg.ctx.human_weights;
            break;
        }
        case ScenarioKind::merger: {
            cfg.episode_steps = 56;
            cfg.weight_preset = "merger_v1";
            cfg.ladder_kinds = {ModelKind::naive, ModelKind::turn, ModelKind::tom};
            cfg.lambda_conservative = 0.1;
            cfg.lambda_aggressive = 0.2;
            cfg.t_base = 0.03;

            cfg.ctx.env.robot_goal_lane = 1;  // wants the left lane
            cfg.ctx.env.human_goal_lane = 1;
            // drivers here concede little to halfway measures: the follower
            // response only engages for a car genuinely entering the lane
            cfg.ctx.env.headway_lane_gate = 1.0;
            cfg.ctx.env.car_scale_x = 4.2;

            // A steady left-lane platoon streams past; the human is second
            // in line and the only driver who could open a slot. The right
            // lane closes ahead.
            cfg.initial.robot =
                State{9.0 + jit.uniform(-0.6, 0.6), 0.0, 0.0, 10.0 + jit.uniform(-0.2, 0.2)};
            cfg.initial.human =
                State{6.0 + jit.uniform(-0.5, 0.5), 3.0, 0.0, 10.35 + jit.uniform(-0.15, 0.15)};
            const double jx = jit.uniform(-0.3, 0.3);
            const double hx = cfg.initial.human.x;
            State l1{hx + 5.7 + jx, 3.0, 0.0, 10.0};
            State l2{hx - 5.7 + jit.uniform(-0.4, 0.4), 3.0, 0.0, 10.0};
            State l3{hx - 11.4 + jit.uniform(-0.3, 0.3), 3.0, 0.0, 10.0};
            State l4{hx - 17.1 + jit.uniform(-0.3, 0.3), 3.0, 0.0, 10.0};
            for (const State& o : {l1, l2, l3, l4}) {
                cfg.initial.others.push_back(o);
                cfg.ctx.env.other_routes.push_back(
                    hold_route(o, cfg.ctx.dyn.friction, cfg.episode_steps + kMaxHorizon));
            }
            // the car behind the human eases off once the bottleneck passes,
            // letting the lane relax after the merge window
            {
                Route& l2_route = cfg.ctx.env.other_routes[1];
                for (int k = 30; k < 40 && k < static_cast<int>(l2_route.controls.size()); ++k)
                    l2_route.controls[static_cast<std::size_t>(k)].accel = -0.6;
            }
            for (double cx = 30.0; cx <= 50.0; cx += 2.0)
                cfg.ctx.env.cones.push_back(Cone{cx, 0.0, 0.5});

            cfg.ctx.robot_weights = weights(0.30, 0.40, 1.0, 2.4, 2.5, 0.10);
            cfg.ctx.human_weights = weights(0.22, 1.30, 1.0, 3.4, 3.0, 0.10);
            cfg.sim_human_weights = cfg.ctx.human_weights;
            break;
        }
        case ScenarioKind::give_way: {
            cfg.episode_steps = 55;
            cfg.weight_preset = "give_way_v1";
            cfg.ladder_kinds = {ModelKind::naive, ModelKind::turn, ModelKind::tom};
            cfg.lambda_conservative = 0.01;
            cfg.lambda_aggressive = 0.03;

            cfg.ctx.env.robot_goal_lane = 0;
            cfg.ctx.env.human_goal_lane = 0;  // the human wants the robot's lane

            cfg.initial.robot = State{0.0, 0.0, 0.0, 8.0 + jit.uniform(-0.3, 0.3)};
            cfg.initial.human =
                State{4.0 + jit.uniform(-1.0, 1.0), 3.0, 0.0, 8.0 + jit.uniform(-0.3, 0.3)};
            State lead{14.0 + jit.uniform(-1.0, 1.0), 0.0, 0.0, 8.0};
            State tail{-8.0 + jit.uniform(-0.5, 0.5), 0.0, 0.0, 8.0};
            cfg.initial.others.push_back(lead);
            cfg.initial.others.push_back(tail);
            cfg.ctx.env.other_routes.push_back(
                hold_route(lead, cfg.ctx.dyn.friction, cfg.episode_steps + kMaxHorizon));
            cfg.ctx.env.other_routes.push_back(
                hold_route(tail, cfg.ctx.dyn.friction, cfg.episode_steps + kMaxHorizon));

            cfg.ctx.robot_weights = weights(0.25, 0.50, 1.0, 3.0, 2.5, 0.10);
            cfg.ctx.human_weights = weights(0.30, 1.00, 0.8, 3.0, 2.5, 0.10);
            cfg.sim_human_weights = cfg.ctx.human_weights;
            break;
        }
    }

    if (robot_collision(cfg.initial))
        throw Error(Errc::bad_config, "build_scenario: initial states collide");
    return cfg;
}

bool cars_collide(const State& a, const State& b) {
    const double dx = (a.x - b.x) / kCarLength;
    const double dy = (a.y - b.y) / (1.2 * kCarWidth);
    return dx * dx + dy * dy < 1.0;
}

bool robot_collision(const JointState& js) {
    if (cars_collide(js.robot, js.human)) return true;
    for (const auto& o : js.others)
        if (cars_collide(js.robot, o)) return true;
    return false;
}

namespace {

ControlSeq shift_hold(const ControlSeq& seq) {
    ControlSeq out;
    for (int k = 1; k < seq.size(); ++k) out.push_back(seq[k]);
    out.push_back(seq.back());
    return out;
}

}  // namespace

Control human_act(SimulatedHuman& h, const JointState& js, Control last_robot_control,
                  const PlanningContext& ctx, int route_offset) {
    const int horizon = h.budget.horizon;
    ControlSeq imagined_robot;
    for (int k = 0; k < horizon; ++k) imagined_robot.push_back(last_robot_control);

    // Cold start from the hold profile every step, exactly like the model
    // predictions do; a warm-started human would follow a systematically
    // different optimization process than any stateless predictor can match.
    SmallVec<double, kTangentCap> u0;
    {
        const ControlSeq init = hold_controls(js.human, horizon, ctx.dyn);
        for (int k = 0; k < horizon; ++k) {
            u0.push_back(init[k].steer);
            u0.push_back(init[k].accel);
        }
    }
    auto objective = [&](const auto* u, int n) {
        using T = std::decay_t<decltype(*u)>;
        const JointStateT<T> js_l = relift_joint<T>(js);
        const ControlSeqT<T> ur = relift_seq<T>(imagined_robot);
        ControlSeqT<T> uh;
        for (int k = 0; k < n / 2; ++k) uh.push_back(ControlT<T>{u[2 * k], u[2 * k + 1]});
        return reward_horizon(js_l, ur, uh, ctx.env, h.weights, Agent::human, ctx.dyn,
                              route_offset, ctx.box);
    };
    const BoxBounds bounds = control_bounds(ctx.box, horizon);
    const DVec precond =
        control_curvature_scales(js.human, h.weights, ctx.env, ctx.box, horizon, ctx.dyn.dt);
    const SmallVec<double, kTangentCap> u =
        gd_ascend<double>(objective, u0, h.budget, bounds, &precond);

    h.warm.clear();
    for (int k = 0; k < horizon; ++k) h.warm.push_back(Control{u[2 * k], u[2 * k + 1]});
    h.has_warm = true;
    return h.warm[0];
}

std::string Method::name() const {
    if (type == Type::fixed) return model_kind_name(fixed_kind);
    if (!lambda_preset.empty()) return "switcher:" + lambda_preset;
    char buf[64];
    std::snprintf(buf, sizeof buf, "switcher:%g", lambda);
    return buf;
}

Method Method::parse(const std::string& text) {
    Method m;
    if (text == "naive" || text == "turn" || text == "tom") {
        m.type = Type::fixed;
        m.fixed_kind = model_kind_from_name(text);
        return m;
    }
    const std::string prefix = "switcher:";
    if (text.rfind(prefix, 0) == 0) {
        m.type = Type::switcher;
        const std::string arg = text.substr(prefix.size());
        if (arg == "conservative" || arg == "aggressive") {
            m.lambda = -1.0;  // resolved against the scenario preset at run time
            m.lambda_preset = arg;
            return m;
        }
        try {
            m.lambda = std::stod(arg);
        } catch (const std::exception&) {
            throw Error(Errc::invalid_argument, "bad switcher lambda: " + text);
        }
        if (m.lambda < 0.0) throw Error(Errc::invalid_argument, "negative lambda: " + text);
        return m;
    }
    throw Error(Errc::invalid_argument, "unknown method: " + text);
}

EpisodeLog run_episode(const ScenarioConfig& cfg, const Method& method, const ProbeHook* probe) {
    if (cfg.episode_steps < 1) throw Error(Errc::bad_config, "run_episode: episode_steps < 1");
    if (robot_collision(cfg.initial))
        throw Error(Errc::bad_config, "run_episode: initial states collide");

    const Ladder ladder = cfg.ladder();
    const PlanningContext& ctx = cfg.ctx;

    SwitcherConfig sw = cfg.switcher;
    if (method.type == Method::Type::switcher) {
        sw.lambda = method.lambda;
        if (method.lambda_preset == "conservative") sw.lambda = cfg.lambda_conservative;
        if (method.lambda_preset == "aggressive") sw.lambda = cfg.lambda_aggressive;
    } else {
        sw.lambda = 0.0;
    }

    // Fixed methods may reference models outside the scenario ladder.
    ModelSpec fixed_spec;
    if (method.type == Method::Type::fixed) {
        fixed_spec = ModelSpec{method.fixed_kind,
                               cfg.t_base * model_cost_multiplier(method.fixed_kind),
                               static_cast<int>(method.fixed_kind)};
        for (const ModelSpec& m : ladder.rungs)
            if (m.kind == method.fixed_kind) fixed_spec = m;
    }

    EpisodeLog log;
    log.kind = cfg.kind;
    log.seed = cfg.seed;
    log.method = method.name();

    JointState js = cfg.initial;
    WarmStart warm;
    SimulatedHuman human{cfg.sim_human_weights, ctx.budget, {}, false};
    // Warm-up solve so the first executed plan starts from a mature cache;
    // otherwise the opening step's optimizer transient reads as a large
    // model divergence.
    int rung = sw.start_rung;
    if (rung > ladder.top()) rung = ladder.top();
    int since_down_reset = sw.cooldown;  // a down attempt is allowed immediately
    {
        const ModelSpec warmup_spec =
            method.type == Method::Type::fixed ? fixed_spec : ladder.at(rung);
        (void)plan(js, warmup_spec, ctx, &warm, 0);
    }

    for (int t = 0; t < cfg.episode_steps; ++t) {
        const ModelSpec spec =
            method.type == Method::Type::fixed ? fixed_spec : ladder.at(rung);

        const WarmStart warm_before = warm;
        const SimulatedHuman human_before = human;

        Plan p = plan(js, spec, ctx, &warm, t);
        if (!p.ok) {
            log.failed = true;
            log.fail_reason = p.error;
        }

        const Control u_robot = p.robot_controls.empty() ? Control{} : p.robot_controls[0];
        const Control u_human = human_act(human, js, u_robot, ctx, t);

        const double realized = reward_step(js, u_robot, u_human, ctx.env, ctx.robot_weights,
                                            Agent::robot, ctx.dyn, t, ctx.box);
        const MetaRewardRecord meta = make_meta_record(realized, spec, sw.lambda);

        StepRecord rec;
        rec.t = t;
        rec.rung = spec.rung;
        rec.kind = spec.kind;
        rec.u_robot = u_robot;
        rec.u_human = u_human;
        rec.state = js;
        rec.realized_reward = realized;
        rec.meta_reward = meta.meta_reward;
        rec.plan_seconds = p.plan_seconds;

        if (method.type == Method::Type::switcher) {
            const auto d0 = std::chrono::steady_clock::now();
            const SwitchEvaluation ev =
                decide(js, p, u_human, ladder, sw, rung, since_down_reset, ctx, t);
            const auto d1 = std::chrono::steady_clock::now();
            rec.decide_seconds = std::chrono::duration<double>(d1 - d0).count();
            rec.eval = ev;

            if (probe && ev.up_check_ran) {
                ProbeRecord pr;
                pr.t = t;
                pr.state = js;
                pr.plan = p;
                pr.observed_human = u_human;
                pr.rung = rung;
                pr.warm = warm_before;
                pr.human = human_before;
                pr.eval = ev;
                (*probe)(pr);
            }

            if (ev.decision == SwitchDecision::up) {
                rung = ladder.top();
                since_down_reset = 0;
            } else if (ev.decision == SwitchDecision::down) {
                rung -= 1;
                since_down_reset = 0;
            } else if (ev.down_check_ran) {
                since_down_reset = 0;  // failed down attempt starts the cooldown
            } else {
                since_down_reset += 1;
            }
        }

        js = advance_joint(js, u_robot, u_human, ctx.env.other_routes, ctx.dyn, t);
        rec.collision = robot_collision(js);

        log.steps.push_back(rec);
        log.total_reward += realized;
        log.total_meta_reward += meta.meta_reward;
        log.total_plan_seconds += rec.plan_seconds;
        log.total_decide_seconds += rec.decide_seconds;
        log.steps_per_kind[static_cast<std::size_t>(spec.kind)] += 1;
        if (rec.collision) log.collisions += 1;
    }
    return log;
}

int first_lane_reach_step(const EpisodeLog& log, bool human_car, double lane_center_y,
                          double tol) {
    for (const StepRecord& rec : log.steps) {
        const double y = human_car ? rec.state.human.y : rec.state.robot.y;
        if (std::fabs(y - lane_center_y) <= tol) return rec.t;
    }
    return -1;
}

int merge_complete_step(const EpisodeLog& log, double lane_center_y, double tol) {
    for (const StepRecord& rec : log.steps) {
        if (std::fabs(rec.state.robot.y - lane_center_y) > tol) continue;
        bool clear = std::fabs(rec.state.robot.x - rec.state.human.x) > 3.0;
        for (const State& o : rec.state.others)
            if (std::fabs(o.y - lane_center_y) < 1.0 &&
                std::fabs(rec.state.robot.x - o.x) <= 3.0)
                clear = false;
        if (clear) return rec.t;
    }
    return -1;
}

}  // namespace msw
