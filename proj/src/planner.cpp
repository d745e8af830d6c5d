#include "msw/planner.hpp"

#include <chrono>
#include <cmath>

namespace msw {

namespace {

DVec pack(const ControlSeq& seq) {
    DVec u;
    for (int k = 0; k < seq.size(); ++k) {
        u.push_back(seq[k].steer);
        u.push_back(seq[k].accel);
    }
    return u;
}

ControlSeq unpack(const DVec& u) {
    ControlSeq seq;
    for (int k = 0; k < u.size() / 2; ++k) seq.push_back(Control{u[2 * k], u[2 * k + 1]});
    return seq;
}

// Previous plan shifted one step, last control repeated.
ControlSeq shift_hold(const ControlSeq& seq) {
    ControlSeq out;
    for (int k = 1; k < seq.size(); ++k) out.push_back(seq[k]);
    out.push_back(seq.back());
    return out;
}

// Robot horizon reward against a fixed human prediction.
DVec ascend_robot(const JointState& js, const ControlSeq& prediction, const DVec& u0,
                  const PlanningContext& ctx, int route_offset) {
    auto objective = [&](const auto* u, int n) {
        using T = std::decay_t<decltype(*u)>;
        const JointStateT<T> js_l = relift_joint<T>(js);
        const ControlSeqT<T> uh = relift_seq<T>(prediction);
        ControlSeqT<T> ur;
        for (int k = 0; k < n / 2; ++k) ur.push_back(ControlT<T>{u[2 * k], u[2 * k + 1]});
        return reward_horizon(js_l, ur, uh, ctx.env, ctx.robot_weights, Agent::robot, ctx.dyn,
                              route_offset, ctx.box);
    };
    const BoxBounds bounds = control_bounds(ctx.box, ctx.budget.horizon);
    const DVec precond = control_curvature_scales(js.robot, ctx.robot_weights, ctx.env, ctx.box,
                                                  ctx.budget.horizon, ctx.dyn.dt);
    return gd_ascend<double>(objective, u0, ctx.budget, bounds, &precond);
}

// Gradient of the human horizon reward w.r.t. the human controls.
DVec human_reward_grad(const JointState& js, const DVec& u_robot, const DVec& u_human,
                       const PlanningContext& ctx, int route_offset) {
    auto objective = [&](const auto* u, int n) {
        using T = std::decay_t<decltype(*u)>;
        const JointStateT<T> js_l = relift_joint<T>(js);
        const ControlSeqT<T> ur = relift_seq<T>(unpack(u_robot));
        ControlSeqT<T> uh;
        for (int k = 0; k < n / 2; ++k) uh.push_back(ControlT<T>{u[2 * k], u[2 * k + 1]});
        return reward_horizon(js_l, ur, uh, ctx.env, ctx.human_weights, Agent::human, ctx.dyn,
                              route_offset, ctx.box);
    };
    return gradient(objective, u_human);
}

// Gradient of the robot horizon reward w.r.t. either control block.
DVec robot_reward_grad(const JointState& js, const DVec& u_robot, const DVec& u_human,
                       bool wrt_robot, const PlanningContext& ctx, int route_offset) {
    auto objective = [&](const auto* u, int n) {
        using T = std::decay_t<decltype(*u)>;
        const JointStateT<T> js_l = relift_joint<T>(js);
        ControlSeqT<T> varying;
        for (int k = 0; k < n / 2; ++k) varying.push_back(ControlT<T>{u[2 * k], u[2 * k + 1]});
        const ControlSeqT<T> fixed = relift_seq<T>(unpack(wrt_robot ? u_human : u_robot));
        const ControlSeqT<T>& ur = wrt_robot ? varying : fixed;
        const ControlSeqT<T>& uh = wrt_robot ? fixed : varying;
        return reward_horizon(js_l, ur, uh, ctx.env, ctx.robot_weights, Agent::robot, ctx.dyn,
                              route_offset, ctx.box);
    };
    return gradient(objective, wrt_robot ? u_robot : u_human);
}

// Directional mixed second derivative: d/de grad_uR R_H(uR, uH + e * dir).
// One forward-over-forward pass gives the influence term of the co-ascent
// gradient without forming the full cross-Hessian.
DVec mixed_hessian_product(const JointState& js, const DVec& u_robot, const DVec& u_human,
                           const DVec& dir, const PlanningContext& ctx, int route_offset) {
    using In = Dual<double, 1>;
    using Out = Dual<In, kTangentCap>;
    const int n = u_robot.size();

    ControlSeqT<Out> ur;
    for (int k = 0; k < n / 2; ++k) {
        ControlT<Out> c;
        c.steer.v = In(u_robot[2 * k]);
        c.steer.n = n;
        c.steer.d[2 * k] = In(1.0);
        c.accel.v = In(u_robot[2 * k + 1]);
        c.accel.n = n;
        c.accel.d[2 * k + 1] = In(1.0);
        ur.push_back(c);
    }
    ControlSeqT<Out> uh;
    for (int k = 0; k < n / 2; ++k) {
        ControlT<Out> c;
        for (int p = 0; p < 2; ++p) {
            In inner;
            inner.v = u_human[2 * k + p];
            inner.n = 1;
            inner.d[0] = dir[2 * k + p];
            Out& comp = p == 0 ? c.steer : c.accel;
            comp.v = inner;
            comp.n = 0;
        }
        uh.push_back(c);
    }
    const JointStateT<Out> js_l = relift_joint<Out>(js);
    const Out r = reward_horizon(js_l, ur, uh, ctx.env, ctx.human_weights, Agent::human, ctx.dyn,
                                 route_offset, ctx.box);
    DVec g;
    g.resize(n);
    for (int i = 0; i < n; ++i) g[i] = i < r.n ? r.d[i].d[0] : 0.0;
    return g;
}

struct UnrolledStep {
    DVec u_human_next;
    DVec slopes;     // softclamp slopes at the pre-clamp points
    DVec step_scale; // learn_rate * halfwidth^2 per coordinate
};

// One human best-response ascent step from u_human, the same capped smooth
// step gd_ascend takes. slopes * step_scale is the exact derivative of the
// updated control w.r.t. the gradient entry.
UnrolledStep unroll_human_step(const JointState& js, const DVec& u_robot, const DVec& u_human,
                               const PlanningContext& ctx, int route_offset) {
    const DVec g = human_reward_grad(js, u_robot, u_human, ctx, route_offset);
    const BoxBounds bounds = control_bounds(ctx.box, ctx.budget.horizon);
    const DVec precond = control_curvature_scales(js.human, ctx.human_weights, ctx.env, ctx.box,
                                                  ctx.budget.horizon, ctx.dyn.dt);
    UnrolledStep out;
    const int n = u_human.size();
    out.u_human_next.resize(n);
    out.slopes.resize(n);
    out.step_scale.resize(n);
    for (int j = 0; j < n; ++j) {
        const double hw = 0.5 * (bounds.hi[j] - bounds.lo[j]);
        const double beta = kSoftBoxSharpness / hw;
        const double cap = kAscentStepCap * hw;
        const double scale = ctx.budget.learn_rate * precond[j];
        const double arg = scale * g[j] / cap;
        const double z = u_human[j] + cap * std::tanh(arg);
        const double sech2 = 1.0 - std::tanh(arg) * std::tanh(arg);
        out.u_human_next[j] = softclamp(z, bounds.lo[j], bounds.hi[j], beta);
        out.slopes[j] = softclamp_slope(z, bounds.lo[j], bounds.hi[j], beta) * sech2;
        out.step_scale[j] = scale;
    }
    return out;
}

}  // namespace

double tom_unrolled_objective(const JointState& js, const DVec& u_robot, const DVec& u_human,
                              const PlanningContext& ctx, int route_offset) {
    const UnrolledStep step = unroll_human_step(js, u_robot, u_human, ctx, route_offset);
    return reward_horizon(js, unpack(u_robot), unpack(step.u_human_next), ctx.env,
                          ctx.robot_weights, Agent::robot, ctx.dyn, route_offset, ctx.box);
}

DVec tom_objective_gradient(const JointState& js, const DVec& u_robot, const DVec& u_human,
                            const PlanningContext& ctx, int route_offset) {
    const int n = u_robot.size();
    const UnrolledStep step = unroll_human_step(js, u_robot, u_human, ctx, route_offset);

    const DVec g_direct =
        robot_reward_grad(js, u_robot, step.u_human_next, true, ctx, route_offset);
    const DVec w = robot_reward_grad(js, u_robot, step.u_human_next, false, ctx, route_offset);

    DVec dir;
    dir.resize(n);
    for (int j = 0; j < n; ++j) dir[j] = step.slopes[j] * step.step_scale[j] * w[j];
    const DVec g_influence = mixed_hessian_product(js, u_robot, u_human, dir, ctx, route_offset);

    DVec g;
    g.resize(n);
    for (int j = 0; j < n; ++j) g[j] = g_direct[j] + g_influence[j];
    return g;
}

Plan plan(const JointState& js, const ModelSpec& model, const PlanningContext& ctx,
          WarmStart* warm, int route_offset) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!joint_finite(js)) throw Error(Errc::invalid_argument, "plan: non-finite state");
    validate(ctx.budget);
    const int horizon = ctx.budget.horizon;

    ControlSeq u_robot0;
    u_robot0.resize(horizon);
    ControlSeq u_human0 = hold_controls(js.human, horizon, ctx.dyn);
    if (warm && warm->valid && warm->robot.size() == horizon) {
        u_robot0 = shift_hold(warm->robot);
        u_human0 = shift_hold(warm->human);
    }

    Plan out;
    out.model = model;
    try {
        ControlSeq u_robot;
        ControlSeq prediction;
        if (model.kind == ModelKind::tom) {
            // Interleaved co-ascent: one human best-response step, then one
            // robot step whose gradient differentiates through it.
            DVec ur = pack(u_robot0);
            DVec uh = pack(u_human0);
            const BoxBounds bounds = control_bounds(ctx.box, horizon);
            const DVec precond = control_curvature_scales(js.robot, ctx.robot_weights, ctx.env,
                                                          ctx.box, horizon, ctx.dyn.dt);
            for (int it = 0; it < ctx.budget.steps; ++it) {
                const UnrolledStep step = unroll_human_step(js, ur, uh, ctx, route_offset);
                const DVec g_direct =
                    robot_reward_grad(js, ur, step.u_human_next, true, ctx, route_offset);
                const DVec w =
                    robot_reward_grad(js, ur, step.u_human_next, false, ctx, route_offset);
                DVec dir;
                dir.resize(ur.size());
                for (int j = 0; j < ur.size(); ++j)
                    dir[j] = step.slopes[j] * step.step_scale[j] * w[j];
                const DVec g_influence =
                    mixed_hessian_product(js, ur, uh, dir, ctx, route_offset);
                for (int j = 0; j < ur.size(); ++j) {
                    const double hw = 0.5 * (bounds.hi[j] - bounds.lo[j]);
                    const double cap = kAscentStepCap * hw;
                    const double scale = ctx.budget.learn_rate * precond[j];
                    const double z =
                        ur[j] + cap * std::tanh(scale * (g_direct[j] + g_influence[j]) / cap);
                    ur[j] = softclamp(z, bounds.lo[j], bounds.hi[j], kSoftBoxSharpness / hw);
                }
                uh = step.u_human_next;
            }
            u_robot = unpack(ur);
            prediction = unpack(uh);
        } else {
            const Prediction pred = model.kind == ModelKind::naive
                                        ? predict_naive(js, horizon, ctx.dyn)
                                        : predict_turn(js, ctx, route_offset);
            prediction = pred.controls;
            const DVec ur = ascend_robot(js, prediction, pack(u_robot0), ctx, route_offset);
            u_robot = unpack(ur);
        }

        out.robot_controls = u_robot;
        out.predicted_human = prediction;
        out.predicted_reward =
            reward_horizon(js, u_robot, prediction, ctx.env, ctx.robot_weights, Agent::robot,
                           ctx.dyn, route_offset, ctx.box);
        out.first_step_reward = reward_step(js, u_robot[0], prediction[0], ctx.env,
                                            ctx.robot_weights, Agent::robot, ctx.dyn,
                                            route_offset, ctx.box);
        out.ok = true;
        if (warm) {
            warm->valid = true;
            warm->robot = out.robot_controls;
            warm->human = out.predicted_human;
        }
    } catch (const Error& e) {
        out.ok = false;
        out.error = e.what();
        out.robot_controls = u_robot0;
        out.predicted_human = u_human0;
        out.predicted_reward = 0.0;
        out.first_step_reward = 0.0;
    }

    const auto t1 = std::chrono::steady_clock::now();
    out.plan_seconds = std::chrono::duration<double>(t1 - t0).count();
    return out;
}

}  // namespace msw
