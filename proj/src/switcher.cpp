#include "msw/switcher.hpp"

#include <cmath>

namespace msw {

namespace {

BoxBounds delta_bounds(const ControlBox& box, double fraction) {
    BoxBounds b;
    b.lo.push_back(-fraction * box.steer_max);
    b.hi.push_back(fraction * box.steer_max);
    b.lo.push_back(-fraction * box.accel_max);
    b.hi.push_back(fraction * box.accel_max);
    return b;
}

}  // namespace

InfluenceJacobian influence_jacobian(const JointState& js, const ControlSeq& robot_plan,
                                     const ModelSpec& alt, const PlanningContext& ctx,
                                     int route_offset) {
    InfluenceJacobian jac{};
    if (alt.kind != ModelKind::tom) return jac;  // non-responsive rungs have zero influence

    // Differentiate the best response's first control w.r.t. the robot's
    // first control: two outer tangents through the unrolled inner ascent.
    using S = Dual<double, 2>;
    ControlSeqT<S> plan_l = relift_seq<S>(robot_plan);
    plan_l[0].steer.n = 2;
    plan_l[0].steer.d[0] = 1.0;
    plan_l[0].accel.n = 2;
    plan_l[0].accel.d[1] = 1.0;
    const JointStateT<S> js_l = relift_joint<S>(js);
    const ControlSeqT<S> response = tom_best_response<S>(js_l, plan_l, ctx, route_offset);

    const S& steer = response[0].steer;
    const S& accel = response[0].accel;
    jac.m[0][0] = steer.n > 0 ? steer.d[0] : 0.0;
    jac.m[0][1] = steer.n > 1 ? steer.d[1] : 0.0;
    jac.m[1][0] = accel.n > 0 ? accel.d[0] : 0.0;
    jac.m[1][1] = accel.n > 1 ? accel.d[1] : 0.0;
    for (auto& row : jac.m)
        for (double v : row)
            if (!std::isfinite(v)) throw Error(Errc::runtime, "influence_jacobian: non-finite");
    return jac;
}

Control estimate_delta_control(const JointState& js, const Plan& current, Control alt_first,
                               const InfluenceJacobian& influence, const SwitcherConfig& cfg,
                               const PlanningContext& ctx, int route_offset) {
    validate(cfg);
    const Control u0 = current.robot_controls[0];

    // One-step robot reward with the human first control tied to the robot
    // perturbation through the influence Jacobian.
    auto one_step = [&](const auto* d, int n) {
        using T = std::decay_t<decltype(*d)>;
        (void)n;
        const JointStateT<T> js_l = relift_joint<T>(js);
        ControlT<T> ur{u0.steer + d[0], u0.accel + d[1]};
        ControlT<T> uh{alt_first.steer + influence.m[0][0] * d[0] + influence.m[0][1] * d[1],
                       alt_first.accel + influence.m[1][0] * d[0] + influence.m[1][1] * d[1]};
        return reward_step(js_l, ur, uh, ctx.env, ctx.robot_weights, Agent::robot, ctx.dyn,
                           route_offset, ctx.box);
    };

    DVec center(2, 0.0);
    QuadraticSurrogate q;
    try {
        q = build_surrogate(one_step, center);
    } catch (const Error&) {
        return Control{};  // stay-safe fallback
    }
    const DVec delta = maximize_surrogate(q, delta_bounds(ctx.box, cfg.delta_fraction));
    return Control{delta[0], delta[1]};
}

double estimate_reward(const JointState& js, const Plan& current, Control delta,
                       Control alt_first, const InfluenceJacobian& influence,
                       const PlanningContext& ctx, int route_offset) {
    const Control u0 = current.robot_controls[0];
    const Control ur{u0.steer + delta.steer, u0.accel + delta.accel};
    const Control uh{
        alt_first.steer + influence.m[0][0] * delta.steer + influence.m[0][1] * delta.accel,
        alt_first.accel + influence.m[1][0] * delta.steer + influence.m[1][1] * delta.accel};
    return reward_step(js, ur, uh, ctx.env, ctx.robot_weights, Agent::robot, ctx.dyn,
                       route_offset, ctx.box);
}

namespace {

// One-step reward the current model could reach with the same bounded
// replanning applied to its own prediction. Using this as the comparison
// baseline cancels the reoptimization bias shared by both sides of the
// switch test; comparing against the raw planned reward instead leaves a
// positive floor on every check.
double reopted_current_reward(const JointState& js, const Plan& current,
                              const SwitcherConfig& cfg, const PlanningContext& ctx,
                              int route_offset) {
    const Control pred = current.predicted_human.empty() ? Control{} : current.predicted_human[0];
    const InfluenceJacobian none{};
    const Control delta =
        estimate_delta_control(js, current, pred, none, cfg, ctx, route_offset);
    return estimate_reward(js, current, delta, pred, none, ctx, route_offset);
}

}  // namespace

SwitchEvaluation decide(const JointState& js, const Plan& current, Control observed_human,
                        const Ladder& ladder, const SwitcherConfig& cfg, int current_rung,
                        int steps_since_down_reset, const PlanningContext& ctx,
                        int route_offset) {
    validate(cfg);
    const int top = ladder.top();
    const ModelSpec& cur = ladder.at(current_rung);
    SwitchEvaluation ev;
    double r_current = current.first_step_reward;
    bool r_current_ready = false;

    if (current_rung < top) {
        // Switch-up check against the top rung, with the observed human
        // control standing in for its (perfect) prediction.
        ev.up_check_ran = true;
        const ModelSpec& alt = ladder.at(top);
        ev.candidate_rung = alt.rung;
        ev.candidate_kind = alt.kind;
        try {
            if (!r_current_ready) {
                r_current = reopted_current_reward(js, current, cfg, ctx, route_offset);
                r_current_ready = true;
            }
            ev.influence =
                influence_jacobian(js, current.robot_controls, alt, ctx, route_offset);
            if (alt.kind == ModelKind::tom) ev.jacobians_evaluated += 1;
            const Control delta = estimate_delta_control(js, current, observed_human,
                                                         ev.influence, cfg, ctx, route_offset);
            ev.surrogates_built += 1;
            ev.delta_first = delta;
            ev.reward_estimate = estimate_reward(js, current, delta, observed_human,
                                                 ev.influence, ctx, route_offset);
            ev.delta_r_meta = delta_r_meta(ev.reward_estimate, r_current, alt, cur, cfg);
        } catch (const Error&) {
            ev.delta_r_meta = 0.0;  // fall back to staying
        }
        if (ev.delta_r_meta > 0.0) {
            ev.decision = SwitchDecision::up;
            return ev;
        }
    }

    if (current_rung > 0 && steps_since_down_reset >= cfg.cooldown) {
        // Switch-down check against the rung directly below, using its
        // genuine prediction (and influence, identically zero off the top).
        ev.down_check_ran = true;
        const ModelSpec& alt = ladder.at(current_rung - 1);
        ev.candidate_rung = alt.rung;
        ev.candidate_kind = alt.kind;
        try {
            if (!r_current_ready) {
                r_current = reopted_current_reward(js, current, cfg, ctx, route_offset);
                r_current_ready = true;
            }
            const Prediction pred =
                predict(alt.kind, js, current.robot_controls, ctx, route_offset);
            ev.predictions_evaluated += 1;
            ev.influence =
                influence_jacobian(js, current.robot_controls, alt, ctx, route_offset);
            if (alt.kind == ModelKind::tom) ev.jacobians_evaluated += 1;
            const Control delta = estimate_delta_control(js, current, pred.controls[0],
                                                         ev.influence, cfg, ctx, route_offset);
            ev.surrogates_built += 1;
            ev.delta_first = delta;
            ev.reward_estimate = estimate_reward(js, current, delta, pred.controls[0],
                                                 ev.influence, ctx, route_offset);
            ev.delta_r_meta = delta_r_meta(ev.reward_estimate, r_current, alt, cur, cfg);
        } catch (const Error&) {
            ev.delta_r_meta = 0.0;
        }
        if (ev.delta_r_meta > 0.0) {
            ev.decision = SwitchDecision::down;
            return ev;
        }
    }

    ev.decision = SwitchDecision::stay;
    return ev;
}

}  // namespace msw
