#include "msw/models.hpp"

#include <algorithm>

namespace msw {

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "naive") return ModelKind::naive;
    if (name == "turn") return ModelKind::turn;
    if (name == "tom") return ModelKind::tom;
    throw Error(Errc::invalid_argument, "unknown model kind: " + name);
}

Ladder make_ladder(const std::vector<ModelKind>& kinds, double t_base) {
    if (kinds.empty()) throw Error(Errc::bad_config, "ladder: no models");
    if (!(t_base > 0.0)) throw Error(Errc::bad_config, "ladder: t_base must be positive");
    Ladder ladder;
    int rung = 0;
    for (ModelKind k : kinds)
        ladder.rungs.push_back(ModelSpec{k, t_base * model_cost_multiplier(k), rung++});
    for (std::size_t i = 1; i < ladder.rungs.size(); ++i)
        if (!(ladder.rungs[i].time_cost > ladder.rungs[i - 1].time_cost))
            throw Error(Errc::bad_config, "ladder: rungs must be strictly ordered by cost");
    return ladder;
}

Prediction predict_naive(const JointState& js, int horizon, const DynamicsParams& p) {
    Prediction pred;
    pred.controls = hold_controls(js.human, horizon, p);
    pred.responsive = false;
    return pred;
}

Prediction predict_turn(const JointState& js, const PlanningContext& ctx, int route_offset) {
    const int horizon = ctx.budget.horizon;
    const ControlSeq imagined_robot = hold_controls(js.robot, horizon, ctx.dyn);

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
        return reward_horizon(js_l, ur, uh, ctx.env, ctx.human_weights, Agent::human, ctx.dyn,
                              route_offset, ctx.box);
    };
    const BoxBounds bounds = control_bounds(ctx.box, horizon);
    const DVec precond = control_curvature_scales(js.human, ctx.human_weights, ctx.env, ctx.box,
                                                  horizon, ctx.dyn.dt);
    const DVec u = gd_ascend<double>(objective, u0, ctx.budget, bounds, &precond);

    Prediction pred;
    for (int k = 0; k < horizon; ++k) pred.controls.push_back(Control{u[2 * k], u[2 * k + 1]});
    pred.responsive = false;
    return pred;
}

Prediction predict_tom(const JointState& js, const ControlSeq& robot_plan,
                       const PlanningContext& ctx, int route_offset) {
    if (robot_plan.size() != ctx.budget.horizon)
        throw Error(Errc::invalid_argument, "predict_tom: robot plan length != horizon");
    Prediction pred;
    pred.controls = tom_best_response<double>(js, robot_plan, ctx, route_offset);
    pred.responsive = true;
    return pred;
}

Prediction predict(ModelKind kind, const JointState& js, const ControlSeq& robot_plan,
                   const PlanningContext& ctx, int route_offset) {
    switch (kind) {
        case ModelKind::naive: return predict_naive(js, ctx.budget.horizon, ctx.dyn);
        case ModelKind::turn: return predict_turn(js, ctx, route_offset);
        case ModelKind::tom: return predict_tom(js, robot_plan, ctx, route_offset);
    }
    throw Error(Errc::invalid_argument, "predict: unknown model kind");
}

}  // namespace msw
