#ifndef MSW_MODELS_HPP
#define MSW_MODELS_HPP

#include <string>
#include <type_traits>
#include <vector>

#include "msw/common.hpp"
#include "msw/diffopt.hpp"
#include "msw/dynamics.hpp"
#include "msw/reward.hpp"

namespace msw {

enum class ModelKind { naive = 0, turn = 1, tom = 2 };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::naive: return "naive";
        case ModelKind::turn: return "turn";
        case ModelKind::tom: return "tom";
    }
    return "?";
}

ModelKind model_kind_from_name(const std::string& name);

// Relative planning cost of each predictor; the ladder's nominal times are
// t_base scaled by these.
inline double model_cost_multiplier(ModelKind k) {
    switch (k) {
        case ModelKind::naive: return 1.0;
        case ModelKind::turn: return 2.0;
        case ModelKind::tom: return 4.0;
    }
    return 1.0;
}

// One rung: predictor kind plus its nominal compute cost in seconds.
struct ModelSpec {
    ModelKind kind = ModelKind::naive;
    double time_cost = 0.1;
    int rung = 0;
};

inline double nominal_cost(const ModelSpec& m) { return m.time_cost; }

struct Ladder {
    std::vector<ModelSpec> rungs;
    int top() const { return static_cast<int>(rungs.size()) - 1; }
    const ModelSpec& at(int rung) const {
        if (rung < 0 || rung >= static_cast<int>(rungs.size()))
            throw Error(Errc::invalid_argument, "ladder: rung out of range");
        return rungs[static_cast<std::size_t>(rung)];
    }
};

// Builds a ladder with nominal costs t_base * {1, 2, 4}; rungs must come out
// strictly ordered by cost.
Ladder make_ladder(const std::vector<ModelKind>& kinds, double t_base);

struct Prediction {
    ControlSeq controls;
    bool responsive = false;  // true iff the prediction depends on the robot plan
};

// Everything a predictor or planner needs about the world.
struct PlanningContext {
    Environment env;
    FeatureWeights robot_weights;
    FeatureWeights human_weights;
    OptBudget budget;
    DynamicsParams dyn;
    ControlBox box;
};

// Controls that hold the given state's heading and speed exactly under the
// Euler dynamics: zero steering, friction-compensating acceleration.
template <class S>
ControlSeqT<S> hold_controls(const StateT<S>& s, int horizon, const DynamicsParams& p) {
    ControlSeqT<S> seq;
    const S a = p.friction * s.speed;
    for (int k = 0; k < horizon; ++k) seq.push_back(ControlT<S>{S(0.0), a});
    return seq;
}

// Constant heading and speed continuation of the human.
Prediction predict_naive(const JointState& js, int horizon, const DynamicsParams& p);

// Human optimizes their own reward against an imagined constant-velocity
// robot; independent of the actual robot plan.
Prediction predict_turn(const JointState& js, const PlanningContext& ctx, int route_offset = 0);

// Human best response to a given robot plan, computed with a fixed ascent
// budget so the whole map is smooth in the plan. Generic in the scalar so
// influence Jacobians come out of forward mode.
template <class S>
ControlSeqT<S> tom_best_response(const JointStateT<S>& js, const ControlSeqT<S>& robot_plan,
                                 const PlanningContext& ctx, int route_offset = 0) {
    const int horizon = robot_plan.size();
    SmallVec<S, kTangentCap> u0;
    {
        const ControlSeqT<S> init = hold_controls(js.human, horizon, ctx.dyn);
        for (int k = 0; k < horizon; ++k) {
            u0.push_back(init[k].steer);
            u0.push_back(init[k].accel);
        }
    }
    auto objective = [&](const auto* u, int n) {
        using T = std::decay_t<decltype(*u)>;
        const JointStateT<T> js_l = relift_joint<T>(js);
        const ControlSeqT<T> ur = relift_seq<T>(robot_plan);
        ControlSeqT<T> uh;
        for (int k = 0; k < n / 2; ++k) uh.push_back(ControlT<T>{u[2 * k], u[2 * k + 1]});
        return reward_horizon(js_l, ur, uh, ctx.env, ctx.human_weights, Agent::human, ctx.dyn,
                              route_offset, ctx.box);
    };
    const BoxBounds bounds = control_bounds(ctx.box, horizon);
    const DVec precond = control_curvature_scales(js.human, ctx.human_weights, ctx.env, ctx.box,
                                                  horizon, ctx.dyn.dt);
    const SmallVec<S, kTangentCap> u = gd_ascend<S>(objective, u0, ctx.budget, bounds, &precond);
    ControlSeqT<S> out;
    for (int k = 0; k < horizon; ++k) out.push_back(ControlT<S>{u[2 * k], u[2 * k + 1]});
    return out;
}

Prediction predict_tom(const JointState& js, const ControlSeq& robot_plan,
                       const PlanningContext& ctx, int route_offset = 0);

// Dispatch by model kind. robot_plan is only consulted by responsive models.
Prediction predict(ModelKind kind, const JointState& js, const ControlSeq& robot_plan,
                   const PlanningContext& ctx, int route_offset = 0);

}  // namespace msw

#endif  // MSW_MODELS_HPP
