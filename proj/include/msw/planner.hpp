#ifndef MSW_PLANNER_HPP
#define MSW_PLANNER_HPP

#include <string>

#include "msw/models.hpp"

namespace msw {

// Receding-horizon plan under one human model.
struct Plan {
    ControlSeq robot_controls;
    ControlSeq predicted_human;
    double predicted_reward = 0.0;   // robot reward over the horizon
    double first_step_reward = 0.0;  // reward_step at (state, u_R[0], predicted u_H[0])
    ModelSpec model;
    double plan_seconds = 0.0;
    bool ok = true;
    std::string error;
};

// Per-episode warm-start cache, owned by the episode runner.
struct WarmStart {
    bool valid = false;
    ControlSeq robot;
    ControlSeq human;
};

// Plan from the current joint state with the given human model. Warm-starts
// from the previous plan shifted by one step when available. On optimizer
// failure returns the last feasible plan with ok = false.
Plan plan(const JointState& js, const ModelSpec& model, const PlanningContext& ctx,
          WarmStart* warm = nullptr, int route_offset = 0);

inline Control execute_first(const Plan& p) {
    if (p.robot_controls.empty()) throw Error(Errc::invalid_argument, "execute_first: empty plan");
    return p.robot_controls[0];
}

// The ToM planner objective F(u_R) = R_R(u_R, B(u_R, u_H)) where B is one
// unrolled human best-response ascent step from u_H, and its exact gradient.
// Exposed for derivative testing; plan() iterates this co-ascent.
double tom_unrolled_objective(const JointState& js, const DVec& u_robot, const DVec& u_human,
                              const PlanningContext& ctx, int route_offset);
DVec tom_objective_gradient(const JointState& js, const DVec& u_robot, const DVec& u_human,
                            const PlanningContext& ctx, int route_offset);

}  // namespace msw

#endif  // MSW_PLANNER_HPP
