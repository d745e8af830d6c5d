#ifndef MSW_SWITCHER_HPP
#define MSW_SWITCHER_HPP

#include <array>

#include "msw/planner.hpp"

namespace msw {

struct SwitcherConfig {
    double lambda = 0.0;          // reward units per nominal second of compute
    int cooldown = 3;             // steps between switch-down attempts
    double delta_fraction = 0.25; // first-control perturbation box, fraction of the control box
    int start_rung = 0;
};

inline void validate(const SwitcherConfig& c) {
    if (c.lambda < 0.0 || c.cooldown < 1 || !(c.delta_fraction > 0.0))
        throw Error(Errc::bad_config, "invalid switcher config");
}

// d(first predicted human control) / d(first robot control).
struct InfluenceJacobian {
    std::array<std::array<double, 2>, 2> m{};  // rows: human (steer, accel); cols: robot
    bool zero() const {
        return m[0][0] == 0.0 && m[0][1] == 0.0 && m[1][0] == 0.0 && m[1][1] == 0.0;
    }
};

enum class SwitchDecision { stay = 0, up = 1, down = 2 };
inline const char* switch_decision_name(SwitchDecision d) {
    switch (d) {
        case SwitchDecision::stay: return "stay";
        case SwitchDecision::up: return "up";
        case SwitchDecision::down: return "down";
    }
    return "?";
}

// Everything one switching evaluation computed, for the episode log.
struct SwitchEvaluation {
    int candidate_rung = -1;
    ModelKind candidate_kind = ModelKind::naive;
    Control delta_first{};           // first-control perturbation
    InfluenceJacobian influence{};
    double reward_estimate = 0.0;    // estimated one-step reward under the candidate
    double delta_r_meta = 0.0;
    SwitchDecision decision = SwitchDecision::stay;
    bool up_check_ran = false;
    bool down_check_ran = false;
    // evaluation-budget accounting
    int predictions_evaluated = 0;
    int jacobians_evaluated = 0;
    int surrogates_built = 0;
    bool planned = false;  // decide never plans; recorded to make that checkable
};

struct MetaRewardRecord {
    double realized_reward = 0.0;
    int rung = 0;
    double time_cost = 0.0;
    double meta_reward = 0.0;  // realized_reward - lambda * time_cost, exactly
};

inline MetaRewardRecord make_meta_record(double realized_reward, const ModelSpec& m,
                                         double lambda) {
    return MetaRewardRecord{realized_reward, m.rung, m.time_cost,
                            realized_reward - lambda * m.time_cost};
}

// Forward-mode derivative of the alternate model's first predicted human
// control w.r.t. the robot's first control; identically zero for
// non-responsive models.
InfluenceJacobian influence_jacobian(const JointState& js, const ControlSeq& robot_plan,
                                     const ModelSpec& alt, const PlanningContext& ctx,
                                     int route_offset = 0);

// Maximizer of the one-step quadratic surrogate of the robot reward around
// (state, current first control, alternate prediction), with the human first
// control shifted by influence * delta. Falls back to zero if the surrogate
// cannot be built.
Control estimate_delta_control(const JointState& js, const Plan& current, Control alt_first,
                               const InfluenceJacobian& influence, const SwitcherConfig& cfg,
                               const PlanningContext& ctx, int route_offset = 0);

// Exact one-step reward at the perturbed controls (not the surrogate value).
double estimate_reward(const JointState& js, const Plan& current, Control delta,
                       Control alt_first, const InfluenceJacobian& influence,
                       const PlanningContext& ctx, int route_offset = 0);

// r_hat - lambda T(alt) - (r_current - lambda T(cur)); positive favors the switch.
inline double delta_r_meta(double r_hat, double r_current, const ModelSpec& alt,
                           const ModelSpec& cur, const SwitcherConfig& cfg) {
    return (r_hat - cfg.lambda * alt.time_cost) - (r_current - cfg.lambda * cur.time_cost);
}

// One switching decision: check a jump to the top rung using the observed
// human control as a perfect prediction; otherwise, if the cooldown has
// elapsed, check one rung down using that model's genuine prediction.
SwitchEvaluation decide(const JointState& js, const Plan& current, Control observed_human,
                        const Ladder& ladder, const SwitcherConfig& cfg, int current_rung,
                        int steps_since_down_reset, const PlanningContext& ctx,
                        int route_offset = 0);

}  // namespace msw

#endif  // MSW_SWITCHER_HPP
