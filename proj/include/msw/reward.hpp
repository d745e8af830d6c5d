#ifndef MSW_REWARD_HPP
#define MSW_REWARD_HPP

#include <array>
#include <cmath>
#include <vector>

#include "msw/common.hpp"
#include "msw/dual.hpp"
#include "msw/dynamics.hpp"

namespace msw {

enum class Agent { robot, human };

struct Lane {
    double center_y = 0.0;
    double half_width = 1.5;
};

struct Cone {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.4;
};

// Road geometry, scripted traffic, and the shape parameters of the smooth
// feature forms. Lanes run along +x.
struct Environment {
    std::vector<Lane> lanes;
    std::vector<Cone> cones;
    double speed_limit = 10.0;
    double y_min = -1.5;
    double y_max = 4.5;
    int robot_goal_lane = 0;
    int human_goal_lane = 1;
    std::vector<Route> other_routes;

    // Feature shape parameters.
    double anticipation_tau = 0.5;       // ego position lookahead (s)
    double anticipation_tau_other = 0.5; // lookahead applied to other cars
    double car_scale_x = 5.5;         // proximity Gaussian length scales (m)
    double car_scale_y = 2.2;
    double cone_scale_margin = 1.4;   // added to cone radius for its scale
    double headway_boost = 1.0;       // extra proximity felt by the car behind
    double headway_sharpness = 0.8;   // 1/m blend between leader and follower
    double headway_lane_gate = 1.3;   // lateral scale over which the boost applies (m)
    double boundary_margin = 0.5;     // buffer inside the road edge
    double boundary_sharpness = 4.0;
    double speed_limit_sharpness = 6.0;

    double goal_y(Agent ego) const {
        const int idx = ego == Agent::robot ? robot_goal_lane : human_goal_lane;
        if (idx < 0 || idx >= static_cast<int>(lanes.size()))
            throw Error(Errc::bad_config, "environment: goal lane index out of range");
        return lanes[idx].center_y;
    }
};

inline constexpr int kFeatureCount = 6;
enum FeatureIndex {
    kFeatProgress = 0,
    kFeatLane = 1,
    kFeatHeading = 2,
    kFeatCollision = 3,
    kFeatBoundary = 4,
    kFeatEffort = 5,
};
inline const char* feature_name(int i) {
    static const char* names[kFeatureCount] = {"progress", "lane",     "heading",
                                               "collision", "boundary", "effort"};
    return names[i];
}
inline constexpr int kFeatureRegistryVersion = 1;

struct FeatureWeights {
    std::array<double, kFeatureCount> w{};
    double& operator[](int i) { return w[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return w[static_cast<std::size_t>(i)]; }
};

namespace detail {
// Position a short time ahead under constant velocity. Keeps one-step rewards
// sensitive to heading and speed, which is where controls act first under
// explicit Euler.
template <class S>
void anticipated(const StateT<S>& s, double tau, S& ax, S& ay) {
    ax = s.x + tau * (s.speed * cos(s.heading));
    ay = s.y + tau * (s.speed * sin(s.heading));
}

// Proximity to another car. The car behind feels a same-lane pair more
// strongly (headway factor), which is what makes yielding to a car nosing in
// ahead beat racing it; the boost fades laterally so next-lane traffic is
// not treated as a leader.
template <class S>
S car_proximity(const S& ex, const S& ey, const S& ox, const S& oy, const Environment& env) {
    const S dx = (ex - ox) * (1.0 / env.car_scale_x);
    const S dy = (ey - oy) * (1.0 / env.car_scale_y);
    const S gaussian = exp(0.0 - (dx * dx + dy * dy));
    const S lane_dy = (ey - oy) * (1.0 / env.headway_lane_gate);
    const S follower = logistic((ox - ex) * env.headway_sharpness) * exp(0.0 - lane_dy * lane_dy);
    return gaussian * (1.0 + env.headway_boost * follower);
}
}  // namespace detail

// Feature vector, evaluated at the given joint state for one ego agent.
// All terms are C-infinity in (state, controls).
template <class S>
std::array<S, kFeatureCount> features(const JointStateT<S>& js, const ControlT<S>& u_robot,
                                      const ControlT<S>& u_human, const Environment& env,
                                      Agent ego, const ControlBox& box = ControlBox{}) {
    const StateT<S>& e = ego == Agent::robot ? js.robot : js.human;
    const ControlT<S>& ue = ego == Agent::robot ? u_robot : u_human;

    S ex, ey;
    detail::anticipated(e, env.anticipation_tau, ex, ey);
    const double tau_o = env.anticipation_tau_other;

    std::array<S, kFeatureCount> phi;

    // Forward progress against the speed limit; lane direction is +x. The
    // overspeed barrier has slope 2 so the net slope crosses zero exactly at
    // the limit.
    phi[kFeatProgress] = e.speed * cos(e.heading) -
                         2.0 * softplus(e.speed - env.speed_limit, env.speed_limit_sharpness);

    // Lateral alignment with the ego's goal lane, on the anticipated position.
    const double gy = env.goal_y(ego);
    phi[kFeatLane] = 0.0 - square(ey - gy);

    // Directional alignment.
    phi[kFeatHeading] = 0.0 - square(e.heading);

    // Proximity penalty against every other car and cone.
    S collision = S(0.0);
    {
        S ox, oy;
        if (ego == Agent::robot) {
            detail::anticipated(js.human, tau_o, ox, oy);
            collision += detail::car_proximity(ex, ey, ox, oy, env);
        } else {
            detail::anticipated(js.robot, tau_o, ox, oy);
            collision += detail::car_proximity(ex, ey, ox, oy, env);
        }
        for (int i = 0; i < js.others.size(); ++i) {
            detail::anticipated(js.others[i], tau_o, ox, oy);
            collision += detail::car_proximity(ex, ey, ox, oy, env);
        }
        for (const Cone& c : env.cones) {
            const double scale = c.radius + env.cone_scale_margin;
            const S dx = (ex - c.x) * (1.0 / scale);
            const S dy = (ey - c.y) * (1.0 / scale);
            collision += exp(0.0 - (dx * dx + dy * dy));
        }
    }
    phi[kFeatCollision] = 0.0 - collision;

    // Road boundary, grows linearly once the anticipated position crosses the
    // margin-shrunk edge.
    const double lo = env.y_min + env.boundary_margin;
    const double hi = env.y_max - env.boundary_margin;
    phi[kFeatBoundary] = 0.0 - softplus(lo - ey, env.boundary_sharpness) -
                         softplus(ey - hi, env.boundary_sharpness);

    // Control effort, normalized by the control box.
    const S ns = ue.steer * (1.0 / box.steer_max);
    const S na = ue.accel * (1.0 / box.accel_max);
    phi[kFeatEffort] = 0.0 - (ns * ns + na * na);

    return phi;
}

template <class S>
S dot(const FeatureWeights& w, const std::array<S, kFeatureCount>& phi) {
    S r = S(0.0);
    for (int i = 0; i < kFeatureCount; ++i) r += w[i] * phi[i];
    return r;
}

// Per-step reward term: advance the joint state one step, then weigh the
// features there. This is what the horizon sum accumulates and what the
// switcher's one-step estimates evaluate.
template <class S>
S reward_step(const JointStateT<S>& js, const ControlT<S>& u_robot, const ControlT<S>& u_human,
              const Environment& env, const FeatureWeights& w, Agent ego,
              const DynamicsParams& p, int route_step = 0, const ControlBox& box = ControlBox{}) {
    const JointStateT<S> next =
        advance_joint_smooth(js, u_robot, u_human, env.other_routes, p, route_step);
    return dot(w, features(next, u_robot, u_human, env, ego, box));
}

// Analytic upper-bound proxy for the horizon reward's per-coordinate
// curvature. Steering stiffness grows like (anticipated lateral gain)^2 ~
// v^4 while acceleration directions are nearly flat, a conditioning spread
// of ~1e4 that a fixed step size cannot serve; ascent divides by these.
// Constant w.r.t. the controls, so optimizer maps stay smooth.
template <class S>
SmallVec<double, 2 * kMaxHorizon> control_curvature_scales(
    const StateT<S>& ego, const FeatureWeights& w, const Environment& env,
    const ControlBox& box, int horizon, double dt) {
    const double v = std::max(1.5, value_of(ego.speed));
    const double tau = env.anticipation_tau;
    const double wc = w[kFeatCollision] * (1.0 + env.headway_boost);
    const double lat = 2.0 * w[kFeatLane] + 2.0 * wc / (env.car_scale_y * env.car_scale_y) +
                       0.25 * w[kFeatBoundary] * env.boundary_sharpness;
    const double lon_x = 2.0 * wc / (env.car_scale_x * env.car_scale_x);
    const double lon_sp = 0.5 * w[kFeatProgress] * env.speed_limit_sharpness;

    SmallVec<double, 2 * kMaxHorizon> scales;
    for (int k = 0; k < horizon; ++k) {
        double kw = 2.0 * w[kFeatEffort] / (box.steer_max * box.steer_max);
        double ka = 2.0 * w[kFeatEffort] / (box.accel_max * box.accel_max);
        for (int j = k + 1; j <= horizon; ++j) {
            const double reach = dt * (j - 1 - k) + tau;
            const double dy = dt * v * v * reach;  // d(anticipated y_j)/d(steer_k)
            const double dx = dt * reach;          // d(anticipated x_j)/d(accel_k)
            kw += 2.0 * w[kFeatHeading] * (dt * v) * (dt * v) + lat * dy * dy;
            ka += lon_x * dx * dx + lon_sp * dt * dt;
        }
        scales.push_back(1.0 / (kw + 1e-3));
        scales.push_back(1.0 / (ka + 1e-3));
    }
    return scales;
}

// Cumulative reward over a control horizon, evaluated along the rollout.
template <class S>
S reward_horizon(const JointStateT<S>& s0, const ControlSeqT<S>& u_robot,
                 const ControlSeqT<S>& u_human, const Environment& env, const FeatureWeights& w,
                 Agent ego, const DynamicsParams& p, int route_offset = 0,
                 const ControlBox& box = ControlBox{}) {
    if (u_robot.size() != u_human.size())
        throw Error(Errc::invalid_argument, "reward_horizon: robot/human horizons differ");
    S total = S(0.0);
    JointStateT<S> js = s0;
    for (int k = 0; k < u_robot.size(); ++k) {
        const JointStateT<S> next =
            advance_joint_smooth(js, u_robot[k], u_human[k], env.other_routes, p, route_offset + k);
        total += dot(w, features(next, u_robot[k], u_human[k], env, ego, box));
        js = next;
    }
    return total;
}

}  // namespace msw

#endif  // MSW_REWARD_HPP
