#ifndef MSW_DYNAMICS_HPP
#define MSW_DYNAMICS_HPP

#include <cmath>
#include <vector>

#include "msw/common.hpp"
#include "msw/dual.hpp"

namespace msw {

template <class S>
struct StateT {
    S x{};        // longitudinal position (m)
    S y{};        // lateral position (m)
    S heading{};  // rad, 0 points along +x
    S speed{};    // m/s
};
using State = StateT<double>;

template <class S>
struct ControlT {
    S steer{};  // curvature-like steering gain: heading rate = speed * steer
    S accel{};  // m/s^2
};
using Control = ControlT<double>;

struct ControlBox {
    double steer_max = 1.0;
    double accel_max = 4.0;
};

struct DynamicsParams {
    double friction = 0.1;  // 1/s
    double dt = 0.1;        // s
    bool allow_reverse = false;
    // Sharpness of the softplus speed floor used by the smooth variant.
    double speed_floor_sharpness = 40.0;
};

template <class S>
using ControlSeqT = SmallVec<ControlT<S>, kMaxHorizon>;
using ControlSeq = ControlSeqT<double>;

// Re-lift values into a wider scalar (double -> dual, dual -> nested dual).
template <class S2, class S1>
StateT<S2> relift_state(const StateT<S1>& s) {
    return StateT<S2>{S2(s.x), S2(s.y), S2(s.heading), S2(s.speed)};
}
template <class S2, class S1>
ControlT<S2> relift_control(const ControlT<S1>& u) {
    return ControlT<S2>{S2(u.steer), S2(u.accel)};
}
template <class S2, class S1>
SmallVec<ControlT<S2>, kMaxHorizon> relift_seq(const SmallVec<ControlT<S1>, kMaxHorizon>& seq) {
    SmallVec<ControlT<S2>, kMaxHorizon> out;
    for (int i = 0; i < seq.size(); ++i) out.push_back(relift_control<S2>(seq[i]));
    return out;
}

inline bool state_finite(const State& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
           std::isfinite(s.speed);
}
inline bool control_finite(const Control& u) {
    return std::isfinite(u.steer) && std::isfinite(u.accel);
}

// One explicit-Euler step of the 4D bicycle model, differentiable variant.
// The no-reverse clamp is a softplus floor so the map stays C-infinity; at
// driving speeds the floor is exactly the identity in double precision.
template <class S>
StateT<S> step_smooth(const StateT<S>& s, const ControlT<S>& u, const DynamicsParams& p) {
    StateT<S> next;
    next.x = s.x + p.dt * (s.speed * cos(s.heading));
    next.y = s.y + p.dt * (s.speed * sin(s.heading));
    next.heading = s.heading + p.dt * (s.speed * u.steer);
    S v = s.speed + p.dt * (u.accel - p.friction * s.speed);
    if (!p.allow_reverse) v = softplus(v, p.speed_floor_sharpness);
    next.speed = v;
    return next;
}

// Simulation step: identical Euler update with a hard speed clamp.
inline State step(const State& s, const Control& u, const DynamicsParams& p) {
    if (!state_finite(s) || !control_finite(u))
        throw Error(Errc::invalid_argument, "dynamics step: non-finite state or control");
    if (!(p.dt > 0.0) || p.friction < 0.0)
        throw Error(Errc::invalid_argument, "dynamics step: invalid params");
    State next;
    next.x = s.x + p.dt * s.speed * std::cos(s.heading);
    next.y = s.y + p.dt * s.speed * std::sin(s.heading);
    next.heading = s.heading + p.dt * s.speed * u.steer;
    next.speed = s.speed + p.dt * (u.accel - p.friction * s.speed);
    if (!p.allow_reverse && next.speed < 0.0) next.speed = 0.0;
    return next;
}

// Joint state of robot, target human, and scripted cars.
template <class S>
struct JointStateT {
    StateT<S> robot;
    StateT<S> human;
    SmallVec<StateT<S>, kMaxOthers> others;
};
using JointState = JointStateT<double>;

template <class S2, class S1>
JointStateT<S2> relift_joint(const JointStateT<S1>& js) {
    JointStateT<S2> out;
    out.robot = relift_state<S2>(js.robot);
    out.human = relift_state<S2>(js.human);
    out.others.resize(js.others.size());
    for (int i = 0; i < js.others.size(); ++i) out.others[i] = relift_state<S2>(js.others[i]);
    return out;
}

inline bool joint_finite(const JointState& js) {
    if (!state_finite(js.robot) || !state_finite(js.human)) return false;
    for (const auto& o : js.others)
        if (!state_finite(o)) return false;
    return true;
}

// Precomputed control sequence for a scripted car; holds its last control
// once exhausted, which continues at constant speed when the route carries
// friction-compensating accelerations.
struct Route {
    std::vector<Control> controls;
    Control at(int step) const {
        if (controls.empty()) return Control{};
        const int i = step < 0 ? 0 : step;
        const std::size_t idx = static_cast<std::size_t>(i) < controls.size()
                                    ? static_cast<std::size_t>(i)
                                    : controls.size() - 1;
        return controls[idx];
    }
};

// Advance every car one step. Scripted cars replay their routes (taken as
// constants; no tangents flow through them).
template <class S>
JointStateT<S> advance_joint_smooth(const JointStateT<S>& js, const ControlT<S>& u_robot,
                                    const ControlT<S>& u_human, const std::vector<Route>& routes,
                                    const DynamicsParams& p, int route_step) {
    JointStateT<S> next;
    next.robot = step_smooth(js.robot, u_robot, p);
    next.human = step_smooth(js.human, u_human, p);
    next.others.resize(js.others.size());
    for (int i = 0; i < js.others.size(); ++i) {
        const Control ui = i < static_cast<int>(routes.size()) ? routes[i].at(route_step) : Control{};
        next.others[i] = step_smooth(js.others[i], relift_control<S>(ui), p);
    }
    return next;
}

inline JointState advance_joint(const JointState& js, const Control& u_robot,
                                const Control& u_human, const std::vector<Route>& routes,
                                const DynamicsParams& p, int route_step) {
    JointState next;
    next.robot = step(js.robot, u_robot, p);
    next.human = step(js.human, u_human, p);
    next.others.resize(js.others.size());
    for (int i = 0; i < js.others.size(); ++i) {
        const Control ui = i < static_cast<int>(routes.size()) ? routes[i].at(route_step) : Control{};
        next.others[i] = step(js.others[i], ui, p);
    }
    return next;
}

// Joint rollout over a shared horizon; element 0 is the initial state.
// Uses the simulation-exact (hard clamp) step.
inline std::vector<JointState> rollout(const JointState& s0, const ControlSeq& u_robot,
                                       const ControlSeq& u_human, const std::vector<Route>& routes,
                                       const DynamicsParams& p, int route_offset = 0) {
    if (u_robot.size() != u_human.size())
        throw Error(Errc::invalid_argument, "rollout: robot/human horizons differ");
    std::vector<JointState> traj;
    traj.reserve(static_cast<std::size_t>(u_robot.size()) + 1);
    traj.push_back(s0);
    for (int k = 0; k < u_robot.size(); ++k)
        traj.push_back(advance_joint(traj.back(), u_robot[k], u_human[k], routes, p, route_offset + k));
    return traj;
}

}  // namespace msw

#endif  // MSW_DYNAMICS_HPP
