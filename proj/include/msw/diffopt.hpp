#ifndef MSW_DIFFOPT_HPP
#define MSW_DIFFOPT_HPP

#include <array>
#include <cmath>
#include <utility>

#include "msw/common.hpp"
#include "msw/dual.hpp"
#include "msw/dynamics.hpp"

namespace msw {

using DVec = SmallVec<double, kTangentCap>;

// Iteration budget shared by all planners and predictors. learn_rate is a
// dimensionless damping on curvature-scaled steps.
struct OptBudget {
    int steps = 20;
    double learn_rate = 0.6;
    int horizon = 5;
};

inline void validate(const OptBudget& b) {
    if (b.steps < 1 || !(b.learn_rate > 0.0) || b.horizon < 1 || b.horizon > kMaxHorizon)
        throw Error(Errc::bad_config, "invalid optimization budget");
}

// Per-coordinate box. Ascent scales steps by halfwidth^2 per coordinate and
// keeps iterates strictly inside via a smooth clamp (sharpness kSoftBox /
// halfwidth), so every optimizer output is differentiable end to end.
struct BoxBounds {
    DVec lo, hi;
    int size() const { return lo.size(); }
};
inline constexpr double kSoftBoxSharpness = 25.0;
// Per-iteration step cap as a fraction of the coordinate halfwidth; applied
// through tanh so the ascent map stays smooth under huge gradients.
inline constexpr double kAscentStepCap = 0.35;

inline BoxBounds control_bounds(const ControlBox& box, int horizon) {
    BoxBounds b;
    for (int k = 0; k < horizon; ++k) {
        b.lo.push_back(-box.steer_max);
        b.hi.push_back(box.steer_max);
        b.lo.push_back(-box.accel_max);
        b.hi.push_back(box.accel_max);
    }
    return b;
}

// Objectives are callables generic in the scalar: S f(const S* u, int n).
// Instantiated at double for values and at Dual<...> for derivatives.

template <class S, class F>
S eval_objective(F&& f, const SmallVec<S, kTangentCap>& u) {
    return f(u.data(), u.size());
}

// Forward-mode value + gradient in one vector pass: n unit tangents.
template <class S, class F>
S value_and_gradient_t(F&& f, const SmallVec<S, kTangentCap>& u, SmallVec<S, kTangentCap>& g) {
    const int n = u.size();
    SmallVec<Dual<S, kTangentCap>, kTangentCap> x;
    x.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i].v = u[i];
        x[i].n = n;
        x[i].d[i] = S(1.0);
    }
    const Dual<S, kTangentCap> fx = f(x.data(), n);
    if (!std::isfinite(value_of(fx)))
        throw Error(Errc::runtime, "gradient: objective is non-finite at evaluation point");
    g.resize(n);
    for (int i = 0; i < n; ++i) g[i] = i < fx.n ? fx.d[i] : S(0.0);
    return fx.v;
}

template <class S, class F>
SmallVec<S, kTangentCap> gradient_t(F&& f, const SmallVec<S, kTangentCap>& u) {
    SmallVec<S, kTangentCap> g;
    value_and_gradient_t<S>(std::forward<F>(f), u, g);
    return g;
}

template <class F>
DVec gradient(F&& f, const DVec& u) {
    return gradient_t<double>(std::forward<F>(f), u);
}

// Fixed-budget projected gradient ascent, generic in the scalar so nested
// optimizations stay differentiable. Per-coordinate steps are learn_rate *
// precond_j * g_j (precond defaults to halfwidth^2; planners pass a
// curvature-matched scale), smoothly capped and smoothly boxed. Runs exactly
// budget.steps iterations; if the final iterate somehow undershoots the
// start it falls back to the best iterate seen.
template <class S, class F>
SmallVec<S, kTangentCap> gd_ascend(F&& f, const SmallVec<S, kTangentCap>& u0,
                                   const OptBudget& budget, const BoxBounds& box,
                                   const DVec* precond = nullptr) {
    validate(budget);
    const int n = u0.size();
    if (box.size() != n) throw Error(Errc::invalid_argument, "gd_ascend: box/control size mismatch");
    if (precond && precond->size() != n)
        throw Error(Errc::invalid_argument, "gd_ascend: preconditioner size mismatch");

    SmallVec<S, kTangentCap> u = u0;
    SmallVec<S, kTangentCap> best = u0;
    SmallVec<S, kTangentCap> g;
    double f0 = 0.0;
    double best_value = 0.0;

    for (int it = 0; it < budget.steps; ++it) {
        const double fu = value_of(value_and_gradient_t<S>(f, u, g));
        if (!std::isfinite(fu)) throw Error(Errc::runtime, "gd_ascend: objective became non-finite");
        if (it == 0) {
            f0 = fu;
            best_value = fu;
        } else if (fu > best_value) {
            best_value = fu;
            best = u;
        }
        for (int j = 0; j < n; ++j) {
            const double hw = 0.5 * (box.hi[j] - box.lo[j]);
            const double cap = kAscentStepCap * hw;
            const double scale = budget.learn_rate * (precond ? (*precond)[j] : hw * hw);
            const S z = u[j] + cap * tanh((scale / cap) * g[j]);
            u[j] = softclamp(z, box.lo[j], box.hi[j], kSoftBoxSharpness / hw);
        }
    }

    const double ff = value_of(eval_objective<S>(f, u));
    if (!std::isfinite(ff)) throw Error(Errc::runtime, "gd_ascend: objective became non-finite");
    if (ff >= f0 - 1e-9 && ff >= best_value - 1e-9) return u;
    return ff > best_value ? u : best;
}

template <class F>
DVec gd_maximize(F&& f, const DVec& u0, const OptBudget& budget, const BoxBounds& box,
                 const DVec* precond = nullptr) {
    return gd_ascend<double>(std::forward<F>(f), u0, budget, box, precond);
}

// Local quadratic model f(u + delta) ~ value + grad . delta + delta' H delta / 2.
struct QuadraticSurrogate {
    double value = 0.0;
    DVec grad;
    std::array<std::array<double, kTangentCap>, kTangentCap> hess{};
    int n = 0;
};

// Value, gradient, and Hessian from a single nested forward pass.
template <class F>
QuadraticSurrogate build_surrogate(F&& f, const DVec& u) {
    const int n = u.size();
    using Inner = Dual<double, kTangentCap>;
    using Outer = Dual<Inner, kTangentCap>;
    SmallVec<Outer, kTangentCap> x;
    x.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i].v.v = u[i];
        x[i].v.n = n;
        x[i].v.d[i] = 1.0;
        x[i].n = n;
        x[i].d[i] = Inner(1.0);
    }
    const Outer fx = f(x.data(), n);
    if (!all_finite(fx))
        throw Error(Errc::runtime, "build_surrogate: non-finite derivatives");

    QuadraticSurrogate q;
    q.n = n;
    q.value = fx.v.v;
    q.grad.resize(n);
    for (int i = 0; i < n; ++i) q.grad[i] = i < fx.v.n ? fx.v.d[i] : 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double hij = (i < fx.n && j < fx.d[i].n) ? fx.d[i].d[j] : 0.0;
            q.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = hij;
        }
    // enforce exact symmetry
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double s = 0.5 * (q.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                                    q.hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
            q.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
            q.hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = s;
        }
    return q;
}

inline double surrogate_eval(const QuadraticSurrogate& q, const DVec& delta) {
    double r = q.value;
    for (int i = 0; i < q.n; ++i) {
        r += q.grad[i] * delta[i];
        double hrow = 0.0;
        for (int j = 0; j < q.n; ++j)
            hrow += q.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * delta[j];
        r += 0.5 * delta[i] * hrow;
    }
    return r;
}

// Maximize the surrogate over a box. Negative-definite interior optima are
// solved exactly; anything else falls back to monotone coordinate ascent
// from 0, so the result never loses to delta = 0.
DVec maximize_surrogate(const QuadraticSurrogate& q, const BoxBounds& box);

}  // namespace msw

#endif  // MSW_DIFFOPT_HPP
