#ifndef MSW_DUAL_HPP
#define MSW_DUAL_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <type_traits>

#include "msw/common.hpp"

namespace msw {

// Vector-valued forward-mode dual number. Carries a value and up to Cap
// tangents; `n` is the number of active tangents so constants (n = 0) cost
// nothing to combine with. Nesting Dual<Dual<double,M>,N> yields second
// derivatives in a single evaluation.
template <class T, int Cap = kTangentCap>
struct Dual {
    T v{};
    int n = 0;
    std::array<T, Cap> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT implicit: constants lift freely
    template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
    Dual(const T& value) : v(value) {}  // NOLINT

    static constexpr int capacity() { return Cap; }
};

inline double value_of(double x) { return x; }
template <class T, int Cap>
double value_of(const Dual<T, Cap>& x) {
    return value_of(x.v);
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T, int Cap>
bool all_finite(const Dual<T, Cap>& x) {
    if (!all_finite(x.v)) return false;
    for (int i = 0; i < x.n; ++i)
        if (!all_finite(x.d[i])) return false;
    return true;
}

namespace detail {
template <class T>
T tangent_or_zero(const std::array<T, 0>*, int) = delete;
}

template <class T, int Cap>
Dual<T, Cap> operator+(const Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    Dual<T, Cap> r;
    r.v = a.v + b.v;
    r.n = a.n > b.n ? a.n : b.n;
    for (int i = 0; i < r.n; ++i) {
        if (i < a.n && i < b.n)
            r.d[i] = a.d[i] + b.d[i];
        else if (i < a.n)
            r.d[i] = a.d[i];
        else
            r.d[i] = b.d[i];
    }
    return r;
}

template <class T, int Cap>
Dual<T, Cap> operator-(const Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    Dual<T, Cap> r;
    r.v = a.v - b.v;
    r.n = a.n > b.n ? a.n : b.n;
    for (int i = 0; i < r.n; ++i) {
        if (i < a.n && i < b.n)
            r.d[i] = a.d[i] - b.d[i];
        else if (i < a.n)
            r.d[i] = a.d[i];
        else
            r.d[i] = T{} - b.d[i];
    }
    return r;
}

template <class T, int Cap>
Dual<T, Cap> operator-(const Dual<T, Cap>& a) {
    Dual<T, Cap> r;
    r.v = T{} - a.v;
    r.n = a.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = T{} - a.d[i];
    return r;
}

template <class T, int Cap>
Dual<T, Cap> operator*(const Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    Dual<T, Cap> r;
    r.v = a.v * b.v;
    r.n = a.n > b.n ? a.n : b.n;
    for (int i = 0; i < r.n; ++i) {
        if (i < a.n && i < b.n)
            r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        else if (i < a.n)
            r.d[i] = a.d[i] * b.v;
        else
            r.d[i] = a.v * b.d[i];
    }
    return r;
}

template <class T, int Cap>
Dual<T, Cap> operator/(const Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    Dual<T, Cap> r;
    r.v = a.v / b.v;
    const T inv_b2 = T(1.0) / (b.v * b.v);
    r.n = a.n > b.n ? a.n : b.n;
    for (int i = 0; i < r.n; ++i) {
        const T da = i < a.n ? a.d[i] : T{};
        const T db = i < b.n ? b.d[i] : T{};
        r.d[i] = (da * b.v - a.v * db) * inv_b2;
    }
    return r;
}

// double mixed forms (avoid lifting constants into full duals)
template <class T, int Cap>
Dual<T, Cap> operator+(const Dual<T, Cap>& a, double b) {
    Dual<T, Cap> r = a;
    r.v = a.v + b;
    return r;
}
template <class T, int Cap>
Dual<T, Cap> operator+(double a, const Dual<T, Cap>& b) {
    return b + a;
}
template <class T, int Cap>
Dual<T, Cap> operator-(const Dual<T, Cap>& a, double b) {
    Dual<T, Cap> r = a;
    r.v = a.v - b;
    return r;
}
template <class T, int Cap>
Dual<T, Cap> operator-(double a, const Dual<T, Cap>& b) {
    Dual<T, Cap> r;
    r.v = a - b.v;
    r.n = b.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = T{} - b.d[i];
    return r;
}
template <class T, int Cap>
Dual<T, Cap> operator*(const Dual<T, Cap>& a, double b) {
    Dual<T, Cap> r;
    r.v = a.v * b;
    r.n = a.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] * b;
    return r;
}
template <class T, int Cap>
Dual<T, Cap> operator*(double a, const Dual<T, Cap>& b) {
    return b * a;
}
template <class T, int Cap>
Dual<T, Cap> operator/(const Dual<T, Cap>& a, double b) {
    return a * (1.0 / b);
}
template <class T, int Cap>
Dual<T, Cap> operator/(double a, const Dual<T, Cap>& b) {
    Dual<T, Cap> r;
    r.v = a / b.v;
    const T inv_b2 = T(1.0) / (b.v * b.v);
    r.n = b.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = (T{} - a * b.d[i]) * inv_b2;
    return r;
}

template <class T, int Cap>
Dual<T, Cap>& operator+=(Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    a = a + b;
    return a;
}
template <class T, int Cap>
Dual<T, Cap>& operator-=(Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    a = a - b;
    return a;
}
template <class T, int Cap>
Dual<T, Cap>& operator*=(Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    a = a * b;
    return a;
}

// Value comparisons. Used only for numerically-stable branch selection where
// both branches are the same analytic function, and in non-differentiated
// bookkeeping; never to introduce kinks into planning objectives.
template <class T, int Cap>
bool operator<(const Dual<T, Cap>& a, double b) {
    return value_of(a) < b;
}
template <class T, int Cap>
bool operator>(const Dual<T, Cap>& a, double b) {
    return value_of(a) > b;
}
template <class T, int Cap>
bool operator<(double a, const Dual<T, Cap>& b) {
    return a < value_of(b);
}
template <class T, int Cap>
bool operator>(double a, const Dual<T, Cap>& b) {
    return a > value_of(b);
}
template <class T, int Cap>
bool operator<(const Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    return value_of(a) < value_of(b);
}
template <class T, int Cap>
bool operator>(const Dual<T, Cap>& a, const Dual<T, Cap>& b) {
    return value_of(a) > value_of(b);
}

// Elementary functions via chain rule.
template <class T, int Cap, class FV, class FD>
Dual<T, Cap> lift_unary(const Dual<T, Cap>& a, FV&& fv, FD&& fd) {
    Dual<T, Cap> r;
    r.v = fv(a.v);
    const T slope = fd(a.v);
    r.n = a.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = slope * a.d[i];
    return r;
}

using std::cos;
using std::exp;
using std::log1p;
using std::sin;
using std::sqrt;

template <class T, int Cap>
Dual<T, Cap> sin(const Dual<T, Cap>& a) {
    return lift_unary(a, [](const T& x) { return sin(x); }, [](const T& x) { return cos(x); });
}
template <class T, int Cap>
Dual<T, Cap> cos(const Dual<T, Cap>& a) {
    return lift_unary(a, [](const T& x) { return cos(x); },
                      [](const T& x) { return T{} - sin(x); });
}
template <class T, int Cap>
Dual<T, Cap> exp(const Dual<T, Cap>& a) {
    Dual<T, Cap> r;
    r.v = exp(a.v);
    r.n = a.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = r.v * a.d[i];
    return r;
}
template <class T, int Cap>
Dual<T, Cap> log1p(const Dual<T, Cap>& a) {
    return lift_unary(a, [](const T& x) { return log1p(x); },
                      [](const T& x) { return T(1.0) / (T(1.0) + x); });
}
template <class T, int Cap>
Dual<T, Cap> sqrt(const Dual<T, Cap>& a) {
    Dual<T, Cap> r;
    r.v = sqrt(a.v);
    const T slope = T(0.5) / r.v;
    r.n = a.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = slope * a.d[i];
    return r;
}

using std::tanh;
template <class T, int Cap>
Dual<T, Cap> tanh(const Dual<T, Cap>& a) {
    Dual<T, Cap> r;
    r.v = tanh(a.v);
    const T slope = T(1.0) - r.v * r.v;
    r.n = a.n;
    for (int i = 0; i < r.n; ++i) r.d[i] = slope * a.d[i];
    return r;
}

template <class S>
S square(const S& x) {
    return x * x;
}

// softplus(x) = log(1 + exp(x)), evaluated in the numerically stable branch.
// Both branches are the same analytic function, so derivatives stay smooth.
template <class S>
S softplus(const S& x) {
    if (x > 0.0) return x + log1p(exp(0.0 - x));
    return log1p(exp(x));
}
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Sharpened softplus: smooth max(0, x) with corner radius ~1/sharpness.
template <class S>
S softplus(const S& x, double sharpness) {
    return softplus(x * sharpness) * (1.0 / sharpness);
}

// sigmoid, the derivative of softplus.
template <class S>
S logistic(const S& x) {
    if (x > 0.0) {
        const S e = exp(0.0 - x);
        return 1.0 / (1.0 + e);
    }
    const S e = exp(x);
    return e / (1.0 + e);
}
inline double logistic(double x) {
    if (x > 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Smooth two-sided clamp onto (lo, hi). Identity up to O(exp(-beta*margin))
// in the interior, saturates log(2)/beta inside the bounds. beta is an
// absolute sharpness (units of 1/x).
template <class S>
S softclamp(const S& x, double lo, double hi, double beta) {
    const S upper = hi - softplus((hi - x) * beta) * (1.0 / beta);
    return lo + softplus((upper - lo) * beta) * (1.0 / beta);
}

// d softclamp / dx, used by the hand-chained ToM co-ascent gradient.
inline double softclamp_slope(double x, double lo, double hi, double beta) {
    const double su = logistic((hi - x) * beta);
    const double upper = hi - softplus((hi - x) * beta) / beta;
    const double sl = logistic((upper - lo) * beta);
    return sl * su;
}

}  // namespace msw

#endif  // MSW_DUAL_HPP
