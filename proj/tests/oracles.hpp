// Test-side oracles: finite differences, dense solves, deterministic random
// state generators. Kept independent of the library's derivative machinery so
// they can check it.
#ifndef MSW_TESTS_ORACLES_HPP
#define MSW_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "msw/sim.hpp"

namespace oracles {

// Central finite differences of a scalar function of a vector.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> u, double h = 1e-6) {
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double step = h * std::max(1.0, std::fabs(u[i]));
        const double orig = u[i];
        u[i] = orig + step;
        const double fp = f(u);
        u[i] = orig - step;
        const double fm = f(u);
        u[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

// Relative agreement check: |a-b| <= tol * max(|a|, |b|, scale).
inline bool close_rel(double a, double b, double tol, double scale = 1.0) {
    return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), scale});
}

// Per-coordinate gradient agreement at relative tolerance, floored by the
// gradient's overall scale (central differences carry ~1e-9 absolute noise).
inline bool grads_close(double ad, double fd, double gnorm, double tol = 1e-5) {
    return std::fabs(ad - fd) <=
           tol * std::max({std::fabs(ad), std::fabs(fd), 1e-3 * (gnorm + 1.0)});
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// Gaussian elimination with partial pivoting; A is row-major n x n.
inline std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[static_cast<std::size_t>(r) * n + col]) >
                std::fabs(a[static_cast<std::size_t>(pivot) * n + col]))
                pivot = r;
        if (pivot != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(col) * n + c],
                          a[static_cast<std::size_t>(pivot) * n + c]);
            std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
        }
        const double d = a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double factor = a[static_cast<std::size_t>(r) * n + col] / d;
            for (int c = col; c < n; ++c)
                a[static_cast<std::size_t>(r) * n + c] -=
                    factor * a[static_cast<std::size_t>(col) * n + c];
            b[static_cast<std::size_t>(r)] -= factor * b[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double sum = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c)
            sum -= a[static_cast<std::size_t>(r) * n + c] * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = sum / a[static_cast<std::size_t>(r) * n + r];
    }
    return x;
}

// Deterministic RNG independent of libstdc++ distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ull + 1) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
    }
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Plausible joint states around a scenario's geometry for derivative checks.
inline msw::JointState random_scenario_state(const msw::ScenarioConfig& cfg, Rng& rng) {
    msw::JointState js = cfg.initial;
    auto wiggle = [&](msw::State& s, double dx) {
        s.x += rng.uniform(0.0, dx);
        s.y += rng.uniform(-0.6, 0.6);
        s.heading += rng.uniform(-0.12, 0.12);
        s.speed = std::max(1.0, s.speed + rng.uniform(-1.5, 1.0));
    };
    wiggle(js.robot, 22.0);
    wiggle(js.human, 22.0);
    for (int i = 0; i < js.others.size(); ++i) {
        js.others[i].x += rng.uniform(0.0, 8.0);
        js.others[i].speed = std::max(1.0, js.others[i].speed + rng.uniform(-0.5, 0.5));
    }
    return js;
}

inline std::vector<double> random_controls(const msw::ControlBox& box, int horizon, Rng& rng,
                                           double fill = 0.6) {
    std::vector<double> u;
    for (int k = 0; k < horizon; ++k) {
        u.push_back(rng.uniform(-fill * box.steer_max, fill * box.steer_max));
        u.push_back(rng.uniform(-fill * box.accel_max, fill * box.accel_max));
    }
    return u;
}

inline msw::ControlSeq to_seq(const std::vector<double>& u) {
    msw::ControlSeq seq;
    for (std::size_t k = 0; k + 1 < u.size(); k += 2) seq.push_back(msw::Control{u[k], u[k + 1]});
    return seq;
}

}  // namespace oracles

#endif  // MSW_TESTS_ORACLES_HPP
