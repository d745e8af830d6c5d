#include "msw/diffopt.hpp"

#include <cmath>

namespace msw {

namespace {

// Cholesky of A (n x n, symmetric); returns false unless A is positive
// definite with a safe margin.
bool cholesky(const std::array<std::array<double, kTangentCap>, kTangentCap>& a, int n,
              std::array<std::array<double, kTangentCap>, kTangentCap>& l) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            for (int k = 0; k < j; ++k)
                sum -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       l[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            if (i == j) {
                if (sum < 1e-12) return false;
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::sqrt(sum);
            } else {
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    sum / l[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            }
        }
    }
    return true;
}

void solve_cholesky(const std::array<std::array<double, kTangentCap>, kTangentCap>& l, int n,
                    const DVec& b, DVec& x) {
    DVec y;
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        double sum = b[i];
        for (int k = 0; k < i; ++k)
            sum -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * y[k];
        y[i] = sum / l[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    x.resize(n);
    for (int i = n - 1; i >= 0; --i) {
        double sum = y[i];
        for (int k = i + 1; k < n; ++k)
            sum -= l[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] * x[k];
        x[i] = sum / l[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
}

}  // namespace

DVec maximize_surrogate(const QuadraticSurrogate& q, const BoxBounds& box) {
    const int n = q.n;
    if (box.size() != n)
        throw Error(Errc::invalid_argument, "maximize_surrogate: box/surrogate size mismatch");

    // Interior stationary point of a strictly concave surrogate is exact.
    std::array<std::array<double, kTangentCap>, kTangentCap> neg_h{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            neg_h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                -q.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    std::array<std::array<double, kTangentCap>, kTangentCap> l{};
    if (cholesky(neg_h, n, l)) {
        DVec delta;
        solve_cholesky(l, n, q.grad, delta);
        bool interior = true;
        for (int i = 0; i < n; ++i)
            if (delta[i] < box.lo[i] || delta[i] > box.hi[i]) interior = false;
        if (interior) return delta;
    }

    // Otherwise: exact per-coordinate ascent with hard clamping, monotone in
    // q from delta = 0.
    DVec delta(n, 0.0);
    for (int sweep = 0; sweep < 50; ++sweep) {
        for (int j = 0; j < n; ++j) {
            // 1-D restriction q(delta_j = t) = const + b t + h t^2 / 2.
            double b = q.grad[j];
            for (int k = 0; k < n; ++k)
                if (k != j)
                    b += q.hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * delta[k];
            const double h = q.hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            double best = delta[j];
            if (h < -1e-12) {
                best = -b / h;
                if (best < box.lo[j]) best = box.lo[j];
                if (best > box.hi[j]) best = box.hi[j];
            } else {
                // Convex or flat direction: an endpoint maximizes.
                const auto q1 = [&](double t) { return b * t + 0.5 * h * t * t; };
                best = q1(box.lo[j]) >= q1(box.hi[j]) ? box.lo[j] : box.hi[j];
                if (q1(best) < q1(delta[j])) best = delta[j];
            }
            delta[j] = best;
        }
    }
    return delta;
}

}  // namespace msw
