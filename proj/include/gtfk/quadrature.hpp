#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace gtfk {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

// Newton iteration on P_n with Tricomi's initial guesses; nodes on [-1, 1].
inline QuadratureRule compute_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        {
            // one more evaluation at the converged root for the weight
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

// Physicists' Hermite rule (weight e^{-t^2}) via orthonormal recurrence and Newton.
inline QuadratureRule compute_gauss_hermite(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    const int m = (n + 1) / 2;
    double z = 0.0;
    auto eval = [&](double x, double& pn, double& pnm1) {
        double p1 = pim4, p2 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = x * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        }
        pn = p1;
        pnm1 = p2;
    };
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int it = 0; it < 200; ++it) {
            double pn = 0.0, pnm1 = 0.0;
            eval(z, pn, pnm1);
            pp = std::sqrt(2.0 * n) * pnm1;
            const double dz = pn / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        double pn = 0.0, pnm1 = 0.0;
        eval(z, pn, pnm1);
        pp = std::sqrt(2.0 * n) * pnm1;
        rule.nodes[i] = z;
        rule.weights[i] = 2.0 / (pp * pp);
    }
    // nodes come out descending; store ascending and mirror
    std::vector<double> x(n), w(n);
    for (int i = 0; i < m; ++i) {
        x[n - 1 - i] = rule.nodes[i];
        x[i] = -rule.nodes[i];
        w[n - 1 - i] = w[i] = rule.weights[i];
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    rule.nodes = std::move(x);
    rule.weights = std::move(w);
    return rule;
}

template <class Compute>
const QuadratureRule& cached_rule(int n, Compute compute) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<const QuadratureRule>(compute(n));
    return *slot;
}

}  // namespace detail

/// Gauss-Legendre nodes and weights on [-1, 1]. Rules are computed once per order.
inline const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    return detail::cached_rule(n, [](int k) { return detail::compute_gauss_legendre(k); });
}

/// Gauss-Hermite nodes and weights for the weight e^{-t^2} on the real line.
inline const QuadratureRule& gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    return detail::cached_rule(n, [](int k) { return detail::compute_gauss_hermite(k); });
}

/// Integrates f over [lo, hi] with an n-point Gauss-Legendre rule.
template <class F>
double integrate_legendre(F&& f, double lo, double hi, int n) {
    const auto& rule = gauss_legendre(n);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Trapezoid rule for samples on a uniform grid with spacing h.
inline double trapezoid(const std::vector<double>& values, double h) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return h * sum;
}

}  // namespace gtfk
