#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gtfk::oracles {

/// Tridiagonal operator: row i is lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1].
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

    std::size_t size() const noexcept { return diag.size(); }

    void apply(std::span<const double> u, std::span<double> out) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            double v = diag[i] * u[i];
            if (i > 0) v += lower[i] * u[i - 1];
            if (i + 1 < n) v += upper[i] * u[i + 1];
            out[i] = v;
        }
    }
};

/// Thomas algorithm; `rhs` is overwritten with the solution. `scratch` must hold n values.
inline void solve_tridiagonal(const Tridiagonal& m, std::span<double> rhs, std::span<double> scratch) {
    const std::size_t n = m.size();
    if (n == 0) return;
    double beta = m.diag[0];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = m.upper[i - 1] / beta;
        beta = m.diag[i] - m.lower[i] * scratch[i];
        if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

}  // namespace gtfk::oracles
