#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../config.hpp"
#include "../errors.hpp"
#include "../models.hpp"
#include "../parallel.hpp"
#include "../pricing.hpp"

namespace gtfk::oracles {

/// Where the drift, its derivative and the rate are evaluated inside one short-time step.
///  - euler:    pre-point, e^{-lambda r(x) dt} Normal(x + mu(x) dt, sigma^2 dt)
///  - midpoint: Stratonovich mid-point action with the mu'/2 correction
enum class KernelConvention { euler, midpoint };

struct ConvolutionGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_space = 801;
};

/// Log of the one-step kernel from x_old to x_new.
inline double log_short_time_kernel(const TransformedModel& model, double lambda, double x_old, double x_new,
                                    double dt, KernelConvention conv) {
    const double s2 = model.sigma * model.sigma;
    const double dx = x_new - x_old;
    double drift = 0.0, extra = 0.0;
    if (conv == KernelConvention::euler) {
        drift = model.drift(x_old);
        extra = lambda == 0.0 ? 0.0 : lambda * model.rate_x(x_old);
    } else {
        const double m = 0.5 * (x_old + x_new);
        drift = model.drift(m);
        extra = 0.5 * model.drift_derivative(m) + (lambda == 0.0 ? 0.0 : lambda * model.rate_x(m));
    }
    const double d = dx - drift * dt;
    return -0.5 * std::log(2.0 * std::numbers::pi * s2 * dt) - d * d / (2.0 * s2 * dt) - extra * dt;
}

inline ConvolutionGrid default_convolution_grid(const TransformedModel& model, double x0, double T,
                                                const NumericsConfig& cfg = {}) {
    const Window w = terminal_window(model, x0, T, cfg, cfg.pde_window_std);
    return ConvolutionGrid{w.lo, w.hi, cfg.conv_n_space};
}

/// Repeated grid-to-grid convolution of the short-time kernel, dt = T / n_steps. The first
/// step is taken analytically from the delta at x0; later steps use trapezoid weights.
inline DensityCurve short_time_convolution(const TransformedModel& model, double lambda, double x0, double T,
                                           int n_steps, const ConvolutionGrid& grid,
                                           KernelConvention conv = KernelConvention::euler, int threads = 0) {
    if (n_steps < 1) throw InputError("short_time_convolution: n_steps must be >= 1");
    if (!(T > 0.0)) throw InputError("short_time_convolution: T must be > 0");
    if (grid.n_space < 3 || !(grid.x_min < grid.x_max)) throw InputError("short_time_convolution: invalid grid");
    const std::size_t n = static_cast<std::size_t>(grid.n_space);
    const double h = (grid.x_max - grid.x_min) / static_cast<double>(n - 1);
    const double dt = T / n_steps;
    const double kernel_sd = model.sigma * std::sqrt(dt);

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = grid.x_min + static_cast<double>(i) * h;

    DensityCurve c;
    c.lambda = lambda;
    c.T = T;
    c.y0 = model.base.lamperti_inverse(x0);
    c.method = "convolution";
    if (kernel_sd < 2.0 * h) {
        std::ostringstream os;
        os << "kernel standard deviation " << kernel_sd << " is below two grid spacings (" << 2.0 * h << ")";
        c.warnings.push_back(os.str());
    }

    std::vector<double> psi(n), next(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = std::exp(log_short_time_kernel(model, lambda, x0, x[i], dt, conv));

    if (n_steps > 1) {
        // banded kernel matrix K[i][j - lo[i]]; entries below e^{-700} are dropped
        std::vector<std::size_t> lo(n, 1), hi(n, 0);
        std::vector<std::vector<double>> K(n);
        parallel_for(n, resolve_thread_count(threads), [&](std::size_t i) {
            std::vector<double> vals(n, 0.0);
            std::size_t first = n, last = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double lk = log_short_time_kernel(model, lambda, x[j], x[i], dt, conv);
                if (!(lk > -700.0)) continue;
                vals[j] = std::exp(lk);
                first = std::min(first, j);
                last = std::max(last, j);
            }
            if (first > last) return;
            lo[i] = first;
            hi[i] = last;
            K[i].assign(vals.begin() + static_cast<std::ptrdiff_t>(first),
                        vals.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        });
        std::vector<double> wts(n, h);
        wts.front() = wts.back() = 0.5 * h;
        for (int step = 1; step < n_steps; ++step) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = lo[i]; j <= hi[i]; ++j) s += K[i][j - lo[i]] * wts[j] * psi[j];
                next[i] = s;
            }
            psi.swap(next);
        }
    }

    c.x = x;
    c.psi_x = psi;
    c.y.resize(n);
    c.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.y[i] = model.base.lamperti_inverse(x[i]);
        c.psi[i] = model.sigma * psi[i] / model.base.vol_y(c.y[i]);
    }
    return c;
}

inline BondQuote bond_from_convolution(const TransformedModel& model, double lambda, double y0, double T, int n_steps,
                                       const ConvolutionGrid& grid, KernelConvention conv = KernelConvention::euler,
                                       int threads = 0) {
    const double x0 = lamperti_transform(model, y0);
    const DensityCurve c = short_time_convolution(model, lambda, x0, T, n_steps, grid, conv, threads);
    BondQuote q;
    q.T = T;
    q.value = trapezoid(c.psi_x, c.x[1] - c.x[0]);
    q.method = "convolution";
    // first order in dt: the half-step companion gives the leading error term
    const DensityCurve half = short_time_convolution(model, lambda, x0, T, std::max(1, n_steps / 2), grid, conv, threads);
    q.err_estimate = std::abs(q.value - trapezoid(half.psi_x, half.x[1] - half.x[0]));
    q.warnings = c.warnings;
    return q;
}

}  // namespace gtfk::oracles
