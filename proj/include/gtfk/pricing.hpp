#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "self_consistent.hpp"

namespace gtfk {

/// A sampled density psi^Y_lambda(., y0, T) in the original coordinate.
struct DensityCurve {
    double lambda = 0.0;
    double T = 0.0;
    double y0 = 0.0;
    std::vector<double> y;
    std::vector<double> psi;
    std::string method;  // gtfk | pde | convolution | exact
    // Optional samples in the transformed coordinate (filled by the grid-based oracles).
    std::vector<double> x;
    std::vector<double> psi_x;
    std::vector<std::string> warnings;
};

/// Z_lambda(y0, T): a discount bond for lambda = 1, a survival probability for a default
/// intensity, the transition-density mass for lambda = 0.
struct BondQuote {
    double T = 0.0;
    double value = 0.0;
    std::string method;
    double err_estimate = 0.0;
    std::vector<std::string> warnings;
};

struct Window {
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail {

inline int scaled_order(int order, double T, const NumericsConfig& cfg) {
    return T > cfg.long_horizon ? 2 * order : order;
}

// Integrates the average-point classes for one (x0, xT) pair. Returns the log of
// Int dxbar rho_xbar(xT, x0, T).
inline double log_xbar_integral(const TransformedModel& model, double lambda, double x0, double xT, double T,
                                const NumericsConfig& cfg, int order) {
    const double mid = 0.5 * (x0 + xT);
    double alpha_max = solve_self_consistent(model, lambda, T, mid, cfg).alpha;
    // widen the window until it covers the largest fluctuation width it contains
    for (int round = 0; round < 3; ++round) {
        const double half = cfg.xbar_span * std::sqrt(alpha_max);
        const double a_lo = solve_self_consistent(model, lambda, T, mid - half, cfg).alpha;
        const double a_hi = solve_self_consistent(model, lambda, T, mid + half, cfg).alpha;
        const double next = std::max({alpha_max, a_lo, a_hi});
        if (next <= alpha_max * 1.0000001) break;
        alpha_max = next;
    }

    double half = cfg.xbar_span * std::sqrt(alpha_max);
    const auto& rule = gauss_legendre(order);
    std::vector<double> logs(rule.size());
    for (int attempt = 0; attempt < 8; ++attempt) {
        const double lo = mid - half, hi = mid + half;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double xbar = 0.5 * (lo + hi) + half * rule.nodes[i];
            const GtfkPoint p = solve_self_consistent(model, lambda, T, xbar, cfg);
            logs[i] = log_reduced_density(p, x0, xT);
        }
        const double peak = *std::max_element(logs.begin(), logs.end());
        // the rule has no node on the boundary; probe it directly
        const double log_lo = log_reduced_density(solve_self_consistent(model, lambda, T, lo, cfg), x0, xT);
        const double log_hi = log_reduced_density(solve_self_consistent(model, lambda, T, hi, cfg), x0, xT);
        const double cut = peak + std::log(1e-12);
        if ((log_lo <= cut && log_hi <= cut) || attempt == 7) {
            if (!std::isfinite(peak)) return -std::numeric_limits<double>::infinity();
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::exp(logs[i] - peak);
            return peak + std::log(half * sum);
        }
        half *= 1.5;
    }
    return -std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// GTFK Arrow-Debreu density in the transformed coordinate,
/// psi = e^{-W(xT, x0)} Int dxbar rho_xbar(xT, x0, T).
inline double ad_density(const TransformedModel& model, double lambda, double x0, double xT, double T,
                         const NumericsConfig& cfg = {}) {
    if (!(T > 0.0)) throw InputError("ad_density: T must be > 0");
    const int order = detail::scaled_order(cfg.xbar_order, T, cfg);
    const double log_rho = detail::log_xbar_integral(model, lambda, x0, xT, T, cfg, order);
    return std::exp(log_rho - model.drift_primitive(x0, xT));
}

/// Same density in the original coordinate: psi^Y = sigma psi(gamma(yT), gamma(y0)) / sigma_y(yT).
inline double ad_density_y(const TransformedModel& model, double lambda, double y0, double yT, double T,
                           const NumericsConfig& cfg = {}) {
    const double x0 = lamperti_transform(model, y0);
    const double xT = lamperti_transform(model, yT);
    return model.sigma * ad_density(model, lambda, x0, xT, T, cfg) / model.base.vol_y(yT);
}

/// Terminal window in x covering the effective support of the lambda = 0 density:
/// the deterministic drift path widened by tail_factor times an OU-style spread.
inline Window terminal_window(const TransformedModel& model, double x0, double T, const NumericsConfig& cfg = {},
                              double n_std = 0.0) {
    if (n_std <= 0.0) n_std = cfg.tail_factor;
    // RK4 on dx/dt = mu(x)
    const int steps = 400;
    const double h = T / steps;
    double x = x0;
    double x_min = x0, x_max = x0;
    for (int i = 0; i < steps; ++i) {
        const double k1 = model.drift(x);
        const double k2 = model.drift(x + 0.5 * h * k1);
        const double k3 = model.drift(x + 0.5 * h * k2);
        const double k4 = model.drift(x + h * k3);
        x += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
        if (!std::isfinite(x)) break;
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
    }
    const double kappa = std::max(0.0, std::min(local_reversion(model, x0), local_reversion(model, x_max)));
    const double s2 = model.sigma * model.sigma;
    const double var = kappa * T > 1e-8 ? s2 * (1.0 - std::exp(-2.0 * kappa * T)) / (2.0 * kappa) : s2 * T;
    const double spread = std::sqrt(var);
    Window w{x_min - n_std * spread, x_max + n_std * spread};
    // keep strictly inside the transformed domain
    if (std::isfinite(model.x_domain.lo)) w.lo = std::max(w.lo, model.x_domain.lo + 1e-12 * (1 + std::abs(w.lo)));
    if (std::isfinite(model.x_domain.hi)) w.hi = std::min(w.hi, model.x_domain.hi - 1e-12 * (1 + std::abs(w.hi)));
    return w;
}

namespace detail {

// Int dxT g(xT) psi(xT) over the terminal window with an outer Gauss-Legendre rule.
// Also returns the integral restricted to the outer tenth of the window on either side.
struct OuterResult {
    double value = 0.0;
    double edge_mass = 0.0;
};

inline OuterResult outer_integral(const TransformedModel& model, double lambda, double x0, double T,
                                  const NumericsConfig& cfg, int outer_order, int inner_order,
                                  const std::function<double(double)>& weight) {
    const Window win = terminal_window(model, x0, T, cfg);
    const auto& rule = gauss_legendre(outer_order);
    const double half = 0.5 * (win.hi - win.lo);
    const double mid = 0.5 * (win.hi + win.lo);
    std::vector<double> vals(rule.size());
    parallel_for(rule.size(), resolve_thread_count(cfg.threads), [&](std::size_t i) {
        const double xT = mid + half * rule.nodes[i];
        const double g = weight ? weight(xT) : 1.0;
        if (g == 0.0) {
            vals[i] = 0.0;
            return;
        }
        const double log_rho = log_xbar_integral(model, lambda, x0, xT, T, cfg, inner_order);
        vals[i] = g * std::exp(log_rho - model.drift_primitive(x0, xT));
    });
    OuterResult out;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double c = half * rule.weights[i] * vals[i];
        out.value += c;
        if (std::abs(rule.nodes[i]) > 0.8) out.edge_mass += std::abs(c);
    }
    return out;
}

inline NumericsConfig doubled_orders(NumericsConfig cfg) {
    cfg.xbar_order *= 2;
    cfg.xt_order *= 2;
    return cfg;
}

}  // namespace detail

/// Z_lambda = Int dxT psi_lambda(xT, x0, T): nested Gauss-Legendre (outer xT, inner xbar).
/// The reported value uses doubled orders; err_estimate is the change from the base orders.
inline BondQuote zero_coupon_bond(const TransformedModel& model, double lambda, double y0, double T,
                                  const NumericsConfig& cfg = {}) {
    if (!(T > 0.0)) throw InputError("zero_coupon_bond: T must be > 0");
    const double x0 = lamperti_transform(model, y0);
    const NumericsConfig fine = detail::doubled_orders(cfg);
    const auto coarse = detail::outer_integral(model, lambda, x0, T, cfg, detail::scaled_order(cfg.xt_order, T, cfg),
                                               detail::scaled_order(cfg.xbar_order, T, cfg), {});
    const auto refined = detail::outer_integral(model, lambda, x0, T, fine, detail::scaled_order(fine.xt_order, T, fine),
                                                detail::scaled_order(fine.xbar_order, T, fine), {});
    BondQuote q;
    q.T = T;
    q.value = refined.value;
    q.method = "gtfk";
    q.err_estimate = std::max(std::abs(refined.value - coarse.value), 1e-13 * std::max(1.0, std::abs(q.value)));
    return q;
}

/// European claim V = Int dyT psi^Y_lambda(yT, y0, T) P(yT), computed in the transformed
/// coordinate (dy psi^Y = dx psi). Warns when the outer tenth of the window carries more
/// than 1e-6 of the value.
struct OptionQuote {
    double T = 0.0;
    double value = 0.0;
    double err_estimate = 0.0;
    std::string method;
    std::vector<std::string> warnings;
};

inline OptionQuote price_european(const TransformedModel& model, const std::function<double(double)>& payout,
                                  double lambda, double y0, double T, const NumericsConfig& cfg = {}) {
    if (!(T > 0.0)) throw InputError("price_european: T must be > 0");
    const double x0 = lamperti_transform(model, y0);
    auto weight = [&](double xT) { return payout(lamperti_inverse(model, xT)); };
    const NumericsConfig fine = detail::doubled_orders(cfg);
    const auto coarse = detail::outer_integral(model, lambda, x0, T, cfg, detail::scaled_order(cfg.xt_order, T, cfg),
                                               detail::scaled_order(cfg.xbar_order, T, cfg), weight);
    const auto refined = detail::outer_integral(model, lambda, x0, T, fine, detail::scaled_order(fine.xt_order, T, fine),
                                                detail::scaled_order(fine.xbar_order, T, fine), weight);
    OptionQuote q;
    q.T = T;
    q.value = refined.value;
    q.err_estimate = std::max(std::abs(refined.value - coarse.value), 1e-13 * std::max(1.0, std::abs(q.value)));
    q.method = "gtfk";
    if (refined.edge_mass > 1e-6 * std::abs(refined.value)) {
        std::ostringstream os;
        os << "payout mass near the window edges is " << refined.edge_mass << " (value " << refined.value << ")";
        q.warnings.push_back(os.str());
    }
    return q;
}

/// Uniform grid in x over the terminal window, mapped to y.
inline std::vector<double> default_y_grid(const TransformedModel& model, double y0, double T, int n,
                                          const NumericsConfig& cfg = {}) {
    const Window w = terminal_window(model, lamperti_transform(model, y0), T, cfg, 0.6 * cfg.tail_factor);
    std::vector<double> ys(n);
    for (int i = 0; i < n; ++i) {
        const double x = w.lo + (w.hi - w.lo) * (i + 0.5) / n;
        ys[i] = model.base.lamperti_inverse(x);
    }
    return ys;
}

inline DensityCurve gtfk_density_curve(const TransformedModel& model, double lambda, double y0, double T,
                                       const std::vector<double>& ys, const NumericsConfig& cfg = {}) {
    DensityCurve c;
    c.lambda = lambda;
    c.T = T;
    c.y0 = y0;
    c.method = "gtfk";
    c.y = ys;
    c.psi.resize(ys.size());
    parallel_for(ys.size(), resolve_thread_count(cfg.threads),
                 [&](std::size_t i) { c.psi[i] = ad_density_y(model, lambda, y0, ys[i], T, cfg); });
    return c;
}

// ---------------------------------------------------------------------------
// Vasicek closed forms
// ---------------------------------------------------------------------------

/// Exact generalized Arrow-Debreu density of dX = a(b - X)dt + sigma dW weighted by
/// e^{-lambda Int X dt}: a displaced Gaussian with variance sigma^2 (1 - e^{-2aT}) / 2a.
inline double vasicek_exact_density(const ModelParams& p, double lambda, double x0, double xT, double T) {
    if (!(p.a > 0.0)) throw InputError("vasicek_exact_density: a must be > 0");
    const double a = p.a, b = p.b, s2 = p.sigma * p.sigma;
    const double var = s2 * (1.0 - std::exp(-2.0 * a * T)) / (2.0 * a);
    const double shift = lambda * s2 / (a * a);
    const double d = (xT - b + shift) - (x0 - b + shift) * std::exp(-a * T);
    const double log_pref = lambda * (xT - x0) / a - T * (lambda * b - lambda * lambda * s2 / (2.0 * a * a));
    return std::exp(log_pref - d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Affine Vasicek discount factor E[exp(-lambda Int X dt)].
inline double vasicek_exact_bond(const ModelParams& p, double lambda, double x0, double T) {
    // lambda scales the rate: lambda X is Vasicek with level lambda b and volatility lambda sigma
    const double a = p.a, b = lambda * p.b, s = lambda * p.sigma, r0 = lambda * x0;
    const double B = (1.0 - std::exp(-a * T)) / a;
    const double A = (b - s * s / (2.0 * a * a)) * (B - T) - s * s * B * B / (4.0 * a);
    return std::exp(A - B * r0);
}

inline DensityCurve vasicek_exact_curve(const TransformedModel& model, double lambda, double y0, double T,
                                        const std::vector<double>& ys) {
    if (model.base.kind != ModelKind::vasicek) throw InputError("exact densities are only available for vasicek");
    DensityCurve c;
    c.lambda = lambda;
    c.T = T;
    c.y0 = y0;
    c.method = "exact";
    c.y = ys;
    for (double y : ys) c.psi.push_back(vasicek_exact_density(model.base.params, lambda, y0, y, T));
    return c;
}

/// Resamples a grid curve (x, psi_x filled) at the given y points: linear interpolation
/// in x, then the Jacobian back to y. Points outside the grid get zero.
inline DensityCurve resample_curve(const TransformedModel& model, const DensityCurve& grid,
                                   const std::vector<double>& ys) {
    if (grid.x.size() < 2 || grid.x.size() != grid.psi_x.size())
        throw InputError("resample_curve: curve has no transformed-coordinate samples");
    DensityCurve c = grid;
    c.x.clear();
    c.psi_x.clear();
    c.y = ys;
    c.psi.assign(ys.size(), 0.0);
    const double h = grid.x[1] - grid.x[0];
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double x = lamperti_transform(model, ys[i]);
        const double u = (x - grid.x.front()) / h;
        if (u < 0.0 || u > static_cast<double>(grid.x.size() - 1)) continue;
        const std::size_t k = std::min(static_cast<std::size_t>(u), grid.x.size() - 2);
        const double t = u - static_cast<double>(k);
        const double px = (1.0 - t) * grid.psi_x[k] + t * grid.psi_x[k + 1];
        c.psi[i] = model.sigma * px / model.base.vol_y(ys[i]);
    }
    return c;
}

}  // namespace gtfk
