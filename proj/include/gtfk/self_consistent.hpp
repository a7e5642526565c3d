#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "quadrature.hpp"

namespace gtfk {

/// Converged harmonic trial parameters at one average point.
///
/// On the real branch (omega2 >= 0) `half_angle` is f = omega T / 2; on the imaginary
/// branch it is phi = |omega| T / 2 and `imaginary` is set.
struct GtfkPoint {
    double xbar = 0.0;
    double omega2 = 0.0;
    double alpha = 0.0;
    double w = 0.0;
    double half_angle = 0.0;
    bool imaginary = false;
    double T = 0.0;
    double sigma = 0.0;

    int iterations = 0;
    double residual_omega2 = 0.0;  // |sigma^2 <<V''>>_alpha - omega2|
    double residual_alpha = 0.0;   // relative |alpha(omega2) - alpha|
    bool used_bisection = false;
};

// ---------------------------------------------------------------------------
// Gaussian smearing  <<F(xbar + xi)>> = (2 pi alpha)^{-1/2} Int dxi e^{-xi^2/2alpha} F(xbar + xi)
// ---------------------------------------------------------------------------

/// Fixed-order Gauss-Hermite smear.
template <class F>
double gaussian_smear_fixed(F&& f, double xbar, double alpha, int order) {
    if (alpha == 0.0) return f(xbar);
    const auto& rule = gauss_hermite(order);
    const double scale = std::sqrt(2.0 * alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(xbar + scale * rule.nodes[i]);
    return sum / std::sqrt(std::numbers::pi);
}

/// Gauss-Hermite smear starting at cfg.gh_order and doubling until successive values
/// differ by less than cfg.smear_tol (relative to max(1, |value|)).
template <class F>
double gaussian_smear(F&& f, double xbar, double alpha, const NumericsConfig& cfg = {}) {
    if (alpha < 0.0 || !std::isfinite(alpha)) throw InputError("gaussian_smear: alpha must be finite and >= 0");
    if (alpha == 0.0) return f(xbar);
    int order = cfg.gh_order;
    double prev = gaussian_smear_fixed(f, xbar, alpha, order);
    if (!std::isfinite(prev)) throw EvaluationError("gaussian_smear: non-finite value");
    while (order < cfg.gh_max_order) {
        order *= 2;
        const double cur = gaussian_smear_fixed(f, xbar, alpha, order);
        if (!std::isfinite(cur)) throw EvaluationError("gaussian_smear: non-finite value");
        if (std::abs(cur - prev) <= cfg.smear_tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

/// <<V>> and <<V''>> for the model: closed form when available, Gauss-Hermite otherwise.
inline SmearedPotential smeared_potential(const TransformedModel& model, double xbar, double alpha, double lambda,
                                          const NumericsConfig& cfg = {}) {
    if (model.closed_form_smears) {
        if (alpha == 0.0) return {model.potential(xbar, lambda), model.potential_second(xbar, lambda)};
        const auto s = model.closed_form_smears(xbar, alpha, lambda);
        if (!std::isfinite(s.value) || !std::isfinite(s.second))
            throw EvaluationError("smeared potential is not finite");
        return s;
    }
    return {gaussian_smear([&](double x) { return model.potential(x, lambda); }, xbar, alpha, cfg),
            gaussian_smear([&](double x) { return model.potential_second(x, lambda); }, xbar, alpha, cfg)};
}

// ---------------------------------------------------------------------------
// alpha(omega^2)
// ---------------------------------------------------------------------------

namespace detail {

// (coth f - 1/f) / f as a function of f^2, valid on both branches for |f^2| small.
inline double coth_series_over_f(double f2) {
    return 1.0 / 3.0 - f2 / 45.0 + 2.0 * f2 * f2 / 945.0;
}

// Same function by Lambert's continued fraction 1/(3 + f^2/(5 + f^2/(7 + ...))), accurate to
// rounding for |f^2| <= 1 where the direct formula loses digits to cancellation.
inline double coth_fraction_over_f(double f2) {
    double t = 41.0;
    for (int k = 19; k >= 1; --k) t = (2.0 * k + 1.0) + f2 / t;
    return 1.0 / t;
}

constexpr double kSeriesSwitch = 1e-3;

}  // namespace detail

/// Fluctuation variance of the harmonic trial action,
/// alpha = (sigma^2 / 2 omega)(coth f - 1/f), f = omega T / 2, continued to omega^2 < 0 as
/// alpha = (sigma^2 T / 4)(1/phi^2 - cot(phi)/phi), phi = |omega| T / 2.
/// Throws BranchBreakdown once phi >= pi - branch_eps.
inline double alpha_of_omega(double omega2, double T, double sigma,
                             double branch_eps = 1e-6 * std::numbers::pi) {
    if (!(T > 0.0)) throw InputError("alpha_of_omega: T must be > 0");
    if (!std::isfinite(omega2)) throw EvaluationError("alpha_of_omega: omega^2 is not finite");
    const double s2 = sigma * sigma;
    const double f2 = 0.25 * omega2 * T * T;  // signed: -phi^2 on the imaginary branch
    if (std::abs(f2) < detail::kSeriesSwitch * detail::kSeriesSwitch) {
        // sigma^2/(2 omega) * f * series = sigma^2 T / 4 * series
        return 0.25 * s2 * T * detail::coth_series_over_f(f2);
    }
    if (std::abs(f2) <= 1.0) return 0.25 * s2 * T * detail::coth_fraction_over_f(f2);
    if (omega2 > 0.0) {
        const double omega = std::sqrt(omega2);
        const double f = 0.5 * omega * T;
        // coth f - 1/f, written to stay finite for large f
        const double coth = 1.0 / std::tanh(f);
        return s2 / (2.0 * omega) * (coth - 1.0 / f);
    }
    const double phi = 0.5 * std::sqrt(-omega2) * T;
    if (phi >= std::numbers::pi - branch_eps) throw BranchBreakdown(phi);
    return 0.25 * s2 * T * (1.0 / (phi * phi) - 1.0 / (std::tan(phi) * phi));
}

// ---------------------------------------------------------------------------
// Self-consistent solve
// ---------------------------------------------------------------------------

namespace detail {

inline double omega2_at(const TransformedModel& model, double xbar, double alpha, double lambda,
                        const NumericsConfig& cfg) {
    return model.sigma * model.sigma * smeared_potential(model, xbar, alpha, lambda, cfg).second;
}

// omega2 is the frequency alpha was computed from, so alpha = alpha_of_omega(omega2) holds
// exactly and the reported residual measures |sigma^2 <<V''>>_alpha - omega2|.
inline GtfkPoint finish_point(const TransformedModel& model, double xbar, double omega2, double lambda, double T,
                              const NumericsConfig& cfg, int iterations, bool bisection) {
    const double s2 = model.sigma * model.sigma;
    GtfkPoint p;
    p.xbar = xbar;
    p.T = T;
    p.sigma = model.sigma;
    p.omega2 = omega2;
    p.alpha = alpha_of_omega(omega2, T, model.sigma, cfg.branch_eps);
    const auto sm = smeared_potential(model, xbar, p.alpha, lambda, cfg);
    p.w = sm.value - omega2 * p.alpha / (2.0 * s2);
    p.imaginary = omega2 < 0.0;
    p.half_angle = 0.5 * std::sqrt(std::abs(omega2)) * T;
    p.iterations = iterations;
    p.residual_omega2 = std::abs(s2 * sm.second - omega2);
    const double alpha_next = alpha_of_omega(s2 * sm.second, T, model.sigma, cfg.branch_eps);
    p.residual_alpha = std::abs(alpha_next - p.alpha) / p.alpha;
    p.used_bisection = bisection;
    return p;
}

// Root of h(omega2) = omega2 - sigma^2 <<V''>>_{alpha(omega2)} by bisection over the
// admissible range of omega2 (above the branch edge).
inline std::optional<double> bisect_omega2(const TransformedModel& model, double xbar, double lambda, double T,
                                           const NumericsConfig& cfg) {
    const double s2 = model.sigma * model.sigma;
    const double phi_max = std::numbers::pi - 2.0 * cfg.branch_eps;
    const double lo_edge = -std::pow(2.0 * phi_max / T, 2);
    auto h = [&](double om2) -> double {
        const double alpha = alpha_of_omega(om2, T, model.sigma, cfg.branch_eps);
        return om2 - s2 * smeared_potential(model, xbar, alpha, lambda, cfg).second;
    };
    double lo = lo_edge;
    double hlo = 0.0;
    try {
        hlo = h(lo);
    } catch (const EvaluationError&) {
        return std::nullopt;
    }
    if (!(hlo < 0.0)) return std::nullopt;
    // find an upper bracket
    double hi = std::max(1.0, std::abs(s2 * smeared_potential(model, xbar, 0.0, lambda, cfg).second)) + 1.0 / (T * T);
    double hhi = 0.0;
    for (int k = 0; k < 200; ++k) {
        try {
            hhi = h(hi);
        } catch (const EvaluationError&) {
            return std::nullopt;
        }
        if (hhi > 0.0) break;
        hi *= 4.0;
    }
    if (!(hhi > 0.0)) return std::nullopt;
    for (int k = 0; k < 300; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if (hm < 0.0) lo = mid; else hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Solves omega^2 = sigma^2 <<V''>>_alpha, alpha = alpha_of_omega(omega^2), and sets
/// w = <<V>> - omega^2 alpha / (2 sigma^2) at the average point xbar.
///
/// Damped fixed-point iteration on alpha starting from sigma^2 T / 12; the damping is halved
/// whenever the update changes sign. Falls back to bisection on omega^2.
inline GtfkPoint solve_self_consistent(const TransformedModel& model, double lambda, double T, double xbar,
                                      const NumericsConfig& cfg = {}) {
    if (!(T > 0.0)) throw InputError("solve_self_consistent: T must be > 0");
    const double alpha0 = model.sigma * model.sigma * T / 12.0;

    double alpha = alpha0;
    double eta = cfg.sc_damping;
    double prev_step = 0.0;
    bool breakdown = false;
    BranchBreakdown last_breakdown(0.0);
    try {
        for (int it = 1; it <= cfg.sc_max_iters; ++it) {
            const double om2 = detail::omega2_at(model, xbar, alpha, lambda, cfg);
            const double target = alpha_of_omega(om2, T, model.sigma, cfg.branch_eps);
            const double step = target - alpha;
            if (std::abs(step) <= cfg.sc_tol * std::max(alpha, 1e-300)) {
                const double om2_final = detail::omega2_at(model, xbar, target, lambda, cfg);
                return detail::finish_point(model, xbar, om2_final, lambda, T, cfg, it, false);
            }
            if (it > 1 && step * prev_step < 0.0) eta *= 0.5;
            // full first step: exact for potentials whose curvature does not depend on alpha
            const double damping = it == 1 ? 1.0 : eta;
            alpha += damping * step;
            prev_step = step;
            if (!(alpha > 0.0) || !std::isfinite(alpha)) break;
            if (eta < 1e-8) break;
        }
    } catch (const BranchBreakdown& e) {
        breakdown = true;
        last_breakdown = e;
    }

    std::optional<double> om2;
    try {
        om2 = detail::bisect_omega2(model, xbar, lambda, T, cfg);
    } catch (const BranchBreakdown& e) {
        breakdown = true;
        last_breakdown = e;
    }
    if (om2) {
        // polish with undamped steps from the bracketed root
        double om2_b = *om2;
        for (int k = 0; k < 5; ++k) {
            const double next =
                detail::omega2_at(model, xbar, alpha_of_omega(om2_b, T, model.sigma, cfg.branch_eps), lambda, cfg);
            const bool done = std::abs(next - om2_b) <= cfg.sc_tol * std::max(1.0, std::abs(om2_b));
            om2_b = next;
            if (done) break;
        }
        return detail::finish_point(model, xbar, om2_b, lambda, T, cfg, cfg.sc_max_iters, true);
    }
    if (breakdown) throw last_breakdown.at(xbar);
    // No admissible root: every candidate omega^2 is pushed past the branch edge.
    std::ostringstream os;
    os.precision(10);
    os << "self-consistent solve did not converge at xbar = " << xbar << " after " << cfg.sc_max_iters
       << " iterations";
    throw ConvergenceError(os.str(), xbar, cfg.sc_max_iters);
}

// ---------------------------------------------------------------------------
// Trial reduced density
// ---------------------------------------------------------------------------

namespace detail {

// log(f / sinh f) for f >= 0
inline double log_f_over_sinh(double f) {
    if (f < 1e-4) return -f * f / 6.0;
    if (f > 30.0) return std::log(2.0 * f) - f;
    return std::log(f / std::sinh(f));
}

}  // namespace detail

/// Logarithm of the trial reduced density of the average-point class xbar.
inline double log_reduced_density(const GtfkPoint& p, double x0, double xT) {
    const double s2 = p.sigma * p.sigma;
    const double T = p.T;
    const double xi = 0.5 * (xT + x0) - p.xbar;
    const double dx = xT - x0;
    double log_ratio = 0.0;    // log(f / sinh f)
    double omega_coth = 0.0;   // omega coth f
    const double f2 = 0.25 * p.omega2 * T * T;
    if (std::abs(f2) < 1e-10) {
        log_ratio = -f2 / 6.0;
        omega_coth = (2.0 / T) * (1.0 + f2 / 3.0);
    } else if (!p.imaginary) {
        const double f = p.half_angle;
        log_ratio = detail::log_f_over_sinh(f);
        omega_coth = (2.0 * f / T) / std::tanh(f);
    } else {
        const double phi = p.half_angle;
        if (phi >= std::numbers::pi) throw BranchBreakdown(phi, p.xbar);
        log_ratio = std::log(phi / std::sin(phi));
        omega_coth = (2.0 * phi / T) / std::tan(phi);
    }
    return -0.5 * std::log(2.0 * std::numbers::pi * s2 * T) - T * p.w + log_ratio -
           0.5 * std::log(2.0 * std::numbers::pi * p.alpha) - xi * xi / (2.0 * p.alpha) -
           omega_coth / (4.0 * s2) * dx * dx;
}

/// Trial reduced density contributed by paths with average point p.xbar.
inline double reduced_density(const GtfkPoint& p, double x0, double xT) {
    return std::exp(log_reduced_density(p, x0, xT));
}

/// One row of a self-consistency scan; rows past the branch edge carry the error text.
struct ScanRow {
    double xbar = 0.0;
    bool ok = false;
    GtfkPoint point;
    double rho_diag = 0.0;  // reduced density of the class at x0 = xT = xbar
    std::string error;
};

/// Solves the self-consistent conditions on n equally spaced average points in [lo, hi].
/// Branch breakdowns and non-convergence are recorded per row instead of thrown.
inline std::vector<ScanRow> scan_self_consistent(const TransformedModel& model, double lambda, double T, double lo,
                                                 double hi, int n, const NumericsConfig& cfg = {}) {
    if (n < 2 || !(lo < hi)) throw InputError("scan_self_consistent: need n >= 2 and lo < hi");
    std::vector<ScanRow> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ScanRow& r = rows[static_cast<std::size_t>(i)];
        r.xbar = lo + (hi - lo) * i / (n - 1);
        try {
            r.point = solve_self_consistent(model, lambda, T, r.xbar, cfg);
            r.rho_diag = reduced_density(r.point, r.xbar, r.xbar);
            r.ok = true;
        } catch (const NumericalError& e) {
            r.error = e.what();
        }
    }
    return rows;
}

}  // namespace gtfk
