#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace gtfk {

enum class ModelKind { vasicek, quadratic, black_karasinski, garch, custom };

inline std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::vasicek: return "vasicek";
        case ModelKind::quadratic: return "quadratic";
        case ModelKind::black_karasinski: return "bk";
        case ModelKind::garch: return "garch";
        case ModelKind::custom: return "custom";
    }
    return "custom";
}

inline ModelKind parse_model_kind(const std::string& name) {
    if (name == "vasicek") return ModelKind::vasicek;
    if (name == "quadratic") return ModelKind::quadratic;
    if (name == "bk" || name == "black_karasinski") return ModelKind::black_karasinski;
    if (name == "garch") return ModelKind::garch;
    throw InputError("unknown model '" + name + "' (expected vasicek|quadratic|bk|garch)");
}

/// Open interval (lo, hi); infinite ends allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double v) const noexcept { return v > lo && v < hi; }
};

/// a: mean-reversion speed, b: mean-reversion level (log-level for BK), sigma: volatility
/// of the constant-volatility process; beta/gamma are the quadratic rate-map coefficients.
struct ModelParams {
    double a = 0.0;
    double b = 0.0;
    double sigma = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// dY = mu_y(Y) dt + sigma_y(Y) dW with short rate r(Y), in the original coordinate.
struct ShortRateModel {
    std::string name;
    ModelKind kind = ModelKind::custom;
    ModelParams params;
    Interval y_domain;
    double base_point = 0.0;  // y at which the Lamperti map vanishes

    std::function<double(double)> drift_y;
    std::function<double(double)> vol_y;
    std::function<double(double)> vol_y_derivative;
    std::function<double(double)> rate_map;
    std::function<double(double)> lamperti;          // y -> x
    std::function<double(double)> lamperti_inverse;  // x -> y
};

/// Gaussian averages of V and V'' at fixed (xbar, alpha).
struct SmearedPotential {
    double value = 0.0;
    double second = 0.0;
};

/// The unit-volatility-scaled process dX = mu(X) dt + sigma dW obtained by the Lamperti map,
/// together with everything the path-integral machinery needs.
struct TransformedModel {
    ShortRateModel base;
    Interval x_domain;
    double sigma = 0.0;

    std::function<double(double)> drift;
    std::function<double(double)> drift_derivative;
    std::function<double(double)> rate_x;                     // r(gamma^{-1}(x))
    std::function<double(double, double)> potential;         // (x, lambda) -> V
    std::function<double(double, double)> potential_second;  // (x, lambda) -> V''
    std::function<double(double, double)> drift_primitive;   // (x0, xT) -> W(xT, x0)
    // Optional; when empty the Gauss-Hermite smear is used.
    std::function<SmearedPotential(double, double, double)> closed_form_smears;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline double lamperti_transform(const ShortRateModel& model, double y) {
    if (!model.y_domain.contains(y)) {
        std::ostringstream os;
        os << model.name << ": y = " << y << " outside the model domain (" << model.y_domain.lo << ", "
           << model.y_domain.hi << ")";
        throw DomainError(os.str());
    }
    return model.lamperti(y);
}

inline double lamperti_transform(const TransformedModel& model, double y) { return lamperti_transform(model.base, y); }

inline double lamperti_inverse(const TransformedModel& model, double x) {
    if (!model.x_domain.contains(x)) {
        std::ostringstream os;
        os << model.base.name << ": x = " << x << " outside the transformed domain";
        throw DomainError(os.str());
    }
    return model.base.lamperti_inverse(x);
}

inline double transformed_drift(const TransformedModel& model, double x) { return model.drift(x); }

inline double drift_potential(const TransformedModel& model, double x, double lambda) {
    return model.potential(x, lambda);
}

inline double drift_primitive(const TransformedModel& model, double x0, double xT) {
    return model.drift_primitive(x0, xT);
}

/// V(x) = mu^2/(2 sigma^2) + mu'/2 + lambda r assembled from the drift alone; the reference
/// the closed-form potentials are checked against.
inline double generic_potential(const TransformedModel& model, double x, double lambda) {
    const double mu = model.drift(x);
    const double s2 = model.sigma * model.sigma;
    return mu * mu / (2.0 * s2) + 0.5 * model.drift_derivative(x) + lambda * model.rate_x(x);
}

/// Transformed drift recomputed from the y-space specification:
/// sigma [mu_y / sigma_y - sigma_y' / 2] evaluated at y = gamma^{-1}(x).
inline double drift_from_y(const TransformedModel& model, double x) {
    const double y = model.base.lamperti_inverse(x);
    return model.sigma * (model.base.drift_y(y) / model.base.vol_y(y) - 0.5 * model.base.vol_y_derivative(y));
}

// ---------------------------------------------------------------------------
// Built-in models
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_common(const ModelParams& p, const char* who) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw InputError(std::string(who) + ": sigma must be > 0");
    if (!(p.a > 0.0) || !std::isfinite(p.a)) throw InputError(std::string(who) + ": a must be > 0");
    if (!std::isfinite(p.b)) throw InputError(std::string(who) + ": b must be finite");
}

// Ornstein-Uhlenbeck skeleton shared by Vasicek, quadratic and BK: mu(x) = a (b - x).
inline TransformedModel ou_skeleton(const ModelParams& p) {
    TransformedModel m;
    m.sigma = p.sigma;
    m.drift = [a = p.a, b = p.b](double x) { return a * (b - x); };
    m.drift_derivative = [a = p.a](double) { return -a; };
    m.drift_primitive = [a = p.a, b = p.b, s2 = p.sigma * p.sigma](double x0, double xT) {
        // -(1/s2) [a b x - a x^2 / 2] from x0 to xT
        return -(a / s2) * ((xT - x0) * (b - 0.5 * (xT + x0)));
    };
    return m;
}

}  // namespace detail

/// dX = a (b - X) dt + sigma dW, r = X.
inline TransformedModel vasicek(double a, double b, double sigma) {
    const ModelParams p{a, b, sigma, 0.0, 0.0};
    detail::validate_common(p, "vasicek");
    TransformedModel m = detail::ou_skeleton(p);
    m.base.name = "vasicek";
    m.base.kind = ModelKind::vasicek;
    m.base.params = p;
    m.base.base_point = 0.0;
    m.base.drift_y = [a, b](double y) { return a * (b - y); };
    m.base.vol_y = [sigma](double) { return sigma; };
    m.base.vol_y_derivative = [](double) { return 0.0; };
    m.base.rate_map = [](double y) { return y; };
    m.base.lamperti = [](double y) { return y; };
    m.base.lamperti_inverse = [](double x) { return x; };
    m.rate_x = [](double x) { return x; };
    const double k = a * a / (2.0 * sigma * sigma);
    m.potential = [k, a, b](double x, double lambda) { return k * (b - x) * (b - x) - 0.5 * a + lambda * x; };
    m.potential_second = [k](double, double) { return 2.0 * k; };
    m.closed_form_smears = [k, a, b](double xbar, double alpha, double lambda) {
        const double v = k * ((b - xbar) * (b - xbar) + alpha) - 0.5 * a + lambda * xbar;
        return SmearedPotential{v, 2.0 * k};
    };
    return m;
}

struct PositivityReport {
    bool stated_condition = false;      // beta > 0 and gamma^2 < 4 beta
    bool discriminant_condition = false;  // gamma > 0 and beta^2 < 4 gamma
    std::vector<std::string> warnings;
};

/// Both candidate positivity conditions for r = 1 + beta x + gamma x^2. Neither blocks
/// evaluation; failures are reported as warnings.
inline PositivityReport quadratic_positivity(double beta, double gamma) {
    PositivityReport rep;
    rep.stated_condition = beta > 0.0 && gamma * gamma < 4.0 * beta;
    rep.discriminant_condition = gamma > 0.0 && beta * beta < 4.0 * gamma;
    if (!rep.stated_condition)
        rep.warnings.emplace_back("quadratic model: condition beta > 0, gamma^2 < 4 beta not satisfied");
    if (!rep.discriminant_condition)
        rep.warnings.emplace_back(
            "quadratic model: 1 + beta x + gamma x^2 is not positive definite (needs gamma > 0, beta^2 < 4 gamma)");
    return rep;
}

/// OU state with rate r = 1 + beta X + gamma X^2.
inline TransformedModel quadratic(double a, double b, double sigma, double beta, double gamma) {
    const ModelParams p{a, b, sigma, beta, gamma};
    detail::validate_common(p, "quadratic");
    if (!std::isfinite(beta) || !std::isfinite(gamma)) throw InputError("quadratic: beta and gamma must be finite");
    TransformedModel m = detail::ou_skeleton(p);
    m.base.name = "quadratic";
    m.base.kind = ModelKind::quadratic;
    m.base.params = p;
    m.base.base_point = 0.0;
    m.base.drift_y = [a, b](double y) { return a * (b - y); };
    m.base.vol_y = [sigma](double) { return sigma; };
    m.base.vol_y_derivative = [](double) { return 0.0; };
    auto rate = [beta, gamma](double y) { return 1.0 + beta * y + gamma * y * y; };
    m.base.rate_map = rate;
    m.base.lamperti = [](double y) { return y; };
    m.base.lamperti_inverse = [](double x) { return x; };
    m.rate_x = rate;
    const double k = a * a / (2.0 * sigma * sigma);
    m.potential = [k, a, b, rate](double x, double lambda) {
        return k * (b - x) * (b - x) - 0.5 * a + lambda * rate(x);
    };
    m.potential_second = [k, gamma](double, double lambda) { return 2.0 * k + 2.0 * lambda * gamma; };
    m.closed_form_smears = [k, a, b, gamma, rate](double xbar, double alpha, double lambda) {
        const double v = k * ((b - xbar) * (b - xbar) + alpha) - 0.5 * a + lambda * (rate(xbar) + gamma * alpha);
        return SmearedPotential{v, 2.0 * k + 2.0 * lambda * gamma};
    };
    return m;
}

/// Black-Karasinski: the state is the short rate r > 0 with d ln r = a (b - ln r) dt + sigma dW,
/// so X = ln r is OU and r(X) = e^X. b is the log-level.
inline TransformedModel black_karasinski(double a, double b, double sigma) {
    const ModelParams p{a, b, sigma, 0.0, 0.0};
    detail::validate_common(p, "bk");
    TransformedModel m = detail::ou_skeleton(p);
    m.base.name = "bk";
    m.base.kind = ModelKind::black_karasinski;
    m.base.params = p;
    m.base.y_domain = Interval{0.0, std::numeric_limits<double>::infinity()};
    m.base.base_point = 1.0;
    m.base.drift_y = [a, b, sigma](double r) { return r * (a * (b - std::log(r)) + 0.5 * sigma * sigma); };
    m.base.vol_y = [sigma](double r) { return sigma * r; };
    m.base.vol_y_derivative = [sigma](double) { return sigma; };
    m.base.rate_map = [](double r) { return r; };
    m.base.lamperti = [](double r) { return std::log(r); };
    m.base.lamperti_inverse = [](double x) { return std::exp(x); };
    m.rate_x = [](double x) { return std::exp(x); };
    const double k = a * a / (2.0 * sigma * sigma);
    m.potential = [k, a, b](double x, double lambda) {
        return k * (b - x) * (b - x) - 0.5 * a + lambda * std::exp(x);
    };
    m.potential_second = [k](double x, double lambda) { return 2.0 * k + lambda * std::exp(x); };
    m.closed_form_smears = [k, a, b](double xbar, double alpha, double lambda) {
        const double e = std::exp(xbar + 0.5 * alpha);
        const double v = k * ((b - xbar) * (b - xbar) + alpha) - 0.5 * a + lambda * e;
        return SmearedPotential{v, 2.0 * k + lambda * e};
    };
    return m;
}

/// GARCH linear SDE dY = a (b - Y) dt + sigma Y dW with r = Y > 0; X = ln Y.
/// V = A e^{-2x} - B e^{-x} + C + lambda e^x (a Morse-type potential).
inline TransformedModel garch(double a, double b, double sigma) {
    const ModelParams p{a, b, sigma, 0.0, 0.0};
    detail::validate_common(p, "garch");
    if (!(b > 0.0)) throw InputError("garch: b must be > 0");
    TransformedModel m;
    m.sigma = sigma;
    m.base.name = "garch";
    m.base.kind = ModelKind::garch;
    m.base.params = p;
    m.base.y_domain = Interval{0.0, std::numeric_limits<double>::infinity()};
    m.base.base_point = 1.0;
    m.base.drift_y = [a, b](double y) { return a * (b - y); };
    m.base.vol_y = [sigma](double y) { return sigma * y; };
    m.base.vol_y_derivative = [sigma](double) { return sigma; };
    m.base.rate_map = [](double y) { return y; };
    m.base.lamperti = [](double y) { return std::log(y); };
    m.base.lamperti_inverse = [](double x) { return std::exp(x); };
    m.rate_x = [](double x) { return std::exp(x); };

    const double s2 = sigma * sigma;
    const double ab = a * b;
    const double c = a + 0.5 * s2;
    m.drift = [ab, c](double x) { return ab * std::exp(-x) - c; };
    m.drift_derivative = [ab](double x) { return -ab * std::exp(-x); };
    m.drift_primitive = [ab, c, s2](double x0, double xT) {
        // -(1/s2) [-ab e^{-x} - c x] from x0 to xT
        return -((-ab * (std::exp(-xT) - std::exp(-x0)) - c * (xT - x0)) / s2);
    };
    const double A = ab * ab / (2.0 * s2);
    const double B = ab * (a + s2) / s2;
    const double C = c * c / (2.0 * s2);
    m.potential = [A, B, C](double x, double lambda) {
        const double e = std::exp(-x);
        return A * e * e - B * e + C + lambda * std::exp(x);
    };
    m.potential_second = [A, B](double x, double lambda) {
        const double e = std::exp(-x);
        return 4.0 * A * e * e - B * e + lambda * std::exp(x);
    };
    m.closed_form_smears = [A, B, C](double xbar, double alpha, double lambda) {
        const double e2 = std::exp(-2.0 * xbar + 2.0 * alpha);
        const double e1 = std::exp(-xbar + 0.5 * alpha);
        const double ep = std::exp(xbar + 0.5 * alpha);
        return SmearedPotential{A * e2 - B * e1 + C + lambda * ep, 4.0 * A * e2 - B * e1 + lambda * ep};
    };
    return m;
}

/// Same model expressed in x' = x + shift, i.e. with the Lamperti base point moved.
/// Densities in the original y-coordinate are unchanged.
inline TransformedModel shift_coordinates(const TransformedModel& model, double shift) {
    TransformedModel m = model;
    m.x_domain = Interval{model.x_domain.lo + shift, model.x_domain.hi + shift};
    m.base.lamperti = [f = model.base.lamperti, shift](double y) { return f(y) + shift; };
    m.base.lamperti_inverse = [f = model.base.lamperti_inverse, shift](double x) { return f(x - shift); };
    m.base.base_point = model.base.lamperti_inverse(-shift);
    m.drift = [f = model.drift, shift](double x) { return f(x - shift); };
    m.drift_derivative = [f = model.drift_derivative, shift](double x) { return f(x - shift); };
    m.rate_x = [f = model.rate_x, shift](double x) { return f(x - shift); };
    m.potential = [f = model.potential, shift](double x, double l) { return f(x - shift, l); };
    m.potential_second = [f = model.potential_second, shift](double x, double l) { return f(x - shift, l); };
    m.drift_primitive = [f = model.drift_primitive, shift](double x0, double xT) { return f(x0 - shift, xT - shift); };
    if (model.closed_form_smears) {
        m.closed_form_smears = [f = model.closed_form_smears, shift](double xbar, double alpha, double l) {
            return f(xbar - shift, alpha, l);
        };
    }
    return m;
}

/// Copy of the model with the closed-form smears removed (forces Gauss-Hermite smearing).
inline TransformedModel without_closed_form_smears(TransformedModel model) {
    model.closed_form_smears = nullptr;
    return model;
}

inline TransformedModel make_model(ModelKind kind, const ModelParams& p) {
    switch (kind) {
        case ModelKind::vasicek: return vasicek(p.a, p.b, p.sigma);
        case ModelKind::quadratic: return quadratic(p.a, p.b, p.sigma, p.beta, p.gamma);
        case ModelKind::black_karasinski: return black_karasinski(p.a, p.b, p.sigma);
        case ModelKind::garch: return garch(p.a, p.b, p.sigma);
        case ModelKind::custom: break;
    }
    throw InputError("make_model: custom models must be built programmatically");
}

/// Local mean-reversion speed -mu'(x), used for window sizing.
inline double local_reversion(const TransformedModel& model, double x) { return -model.drift_derivative(x); }

}  // namespace gtfk
