#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "../config.hpp"
#include "../errors.hpp"
#include "../models.hpp"
#include "../pricing.hpp"
#include "tridiagonal.hpp"

namespace gtfk::oracles {

enum class Boundary { absorbing, zero_flux };

inline std::string to_string(Boundary bc) { return bc == Boundary::absorbing ? "absorbing" : "zero_flux"; }

/// Uniform spatial grid and time stepping for the Fokker-Planck oracle. n_space is odd so
/// that a grid symmetric about x0 has x0 as its centre node.
struct PdeGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_space = 2001;
    int n_time = 2000;
    Boundary bc = Boundary::zero_flux;

    double spacing() const { return (x_max - x_min) / (n_space - 1); }
};

inline void validate(const PdeGrid& g, double x0) {
    if (g.n_space < 3 || g.n_space % 2 == 0) throw InputError("PdeGrid: n_space must be odd and >= 3");
    if (g.n_time < 1) throw InputError("PdeGrid: n_time must be >= 1");
    if (!(g.x_min < x0 && x0 < g.x_max)) throw InputError("PdeGrid: x0 must lie strictly inside the window");
}

/// Window symmetric about x0 wide enough for the lambda = 0 density (pde_window_std spreads
/// beyond the deterministic drift path), zero-flux for lambda = 0 and absorbing otherwise.
inline PdeGrid default_pde_grid(const TransformedModel& model, double lambda, double x0, double T,
                                const NumericsConfig& cfg = {}) {
    const Window w = terminal_window(model, x0, T, cfg, cfg.pde_window_std);
    const double half = std::max(x0 - w.lo, w.hi - x0);
    PdeGrid g;
    g.x_min = x0 - half;
    g.x_max = x0 + half;
    g.n_space = cfg.pde_n_space | 1;
    g.n_time = cfg.pde_n_time;
    g.bc = lambda == 0.0 ? Boundary::zero_flux : Boundary::absorbing;
    return g;
}

namespace detail {

// Conservative central discretization of  -d/dx(mu psi) + (sigma^2/2) psi'' - lambda r psi
// with fluxes at cell faces, F_{i+1/2} = mu_{i+1/2} (psi_i + psi_{i+1})/2 - D (psi_{i+1} - psi_i)/h.
inline Tridiagonal assemble_operator(const TransformedModel& model, double lambda, const std::vector<double>& x,
                                     double h, Boundary bc) {
    const std::size_t n = x.size();
    const double D = 0.5 * model.sigma * model.sigma;
    Tridiagonal L(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = lambda == 0.0 ? 0.0 : lambda * model.rate_x(x[i]);
        double d = -r;
        if (i + 1 < n) {
            const double mu_r = model.drift(x[i] + 0.5 * h);
            d += -mu_r / (2.0 * h) - D / (h * h);
            L.upper[i] = -mu_r / (2.0 * h) + D / (h * h);
        }
        if (i > 0) {
            const double mu_l = model.drift(x[i] - 0.5 * h);
            d += mu_l / (2.0 * h) - D / (h * h);
            L.lower[i] = mu_l / (2.0 * h) + D / (h * h);
        }
        L.diag[i] = d;
    }
    if (bc == Boundary::absorbing) {
        for (std::size_t i : {std::size_t{0}, n - 1}) {
            L.lower[i] = L.upper[i] = L.diag[i] = 0.0;
        }
    }
    return L;
}

// Solves (I - c L) u_new = rhs in place.
inline void implicit_solve(const Tridiagonal& L, double c, Boundary bc, std::vector<double>& rhs,
                           std::vector<double>& scratch) {
    Tridiagonal A(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        A.lower[i] = -c * L.lower[i];
        A.diag[i] = 1.0 - c * L.diag[i];
        A.upper[i] = -c * L.upper[i];
    }
    if (bc == Boundary::absorbing) {
        rhs.front() = 0.0;
        rhs.back() = 0.0;
    }
    solve_tridiagonal(A, rhs, scratch);
}

}  // namespace detail

/// Crank-Nicolson solution of d_t psi = -lambda r psi - d_x(mu psi) + (sigma^2/2) d_x^2 psi from
/// a unit spike at x0. The first step is taken as two backward-Euler half steps to damp the
/// oscillations Crank-Nicolson leaves on non-smooth data. x0 is snapped onto the nearest node
/// by translating the window.
inline DensityCurve solve_fokker_planck(const TransformedModel& model, double lambda, double x0, double T,
                                        PdeGrid grid) {
    validate(grid, x0);
    if (!(T > 0.0)) throw InputError("solve_fokker_planck: T must be > 0");
    const double h = grid.spacing();
    const int i0 = static_cast<int>(std::lround((x0 - grid.x_min) / h));
    const double offset = x0 - (grid.x_min + i0 * h);
    grid.x_min += offset;
    grid.x_max += offset;

    const std::size_t n = static_cast<std::size_t>(grid.n_space);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = grid.x_min + static_cast<double>(i) * h;
    x[i0] = x0;

    const Tridiagonal L = detail::assemble_operator(model, lambda, x, h, grid.bc);
    std::vector<double> psi(n, 0.0), rhs(n), scratch(n);
    psi[i0] = 1.0 / h;

    const double dt = T / grid.n_time;
    // Rannacher start
    for (int k = 0; k < 2; ++k) detail::implicit_solve(L, 0.5 * dt, grid.bc, psi, scratch);

    Tridiagonal A(n);
    for (std::size_t i = 0; i < n; ++i) {
        A.lower[i] = -0.5 * dt * L.lower[i];
        A.diag[i] = 1.0 - 0.5 * dt * L.diag[i];
        A.upper[i] = -0.5 * dt * L.upper[i];
    }
    for (int step = 1; step < grid.n_time; ++step) {
        L.apply(psi, rhs);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = psi[i] + 0.5 * dt * rhs[i];
        if (grid.bc == Boundary::absorbing) {
            rhs.front() = 0.0;
            rhs.back() = 0.0;
        }
        solve_tridiagonal(A, rhs, scratch);
        psi.swap(rhs);
    }

    DensityCurve c;
    c.lambda = lambda;
    c.T = T;
    c.y0 = model.base.lamperti_inverse(x0);
    c.method = "pde";
    c.x = x;
    c.psi_x = psi;
    c.y.resize(n);
    c.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.y[i] = model.base.lamperti_inverse(x[i]);
        c.psi[i] = model.sigma * psi[i] / model.base.vol_y(c.y[i]);
    }

    // diagnostics
    const double peak = *std::max_element(psi.begin(), psi.end());
    const double D = 0.5 * model.sigma * model.sigma;
    double peclet = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (psi[i] > 1e-12 * peak) peclet = std::max(peclet, std::abs(model.drift(x[i])) * h / D);
    if (peclet > 2.0) {
        std::ostringstream os;
        os << "cell Peclet number " << peclet << " exceeds 2 where the density is non-negligible";
        c.warnings.push_back(os.str());
    }
    const std::size_t edge = std::max<std::size_t>(2, n / 100);
    double edge_mass = 0.0;
    for (std::size_t i = 0; i < edge; ++i) edge_mass += h * (std::abs(psi[i]) + std::abs(psi[n - 1 - i]));
    if (edge_mass > 1e-8) {
        std::ostringstream os;
        os << "mass " << edge_mass << " reached the window edges";
        c.warnings.push_back(os.str());
    }
    return c;
}

/// Trapezoid mass of a grid density in the transformed coordinate.
inline double curve_mass_x(const DensityCurve& c) {
    if (c.x.size() < 2) return 0.0;
    return trapezoid(c.psi_x, c.x[1] - c.x[0]);
}

/// Coarser companion grid (half the nodes and steps) over the same window.
inline PdeGrid coarsened(PdeGrid g) {
    g.n_space = ((g.n_space - 1) / 2) | 1;
    g.n_time = std::max(1, g.n_time / 2);
    return g;
}

inline BondQuote bond_from_pde(const TransformedModel& model, double lambda, double y0, double T, const PdeGrid& grid) {
    const double x0 = lamperti_transform(model, y0);
    const DensityCurve fine = solve_fokker_planck(model, lambda, x0, T, grid);
    const DensityCurve coarse = solve_fokker_planck(model, lambda, x0, T, coarsened(grid));
    BondQuote q;
    q.T = T;
    q.value = curve_mass_x(fine);
    q.method = "pde";
    // second-order Richardson estimate of the fine-grid error
    q.err_estimate = std::abs(q.value - curve_mass_x(coarse)) / 3.0;
    q.warnings = fine.warnings;
    return q;
}

inline BondQuote bond_from_pde(const TransformedModel& model, double lambda, double y0, double T,
                               const NumericsConfig& cfg = {}) {
    const double x0 = lamperti_transform(model, y0);
    return bond_from_pde(model, lambda, y0, T, default_pde_grid(model, lambda, x0, T, cfg));
}

}  // namespace gtfk::oracles
