#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "oracles/monte_carlo.hpp"
#include "pricing.hpp"
#include "self_consistent.hpp"
#include "tables.hpp"

namespace gtfk {

using json = nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NumericsConfig, gh_order, gh_max_order, smear_tol, sc_damping, sc_tol,
                                                sc_max_iters, branch_eps, xbar_order, xt_order, xbar_span, tail_factor,
                                                long_horizon, pde_n_space, pde_n_time, pde_window_std, conv_n_space,
                                                mc_paths, mc_dt, seed, threads)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelParams, a, b, sigma, beta, gamma)

inline void to_json(json& j, const BondQuote& q) {
    j = json{{"T", q.T}, {"value", q.value}, {"method", q.method}, {"err_estimate", q.err_estimate},
             {"warnings", q.warnings}};
}

inline void to_json(json& j, const oracles::McEstimate& e) {
    j = json{{"value", e.value}, {"stderr", e.std_error}, {"n_paths", e.n_paths}, {"dt", e.dt}, {"seed", e.seed}};
}

inline void to_json(json& j, const GtfkPoint& p) {
    j = json{{"xbar", p.xbar},
             {"omega2", p.omega2},
             {"alpha", p.alpha},
             {"w", p.w},
             {"half_angle", p.half_angle},
             {"imaginary", p.imaginary},
             {"iterations", p.iterations},
             {"residual_omega2", p.residual_omega2},
             {"residual_alpha", p.residual_alpha},
             {"used_bisection", p.used_bisection}};
}

inline void to_json(json& j, const DensityCurve& c) {
    j = json{{"lambda", c.lambda}, {"T", c.T},   {"y0", c.y0},
             {"method", c.method}, {"y", c.y},   {"psi", c.psi},
             {"warnings", c.warnings}};
}

// ---------------------------------------------------------------------------
// run specification
// ---------------------------------------------------------------------------

enum class Command { density, bond, table, selfconsistent, oracle };
enum class Method { gtfk, pde, conv, mc, exact };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::density: return "density";
        case Command::bond: return "bond";
        case Command::table: return "table";
        case Command::selfconsistent: return "selfconsistent";
        case Command::oracle: return "oracle";
    }
    return "?";
}

inline std::string to_string(Method m) {
    switch (m) {
        case Method::gtfk: return "gtfk";
        case Method::pde: return "pde";
        case Method::conv: return "conv";
        case Method::mc: return "mc";
        case Method::exact: return "exact";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    for (Command c : {Command::density, Command::bond, Command::table, Command::selfconsistent, Command::oracle})
        if (to_string(c) == s) return c;
    throw InputError("unknown command '" + s + "'");
}

inline Method parse_method(const std::string& s) {
    for (Method m : {Method::gtfk, Method::pde, Method::conv, Method::mc, Method::exact})
        if (to_string(m) == s) return m;
    throw InputError("unknown method '" + s + "' (expected gtfk, pde, conv, mc or exact)");
}

struct RunSpec {
    Command command = Command::bond;
    std::string table_id;  // table only
    ModelConfig model;
    std::vector<double> T;
    std::optional<Method> method;  // unset: the command's default
    NumericsConfig numerics;
    int conv_steps = 512;
    int points = 201;          // density / selfconsistent grid size
    double span = 4.0;         // selfconsistent window, spreads either side of x0
    bool compare_pde = false;  // density: add a psi_pde column
    std::string out;           // empty: stdout
    std::string format = "csv";
};

/// Rejects invalid combinations; throws InputError naming the first problem.
inline void validate(const RunSpec& s) {
    if (s.format != "csv" && s.format != "json") throw InputError("format must be csv or json");
    if (s.command == Command::table) {
        bond_table(s.table_id);
        return;
    }
    if (!s.model.y0) throw InputError("y0 is required");
    if (s.T.empty()) throw InputError("at least one --T is required");
    for (double t : s.T)
        if (!(t > 0.0) || !std::isfinite(t)) throw InputError("every T must be finite and > 0");
    make_model(s.model.kind, s.model.params);  // parameter checks
    if (s.points < 2) throw InputError("points must be >= 2");
    if (s.conv_steps < 1) throw InputError("conv-steps must be >= 1");
    if (!s.method) return;
    const Method m = *s.method;
    if (m == Method::exact && s.model.kind != ModelKind::vasicek)
        throw InputError("method exact is only available for the vasicek model");
    switch (s.command) {
        case Command::density:
            if (m == Method::mc) throw InputError("density does not support method mc");
            break;
        case Command::selfconsistent:
            if (m != Method::gtfk) throw InputError("selfconsistent only supports method gtfk");
            break;
        case Command::oracle:
            if (m == Method::gtfk || m == Method::exact) throw InputError("oracle expects method pde, conv or mc");
            break;
        default: break;
    }
}

inline void to_json(json& j, const RunSpec& s) {
    j = json{{"command", to_string(s.command)},
             {"model", to_string(s.model.kind)},
             {"params", s.model.params},
             {"lambda", s.model.lambda},
             {"T", s.T},
             {"numerics", s.numerics},
             {"conv_steps", s.conv_steps},
             {"points", s.points},
             {"span", s.span},
             {"compare_pde", s.compare_pde},
             {"out", s.out},
             {"format", s.format}};
    j["y0"] = s.model.y0 ? json(*s.model.y0) : json(nullptr);
    j["method"] = s.method ? json(to_string(*s.method)) : json(nullptr);
    if (s.command == Command::table) j["table"] = s.table_id;
}

inline void from_json(const json& j, RunSpec& s) {
    s = RunSpec{};
    s.command = parse_command(j.at("command").get<std::string>());
    if (j.contains("table")) s.table_id = j.at("table").get<std::string>();
    s.model.kind = parse_model_kind(j.at("model").get<std::string>());
    s.model.params = j.value("params", ModelParams{});
    s.model.lambda = j.value("lambda", 1.0);
    if (j.contains("y0") && !j.at("y0").is_null()) s.model.y0 = j.at("y0").get<double>();
    s.T = j.value("T", std::vector<double>{});
    if (j.contains("method") && !j.at("method").is_null()) s.method = parse_method(j.at("method").get<std::string>());
    s.numerics = j.value("numerics", NumericsConfig{});
    s.conv_steps = j.value("conv_steps", 512);
    s.points = j.value("points", 201);
    s.span = j.value("span", 4.0);
    s.compare_pde = j.value("compare_pde", false);
    s.out = j.value("out", std::string{});
    s.format = j.value("format", std::string("csv"));
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

namespace detail {

inline void csv_precision(std::ostream& os) { os << std::setprecision(std::numeric_limits<double>::max_digits10); }

}  // namespace detail

/// Columns T, y, psi_<method>... for curves sampled on a shared y grid.
inline void write_curves_csv(std::ostream& os, const std::vector<DensityCurve>& curves) {
    if (curves.empty()) return;
    detail::csv_precision(os);
    os << "T,y";
    for (const auto& c : curves) os << ",psi_" << c.method;
    os << "\n";
    for (std::size_t i = 0; i < curves.front().y.size(); ++i) {
        os << curves.front().T << "," << curves.front().y[i];
        for (const auto& c : curves) os << "," << c.psi[i];
        os << "\n";
    }
}

inline void write_bonds_csv(std::ostream& os, const std::vector<BondQuote>& quotes) {
    detail::csv_precision(os);
    os << "T,value,err_estimate,method\n";
    for (const auto& q : quotes) os << q.T << "," << q.value << "," << q.err_estimate << "," << q.method << "\n";
}

inline void write_table_csv(std::ostream& os, const std::vector<TableResult>& rows) {
    detail::csv_precision(os);
    os << "T,Z_gtfk,Z_pde,rel_diff,ref_gtfk,ref_pde,pass\n";
    for (const auto& r : rows)
        os << r.row.T << "," << r.gtfk.value << "," << r.pde.value << "," << r.rel_diff << "," << r.row.ref_gtfk << ","
           << r.row.ref_pde << "," << (r.ok() ? 1 : 0) << "\n";
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
    detail::csv_precision(os);
    os << "xbar,omega2,alpha,w,rho_diag,status\n";
    for (const auto& r : rows) {
        if (r.ok)
            os << r.xbar << "," << r.point.omega2 << "," << r.point.alpha << "," << r.point.w << "," << r.rho_diag
               << ",ok\n";
        else
            os << r.xbar << ",nan,nan,nan,nan,breakdown\n";
    }
}

inline json scan_to_json(const std::vector<ScanRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json j = r.ok ? json(r.point) : json{{"xbar", r.xbar}};
        j["status"] = r.ok ? "ok" : "breakdown";
        if (r.ok) j["rho_diag"] = r.rho_diag;
        else j["error"] = r.error;
        out.push_back(j);
    }
    return out;
}

inline json table_to_json(const std::vector<TableResult>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back(json{{"T", r.row.T},
                           {"Z_gtfk", r.gtfk.value},
                           {"Z_pde", r.pde.value},
                           {"rel_diff", r.rel_diff},
                           {"ref_gtfk", r.row.ref_gtfk},
                           {"ref_pde", r.row.ref_pde},
                           {"tol_gtfk", r.row.tol_gtfk},
                           {"tol_pde", r.row.tol_pde},
                           {"err_gtfk", r.gtfk.err_estimate},
                           {"err_pde", r.pde.err_estimate},
                           {"pass", r.ok()}});
    return out;
}

}  // namespace gtfk
