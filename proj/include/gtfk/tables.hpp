#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "oracles/pde.hpp"
#include "pricing.hpp"

namespace gtfk {

struct TableRow {
    double T = 0.0;
    double ref_gtfk = 0.0;
    double ref_pde = 0.0;
    double tol_gtfk = 0.0;
    double tol_pde = 0.0;
};

/// Preloaded bond table: parameter set, initial state and reference values with tolerances.
struct BondTable {
    std::string id;
    ModelKind kind = ModelKind::black_karasinski;
    ModelParams params;
    double y0 = 0.0;
    std::vector<TableRow> rows;

    TransformedModel model() const { return make_model(kind, params); }
};

inline std::vector<std::string> table_ids() { return {"bk_bonds", "garch_bonds_1", "garch_bonds_2"}; }

inline BondTable bond_table(const std::string& id) {
    BondTable t;
    t.id = id;
    if (id == "bk_bonds") {
        t.kind = ModelKind::black_karasinski;
        t.params.a = 0.1;
        t.params.b = std::log(0.04);
        t.params.sigma = 0.85;
        t.y0 = 0.06;
        t.rows = {{0.1, 0.9939, 0.9939, 5e-4, 1e-3},  {0.5, 0.9681, 0.9681, 5e-4, 1e-3},
                  {1.0, 0.9331, 0.9331, 5e-4, 1e-3},  {2.0, 0.8582, 0.8582, 5e-4, 1e-3},
                  {3.0, 0.7847, 0.7846, 5e-4, 1e-3},  {5.0, 0.6602, 0.6598, 5e-4, 1e-3},
                  {10.0, 0.4628, 0.4623, 2e-3, 1e-3}, {20.0, 0.2672, 0.2683, 2e-3, 1e-3}};
    } else if (id == "garch_bonds_1") {
        t.kind = ModelKind::garch;
        t.params.a = 0.1;
        t.params.b = 0.04;
        t.params.sigma = 0.6;
        t.y0 = 0.06;
        t.rows = {{0.1, 0.9940, 0.9940, 1e-3, 1e-3}, {0.5, 0.9707, 0.9707, 1e-3, 1e-3},
                  {1.0, 0.9429, 0.9429, 1e-3, 1e-3}, {2.0, 0.8920, 0.8917, 1e-3, 1e-3},
                  {3.0, 0.8472, 0.8466, 1e-3, 1e-3}, {5.0, 0.7717, 0.7726, 1e-3, 1e-3},
                  {7.5, 0.6923, 0.7025, 5e-3, 1e-3}, {10.0, 0.6223, 0.6477, 5e-3, 1e-3}};
    } else if (id == "garch_bonds_2") {
        t.kind = ModelKind::garch;
        t.params.a = 0.1;
        t.params.b = 0.02;
        t.params.sigma = 0.5;
        t.y0 = 0.01;
        t.rows = {{0.1, 0.9990, 0.9990, 1e-3, 1e-3},  {0.25, 0.9975, 0.9975, 1e-3, 1e-3},
                  {0.5, 0.9949, 0.9949, 1e-3, 1e-3},  {1.0, 0.9896, 0.9896, 1e-3, 1e-3},
                  {2.5, 0.9723, 0.9726, 1e-3, 1e-3},  {5.0, 0.9403, 0.9417, 1e-3, 1e-3},
                  {10.0, 0.8709, 0.8762, 3e-3, 1e-3}};
    } else {
        throw InputError("unknown table '" + id + "' (expected bk_bonds, garch_bonds_1 or garch_bonds_2)");
    }
    return t;
}

struct TableResult {
    TableRow row;
    BondQuote gtfk;
    BondQuote pde;
    double rel_diff = 0.0;  // |Z_gtfk - Z_pde| / Z_pde
    bool gtfk_ok = false;
    bool pde_ok = false;

    bool ok() const { return gtfk_ok && pde_ok; }
};

inline std::vector<TableResult> run_bond_table(const BondTable& t, const NumericsConfig& cfg = {}) {
    const TransformedModel m = t.model();
    std::vector<TableResult> out;
    for (const TableRow& row : t.rows) {
        TableResult r;
        r.row = row;
        r.gtfk = zero_coupon_bond(m, 1.0, t.y0, row.T, cfg);
        r.pde = oracles::bond_from_pde(m, 1.0, t.y0, row.T, cfg);
        r.rel_diff = std::abs(r.gtfk.value - r.pde.value) / r.pde.value;
        r.gtfk_ok = std::abs(r.gtfk.value - row.ref_gtfk) <= row.tol_gtfk;
        r.pde_ok = std::abs(r.pde.value - row.ref_pde) <= row.tol_pde;
        out.push_back(r);
    }
    return out;
}

}  // namespace gtfk
