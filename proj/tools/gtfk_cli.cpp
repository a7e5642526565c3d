// gtfk_cli: densities, bonds, self-consistency scans and reference tables from the
// command line. CSV on stdout or --out (with a JSON sidecar), or a single JSON document.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <gtfk/gtfk.hpp>

namespace {

using gtfk::json;

enum ExitCode { kOk = 0, kToleranceBreach = 2, kNumericalFailure = 3, kBadInput = 4 };

struct Flags {
    std::string model, method, config, table;
    double a = 0.0, b = 0.0, sigma = 0.0, beta = 0.0, gamma = 0.0, lambda = 1.0, y0 = 0.0;
    std::vector<double> T;
    std::string out, format = "csv";
    unsigned long long seed = 0;
    int threads = 0, conv_steps = 512, points = 201, xbar_order = 0, xt_order = 0;
    int pde_n_space = 0, pde_n_time = 0;
    long mc_paths = 0;
    double mc_dt = 0.0, span = 4.0;
    bool compare_pde = false;
};

struct Options {
    CLI::Option *model, *a, *b, *sigma, *beta, *gamma, *lambda, *y0, *seed, *method;
};

Options add_common(CLI::App* sub, Flags& f) {
    Options o{};
    o.model = sub->add_option("--model", f.model, "vasicek | quadratic | bk | garch");
    o.a = sub->add_option("--a", f.a, "mean-reversion speed");
    o.b = sub->add_option("--b", f.b, "mean-reversion level");
    o.sigma = sub->add_option("--sigma", f.sigma, "volatility");
    o.beta = sub->add_option("--beta", f.beta, "quadratic rate map, linear coefficient");
    o.gamma = sub->add_option("--gamma", f.gamma, "quadratic rate map, quadratic coefficient");
    o.lambda = sub->add_option("--lambda", f.lambda, "discount weight");
    o.y0 = sub->add_option("--y0", f.y0, "initial state");
    sub->add_option("--T", f.T, "horizon (repeatable)");
    o.method = sub->add_option("--method", f.method, "gtfk | pde | conv | mc | exact");
    sub->add_option("--config", f.config, "model configuration file (key = value)");
    o.seed = sub->add_option("--seed", f.seed, "Monte Carlo seed");
    sub->add_option("--threads", f.threads, "worker threads (GTFK_NUM_THREADS caps this)");
    sub->add_option("--conv-steps", f.conv_steps, "time steps of the convolution oracle");
    sub->add_option("--points", f.points, "grid size for density and selfconsistent output");
    sub->add_option("--xbar-order", f.xbar_order, "average-point quadrature order");
    sub->add_option("--xt-order", f.xt_order, "terminal quadrature order");
    sub->add_option("--pde-n-space", f.pde_n_space, "PDE grid nodes");
    sub->add_option("--pde-n-time", f.pde_n_time, "PDE time steps");
    sub->add_option("--mc-paths", f.mc_paths, "Monte Carlo paths");
    sub->add_option("--mc-dt", f.mc_dt, "Monte Carlo time step");
    return o;
}

void add_output(CLI::App* sub, Flags& f) {
    sub->add_option("--out", f.out, "output file (default stdout)");
    sub->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

gtfk::RunSpec build_spec(const std::string& command, const Flags& f, const Options& o) {
    gtfk::RunSpec s;
    s.command = gtfk::parse_command(command);
    s.table_id = f.table;
    if (!f.config.empty()) s.model = gtfk::load_model_config(f.config);
    if (o.model && o.model->count()) s.model.kind = gtfk::parse_model_kind(f.model);
    else if (f.config.empty() && s.command != gtfk::Command::table) throw gtfk::InputError("--model or --config is required");
    if (o.a && o.a->count()) s.model.params.a = f.a;
    if (o.b && o.b->count()) s.model.params.b = f.b;
    if (o.sigma && o.sigma->count()) s.model.params.sigma = f.sigma;
    if (o.beta && o.beta->count()) s.model.params.beta = f.beta;
    if (o.gamma && o.gamma->count()) s.model.params.gamma = f.gamma;
    if (o.lambda && o.lambda->count()) s.model.lambda = f.lambda;
    if (o.y0 && o.y0->count()) s.model.y0 = f.y0;
    if (o.method && o.method->count()) s.method = gtfk::parse_method(f.method);
    if (o.seed && o.seed->count()) s.numerics.seed = f.seed;
    s.T = f.T;
    s.numerics.threads = f.threads;
    if (f.xbar_order > 0) s.numerics.xbar_order = f.xbar_order;
    if (f.xt_order > 0) s.numerics.xt_order = f.xt_order;
    if (f.pde_n_space > 0) s.numerics.pde_n_space = f.pde_n_space;
    if (f.pde_n_time > 0) s.numerics.pde_n_time = f.pde_n_time;
    if (f.mc_paths > 0) s.numerics.mc_paths = f.mc_paths;
    if (f.mc_dt > 0.0) s.numerics.mc_dt = f.mc_dt;
    s.conv_steps = f.conv_steps;
    s.points = f.points;
    s.span = f.span;
    s.compare_pde = f.compare_pde;
    s.out = f.out;
    s.format = f.format;
    gtfk::validate(s);
    return s;
}

gtfk::BondQuote bond_by(gtfk::Method m, const gtfk::TransformedModel& model, const gtfk::RunSpec& s, double T) {
    const double lambda = s.model.lambda, y0 = *s.model.y0;
    const auto& cfg = s.numerics;
    switch (m) {
        case gtfk::Method::gtfk: return gtfk::zero_coupon_bond(model, lambda, y0, T, cfg);
        case gtfk::Method::pde: return gtfk::oracles::bond_from_pde(model, lambda, y0, T, cfg);
        case gtfk::Method::conv: {
            const auto grid = gtfk::oracles::default_convolution_grid(model, gtfk::lamperti_transform(model, y0), T, cfg);
            return gtfk::oracles::bond_from_convolution(model, lambda, y0, T, s.conv_steps, grid,
                                                       gtfk::oracles::KernelConvention::euler, cfg.threads);
        }
        case gtfk::Method::mc: {
            const auto e = gtfk::oracles::monte_carlo_bond(model, lambda, y0, T, cfg.mc_paths, std::min(cfg.mc_dt, T),
                                                           cfg.seed, cfg.threads);
            gtfk::BondQuote q;
            q.T = T;
            q.value = e.value;
            q.err_estimate = e.std_error;
            q.method = "mc";
            return q;
        }
        case gtfk::Method::exact: {
            gtfk::BondQuote q;
            q.T = T;
            q.value = gtfk::vasicek_exact_bond(model.base.params, lambda, y0, T);
            q.method = "exact";
            return q;
        }
    }
    throw gtfk::InputError("unsupported method");
}

gtfk::DensityCurve curve_by(gtfk::Method m, const gtfk::TransformedModel& model, const gtfk::RunSpec& s, double T,
                            const std::vector<double>& ys) {
    const double lambda = s.model.lambda, y0 = *s.model.y0;
    const double x0 = gtfk::lamperti_transform(model, y0);
    const auto& cfg = s.numerics;
    switch (m) {
        case gtfk::Method::gtfk: return gtfk::gtfk_density_curve(model, lambda, y0, T, ys, cfg);
        case gtfk::Method::exact: return gtfk::vasicek_exact_curve(model, lambda, y0, T, ys);
        case gtfk::Method::pde: {
            const auto grid = gtfk::oracles::default_pde_grid(model, lambda, x0, T, cfg);
            return gtfk::resample_curve(model, gtfk::oracles::solve_fokker_planck(model, lambda, x0, T, grid), ys);
        }
        case gtfk::Method::conv: {
            const auto grid = gtfk::oracles::default_convolution_grid(model, x0, T, cfg);
            return gtfk::resample_curve(
                model,
                gtfk::oracles::short_time_convolution(model, lambda, x0, T, s.conv_steps, grid,
                                                      gtfk::oracles::KernelConvention::euler, cfg.threads),
                ys);
        }
        default: break;
    }
    throw gtfk::InputError("density does not support method " + gtfk::to_string(m));
}

struct Output {
    std::string csv;
    json data;
    json meta = json::object();
    int code = kOk;
};

Output run(const gtfk::RunSpec& s) {
    Output out;
    std::ostringstream csv;
    std::vector<std::string> warnings;
    if (s.command == gtfk::Command::table) {
        const auto table = gtfk::bond_table(s.table_id);
        const auto rows = gtfk::run_bond_table(table, s.numerics);
        gtfk::write_table_csv(csv, rows);
        out.data = gtfk::table_to_json(rows);
        for (const auto& r : rows) {
            if (r.ok()) continue;
            out.code = kToleranceBreach;
            std::ostringstream os;
            os << "row T=" << r.row.T << ": gtfk " << r.gtfk.value << " vs " << r.row.ref_gtfk << " (tol "
               << r.row.tol_gtfk << "), pde " << r.pde.value << " vs " << r.row.ref_pde << " (tol " << r.row.tol_pde
               << ")";
            warnings.push_back(os.str());
        }
        out.meta["model"] = gtfk::to_string(table.kind);
        out.meta["params"] = table.params;
        out.meta["y0"] = table.y0;
    } else {
        const auto model = gtfk::make_model(s.model.kind, s.model.params);
        if (s.model.kind == gtfk::ModelKind::quadratic) {
            for (const auto& w : gtfk::quadratic_positivity(s.model.params.beta, s.model.params.gamma).warnings)
                warnings.push_back(w);
        }
        out.data = json::array();
        if (s.command == gtfk::Command::bond || s.command == gtfk::Command::oracle) {
            std::vector<gtfk::Method> methods;
            if (s.method) methods = {*s.method};
            else if (s.command == gtfk::Command::bond) methods = {gtfk::Method::gtfk};
            else methods = {gtfk::Method::pde, gtfk::Method::conv, gtfk::Method::mc};
            std::vector<gtfk::BondQuote> quotes;
            for (double T : s.T)
                for (auto m : methods) quotes.push_back(bond_by(m, model, s, T));
            gtfk::write_bonds_csv(csv, quotes);
            for (const auto& q : quotes) {
                out.data.push_back(q);
                for (const auto& w : q.warnings) warnings.push_back(q.method + " T=" + std::to_string(q.T) + ": " + w);
            }
        } else if (s.command == gtfk::Command::density) {
            const gtfk::Method m = s.method.value_or(gtfk::Method::gtfk);
            bool header = true;
            for (double T : s.T) {
                const auto ys = gtfk::default_y_grid(model, *s.model.y0, T, s.points, s.numerics);
                std::vector<gtfk::DensityCurve> curves{curve_by(m, model, s, T, ys)};
                if (s.compare_pde && m != gtfk::Method::pde) curves.push_back(curve_by(gtfk::Method::pde, model, s, T, ys));
                std::ostringstream block;
                gtfk::write_curves_csv(block, curves);
                std::string text = block.str();
                if (!header) text.erase(0, text.find('\n') + 1);
                header = false;
                csv << text;
                for (const auto& c : curves) {
                    out.data.push_back(c);
                    for (const auto& w : c.warnings) warnings.push_back(c.method + " T=" + std::to_string(T) + ": " + w);
                }
            }
        } else {
            const double x0 = gtfk::lamperti_transform(model, *s.model.y0);
            for (double T : s.T) {
                const auto w = gtfk::terminal_window(model, x0, T, s.numerics, s.span);
                const auto rows = gtfk::scan_self_consistent(model, s.model.lambda, T, w.lo, w.hi, s.points, s.numerics);
                std::ostringstream block;
                gtfk::write_scan_csv(block, rows);
                csv << "# T = " << T << "\n" << block.str();
                out.data.push_back(json{{"T", T}, {"rows", gtfk::scan_to_json(rows)}});
                for (const auto& r : rows)
                    if (!r.ok) warnings.push_back(r.error);
            }
        }
    }
    out.csv = csv.str();
    out.meta["warnings"] = warnings;
    return out;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw gtfk::InputError("cannot write '" + path + "'");
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GTFK effective-potential densities and bonds for short-rate models"};
    app.require_subcommand(1);
    Flags f;
    std::map<std::string, Options> opts;
    const std::pair<const char*, const char*> commands[] = {
        {"density", "Arrow-Debreu density curves"},
        {"bond", "zero-coupon bonds"},
        {"selfconsistent", "self-consistent (omega2, alpha, w) over a window of average points"},
        {"oracle", "bonds from the PDE, convolution and Monte Carlo engines"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        opts[name] = add_common(sub, f);
        add_output(sub, f);
    }
    app.get_subcommand("density")->add_flag("--compare-pde", f.compare_pde, "add a psi_pde column");
    app.get_subcommand("selfconsistent")->add_option("--span", f.span, "window half-width in spreads");
    auto* table = app.add_subcommand("table", "reference bond tables with per-row tolerance checks");
    table->add_option("id", f.table, "bk_bonds | garch_bonds_1 | garch_bonds_2")->required();
    table->add_option("--threads", f.threads, "worker threads");
    table->add_option("--xbar-order", f.xbar_order, "average-point quadrature order");
    table->add_option("--xt-order", f.xt_order, "terminal quadrature order");
    table->add_option("--pde-n-space", f.pde_n_space, "PDE grid nodes");
    table->add_option("--pde-n-time", f.pde_n_time, "PDE time steps");
    add_output(table, f);
    opts["table"] = Options{};

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    gtfk::RunSpec spec;
    try {
        spec = build_spec(command, f, opts[command]);
        const auto start = std::chrono::steady_clock::now();
        Output out = run(spec);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.meta["spec"] = spec;
        out.meta["elapsed_s"] = seconds;
        out.meta["exit_code"] = out.code;
        if (spec.format == "json") {
            json doc = out.meta;
            doc["results"] = out.data;
            emit(spec.out, doc.dump(2) + "\n");
        } else {
            emit(spec.out, out.csv);
            if (!spec.out.empty()) {
                json doc = out.meta;
                doc["results"] = out.data;
                emit(spec.out + ".json", doc.dump(2) + "\n");
            }
        }
        for (const auto& w : out.meta["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
        return out.code;
    } catch (const gtfk::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const gtfk::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}
