#include "linsync/cli.hpp"

#include "linsync/errors.hpp"
#include "linsync/experiments.hpp"
#include "linsync/format.hpp"
#include "linsync/matrix_io.hpp"
#include "linsync/motifs.hpp"
#include "linsync/netgen.hpp"
#include "linsync/simulate.hpp"
#include "linsync/spectral.hpp"
#include "linsync/synccore.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace linsync::cli {
namespace {

// Raised for a completed analysis whose verdict is "not synchronizable".
struct NotSynchronizable {
    std::string reason;
};

const char* yes_no(bool b) { return b ? "yes" : "no"; }

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

void close_output(std::ofstream& f, const std::string& path) {
    f.close();
    if (!f) throw std::runtime_error("write to " + path + " failed");
}

struct DynamicsFlags {
    std::string kind = "continuous";
    double theta = 1.0;
    double zeta = 1.0;
    CLI::Option* kind_opt = nullptr;
    CLI::Option* theta_opt = nullptr;
    CLI::Option* zeta_opt = nullptr;

    void add(CLI::App* app) {
        kind_opt = app->add_option("--kind", kind, "Dynamics: continuous (OU) or discrete (VAR)")
                       ->check(CLI::IsMember({"continuous", "discrete"}));
        theta_opt = app->add_option("--theta", theta, "Reversion rate (continuous)");
        zeta_opt = app->add_option("--zeta", zeta, "Noise strength");
    }
    DynamicsKind parsed_kind() const {
        return kind == "discrete" ? DynamicsKind::discrete : DynamicsKind::continuous;
    }
    DynamicsParams params() const { return {parsed_kind(), theta, zeta}; }
    void apply_to(DynamicsParams& p) const {
        if (kind_opt->count() > 0) p.kind = parsed_kind();
        if (theta_opt->count() > 0) p.theta = theta;
        if (zeta_opt->count() > 0) p.zeta = zeta;
    }
};

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
    RingEnsembleParams params;
    std::string out;
};

void setup_generate(CLI::App* sub, GenerateArgs& a) {
    sub->add_option("--n", a.params.n, "Number of nodes")->required();
    sub->add_option("--d", a.params.d, "In-degree (even)")->required();
    sub->add_option("--c", a.params.c, "Total coupling weight per node")->required();
    sub->add_option("--p", a.params.p, "Rewiring probability")->required();
    sub->add_option("--seed", a.params.seed, "RNG seed");
    sub->add_option("--out", a.out, "Output matrix file")->required();
}

int run_generate(const GenerateArgs& a, std::ostream& out) {
    const ConnectivityMatrix c = generate_network(a.params);
    write_matrix(c, std::filesystem::path(a.out));
    const ZeroModeReport z = check_zero_mode(c);
    const double rho = spectral_radius(times_centering(c.weights()));
    out << "wrote " << a.out << " (" << c.size() << " nodes)\n";
    out << "zero_mode_residual: " << format_double(z.residual) << '\n';
    out << "rho_CU: " << format_double(rho) << '\n';
    return kOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string matrix;
    DynamicsFlags dyn;
    std::string method = "fixed_point";
    double tol = 1e-10;
    std::size_t max_terms = 10000;
    std::string motifs;
    std::optional<std::size_t> motif_order;
};

void setup_analyze(CLI::App* sub, AnalyzeArgs& a) {
    sub->add_option("matrix", a.matrix, "Matrix file")->required();
    a.dyn.add(sub);
    sub->add_option("--method", a.method, "series or fixed_point")
        ->check(CLI::IsMember({"series", "fixed_point"}));
    sub->add_option("--tol", a.tol, "Relative truncation tolerance");
    sub->add_option("--max-terms", a.max_terms, "Maximum series terms / iterations");
    sub->add_option("--motifs", a.motifs, "Write the motif ledger CSV here");
    sub->add_option("--motif-order", a.motif_order,
                    "Ledger up to this order (default: run the expansion to convergence)");
}

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const ConnectivityMatrix c = read_matrix(std::filesystem::path(a.matrix));
    const DynamicsParams params = a.dyn.params();
    params.validate();
    const SpectralSummary s = classify(c);
    const ZeroModeReport z = check_zero_mode(c);

    out << "nodes: " << c.size() << '\n';
    out << "dynamics: " << to_string(params.kind) << '\n';
    out << "zero_mode: " << yes_no(s.zero_mode_index.has_value()) << " (residual " << format_double(z.residual)
        << ")\n";
    out << "sync_continuous: " << yes_no(s.sync_continuous) << '\n';
    out << "sync_discrete: " << yes_no(s.sync_discrete) << '\n';
    out << "re_lambda1: " << format_double(s.re_lambda1) << '\n';
    out << "re_lambda2: " << format_double(s.re_lambda2) << '\n';
    out << "rho_CU: " << format_double(s.rho_cu) << '\n';
    out << "rho_C: " << format_double(s.rho_c) << '\n';
    out << "symmetric: " << yes_no(s.symmetric) << '\n';

    const bool sync = params.kind == DynamicsKind::continuous ? s.sync_continuous : s.sync_discrete;
    if (!sync) throw NotSynchronizable{"an eigenvalue off the zero mode violates the stability condition"};

    SyncEstimate e;
    const SigmaMethod method = a.method == "series" ? SigmaMethod::series : SigmaMethod::fixed_point;
    try {
        e = sigma2(c, params, {a.tol, a.max_terms, true}, method);
    } catch (const ValidityError& ex) {
        throw NotSynchronizable{ex.what()};
    }
    out << "sigma2: " << format_double(e.sigma2) << '\n';
    out << "method: " << to_string(e.method) << '\n';
    out << "terms: " << e.terms_used << '\n';
    out << "residual: " << format_double(e.residual) << '\n';
    out << "converged: " << yes_no(e.converged) << '\n';
    if (!e.converged) {
        out << "verdict: series did not converge within " << a.max_terms << " terms\n";
        return kNumericalFailure;
    }

    if (s.symmetric && s.zero_mode_index) {
        try {
            const double scale = params.kind == DynamicsKind::continuous ? params.zeta * params.zeta / params.theta
                                                                         : params.zeta * params.zeta;
            const double cf = params.kind == DynamicsKind::continuous ? sigma2_symmetric_continuous(s)
                                                                      : sigma2_symmetric_discrete(s);
            out << "closed_form_sigma2: " << format_double(scale * cf) << '\n';
            if ((c.weights().array() >= 0.0).all()) out << "kemeny_constant: " << format_double(kemeny_constant(s)) << '\n';
        } catch (const std::domain_error& ex) {
            out << "closed_form_sigma2: unavailable (" << ex.what() << ")\n";
        }
    }

    if (!a.motifs.empty()) {
        MotifLedger ledger;
        if (a.motif_order) {
            ledger = sigma2_low_order(c, params, *a.motif_order);
        } else {
            MotifExpansion m = motif_expansion(c, params, {a.tol, a.max_terms, true});
            out << "motif_sigma2: " << format_double(m.estimate.sigma2) << '\n';
            ledger = std::move(m.ledger);
        }
        write_ledger_csv(ledger, std::filesystem::path(a.motifs));
        out << "motif_ledger: " << a.motifs << " (" << ledger.order.size() << " orders)\n";
    }
    out << "verdict: synchronizable\n";
    return kOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::string spec_file;
    SweepSpec flags;
    DynamicsFlags dyn;
    std::string method;
    std::size_t threads = 0;
    std::map<std::string, CLI::Option*> opts;
};

void setup_sweep(CLI::App* sub, SweepArgs& a) {
    sub->add_option("--spec", a.spec_file, "JSON sweep specification (flags override it)");
    a.opts["n"] = sub->add_option("--n", a.flags.n, "Number of nodes");
    a.opts["d"] = sub->add_option("--d", a.flags.d, "In-degree");
    a.opts["c"] = sub->add_option("--c", a.flags.c_values, "Coupling values (comma separated)")->delimiter(',');
    a.opts["p"] = sub->add_option("--p", a.flags.p_values, "Rewiring probabilities (comma separated)")->delimiter(',');
    a.opts["realizations"] = sub->add_option("--realizations,-R", a.flags.realizations, "Realizations per cell");
    a.opts["seed"] = sub->add_option("--seed", a.flags.seed, "Master seed");
    a.opts["low_orders"] =
        sub->add_option("--low-orders", a.flags.low_orders, "Low-order M values (comma separated)")->delimiter(',');
    a.opts["tol"] = sub->add_option("--tol", a.flags.tol, "Relative truncation tolerance");
    a.opts["max_terms"] = sub->add_option("--max-terms", a.flags.max_terms, "Maximum terms / iterations");
    a.opts["method"] = sub->add_option("--method", a.method, "series, fixed_point or motif_expansion");
    a.opts["out"] = sub->add_option("--out", a.flags.output_path, "Row CSV path");
    a.opts["summary"] = sub->add_option("--summary", a.flags.summary_path, "Summary CSV path");
    a.dyn.add(sub);
    sub->add_option("--threads", a.threads, "Worker threads (default: LINSYNC_THREADS or all cores)");
}

SweepSpec build_sweep_spec(SweepArgs& a) {
    SweepSpec spec;
    if (!a.spec_file.empty()) {
        std::ifstream f(a.spec_file);
        if (!f) throw std::invalid_argument("cannot read spec file " + a.spec_file);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("spec file is not valid JSON: ") + e.what());
        }
        apply_sweep_json(j, spec);
    }
    auto given = [&](const char* k) { return a.opts.at(k)->count() > 0; };
    if (given("n")) spec.n = a.flags.n;
    if (given("d")) spec.d = a.flags.d;
    if (given("c")) spec.c_values = a.flags.c_values;
    if (given("p")) spec.p_values = a.flags.p_values;
    if (given("realizations")) spec.realizations = a.flags.realizations;
    if (given("seed")) spec.seed = a.flags.seed;
    if (given("low_orders")) spec.low_orders = a.flags.low_orders;
    if (given("tol")) spec.tol = a.flags.tol;
    if (given("max_terms")) spec.max_terms = a.flags.max_terms;
    if (given("method")) apply_sweep_json(nlohmann::json{{"method", a.method}}, spec);
    if (given("out")) spec.output_path = a.flags.output_path;
    if (given("summary")) spec.summary_path = a.flags.summary_path;
    a.dyn.apply_to(spec.dynamics);
    if (spec.output_path.empty()) throw std::invalid_argument("sweep needs an output path (--out or output_path)");
    if (spec.summary_path.empty()) {
        const std::filesystem::path p(spec.output_path);
        spec.summary_path = (p.parent_path() / (p.stem().string() + "_summary.csv")).string();
    }
    spec.validate();
    return spec;
}

int run_sweep_cmd(SweepArgs& a, std::ostream& out, std::ostream& err) {
    const SweepSpec spec = build_sweep_spec(a);
    std::ofstream rows = open_output(spec.output_path);
    std::ofstream summary = open_output(spec.summary_path);
    const SweepResult r = run_sweep(spec, resolve_thread_count(a.threads), &err);
    write_sweep_rows_csv(r, rows);
    write_sweep_summary_csv(r, summary);
    close_output(rows, spec.output_path);
    close_output(summary, spec.summary_path);
    out << "wrote " << spec.output_path << " (" << r.rows.size() << " rows) and " << spec.summary_path << " ("
        << r.cells.size() << " cells)\n";
    return kOk;
}

// ---- converge --------------------------------------------------------------

struct ConvergeArgs {
    ConvergeSpec spec;
    DynamicsFlags dyn;
    std::optional<std::size_t> burn_in;
    std::size_t threads = 0;
};

void setup_converge(CLI::App* sub, ConvergeArgs& a) {
    sub->add_option("--n", a.spec.n, "Number of nodes");
    sub->add_option("--d", a.spec.d, "In-degree");
    sub->add_option("--c", a.spec.c, "Coupling");
    sub->add_option("--p", a.spec.p_values, "Rewiring probabilities (comma separated)")->delimiter(',');
    sub->add_option("--L", a.spec.l_values, "Sample counts (comma separated)")->delimiter(',');
    sub->add_option("--realizations,-R", a.spec.realizations, "Realizations per p");
    sub->add_option("--seed", a.spec.seed, "Master seed");
    sub->add_option("--dt", a.spec.dt, "Sampling interval");
    sub->add_option("--burn-in", a.burn_in, "Discarded samples (default: from the slowest mode)");
    sub->add_option("--tol", a.spec.tol, "Relative truncation tolerance");
    sub->add_option("--max-terms", a.spec.max_terms, "Maximum terms / iterations");
    sub->add_option("--out", a.spec.output_path, "Output CSV (default: standard output)");
    a.dyn.add(sub);
    sub->add_option("--threads", a.threads, "Worker threads");
}

int run_converge_cmd(ConvergeArgs& a, std::ostream& out, std::ostream& err) {
    a.dyn.apply_to(a.spec.dynamics);
    a.spec.burn_in = a.burn_in;
    a.spec.validate();
    std::ofstream f;
    if (!a.spec.output_path.empty()) f = open_output(a.spec.output_path);
    const auto cells = run_converge(a.spec, resolve_thread_count(a.threads), &err);
    if (a.spec.output_path.empty()) {
        write_converge_csv(cells, out);
    } else {
        write_converge_csv(cells, f);
        close_output(f, a.spec.output_path);
        out << "wrote " << a.spec.output_path << " (" << cells.size() << " cells)\n";
    }
    return kOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string matrix;
    DynamicsFlags dyn;
    double dt = 1.0;
    std::size_t samples = 1000;
    std::optional<std::size_t> burn_in;
    std::uint64_t seed = 0;
    std::string out;
};

void setup_simulate(CLI::App* sub, SimulateArgs& a) {
    sub->add_option("matrix", a.matrix, "Matrix file")->required();
    a.dyn.add(sub);
    sub->add_option("--dt", a.dt, "Sampling interval (continuous)");
    sub->add_option("--samples,-L", a.samples, "Recorded samples");
    sub->add_option("--burn-in", a.burn_in, "Discarded samples (default: from the slowest mode)");
    sub->add_option("--seed", a.seed, "RNG seed");
    sub->add_option("--out", a.out, "Time-series CSV (default: standard output)");
}

int run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const ConnectivityMatrix c = read_matrix(std::filesystem::path(a.matrix));
    SimulationConfig cfg;
    cfg.params = a.dyn.params();
    cfg.dt = a.dt;
    cfg.samples = a.samples;
    cfg.burn_in = a.burn_in;
    cfg.seed = a.seed;
    TimeSeriesBatch b;
    try {
        b = simulate(c, cfg);
    } catch (const ValidityError& ex) {
        throw NotSynchronizable{ex.what()};
    }
    const SyncEstimate e = empirical_sigma2(b);
    std::ostream& log = a.out.empty() ? err : out;
    if (a.out.empty()) {
        write_timeseries_csv(b, out);
    } else {
        std::ofstream f = open_output(a.out);
        write_timeseries_csv(b, f);
        close_output(f, a.out);
        out << "wrote " << a.out << " (" << b.data.rows() << " samples)\n";
    }
    log << "burn_in: " << b.burn_in_used << '\n';
    log << "empirical_sigma2: " << format_double(e.sigma2) << " +/- " << format_double(e.standard_error) << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady-state distance from synchronization of linear noisy networks"};
    app.name("linsync");
    app.require_subcommand(1);

    GenerateArgs gen;
    AnalyzeArgs ana;
    SweepArgs swp;
    ConvergeArgs cnv;
    SimulateArgs sim;
    auto* g = app.add_subcommand("generate", "Generate a rewired ring network");
    auto* an = app.add_subcommand("analyze", "Spectral summary and sigma2 of one network");
    auto* sw = app.add_subcommand("sweep", "Ensemble sweep over (p, c)");
    auto* cv = app.add_subcommand("converge", "Empirical vs analytic error against sample count");
    auto* sm = app.add_subcommand("simulate", "Dump a simulated time series");
    setup_generate(g, gen);
    setup_analyze(an, ana);
    setup_sweep(sw, swp);
    setup_converge(cv, cnv);
    setup_simulate(sm, sim);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (g->parsed()) return run_generate(gen, out);
        if (an->parsed()) return run_analyze(ana, out);
        if (sw->parsed()) return run_sweep_cmd(swp, out, err);
        if (cv->parsed()) return run_converge_cmd(cnv, out, err);
        if (sm->parsed()) return run_simulate(sim, out, err);
    } catch (const NotSynchronizable& e) {
        out << "verdict: not synchronizable (" << e.reason << ")\n";
        return kNotSynchronizable;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        return kNotSynchronizable;
    } catch (const ValidityError& e) {
        err << "invalid network: " << e.what() << '\n';
        return kNotSynchronizable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}

} // namespace linsync::cli
