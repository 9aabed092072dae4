#pragma once

#include "linsync/synccore.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace linsync {

/// Runs fn(0), ..., fn(count - 1) on `threads` workers. The first exception
/// (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// `requested` if nonzero, else LINSYNC_THREADS, else the hardware
/// concurrency (at least 1).
std::size_t resolve_thread_count(std::size_t requested = 0);

/// Least-squares slope of log10(y) against log10(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepSpec {
    std::size_t n = 100;
    std::size_t d = 4;
    std::vector<double> c_values{0.5};
    std::vector<double> p_values;
    std::size_t realizations = 200;
    std::uint64_t seed = 1;
    DynamicsParams dynamics;
    std::vector<std::size_t> low_orders{2, 10, 50};
    double tol = 1e-10;
    std::size_t max_terms = 100000;
    SigmaMethod method = SigmaMethod::fixed_point;
    std::string output_path;
    std::string summary_path; ///< defaults to "<output stem>_summary.csv"

    /// Throws std::invalid_argument on an empty p or c list, p or c outside
    /// [0, 1], zero realizations, an invalid ring shape or dynamics.
    void validate() const;
};

/// Reads the fields of `j` that are present into `spec`. Unknown keys are
/// rejected. Layout mirrors SweepSpec:
///   {"n":100,"d":4,"c_values":[0.5],"p_values":[0.01,0.1],"realizations":200,
///    "seed":1,"dynamics":{"kind":"continuous","theta":1,"zeta":1},
///    "low_orders":[2,10,50],"tolerances":{"tol":1e-10,"max_terms":100000},
///    "method":"fixed_point","output_path":"rows.csv","summary_path":"summary.csv"}
void apply_sweep_json(const nlohmann::json& j, SweepSpec& spec);

struct SweepRow {
    double p = 0.0;
    double c = 0.0;
    std::size_t realization_id = 0;
    std::uint64_t seed = 0;
    double sigma2 = 0.0;         ///< NaN when invalid or not converged
    std::vector<double> sigma2_m; ///< one per low order; NaN when invalid
    double re_lambda1 = 0.0;
    double re_lambda2 = 0.0;
    double rho_cu = 0.0;
    bool valid = false;
    bool converged = false;
};

struct ColumnStats {
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation; NaN with fewer than 2 rows
};

/// Means and SDs use rows that are both valid and converged.
struct CellSummary {
    double p = 0.0;
    double c = 0.0;
    std::size_t rows_total = 0;
    std::size_t rows_valid = 0;
    std::size_t rows_discarded = 0;
    std::size_t rows_nonconverged = 0;
    ColumnStats sigma2;
    std::vector<ColumnStats> sigma2_m;
    ColumnStats re_lambda1;
    ColumnStats re_lambda2;
    ColumnStats rho_cu;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows; ///< sorted by (p, c, realization_id)
    std::vector<CellSummary> cells; ///< sorted by (p, c)
};

/// `log` (optional) receives one line per finished cell.
SweepResult run_sweep(const SweepSpec& spec, std::size_t threads, std::ostream* log = nullptr);

std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows, std::size_t low_order_count);

void write_sweep_rows_csv(const SweepResult& r, std::ostream& out);
void write_sweep_summary_csv(const SweepResult& r, std::ostream& out);

struct ConvergeSpec {
    std::size_t n = 100;
    std::size_t d = 4;
    double c = 0.5;
    std::vector<double> p_values{0.0, 0.1, 1.0};
    std::vector<std::size_t> l_values{100, 1000, 10000};
    std::size_t realizations = 100;
    std::uint64_t seed = 1;
    DynamicsParams dynamics;
    double dt = 1.0;
    std::optional<std::size_t> burn_in;
    double tol = 1e-10;
    std::size_t max_terms = 100000;
    std::string output_path;

    void validate() const;
};

struct ConvergeCell {
    double p = 0.0;
    std::size_t l = 0;
    std::size_t realizations = 0;
    std::size_t valid = 0;
    double mean_rel_error = 0.0;
    double log10_sd = 0.0;         ///< SD of log10(relative error) across realizations
    double mean_log10_error = 0.0;
    std::vector<double> rel_errors; ///< per valid realization
};

/// For each (p, realization) one network; for each L an independent
/// exact-sampler run. Networks outside the synchronizable / convergent
/// domain are discarded. Cells sorted by (p, L).
std::vector<ConvergeCell> run_converge(const ConvergeSpec& spec, std::size_t threads, std::ostream* log = nullptr);

/// Columns p,L,realizations,valid,mean_rel_error,log10_sd,mean_log10_error.
void write_converge_csv(const std::vector<ConvergeCell>& cells, std::ostream& out);

} // namespace linsync
