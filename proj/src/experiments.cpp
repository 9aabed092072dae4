#include "linsync/experiments.hpp"

#include "linsync/format.hpp"
#include "linsync/motifs.hpp"
#include "linsync/netgen.hpp"
#include "linsync/rng.hpp"
#include "linsync/simulate.hpp"
#include "linsync/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace linsync {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ColumnStats stats(const std::vector<double>& v) {
    ColumnStats s;
    if (v.empty()) return {kNaN, kNaN};
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) {
        s.sd = kNaN;
        return s;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return s;
}

void check_unit_interval(const std::vector<double>& v, const char* name) {
    if (v.empty()) throw std::invalid_argument(std::string(name) + " must not be empty");
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(name) + " entries must lie in [0, 1]");
    }
}

std::string matrix_key(const ConnectivityMatrix& c) {
    const auto& w = c.weights();
    return std::string(reinterpret_cast<const char*>(w.data()), static_cast<std::size_t>(w.size()) * sizeof(double));
}

// Analytic results shared by identical networks (most sparse rewirings leave
// the ring untouched).
template <class Value>
class Memo {
public:
    template <class Compute>
    Value get(const ConnectivityMatrix& c, Compute compute) {
        const std::string key = matrix_key(c);
        {
            std::lock_guard lock(mu_);
            if (auto it = map_.find(key); it != map_.end()) return it->second;
        }
        Value v = compute();
        std::lock_guard lock(mu_);
        return map_.emplace(key, std::move(v)).first->second;
    }

private:
    std::mutex mu_;
    std::map<std::string, Value> map_;
};

struct NetworkAnalysis {
    double sigma2 = kNaN;
    bool valid = false;
    bool converged = false;
    std::vector<double> sigma2_m;
    double re_lambda1 = kNaN;
    double re_lambda2 = kNaN;
    double rho_cu = kNaN;
};

SyncEstimate analytic_sigma2(const ConnectivityMatrix& net, const DynamicsParams& dyn, double tol,
                             std::size_t max_terms, SigmaMethod method) {
    const SeriesOptions opts{tol, max_terms, false};
    if (method == SigmaMethod::motif_expansion) return motif_sigma2_full(net, dyn, opts);
    return sigma2(net, dyn, opts, method);
}

DynamicsKind parse_kind(const std::string& s) {
    if (s == "continuous") return DynamicsKind::continuous;
    if (s == "discrete") return DynamicsKind::discrete;
    throw std::invalid_argument("dynamics kind must be 'continuous' or 'discrete', got '" + s + "'");
}

SigmaMethod parse_method(const std::string& s) {
    if (s == "series") return SigmaMethod::series;
    if (s == "fixed_point") return SigmaMethod::fixed_point;
    if (s == "motif_expansion") return SigmaMethod::motif_expansion;
    throw std::invalid_argument("sweep method must be series, fixed_point or motif_expansion, got '" + s + "'");
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
            throw std::invalid_argument(std::string("unknown key '") + it.key() + "' in " + where);
        }
    }
}

} // namespace

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::size_t resolve_thread_count(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LINSYNC_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (*end != '\0' || v == 0) throw std::invalid_argument("LINSYNC_THREADS must be a positive integer");
        return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs >= 2 paired points");
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += std::log10(x[k]);
        my += std::log10(y[k]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = std::log10(x[k]) - mx;
        sxy += dx * (std::log10(y[k]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

void SweepSpec::validate() const {
    RingEnsembleParams{n, d, 0.0, 0.0, 0}.validate();
    check_unit_interval(c_values, "c_values");
    check_unit_interval(p_values, "p_values");
    if (realizations == 0) throw std::invalid_argument("realizations must be at least 1");
    if (max_terms == 0) throw std::invalid_argument("max_terms must be positive");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
    if (method != SigmaMethod::series && method != SigmaMethod::fixed_point &&
        method != SigmaMethod::motif_expansion) {
        throw std::invalid_argument("sweep method must be series, fixed_point or motif_expansion");
    }
    dynamics.validate();
}

void apply_sweep_json(const nlohmann::json& j, SweepSpec& s) {
    if (!j.is_object()) throw std::invalid_argument("sweep spec must be a JSON object");
    reject_unknown(j,
                   {"n", "d", "c_values", "p_values", "realizations", "seed", "dynamics", "low_orders",
                    "tolerances", "method", "output_path", "summary_path"},
                   "sweep spec");
    try {
        if (j.contains("n")) s.n = j.at("n").get<std::size_t>();
        if (j.contains("d")) s.d = j.at("d").get<std::size_t>();
        if (j.contains("c_values")) s.c_values = j.at("c_values").get<std::vector<double>>();
        if (j.contains("p_values")) s.p_values = j.at("p_values").get<std::vector<double>>();
        if (j.contains("realizations")) s.realizations = j.at("realizations").get<std::size_t>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("dynamics")) {
            const auto& dj = j.at("dynamics");
            reject_unknown(dj, {"kind", "theta", "zeta"}, "dynamics");
            if (dj.contains("kind")) s.dynamics.kind = parse_kind(dj.at("kind").get<std::string>());
            if (dj.contains("theta")) s.dynamics.theta = dj.at("theta").get<double>();
            if (dj.contains("zeta")) s.dynamics.zeta = dj.at("zeta").get<double>();
        }
        if (j.contains("low_orders")) s.low_orders = j.at("low_orders").get<std::vector<std::size_t>>();
        if (j.contains("tolerances")) {
            const auto& tj = j.at("tolerances");
            reject_unknown(tj, {"tol", "max_terms"}, "tolerances");
            if (tj.contains("tol")) s.tol = tj.at("tol").get<double>();
            if (tj.contains("max_terms")) s.max_terms = tj.at("max_terms").get<std::size_t>();
        }
        if (j.contains("method")) s.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("output_path")) s.output_path = j.at("output_path").get<std::string>();
        if (j.contains("summary_path")) s.summary_path = j.at("summary_path").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("sweep spec: ") + e.what());
    }
}

std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows, std::size_t low_order_count) {
    std::vector<CellSummary> cells;
    std::size_t k = 0;
    while (k < rows.size()) {
        std::size_t end = k;
        while (end < rows.size() && rows[end].p == rows[k].p && rows[end].c == rows[k].c) ++end;
        CellSummary cs;
        cs.p = rows[k].p;
        cs.c = rows[k].c;
        std::vector<double> s2, l1, l2, rho;
        std::vector<std::vector<double>> sm(low_order_count);
        for (std::size_t r = k; r < end; ++r) {
            const SweepRow& row = rows[r];
            ++cs.rows_total;
            if (!row.valid) {
                ++cs.rows_discarded;
                continue;
            }
            ++cs.rows_valid;
            if (!row.converged) {
                ++cs.rows_nonconverged;
                continue;
            }
            s2.push_back(row.sigma2);
            l1.push_back(row.re_lambda1);
            l2.push_back(row.re_lambda2);
            rho.push_back(row.rho_cu);
            for (std::size_t m = 0; m < low_order_count; ++m) sm[m].push_back(row.sigma2_m[m]);
        }
        cs.sigma2 = stats(s2);
        cs.re_lambda1 = stats(l1);
        cs.re_lambda2 = stats(l2);
        cs.rho_cu = stats(rho);
        for (const auto& v : sm) cs.sigma2_m.push_back(stats(v));
        cells.push_back(std::move(cs));
        k = end;
    }
    return cells;
}

SweepResult run_sweep(const SweepSpec& spec, std::size_t threads, std::ostream* log) {
    spec.validate();
    SweepResult result;
    result.spec = spec;
    const std::size_t max_order =
        spec.low_orders.empty() ? 0 : *std::max_element(spec.low_orders.begin(), spec.low_orders.end());
    Memo<NetworkAnalysis> memo;

    for (std::size_t pi = 0; pi < spec.p_values.size(); ++pi) {
        for (std::size_t ci = 0; ci < spec.c_values.size(); ++ci) {
            const std::size_t cell = pi * spec.c_values.size() + ci;
            std::vector<SweepRow> rows(spec.realizations);
            parallel_for(spec.realizations, threads, [&](std::size_t r) {
                SweepRow& row = rows[r];
                row.p = spec.p_values[pi];
                row.c = spec.c_values[ci];
                row.realization_id = r;
                row.seed = split_seed(spec.seed, cell, r);
                const ConnectivityMatrix net = generate_network({spec.n, spec.d, row.c, row.p, row.seed});
                const NetworkAnalysis a = memo.get(net, [&] {
                    NetworkAnalysis out;
                    const SpectralSummary s = classify(net);
                    out.re_lambda1 = s.re_lambda1;
                    out.re_lambda2 = s.re_lambda2;
                    out.rho_cu = s.rho_cu;
                    out.valid = projected_series_valid(s);
                    out.sigma2_m.assign(spec.low_orders.size(), kNaN);
                    if (!out.valid) return out;
                    const SyncEstimate e = analytic_sigma2(net, spec.dynamics, spec.tol, spec.max_terms, spec.method);
                    out.converged = e.converged;
                    out.sigma2 = e.sigma2;
                    const MotifLedger l = sigma2_low_order(net, spec.dynamics, max_order);
                    for (std::size_t m = 0; m < spec.low_orders.size(); ++m) {
                        out.sigma2_m[m] = l.cumulative[spec.low_orders[m]];
                    }
                    return out;
                });
                row.sigma2 = a.sigma2;
                row.sigma2_m = a.sigma2_m;
                row.re_lambda1 = a.re_lambda1;
                row.re_lambda2 = a.re_lambda2;
                row.rho_cu = a.rho_cu;
                row.valid = a.valid;
                row.converged = a.converged;
            });
            if (log != nullptr) {
                const CellSummary cs = summarize(rows, spec.low_orders.size()).front();
                *log << "cell p=" << format_double(cs.p) << " c=" << format_double(cs.c) << ": "
                     << cs.rows_valid << "/" << cs.rows_total << " valid, " << cs.rows_nonconverged
                     << " nonconverged, mean sigma2 " << format_double(cs.sigma2.mean) << '\n';
            }
            result.rows.insert(result.rows.end(), rows.begin(), rows.end());
        }
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.p != b.p) return a.p < b.p;
        if (a.c != b.c) return a.c < b.c;
        return a.realization_id < b.realization_id;
    });
    result.cells = summarize(result.rows, spec.low_orders.size());
    return result;
}

void write_sweep_rows_csv(const SweepResult& r, std::ostream& out) {
    out << "p,c,realization_id,seed,sigma2";
    for (auto m : r.spec.low_orders) out << ",sigma2_M" << m;
    out << ",re_lambda1,re_lambda2,rho_cu,valid,converged\n";
    for (const auto& row : r.rows) {
        out << format_double(row.p) << ',' << format_double(row.c) << ',' << row.realization_id << ',' << row.seed
            << ',' << format_double(row.sigma2);
        for (double v : row.sigma2_m) out << ',' << format_double(v);
        out << ',' << format_double(row.re_lambda1) << ',' << format_double(row.re_lambda2) << ','
            << format_double(row.rho_cu) << ',' << (row.valid ? 1 : 0) << ',' << (row.converged ? 1 : 0) << '\n';
    }
}

void write_sweep_summary_csv(const SweepResult& r, std::ostream& out) {
    out << "p,c,rows_total,rows_valid,rows_discarded,rows_nonconverged,mean_sigma2,sd_sigma2";
    for (auto m : r.spec.low_orders) out << ",mean_sigma2_M" << m << ",sd_sigma2_M" << m;
    out << ",mean_re_lambda1,sd_re_lambda1,mean_re_lambda2,sd_re_lambda2,mean_rho_cu,sd_rho_cu\n";
    auto put = [&out](const ColumnStats& s) { out << ',' << format_double(s.mean) << ',' << format_double(s.sd); };
    for (const auto& c : r.cells) {
        out << format_double(c.p) << ',' << format_double(c.c) << ',' << c.rows_total << ',' << c.rows_valid << ','
            << c.rows_discarded << ',' << c.rows_nonconverged;
        put(c.sigma2);
        for (const auto& s : c.sigma2_m) put(s);
        put(c.re_lambda1);
        put(c.re_lambda2);
        put(c.rho_cu);
        out << '\n';
    }
}

void ConvergeSpec::validate() const {
    RingEnsembleParams{n, d, c, 0.0, 0}.validate();
    check_unit_interval(p_values, "p_values");
    if (l_values.empty()) throw std::invalid_argument("L values must not be empty");
    for (auto l : l_values) {
        if (l == 0) throw std::invalid_argument("L values must be positive");
    }
    if (realizations == 0) throw std::invalid_argument("realizations must be at least 1");
    if (max_terms == 0) throw std::invalid_argument("max_terms must be positive");
    dynamics.validate();
    if (dynamics.kind == DynamicsKind::continuous && !(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

std::vector<ConvergeCell> run_converge(const ConvergeSpec& spec, std::size_t threads, std::ostream* log) {
    spec.validate();
    const std::size_t np = spec.p_values.size();
    const std::size_t nl = spec.l_values.size();
    const std::size_t nr = spec.realizations;
    // errors[(pi * nr + r) * nl + li]; NaN marks a discarded network.
    std::vector<double> errors(np * nr * nl, kNaN);
    Memo<SyncEstimate> memo;

    parallel_for(np * nr, threads, [&](std::size_t task) {
        const std::size_t pi = task / nr;
        const std::size_t r = task % nr;
        const std::uint64_t net_seed = split_seed(spec.seed, pi, r);
        const ConnectivityMatrix net = generate_network({spec.n, spec.d, spec.c, spec.p_values[pi], net_seed});
        const SyncEstimate exact = memo.get(net, [&] {
            const SpectralSummary s = classify(net);
            const bool sync = spec.dynamics.kind == DynamicsKind::continuous ? s.sync_continuous : s.sync_discrete;
            if (!projected_series_valid(s) || !sync) return SyncEstimate{};
            return sigma2(net, spec.dynamics, {spec.tol, spec.max_terms, false});
        });
        if (!exact.converged) return;
        for (std::size_t li = 0; li < nl; ++li) {
            SimulationConfig cfg;
            cfg.params = spec.dynamics;
            cfg.dt = spec.dt;
            cfg.burn_in = spec.burn_in;
            cfg.samples = spec.l_values[li];
            cfg.seed = split_seed(net_seed, li + 1);
            StateSampler sampler(net, cfg);
            sampler.burn();
            double sum = 0.0;
            for (std::size_t k = 0; k < cfg.samples; ++k) {
                sampler.step();
                sum += row_sigma2(sampler.state());
            }
            const double empirical = sum / static_cast<double>(cfg.samples);
            errors[task * nl + li] = std::abs(exact.sigma2 - empirical) / exact.sigma2;
        }
    });

    std::vector<ConvergeCell> cells;
    for (std::size_t pi = 0; pi < np; ++pi) {
        for (std::size_t li = 0; li < nl; ++li) {
            ConvergeCell cell;
            cell.p = spec.p_values[pi];
            cell.l = spec.l_values[li];
            cell.realizations = nr;
            std::vector<double> logs;
            for (std::size_t r = 0; r < nr; ++r) {
                const double e = errors[(pi * nr + r) * nl + li];
                if (std::isnan(e)) continue;
                cell.rel_errors.push_back(e);
                // An exact zero error cannot occur in floating point practice;
                // guard the logarithm anyway.
                logs.push_back(std::log10(std::max(e, std::numeric_limits<double>::min())));
            }
            cell.valid = cell.rel_errors.size();
            const ColumnStats es = stats(cell.rel_errors);
            const ColumnStats ls = stats(logs);
            cell.mean_rel_error = es.mean;
            cell.log10_sd = ls.sd;
            cell.mean_log10_error = ls.mean;
            if (log != nullptr) {
                *log << "cell p=" << format_double(cell.p) << " L=" << cell.l << ": " << cell.valid << "/" << nr
                     << " valid, mean relative error " << format_double(cell.mean_rel_error) << '\n';
            }
            cells.push_back(std::move(cell));
        }
    }
    std::stable_sort(cells.begin(), cells.end(), [](const ConvergeCell& a, const ConvergeCell& b) {
        return a.p != b.p ? a.p < b.p : a.l < b.l;
    });
    return cells;
}

void write_converge_csv(const std::vector<ConvergeCell>& cells, std::ostream& out) {
    out << "p,L,realizations,valid,mean_rel_error,log10_sd,mean_log10_error\n";
    for (const auto& c : cells) {
        out << format_double(c.p) << ',' << c.l << ',' << c.realizations << ',' << c.valid << ','
            << format_double(c.mean_rel_error) << ',' << format_double(c.log10_sd) << ','
            << format_double(c.mean_log10_error) << '\n';
    }
}

} // namespace linsync
