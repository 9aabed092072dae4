#include "linsync/motifs.hpp"

#include "linsync/errors.hpp"
#include "linsync/format.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace linsync {
namespace {

constexpr double kBlowUp = 1e250;
constexpr std::size_t kMaxDetailNodes = 64;

double max_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Walks through the orders of the expansion. Continuous keeps the symmetric
// binomial average T_m = sum_u w(m,u) (C^u)^T C^{m-u}; discrete keeps C^u.
class OrderStepper {
public:
    OrderStepper(const Eigen::MatrixXd& c, const DynamicsParams& params)
        : c_(c), kind_(params.kind), n_(static_cast<double>(c.rows())),
          pref_(params.kind == DynamicsKind::continuous ? params.zeta * params.zeta / (2.0 * params.theta)
                                                        : params.zeta * params.zeta),
          m_(Eigen::MatrixXd::Identity(c.rows(), c.rows())) {}

    void advance() {
        Eigen::MatrixXd x = m_ * c_;
        if (kind_ == DynamicsKind::continuous) {
            m_ = 0.5 * (x + x.transpose());
        } else {
            m_ = std::move(x);
        }
        ++order_;
    }

    std::size_t order() const { return order_; }

    double closed() const {
        const double t = kind_ == DynamicsKind::continuous ? m_.trace() : m_.squaredNorm();
        return pref_ * t / n_;
    }

    double open() const {
        const double s = kind_ == DynamicsKind::continuous ? m_.sum() : m_.rowwise().sum().squaredNorm();
        return pref_ * s / (n_ * n_);
    }

    double net() const {
        if (kind_ == DynamicsKind::continuous) return pref_ * centered_trace(m_) / n_;
        return pref_ * centered_rows().squaredNorm() / n_;
    }

    // U (term) U for this order, scaled.
    Eigen::MatrixXd centered_term() const {
        if (kind_ == DynamicsKind::continuous) return pref_ * centering_apply(m_);
        const Eigen::MatrixXd pu = centered_rows();
        return pref_ * (pu.transpose() * pu);
    }

private:
    Eigen::MatrixXd centered_rows() const {
        Eigen::MatrixXd pu = m_;
        pu.colwise() -= m_.rowwise().mean();
        return pu;
    }

    const Eigen::MatrixXd& c_;
    DynamicsKind kind_;
    double n_;
    double pref_;
    Eigen::MatrixXd m_;
    std::size_t order_ = 0;
};

void record(MotifLedger& l, const OrderStepper& s) {
    l.order.push_back(s.order());
    l.closed.push_back(s.closed());
    l.open.push_back(s.open());
    l.net.push_back(s.net());
    l.cumulative.push_back((l.cumulative.empty() ? 0.0 : l.cumulative.back()) + l.net.back());
}

bool series_valid(const ConnectivityMatrix& c) {
    try {
        select_regime(c, true);
        return true;
    } catch (const ValidityError&) {
        return false;
    }
}

void check_node(const WalkCountCache& cache, std::size_t v) {
    if (v >= cache.size()) throw std::out_of_range("node index " + std::to_string(v) + " out of range");
}

} // namespace

WalkCountCache::WalkCountCache(const ConnectivityMatrix& c, std::size_t max_order) {
    const auto n = static_cast<Eigen::Index>(c.size());
    powers_.reserve(max_order + 1);
    powers_.push_back(Eigen::MatrixXd::Identity(n, n));
    for (std::size_t m = 1; m <= max_order; ++m) powers_.push_back(powers_.back() * c.weights());
}

const Eigen::MatrixXd& WalkCountCache::power(std::size_t m) const {
    if (m >= powers_.size()) {
        throw std::out_of_range("walk order " + std::to_string(m) + " exceeds cached maximum " +
                                std::to_string(max_order()));
    }
    return powers_[m];
}

double walk_count(const WalkCountCache& cache, std::size_t a, std::size_t b, std::size_t m) {
    check_node(cache, a);
    check_node(cache, b);
    return cache.power(m)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

double dual_walk_count(const WalkCountCache& cache, std::size_t a, std::size_t b, std::size_t m1, std::size_t e,
                       std::size_t m2) {
    return walk_count(cache, a, b, m1) * walk_count(cache, a, e, m2);
}

std::vector<double> binomial_weights(std::size_t m) {
    std::vector<double> w{1.0};
    w.reserve(m + 1);
    for (std::size_t k = 1; k <= m; ++k) {
        w.push_back(0.0);
        for (std::size_t u = k; u > 0; --u) w[u] = 0.5 * (w[u] + w[u - 1]);
        w[0] *= 0.5;
    }
    return w;
}

MotifLedger sigma2_low_order(const ConnectivityMatrix& c, const DynamicsParams& params, std::size_t max_order) {
    params.validate();
    MotifLedger l;
    l.kind = params.kind;
    l.series_valid = series_valid(c);
    OrderStepper s(c.weights(), params);
    record(l, s);
    while (s.order() < max_order) {
        s.advance();
        record(l, s);
    }
    return l;
}

MotifExpansion motif_expansion(const ConnectivityMatrix& c, const DynamicsParams& params,
                               const SeriesOptions& opts) {
    params.validate();
    if (opts.max_terms == 0) throw std::invalid_argument("max_terms must be positive");
    select_regime(c, opts.check_validity);

    MotifExpansion out;
    out.ledger.kind = params.kind;
    out.ledger.series_valid = opts.check_validity || series_valid(c);
    out.estimate.method = SigmaMethod::motif_expansion;

    OrderStepper s(c.weights(), params);
    record(out.ledger, s);
    Eigen::MatrixXd sum = s.centered_term();
    std::size_t used = 1;
    if (c.size() == 1) {
        out.estimate.converged = true;
    }
    while (!out.estimate.converged && used < opts.max_terms) {
        s.advance();
        record(out.ledger, s);
        ++used;
        const Eigen::MatrixXd term = s.centered_term();
        sum += term;
        const double tn = max_norm(term);
        const double sn = max_norm(sum);
        out.estimate.residual = tn;
        if (!std::isfinite(tn) || !std::isfinite(sn) || sn > kBlowUp) break;
        if (tn <= opts.tol * sn) out.estimate.converged = true;
    }
    out.estimate.terms_used = used;
    if (out.estimate.converged) out.estimate.sigma2 = out.ledger.cumulative.back();
    return out;
}

SyncEstimate motif_sigma2_full(const ConnectivityMatrix& c, const DynamicsParams& params,
                               const SeriesOptions& opts) {
    return motif_expansion(c, params, opts).estimate;
}

Eigen::MatrixXd closed_pair_detail(const WalkCountCache& cache, DynamicsKind kind, std::size_t order) {
    if (cache.size() > kMaxDetailNodes) {
        throw std::invalid_argument("pair detail is limited to networks of at most 64 nodes");
    }
    if (kind == DynamicsKind::discrete) return cache.power(order).array().square().matrix();
    cache.power(order);
    const std::vector<double> w = binomial_weights(order);
    const auto n = static_cast<Eigen::Index>(cache.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t u = 0; u <= order; ++u) {
        d.array() += w[u] * cache.power(u).array() * cache.power(order - u).array();
    }
    return d;
}

void write_ledger_csv(const MotifLedger& l, std::ostream& out) {
    out << "order,closed,open,net,cumulative\n";
    for (std::size_t k = 0; k < l.order.size(); ++k) {
        out << l.order[k] << ',' << format_double(l.closed[k]) << ',' << format_double(l.open[k]) << ','
            << format_double(l.net[k]) << ',' << format_double(l.cumulative[k]) << '\n';
    }
}

void write_ledger_csv(const MotifLedger& l, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_ledger_csv(l, f);
    if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

} // namespace linsync
