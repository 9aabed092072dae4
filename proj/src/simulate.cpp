#include "linsync/simulate.hpp"

#include "linsync/errors.hpp"
#include "linsync/format.hpp"
#include "linsync/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace linsync {
namespace {

constexpr double kClipTol = 1e-12;
constexpr double kLyapunovTol = 1e-8;
// Van Loan is applied at a step where |M| h <= this, then doubled back up.
constexpr double kVanLoanStepNorm = 0.5;

void require_sync(const SpectralSummary& s, DynamicsKind kind) {
    const bool ok = kind == DynamicsKind::continuous ? s.sync_continuous : s.sync_discrete;
    if (!ok) {
        throw ValidityError(std::string("network is not synchronizable under ") + std::string(to_string(kind)) +
                            " dynamics; the simulation would diverge off the zero mode");
    }
}

std::size_t burn_in_from(const SpectralSummary& s, const DynamicsParams& params, double dt) {
    double r = 0.0;
    for (const auto& l : s.non_zero_mode()) {
        const double f = params.kind == DynamicsKind::continuous
                             ? std::exp(-params.theta * (1.0 - l.real()) * dt)
                             : std::abs(l);
        r = std::max(r, f);
    }
    const double steps = 10.0 * std::ceil(1.0 / (1.0 - r));
    if (!(steps < static_cast<double>(kMaxBurnIn))) return kMaxBurnIn;
    return static_cast<std::size_t>(steps);
}

} // namespace

void SimulationConfig::validate() const {
    params.validate();
    if (params.kind == DynamicsKind::continuous && !(dt > 0.0 && std::isfinite(dt))) {
        throw std::invalid_argument("dt must be positive and finite");
    }
    if (samples == 0) throw std::invalid_argument("samples must be at least 1");
    if (initial_state && !initial_state->allFinite()) throw std::invalid_argument("initial state must be finite");
}

OuPropagator ou_propagator(const ConnectivityMatrix& c, const DynamicsParams& params, double dt) {
    params.validate();
    if (!(dt > 0.0 && std::isfinite(dt))) throw std::invalid_argument("dt must be positive and finite");
    const auto n = static_cast<Eigen::Index>(c.size());
    const double z2 = params.zeta * params.zeta;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd m = params.theta * (id - c.weights());

    const double norm = m.cwiseAbs().colwise().sum().maxCoeff() * dt;
    int doublings = 0;
    if (norm > kVanLoanStepNorm) doublings = static_cast<int>(std::ceil(std::log2(norm / kVanLoanStepNorm)));
    const double h = std::ldexp(dt, -doublings);

    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = m.transpose() * h;
    block.topRightCorner(n, n) = z2 * h * id;
    block.bottomRightCorner(n, n) = -m * h;
    const Eigen::MatrixXd e = block.exp();

    OuPropagator p;
    p.a = e.bottomRightCorner(n, n);
    p.q = p.a.transpose() * e.topRightCorner(n, n);
    for (int k = 0; k < doublings; ++k) {
        p.q = p.q + p.a.transpose() * p.q * p.a;
        p.a = p.a * p.a;
    }
    p.q = 0.5 * (p.q + p.q.transpose());

    const Eigen::MatrixXd mq = m.transpose() * p.q;
    const Eigen::MatrixXd lyap = mq + mq.transpose() - z2 * (id - p.a.transpose() * p.a);
    const double scale = std::max(z2, mq.cwiseAbs().maxCoeff());
    p.lyapunov_residual = lyap.cwiseAbs().maxCoeff() / scale;
    if (!(p.lyapunov_residual <= kLyapunovTol)) {
        throw NumericalError("noise covariance fails the Lyapunov check (relative residual " +
                             std::to_string(p.lyapunov_residual) + ")");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.q);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the noise covariance failed");
    Eigen::VectorXd d = es.eigenvalues();
    const double qnorm = d.cwiseAbs().maxCoeff();
    if (d.minCoeff() < -kClipTol * qnorm) {
        throw NumericalError("noise covariance is indefinite (eigenvalue " + std::to_string(d.minCoeff()) + ")");
    }
    d = d.cwiseMax(0.0);
    p.noise_factor = d.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return p;
}

std::size_t default_burn_in(const ConnectivityMatrix& c, const DynamicsParams& params, double dt) {
    const SpectralSummary s = classify(c);
    require_sync(s, params.kind);
    return burn_in_from(s, params, dt);
}

StateSampler::StateSampler(const ConnectivityMatrix& c, const SimulationConfig& config)
    : continuous_(config.params.kind == DynamicsKind::continuous), zeta_(config.params.zeta), rng_(config.seed) {
    config.validate();
    const auto n = static_cast<Eigen::Index>(c.size());
    const SpectralSummary s = classify(c);
    require_sync(s, config.params.kind);
    burn_in_ = config.burn_in ? *config.burn_in : burn_in_from(s, config.params, config.dt);

    if (continuous_) {
        OuPropagator p = ou_propagator(c, config.params, config.dt);
        a_ = std::move(p.a);
        noise_ = std::move(p.noise_factor);
    } else {
        a_ = c.weights();
    }
    if (config.initial_state) {
        if (config.initial_state->size() != n) throw std::invalid_argument("initial state has the wrong length");
        x_ = *config.initial_state;
    } else {
        x_ = Eigen::RowVectorXd::Zero(n);
    }
    z_.resize(n);
}

void StateSampler::step() {
    for (Eigen::Index i = 0; i < z_.size(); ++i) z_[i] = normal_(rng_);
    if (continuous_) {
        x_ = x_ * a_ + z_ * noise_;
    } else {
        x_ = x_ * a_ + zeta_ * z_;
    }
}

void StateSampler::burn() {
    for (std::size_t k = 0; k < burn_in_; ++k) step();
}

TimeSeriesBatch simulate(const ConnectivityMatrix& c, const SimulationConfig& config) {
    StateSampler sampler(c, config);
    sampler.burn();
    TimeSeriesBatch b;
    b.config = config;
    b.burn_in_used = sampler.burn_in();
    b.data.resize(static_cast<Eigen::Index>(config.samples), static_cast<Eigen::Index>(c.size()));
    for (Eigen::Index k = 0; k < b.data.rows(); ++k) {
        sampler.step();
        b.data.row(k) = sampler.state();
    }
    if (!b.data.allFinite()) throw NumericalError("simulation produced non-finite states");
    return b;
}

TimeSeriesBatch simulate_ou_exact(const ConnectivityMatrix& c, const SimulationConfig& config) {
    if (config.params.kind != DynamicsKind::continuous) {
        throw std::invalid_argument("simulate_ou_exact needs continuous dynamics");
    }
    return simulate(c, config);
}

TimeSeriesBatch simulate_var(const ConnectivityMatrix& c, const SimulationConfig& config) {
    if (config.params.kind != DynamicsKind::discrete) throw std::invalid_argument("simulate_var needs discrete dynamics");
    return simulate(c, config);
}

double row_sigma2(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    return (x.array() - x.mean()).square().mean();
}

SyncEstimate empirical_sigma2(const Eigen::MatrixXd& data) {
    if (data.rows() == 0) throw std::invalid_argument("empirical_sigma2 needs at least one sample");
    const Eigen::Index l = data.rows();
    Eigen::VectorXd v(l);
    for (Eigen::Index k = 0; k < l; ++k) v[k] = row_sigma2(data.row(k));
    SyncEstimate e;
    e.method = SigmaMethod::empirical;
    e.sigma2 = v.mean();
    e.terms_used = static_cast<std::size_t>(l);
    e.converged = true;
    if (l > 1) {
        const double var = (v.array() - e.sigma2).square().sum() / static_cast<double>(l - 1);
        e.standard_error = std::sqrt(var / static_cast<double>(l));
    }
    return e;
}

SyncEstimate empirical_sigma2(const TimeSeriesBatch& batch) { return empirical_sigma2(batch.data); }

void write_timeseries_csv(const TimeSeriesBatch& b, std::ostream& out) {
    const bool cont = b.config.params.kind == DynamicsKind::continuous;
    out << 't';
    for (Eigen::Index i = 0; i < b.data.cols(); ++i) out << ",x" << (i + 1);
    out << '\n';
    for (Eigen::Index k = 0; k < b.data.rows(); ++k) {
        const double t = cont ? static_cast<double>(k) * b.config.dt : static_cast<double>(k);
        out << format_double(t);
        for (Eigen::Index i = 0; i < b.data.cols(); ++i) out << ',' << format_double(b.data(k, i));
        out << '\n';
    }
}

void write_timeseries_csv(const TimeSeriesBatch& b, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_timeseries_csv(b, f);
    if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

} // namespace linsync
