#include "linsync/synccore.hpp"

#include "linsync/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace linsync {
namespace {

// Partial sums beyond this magnitude are treated as divergent.
constexpr double kBlowUp = 1e250;

double max_norm(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool blown_up(double norm) { return !std::isfinite(norm) || norm > kBlowUp; }

Eigen::MatrixXd centering_matrix(Eigen::Index n) {
    return Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

// Generic accumulation: `next` turns the current term into the next one.
// Returns the sum of terms (unscaled) with bookkeeping.
template <class Next>
ProjectedCovariance accumulate(Eigen::MatrixXd term, const SeriesOptions& opts, Next next) {
    ProjectedCovariance r;
    r.omega_u = term;
    r.terms_used = 1;
    r.residual_norm = max_norm(term);
    while (r.terms_used < opts.max_terms) {
        term = next(term);
        const double tn = max_norm(term);
        r.omega_u += term;
        ++r.terms_used;
        r.residual_norm = tn;
        const double sn = max_norm(r.omega_u);
        if (blown_up(tn) || blown_up(sn)) return r;
        if (tn <= opts.tol * sn) {
            r.converged = true;
            return r;
        }
    }
    return r;
}

double prefactor(const DynamicsParams& p) {
    return p.kind == DynamicsKind::continuous ? p.zeta * p.zeta / (2.0 * p.theta) : p.zeta * p.zeta;
}

// Continuous: S_m = (A^T S_{m-1} + S_{m-1} A) / 2.  Discrete: P_u = P_{u-1} A,
// term P_u^T P_u. `start` is U (projected) or I (unprojected).
ProjectedCovariance raw_series(const Eigen::MatrixXd& a, const Eigen::MatrixXd& start, DynamicsKind kind,
                               const SeriesOptions& opts) {
    if (kind == DynamicsKind::continuous) {
        return accumulate(start, opts, [&a](const Eigen::MatrixXd& s) {
            Eigen::MatrixXd x = s * a;
            return Eigen::MatrixXd(0.5 * (x + x.transpose()));
        });
    }
    Eigen::MatrixXd p = start;
    return accumulate(start, opts, [&a, &p](const Eigen::MatrixXd&) {
        p = p * a;
        return Eigen::MatrixXd(p.transpose() * p);
    });
}

// Fixed point of Omega = (c K + Omega A + A^T Omega) / 2 (continuous) or
// Omega = A^T Omega A + c K (discrete), with K = U or I.
ProjectedCovariance fixed_point(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k, const DynamicsParams& params,
                                const SeriesOptions& opts) {
    const bool cont = params.kind == DynamicsKind::continuous;
    const double c = cont ? params.zeta * params.zeta / params.theta : params.zeta * params.zeta;
    auto step = [&](const Eigen::MatrixXd& om) -> Eigen::MatrixXd {
        if (cont) {
            Eigen::MatrixXd x = om * a;
            return 0.5 * (c * k + x + x.transpose());
        }
        return a.transpose() * om * a + c * k;
    };

    ProjectedCovariance r;
    r.omega_u = cont ? Eigen::MatrixXd(0.5 * c * k) : Eigen::MatrixXd(c * k);
    r.terms_used = 1;
    while (r.terms_used < opts.max_terms) {
        Eigen::MatrixXd next = step(r.omega_u);
        const double change = max_norm(next - r.omega_u);
        r.omega_u = std::move(next);
        ++r.terms_used;
        const double on = max_norm(r.omega_u);
        r.residual_norm = change;
        if (blown_up(change) || blown_up(on)) return r;
        if (change <= opts.tol * on) {
            r.converged = true;
            break;
        }
    }
    if (r.converged) r.residual_norm = max_norm(step(r.omega_u) - r.omega_u);
    return r;
}

struct Setup {
    Regime regime;
    Eigen::MatrixXd a;     // B = C U or C
    Eigen::MatrixXd start; // U or I
};

Setup setup(const ConnectivityMatrix& c, const DynamicsParams& params, const SeriesOptions& opts) {
    params.validate();
    if (opts.max_terms == 0) throw std::invalid_argument("max_terms must be positive");
    if (!(opts.tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
    const Regime regime = select_regime(c, opts.check_validity);
    const auto n = static_cast<Eigen::Index>(c.size());
    if (regime == Regime::projected) return {regime, times_centering(c.weights()), centering_matrix(n)};
    return {regime, c.weights(), Eigen::MatrixXd::Identity(n, n)};
}

// Scales and, for the unprojected regime, centers the accumulated sum.
ProjectedCovariance finish(ProjectedCovariance r, const Setup& s, double scale) {
    r.omega_u *= scale;
    r.residual_norm *= scale;
    if (s.regime == Regime::unprojected) r.omega_u = centering_apply(r.omega_u);
    return r;
}

SyncEstimate from_covariance(const ProjectedCovariance& pc, SigmaMethod method) {
    SyncEstimate e;
    e.method = method;
    e.terms_used = pc.terms_used;
    e.residual = pc.residual_norm;
    e.converged = pc.converged;
    if (pc.converged) {
        e.sigma2 = pc.omega_u.trace() / static_cast<double>(pc.omega_u.rows());
        e.covariance_difference = covariance_difference(pc.omega_u);
    }
    return e;
}

} // namespace

std::string_view to_string(DynamicsKind kind) {
    return kind == DynamicsKind::continuous ? "continuous" : "discrete";
}

std::string_view to_string(SigmaMethod method) {
    switch (method) {
    case SigmaMethod::series: return "series";
    case SigmaMethod::fixed_point: return "fixed_point";
    case SigmaMethod::symmetric_closed_form: return "symmetric_closed_form";
    case SigmaMethod::motif_expansion: return "motif_expansion";
    case SigmaMethod::empirical: return "empirical";
    }
    return "unknown";
}

void DynamicsParams::validate() const {
    if (!(zeta > 0.0) || !std::isfinite(zeta)) throw std::invalid_argument("zeta must be positive and finite");
    if (kind == DynamicsKind::continuous && (!(theta > 0.0) || !std::isfinite(theta))) {
        throw std::invalid_argument("theta must be positive and finite");
    }
}

Regime select_regime(const ConnectivityMatrix& c, bool check) {
    if (psi0_eigenvalue(c)) {
        if (check) {
            const double r = spectral_radius(times_centering(c.weights()));
            if (!(r < 1.0 - kStabilityMargin)) {
                throw ValidityError("rho(CU) = " + std::to_string(r) + " >= 1: projected series diverges");
            }
        }
        return Regime::projected;
    }
    if (check) {
        const double r = spectral_radius(c.weights());
        if (!(r < 1.0 - kStabilityMargin)) {
            throw ValidityError("psi0 is not a left eigenvector and rho(C) = " + std::to_string(r) +
                                " >= 1: covariance series diverges");
        }
    }
    return Regime::unprojected;
}

Eigen::MatrixXd centering_apply(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd r = a;
    r.colwise() -= a.rowwise().mean();
    r.rowwise() -= r.colwise().mean();
    return r;
}

double centered_trace(const Eigen::MatrixXd& a) { return a.trace() - a.sum() / static_cast<double>(a.rows()); }

double covariance_difference(const Eigen::MatrixXd& omega) {
    return omega.diagonal().mean() - omega.mean();
}

ProjectedCovariance omega_u_series(const ConnectivityMatrix& c, const DynamicsParams& params,
                                   const SeriesOptions& opts) {
    const Setup s = setup(c, params, opts);
    return finish(raw_series(s.a, s.start, params.kind, opts), s, prefactor(params));
}

ProjectedCovariance omega_u_fixed_point(const ConnectivityMatrix& c, const DynamicsParams& params,
                                        const SeriesOptions& opts) {
    const Setup s = setup(c, params, opts);
    return finish(fixed_point(s.a, s.start, params, opts), s, 1.0);
}

UnprojectedCovariance omega_unprojected(const ConnectivityMatrix& c, const DynamicsParams& params,
                                        const SeriesOptions& opts) {
    params.validate();
    if (opts.max_terms == 0) throw std::invalid_argument("max_terms must be positive");
    if (opts.check_validity) {
        const double r = spectral_radius(c.weights());
        if (!(r < 1.0 - kStabilityMargin)) {
            throw ValidityError("rho(C) = " + std::to_string(r) + " >= 1: unprojected series diverges");
        }
    }
    const auto n = static_cast<Eigen::Index>(c.size());
    ProjectedCovariance r = raw_series(c.weights(), Eigen::MatrixXd::Identity(n, n), params.kind, opts);
    const double scale = prefactor(params);
    return {r.omega_u * scale, r.terms_used, r.residual_norm * scale, r.converged};
}

SyncEstimate sigma2(const ConnectivityMatrix& c, const DynamicsParams& params, const SeriesOptions& opts,
                    SigmaMethod method) {
    params.validate();
    if (c.size() == 1) {
        SyncEstimate e;
        e.sigma2 = 0.0;
        e.method = method;
        e.converged = true;
        e.covariance_difference = 0.0;
        return e;
    }
    switch (method) {
    case SigmaMethod::series: return from_covariance(omega_u_series(c, params, opts), method);
    case SigmaMethod::fixed_point: return from_covariance(omega_u_fixed_point(c, params, opts), method);
    case SigmaMethod::symmetric_closed_form: {
        const SpectralSummary s = classify(c);
        if (!s.symmetric) throw std::invalid_argument("symmetric_closed_form requires a symmetric matrix");
        if (!s.zero_mode_index) throw ValidityError("symmetric_closed_form requires column sums of 1");
        select_regime(c, opts.check_validity);
        SyncEstimate e;
        e.method = method;
        e.converged = true;
        e.terms_used = c.size() - 1;
        if (params.kind == DynamicsKind::continuous) {
            e.sigma2 = params.zeta * params.zeta / params.theta * sigma2_symmetric_continuous(s);
        } else {
            e.sigma2 = params.zeta * params.zeta * sigma2_symmetric_discrete(s);
        }
        return e;
    }
    case SigmaMethod::motif_expansion:
    case SigmaMethod::empirical:
        break;
    }
    throw std::invalid_argument(std::string("sigma2: method '") + std::string(to_string(method)) +
                                "' is provided by the motifs / simulate modules");
}

} // namespace linsync
