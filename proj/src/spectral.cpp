#include "linsync/spectral.hpp"

#include "linsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace linsync {
namespace {

constexpr double kPoleTol = 1e-12;
constexpr double kUnitEigenvalueTol = 1e-6;

void require_converged(Eigen::ComputationInfo info, Eigen::Index n) {
    if (info != Eigen::Success) {
        throw NumericalError("QR iteration for the eigenvalues of a " + std::to_string(n) + "x" +
                             std::to_string(n) + " matrix did not converge");
    }
}

std::vector<double> drop_zero_mode(std::span<const double> eigs, std::size_t n) {
    if (eigs.size() != n) throw std::invalid_argument("eigenvalue count does not match n");
    if (eigs.empty()) throw ValidityError("empty spectrum");
    std::size_t best = 0;
    for (std::size_t k = 1; k < eigs.size(); ++k) {
        if (std::abs(eigs[k] - 1.0) < std::abs(eigs[best] - 1.0)) best = k;
    }
    if (std::abs(eigs[best] - 1.0) > kUnitEigenvalueTol) {
        throw ValidityError("no zero-mode eigenvalue 1 in the spectrum");
    }
    std::vector<double> rest;
    rest.reserve(eigs.size() - 1);
    for (std::size_t k = 0; k < eigs.size(); ++k) {
        if (k != best) rest.push_back(eigs[k]);
    }
    return rest;
}

// sum 1 / (1 - lambda) over the non-zero-mode eigenvalues.
double inverse_gap_sum(const std::vector<double>& rest) {
    double k = 0.0;
    for (double l : rest) {
        if (l >= 1.0 - kPoleTol) {
            throw DivergenceError("eigenvalue " + std::to_string(l) + " >= 1 off the zero mode: sum diverges");
        }
        k += 1.0 / (1.0 - l);
    }
    return k;
}

double inverse_gap_sum_squared(const std::vector<double>& rest) {
    double s = 0.0;
    for (double l : rest) {
        if (std::abs(l) >= 1.0 - kPoleTol) {
            throw DivergenceError("eigenvalue " + std::to_string(l) + " with |lambda| >= 1 off the zero mode: sum diverges");
        }
        s += 1.0 / (1.0 - l * l);
    }
    return s;
}

std::vector<double> symmetric_rest(const SpectralSummary& s) {
    if (!s.symmetric) throw std::invalid_argument("closed form requires a symmetric matrix");
    if (!s.zero_mode_index) throw ValidityError("closed form requires a zero mode");
    std::vector<double> rest;
    for (const auto& l : s.non_zero_mode()) rest.push_back(l.real());
    return rest;
}

} // namespace

std::vector<Complex> SpectralSummary::non_zero_mode() const {
    std::vector<Complex> out;
    out.reserve(eigenvalues.size());
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        if (!zero_mode_index || *zero_mode_index != k) out.push_back(eigenvalues[k]);
    }
    return out;
}

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& a) {
    if (a.rows() == 0 || a.rows() != a.cols()) throw std::invalid_argument("eigenvalues: matrix must be square and non-empty");
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
    require_converged(es.info(), a.rows());
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

std::vector<Complex> eigenvalues(const ConnectivityMatrix& c) { return eigenvalues(c.weights()); }

double spectral_radius(const Eigen::MatrixXd& a) {
    double r = 0.0;
    for (const auto& l : eigenvalues(a)) r = std::max(r, std::abs(l));
    return r;
}

Eigen::MatrixXd times_centering(const Eigen::MatrixXd& c) {
    Eigen::MatrixXd out = c;
    out.colwise() -= c.rowwise().mean();
    return out;
}

SpectralSummary classify(const ConnectivityMatrix& c, double tol) {
    const Eigen::MatrixXd& w = c.weights();
    const Eigen::Index n = w.rows();
    const bool zero_mode = check_zero_mode(c, tol).has_zero_mode;

    SpectralSummary s;
    // Left eigenvectors of C are right eigenvectors of C^T; the spectrum is shared.
    Eigen::EigenSolver<Eigen::MatrixXd> es(w.transpose(), /*computeEigenvectors=*/zero_mode);
    require_converged(es.info(), n);
    s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);

    if (zero_mode) {
        std::vector<std::size_t> matches;
        const auto& vecs = es.eigenvectors();
        const double root_n = std::sqrt(static_cast<double>(n));
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::abs(s.eigenvalues[k] - 1.0) > kUnitEigenvalueTol) continue;
            const double norm = vecs.col(k).norm();
            if (norm == 0.0) continue;
            const double cosine = std::abs(vecs.col(k).sum()) / (norm * root_n);
            if (cosine >= 1.0 - kZeroModeDirectionTol) matches.push_back(static_cast<std::size_t>(k));
        }
        if (matches.size() > 1) {
            throw NumericalError("ambiguous zero mode: " + std::to_string(matches.size()) +
                                 " left eigenvectors match psi0 within tolerance");
        }
        if (matches.size() == 1) {
            s.zero_mode_index = matches.front();
        } else {
            // Degenerate unit eigenspace (e.g. C = I): any basis vector may be
            // returned, so fall back to the eigenvalue nearest 1.
            std::size_t best = 0;
            for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) {
                if (std::abs(s.eigenvalues[k] - 1.0) < std::abs(s.eigenvalues[best] - 1.0)) best = k;
            }
            s.zero_mode_index = best;
        }
    }

    std::vector<double> re;
    double max_abs = 0.0;
    for (const auto& l : s.non_zero_mode()) {
        re.push_back(l.real());
        max_abs = std::max(max_abs, std::abs(l));
    }
    std::sort(re.begin(), re.end(), std::greater<>());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.re_lambda1 = re.size() > 0 ? re[0] : nan;
    s.re_lambda2 = re.size() > 1 ? re[1] : nan;
    s.sync_continuous = re.empty() || re.front() < 1.0 - kStabilityMargin;
    s.sync_discrete = max_abs < 1.0 - kStabilityMargin;

    for (const auto& l : s.eigenvalues) s.rho_c = std::max(s.rho_c, std::abs(l));
    s.rho_cu = spectral_radius(times_centering(w));

    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    s.symmetric = (w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    return s;
}

bool projected_series_valid(const SpectralSummary& s) { return s.rho_cu < 1.0 - kStabilityMargin; }

double sigma2_symmetric_continuous(std::span<const double> eigs, std::size_t n) {
    return kemeny_constant(eigs, n) / (2.0 * static_cast<double>(n));
}

double sigma2_symmetric_discrete(std::span<const double> eigs, std::size_t n) {
    return inverse_gap_sum_squared(drop_zero_mode(eigs, n)) / static_cast<double>(n);
}

double kemeny_constant(std::span<const double> eigs, std::size_t n) {
    return inverse_gap_sum(drop_zero_mode(eigs, n));
}

double sigma2_symmetric_continuous(const SpectralSummary& s) {
    return kemeny_constant(s) / (2.0 * static_cast<double>(s.eigenvalues.size()));
}

double sigma2_symmetric_discrete(const SpectralSummary& s) {
    return inverse_gap_sum_squared(symmetric_rest(s)) / static_cast<double>(s.eigenvalues.size());
}

double kemeny_constant(const SpectralSummary& s) { return inverse_gap_sum(symmetric_rest(s)); }

} // namespace linsync
