#pragma once

#include "linsync/netgen.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace linsync {

using Complex = std::complex<double>;

/// Eigenvalues, spectral radii and radii must clear 1 by this margin before a
/// network counts as synchronizable / inside the series validity domain.
/// Separates genuine stability from round-off on marginal spectra (e.g. a
/// disconnected network whose second unit eigenvalue computes as 1 - 1e-16).
inline constexpr double kStabilityMargin = 1e-10;

/// Left eigenvector of a candidate zero mode must satisfy
/// |<v, psi0>| / (|v| |psi0|) >= 1 - kZeroModeDirectionTol.
inline constexpr double kZeroModeDirectionTol = 1e-6;

struct SpectralSummary {
    std::vector<Complex> eigenvalues;
    std::optional<std::size_t> zero_mode_index;
    /// Largest and second-largest real parts after zero-mode exclusion
    /// (duplicates kept). NaN when fewer eigenvalues remain.
    double re_lambda1 = 0.0;
    double re_lambda2 = 0.0;
    double rho_cu = 0.0; ///< spectral radius of C U
    double rho_c = 0.0;  ///< spectral radius of C
    bool sync_continuous = false; ///< max Re(lambda) < 1 off the zero mode
    bool sync_discrete = false;   ///< max |lambda| < 1 off the zero mode
    bool symmetric = false;

    /// Eigenvalues with the zero mode (if identified) removed.
    std::vector<Complex> non_zero_mode() const;
};

/// All n eigenvalues of a real square matrix via Hessenberg reduction and
/// shifted QR. Order is deterministic for a given input. Throws
/// NumericalError if the QR iteration exhausts its budget.
std::vector<Complex> eigenvalues(const Eigen::MatrixXd& a);
std::vector<Complex> eigenvalues(const ConnectivityMatrix& c);

double spectral_radius(const Eigen::MatrixXd& a);

/// C U, i.e. C with each row's mean subtracted.
Eigen::MatrixXd times_centering(const Eigen::MatrixXd& c);

/// Identifies the zero mode (only when psi0 C = psi0 within `tol`), the
/// synchronization verdicts and the extremal-eigenvalue heuristics. Throws
/// NumericalError when two distinct eigenvectors both match psi0.
SpectralSummary classify(const ConnectivityMatrix& c, double tol = kDefaultZeroModeTol);

/// True iff the summary's rho(C U) lies strictly inside the unit disc
/// (less kStabilityMargin). This is the validity domain of the projected
/// covariance series for networks with a zero mode.
bool projected_series_valid(const SpectralSummary& s);

// Symmetric closed forms (theta = zeta = 1). `eigenvalues` is the full
// spectrum of C including the zero-mode eigenvalue 1; the entry nearest 1
// is removed before summing. Throw ValidityError when no eigenvalue lies
// within 1e-6 of 1 and DivergenceError at a pole.

/// (1 / 2N) * sum_{lambda != lambda0} 1 / (1 - lambda).
double sigma2_symmetric_continuous(std::span<const double> eigenvalues, std::size_t n);
/// (1 / N) * sum_{lambda != lambda0} 1 / (1 - lambda^2).
double sigma2_symmetric_discrete(std::span<const double> eigenvalues, std::size_t n);
/// Kemeny's constant sum_{lambda != lambda0} 1 / (1 - lambda) of a symmetric
/// stochastic matrix. sigma2_symmetric_continuous is exactly K / (2N).
double kemeny_constant(std::span<const double> eigenvalues, std::size_t n);

/// Summary overloads; require a symmetric matrix with an identified zero mode.
double sigma2_symmetric_continuous(const SpectralSummary& s);
double sigma2_symmetric_discrete(const SpectralSummary& s);
double kemeny_constant(const SpectralSummary& s);

} // namespace linsync
