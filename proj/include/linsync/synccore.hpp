#pragma once

#include "linsync/netgen.hpp"
#include "linsync/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <string_view>

namespace linsync {

enum class DynamicsKind { continuous, discrete };

std::string_view to_string(DynamicsKind kind);

struct DynamicsParams {
    DynamicsKind kind = DynamicsKind::continuous;
    double theta = 1.0; ///< reversion rate; ignored for discrete dynamics
    double zeta = 1.0;  ///< noise strength

    /// Throws std::invalid_argument unless zeta > 0 and (continuous) theta > 0.
    void validate() const;

    static DynamicsParams continuous(double theta = 1.0, double zeta = 1.0) {
        return {DynamicsKind::continuous, theta, zeta};
    }
    static DynamicsParams discrete(double zeta = 1.0) { return {DynamicsKind::discrete, 1.0, zeta}; }
};

struct SeriesOptions {
    double tol = 1e-10;
    std::size_t max_terms = 10000;
    /// When false the caller vouches for validity (or wants to watch a
    /// divergent series fail); no eigenvalue check is made.
    bool check_validity = true;
};

/// How the covariance is assembled for a given C.
enum class Regime {
    projected,   ///< psi0 is a left eigenvector: powers of B = C U, needs rho(C U) < 1
    unprojected, ///< otherwise: raw powers of C, needs rho(C) < 1, centered at the end
};

/// Picks the regime and, if `check`, verifies its convergence condition.
/// Throws ValidityError naming the offending spectral radius.
Regime select_regime(const ConnectivityMatrix& c, bool check = true);

struct ProjectedCovariance {
    Eigen::MatrixXd omega_u;
    std::size_t terms_used = 0;
    double residual_norm = 0.0; ///< max-norm of the last included term / update
    bool converged = false;
};

struct UnprojectedCovariance {
    Eigen::MatrixXd omega;
    std::size_t terms_used = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

enum class SigmaMethod { series, fixed_point, symmetric_closed_form, motif_expansion, empirical };

std::string_view to_string(SigmaMethod method);

struct SyncEstimate {
    /// NaN when the computation did not converge.
    double sigma2 = std::numeric_limits<double>::quiet_NaN();
    SigmaMethod method = SigmaMethod::fixed_point;
    std::size_t terms_used = 0;
    double residual = 0.0;
    bool converged = false;
    /// Standard error of the mean; only meaningful for empirical estimates.
    double standard_error = std::numeric_limits<double>::quiet_NaN();
    /// Mean diagonal of Omega_U minus mean of all its entries (NaN when no
    /// covariance matrix was formed).
    double covariance_difference = std::numeric_limits<double>::quiet_NaN();
};

/// U A U with U = I - G, by row and column mean subtraction.
Eigen::MatrixXd centering_apply(const Eigen::MatrixXd& a);

/// trace(U A U) = sum_i A_ii - (1/n) sum_ij A_ij.
double centered_trace(const Eigen::MatrixXd& a);

/// Mean of the diagonal minus mean of all entries.
double covariance_difference(const Eigen::MatrixXd& omega);

ProjectedCovariance omega_u_series(const ConnectivityMatrix& c, const DynamicsParams& params,
                                   const SeriesOptions& opts = {});

/// Iterates the stationarity recurrence from a scaled U until successive
/// iterates differ by at most tol * |Omega| in max-norm. max_terms caps the
/// iteration count.
ProjectedCovariance omega_u_fixed_point(const ConnectivityMatrix& c, const DynamicsParams& params,
                                        const SeriesOptions& opts = {});

/// Covariance of the unprojected state; requires rho(C) < 1.
UnprojectedCovariance omega_unprojected(const ConnectivityMatrix& c, const DynamicsParams& params,
                                        const SeriesOptions& opts = {});

/// trace(Omega_U) / N by the chosen method (series, fixed_point or
/// symmetric_closed_form). n = 1 gives 0.
SyncEstimate sigma2(const ConnectivityMatrix& c, const DynamicsParams& params, const SeriesOptions& opts = {},
                    SigmaMethod method = SigmaMethod::fixed_point);

} // namespace linsync
