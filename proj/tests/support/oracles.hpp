#pragma once

// Test-side oracles and random network generators. Everything here is
// deliberately independent of the library's algorithms: dense Kronecker
// solves instead of series, fundamental matrices instead of eigenvalue sums,
// explicit enumeration instead of matrix powers.

#include "linsync/netgen.hpp"
#include "linsync/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;

inline MatrixXd centering(Eigen::Index n) {
    return MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

inline double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Largest eigenvalue modulus via the characteristic roots of a dense solver
/// in Eigen's complex Schur path (independent of the real EigenSolver).
inline double spectral_radius(const MatrixXd& a) {
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<std::complex<double>>());
    return schur.matrixT().diagonal().cwiseAbs().maxCoeff();
}

enum class Shape { symmetric_nonneg, symmetric_signed, general_nonneg, general_signed };

/// Random matrix with every column summing to 1 (so psi0 is a left
/// eigenvector with eigenvalue 1), of the requested shape.
inline MatrixXd random_column_stochastic(Eigen::Index n, Shape shape, linsync::Rng& rng, double density = 0.6) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> upm(-1.0, 1.0);
    const bool signed_w = shape == Shape::symmetric_signed || shape == Shape::general_signed;
    auto draw = [&] {
        if (u01(rng) > density) return 0.0;
        return signed_w ? upm(rng) : u01(rng);
    };
    MatrixXd w = MatrixXd::Zero(n, n);
    if (shape == Shape::symmetric_nonneg || shape == Shape::symmetric_signed) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) w(i, j) = w(j, i) = draw();
        }
        if (shape == Shape::symmetric_nonneg) {
            const double m = w.rowwise().sum().maxCoeff();
            if (m > 1.0) w /= m;
        }
        const Eigen::VectorXd rs = w.rowwise().sum();
        for (Eigen::Index i = 0; i < n; ++i) w(i, i) = 1.0 - rs[i];
        return w;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) w(i, j) = draw();
    }
    const Eigen::RowVectorXd cs = w.colwise().sum();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (shape == Shape::general_nonneg) {
            if (cs[j] > 0.0) {
                w.col(j) /= cs[j];
            } else {
                w.col(j).setConstant(1.0 / static_cast<double>(n));
            }
        } else {
            w.col(j).array() += (1.0 - cs[j]) / static_cast<double>(n);
        }
    }
    return w;
}

/// C = G + alpha (P - G) with rho(C U) = target. Column sums stay 1 and the
/// shape (symmetry, sign) of P carries over. Returns an empty matrix if P U
/// happens to be nilpotent.
inline MatrixXd scaled_to_radius(const MatrixXd& p, double target) {
    const Eigen::Index n = p.rows();
    const MatrixXd g = MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    const double r = spectral_radius(p * centering(n));
    if (r < 1e-8) return {};
    return g + (target / r) * (p - g);
}

/// Random network with zero mode and rho(C U) = target.
inline linsync::ConnectivityMatrix random_zero_mode_network(Eigen::Index n, Shape shape, double target,
                                                            linsync::Rng& rng) {
    for (;;) {
        MatrixXd c = scaled_to_radius(random_column_stochastic(n, shape, rng), target);
        if (c.size() != 0) return linsync::ConnectivityMatrix(std::move(c));
    }
}

/// Random network without a zero mode (unequal column sums) and rho(C) = target.
inline linsync::ConnectivityMatrix random_contracting_network(Eigen::Index n, bool signed_w, double target,
                                                              linsync::Rng& rng) {
    std::uniform_real_distribution<double> u(signed_w ? -1.0 : 0.0, 1.0);
    for (;;) {
        MatrixXd c(n, n);
        for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
        const double r = spectral_radius(c);
        if (r < 1e-8) continue;
        c *= target / r;
        const Eigen::RowVectorXd cs = c.colwise().sum();
        if ((cs.array() - cs.mean()).abs().maxCoeff() < 1e-6) continue;
        return linsync::ConnectivityMatrix(std::move(c));
    }
}

/// Omega_U from the stationarity equation solved as one dense linear system
/// (column-major vec). `b` must be C U; needs n^2 x n^2 storage.
///   continuous: 2 Omega - B^T Omega - Omega B = (zeta^2 / theta) U
///   discrete:   Omega - B^T Omega B = zeta^2 U
inline MatrixXd lyapunov_projected(const MatrixXd& c, bool continuous, double theta = 1.0, double zeta = 1.0) {
    const Eigen::Index n = c.rows();
    const MatrixXd u = centering(n);
    const MatrixXd b = c * u;
    const MatrixXd id = MatrixXd::Identity(n, n);
    const MatrixXd bt = b.transpose();
    MatrixXd op(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // Kronecker blocks: (X kron Y)(i-block, j-block) = X(i,j) * Y
            if (continuous) {
                op.block(i * n, j * n, n, n) = 2.0 * (i == j ? 1.0 : 0.0) * id - (i == j ? 1.0 : 0.0) * bt - bt(i, j) * id;
            } else {
                op.block(i * n, j * n, n, n) = (i == j ? 1.0 : 0.0) * id - bt(i, j) * bt;
            }
        }
    }
    const double scale = continuous ? zeta * zeta / theta : zeta * zeta;
    const Eigen::VectorXd rhs = scale * Eigen::Map<const Eigen::VectorXd>(u.data(), n * n);
    const Eigen::VectorXd x = op.fullPivLu().solve(rhs);
    return Eigen::Map<const MatrixXd>(x.data(), n, n);
}

/// Kemeny's constant of a symmetric stochastic matrix from the fundamental
/// matrix: trace((I - C + G)^-1) - 1.
inline double kemeny_fundamental(const MatrixXd& c) {
    const Eigen::Index n = c.rows();
    const MatrixXd g = MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    return (MatrixXd::Identity(n, n) - c + g).inverse().trace() - 1.0;
}

/// Symmetric closed forms without eigenvalues (theta = zeta = 1):
///   continuous: trace((I - C + G)^-1 - G) / (2N)
///   discrete:   trace((I - C^2 + G)^-1 - G) / N
inline double sigma2_symmetric_continuous(const MatrixXd& c) {
    return kemeny_fundamental(c) / (2.0 * static_cast<double>(c.rows()));
}
inline double sigma2_symmetric_discrete(const MatrixXd& c) {
    return kemeny_fundamental(c * c) / static_cast<double>(c.rows());
}

/// Sum over all node sequences a = v0, v1, ..., vm = b of prod C(v_k, v_{k+1}).
inline double enumerate_walks(const MatrixXd& c, Eigen::Index a, Eigen::Index b, int m) {
    if (m == 0) return a == b ? 1.0 : 0.0;
    double total = 0.0;
    std::function<void(Eigen::Index, int, double)> rec = [&](Eigen::Index v, int left, double w) {
        if (left == 0) {
            if (v == b) total += w;
            return;
        }
        for (Eigen::Index x = 0; x < c.rows(); ++x) {
            if (c(v, x) != 0.0) rec(x, left - 1, w * c(v, x));
        }
    };
    rec(a, m, 1.0);
    return total;
}

/// Eigenvalues of the circulant ring (n, d, c): entry (j, i) = c/d for
/// 0 < |i - j| <= d/2 on the ring, 1 - c on the diagonal.
inline std::vector<double> ring_eigenvalues(std::size_t n, std::size_t d, double c) {
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= d / 2; ++j) {
            s += 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(n));
        }
        out.push_back(1.0 - c + c / static_cast<double>(d) * s);
    }
    return out;
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 100) {
    const std::size_t len = x.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t k = 0; k < len; ++k) means[b] += x[b * len + k];
        means[b] /= static_cast<double>(len);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(batches);
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

} // namespace oracle
