#pragma once

#include "linsync/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>

namespace linsync {

/// Zero-mode tolerance on column sums; comfortably above double round-off
/// for networks up to ~10^4 nodes.
inline constexpr double kDefaultZeroModeTol = 1e-9;

/// Dense weighted adjacency matrix C. Entry (j, i) is the weight of the
/// directed edge j -> i. States are row vectors and evolve as x * C, so the
/// incoming weight of node i is the i-th column sum.
class ConnectivityMatrix {
public:
    /// Throws std::invalid_argument if `weights` is empty, non-square, or
    /// holds a non-finite entry.
    explicit ConnectivityMatrix(Eigen::MatrixXd weights);

    std::size_t size() const noexcept { return static_cast<std::size_t>(w_.rows()); }
    const Eigen::MatrixXd& weights() const noexcept { return w_; }
    double operator()(std::size_t from, std::size_t to) const {
        return w_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
    }

    friend bool operator==(const ConnectivityMatrix& a, const ConnectivityMatrix& b) {
        return a.w_.rows() == b.w_.rows() && a.w_ == b.w_;
    }

private:
    Eigen::MatrixXd w_;
};

/// Directed Watts-Strogatz ring ensemble. Each node receives d incoming
/// edges (d/2 predecessors and d/2 successors on the ring), each of weight
/// c/d, plus a self-link of weight 1 - c.
struct RingEnsembleParams {
    std::size_t n = 0;
    std::size_t d = 0;
    double c = 0.0;
    double p = 0.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on odd d, d >= n, c or p outside [0, 1].
    void validate() const;
};

struct ZeroModeReport {
    bool has_zero_mode = false;
    double residual = 0.0;               ///< max_i |sum_j C_ji - 1|
    double eigenvalue_at_zero_mode = 0.0; ///< mean column sum
};

/// Regular ring (the p = 0 member of the ensemble); params.p is ignored.
ConnectivityMatrix build_ring(const RingEnsembleParams& params);

/// Redraws the source of each non-self incoming edge with probability p,
/// uniformly among nodes that are neither the target nor another current
/// source of that target. Landing on the original source is allowed. Self
/// links and weights are untouched, so column sums stay at 1.
ConnectivityMatrix rewire(const ConnectivityMatrix& ring, const RingEnsembleParams& params, Rng& rng);

/// build_ring followed by rewire with Rng(params.seed).
ConnectivityMatrix generate_network(const RingEnsembleParams& params);

ZeroModeReport check_zero_mode(const ConnectivityMatrix& c, double tol = kDefaultZeroModeTol);

/// If psi0 = (1,...,1) is a left eigenvector of C (all column sums equal
/// within tol), returns its eigenvalue (the common column sum).
std::optional<double> psi0_eigenvalue(const ConnectivityMatrix& c, double tol = kDefaultZeroModeTol);

} // namespace linsync
