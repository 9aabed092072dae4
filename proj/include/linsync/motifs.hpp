#pragma once

#include "linsync/netgen.hpp"
#include "linsync/synccore.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace linsync {

/// Powers C^0 = I, C^1, ..., C^M. Immutable after construction.
class WalkCountCache {
public:
    WalkCountCache(const ConnectivityMatrix& c, std::size_t max_order);

    std::size_t max_order() const noexcept { return powers_.size() - 1; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(powers_.front().rows()); }
    /// Throws std::out_of_range beyond max_order().
    const Eigen::MatrixXd& power(std::size_t m) const;

private:
    std::vector<Eigen::MatrixXd> powers_;
};

/// Weighted count of walks a -> b of length m, i.e. (C^m)_ab. Nodes are
/// 0-based. Throws std::out_of_range for an order or node outside the cache.
double walk_count(const WalkCountCache& cache, std::size_t a, std::size_t b, std::size_t m);

/// W(a -> b, m1) * W(a -> e, m2).
double dual_walk_count(const WalkCountCache& cache, std::size_t a, std::size_t b, std::size_t m1, std::size_t e,
                       std::size_t m2);

/// binom(m, u) / 2^m for u = 0..m, built by repeated Pascal halving so no
/// coefficient overflows.
std::vector<double> binomial_weights(std::size_t m);

/// Per-order contributions. For continuous dynamics `order` is the total
/// dual-walk length m; for discrete dynamics it is the length u of each of
/// the two walks, so a discrete order M reaches roughly twice as deep.
struct MotifLedger {
    DynamicsKind kind = DynamicsKind::continuous;
    std::vector<std::size_t> order;
    std::vector<double> closed;     ///< weighted closed dual walks, scaled by the noise prefactor
    std::vector<double> open;       ///< weighted dual walks to any pair of endpoints
    std::vector<double> net;        ///< closed - open
    std::vector<double> cumulative; ///< running low-order estimate
    /// Whether the full expansion is known to converge (rho(C U) < 1, or
    /// rho(C) < 1 when psi0 is not a left eigenvector).
    bool series_valid = false;
};

/// Low-order estimate with orders 0..max_order. Finite sums, so no validity
/// precondition; the verdict is recorded in the ledger.
MotifLedger sigma2_low_order(const ConnectivityMatrix& c, const DynamicsParams& params, std::size_t max_order);

struct MotifExpansion {
    MotifLedger ledger;
    SyncEstimate estimate; ///< method = motif_expansion; sigma2 NaN unless converged
};

/// Extends the ledger order by order until the centered contribution matrix
/// of the newest order is at most tol times the centered running sum in
/// max-norm, or max_terms orders have been used. Throws ValidityError
/// outside the convergence domain when opts.check_validity is set.
MotifExpansion motif_expansion(const ConnectivityMatrix& c, const DynamicsParams& params,
                               const SeriesOptions& opts = {});

SyncEstimate motif_sigma2_full(const ConnectivityMatrix& c, const DynamicsParams& params,
                               const SeriesOptions& opts = {});

/// Per-(source k, endpoint i) closed dual-walk weight at one order:
///   continuous: sum_u binom(m,u)/2^m (C^u)_ki (C^{m-u})_ki
///   discrete:   ((C^u)_ki)^2
/// Unscaled by the noise prefactor. Needs cache.max_order() >= order and
/// n <= 64 (std::invalid_argument otherwise).
Eigen::MatrixXd closed_pair_detail(const WalkCountCache& cache, DynamicsKind kind, std::size_t order);

/// CSV with header "order,closed,open,net,cumulative".
void write_ledger_csv(const MotifLedger& ledger, std::ostream& out);
void write_ledger_csv(const MotifLedger& ledger, const std::filesystem::path& path);

} // namespace linsync
