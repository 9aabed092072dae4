#pragma once

#include "linsync/netgen.hpp"
#include "linsync/rng.hpp"
#include "linsync/synccore.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>

namespace linsync {

/// Burn-in never exceeds this many samples, however slow the slowest mode.
inline constexpr std::size_t kMaxBurnIn = 10'000'000;

struct SimulationConfig {
    DynamicsParams params;
    double dt = 1.0; ///< sampling interval; continuous dynamics only
    /// Samples discarded before recording; default_burn_in() when empty.
    std::optional<std::size_t> burn_in;
    std::size_t samples = 1; ///< L
    std::uint64_t seed = 0;
    /// Starting state; zeros when empty.
    std::optional<Eigen::RowVectorXd> initial_state;

    /// Throws std::invalid_argument on dt <= 0 (continuous), samples == 0, or
    /// invalid dynamics parameters.
    void validate() const;
};

struct TimeSeriesBatch {
    Eigen::MatrixXd data; ///< samples x n, one post-burn-in state per row
    SimulationConfig config;
    std::size_t burn_in_used = 0;
};

/// One exact step of the OU process: x' = x A + eta, eta ~ N(0, Q), drawn as
/// z * noise_factor with z standard normal (noise_factor^T noise_factor = Q).
struct OuPropagator {
    Eigen::MatrixXd a;
    Eigen::MatrixXd q;
    Eigen::MatrixXd noise_factor;
    /// max |M^T Q + Q M - zeta^2 (I - A^T A)| relative to zeta^2; an
    /// independent check of the propagator.
    double lyapunov_residual = 0.0;
};

/// A = exp(-M dt) and Q = zeta^2 int_0^dt exp(-M^T s) exp(-M s) ds with
/// M = theta (I - C). Throws NumericalError if Q is indefinite beyond
/// round-off or fails the Lyapunov check.
OuPropagator ou_propagator(const ConnectivityMatrix& c, const DynamicsParams& params, double dt);

/// 10 * ceil(1 / (1 - r)) where r is the per-sample decay factor of the
/// slowest non-zero mode (|lambda| for discrete dynamics, exp(-theta (1 -
/// Re lambda) dt) for continuous), capped at kMaxBurnIn. Throws
/// ValidityError when the network is not synchronizable.
std::size_t default_burn_in(const ConnectivityMatrix& c, const DynamicsParams& params, double dt);

/// Streaming sampler for either dynamics; state() is the current state.
/// Construction refuses (ValidityError) networks violating the
/// synchronization condition for the chosen dynamics.
class StateSampler {
public:
    StateSampler(const ConnectivityMatrix& c, const SimulationConfig& config);

    void step();
    const Eigen::RowVectorXd& state() const noexcept { return x_; }
    std::size_t burn_in() const noexcept { return burn_in_; }
    /// Runs the burn-in steps.
    void burn();

private:
    Eigen::MatrixXd a_;
    Eigen::MatrixXd noise_; // noise factor (continuous) or zeta * I (discrete, unused)
    bool continuous_;
    double zeta_;
    std::size_t burn_in_;
    Rng rng_;
    std::normal_distribution<double> normal_;
    Eigen::RowVectorXd x_;
    Eigen::RowVectorXd z_;
};

/// Exact-discretization sampling of the continuous OU process.
TimeSeriesBatch simulate_ou_exact(const ConnectivityMatrix& c, const SimulationConfig& config);

/// Direct iteration x(t+1) = x(t) C + zeta r(t).
TimeSeriesBatch simulate_var(const ConnectivityMatrix& c, const SimulationConfig& config);

/// Dispatches on config.params.kind.
TimeSeriesBatch simulate(const ConnectivityMatrix& c, const SimulationConfig& config);

/// (1/N) sum_i (x_i - mean(x))^2 for one state.
double row_sigma2(const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Mean of row_sigma2 over the batch, with the standard error of the mean
/// (NaN for a single row).
SyncEstimate empirical_sigma2(const TimeSeriesBatch& batch);
SyncEstimate empirical_sigma2(const Eigen::MatrixXd& data);

/// Header "t,x1,...,xN"; t = k * dt (continuous) or k (discrete).
void write_timeseries_csv(const TimeSeriesBatch& batch, std::ostream& out);
void write_timeseries_csv(const TimeSeriesBatch& batch, const std::filesystem::path& path);

} // namespace linsync
