#include "linsync/errors.hpp"
#include "linsync/simulate.hpp"
#include "linsync/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace linsync;

namespace {

ConnectivityMatrix two_node() { return ConnectivityMatrix(Eigen::MatrixXd::Constant(2, 2, 0.5)); }

SimulationConfig config(DynamicsParams p, std::size_t samples, std::uint64_t seed, double dt = 1.0) {
    SimulationConfig cfg;
    cfg.params = p;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.dt = dt;
    return cfg;
}

std::vector<double> row_values(const TimeSeriesBatch& b) {
    std::vector<double> v(static_cast<std::size_t>(b.data.rows()));
    for (Eigen::Index k = 0; k < b.data.rows(); ++k) v[static_cast<std::size_t>(k)] = row_sigma2(b.data.row(k));
    return v;
}

} // namespace

TEST_CASE("scalar OU process: stationary variance") {
    const ConnectivityMatrix c(Eigen::MatrixXd::Zero(1, 1));
    const auto b = simulate_ou_exact(c, config(DynamicsParams::continuous(2.0, 1.5), 40000, 3, 0.5));
    std::vector<double> sq;
    for (Eigen::Index k = 0; k < b.data.rows(); ++k) sq.push_back(b.data(k, 0) * b.data(k, 0));
    double m = 0.0;
    for (double v : sq) m += v;
    m /= static_cast<double>(sq.size());
    const double expected = 2.25 / 4.0;
    CHECK(std::abs(m - expected) <= 4.0 * oracle::batch_means_se(sq));
}

TEST_CASE("two-node network: both dynamics match the analytic value") {
    const auto c = two_node();
    const auto ou = simulate_ou_exact(c, config(DynamicsParams::continuous(), 40000, 11));
    const auto vo = row_values(ou);
    CHECK(std::abs(empirical_sigma2(ou).sigma2 - 0.25) <= 4.0 * oracle::batch_means_se(vo));
    const auto var = simulate_var(c, config(DynamicsParams::discrete(), 40000, 12));
    const auto vv = row_values(var);
    CHECK(std::abs(empirical_sigma2(var).sigma2 - 0.5) <= 4.0 * oracle::batch_means_se(vv));
}

TEST_CASE("VAR with C = 0 is white noise") {
    const ConnectivityMatrix c(Eigen::MatrixXd::Zero(5, 5));
    const auto b = simulate_var(c, config(DynamicsParams::discrete(2.0), 20000, 4));
    const auto v = row_values(b);
    CHECK(std::abs(empirical_sigma2(b).sigma2 - 4.0 * 0.8) <= 4.0 * oracle::batch_means_se(v));
}

TEST_CASE("fixed seed reproduces the batch exactly") {
    linsync::Rng rng(2);
    const auto c = oracle::random_zero_mode_network(6, oracle::Shape::general_signed, 0.7, rng);
    for (const auto& p : {DynamicsParams::continuous(), DynamicsParams::discrete()}) {
        const auto a = simulate(c, config(p, 200, 77));
        const auto b = simulate(c, config(p, 200, 77));
        CHECK(a.data == b.data);
        CHECK_FALSE(a.data == simulate(c, config(p, 200, 78)).data);
    }
}

TEST_CASE("empirical sigma2 examples") {
    Eigen::MatrixXd flat(1, 4);
    flat << 1, 1, 1, 1;
    CHECK(empirical_sigma2(flat).sigma2 == 0.0);
    CHECK(std::isnan(empirical_sigma2(flat).standard_error));
    Eigen::MatrixXd pair(1, 2);
    pair << 1, -1;
    CHECK(empirical_sigma2(pair).sigma2 == doctest::Approx(1.0));
    Eigen::MatrixXd rows(2, 2);
    rows << 1, -1, 2, 0;
    CHECK(empirical_sigma2(rows).sigma2 == doctest::Approx(1.0));
    CHECK(empirical_sigma2(rows).standard_error == doctest::Approx(0.0));
    CHECK(empirical_sigma2(rows).method == SigmaMethod::empirical);
}

TEST_CASE("row_sigma2 is translation invariant") {
    Eigen::RowVectorXd x(5);
    x << 0.3, -1.2, 4.0, 2.2, 0.0;
    CHECK(row_sigma2(x.array() + 17.5) == doctest::Approx(row_sigma2(x)).epsilon(1e-12));
}

TEST_CASE("non-synchronizable networks are refused") {
    const ConnectivityMatrix id(Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(simulate_ou_exact(id, config(DynamicsParams::continuous(), 10, 1)), ValidityError);
    CHECK_THROWS_AS(simulate_var(id, config(DynamicsParams::discrete(), 10, 1)), ValidityError);
    CHECK_THROWS_AS(default_burn_in(id, DynamicsParams::discrete(), 1.0), ValidityError);
    // Eigenvalues {1, -1.5}: stationary as an OU process but not as a VAR.
    Eigen::MatrixXd m(2, 2);
    m << -0.25, 1.25, 1.25, -0.25;
    const ConnectivityMatrix gap(m);
    CHECK_NOTHROW(simulate_ou_exact(gap, config(DynamicsParams::continuous(), 10, 1)));
    CHECK_THROWS_AS(simulate_var(gap, config(DynamicsParams::discrete(), 10, 1)), ValidityError);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(simulate(two_node(), config(DynamicsParams::continuous(), 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(simulate(two_node(), config(DynamicsParams::continuous(), 5, 1, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(simulate_var(two_node(), config(DynamicsParams::continuous(), 5, 1)), std::invalid_argument);
    CHECK_THROWS_AS(simulate_ou_exact(two_node(), config(DynamicsParams::discrete(), 5, 1)), std::invalid_argument);
}

TEST_CASE("OU propagator: scalar closed form") {
    const ConnectivityMatrix c(Eigen::MatrixXd::Zero(1, 1));
    for (double dt : {0.01, 1.0, 30.0}) {
        const auto p = ou_propagator(c, DynamicsParams::continuous(0.7, 1.3), dt);
        CHECK(p.a(0, 0) == doctest::Approx(std::exp(-0.7 * dt)).epsilon(1e-12));
        const double q = 1.69 * (1.0 - std::exp(-1.4 * dt)) / 1.4;
        CHECK(p.q(0, 0) == doctest::Approx(q).epsilon(1e-10));
        CHECK(p.noise_factor(0, 0) * p.noise_factor(0, 0) == doctest::Approx(q).epsilon(1e-10));
    }
}

TEST_CASE("OU propagator: Lyapunov residual and factorization") {
    linsync::Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        const auto c = oracle::random_zero_mode_network(3 + t, static_cast<oracle::Shape>(t % 4), 0.8, rng);
        for (double dt : {0.1, 1.0, 50.0}) {
            const auto p = ou_propagator(c, DynamicsParams::continuous(2.0, 1.0), dt);
            CHECK(p.lyapunov_residual <= 1e-8);
            const Eigen::MatrixXd ftf = p.noise_factor.transpose() * p.noise_factor;
            CHECK(oracle::max_abs(ftf - p.q) <= 1e-10 * std::max(1.0, oracle::max_abs(p.q)));
        }
    }
}

TEST_CASE("default burn-in") {
    // Two-node network: slowest non-zero mode has lambda = 0.
    CHECK(default_burn_in(two_node(), DynamicsParams::discrete(), 1.0) == 10);
    const double r = std::exp(-1.0);
    CHECK(default_burn_in(two_node(), DynamicsParams::continuous(), 1.0) ==
          static_cast<std::size_t>(10.0 * std::ceil(1.0 / (1.0 - r))));
    Eigen::MatrixXd m(2, 2);
    m << 1.0 - 1e-9, 1e-9, 1e-9, 1.0 - 1e-9;
    CHECK(default_burn_in(ConnectivityMatrix(m), DynamicsParams::discrete(), 1.0) == kMaxBurnIn);
    auto cfg = config(DynamicsParams::discrete(), 3, 1);
    cfg.burn_in = 0;
    cfg.initial_state = Eigen::RowVectorXd::Constant(2, 5.0);
    const auto b = simulate(ConnectivityMatrix(Eigen::MatrixXd::Zero(2, 2)), cfg);
    CHECK(b.burn_in_used == 0);
}

TEST_CASE("time series CSV") {
    auto cfg = config(DynamicsParams::continuous(), 2, 1, 0.5);
    cfg.burn_in = 0;
    const auto b = simulate(two_node(), cfg);
    std::ostringstream s;
    write_timeseries_csv(b, s);
    std::istringstream in(s.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x1,x2");
    std::getline(in, line);
    CHECK(line.rfind("0,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("0.5,", 0) == 0);
}
