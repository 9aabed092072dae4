#include "linsync/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace linsync {

ConnectivityMatrix::ConnectivityMatrix(Eigen::MatrixXd weights) : w_(std::move(weights)) {
    if (w_.rows() == 0 || w_.rows() != w_.cols()) {
        throw std::invalid_argument("connectivity matrix must be square and non-empty");
    }
    if (!w_.allFinite()) {
        throw std::invalid_argument("connectivity matrix entries must be finite");
    }
}

void RingEnsembleParams::validate() const {
    if (n == 0) throw std::invalid_argument("n must be positive");
    if (d == 0 || d % 2 != 0) {
        throw std::invalid_argument("in-degree d must be a positive even integer (got " + std::to_string(d) + ")");
    }
    if (d >= n) throw std::invalid_argument("in-degree d must be smaller than n");
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in [0, 1]");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
}

ConnectivityMatrix build_ring(const RingEnsembleParams& params) {
    params.validate();
    const auto n = static_cast<Eigen::Index>(params.n);
    const auto half = static_cast<Eigen::Index>(params.d / 2);
    const double w = params.c / static_cast<double>(params.d);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 1.0 - params.c;
        for (Eigen::Index k = 1; k <= half; ++k) {
            m((i - k + n) % n, i) = w;
            m((i + k) % n, i) = w;
        }
    }
    return ConnectivityMatrix(std::move(m));
}

ConnectivityMatrix rewire(const ConnectivityMatrix& ring, const RingEnsembleParams& params, Rng& rng) {
    params.validate();
    if (ring.size() != params.n) throw std::invalid_argument("rewire: matrix size does not match params.n");

    const Eigen::MatrixXd& in = ring.weights();
    const auto n = static_cast<Eigen::Index>(params.n);
    Eigen::MatrixXd out = in;

    std::bernoulli_distribution redraw(params.p);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<char> is_source(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> sources;
    std::vector<double> weights;

    for (Eigen::Index i = 0; i < n; ++i) {
        sources.clear();
        weights.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i && in(j, i) != 0.0) {
                sources.push_back(j);
                weights.push_back(in(j, i));
            }
        }
        for (auto j : sources) is_source[static_cast<std::size_t>(j)] = 1;

        bool changed = false;
        for (auto& s : sources) {
            if (!redraw(rng)) continue;
            Eigen::Index j;
            do {
                j = pick(rng);
            } while (j == i || (j != s && is_source[static_cast<std::size_t>(j)]));
            if (j != s) {
                is_source[static_cast<std::size_t>(s)] = 0;
                is_source[static_cast<std::size_t>(j)] = 1;
                s = j;
                changed = true;
            }
        }

        if (changed) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j != i) out(j, i) = 0.0;
            }
            for (std::size_t k = 0; k < sources.size(); ++k) out(sources[k], i) = weights[k];
        }
        for (auto j : sources) is_source[static_cast<std::size_t>(j)] = 0;
    }
    return ConnectivityMatrix(std::move(out));
}

ConnectivityMatrix generate_network(const RingEnsembleParams& params) {
    Rng rng(params.seed);
    return rewire(build_ring(params), params, rng);
}

ZeroModeReport check_zero_mode(const ConnectivityMatrix& c, double tol) {
    const Eigen::RowVectorXd sums = c.weights().colwise().sum();
    ZeroModeReport r;
    r.residual = (sums.array() - 1.0).abs().maxCoeff();
    r.has_zero_mode = r.residual <= tol;
    r.eigenvalue_at_zero_mode = sums.mean();
    return r;
}

std::optional<double> psi0_eigenvalue(const ConnectivityMatrix& c, double tol) {
    const Eigen::RowVectorXd sums = c.weights().colwise().sum();
    const double mean = sums.mean();
    const double spread = (sums.array() - mean).abs().maxCoeff();
    if (spread <= tol * std::max(1.0, std::abs(mean))) return mean;
    return std::nullopt;
}

} // namespace linsync
