#pragma once

#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace slotcr::markov {

struct StationaryOptions {
    double tolerance = 1e-12;                  ///< power-iteration L1 step tolerance
    double residual_limit = 1e-10;             ///< accept the direct solve below this residual
    std::size_t max_iterations = 1'000'000;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// max_j |(pi P)_j - pi_j| for a row-stochastic P.
double residual(const SparseMatrix& p, const Eigen::VectorXd& pi);
double residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi);

/// Direct solve of pi (P - I) = 0, sum(pi) = 1; falls back to power
/// iteration when the factorization fails or leaves a large residual.
Eigen::VectorXd solve_stationary(const SparseMatrix& p, const StationaryOptions& opts = {});
Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& p, const StationaryOptions& opts = {});

/// Lazy power iteration pi <- pi (I + P) / 2, which also converges on periodic chains.
/// Throws Error(NoConvergence) past opts.max_iterations.
Eigen::VectorXd power_iteration(const SparseMatrix& p, const StationaryOptions& opts = {});

} // namespace slotcr::markov
