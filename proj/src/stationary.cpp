#include "slotcr/stationary.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SparseLU>

#include "slotcr/error.hpp"

namespace slotcr::markov {

namespace {

SparseMatrix to_sparse(const Eigen::MatrixXd& p) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            if (p(r, c) != 0.0) triplets.emplace_back(r, c, p(r, c));
        }
    }
    SparseMatrix s(p.rows(), p.cols());
    s.setFromTriplets(triplets.begin(), triplets.end());
    return s;
}

void require_square(Eigen::Index rows, Eigen::Index cols) {
    if (rows != cols || rows == 0) {
        throw Error(ErrorCode::DimensionMismatch, "transition matrix must be square and nonempty");
    }
}

bool acceptable(const Eigen::VectorXd& pi) {
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
        if (!std::isfinite(pi(i)) || pi(i) < -1e-12) return false;
    }
    return true;
}

} // namespace

double residual(const SparseMatrix& p, const Eigen::VectorXd& pi) {
    const Eigen::VectorXd next = p.transpose() * pi;
    return (next - pi).cwiseAbs().maxCoeff();
}

double residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi) {
    const Eigen::VectorXd next = p.transpose() * pi;
    return (next - pi).cwiseAbs().maxCoeff();
}

Eigen::VectorXd power_iteration(const SparseMatrix& p, const StationaryOptions& opts) {
    require_square(p.rows(), p.cols());
    const Eigen::Index n = p.rows();
    const SparseMatrix pt = p.transpose();
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXd next = 0.5 * (pi + pt * pi);
        next /= next.sum();
        const double step = (next - pi).lpNorm<1>();
        pi = std::move(next);
        if (step < opts.tolerance) return pi;
    }
    throw Error(ErrorCode::NoConvergence, "power iteration exceeded its iteration budget");
}

Eigen::VectorXd solve_stationary(const SparseMatrix& p, const StationaryOptions& opts) {
    require_square(p.rows(), p.cols());
    const Eigen::Index n = p.rows();

    // Rows of A are the balance equations (P^T - I) pi = 0 with the last one
    // replaced by the normalization sum(pi) = 1.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(p.nonZeros() + 2 * n));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (SparseMatrix::InnerIterator it(p, r); it; ++it) {
            if (it.col() != n - 1) triplets.emplace_back(it.col(), r, it.value());
        }
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) triplets.emplace_back(i, i, -1.0);
    for (Eigen::Index c = 0; c < n; ++c) triplets.emplace_back(n - 1, c, 1.0);

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() == Eigen::Success) {
        Eigen::VectorXd pi = lu.solve(rhs);
        if (lu.info() == Eigen::Success && acceptable(pi)) {
            pi = pi.cwiseMax(0.0);
            pi /= pi.sum();
            if (residual(p, pi) <= opts.residual_limit) return pi;
        }
    }
    return power_iteration(p, opts);
}

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& p, const StationaryOptions& opts) {
    require_square(p.rows(), p.cols());
    return solve_stationary(to_sparse(p), opts);
}

} // namespace slotcr::markov
