#pragma once

// Shared helpers for the test suites: deterministic random generators for
// markets and transforms, and oracles that are kept independent of the
// library paths they are used to check.

#include <cmath>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "markowitz/classify.hpp"
#include "markowitz/market.hpp"

namespace testsupport {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline MatrixXd random_orthogonal(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    MatrixXd raw(n, n);
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b) raw(a, b) = gauss(rng);
    Eigen::HouseholderQR<MatrixXd> qr(raw);
    MatrixXd q = qr.householderQ();
    // Fix the sign convention so the factorization is unique-ish.
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0) q.col(j) *= -1.0;
    }
    return q;
}

/// Invertible map with singular values spread geometrically so that its
/// condition number is exactly `cond`.
inline MatrixXd random_transform(Index n, double cond, std::mt19937_64& rng) {
    const MatrixXd u = random_orthogonal(n, rng);
    const MatrixXd v = random_orthogonal(n, rng);
    VectorXd sigma(n);
    const double hi = std::sqrt(cond);
    const double lo = 1.0 / hi;
    for (Index j = 0; j < n; ++j) {
        if (n == 1) {
            sigma(j) = 1.0;
        } else {
            const double t = static_cast<double>(j) / (n - 1);
            sigma(j) = lo * std::pow(hi / lo, t);
        }
    }
    return u * sigma.asDiagonal() * v.transpose();
}

struct CanonicalParams {
    markowitz::CanonicalCase kind = markowitz::CanonicalCase::NoCostlyRiskless;
    Index n = 0;
    Index k = 0;
    double m = 0.0;
    double g = 0.0;
    double i = 0.0;
};

/// Random legal parameters for the given case. With `nondegenerate` set,
/// draws only classes of nondegenerate markets (k = n with m > 0, or
/// k = n - 1 with m = 0, both with g > 0).
inline CanonicalParams random_params(markowitz::CanonicalCase kind, Index n,
                                     std::mt19937_64& rng, bool nondegenerate) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CanonicalParams params;
    params.kind = kind;
    params.n = n;
    params.m = 0.2 + 3.0 * unit(rng);
    params.g = 0.1 + 3.0 * unit(rng);
    params.i = -2.0 + 4.0 * unit(rng);

    switch (kind) {
        case markowitz::CanonicalCase::NoCostlyRiskless:
            params.k = nondegenerate
                           ? n
                           : 1 + static_cast<Index>(unit(rng) * static_cast<double>(n));
            if (params.k > n) params.k = n;
            if (params.k == 1) params.g = 0.0;
            else if (!nondegenerate && unit(rng) < 0.15) params.g = 0.0;
            break;
        case markowitz::CanonicalCase::RisklessWithCost:
            params.m = 0.0;
            params.k = nondegenerate
                           ? n - 1
                           : static_cast<Index>(unit(rng) * static_cast<double>(n));
            if (params.k > n - 1) params.k = n - 1;
            if (params.k == 0) params.g = 0.0;
            else if (!nondegenerate && unit(rng) < 0.15) params.g = 0.0;
            break;
        case markowitz::CanonicalCase::ZeroCost:
            params.m = 0.0;
            params.i = 0.0;
            params.k = static_cast<Index>(unit(rng) * static_cast<double>(n + 1));
            if (params.k > n) params.k = n;
            if (params.k == 0) params.g = 0.0;
            break;
    }
    return params;
}

inline markowitz::Market market_from_params(const CanonicalParams& params) {
    return markowitz::Market(markowitz::canonical_model(
        params.kind, params.k, params.m, params.g, params.i, params.n));
}

/// Independent minimum-risk oracle: eliminate the two linear constraints
/// with an SVD, then minimize the remaining unconstrained quadratic with a
/// pseudo-inverse. Shares no code with the canonicalization route.
/// Returns nullopt when the constraints are inconsistent.
inline std::optional<double> oracle_min_risk(const markowitz::MarketSpec& spec,
                                             double cost, double payoff) {
    const Index n = spec.dimension();
    MatrixXd constraints(2, n);
    constraints.row(0) = spec.c;
    constraints.row(1) = spec.p;
    VectorXd target(2);
    target << cost, payoff;

    Eigen::JacobiSVD<MatrixXd> svd(constraints,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double sigma_max = svd.singularValues()(0);
    Index rank = 0;
    for (Index j = 0; j < svd.singularValues().size(); ++j) {
        if (svd.singularValues()(j) > 1e-12 * std::max(1.0, sigma_max)) ++rank;
    }
    VectorXd reduced = svd.matrixU().transpose() * target;
    VectorXd coeffs = VectorXd::Zero(svd.singularValues().size());
    for (Index j = 0; j < rank; ++j) {
        coeffs(j) = reduced(j) / svd.singularValues()(j);
    }
    for (Index j = rank; j < reduced.size(); ++j) {
        if (std::abs(reduced(j)) > 1e-9 * std::max(1.0, target.norm())) {
            return std::nullopt;
        }
    }
    const VectorXd particular =
        svd.matrixV().leftCols(coeffs.size()) * coeffs;
    const MatrixXd null_basis = svd.matrixV().rightCols(n - rank);

    const MatrixXd sym = (spec.r + spec.r.transpose()) / 2.0;
    VectorXd best = particular;
    if (null_basis.cols() > 0) {
        const MatrixXd hessian = null_basis.transpose() * sym * null_basis;
        const VectorXd gradient = null_basis.transpose() * sym * particular;
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hessian);
        VectorXd z = VectorXd::Zero(null_basis.cols());
        const double lambda_max = eig.eigenvalues().maxCoeff();
        for (Index j = 0; j < eig.eigenvalues().size(); ++j) {
            const double lambda = eig.eigenvalues()(j);
            if (lambda > 1e-12 * std::max(1.0, lambda_max)) {
                z -= eig.eigenvectors().col(j) *
                     (eig.eigenvectors().col(j).dot(gradient) / lambda);
            }
        }
        best += null_basis * z;
    }
    return std::sqrt(std::max(0.0, best.dot(sym * best)));
}

} // namespace testsupport
