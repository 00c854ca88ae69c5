#pragma once

#include <Eigen/Dense>

#include "markowitz/errors.hpp"
#include "markowitz/tolerances.hpp"

namespace markowitz {

/// Quantities of each asset held. Negative entries are borrowed assets.
using Portfolio = Eigen::VectorXd;

/// Raw market data before validation: an n x n covariance form r, a cost
/// covector c and an expected-payoff covector p, all over the same
/// n-dimensional portfolio space. Units: r in currency^2, c and p in
/// currency per unit held.
struct MarketSpec {
    Eigen::MatrixXd r;
    Eigen::RowVectorXd c;
    Eigen::RowVectorXd p;

    Eigen::Index dimension() const { return r.rows(); }
};

/// A validated market. Construction symmetrizes r, rejects non-finite or
/// non-positive-semidefinite data, and keeps the spectral decomposition of
/// r around so that every later rank decision is made from one consistent
/// set of eigenvalues. Immutable after construction.
class Market {
public:
    /// Validates `spec` under `tol`. Throws NonFiniteError,
    /// NotSymmetricError, NotPositiveSemidefiniteError or
    /// DimensionMismatchError.
    explicit Market(MarketSpec spec, ToleranceConfig tol = {});

    const MarketSpec& spec() const { return spec_; }
    const ToleranceConfig& tol() const { return tol_; }
    Eigen::Index dimension() const { return spec_.dimension(); }

    const Eigen::MatrixXd& r() const { return spec_.r; }
    const Eigen::RowVectorXd& c() const { return spec_.c; }
    const Eigen::RowVectorXd& p() const { return spec_.p; }

    /// Eigenvalues of the symmetrized r, ascending.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// Matching orthonormal eigenvectors, one per column.
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

    /// Cutoff below which an eigenvalue of r counts as zero.
    double rank_cutoff() const;

private:
    MarketSpec spec_;
    ToleranceConfig tol_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

/// Validates a spec into a market; alias for the Market constructor.
Market validate(MarketSpec spec, ToleranceConfig tol = {});

/// A subspace of portfolio space given by linearly independent basis
/// columns (orthonormal under the standard inner product when produced by
/// this library).
struct Subspace {
    Eigen::MatrixXd basis;

    Eigen::Index dim() const { return basis.cols(); }
};

/// Cost c(v) of a portfolio.
double cost(const Market& m, const Portfolio& v);

/// Expected payoff p(v) of a portfolio.
double payoff(const Market& m, const Portfolio& v);

/// Standard deviation sqrt(r(v,v)). Tolerance-level negative quadratic
/// values are clamped to zero before the square root.
double risk(const Market& m, const Portfolio& v);

/// Covariance r(v,w) of two portfolios.
double covariance(const Market& m, const Portfolio& v, const Portfolio& w);

/// Orthonormal basis of the risk-free portfolios, i.e. of the kernel of r
/// up to the market's rank cutoff. dim = n - rank(r).
Subspace riskless_subspace(const Market& m);

/// The market induced on the codomain of an invertible map T so that T
/// becomes an isomorphism from m: r' = T^-T r T^-1, c' = c T^-1,
/// p' = p T^-1. Throws SingularTransformError when T's smallest singular
/// value falls below tol.rank times its largest.
Market pushforward(const Market& m, const Eigen::MatrixXd& transform);

/// Checks whether T is a morphism from m1 to m2 by probing the standard
/// basis and all pairwise sums: by polarization, agreement of r on that
/// probe set implies agreement everywhere. Deviations are measured against
/// tol.match times the largest probed magnitude (floored at 1).
bool is_morphism(const Market& m1, const Market& m2,
                 const Eigen::MatrixXd& transform);

/// Largest normalized probe deviation of the morphism check; is_morphism
/// is `morphism_residual <= tol.match`.
double morphism_residual(const Market& m1, const Market& m2,
                         const Eigen::MatrixXd& transform);

} // namespace markowitz
