#include "markowitz/market.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace markowitz {

namespace {

void check_dimensions(const MarketSpec& spec) {
    const auto n = spec.r.rows();
    if (n < 1) {
        throw DimensionMismatchError("a market needs at least one asset");
    }
    if (spec.r.cols() != n || spec.c.cols() != n || spec.p.cols() != n) {
        throw DimensionMismatchError(
            "market spec has inconsistent dimensions: r is " +
            std::to_string(spec.r.rows()) + "x" + std::to_string(spec.r.cols()) +
            ", c has " + std::to_string(spec.c.cols()) + " entries, p has " +
            std::to_string(spec.p.cols()));
    }
}

void check_finite(const MarketSpec& spec) {
    if (!spec.r.allFinite() || !spec.c.allFinite() || !spec.p.allFinite()) {
        throw NonFiniteError("market spec contains NaN or infinite entries");
    }
}

void require_dimension(const Market& m, const Portfolio& v) {
    if (v.size() != m.dimension()) {
        throw DimensionMismatchError(
            "portfolio has " + std::to_string(v.size()) +
            " coordinates in a market of dimension " +
            std::to_string(m.dimension()));
    }
}

} // namespace

Market::Market(MarketSpec spec, ToleranceConfig tol)
    : spec_(std::move(spec)), tol_(tol) {
    check_dimensions(spec_);
    check_finite(spec_);

    const double entry_scale = std::max(
        1.0, spec_.r.size() > 0 ? spec_.r.cwiseAbs().maxCoeff() : 0.0);
    const double asym =
        spec_.r.size() > 0 ? (spec_.r - spec_.r.transpose()).cwiseAbs().maxCoeff()
                           : 0.0;
    if (asym > tol_.sym * entry_scale) {
        throw NotSymmetricError("covariance form is asymmetric by " +
                                std::to_string(asym));
    }
    // Store the symmetrized form; file round-trips may carry last-digit
    // asymmetry and every decision downstream works off this copy.
    spec_.r = ((spec_.r + spec_.r.transpose()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec_.r);
    if (eig.info() != Eigen::Success) {
        throw NotPositiveSemidefiniteError(
            "eigendecomposition of the covariance form failed");
    }
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();

    const double lambda_max =
        eigenvalues_.size() > 0 ? eigenvalues_.maxCoeff() : 0.0;
    const double floor = -tol_.psd * std::max(1.0, lambda_max);
    if (eigenvalues_.size() > 0 && eigenvalues_.minCoeff() < floor) {
        throw NotPositiveSemidefiniteError(
            "covariance form has eigenvalue " +
            std::to_string(eigenvalues_.minCoeff()) +
            " below the tolerance floor " + std::to_string(floor));
    }
}

double Market::rank_cutoff() const {
    const double lambda_max =
        eigenvalues_.size() > 0 ? eigenvalues_.maxCoeff() : 0.0;
    return tol_.rank * std::max(1.0, lambda_max);
}

Market validate(MarketSpec spec, ToleranceConfig tol) {
    return Market(std::move(spec), tol);
}

double cost(const Market& m, const Portfolio& v) {
    require_dimension(m, v);
    return m.c() * v;
}

double payoff(const Market& m, const Portfolio& v) {
    require_dimension(m, v);
    return m.p() * v;
}

double risk(const Market& m, const Portfolio& v) {
    require_dimension(m, v);
    const double quad = v.dot(m.r() * v);
    return std::sqrt(std::max(0.0, quad));
}

double covariance(const Market& m, const Portfolio& v, const Portfolio& w) {
    require_dimension(m, v);
    require_dimension(m, w);
    return v.dot(m.r() * w);
}

Subspace riskless_subspace(const Market& m) {
    const double cutoff = m.rank_cutoff();
    const auto& values = m.eigenvalues();
    Eigen::Index dim = 0;
    for (Eigen::Index j = 0; j < values.size(); ++j) {
        if (values(j) <= cutoff) ++dim;
    }
    // Eigenvalues are ascending, so the kernel occupies the leading columns.
    Subspace out;
    out.basis = m.eigenvectors().leftCols(dim);
    return out;
}

Market pushforward(const Market& m, const Eigen::MatrixXd& transform) {
    const auto n = m.dimension();
    if (transform.rows() != n || transform.cols() != n) {
        throw DimensionMismatchError("pushforward transform must be " +
                                     std::to_string(n) + "x" +
                                     std::to_string(n));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(transform);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= m.tol().rank * sv(0)) {
        throw SingularTransformError(
            "pushforward transform is singular to tolerance");
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(transform);
    const Eigen::MatrixXd inverse = lu.inverse();
    // Assemble r' through the PSD square root of r: the Gram product is
    // symmetric and positive semidefinite by construction, while the
    // triple product T^-T r T^-1 is neither once rounding enters.
    const Eigen::VectorXd clamped = m.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd factor =
        clamped.cwiseSqrt().asDiagonal() *
        (m.eigenvectors().transpose() * inverse);
    MarketSpec out;
    out.r = factor.transpose() * factor;
    out.c = m.c() * inverse;
    out.p = m.p() * inverse;
    return Market(std::move(out), m.tol());
}

double morphism_residual(const Market& m1, const Market& m2,
                         const Eigen::MatrixXd& transform) {
    const auto n1 = m1.dimension();
    if (transform.cols() != n1 || transform.rows() != m2.dimension()) {
        throw DimensionMismatchError(
            "morphism check needs a " + std::to_string(m2.dimension()) + "x" +
            std::to_string(n1) + " map");
    }

    double worst = 0.0;
    auto probe = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd tv = transform * v;
        const double r1 = v.dot(m1.r() * v);
        const double r2 = tv.dot(m2.r() * tv);
        const double c1 = m1.c() * v;
        const double c2 = m2.c() * tv;
        const double p1 = m1.p() * v;
        const double p2 = m2.p() * tv;
        const double scale =
            std::max({1.0, std::abs(r1), std::abs(r2), std::abs(c1),
                      std::abs(c2), std::abs(p1), std::abs(p2)});
        const double dev = std::max(
            {std::abs(r2 - r1), std::abs(c2 - c1), std::abs(p2 - p1)});
        worst = std::max(worst, dev / scale);
    };

    // Basis vectors plus pairwise sums: enough, by polarization, to pin the
    // whole bilinear form, and the linear functionals only need the basis.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n1);
    for (Eigen::Index a = 0; a < n1; ++a) {
        v.setZero();
        v(a) = 1.0;
        probe(v);
        for (Eigen::Index b = a + 1; b < n1; ++b) {
            v(b) = 1.0;
            probe(v);
            v(b) = 0.0;
        }
    }
    return worst;
}

bool is_morphism(const Market& m1, const Market& m2,
                 const Eigen::MatrixXd& transform) {
    return morphism_residual(m1, m2, transform) <= m1.tol().match;
}

} // namespace markowitz
