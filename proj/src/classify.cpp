#include "markowitz/classify.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "markowitz/optimize.hpp"

namespace markowitz {

std::string to_string(CanonicalCase c) {
    switch (c) {
        case CanonicalCase::RisklessWithCost: return "RisklessWithCost";
        case CanonicalCase::NoCostlyRiskless: return "NoCostlyRiskless";
        case CanonicalCase::ZeroCost: return "ZeroCost";
    }
    return "?";
}

namespace {

// u^T M v accumulated in extended precision. The canonical bases carry
// columns whose Euclidean norms grow like 1/sqrt(lambda_min), so plain
// double accumulation of the Gram entries loses exactly the digits the
// canonicalization residual is measured in.
long double bilinear_ld(const Eigen::MatrixXd& mat, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v) {
    long double total = 0.0L;
    for (Eigen::Index a = 0; a < mat.rows(); ++a) {
        long double row = 0.0L;
        for (Eigen::Index b = 0; b < mat.cols(); ++b) {
            row += static_cast<long double>(mat(a, b)) *
                   static_cast<long double>(v(b));
        }
        total += static_cast<long double>(u(a)) * row;
    }
    return total;
}

// Orthonormal basis of the null space of a single covector, as columns.
Eigen::MatrixXd row_nullspace(const Eigen::RowVectorXd& row) {
    const Eigen::Index q = row.cols();
    if (q == 0) return Eigen::MatrixXd(0, 0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(row, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(q - 1);
}

// Modified Gram-Schmidt under the inner product induced by `r`, with a
// second orthogonalization pass: one pass loses orthogonality once the
// block's condition number approaches 1e8. Expects unit-norm input
// columns spanning a subspace on which r is positive definite; a pivot at
// or below `pivot_cutoff` contradicts that and raises IllConditionedError.
Eigen::MatrixXd r_orthonormalize(const Eigen::MatrixXd& r, Eigen::MatrixXd basis,
                                 double pivot_cutoff) {
    const Eigen::Index k = basis.cols();
    for (Eigen::Index j = 0; j < k; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < j; ++i) {
                const double coef = static_cast<double>(
                    bilinear_ld(r, basis.col(i), basis.col(j)));
                basis.col(j) -= coef * basis.col(i);
            }
        }
        const long double nrm2 = bilinear_ld(r, basis.col(j), basis.col(j));
        if (!(nrm2 > pivot_cutoff)) {
            throw IllConditionedError(
                "Gram-Schmidt pivot " + std::to_string(static_cast<double>(nrm2)) +
                " collapsed below the rank cutoff " + std::to_string(pivot_cutoff));
        }
        basis.col(j) /= std::sqrt(static_cast<double>(nrm2));
    }
    return basis;
}

// Applies the isometry (in the coefficients of an r-orthonormal basis)
// that sends the dual vector `u` of some functional to a non-negative
// multiple of the first basis vector. Returns that multiple, i.e. |u|.
double align_dual_to_first(Eigen::MatrixXd& basis, const Eigen::VectorXd& u) {
    const Eigen::Index k = basis.cols();
    const double alpha = u.norm();
    if (k == 0 || alpha == 0.0) return alpha;

    const double s = u(0) >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd w = u;
    w(0) += s * alpha;
    const double w2 = w.squaredNorm();
    // Householder: basis * (I - 2 w w^T / |w|^2) maps the dual to
    // -s * alpha * e1; flip the sign of the first column when s > 0.
    const Eigen::VectorXd image = basis * w;
    basis -= (2.0 / w2) * image * w.transpose();
    if (s > 0.0) basis.col(0) *= -1.0;
    return alpha;
}

struct KernelSplit {
    Eigen::MatrixXd kernel;     // orthonormal basis of V^0
    Eigen::MatrixXd risky;      // orthonormal complement (eigenvectors)
    Eigen::Index k = 0;         // rank of r
};

KernelSplit split_by_rank(const Market& m) {
    const double cutoff = m.rank_cutoff();
    const auto& values = m.eigenvalues();
    Eigen::Index dim0 = 0;
    while (dim0 < values.size() && values(dim0) <= cutoff) ++dim0;
    KernelSplit out;
    out.kernel = m.eigenvectors().leftCols(dim0);
    out.risky = m.eigenvectors().rightCols(values.size() - dim0);
    out.k = values.size() - dim0;
    return out;
}

// Orthonormal basis of V^0 intersected with ker c, or all of V^0 when c
// vanishes there.
Eigen::MatrixXd costless_riskless(const Market& m, const Eigen::MatrixXd& kernel) {
    if (kernel.cols() == 0) return kernel;
    const Eigen::RowVectorXd c_k = m.c() * kernel;
    if (c_k.norm() <= m.tol().rank * std::max(1.0, m.c().norm())) {
        return kernel;
    }
    return kernel * row_nullspace(c_k);
}

} // namespace

std::optional<Portfolio> find_arbitrage(const Market& m) {
    const Eigen::MatrixXd w = costless_riskless(m, riskless_subspace(m).basis);
    if (w.cols() == 0) return std::nullopt;
    const Eigen::RowVectorXd p_w = m.p() * w;
    if (p_w.norm() <= m.tol().rank * m.p().norm()) return std::nullopt;
    // The payoff-maximizing direction of W, scaled to payoff exactly 1.
    Eigen::VectorXd direction = w * p_w.transpose();
    return Portfolio(direction / p_w.squaredNorm());
}

DegeneracyReport degeneracy_report(const Market& m) {
    DegeneracyReport report;
    report.arbitrage = find_arbitrage(m);

    const Eigen::MatrixXd w = costless_riskless(m, riskless_subspace(m).basis);
    if (w.cols() == 0) {
        report.valueless_basis = Eigen::MatrixXd(m.dimension(), 0);
    } else {
        const Eigen::RowVectorXd p_w = m.p() * w;
        if (p_w.norm() <= m.tol().rank * std::max(1.0, m.p().norm())) {
            report.valueless_basis = w;
        } else {
            report.valueless_basis = w * row_nullspace(p_w);
        }
    }
    report.has_valueless = report.valueless_basis.cols() > 0;

    if (m.dimension() < 2) {
        report.cp_independent = false;
    } else {
        Eigen::MatrixXd stack(2, m.dimension());
        stack.row(0) = m.c();
        stack.row(1) = m.p();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack);
        const auto& sv = svd.singularValues();
        report.cp_independent = sv(0) > 0.0 && sv(1) > m.tol().rank * sv(0);
    }

    report.nondegenerate = !report.arbitrage.has_value() &&
                           !report.has_valueless && report.cp_independent;
    return report;
}

MarketSpec canonical_model(CanonicalCase kind, Eigen::Index k, double m,
                           double g, double i, Eigen::Index n) {
    if (n < 0 || k < 0 || k > n) {
        throw Error("canonical model parameters out of range");
    }
    if (g < 0.0) throw Error("canonical model needs g >= 0");

    MarketSpec spec;
    spec.r = Eigen::MatrixXd::Zero(n, n);
    spec.r.topLeftCorner(k, k).setIdentity();
    spec.c = Eigen::RowVectorXd::Zero(n);
    spec.p = Eigen::RowVectorXd::Zero(n);

    switch (kind) {
        case CanonicalCase::ZeroCost:
            if (k >= 1) spec.p(0) = g;
            else if (g != 0.0) throw Error("zero-cost model with k = 0 forces g = 0");
            break;
        case CanonicalCase::RisklessWithCost:
            if (k > n - 1) {
                throw Error("a riskless-with-cost model needs k <= n - 1");
            }
            spec.c(n - 1) = 1.0;
            spec.p(n - 1) = i;
            if (k >= 1) spec.p(0) = g;
            else if (g != 0.0) throw Error("k = 0 forces g = 0");
            break;
        case CanonicalCase::NoCostlyRiskless:
            if (k < 1 || !(m > 0.0)) {
                throw Error("the excluded set: k >= 1 and m > 0 are required "
                            "when no costly riskless portfolio exists");
            }
            spec.c(0) = 1.0 / m;
            spec.p(0) = i / m;
            if (k >= 2) spec.p(1) = g;
            break;
    }
    return spec;
}

CanonicalForm canonicalize(const Market& m) {
    if (find_arbitrage(m).has_value()) {
        throw ArbitrageMarketError(
            "markets with arbitrage have no canonical form");
    }

    const Eigen::Index n = m.dimension();
    const KernelSplit split = split_by_rank(m);
    const double cutoff = m.rank_cutoff();
    const double c_norm = m.c().norm();

    CanonicalForm form;
    form.k = split.k;

    Eigen::MatrixXd basis(n, n);   // columns: canonical basis, market coords

    const bool c_is_zero =
        c_norm <= m.tol().rank * std::max({1.0, c_norm, m.p().norm()});

    if (c_is_zero) {
        form.kind = CanonicalCase::ZeroCost;
        form.m_defined = false;
        form.i_defined = false;
        Eigen::MatrixXd risky = r_orthonormalize(m.r(), split.risky, cutoff);
        form.g = align_dual_to_first(risky, (m.p() * risky).transpose());
        basis.leftCols(form.k) = risky;
        basis.rightCols(n - form.k) = split.kernel;
    } else {
        const Eigen::RowVectorXd c_kernel = m.c() * split.kernel;
        const bool costly_riskless =
            split.kernel.cols() > 0 &&
            c_kernel.norm() > m.tol().rank * std::max(1.0, c_norm);

        if (costly_riskless) {
            form.kind = CanonicalCase::RisklessWithCost;
            form.m = 0.0;

            // Cost-1 riskless fund: the c-dual direction inside V^0.
            const double gamma = c_kernel.norm();
            const Eigen::VectorXd fund =
                (split.kernel * c_kernel.transpose()) / (gamma * gamma);

            // ker c within V^0, then the rest of ker c transverse to V^0.
            const Eigen::MatrixXd costless_kernel =
                split.kernel * row_nullspace(c_kernel);
            const Eigen::MatrixXd ker_c = row_nullspace(m.c());
            Eigen::MatrixXd shaved = ker_c;
            if (costless_kernel.cols() > 0) {
                shaved -= costless_kernel * (costless_kernel.transpose() * ker_c);
            }
            Eigen::MatrixXd risky_block(n, form.k);
            if (shaved.cols() > 0) {
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(shaved,
                                                      Eigen::ComputeFullU);
                Eigen::Index found = 0;
                for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
                    // Projecting an orthonormal frame leaves singular values
                    // of exactly 1 or 0; anything else means the rank split
                    // disagrees with the kernel geometry.
                    if (svd.singularValues()(j) > 0.5) ++found;
                }
                if (found != form.k) {
                    throw IllConditionedError(
                        "risky complement inside ker c has dimension " +
                        std::to_string(found) + ", expected " +
                        std::to_string(form.k));
                }
                risky_block = svd.matrixU().leftCols(form.k);
            } else if (form.k != 0) {
                throw IllConditionedError("empty ker c with positive rank");
            }

            Eigen::MatrixXd risky =
                r_orthonormalize(m.r(), risky_block, cutoff);
            form.g = align_dual_to_first(risky, (m.p() * risky).transpose());
            form.i = m.p() * fund;
            basis.leftCols(form.k) = risky;
            basis.middleCols(form.k, costless_kernel.cols()) = costless_kernel;
            basis.col(n - 1) = fund;
        } else {
            form.kind = CanonicalCase::NoCostlyRiskless;
            if (form.k == 0) {
                throw IllConditionedError(
                    "c is nonzero but invisible on every portfolio: rank 0 "
                    "with costless kernel");
            }
            Eigen::MatrixXd risky = r_orthonormalize(m.r(), split.risky, cutoff);
            Eigen::VectorXd c_dual = (m.c() * risky).transpose();
            if (c_dual.norm() <= m.tol().rank * std::max(1.0, c_norm)) {
                throw IllConditionedError(
                    "c is nonzero but vanishes on the risky block");
            }
            const double inv_m = align_dual_to_first(risky, c_dual);
            form.m = 1.0 / inv_m;
            if (form.k >= 2) {
                Eigen::MatrixXd tail = risky.rightCols(form.k - 1);
                form.g = align_dual_to_first(tail, (m.p() * tail).transpose());
                risky.rightCols(form.k - 1) = tail;
            } else {
                form.g = 0.0;
                form.g_defined = false;
            }
            form.i = (m.p() * risky.col(0)).value() * form.m;
            basis.leftCols(form.k) = risky;
            basis.rightCols(n - form.k) = split.kernel;
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) {
        throw IllConditionedError("canonical basis is numerically singular");
    }
    form.basis = basis;
    form.T = lu.inverse();

    // Deviation of the market, written in the canonical basis, from the
    // exact model matrices: basis^T r basis vs model r, c basis vs model c.
    const MarketSpec model = canonical_model(form.kind, form.k, form.m, form.g,
                                             form.i, n);
    double residual = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            const long double got = bilinear_ld(m.r(), basis.col(a), basis.col(b));
            residual = std::max(
                residual, std::abs(static_cast<double>(got - model.r(a, b))));
        }
    }
    const Eigen::RowVectorXd c_canon = m.c() * basis;
    const Eigen::RowVectorXd p_canon = m.p() * basis;
    residual = std::max(residual, (c_canon - model.c).cwiseAbs().maxCoeff());
    residual = std::max(residual, (p_canon - model.p).cwiseAbs().maxCoeff());
    form.residual = residual;
    return form;
}

DualInvariants invariants_dual(const Market& m) {
    const Eigen::MatrixXd rhat =
        m.r() + m.c().transpose() * m.c();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rhat);
    if (eig.info() != Eigen::Success) {
        throw DegenerateMarketError("eigendecomposition of r + c^T c failed");
    }
    const auto& values = eig.eigenvalues();
    const double lambda_max = values.size() > 0 ? values.maxCoeff() : 0.0;
    if (values.size() == 0 ||
        values.minCoeff() <= m.tol().rank * std::max(1.0, lambda_max)) {
        throw DegenerateMarketError(
            "r + c^T c is singular to tolerance; the market is degenerate");
    }

    // Solve in extended precision with one refinement step. On m = 0
    // markets the exact pairing r^*(c,c) sits on the boundary value 1 and
    // m = sqrt(1/r^*(c,c) - 1) amplifies any solve noise by a square root,
    // so plain double solves would smear m ~ 0 up to ~1e-5.
    using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const MatrixXld rhat_ld = rhat.cast<long double>();
    const Eigen::PartialPivLU<MatrixXld> lu(rhat_ld);
    auto pairing = [&](const Eigen::RowVectorXd& left,
                       const Eigen::RowVectorXd& right) -> long double {
        const VectorXld b = right.transpose().cast<long double>();
        VectorXld x = lu.solve(b);
        x += lu.solve(b - rhat_ld * x);
        return (left.cast<long double>() * x).value();
    };

    DualInvariants out;
    const long double cc = pairing(m.c(), m.c());
    const long double pc = pairing(m.p(), m.c());
    const long double pp = pairing(m.p(), m.p());
    out.rhat_cc = static_cast<double>(cc);
    out.rhat_pc = static_cast<double>(pc);
    out.rhat_pp = static_cast<double>(pp);
    if (!(cc > 0.0L)) {
        throw DegenerateMarketError(
            "c vanishes in the dual form; the market is degenerate");
    }
    // Entry rounding leaves markets that sit on the m = 0 stratum a
    // distance ~eps * cond^2 away from it, and the square root would blow
    // that up to ~1e-6. Snap squared invariants below the module's rank
    // tolerance to zero, mirroring the rank decision canonicalize makes.
    const long double snap = static_cast<long double>(m.tol().rank);
    auto sqrt_snapped = [&](long double value) {
        if (value <= snap) return 0.0;
        return static_cast<double>(std::sqrt(value));
    };
    out.m = sqrt_snapped(1.0L / cc - 1.0L);
    out.i = static_cast<double>(pc / cc);
    out.g = sqrt_snapped(pp - pc * pc / cc);
    return out;
}

namespace {

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

InvariantDeltas compare_invariants(const CanonicalForm& a,
                                   const CanonicalForm& b, double tol) {
    InvariantDeltas d;
    d.dimension_equal = a.T.rows() == b.T.rows();
    d.case_equal = a.kind == b.kind;
    d.k_equal = a.k == b.k;

    bool match = d.dimension_equal && d.case_equal && d.k_equal;
    if (a.m_defined && b.m_defined) {
        d.m_compared = true;
        d.dm = std::abs(a.m - b.m);
        match = match && close_rel(a.m, b.m, tol);
    }
    if (a.i_defined && b.i_defined) {
        d.i_compared = true;
        d.di = std::abs(a.i - b.i);
        match = match && close_rel(a.i, b.i, tol);
    }
    if (a.g_defined && b.g_defined) {
        d.g_compared = true;
        d.dg = std::abs(a.g - b.g);
        match = match && close_rel(a.g, b.g, tol);
    }
    d.verdict = match;
    return d;
}

InvariantDeltas isomorphic_report(const Market& m1, const Market& m2,
                                  double tol_iso) {
    return compare_invariants(canonicalize(m1), canonicalize(m2), tol_iso);
}

bool isomorphic(const Market& m1, const Market& m2, double tol_iso) {
    return isomorphic_report(m1, m2, tol_iso).verdict;
}

bool isomorphic(const Market& m1, const Market& m2) {
    return isomorphic(m1, m2, m1.tol().iso);
}

namespace {

enum class CostClass { One, Zero, Other };

CostClass classify_cost(const Market& m, const Portfolio& v) {
    const double value = cost(m, v);
    const double scale = std::max(1.0, m.c().norm() * v.norm());
    if (std::abs(value - 1.0) <= m.tol().rank * scale) return CostClass::One;
    if (std::abs(value) <= m.tol().rank * scale) return CostClass::Zero;
    return CostClass::Other;
}

} // namespace

bool pointed_isomorphic(const Market& m1, const Portfolio& v1,
                        const Market& m2, const Portfolio& v2) {
    if (m1.dimension() != m2.dimension()) {
        throw DimensionMismatchError(
            "pointed isomorphism is defined for markets of equal dimension");
    }
    if (!degeneracy_report(m1).nondegenerate ||
        !degeneracy_report(m2).nondegenerate) {
        throw DegenerateMarketError(
            "pointed isomorphism requires nondegenerate markets");
    }

    const CostClass class1 = classify_cost(m1, v1);
    const CostClass class2 = classify_cost(m2, v2);
    if (class1 == CostClass::Other || class2 == CostClass::Other ||
        class1 != class2) {
        throw UnsupportedCostClassError(
            "marked portfolios must both have cost 1 or both be costless");
    }

    const double tol = m1.tol().iso;
    if (!isomorphic(m1, m2, tol)) return false;
    if (class1 == CostClass::One) {
        const RiskReturnPoint a = phi(m1, v1);
        const RiskReturnPoint b = phi(m2, v2);
        return close_rel(a.rr, b.rr, tol) && close_rel(a.er, b.er, tol);
    }
    const CostFreePoint a = psi(m1, v1);
    const CostFreePoint b = psi(m2, v2);
    return close_rel(a.risk, b.risk, tol) && close_rel(a.payoff, b.payoff, tol);
}

} // namespace markowitz
