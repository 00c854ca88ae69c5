#pragma once

#include <optional>
#include <string>

#include "markowitz/market.hpp"

namespace markowitz {

/// The three shapes an arbitrage-free market can canonicalize to.
enum class CanonicalCase {
    /// A risk-free portfolio with nonzero cost exists; m = 0.
    RisklessWithCost,
    /// c != 0 but every risk-free portfolio is costless; m > 0.
    NoCostlyRiskless,
    /// c vanishes identically; only (k, g) classify the market.
    ZeroCost,
};

std::string to_string(CanonicalCase c);

/// Arbitrage and degeneracy diagnostics for a market.
struct DegeneracyReport {
    /// A portfolio with zero risk, zero cost and payoff 1, when one exists.
    std::optional<Portfolio> arbitrage;
    bool has_valueless = false;
    /// Basis of the valueless directions (riskless, costless, zero payoff).
    Eigen::MatrixXd valueless_basis;
    bool cp_independent = false;
    bool nondegenerate = false;
};

/// A market's isomorphism class and the change of basis that witnesses it.
///
/// The invariants mean: k = rank of r; m = minimum risk of a cost-1
/// portfolio; g = maximum payoff among unit-risk costless portfolios;
/// i = payoff anchor (the asymptotes of the efficient frontier meet at
/// (0, i-1)). Which of them are meaningful depends on `kind`:
/// ZeroCost defines only (k, g); when kind is NoCostlyRiskless with k = 1
/// the parameter g is not an invariant and g_defined is false (g is
/// stored as 0 to keep the tuple fixed-width).
struct CanonicalForm {
    CanonicalCase kind = CanonicalCase::NoCostlyRiskless;
    Eigen::Index k = 0;
    double m = 0.0;
    double g = 0.0;
    double i = 0.0;
    bool m_defined = true;
    bool g_defined = true;
    bool i_defined = true;
    /// Maps market coordinates to canonical coordinates; invertible.
    Eigen::MatrixXd T;
    /// Inverse of T: columns are the canonical basis written in market
    /// coordinates.
    Eigen::MatrixXd basis;
    /// Max entrywise deviation of the pushforward of the market through T
    /// from the canonical model matrices.
    double residual = 0.0;
};

/// Dual-route invariants from the auxiliary form r^(u,v) = r(u,v) + c(u)c(v),
/// which is positive definite exactly on nondegenerate markets.
struct DualInvariants {
    double m = 0.0;
    double g = 0.0;
    double i = 0.0;
    double rhat_cc = 0.0;
    double rhat_pc = 0.0;
    double rhat_pp = 0.0;
};

/// Per-invariant differences behind an isomorphism verdict.
struct InvariantDeltas {
    bool dimension_equal = false;
    bool case_equal = false;
    bool k_equal = false;
    double dm = 0.0;
    double dg = 0.0;
    double di = 0.0;
    /// g enters the verdict only when defined on both sides.
    bool g_compared = false;
    bool m_compared = false;
    bool i_compared = false;
    bool verdict = false;
};

/// Searches the costless risk-free subspace for a direction with nonzero
/// payoff. Returns a witness normalized so its payoff is 1, or nullopt
/// when the market is arbitrage free.
std::optional<Portfolio> find_arbitrage(const Market& m);

/// Full degeneracy diagnostics: arbitrage witness, valueless directions
/// (riskless and costless and payoff-free), and linear independence of c
/// and p decided by the singular values of their 2 x n stack.
DegeneracyReport degeneracy_report(const Market& m);

/// The exact model matrices of the isomorphism class (kind, k, m, g, i)
/// in dimension n.
MarketSpec canonical_model(CanonicalCase kind, Eigen::Index k, double m,
                           double g, double i, Eigen::Index n);

/// Classifies an arbitrage-free market: determines its case and invariants
/// and constructs the invertible map T taking it onto the canonical model.
/// Throws ArbitrageMarketError on markets with arbitrage and
/// IllConditionedError when a pivot contradicts the computed rank.
CanonicalForm canonicalize(const Market& m);

/// Invariant extraction through the inverse of r^ = r + c^T c, fully
/// independent of the canonicalization route. Requires a nondegenerate
/// market (throws DegenerateMarketError when r^ is singular to tolerance).
DualInvariants invariants_dual(const Market& m);

/// Compares the defined invariants of two canonical forms at relative
/// tolerance `tol` (floored at 1).
InvariantDeltas compare_invariants(const CanonicalForm& a,
                                   const CanonicalForm& b, double tol);

/// Whether two arbitrage-free markets are isomorphic: equal dimension,
/// case and k, and agreement of the defined invariants at tolerance
/// tol_iso (the market's tol.iso when omitted).
bool isomorphic(const Market& m1, const Market& m2);
bool isomorphic(const Market& m1, const Market& m2, double tol_iso);
InvariantDeltas isomorphic_report(const Market& m1, const Market& m2,
                                  double tol_iso);

/// Pointed isomorphism: an isomorphism of markets carrying v1 to v2.
/// Supported for marked portfolios that are both of cost 1 (decided via
/// phi) or both costless (decided via psi); any other cost class throws
/// UnsupportedCostClassError. Both markets must be nondegenerate and of
/// equal dimension.
bool pointed_isomorphic(const Market& m1, const Portfolio& v1,
                        const Market& m2, const Portfolio& v2);

} // namespace markowitz
