#pragma once

#include <utility>
#include <vector>

#include "markowitz/classify.hpp"
#include "markowitz/market.hpp"

namespace markowitz {

/// Who is allowed to sit on which side of the frontier.
enum class FeasibleRule {
    /// n = 2: the feasible set is exactly the frontier curve.
    CurveOnly,
    /// n > 2: everything on or to the right of the curve is feasible.
    RightOfCurve,
};

std::string to_string(FeasibleRule rule);

/// The efficient frontier in (relative risk, expected return) coordinates:
/// the right arm of g^2 (x^2 - m^2) = (y + 1 - i)^2, which degenerates to
/// a pair of lines through (0, i - 1) when m = 0.
struct FrontierCurve {
    double m = 0.0;
    double g = 0.0;
    double i = 0.0;
    Eigen::Index n = 0;
    FeasibleRule feasible_rule = FeasibleRule::RightOfCurve;

    /// x on the right arm at height y.
    double x_at(double y) const;
};

/// Image of a portfolio under phi = (relative risk, expected return).
struct RiskReturnPoint {
    double rr = 0.0;
    double er = 0.0;
    /// Set when the portfolio's cost is negative: phi is defined there but
    /// rr comes out signed, outside the frontier geometry.
    bool out_of_domain_sign = false;
};

/// Image of a portfolio under psi = (risk, payoff), both in currency.
struct CostFreePoint {
    double risk = 0.0;
    double payoff = 0.0;
};

/// One or two portfolios spanning every risk minimizer of the market.
struct MutualFundBasis {
    std::vector<Portfolio> funds;
    bool contains_riskfree = false;
};

/// The portfolio of minimum risk among those with the given cost and
/// payoff, computed by pinning coordinates in the canonical basis and
/// pulling back. Among minimizers differing by riskless valueless
/// directions, returns the one with no component in them. Throws
/// InfeasibleTargetError when the two constraints are inconsistent for
/// this market and ArbitrageMarketError on markets with arbitrage.
Portfolio min_risk_portfolio(const Market& m, double cost, double payoff);

/// The mutual funds: pullbacks of the canonical e1 (and e2 when k >= 2)
/// for markets without costly riskless portfolios, or of e1 and the
/// cost-1 riskless fund when one exists. Throws DegenerateMarketError on
/// zero-cost markets, where no cost constraint exists to optimize against.
MutualFundBasis mutual_funds(const Market& m);

/// Frontier parameters (m, g, i) of a nondegenerate market with c != 0
/// and n >= 2. Throws ZeroCostMarketError or DegenerateMarketError.
FrontierCurve efficient_frontier(const Market& m);

/// `count` frontier samples equally spaced in y over [y_min, y_max],
/// each satisfying the curve identity. Throws ZeroGError when g = 0 (the
/// curve collapses to the ray { (x, i-1) : x >= m }, which has no graph
/// over y).
std::vector<std::pair<double, double>> frontier_points(
    const FrontierCurve& curve, double y_min, double y_max, int count);

/// Whether (x, y) is attainable by some portfolio of the market under the
/// market's feasible rule.
bool feasible(const Market& m, double x, double y);

/// phi(v) = (sqrt(r(v,v)) / c(v), (p(v) - c(v)) / c(v)). Throws
/// ZeroCostPortfolioError on the kernel of c, where phi is undefined.
RiskReturnPoint phi(const Market& m, const Portfolio& v);

/// psi(v) = (sqrt(r(v,v)), p(v)); defined for every portfolio.
CostFreePoint psi(const Market& m, const Portfolio& v);

/// Slope g of the costless efficient frontier { (x, +-g x) : x >= 0 }.
/// Throws GNotPositiveError when g = 0.
double costless_frontier(const Market& m);

/// Whether (x, y) is attainable by a costless portfolio: on the costless
/// frontier lines for n = 2, on or right of them for n > 2.
bool costless_feasible(const Market& m, double x, double y);

} // namespace markowitz
