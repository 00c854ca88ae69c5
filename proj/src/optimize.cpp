#include "markowitz/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace markowitz {

std::string to_string(FeasibleRule rule) {
    return rule == FeasibleRule::CurveOnly ? "CurveOnly" : "RightOfCurve";
}

double FrontierCurve::x_at(double y) const {
    const double dy = y + 1.0 - i;
    if (g == 0.0) {
        return dy == 0.0 ? m : std::numeric_limits<double>::infinity();
    }
    return std::sqrt(m * m + (dy / g) * (dy / g));
}

namespace {

// g values at the noise floor of the p-dual computation mean "no payoff
// direction", not "a payoff direction worth dividing by".
bool has_payoff_slope(const Market& m, const CanonicalForm& form) {
    return form.g > m.tol().rank * std::max(1.0, m.p().norm());
}

void require_consistent(const Market& m, double residual_payoff, double payoff,
                        double anchor) {
    const double scale = std::max({1.0, std::abs(payoff), std::abs(anchor)});
    if (std::abs(residual_payoff) > m.tol().rank * scale) {
        throw InfeasibleTargetError(
            "cost pins the payoff to " + std::to_string(anchor) +
            "; a payoff of " + std::to_string(payoff) +
            " is not attainable in this market");
    }
}

} // namespace

Portfolio min_risk_portfolio(const Market& m, double cost, double payoff) {
    const CanonicalForm form = canonicalize(m);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m.dimension());

    switch (form.kind) {
        case CanonicalCase::ZeroCost: {
            if (std::abs(cost) > m.tol().rank * std::max(1.0, std::abs(cost))) {
                throw InfeasibleTargetError(
                    "every portfolio of a zero-cost market has cost 0");
            }
            if (has_payoff_slope(m, form)) {
                w(0) = payoff / form.g;
            } else {
                require_consistent(m, payoff, payoff, 0.0);
            }
            break;
        }
        case CanonicalCase::RisklessWithCost: {
            w(m.dimension() - 1) = cost;
            const double residual = payoff - form.i * cost;
            if (form.k >= 1 && has_payoff_slope(m, form)) {
                w(0) = residual / form.g;
            } else {
                require_consistent(m, residual, payoff, form.i * cost);
            }
            break;
        }
        case CanonicalCase::NoCostlyRiskless: {
            w(0) = form.m * cost;
            const double residual = payoff - form.i * cost;
            if (form.k >= 2 && has_payoff_slope(m, form)) {
                w(1) = residual / form.g;
            } else {
                require_consistent(m, residual, payoff, form.i * cost);
            }
            break;
        }
    }
    return form.basis * w;
}

MutualFundBasis mutual_funds(const Market& m) {
    const CanonicalForm form = canonicalize(m);
    MutualFundBasis out;
    switch (form.kind) {
        case CanonicalCase::ZeroCost:
            throw DegenerateMarketError(
                "a zero-cost market has no cost constraint to span funds for");
        case CanonicalCase::NoCostlyRiskless:
            out.funds.push_back(form.basis.col(0));
            if (form.k >= 2) out.funds.push_back(form.basis.col(1));
            break;
        case CanonicalCase::RisklessWithCost:
            if (form.k >= 1) out.funds.push_back(form.basis.col(0));
            out.funds.push_back(form.basis.col(m.dimension() - 1));
            out.contains_riskfree = true;
            break;
    }
    return out;
}

namespace {

void require_frontier_market(const Market& m) {
    const double c_norm = m.c().norm();
    if (c_norm <= m.tol().rank * std::max({1.0, c_norm, m.p().norm()})) {
        throw ZeroCostMarketError(
            "the risk-return map phi is undefined on a zero-cost market");
    }
    if (m.dimension() < 2 || !degeneracy_report(m).nondegenerate) {
        throw DegenerateMarketError(
            "the efficient frontier is defined for nondegenerate markets "
            "of dimension >= 2");
    }
}

} // namespace

FrontierCurve efficient_frontier(const Market& m) {
    require_frontier_market(m);
    const CanonicalForm form = canonicalize(m);
    FrontierCurve curve;
    curve.m = form.m;
    curve.g = form.g;
    curve.i = form.i;
    curve.n = m.dimension();
    curve.feasible_rule =
        m.dimension() == 2 ? FeasibleRule::CurveOnly : FeasibleRule::RightOfCurve;
    return curve;
}

std::vector<std::pair<double, double>> frontier_points(
    const FrontierCurve& curve, double y_min, double y_max, int count) {
    if (count < 2) {
        throw Error("frontier sampling needs at least two points");
    }
    if (curve.g <= 0.0) {
        throw ZeroGError(
            "g = 0: the frontier collapses to the ray y = i - 1, x >= m and "
            "has no graph over y");
    }
    std::vector<std::pair<double, double>> points;
    points.reserve(static_cast<size_t>(count));
    const double step = (y_max - y_min) / (count - 1);
    for (int j = 0; j < count; ++j) {
        const double y = j == count - 1 ? y_max : y_min + j * step;
        points.emplace_back(curve.x_at(y), y);
    }
    return points;
}

bool feasible(const Market& m, double x, double y) {
    const FrontierCurve curve = efficient_frontier(m);
    const double tol =
        m.tol().iso * std::max({1.0, std::abs(x), std::abs(y), curve.m});
    if (curve.feasible_rule == FeasibleRule::RightOfCurve) {
        return x >= curve.x_at(y) - tol;
    }
    const double lhs = curve.g * curve.g * (x * x - curve.m * curve.m);
    const double rhs = (y + 1.0 - curve.i) * (y + 1.0 - curve.i);
    const double residual_tol =
        m.tol().iso * std::max({1.0, curve.g * curve.g * x * x, rhs});
    return std::abs(lhs - rhs) <= residual_tol && x >= curve.m - tol;
}

RiskReturnPoint phi(const Market& m, const Portfolio& v) {
    const double c_v = cost(m, v);
    const double scale = std::max(1.0, m.c().norm() * v.norm());
    if (std::abs(c_v) <= m.tol().rank * scale) {
        throw ZeroCostPortfolioError(
            "phi is undefined on costless portfolios; use psi");
    }
    RiskReturnPoint out;
    out.rr = risk(m, v) / c_v;
    out.er = (payoff(m, v) - c_v) / c_v;
    out.out_of_domain_sign = c_v < 0.0;
    return out;
}

CostFreePoint psi(const Market& m, const Portfolio& v) {
    return CostFreePoint{risk(m, v), payoff(m, v)};
}

double costless_frontier(const Market& m) {
    const CanonicalForm form = canonicalize(m);
    if (!form.g_defined || !has_payoff_slope(m, form)) {
        throw GNotPositiveError(
            "the costless frontier y = +-g x needs g > 0");
    }
    return form.g;
}

bool costless_feasible(const Market& m, double x, double y) {
    const CanonicalForm form = canonicalize(m);
    if (!form.g_defined || !has_payoff_slope(m, form)) {
        throw GNotPositiveError(
            "the costless frontier y = +-g x needs g > 0");
    }
    const double tol =
        m.tol().iso * std::max({1.0, std::abs(y), form.g * std::abs(x)});
    if (x < -tol) return false;

    // The image of psi covers everything right of the lines as soon as the
    // costless portfolios span two or more risky directions.
    Eigen::Index risky_costless = form.k;
    if (form.kind == CanonicalCase::NoCostlyRiskless) risky_costless = form.k - 1;
    if (risky_costless <= 1) {
        return std::abs(std::abs(y) - form.g * x) <= tol;
    }
    return std::abs(y) <= form.g * x + tol;
}

} // namespace markowitz
