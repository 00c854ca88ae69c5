#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "markowitz/optimize.hpp"
#include "support.hpp"

using namespace markowitz;
using testsupport::close_rel;
using testsupport::market_from_params;
using testsupport::oracle_min_risk;
using testsupport::random_params;
using testsupport::random_transform;

namespace {

Market fixture_no_costly_riskless() {
    Eigen::RowVectorXd c(3), p(3);
    c << 1, 0, 0;
    p << 1, 2, 0;
    return Market(MarketSpec{Eigen::MatrixXd::Identity(3, 3), c, p});
}

Market fixture_riskless_with_cost() {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 3);
    r(0, 0) = 1;
    r(1, 1) = 1;
    Eigen::RowVectorXd c(3), p(3);
    c << 0, 0, 1;
    p << 2, 0, 1.05;
    return Market(MarketSpec{r, c, p});
}

// Projection residual of v against the span of the given portfolios.
double span_residual(const std::vector<Portfolio>& funds, const Portfolio& v) {
    if (funds.empty()) return v.norm();
    Eigen::MatrixXd basis(v.size(), static_cast<Eigen::Index>(funds.size()));
    for (size_t j = 0; j < funds.size(); ++j) {
        basis.col(static_cast<Eigen::Index>(j)) = funds[j];
    }
    const Eigen::VectorXd coeffs =
        basis.completeOrthogonalDecomposition().solve(v);
    return (v - basis * coeffs).norm();
}

} // namespace

TEST_CASE("min_risk_portfolio matches the elimination oracle on fixtures") {
    const Market m = fixture_no_costly_riskless();

    const Portfolio v1 = min_risk_portfolio(m, 1.0, 3.0);
    CHECK(v1(0) == doctest::Approx(1.0));
    CHECK(v1(1) == doctest::Approx(1.0));
    CHECK(v1(2) == doctest::Approx(0.0));
    const auto oracle1 = oracle_min_risk(m.spec(), 1.0, 3.0);
    REQUIRE(oracle1.has_value());
    CHECK(*oracle1 == doctest::Approx(std::sqrt(2.0)));
    CHECK(risk(m, v1) == doctest::Approx(*oracle1));

    const Portfolio v2 = min_risk_portfolio(m, 1.0, 1.0);
    CHECK(v2(0) == doctest::Approx(1.0));
    CHECK(v2(1) == doctest::Approx(0.0));
    CHECK(risk(m, v2) == doctest::Approx(1.0));
    CHECK(*oracle_min_risk(m.spec(), 1.0, 1.0) == doctest::Approx(1.0));

    const Market flat = fixture_riskless_with_cost();
    const Portfolio v3 = min_risk_portfolio(flat, 1.0, 1.55);
    CHECK(v3(0) == doctest::Approx(0.25));
    CHECK(v3(1) == doctest::Approx(0.0));
    CHECK(v3(2) == doctest::Approx(1.0));
    CHECK(risk(flat, v3) == doctest::Approx(0.25));
    CHECK(*oracle_min_risk(flat.spec(), 1.0, 1.55) == doctest::Approx(0.25));
}

TEST_CASE("min_risk_portfolio flags genuinely infeasible targets") {
    // k = 1: the payoff is pinned by the cost.
    Eigen::MatrixXd r(1, 1);
    r << 1.0;
    Eigen::RowVectorXd c(1), p(1);
    c << 1.0;
    p << 1.5;
    const Market line(MarketSpec{r, c, p});
    CHECK_NOTHROW(min_risk_portfolio(line, 2.0, 3.0));
    CHECK_THROWS_AS(min_risk_portfolio(line, 2.0, 4.0), InfeasibleTargetError);

    // A zero-cost market cannot realize nonzero cost.
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Identity(2, 2);
    const Market free_market(
        MarketSpec{r2, Eigen::RowVectorXd::Zero(2), Eigen::RowVectorXd::Zero(2)});
    CHECK_THROWS_AS(min_risk_portfolio(free_market, 1.0, 0.0),
                    InfeasibleTargetError);
}

TEST_CASE("min_risk_portfolio beats or ties the oracle on random markets") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> pick_n(2, 6);
    std::uniform_real_distribution<double> target(-2.0, 2.0);
    for (int trial = 0; trial < 150; ++trial) {
        const Eigen::Index n = pick_n(rng);
        const CanonicalCase kind = trial % 2 == 0
                                       ? CanonicalCase::NoCostlyRiskless
                                       : CanonicalCase::RisklessWithCost;
        const auto params = random_params(kind, n, rng, true);
        const Market m = pushforward(market_from_params(params),
                                     random_transform(n, 1e2, rng));
        const double cost_target = target(rng);
        const double payoff_target = target(rng);
        const Portfolio v = min_risk_portfolio(m, cost_target, payoff_target);
        CHECK(std::abs(cost(m, v) - cost_target) <= 1e-8);
        CHECK(std::abs(payoff(m, v) - payoff_target) <= 1e-8);
        const auto oracle = oracle_min_risk(m.spec(), cost_target, payoff_target);
        REQUIRE(oracle.has_value());
        CHECK(close_rel(risk(m, v), *oracle, 1e-6));
    }
}

TEST_CASE("mutual funds span every risk minimizer") {
    const Market m = fixture_no_costly_riskless();
    const MutualFundBasis funds = mutual_funds(m);
    REQUIRE(funds.funds.size() == 2);
    CHECK_FALSE(funds.contains_riskfree);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> target(-2.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        const Portfolio v = min_risk_portfolio(m, target(rng), target(rng));
        CHECK(std::abs(v(2)) <= 1e-12);
        CHECK(span_residual(funds.funds, v) <= 1e-8 * std::max(1.0, v.norm()));
    }
}

TEST_CASE("the riskless fund joins the basis when one exists") {
    const Market m = fixture_riskless_with_cost();
    const MutualFundBasis funds = mutual_funds(m);
    REQUIRE(funds.funds.size() == 2);
    CHECK(funds.contains_riskfree);
    // Second fund is the cost-1 riskless portfolio e3.
    CHECK(risk(m, funds.funds[1]) <= 1e-12);
    CHECK(cost(m, funds.funds[1]) == doctest::Approx(1.0));
    // First fund spans the risky payoff direction e1.
    CHECK(std::abs(funds.funds[0](0)) == doctest::Approx(1.0));
}

TEST_CASE("a one-dimensional market has a single fund") {
    Eigen::MatrixXd r(1, 1);
    r << 1.0;
    Eigen::RowVectorXd c(1), p(1);
    c << 1.0;
    p << 1.5;
    const MutualFundBasis funds = mutual_funds(Market(MarketSpec{r, c, p}));
    REQUIRE(funds.funds.size() == 1);
    CHECK(funds.funds[0](0) == doctest::Approx(1.0));
    CHECK_FALSE(funds.contains_riskfree);
}

TEST_CASE("mutual_funds refuses zero-cost markets") {
    const Market free_market(MarketSpec{Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::RowVectorXd::Zero(2),
                                        Eigen::RowVectorXd::Zero(2)});
    CHECK_THROWS_AS(mutual_funds(free_market), DegenerateMarketError);
}

TEST_CASE("efficient_frontier reports the hyperbola parameters") {
    const FrontierCurve curve = efficient_frontier(fixture_no_costly_riskless());
    CHECK(curve.m == doctest::Approx(1.0));
    CHECK(curve.g == doctest::Approx(2.0));
    CHECK(curve.i == doctest::Approx(1.0));
    CHECK(curve.feasible_rule == FeasibleRule::RightOfCurve);

    // Sampled minimum-risk portfolios land on the curve: 4(x^2 - 1) = y^2.
    const Market m = fixture_no_costly_riskless();
    for (double payoff_target : {-1.0, 0.5, 1.0, 2.5, 4.0}) {
        const Portfolio v = min_risk_portfolio(m, 1.0, payoff_target);
        const RiskReturnPoint point = phi(m, v);
        const double lhs = 4.0 * (point.rr * point.rr - 1.0);
        const double rhs = point.er * point.er;
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, lhs));
    }
}

TEST_CASE("two-asset markets have no interior feasible points") {
    Eigen::RowVectorXd c(2), p(2);
    c << 1, 0;
    p << 1, 2;
    const Market m(MarketSpec{Eigen::MatrixXd::Identity(2, 2), c, p});
    const FrontierCurve curve = efficient_frontier(m);
    CHECK(curve.feasible_rule == FeasibleRule::CurveOnly);
    CHECK(feasible(m, curve.x_at(0.7), 0.7));
    CHECK_FALSE(feasible(m, curve.x_at(0.7) + 0.5, 0.7));
}

TEST_CASE("a riskless-with-cost frontier degenerates to lines") {
    const FrontierCurve curve = efficient_frontier(fixture_riskless_with_cost());
    CHECK(curve.m == 0.0);
    CHECK(curve.g == doctest::Approx(2.0));
    CHECK(curve.i == doctest::Approx(1.05));
    // Degenerate-line formula: x = |y + 1 - i| / g.
    CHECK(curve.x_at(1.05) == doctest::Approx(0.5));
}

TEST_CASE("efficient_frontier rejects unsupported markets") {
    const Market free_market(MarketSpec{Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::RowVectorXd::Zero(2),
                                        Eigen::RowVectorXd::Zero(2)});
    CHECK_THROWS_AS(efficient_frontier(free_market), ZeroCostMarketError);

    Eigen::MatrixXd r(2, 2);
    r << 1, 0, 0, 0;
    Eigen::RowVectorXd c(2), p(2);
    c << 1, 0;
    p << 2, 0;
    CHECK_THROWS_AS(efficient_frontier(Market(MarketSpec{r, c, p})),
                    DegenerateMarketError);
}

TEST_CASE("frontier_points solves the curve for x") {
    FrontierCurve curve;
    curve.m = 1.0;
    curve.g = 2.0;
    curve.i = 1.0;
    curve.n = 3;
    const auto points = frontier_points(curve, 0.0, 2.0, 3);
    REQUIRE(points.size() == 3);
    CHECK(points[0].second == doctest::Approx(0.0));
    CHECK(points[0].first == doctest::Approx(1.0)); // vertex: y + 1 - i = 0
    CHECK(points[2].second == doctest::Approx(2.0));
    CHECK(points[2].first == doctest::Approx(std::sqrt(2.0)));

    // Degenerate-line sampling: g^2 x^2 = (y + 1 - i)^2 at m = 0.
    FrontierCurve lines;
    lines.m = 0.0;
    lines.g = 2.0;
    lines.i = 1.0;
    lines.n = 3;
    const auto sampled = frontier_points(lines, 3.0, 4.0, 2);
    CHECK(sampled[0].first == doctest::Approx(1.5));

    for (const auto& [x, y] : points) {
        const double lhs = curve.g * curve.g * (x * x - curve.m * curve.m);
        const double rhs = (y + 1.0 - curve.i) * (y + 1.0 - curve.i);
        CHECK(std::abs(lhs - rhs) <=
              1e-9 * std::max(1.0, curve.g * curve.g * x * x));
        CHECK(x >= curve.m);
    }
}

TEST_CASE("frontier_points rejects flat curves and bad counts") {
    FrontierCurve flat;
    flat.m = 1.0;
    flat.g = 0.0;
    flat.i = 1.0;
    flat.n = 3;
    CHECK_THROWS_AS(frontier_points(flat, 0.0, 1.0, 5), ZeroGError);

    FrontierCurve fine;
    fine.m = 1.0;
    fine.g = 2.0;
    fine.i = 1.0;
    fine.n = 3;
    CHECK_THROWS_AS(frontier_points(fine, 0.0, 1.0, 1), Error);
}

TEST_CASE("feasible separates the plane at the frontier") {
    const Market m = fixture_no_costly_riskless();
    CHECK(feasible(m, 1.0, 0.0));        // the vertex
    CHECK_FALSE(feasible(m, 0.5, 0.0));  // left of minimum risk
    CHECK(feasible(m, 2.0, 0.0));        // strictly right
}

TEST_CASE("phi maps portfolios to risk-return coordinates") {
    const Market m = fixture_no_costly_riskless();
    Eigen::VectorXd v(3);
    v << 1, 1, 0;
    const RiskReturnPoint point = phi(m, v);
    CHECK(point.rr == doctest::Approx(std::sqrt(2.0)));
    CHECK(point.er == doctest::Approx(2.0));
    CHECK_FALSE(point.out_of_domain_sign);

    Eigen::VectorXd base(3);
    base << 1, 0, 0;
    CHECK(phi(m, base).rr == doctest::Approx(1.0));
    CHECK(phi(m, base).er == doctest::Approx(0.0));

    Eigen::VectorXd costless(3);
    costless << 0, 1, 0;
    CHECK_THROWS_AS(phi(m, costless), ZeroCostPortfolioError);

    Eigen::VectorXd borrowed(3);
    borrowed << -1, 0, 0;
    const RiskReturnPoint signed_point = phi(m, borrowed);
    CHECK(signed_point.out_of_domain_sign);
    CHECK(signed_point.rr == doctest::Approx(-1.0));
}

TEST_CASE("psi and the costless frontier") {
    const Market m = fixture_no_costly_riskless();
    CHECK(costless_frontier(m) == doctest::Approx(2.0));

    Eigen::VectorXd v(3);
    v << 0, 1, 0;
    const CostFreePoint point = psi(m, v);
    CHECK(point.risk == doctest::Approx(1.0));
    CHECK(point.payoff == doctest::Approx(2.0));
    CHECK(costless_feasible(m, point.risk, point.payoff));

    CHECK(psi(m, Eigen::VectorXd::Zero(3)).risk == 0.0);
    CHECK(psi(m, Eigen::VectorXd::Zero(3)).payoff == 0.0);

    Eigen::VectorXd wide(3);
    wide << 0, 1, 1;
    const CostFreePoint interior = psi(m, wide);
    CHECK(interior.risk == doctest::Approx(std::sqrt(2.0)));
    CHECK(interior.payoff == doctest::Approx(2.0));
    CHECK(costless_feasible(m, interior.risk, interior.payoff));
    // Strictly right of the lines: payoff < g * risk.
    CHECK(interior.payoff < costless_frontier(m) * interior.risk);

    CHECK_FALSE(costless_feasible(m, 0.5, 2.0)); // left of the lines

    // g = 0 markets have no costless frontier.
    Eigen::MatrixXd r(2, 2);
    r << 1, 0, 0, 0;
    Eigen::RowVectorXd c(2), p(2);
    c << 1, 0;
    p << 1.5, 0;
    CHECK_THROWS_AS(costless_frontier(Market(MarketSpec{r, c, p})),
                    GNotPositiveError);
}

TEST_CASE("minimization commutes with isomorphisms") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> target(-2.0, 2.0);
    const Market m = fixture_no_costly_riskless();
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::MatrixXd t = random_transform(3, 1e2, rng);
        const Market moved = pushforward(m, t);
        const double cost_target = target(rng);
        const double payoff_target = target(rng);
        const Portfolio direct =
            min_risk_portfolio(moved, cost_target, payoff_target);
        const Portfolio transported =
            t * min_risk_portfolio(m, cost_target, payoff_target);
        CHECK(std::abs(risk(moved, direct) - risk(moved, transported)) <= 1e-8);
        CHECK((direct - transported).norm() <=
              1e-6 * std::max(1.0, transported.norm()));
    }
}

TEST_CASE("minimizers of degenerate markets agree up to valueless directions") {
    // k = 2 in dimension 4: two valueless directions, so the minimizer is
    // only unique modulo them and the library picks the representative
    // without any valueless component.
    std::mt19937_64 rng(25);
    MarketSpec spec = canonical_model(CanonicalCase::NoCostlyRiskless, 2, 0.5,
                                      1.5, 0.8, 4);
    const Market base(spec);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd t = testsupport::random_transform(4, 1e2, rng);
        const Market moved = pushforward(base, t);
        const Portfolio direct = min_risk_portfolio(moved, 1.0, 2.0);
        const Portfolio transported = t * min_risk_portfolio(base, 1.0, 2.0);
        CHECK(std::abs(risk(moved, direct) - risk(moved, transported)) <= 1e-8);
        const Eigen::MatrixXd valueless =
            degeneracy_report(moved).valueless_basis;
        REQUIRE(valueless.cols() == 2);
        const Eigen::VectorXd difference = direct - transported;
        const Eigen::VectorXd outside =
            difference - valueless * (valueless.transpose() * difference);
        CHECK(outside.norm() <= 1e-8 * std::max(1.0, transported.norm()));
    }
}

TEST_CASE("costless feasibility in a market with a riskless fund") {
    const Market m = fixture_riskless_with_cost();
    CHECK(costless_frontier(m) == doctest::Approx(2.0));
    // ker c = span{e1, e2} and both directions are risky, so the image of
    // psi fills everything right of the lines.
    Eigen::VectorXd on_line(3), interior(3);
    on_line << 1, 0, 0;
    interior << 1, 1, 0;
    CHECK(costless_feasible(m, psi(m, on_line).risk, psi(m, on_line).payoff));
    CHECK(psi(m, interior).payoff <
          costless_frontier(m) * psi(m, interior).risk);
    CHECK(costless_feasible(m, psi(m, interior).risk,
                            psi(m, interior).payoff));
    CHECK_FALSE(costless_feasible(m, 0.2, 2.0));
    CHECK_FALSE(costless_feasible(m, -0.5, 0.0));
}

TEST_CASE("costless risk minimizers sit on the costless frontier") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> target(-2.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const auto params =
            random_params(CanonicalCase::NoCostlyRiskless, 4, rng, true);
        const Market m = pushforward(market_from_params(params),
                                     random_transform(4, 1e2, rng));
        const double g = costless_frontier(m);
        const double payoff_target = target(rng);
        const Portfolio v = min_risk_portfolio(m, 0.0, payoff_target);
        const CostFreePoint point = psi(m, v);
        CHECK(std::abs(std::abs(point.payoff) - g * point.risk) <= 1e-8);
    }
}
