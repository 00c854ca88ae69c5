// Command-line front end: classification, isomorphism checks, arbitrage
// detection, risk minimization and frontier emission over market files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "markowitz/classify.hpp"
#include "markowitz/io.hpp"
#include "markowitz/market.hpp"
#include "markowitz/optimize.hpp"

namespace {

using namespace markowitz;

// Human-facing numbers: trims to 12 significant digits so clean fixtures
// print clean values.
std::string fmt(double value) {
    if (value == 0.0) value = 0.0; // flush negative zero
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

// File-facing numbers: full round-trip precision.
std::string fmt_exact(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string fmt_vector(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (j > 0) out += ' ';
        out += fmt(v(j));
    }
    return out;
}

Market load(const std::string& path) {
    return Market(load_market(path));
}

std::string headline(const CanonicalForm& form) {
    std::string line = to_string(form.kind) + " k=" + std::to_string(form.k);
    if (form.m_defined) line += " m=" + fmt(form.m);
    if (form.g_defined) line += " g=" + fmt(form.g);
    if (form.i_defined) line += " i=" + fmt(form.i);
    return line;
}

void print_degeneracy(const DegeneracyReport& report) {
    if (report.arbitrage.has_value()) {
        std::cout << "arbitrage: witness " << fmt_vector(*report.arbitrage)
                  << "\n";
    } else {
        std::cout << "arbitrage: none\n";
    }
    std::cout << "valueless_dim: " << report.valueless_basis.cols() << "\n";
    std::cout << "cp_independent: " << (report.cp_independent ? "true" : "false")
              << "\n";
    std::cout << "nondegenerate: " << (report.nondegenerate ? "true" : "false")
              << "\n";
}

int cmd_classify(const std::string& path) {
    const Market market = load(path);
    const CanonicalForm form = canonicalize(market);
    std::cout << headline(form) << "\n";
    std::cout << "g_defined: " << (form.g_defined ? "true" : "false") << "\n";
    std::cout << "residual: " << fmt(form.residual) << "\n";
    print_degeneracy(degeneracy_report(market));
    return 0;
}

int cmd_isomorphic(const std::string& path_a, const std::string& path_b,
                   double tol) {
    const Market a = load(path_a);
    const Market b = load(path_b);
    const InvariantDeltas deltas = isomorphic_report(a, b, tol);
    std::cout << "isomorphic: " << (deltas.verdict ? "true" : "false") << "\n";
    std::cout << "case_equal: " << (deltas.case_equal ? "true" : "false")
              << "\n";
    std::cout << "k_equal: " << (deltas.k_equal ? "true" : "false") << "\n";
    auto delta_line = [](const char* name, bool compared, double delta) {
        std::cout << name << ": " << (compared ? fmt(delta) : "not-compared")
                  << "\n";
    };
    delta_line("delta_m", deltas.m_compared, deltas.dm);
    delta_line("delta_g", deltas.g_compared, deltas.dg);
    delta_line("delta_i", deltas.i_compared, deltas.di);
    return deltas.verdict ? 0 : 2;
}

int cmd_arbitrage(const std::string& path) {
    const Market market = load(path);
    const auto witness = find_arbitrage(market);
    if (witness.has_value()) {
        std::cout << "arbitrage witness: " << fmt_vector(*witness) << "\n";
        return 2;
    }
    std::cout << "arbitrage-free\n";
    return 0;
}

int cmd_optimize(const std::string& path, double cost_target,
                 double payoff_target) {
    const Market market = load(path);
    const Portfolio v = min_risk_portfolio(market, cost_target, payoff_target);
    std::cout << "portfolio: " << fmt_vector(v) << "\n";
    std::cout << "risk: " << fmt(risk(market, v)) << "\n";
    std::cout << "cost: " << fmt(cost(market, v)) << "\n";
    std::cout << "payoff: " << fmt(payoff(market, v)) << "\n";
    if (std::abs(cost_target) > market.tol().rank) {
        const RiskReturnPoint point = phi(market, v);
        std::cout << "rr: " << fmt(point.rr) << "\n";
        std::cout << "er: " << fmt(point.er) << "\n";
    }
    return 0;
}

int cmd_funds(const std::string& path) {
    const Market market = load(path);
    const MutualFundBasis basis = mutual_funds(market);
    for (size_t j = 0; j < basis.funds.size(); ++j) {
        std::cout << "fund " << j + 1 << ": " << fmt_vector(basis.funds[j])
                  << "\n";
    }
    std::cout << "contains_riskfree: "
              << (basis.contains_riskfree ? "true" : "false") << "\n";
    return 0;
}

int cmd_frontier(const std::string& path, double y_min, double y_max,
                 int count, const std::string& out_path) {
    const Market market = load(path);
    const FrontierCurve curve = efficient_frontier(market);
    auto points = frontier_points(curve, y_min, y_max, count);

    // Plotting wants the vertex row (y = i - 1, x = m) even when the grid
    // does not land on it.
    const double vertex_y = curve.i - 1.0;
    if (vertex_y >= y_min && vertex_y <= y_max) {
        bool present = false;
        for (const auto& [x, y] : points) present = present || y == vertex_y;
        if (!present) points.emplace_back(curve.m, vertex_y);
    }
    std::sort(points.begin(), points.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    std::ofstream csv(out_path);
    if (!csv) throw ParseError(out_path + ": cannot open for writing");
    csv << "y,x\n";
    for (const auto& [x, y] : points) {
        csv << fmt_exact(y) << ',' << fmt_exact(x) << "\n";
    }
    if (!csv.good()) throw ParseError(out_path + ": write failed");

    const std::string meta_path = out_path + ".meta.json";
    std::ofstream meta(meta_path);
    if (!meta) throw ParseError(meta_path + ": cannot open for writing");
    meta << "{\n"
         << "  \"m\": " << fmt_exact(curve.m) << ",\n"
         << "  \"g\": " << fmt_exact(curve.g) << ",\n"
         << "  \"i\": " << fmt_exact(curve.i) << ",\n"
         << "  \"n\": " << curve.n << ",\n"
         << "  \"feasible_rule\": \"" << to_string(curve.feasible_rule)
         << "\",\n"
         << "  \"vertex\": { \"x\": " << fmt_exact(curve.m)
         << ", \"y\": " << fmt_exact(vertex_y) << " }\n"
         << "}\n";

    std::cout << "wrote " << points.size() << " points to " << out_path << "\n";
    std::cout << "wrote metadata to " << meta_path << "\n";
    return 0;
}

int cmd_estimate(const std::string& returns_path, const std::string& prices_path,
                 const std::string& out_path) {
    const ReturnsTable table = load_returns(returns_path, prices_path);
    MarketFile file;
    file.spec = estimate_market(table);
    validate(file.spec);
    file.labels = table.assets;
    save_market(file, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classification and portfolio optimization for Markowitz "
                 "markets"};
    app.require_subcommand(1);

    std::string path_a, path_b, out_path, returns_path, prices_path;
    double cost_target = 0.0, payoff_target = 0.0;
    double tol = ToleranceConfig{}.iso;
    double y_min = -1.0, y_max = 1.0;
    int count = 33;

    auto* classify_cmd =
        app.add_subcommand("classify", "Canonical form and invariants");
    classify_cmd->add_option("market", path_a, "market file")->required();

    auto* isomorphic_cmd =
        app.add_subcommand("isomorphic", "Compare two markets up to "
                                         "isomorphism");
    isomorphic_cmd->add_option("market-a", path_a, "first market")->required();
    isomorphic_cmd->add_option("market-b", path_b, "second market")->required();
    isomorphic_cmd->add_option("--tol", tol, "invariant tolerance");

    auto* arbitrage_cmd =
        app.add_subcommand("arbitrage", "Search for an arbitrage portfolio");
    arbitrage_cmd->add_option("market", path_a, "market file")->required();

    auto* optimize_cmd =
        app.add_subcommand("optimize", "Minimum-risk portfolio for a cost "
                                       "and payoff");
    optimize_cmd->add_option("market", path_a, "market file")->required();
    optimize_cmd->add_option("--cost", cost_target, "target cost")->required();
    optimize_cmd->add_option("--payoff", payoff_target, "target payoff")
        ->required();

    auto* funds_cmd = app.add_subcommand("funds", "Mutual-fund basis");
    funds_cmd->add_option("market", path_a, "market file")->required();

    auto* frontier_cmd =
        app.add_subcommand("frontier", "Sample the efficient frontier to CSV");
    frontier_cmd->add_option("market", path_a, "market file")->required();
    frontier_cmd->add_option("--ymin", y_min, "lowest return")->required();
    frontier_cmd->add_option("--ymax", y_max, "highest return")->required();
    frontier_cmd->add_option("--count", count, "number of samples")
        ->required()
        ->check(CLI::Range(2, 10000000));
    frontier_cmd->add_option("--out", out_path, "output CSV path")->required();

    auto* estimate_cmd =
        app.add_subcommand("estimate", "Estimate a market from return "
                                       "observations");
    estimate_cmd->add_option("--returns", returns_path, "observations CSV")
        ->required();
    estimate_cmd->add_option("--prices", prices_path, "prices CSV")->required();
    estimate_cmd->add_option("--out", out_path, "output market file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (classify_cmd->parsed()) return cmd_classify(path_a);
        if (isomorphic_cmd->parsed()) return cmd_isomorphic(path_a, path_b, tol);
        if (arbitrage_cmd->parsed()) return cmd_arbitrage(path_a);
        if (optimize_cmd->parsed())
            return cmd_optimize(path_a, cost_target, payoff_target);
        if (funds_cmd->parsed()) return cmd_funds(path_a);
        if (frontier_cmd->parsed())
            return cmd_frontier(path_a, y_min, y_max, count, out_path);
        if (estimate_cmd->parsed())
            return cmd_estimate(returns_path, prices_path, out_path);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NonFiniteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NotSymmetricError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NotPositiveSemidefiniteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DimensionMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "verdict: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 1;
}
