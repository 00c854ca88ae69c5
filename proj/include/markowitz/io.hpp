#pragma once

#include <map>
#include <string>
#include <vector>

#include "markowitz/market.hpp"

namespace markowitz {

/// On-disk market document: the spec plus optional asset labels and
/// free-form metadata. Numbers round-trip bit-exactly (17 significant
/// digits on save).
struct MarketFile {
    MarketSpec spec;
    std::vector<std::string> labels;
    std::map<std::string, std::string> meta;
};

/// Reads a market document. Throws ParseError with field context on
/// malformed input; the caller validates the spec.
MarketFile load_market_file(const std::string& path);

/// load_market_file, then validate.
MarketSpec load_market(const std::string& path);

void save_market(const MarketFile& file, const std::string& path);
void save_market(const MarketSpec& spec, const std::string& path);

/// Serialize to the document text without touching the filesystem.
std::string market_to_string(const MarketFile& file);
MarketFile market_from_string(const std::string& text,
                              const std::string& origin = "<string>");

/// Per-period payoff observations (rows) for n assets (columns), plus the
/// assets' current prices.
struct ReturnsTable {
    std::vector<std::string> assets;
    Eigen::MatrixXd rows;
    Eigen::RowVectorXd prices;
};

/// Parses an observations CSV (header row of asset names, one observation
/// per row) and a prices CSV (single row aligned with the header).
ReturnsTable load_returns(const std::string& returns_path,
                          const std::string& prices_path);

/// Estimates a market from observations: p = column means, r = unbiased
/// sample covariance (divisor T - 1), c = prices. Throws
/// InsufficientDataError when fewer than two observations are given.
MarketSpec estimate_market(const ReturnsTable& returns);

} // namespace markowitz
