#include "markowitz/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace markowitz {

namespace {

// 17 significant digits: enough for any double to survive the decimal
// round trip bit-exactly.
std::string fmt_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size() + 2);
    for (char ch : text) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buffer[8];
                    std::snprintf(buffer, sizeof(buffer), "\\u%04x", ch);
                    out += buffer;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

void append_row(std::string& out, const Eigen::RowVectorXd& row) {
    out += '[';
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (j > 0) out += ", ";
        out += fmt_number(row(j));
    }
    out += ']';
}

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ParseError(origin + ": " + what);
}

double read_number(const json& value, const std::string& origin,
                   const std::string& field) {
    if (!value.is_number()) {
        fail(origin, "field '" + field + "' must contain numbers");
    }
    return value.get<double>();
}

} // namespace

std::string market_to_string(const MarketFile& file) {
    const Eigen::Index n = file.spec.dimension();
    std::string out = "{\n  \"n\": " + std::to_string(n) + ",\n  \"r\": [\n";
    for (Eigen::Index a = 0; a < n; ++a) {
        out += "    ";
        append_row(out, file.spec.r.row(a));
        out += a + 1 < n ? ",\n" : "\n";
    }
    out += "  ],\n  \"c\": ";
    append_row(out, file.spec.c);
    out += ",\n  \"p\": ";
    append_row(out, file.spec.p);
    if (!file.labels.empty()) {
        out += ",\n  \"labels\": [";
        for (size_t j = 0; j < file.labels.size(); ++j) {
            if (j > 0) out += ", ";
            out += '"' + escape(file.labels[j]) + '"';
        }
        out += ']';
    }
    if (!file.meta.empty()) {
        out += ",\n  \"meta\": {";
        bool first = true;
        for (const auto& [key, value] : file.meta) {
            if (!first) out += ", ";
            first = false;
            out += '"' + escape(key) + "\": \"" + escape(value) + '"';
        }
        out += '}';
    }
    out += "\n}\n";
    return out;
}

MarketFile market_from_string(const std::string& text,
                              const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        fail(origin, err.what());
    }
    if (!doc.is_object()) fail(origin, "top level must be an object");
    for (const std::string required : {"n", "r", "c", "p"}) {
        if (!doc.contains(required)) {
            fail(origin, "missing field '" + required + "'");
        }
    }
    if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1) {
        fail(origin, "field 'n' must be a positive integer");
    }
    const Eigen::Index n = doc["n"].get<Eigen::Index>();

    MarketFile file;
    if (!doc["r"].is_array() || doc["r"].size() != static_cast<size_t>(n)) {
        fail(origin, "field 'r' must be an array of " + std::to_string(n) +
                         " rows");
    }
    file.spec.r.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const json& row = doc["r"][a];
        if (!row.is_array() || row.size() != static_cast<size_t>(n)) {
            fail(origin, "field 'r' row " + std::to_string(a) + " must have " +
                             std::to_string(n) + " entries");
        }
        for (Eigen::Index b = 0; b < n; ++b) {
            file.spec.r(a, b) = read_number(row[b], origin, "r");
        }
    }
    for (const std::string field : {"c", "p"}) {
        const json& vec = doc[field];
        if (!vec.is_array() || vec.size() != static_cast<size_t>(n)) {
            fail(origin, "field '" + field + "' must have " +
                             std::to_string(n) + " entries");
        }
        Eigen::RowVectorXd& target = field == "c" ? file.spec.c : file.spec.p;
        target.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            target(j) = read_number(vec[j], origin, field);
        }
    }
    if (doc.contains("labels")) {
        const json& labels = doc["labels"];
        if (!labels.is_array() || labels.size() != static_cast<size_t>(n)) {
            fail(origin, "field 'labels' must list " + std::to_string(n) +
                             " names");
        }
        for (const json& label : labels) {
            if (!label.is_string()) fail(origin, "labels must be strings");
            file.labels.push_back(label.get<std::string>());
        }
    }
    if (doc.contains("meta")) {
        const json& meta = doc["meta"];
        if (!meta.is_object()) fail(origin, "field 'meta' must be an object");
        for (const auto& [key, value] : meta.items()) {
            if (!value.is_string()) {
                fail(origin, "meta values must be strings");
            }
            file.meta[key] = value.get<std::string>();
        }
    }
    return file;
}

MarketFile load_market_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return market_from_string(buffer.str(), path);
}

MarketSpec load_market(const std::string& path) {
    MarketFile file = load_market_file(path);
    validate(file.spec);
    return file.spec;
}

void save_market(const MarketFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << market_to_string(file);
    if (!out) throw ParseError(path + ": write failed");
}

void save_market(const MarketSpec& spec, const std::string& path) {
    save_market(MarketFile{spec, {}, {}}, path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) {
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos
                             ? std::string()
                             : field.substr(begin, end - begin + 1));
    }
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* tail = nullptr;
    out = std::strtod(text.c_str(), &tail);
    return tail == text.c_str() + text.size();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

} // namespace

ReturnsTable load_returns(const std::string& returns_path,
                          const std::string& prices_path) {
    const std::vector<std::string> lines = read_lines(returns_path);
    if (lines.empty()) {
        throw ParseError(returns_path + ": empty observations file");
    }
    ReturnsTable table;
    table.assets = split_csv_line(lines[0]);
    const size_t n = table.assets.size();
    if (n == 0) throw ParseError(returns_path + ": empty header row");

    table.rows.resize(static_cast<Eigen::Index>(lines.size() - 1),
                      static_cast<Eigen::Index>(n));
    for (size_t row = 1; row < lines.size(); ++row) {
        const auto fields = split_csv_line(lines[row]);
        if (fields.size() != n) {
            throw ParseError(returns_path + ": line " + std::to_string(row + 1) +
                             " has " + std::to_string(fields.size()) +
                             " cells, expected " + std::to_string(n));
        }
        for (size_t col = 0; col < n; ++col) {
            double value = 0.0;
            if (!parse_double(fields[col], value)) {
                throw ParseError(returns_path + ": line " +
                                 std::to_string(row + 1) + ", cell " +
                                 std::to_string(col + 1) + ": '" + fields[col] +
                                 "' is not a number");
            }
            table.rows(static_cast<Eigen::Index>(row - 1),
                       static_cast<Eigen::Index>(col)) = value;
        }
    }

    const std::vector<std::string> price_lines = read_lines(prices_path);
    if (price_lines.empty()) {
        throw ParseError(prices_path + ": empty prices file");
    }
    // A header row matching the observations header is tolerated.
    size_t data_row = 0;
    {
        double probe = 0.0;
        const auto fields = split_csv_line(price_lines[0]);
        if (!fields.empty() && !parse_double(fields[0], probe)) data_row = 1;
    }
    if (data_row >= price_lines.size()) {
        throw ParseError(prices_path + ": no data row");
    }
    const auto fields = split_csv_line(price_lines[data_row]);
    if (fields.size() != n) {
        throw ParseError(prices_path + ": expected " + std::to_string(n) +
                         " prices, found " + std::to_string(fields.size()));
    }
    table.prices.resize(static_cast<Eigen::Index>(n));
    for (size_t col = 0; col < n; ++col) {
        double value = 0.0;
        if (!parse_double(fields[col], value)) {
            throw ParseError(prices_path + ": cell " + std::to_string(col + 1) +
                             ": '" + fields[col] + "' is not a number");
        }
        table.prices(static_cast<Eigen::Index>(col)) = value;
    }
    return table;
}

MarketSpec estimate_market(const ReturnsTable& returns) {
    const Eigen::Index observations = returns.rows.rows();
    const Eigen::Index n = returns.rows.cols();
    if (observations < 2) {
        throw InsufficientDataError(
            "sample covariance needs at least two observations, got " +
            std::to_string(observations));
    }
    if (returns.prices.size() != n) {
        throw DimensionMismatchError("prices do not align with observations");
    }

    MarketSpec spec;
    spec.p = returns.rows.colwise().mean();
    const Eigen::MatrixXd centered = returns.rows.rowwise() - spec.p;
    spec.r = centered.transpose() * centered /
             static_cast<double>(observations - 1);
    spec.c = returns.prices;
    return spec;
}

} // namespace markowitz
