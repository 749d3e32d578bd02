#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "allee/model.hpp"

namespace allee {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are ignored.
/// Later assignments override earlier ones.
class Config {
public:
    static Config parse(std::string_view text, std::string_view origin = "<text>");
    static Config load(const std::filesystem::path& path);

    /// Applies one `key=value` override.
    void assign(std::string_view assignment);
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;

    /// All eight model parameters; ConfigError if one is missing or malformed,
    /// DomainError if the set is invalid.
    Parameters parameters() const;

    /// ConfigError naming the first key not in `known`.
    void requireKnown(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Strict decimal parse of the whole string; ConfigError on trailing characters.
double parseNumber(std::string_view text, std::string_view what);

/// `key=lo:hi:n`, n >= 1 evenly spaced values (lo only when n = 1).
struct SweepSpec {
    std::string key;
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;

    static SweepSpec parse(std::string_view text);
    double value(int i) const;
};

/// Round-trip decimal: 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string formatNumber(double v);

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

/// CSV with a mandatory header row, CRLF-free, RFC 4180 quoting for text cells.
void writeCsv(std::ostream& out, const Table& table);
std::string toCsv(const Table& table);

/// Array of records keyed by the header, in header order.
nlohmann::ordered_json toJson(const Table& table);

nlohmann::ordered_json toJson(const Parameters& p);

} // namespace allee
