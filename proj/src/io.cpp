#include "allee/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace allee {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::pair<std::string, std::string> splitAssignment(std::string_view line, std::string_view where)
{
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(std::string(where) + ": expected key = value, got '" + std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
        throw ConfigError(std::string(where) + ": empty key");
    }
    if (value.empty()) {
        throw ConfigError(std::string(where) + ": key '" + key + "' has no value");
    }
    return {key, value};
}

} // namespace

double parseNumber(std::string_view text, std::string_view what)
{
    text = trim(text);
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(std::string(what) + ": '" + std::string(text) + "' is not a number");
    }
    return v;
}

Config Config::parse(std::string_view text, std::string_view origin)
{
    Config cfg;
    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto [key, value] = splitAssignment(line, std::string(origin) + ":" + std::to_string(lineNo));
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

void Config::assign(std::string_view assignment)
{
    auto [key, value] = splitAssignment(trim(assignment), "--set");
    values_[key] = value;
}

std::string Config::str(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("missing config key '" + key + "'");
    }
    return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key) const { return parseNumber(str(key), key); }

double Config::num(const std::string& key, double fallback) const
{
    return has(key) ? num(key) : fallback;
}

long long Config::integer(const std::string& key, long long fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const std::string s = str(key);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": '" + s + "' is not an integer");
    }
    return v;
}

Parameters Config::parameters() const
{
    Parameters p;
    for (ParamId id : kAllParams) {
        p[id] = num(std::string(paramName(id)));
    }
    p.validate();
    return p;
}

void Config::requireKnown(const std::set<std::string>& known) const
{
    for (const auto& [key, value] : values_) {
        if (!known.count(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

SweepSpec SweepSpec::parse(std::string_view text)
{
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("--sweep expects key=lo:hi:n");
    }
    SweepSpec s;
    s.key = std::string(trim(text.substr(0, eq)));
    const std::string_view range = text.substr(eq + 1);
    const auto c1 = range.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : range.find(':', c1 + 1);
    if (s.key.empty() || c2 == std::string_view::npos) {
        throw ConfigError("--sweep expects key=lo:hi:n");
    }
    s.lo = parseNumber(range.substr(0, c1), "sweep lo");
    s.hi = parseNumber(range.substr(c1 + 1, c2 - c1 - 1), "sweep hi");
    const double n = parseNumber(range.substr(c2 + 1), "sweep n");
    if (!(n >= 1.0) || n != std::floor(n) || n > 1e6) {
        throw ConfigError("sweep count must be a positive integer");
    }
    s.n = static_cast<int>(n);
    return s;
}

double SweepSpec::value(int i) const
{
    if (n == 1) {
        return lo;
    }
    return i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1);
}

std::string formatNumber(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csvCell(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) {
        return formatNumber(*d);
    }
    if (const auto* i = std::get_if<long long>(&c)) {
        return std::to_string(*i);
    }
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        out += ch;
        if (ch == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

} // namespace

void writeCsv(std::ostream& out, const Table& table)
{
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << csvCell(table.header[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << csvCell(row[i]);
        }
        out << '\n';
    }
}

std::string toCsv(const Table& table)
{
    std::ostringstream out;
    writeCsv(out, table);
    return out.str();
}

nlohmann::ordered_json toJson(const Table& table)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json rec = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i) {
            std::visit([&](const auto& v) { rec[table.header[i]] = v; }, row[i]);
        }
        arr.push_back(std::move(rec));
    }
    return arr;
}

nlohmann::ordered_json toJson(const Parameters& p)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (ParamId id : kAllParams) {
        j[std::string(paramName(id))] = p[id];
    }
    return j;
}

} // namespace allee
