#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "varq/error.hpp"

namespace varq::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool valid_name(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
    Config cfg;
    cfg.source_ = std::move(source);
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    auto error = [&](const std::string& msg) {
        throw Error(ErrorKind::config, cfg.source_ + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') error("unterminated section header '" + std::string(line) + "'");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name)) error("invalid section name '" + std::string(name) + "'");
            section = name;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) error("expected 'key = value', got '" + std::string(line) + "'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!valid_name(key)) error("invalid key '" + std::string(key) + "'");
        if (section.empty()) error("key '" + std::string(key) + "' appears before any [section]");
        if (value.empty()) error("[" + section + "] " + std::string(key) + ": missing value");
        if (const Entry* prev = cfg.find(section, key))
            error("[" + section + "] " + std::string(key) + ": duplicate key (first set on line " +
                  std::to_string(prev->line) + ")");
        cfg.entries_.push_back({section, std::string(key), std::string(value), line_no});
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

const Config::Entry* Config::find(std::string_view section, std::string_view key) const {
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

const Config::Entry& Config::need(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) fail(section, key, "required key is missing");
    used_.emplace(e->section, e->key);
    return *e;
}

bool Config::has(std::string_view section, std::string_view key) const { return find(section, key) != nullptr; }

void Config::fail(std::string_view section, std::string_view key, const std::string& message) const {
    std::string where = source_;
    if (const Entry* e = find(section, key)) where += ":" + std::to_string(e->line);
    throw Error(ErrorKind::config, where + ": [" + std::string(section) + "] " + std::string(key) + ": " + message);
}

double Config::to_real(const Entry& e, std::string_view token) const {
    token = trim(token);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v))
        fail(e.section, e.key, "expected a finite number, got '" + std::string(token) + "'");
    return v;
}

std::string Config::text(std::string_view section, std::string_view key) const { return need(section, key).value; }

std::string Config::text_or(std::string_view section, std::string_view key, std::string fallback) const {
    return has(section, key) ? text(section, key) : fallback;
}

double Config::real(std::string_view section, std::string_view key) const {
    const Entry& e = need(section, key);
    return to_real(e, e.value);
}

double Config::real_or(std::string_view section, std::string_view key, double fallback) const {
    return has(section, key) ? real(section, key) : fallback;
}

std::int64_t Config::integer(std::string_view section, std::string_view key) const {
    const Entry& e = need(section, key);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc{} || ptr != e.value.data() + e.value.size())
        fail(section, key, "expected an integer, got '" + e.value + "'");
    return v;
}

std::int64_t Config::integer_or(std::string_view section, std::string_view key, std::int64_t fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
}

bool Config::flag_or(std::string_view section, std::string_view key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = text(section, key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(section, key, "expected true or false, got '" + v + "'");
}

RealVector Config::reals(std::string_view section, std::string_view key) const {
    const Entry& e = need(section, key);
    RealVector out;
    std::string_view rest = e.value;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_real(e, rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

RealVector Config::reals_or(std::string_view section, std::string_view key, RealVector fallback) const {
    return has(section, key) ? reals(section, key) : fallback;
}

void Config::reject_unused() const {
    for (const auto& e : entries_)
        if (!used_.count({e.section, e.key})) fail(e.section, e.key, "unknown key");
}

nlohmann::ordered_json Config::echo() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& e : entries_) out[e.section][e.key] = e.value;
    return out;
}

}  // namespace varq::cli
