#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "varq/numerics.hpp"

namespace varq::cli {

/// Flat `[section] key = value` text. Every accessor marks the key as used so
/// that leftovers can be reported as unknown.
class Config {
public:
    static Config parse(std::string_view text, std::string source = "<config>");
    static Config load(const std::filesystem::path& path);

    const std::string& source() const noexcept { return source_; }
    bool has(std::string_view section, std::string_view key) const;

    std::string text(std::string_view section, std::string_view key) const;
    std::string text_or(std::string_view section, std::string_view key, std::string fallback) const;
    double real(std::string_view section, std::string_view key) const;
    double real_or(std::string_view section, std::string_view key, double fallback) const;
    std::int64_t integer(std::string_view section, std::string_view key) const;
    std::int64_t integer_or(std::string_view section, std::string_view key, std::int64_t fallback) const;
    bool flag_or(std::string_view section, std::string_view key, bool fallback) const;
    RealVector reals(std::string_view section, std::string_view key) const;
    RealVector reals_or(std::string_view section, std::string_view key, RealVector fallback) const;

    /// Throws a config error naming the first key no accessor asked for.
    void reject_unused() const;

    /// Throws a config error that names the key and, if present, its line.
    [[noreturn]] void fail(std::string_view section, std::string_view key, const std::string& message) const;

    /// Sections and raw values in file order.
    nlohmann::ordered_json echo() const;

private:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        std::size_t line = 0;
    };

    const Entry* find(std::string_view section, std::string_view key) const;
    const Entry& need(std::string_view section, std::string_view key) const;
    double to_real(const Entry& e, std::string_view token) const;

    std::string source_;
    std::vector<Entry> entries_;
    mutable std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace varq::cli
