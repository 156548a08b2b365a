#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "varq/numerics.hpp"

namespace varq::cli {

inline constexpr const char* report_schema = "varq.report/1";

struct RunOptions {
    std::optional<std::uint64_t> seed;
    double tol_scale = 1.0;
};

struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<RealVector> rows;
};

struct Invariant {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct RunReport {
    std::string regime;
    std::string name;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;
    bool waived = false;
    nlohmann::ordered_json echo;
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::vector<Invariant> invariants;
    std::vector<Series> series;
    double wall_time = 0.0;

    /// Records value <= tolerance * tol_scale.
    void check(const std::string& what, double value, double tolerance);
    /// Records a pass/fail condition with no numeric margin.
    void check_true(const std::string& what, bool ok);
    bool invariants_passed() const;
};

/// A validated scenario ready to run.
struct Scenario {
    std::string regime;
    std::string name;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;
    bool waive = false;
    nlohmann::ordered_json echo;
    std::function<void(RunReport&)> body;
};

/// Parses and validates every parameter; nothing is computed.
Scenario plan_scenario(const Config& cfg, const RunOptions& opts);

RunReport run_scenario(const Scenario& scenario);

/// Writes report.json and one CSV per series into dir.
void write_outputs(const RunReport& report, const std::filesystem::path& dir);

nlohmann::ordered_json report_json(const RunReport& report);

void write_series_csv(const Series& series, const std::filesystem::path& path);

const std::vector<std::string>& regimes();

}  // namespace varq::cli
