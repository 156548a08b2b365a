#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <system_error>

#include "scenario.hpp"
#include "varq/error.hpp"

namespace varq::cli {

namespace {

void require_finite(const nlohmann::ordered_json& j, const std::string& path) {
    if (j.is_number_float() && !std::isfinite(j.get<double>()))
        throw Error(ErrorKind::numerical_failure, "non-finite report value at " + path);
    if (j.is_object())
        for (const auto& [k, v] : j.items()) require_finite(v, path + "." + k);
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], path + "[" + std::to_string(i) + "]");
}

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
}

}  // namespace

void RunReport::check(const std::string& what, double value, double tolerance) {
    const double bound = tolerance * tol_scale;
    invariants.push_back({what, value, bound, std::isfinite(value) && value <= bound});
}

void RunReport::check_true(const std::string& what, bool ok) { invariants.push_back({what, ok ? 0.0 : 1.0, 0.0, ok}); }

bool RunReport::invariants_passed() const {
    for (const auto& inv : invariants)
        if (!inv.passed) return false;
    return true;
}

nlohmann::ordered_json report_json(const RunReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = report_schema;
    j["regime"] = report.regime;
    j["name"] = report.name;
    j["seed"] = report.seed;
    j["tol_scale"] = report.tol_scale;
    j["scenario"] = report.echo;
    j["results"] = report.results;
    auto& inv = j["invariants"] = nlohmann::ordered_json::array();
    for (const auto& i : report.invariants) {
        // a non-finite measurement is reported as failed with no value
        nlohmann::ordered_json value = std::isfinite(i.value) ? nlohmann::ordered_json(i.value) : nullptr;
        inv.push_back({{"name", i.name}, {"value", value}, {"tolerance", i.tolerance}, {"passed", i.passed}});
    }
    auto& series = j["series"] = nlohmann::ordered_json::array();
    for (const auto& s : report.series)
        series.push_back({{"name", s.name}, {"file", s.name + ".csv"}, {"columns", s.columns}, {"rows", s.rows.size()}});
    j["invariants_passed"] = report.invariants_passed();
    j["waived"] = report.waived;
    j["timing"] = {{"wall_time_s", report.wall_time}};
    require_finite(j, "report");
    return j;
}

void write_series_csv(const Series& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    for (std::size_t c = 0; c < series.columns.size(); ++c) out << (c ? "," : "") << series.columns[c];
    out << '\n';
    for (const auto& row : series.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_real(row[c]);
        out << '\n';
    }
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

void write_outputs(const RunReport& report, const std::filesystem::path& dir) {
    const auto body = report_json(report);
    ensure_directory(dir);
    for (const auto& s : report.series) write_series_csv(s, dir / (s.name + ".csv"));
    std::ofstream out(dir / "report.json");
    if (!out) throw Error(ErrorKind::io, "cannot write " + (dir / "report.json").string());
    out << body.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "write failed for " + (dir / "report.json").string());
}

}  // namespace varq::cli
