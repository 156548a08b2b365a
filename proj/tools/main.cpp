#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scenario.hpp"
#include "varq/error.hpp"

namespace fs = std::filesystem;
using namespace varq;
using namespace varq::cli;

namespace {

enum Exit : int { ok = 0, config_error = 2, numerical_error = 3, invariant_failed = 4 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config:
        case ErrorKind::invalid_spec:
        case ErrorKind::invalid_argument:
        case ErrorKind::io: return config_error;
        default: return numerical_error;
    }
}

struct Flags {
    std::string out = "varq-out";
    std::optional<std::uint64_t> seed;
    double tol_scale = 1.0;
};

RunOptions options(const Flags& f) { return {f.seed, f.tol_scale}; }

int run_one(const fs::path& config, const fs::path& out_dir, const RunOptions& opts, std::ostream& log,
            std::ostream& err) {
    try {
        const Scenario scenario = plan_scenario(Config::load(config), opts);
        const RunReport report = run_scenario(scenario);
        write_outputs(report, out_dir);
        std::size_t passed = 0;
        for (const auto& inv : report.invariants) {
            if (inv.passed) ++passed;
            else log << "  FAIL " << inv.name << ": " << inv.value << " > " << inv.tolerance << '\n';
        }
        const bool good = report.invariants_passed();
        log << report.name << " (" << report.regime << "): " << passed << '/' << report.invariants.size()
            << " invariants passed" << (!good && report.waived ? " [waived]" : "") << " -> "
            << (out_dir / "report.json").string() << '\n';
        return good || report.waived ? ok : invariant_failed;
    } catch (const Error& e) {
        err << "varq: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "varq: numerical-failure: " << e.what() << '\n';
        return numerical_error;
    }
}

int check_one(const fs::path& config, const RunOptions& opts) {
    try {
        const Scenario s = plan_scenario(Config::load(config), opts);
        std::cout << "ok " << s.name << " (" << s.regime << ")\n";
        return ok;
    } catch (const Error& e) {
        std::cerr << "varq: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    }
}

std::size_t thread_cap() {
    std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("VARQ_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw Error(ErrorKind::config, std::string("VARQ_THREADS must be a positive integer, got '") + env + "'");
        cap = static_cast<std::size_t>(v);
    }
    return cap;
}

int sweep(const fs::path& dir, const Flags& flags) {
    std::vector<fs::path> configs;
    std::size_t threads = 1;
    try {
        if (!fs::is_directory(dir)) throw Error(ErrorKind::config, "not a directory: " + dir.string());
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".cfg") configs.push_back(entry.path());
        if (configs.empty()) throw Error(ErrorKind::config, "no .cfg files in " + dir.string());
        threads = std::min(thread_cap(), configs.size());
    } catch (const Error& e) {
        std::cerr << "varq: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return config_error;
    }
    std::sort(configs.begin(), configs.end());

    std::vector<int> codes(configs.size(), ok);
    std::vector<std::string> logs(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            std::ostringstream log;
            codes[i] = run_one(configs[i], fs::path(flags.out) / configs[i].stem(), options(flags), log, log);
            logs[i] = log.str();
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int worst = ok;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        std::cout << logs[i];
        worst = std::max(worst, codes[i]);
    }
    std::cout << configs.size() << " scenarios, exit " << worst << '\n';
    return worst;
}

void add_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "Seed for randomized probes (overrides the config)");
    cmd->add_option("--tol-scale", flags.tol_scale, "Multiplier on every invariant tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"varq: batch scenario runner"};
    app.require_subcommand(1);
    Flags flags;
    std::string target;

    auto* run = app.add_subcommand("run", "Run one scenario config");
    run->add_option("config", target, "Scenario config file")->required();
    add_flags(run, flags);

    auto* sweep_cmd = app.add_subcommand("sweep", "Run every .cfg in a directory");
    sweep_cmd->add_option("config-dir", target, "Directory of scenario configs")->required();
    add_flags(sweep_cmd, flags);

    auto* check = app.add_subcommand("check", "Validate a config without running it");
    check->add_option("config", target, "Scenario config file")->required();
    add_flags(check, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    if (run->parsed()) {
        return run_one(target, flags.out, options(flags), std::cout, std::cerr);
    }
    if (sweep_cmd->parsed()) return sweep(target, flags);
    return check_one(target, options(flags));
}
