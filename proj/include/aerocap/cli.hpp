#pragma once

// Command implementations behind the aerocap executable. Each returns the
// process exit code: 0 success (captured), 2 mission failed or timed out,
// 1 usage, config or input error.

#include "aerocap/config.hpp"
#include "aerocap/engine.hpp"
#include "aerocap/plot.hpp"
#include "aerocap/simlog.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace aerocap::cli {

enum ExitCode { kSuccess = 0, kUsage = 1, kMissionFailed = 2 };

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

inline ScenarioConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

inline void report_config_error(std::ostream& err, const std::string& path, const ConfigError& e) {
    err << "error: " << path << ": " << e.what() << '\n';
}

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

inline int cmd_run(const RunArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        ScenarioConfig cfg = load_config(a.config);
        if (a.seed) cfg.seed = *a.seed;
        const SimLog log = run_scenario(cfg);
        const std::filesystem::path dir(a.out_dir);
        write_file(dir / "log.ndjson", log_to_string(log));
        write_file(dir / "summary.json", run_summary_json(log).dump(2) + "\n");
        write_file(dir / "timeseries.csv", timeseries_csv(log));
        out << "verdict: " << to_string(log.verdict);
        if (log.capture_time) out << " at t=" << *log.capture_time << " s";
        if (!log.failure_cause.empty()) out << " (" << log.failure_cause << ")";
        out << "\nwrote " << (dir / "log.ndjson").string() << ", summary.json, timeseries.csv\n";
        return log.verdict == Verdict::captured ? kSuccess : kMissionFailed;
    } catch (const ConfigError& e) {
        report_config_error(err, a.config, e);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    }
    return kUsage;
}

struct MonteCarloArgs {
    std::string config;
    int runs = 0;
    std::uint64_t seed_base = 1;
    std::string out_dir = "mc_out";
    unsigned threads = 0;
};

inline std::string verdict_table_csv(const MonteCarloSummary& s) {
    std::ostringstream os;
    os << "seed,verdict,capture_time,failure_cause,end_time\n";
    for (const auto& r : s.runs) {
        os << r.seed << ',' << to_string(r.verdict) << ',';
        if (r.capture_time) os << format_number(*r.capture_time);
        os << ',' << r.failure_cause << ',' << format_number(r.end_time) << '\n';
    }
    return os.str();
}

inline int cmd_montecarlo(const MonteCarloArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (a.runs < 1) {
        err << "error: --runs must be >= 1\n";
        return kUsage;
    }
    try {
        const ScenarioConfig cfg = load_config(a.config);
        const auto summary = monte_carlo(cfg, a.runs, a.seed_base, a.threads);
        auto j = summary_json(summary);
        j["seed_base"] = a.seed_base;
        j["mode"] = cfg.collaborative() ? "collaborative" : "single";
        const std::filesystem::path dir(a.out_dir);
        write_file(dir / "verdicts.csv", verdict_table_csv(summary));
        write_file(dir / "summary.json", j.dump(2) + "\n");
        out << j.dump(2) << '\n';
        return kSuccess;
    } catch (const ConfigError& e) {
        report_config_error(err, a.config, e);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    }
    return kUsage;
}

struct PlotArgs {
    std::string kind;
    std::string log;
    std::string out;
};

inline int cmd_plot(const PlotArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const auto kind = plot_kind_from_string(a.kind);
    if (!kind) {
        err << "error: unknown plot kind '" << a.kind
            << "' (expected depth_profile, trajectory_3d, pixel_error or phase_timeline)\n";
        return kUsage;
    }
    try {
        std::ifstream in(a.log, std::ios::binary);
        if (!in) throw InputError("cannot read " + a.log);
        const SimLog log = read_log(in);
        const PlotTable table = plot_table(*kind, log);
        write_file(a.out, render_svg(table));
        write_file(sidecar_path(a.out), table_to_csv(table));
        out << "wrote " << a.out << " and " << sidecar_path(a.out) << '\n';
        return kSuccess;
    } catch (const MissingStream& e) {
        err << "error: " << a.log << ": missing " << e.record_type() << " records required by " << a.kind << '\n';
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << a.log << ": " << e.what() << '\n';
    }
    return kUsage;
}

inline int cmd_check(const std::string& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const ScenarioConfig cfg = load_config(config);
        out << config << ": ok (" << (cfg.collaborative() ? "collaborative" : "single") << ", seed " << cfg.seed
            << ", duration " << cfg.duration << " s)\n";
        return kSuccess;
    } catch (const ConfigError& e) {
        report_config_error(err, config, e);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    }
    return kUsage;
}

}  // namespace aerocap::cli
