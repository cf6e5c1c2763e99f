#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swarmsync/metrics.hpp"
#include "swarmsync/netsim.hpp"
#include "swarmsync/scenario_io.hpp"
#include "swarmsync/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void fail_line(const std::string& msg) { std::cerr << "error: " << msg << "\n"; }

std::string default_out_dir() {
    if (const char* env = std::getenv("SWARM_SYNC_OUT")) {
        if (*env != '\0') {
            return env;
        }
    }
    return "out";
}

// Exit-code-carrying resolution: canned name, else scenario file.
swarmsync::Scenario resolve_scenario(const std::string& arg, int& err) {
    err = kExitOk;
    const auto& names = swarmsync::canned_scenario_names();
    if (std::find(names.begin(), names.end(), arg) != names.end()) {
        return swarmsync::canned_scenario(arg);
    }
    if (!fs::exists(arg)) {
        fail_line("no scenario file or canned name '" + arg + "' (canned: " +
                  [&names] {
                      std::string s;
                      for (const auto& n : names) {
                          s += s.empty() ? n : ", " + n;
                      }
                      return s;
                  }() +
                  ")");
        err = kExitValidation;
        return {};
    }
    try {
        return swarmsync::load_scenario_file(arg);
    } catch (const json::parse_error& e) {
        fail_line(std::string("parse error in ") + arg + ": " + e.what());
        err = kExitRuntime;
    } catch (const std::ios_base::failure& e) {
        fail_line(e.what());
        err = kExitRuntime;
    } catch (const std::runtime_error& e) {
        fail_line(std::string(e.what()) + " (in " + arg + ")");
        err = kExitValidation;
    }
    return {};
}

bool write_file_atomic(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail_line("cannot write " + tmp.string());
            return false;
        }
        out << content;
        if (!out) {
            fail_line("short write to " + tmp.string());
            return false;
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fail_line("cannot move " + tmp.string() + " into place: " + ec.message());
        return false;
    }
    return true;
}

struct Formats {
    bool jsonReport = false;
    bool csvSeries = false;
};

std::optional<Formats> parse_formats(const std::string& arg) {
    Formats f;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "json") {
            f.jsonReport = true;
        } else if (item == "csv") {
            f.csvSeries = true;
        } else if (!item.empty()) {
            fail_line("unknown format '" + item + "' (expected json and/or csv)");
            return std::nullopt;
        }
    }
    if (!f.jsonReport && !f.csvSeries) {
        f.jsonReport = true;
    }
    return f;
}

int report_violations(const std::vector<std::string>& violations) {
    for (const auto& v : violations) {
        fail_line(v);
    }
    return violations.empty() ? kExitOk : kExitValidation;
}

int cmd_run(const std::string& scenarioArg, const std::optional<std::uint64_t>& seed,
            const std::string& outDir, const std::string& formatArg) {
    const auto formats = parse_formats(formatArg);
    if (!formats) {
        return kExitValidation;
    }
    int err = kExitOk;
    swarmsync::Scenario scenario = resolve_scenario(scenarioArg, err);
    if (err != kExitOk) {
        return err;
    }
    if (seed) {
        scenario.seed = *seed;
    }
    if (const int rc = report_violations(swarmsync::validate_scenario(scenario)); rc != kExitOk) {
        return rc;
    }

    swarmsync::RunResult result;
    swarmsync::SyncReport report;
    try {
        result = swarmsync::run(scenario);
        report = swarmsync::measure(result, scenario);
    } catch (const std::exception& e) {
        fail_line(e.what());
        return kExitRuntime;
    }

    std::error_code ec;
    fs::create_directories(outDir, ec);
    if (ec) {
        fail_line("cannot create output directory " + outDir + ": " + ec.message());
        return kExitRuntime;
    }
    const fs::path dir(outDir);
    if (!write_file_atomic(dir / "scenario.json", swarmsync::scenario_to_string(scenario)) ||
        !write_file_atomic(dir / "events.ndjson", swarmsync::events_to_ndjson(result.events)) ||
        !write_file_atomic(dir / "snapshots.ndjson",
                           swarmsync::snapshots_to_ndjson(result.snapshots))) {
        return kExitRuntime;
    }
    if (formats->jsonReport &&
        !write_file_atomic(dir / "report.json", swarmsync::report_to_string(report))) {
        return kExitRuntime;
    }
    if (formats->csvSeries &&
        !write_file_atomic(dir / "series.csv", swarmsync::dispersion_series_csv(report))) {
        return kExitRuntime;
    }

    if (report.timeToSync) {
        std::cout << "timeToSyncMs=" << *report.timeToSync << "\n";
    } else {
        std::cout << "timeToSyncMs=none\n";
    }
    std::cout << "wrote " << outDir << "\n";
    return kExitOk;
}

struct SweepRow {
    std::string value;
    std::uint64_t seed = 0;
    std::optional<std::int64_t> timeToSync;
};

json parse_sweep_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);  // bare words (e.g. fireAtZero) sweep string fields
    }
}

// Applies one dotted-path assignment onto the scenario's JSON form; the strict
// re-parse afterwards type-checks the result.
bool patch_path(json& root, const std::string& dotted, const json& value) {
    json* cur = &root;
    std::stringstream ss(dotted);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        parts.push_back(part);
    }
    if (parts.empty()) {
        fail_line("--param must name a field, e.g. config.addressCount");
        return false;
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!cur->is_object()) {
            fail_line("--param path '" + dotted + "' does not match the scenario schema");
            return false;
        }
        cur = &(*cur)[parts[i]];
    }
    (*cur)[parts.back()] = value;
    return true;
}

int cmd_sweep(const std::string& scenarioArg, const std::optional<std::uint64_t>& seed,
              const std::string& outDir, const std::string& param, const std::string& valuesArg,
              int seedCount, unsigned jobs) {
    if (param.empty()) {
        fail_line("--param is required");
        return kExitValidation;
    }
    std::vector<std::string> values;
    {
        std::stringstream ss(valuesArg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) {
                values.push_back(item);
            }
        }
    }
    if (values.empty()) {
        fail_line("--values must list at least one value");
        return kExitValidation;
    }
    if (seedCount < 1) {
        fail_line("--seeds must be >= 1");
        return kExitValidation;
    }

    int err = kExitOk;
    const swarmsync::Scenario base = resolve_scenario(scenarioArg, err);
    if (err != kExitOk) {
        return err;
    }
    const std::uint64_t seedBase = seed.value_or(base.seed);

    // Type-check every value once, up front.
    std::vector<swarmsync::Scenario> variants;
    for (const std::string& v : values) {
        json patched = swarmsync::scenario_to_json(base);
        if (!patch_path(patched, param, parse_sweep_value(v))) {
            return kExitValidation;
        }
        swarmsync::Scenario s;
        try {
            s = swarmsync::scenario_from_json(patched);
        } catch (const std::runtime_error& e) {
            fail_line(std::string("--param/--values: ") + e.what());
            return kExitValidation;
        }
        if (const int rc = report_violations(swarmsync::validate_scenario(s)); rc != kExitOk) {
            return rc;
        }
        variants.push_back(std::move(s));
    }

    struct Task {
        std::size_t variantIdx;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        for (int k = 0; k < seedCount; ++k) {
            tasks.push_back({vi, seedBase + static_cast<std::uint64_t>(k)});
        }
    }
    std::vector<SweepRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failMsg;
    std::mutex failMu;

    const auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            if (failed.load()) {
                return;
            }
            swarmsync::Scenario s = variants[tasks[i].variantIdx];
            s.seed = tasks[i].seed;
            try {
                const swarmsync::RunResult result = swarmsync::run(s);
                const swarmsync::SyncReport report = swarmsync::measure(result, s);
                rows[i] = {values[tasks[i].variantIdx], tasks[i].seed, report.timeToSync};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failMu);
                failed = true;
                failMsg = e.what();
                return;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failed) {
        fail_line(failMsg);
        return kExitRuntime;
    }

    std::string runsCsv = "param,value,seed,timeToSyncMs\n";
    for (const SweepRow& r : rows) {
        runsCsv += param + "," + r.value + "," + std::to_string(r.seed) + ",";
        if (r.timeToSync) {
            runsCsv += std::to_string(*r.timeToSync);
        }
        runsCsv += "\n";
    }

    std::string aggCsv = "param,value,runs,synced,meanTimeToSyncMs,stddevTimeToSyncMs\n";
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        std::vector<double> xs;
        int runsForValue = 0;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].variantIdx != vi) {
                continue;
            }
            ++runsForValue;
            if (rows[i].timeToSync) {
                xs.push_back(static_cast<double>(*rows[i].timeToSync));
            }
        }
        double mean = 0.0;
        double stddev = 0.0;
        if (!xs.empty()) {
            for (double x : xs) {
                mean += x;
            }
            mean /= static_cast<double>(xs.size());
            if (xs.size() > 1) {
                double acc = 0.0;
                for (double x : xs) {
                    acc += (x - mean) * (x - mean);
                }
                stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
            }
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f", mean, stddev);
        aggCsv += param + "," + values[vi] + "," + std::to_string(runsForValue) + "," +
                  std::to_string(xs.size()) + "," + (xs.empty() ? std::string(",") : std::string(buf)) +
                  "\n";
    }

    std::error_code ec;
    fs::create_directories(outDir, ec);
    if (ec) {
        fail_line("cannot create output directory " + outDir + ": " + ec.message());
        return kExitRuntime;
    }
    if (!write_file_atomic(fs::path(outDir) / "runs.csv", runsCsv) ||
        !write_file_atomic(fs::path(outDir) / "aggregate.csv", aggCsv)) {
        return kExitRuntime;
    }
    std::cout << "wrote " << outDir << " (" << tasks.size() << " runs)\n";
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    if (!fs::exists(path)) {
        fail_line("cannot read file: " + path);
        return kExitRuntime;
    }
    swarmsync::Scenario scenario;
    try {
        scenario = swarmsync::load_scenario_file(path);
    } catch (const json::parse_error& e) {
        fail_line(std::string("parse error: ") + e.what());
        return kExitRuntime;
    } catch (const std::ios_base::failure& e) {
        fail_line(e.what());
        return kExitRuntime;
    } catch (const std::runtime_error& e) {
        fail_line(e.what());
        return kExitValidation;
    }
    const auto violations = swarmsync::validate_scenario(scenario);
    if (!violations.empty()) {
        return report_violations(violations);
    }
    std::cout << "ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized bike-light phase synchronization simulator"};
    app.require_subcommand(1);

    std::string scenarioArg;
    std::string outDir = default_out_dir();
    std::string formatArg = "json";
    std::optional<std::uint64_t> seedOpt;
    std::uint64_t seedValue = 0;

    auto* runCmd = app.add_subcommand("run", "run a scenario, write logs and a sync report");
    runCmd->add_option("--scenario", scenarioArg, "scenario file path or canned name")->required();
    auto* runSeed = runCmd->add_option("--seed", seedValue, "override the scenario seed");
    runCmd->add_option("--out", outDir, "output directory (default $SWARM_SYNC_OUT or ./out)");
    runCmd->add_option("--format", formatArg, "report formats, comma separated: json,csv");

    std::string param;
    std::string valuesArg;
    int seedCount = 1;
    unsigned jobs = 1;
    auto* sweepCmd = app.add_subcommand("sweep", "run a parameter/seed cross-product");
    sweepCmd->add_option("--scenario", scenarioArg, "scenario file path or canned name")->required();
    sweepCmd->add_option("--param", param,
                         "dotted field path to sweep, e.g. config.addressCount or protocolVariant")
        ->required();
    sweepCmd->add_option("--values", valuesArg, "comma-separated values for --param")->required();
    sweepCmd->add_option("--seeds", seedCount, "number of consecutive seeds per value (default 1)");
    auto* sweepSeed = sweepCmd->add_option("--seed", seedValue, "base seed (default scenario seed)");
    sweepCmd->add_option("--out", outDir, "output directory (default $SWARM_SYNC_OUT or ./out)");
    sweepCmd->add_option("--jobs", jobs, "parallel workers (default 1)");

    std::string validatePath;
    auto* validateCmd = app.add_subcommand("validate", "check a scenario file, print violations");
    validateCmd->add_option("path", validatePath, "scenario file to check")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (runCmd->parsed()) {
        if (runSeed->count() > 0) {
            seedOpt = seedValue;
        }
        return cmd_run(scenarioArg, seedOpt, outDir, formatArg);
    }
    if (sweepCmd->parsed()) {
        if (sweepSeed->count() > 0) {
            seedOpt = seedValue;
        }
        return cmd_sweep(scenarioArg, seedOpt, outDir, param, valuesArg, seedCount, jobs);
    }
    return cmd_validate(validatePath);
}
