#pragma once

#include "qsync/experiments/output.hpp"
#include "qsync/experiments/params.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qsync::exp {

/// State shared by one scenario execution.
struct RunContext {
    const ParamSet& params;
    RunWriter& out;
    bool strict = false;
    unsigned threads = 0;

    /// Records a truncation warning, or throws ExperimentError "truncation"
    /// in strict mode.
    void truncation(const std::string& where, double top_population, double threshold = 1e-8) const;
};

/// Phase-locking measure of one sweep point plus the truncation level of the
/// state it came from (0 for classical scenarios).
struct SweepValue {
    double max_value = 0.0;
    double top_population = 0.0;
};

struct ScenarioInfo {
    std::string id;
    std::string figures;
    std::string summary;
    /// Reference rate that every time and rate parameter is expressed in.
    std::string unit;
    std::vector<ParamSpec> (*params)() = nullptr;
    void (*run)(RunContext&) = nullptr;
    /// Phase-locking measure (max of the phase-difference distribution) at
    /// the parameters' delta and the single entry of V_list. Null for
    /// scenarios without a sweep.
    SweepValue (*sweep_point)(const ParamSet&) = nullptr;
};

[[nodiscard]] const std::vector<ScenarioInfo>& scenarios();

/// Throws ExperimentError "unknown_scenario" listing the valid ids.
[[nodiscard]] const ScenarioInfo& find_scenario(const std::string& id);

struct RunOptions {
    std::filesystem::path out;
    std::optional<std::filesystem::path> config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    unsigned threads = 0;
};

/// opts.out, or runs/<id> (runs/<id>-sweep for sweeps) when empty.
[[nodiscard]] std::filesystem::path output_dir(const RunOptions& opts, const std::string& id, bool sweep = false);

/// Defaults, then the config section named after the scenario, then
/// overrides, then the seed.
[[nodiscard]] ParamSet resolve_params(const ScenarioInfo& info, const RunOptions& opts);

/// Runs one scenario into opts.out and returns the manifest.
nlohmann::json run_scenario(const std::string& id, const RunOptions& opts);

struct SweepOptions {
    RunOptions run;
    std::vector<double> deltas;
    std::vector<double> couplings;
};

/// Evaluates the phase-locking measure on the (delta, V) grid. Points run
/// concurrently; a failing point fills the error column of its row.
nlohmann::json run_sweep(const std::string& id, const SweepOptions& opts);

/// Maps an exception escaping a run to the CLI error document and exit code.
struct ErrorReport {
    nlohmann::json body;
    int exit_code = 1;
};

[[nodiscard]] ErrorReport describe_error(std::exception_ptr error);

}  // namespace qsync::exp
