/// @file harness.hpp
/// @brief Experiment configuration, orchestration, persistence and plots.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "zrp/orlicz.hpp"

namespace zrp {

/// Version string recorded in every output.
std::string code_version();

enum class ExperimentKind { Simulate, HydroCompare, ExactChecks, OrliczAudit, MultiscaleReport, PmeSolve };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;

    // model
    int d = 1;
    int N = 32;
    double alpha = 2.0;
    double chi = 0.125;
    std::optional<double> level;          // constant density a
    std::optional<std::string> profile;   // density profile rho(x, y, z)
    double b = 10.0;
    double t_fin = 0.1;
    double rate_scale = 1.0;
    int samples = 11;                     // grid points on [0, t_fin]

    // estimators
    std::vector<std::string> observables{"mass"};
    std::vector<double> eps{0.1};
    std::optional<double> truncation;
    double family_delta = 1.0;
    double young_delta = 1.0;
    std::optional<double> young_p;
    int young_n_min = 2;
    int young_n_max = 64;
    double young_chi_power = 1.0;         // chi_N = N^{-power}

    // exact and campaign sizes
    int particles = 3;
    int densities = 100;
    int potentials = 20;
    int cases = 1000;

    // solver and comparison
    int grid = 256;
    double hydro_tolerance = 0.05;

    // ensemble and resources
    int ensemble = 1;
    std::uint64_t seed = 1;
    bool keep_snapshots = false;
    std::uint64_t max_events = 2'000'000'000ULL;

    // placement, excluded from the hash
    std::string output_dir = "zrp-out";
    int workers = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// Every violated precondition, empty when the config is runnable.
    std::vector<std::string> validate() const;
    /// FNV-1a of the canonical JSON without the placement keys, as 16 hex digits.
    std::string hash() const;

    double p() const { return young_p.value_or(default_sobolev_exponent(d)); }
};

/// Known config keys and their JSON types, the published schema.
nlohmann::json config_schema();

/// Applies `key=value` overrides; the value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// ZRP_OUTPUT_DIR and ZRP_WORKERS.
void apply_environment(ExperimentConfig& config);

struct OutputFile {
    std::string path;
    std::uint64_t bytes = 0;
};

struct RunManifest {
    std::string config_hash;
    std::string code_version;
    std::string kind;
    std::string output_dir;
    std::vector<std::uint64_t> streams;
    std::vector<OutputFile> files;
    double wall_seconds = 0;
    std::uint64_t events = 0;
    bool partial = false;
    std::optional<bool> checks_passed;
    std::vector<std::string> failed_checks;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Runs fn(i) for i in [0, count) on a pool of worker threads; rethrows the first failure.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Executes the experiment, writes metrics.jsonl, summary.json, snapshots and manifest.json.
RunManifest run(const ExperimentConfig& config);

nlohmann::json serialize_young(const YoungFunction& phi, double p);
YoungFunction deserialize_young(const nlohmann::json& j, double* p = nullptr);

struct PlotOutcome {
    std::vector<std::string> files;
    std::vector<std::string> notices;
};

/// SVG plots derived from the metrics stream (and the serialized Young function).
PlotOutcome emit_plots(const RunManifest& manifest);

}  // namespace zrp
