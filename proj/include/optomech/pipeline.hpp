#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "optomech/conditional.hpp"
#include "optomech/params.hpp"
#include "optomech/plant.hpp"

namespace optomech {

enum class Scenario { large_scale, small_scale, custom };
enum class OutcomePolicy { most_probable, sample, explicit_value };

struct RunConfig {
    Scenario scenario = Scenario::custom;
    PhysicalParams params;
    PhotonMode photon;
    double theta = std::numbers::pi / 2.0;
    OutcomePolicy outcome = OutcomePolicy::most_probable;
    std::uint64_t seed = 0;
    std::complex<double> z_explicit = 0.0;
    std::size_t grid_n = 256;
    std::string out_dir = "out";

    nlohmann::ordered_json to_json() const;
};

/// Keys accepted in a config file.
const std::vector<std::string>& config_keys();

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);
OutcomePolicy parse_outcome(const std::string& name);
std::string outcome_name(OutcomePolicy p);

/// Reference parameter rows with the photon-mode settings used for the conditional states.
RunConfig preset(Scenario s);

/// Merge a flat JSON object over the preset named by its "scenario" key (default custom).
/// Throws ConfigError for unknown keys, missing required custom fields or bad values.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct RunReport {
    RunConfig config;
    DerivedScales scales;
    ConditionReport vacuum, thermal;
    double minimal_pump_power = 0.0;
    PlantModel plant;
    FilterSet filters;
    PhotonKernels photon;
    MeasurementOutcome outcome;
    NegativityMetrics metrics;
    double wigner_integral = 0.0;
    double density_integral = 0.0;
    bool within_wigner_bound = true;
    double runtime_s = 0.0;
    std::vector<std::string> warnings;
};

/// Runs params -> plant -> kernels -> conditional state and writes summary.json, wigner.csv,
/// kernels.csv and outcome_density.csv into cfg.out_dir. Files carry a ".partial" suffix
/// until the whole run has succeeded; on failure the partial files stay behind and the
/// exception propagates.
RunReport run_pipeline(const RunConfig& cfg);

/// Exit code for an exception escaping run_pipeline: 2 config, 3 invariant, 4 numerical.
int exit_code_for(const std::exception& e);

}  // namespace optomech
