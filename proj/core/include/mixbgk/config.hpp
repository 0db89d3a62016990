#pragma once

#include <string>
#include <string_view>

#include "mixbgk/mixture.hpp"
#include "mixbgk/solver.hpp"

namespace mixbgk {

struct GridConfig {
    int n_cells = 1;
    double length = 1.0;
    int dim = 0;
    double v_max = 0.0;   // 0 = auto: 8 / sqrt(m2)
    int n_per_axis = 0;   // 0 = auto: 16 for simulate/sweep, 24 for verify
};

struct ScenarioConfig {
    std::string name = "temperature-gap";
    double epsilon = 1e-3;
    unsigned seed = 1u;
};

struct RunConfig {
    MixtureParams mixture;
    GridConfig grid;
    SolverConfig solver;
    ScenarioConfig scenario;
    std::string output_dir = "out";
};

enum class AdmissibilityPolicy {
    strict,            // delta, omega < 1 (the model)
    allow_unit_rates,  // closed bounds, for kernel-structure runs only
};

/// Parses the flat sectioned key-value format:
///   [mixture] / [grid] / [solver] / [scenario] / [output] headers,
///   `key = value` lines, `#` comments.
/// Unknown keys are rejected with the nearest valid key suggested;
/// inadmissible mixture parameters are rejected quoting the violated
/// constraint. Throws config_error.
RunConfig parse_config(std::string_view text,
                       AdmissibilityPolicy policy = AdmissibilityPolicy::strict);

/// Writes a document that parse_config maps back to the same RunConfig
/// (used for provenance logging).
std::string emit_config(const RunConfig& cfg);

/// Resolves the auto grid fields into a concrete PhaseGrid.
/// `for_verify` picks the finer default velocity resolution.
PhaseGrid make_phase_grid(const RunConfig& cfg, bool for_verify = false);

bool operator==(const GridConfig&, const GridConfig&);
bool operator==(const ScenarioConfig&, const ScenarioConfig&);
bool operator==(const MixtureParams&, const MixtureParams&);
bool operator==(const SolverConfig&, const SolverConfig&);
bool operator==(const RunConfig&, const RunConfig&);

}  // namespace mixbgk
