#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "npns/config.hpp"
#include "npns/diagnostics.hpp"
#include "npns/pb.hpp"

namespace npns {

struct PropertyCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // no files written when empty
    bool check_properties = false;
    /// Called after every accepted step (and once for the initial state).
    std::function<void(const SimulationState&, const EnergyReport&)> observer;
};

struct RunArtifacts {
    std::filesystem::path timeseries;
    std::filesystem::path snapshot_dir;
    std::filesystem::path boltzmann;
    std::vector<PropertyCheck> checks;

    std::vector<EnergyReport> history;  // one report per accepted step, plus t = 0
    std::vector<double> reference_differences;  // E_A - E_B per step
    SimulationState final_state;
    BoltzmannState reference;
    BoltzmannState alternate_reference;
    int accepted_steps = 0;
    int rejected_steps = 0;
    double min_concentration = 0.0;  // over all accepted steps
    double max_mass_step_error = 0.0;  // relative, blocking species
    double max_mass_drift = 0.0;       // relative to t = 0, blocking species

    bool all_passed() const;
};

/// The reference selected by the config's policy for the given initial data.
BoltzmannState reference_state(const ScenarioConfig& cfg, const SimulationState& initial);

/// Reference with Z_i scaled by `factor` on the non-selective species,
/// solved with every Z_i fixed. Admissible for blocking and uniform-selective runs.
BoltzmannState scaled_reference(const ScenarioConfig& cfg, const BoltzmannState& ref,
                                double factor);

/// Poisson -> transport -> flow -> diagnostics per step, with CFL-limited dt
/// and step halving on positivity failure. On a module error the last good
/// state is written to `last_good.npns` in the output directory before the
/// error propagates.
RunArtifacts run_simulation(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// The property suite applied to a finished run.
std::vector<PropertyCheck> evaluate_properties(const ScenarioConfig& cfg, const RunArtifacts& run);

} // namespace npns
