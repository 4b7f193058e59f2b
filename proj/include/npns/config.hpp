#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "npns/boundary.hpp"
#include "npns/expr.hpp"
#include "npns/grid.hpp"
#include "npns/pb.hpp"
#include "npns/species.hpp"

namespace npns {

enum class BoundaryRegime { blocking, uniform_selective, general_selective };
enum class ReferencePolicy { auto_from_masses, explicit_z };

const char* regime_name(BoundaryRegime r);

struct SpeciesInit {
    Expr profile = Expr::constant(1.0);
    double noise = 0.0;                // relative multiplicative noise amplitude
    std::optional<double> mass;        // rescale the sampled profile to this integral
};

struct RunControls {
    double t_end = 1.0;
    double dt_max = 1e-3;
    double cfl_safety = 0.4;
    int output_every = 1;
    int snapshot_every = 0;  // 0: final snapshot only
    std::uint64_t seed = 0;
};

struct CheckSettings {
    double convergence_tol = 1e-4;  // ||c - c*||_2 / ||c*||_2 at t_end
    double kinetic_tol = 1e-10;
    double invariance_z_factor = 2.0;
    double gradient_ratio = 0.01;  // final-quarter average of ||grad c~|| over its initial value
    bool convergence = true;
};

/// A scenario file: sections [grid], [physics], [species NAME] (repeatable),
/// [boundary], [flow], [run], [reference], [checks], each holding
/// `key = value` lines; `#` starts a comment.
struct ScenarioConfig {
    std::string name;
    Grid2D grid = Grid2D{64, 64, 1.0, 1.0};
    PhysicalParams params;
    std::vector<IonSpecies> species;
    std::vector<SpeciesInit> init;
    BoundaryRegime regime = BoundaryRegime::blocking;
    std::array<Expr, 4> w{Expr::constant(0), Expr::constant(0), Expr::constant(0),
                          Expr::constant(0)};  // indexed by Edge
    Expr stream = Expr::constant(0.0);
    RunControls run;
    ReferencePolicy reference = ReferencePolicy::auto_from_masses;
    std::vector<double> explicit_z;
    CheckSettings checks;

    /// Throws ConfigError; uniform-selective scenarios must have W constant
    /// on the selective faces of each species, and the error names the
    /// offending segment.
    void validate() const;

    BoundarySpec boundary() const;
    SimulationState initial_state() const;
    /// The steady-state problem selected by the reference policy, given the
    /// initial concentrations.
    PBProblem reference_problem(const SimulationState& initial) const;
};

ScenarioConfig parse_config(std::istream& in, const std::string& name = "scenario");
ScenarioConfig load_config(const std::filesystem::path& path);

} // namespace npns
