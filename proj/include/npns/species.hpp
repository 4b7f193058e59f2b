#pragma once

#include <string>
#include <vector>

#include "npns/boundary.hpp"
#include "npns/grid.hpp"

namespace npns {

enum class Regime { blocking, selective };

struct IonSpecies {
    std::string name;
    double z = 0.0;  // valence, any real
    double d = 1.0;  // diffusivity > 0
    Regime regime = Regime::blocking;
    double gamma = 0.0;                     // pinned concentration on segments (selective)
    std::vector<BoundarySegment> segments;  // selective faces

    bool selective() const noexcept { return regime == Regime::selective; }
    /// Throws ConfigError on d <= 0 or an incomplete selective specification.
    void validate() const;
    /// Selective faces on the given grid; empty mask for blocking species.
    FaceMask selective_faces(const Grid2D& g) const;
};

struct PhysicalParams {
    double eps = 1.0;  // dielectric coefficient
    double nu = 1.0;   // kinematic viscosity
    double kbt = 1.0;  // thermal energy factor

    void validate() const;
};

struct FlowState {
    VectorField velocity;
    ScalarField pressure;

    explicit FlowState(const Grid2D& g) : velocity(g), pressure(g) {}
    FlowState() = default;
};

struct SimulationState {
    std::vector<ScalarField> c;
    ScalarField phi;
    FlowState flow;
    double t = 0.0;

    SimulationState() = default;
    SimulationState(const Grid2D& g, std::size_t n_species)
        : c(n_species, ScalarField(g)), phi(g), flow(g) {}

    const Grid2D& grid() const { return phi.grid(); }
};

} // namespace npns
