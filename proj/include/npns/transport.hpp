#pragma once

#include <map>
#include <vector>

#include "npns/boundary.hpp"
#include "npns/grid.hpp"
#include "npns/linalg.hpp"
#include "npns/species.hpp"

namespace npns {

/// Face fluxes j_i = u c_i - D_i (grad c_i + z_i c_i grad Phi), one
/// staggered face field per species.
struct FluxSet {
    std::vector<VectorField> j;
};

namespace flux_part {
inline constexpr unsigned advection = 1;
inline constexpr unsigned diffusion = 2;
inline constexpr unsigned drift = 4;
inline constexpr unsigned all = 7;
} // namespace flux_part

/// Centered face interpolation for advection and drift; blocking boundary
/// faces carry exactly zero flux, selective faces use the ghost value
/// 2 gamma - c so the face concentration is gamma.
FluxSet compute_fluxes(const SimulationState& state, const std::vector<IonSpecies>& species,
                       const BoundarySpec& w, unsigned parts = flux_part::all);

/// Largest dt allowed by
/// dt <= safety * min(h / ||u||, h / max_i(D_i |z_i| ||grad Phi||)), norms on faces.
double transport_admissible_dt(const SimulationState& state,
                               const std::vector<IonSpecies>& species, const BoundarySpec& w,
                               double safety = 0.4);

/// Concentration at each boundary face: gamma on selective faces, the
/// adjacent cell value elsewhere.
std::array<std::vector<double>, 4> boundary_face_values(const ScalarField& c,
                                                        const IonSpecies& sp);

struct PositivityReport {
    double min_value = 0.0;
    int species = -1;  // index of the minimizing species
    int cell = -1;
    bool ok = true;
};

inline constexpr double positivity_floor = -1e-12;

PositivityReport check_positivity(const SimulationState& state,
                                  double threshold = positivity_floor);

/// Semi-implicit Nernst-Planck stepper: backward-Euler diffusion (one SPD
/// solve per species), explicit centered advection and drift, all in flux
/// form. Caches the diffusion factorizations for the last dt used.
class Transport {
public:
    Transport(const Grid2D& g, std::vector<IonSpecies> species, BoundarySpec w);

    /// Returns the updated concentrations; `state` is not modified.
    /// Throws StepRejected when dt exceeds the CFL bound and
    /// PositivityFailure when a concentration drops below -1e-12.
    std::vector<ScalarField> step(const SimulationState& state, double dt,
                                  double safety = 0.4);

    double admissible_dt(const SimulationState& state, double safety = 0.4) const;

    const std::vector<IonSpecies>& species() const noexcept { return species_; }
    const BoundarySpec& boundary() const noexcept { return w_; }

private:
    const SpdSolver& diffusion_solver(std::size_t s, double dt);

    Grid2D grid_;
    std::vector<IonSpecies> species_;
    BoundarySpec w_;
    std::vector<FaceMask> selective_;
    std::vector<SparseMatrix> laplacians_;
    std::vector<Vec> sources_;  // 2 gamma / h^2 on selective boundary cells
    std::map<std::size_t, std::pair<double, SpdSolver>> cache_;
};

std::vector<ScalarField> np_step(const SimulationState& state,
                                 const std::vector<IonSpecies>& species, const BoundarySpec& w,
                                 double dt, double safety = 0.4);

} // namespace npns
