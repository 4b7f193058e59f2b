#pragma once

#include <functional>

#include "npns/grid.hpp"
#include "npns/linalg.hpp"
#include "npns/species.hpp"

namespace npns {

/// Face force -kbt * rho_f * (Phi difference)/h on interior faces, with rho
/// averaged to the face; zero on boundary faces.
VectorField compute_force(const ScalarField& rho, const ScalarField& phi, double kbt);

/// Face gradient of a cell field on interior faces; zero on boundary faces.
VectorField discrete_gradient(const ScalarField& psi);

/// Discretely divergence-free velocity from a stream function sampled at the
/// grid nodes, u = d psi/dy, v = -d psi/dx. Boundary node values are forced
/// to zero so the normal velocity vanishes on the walls.
VectorField velocity_from_stream(const Grid2D& g,
                                 const std::function<double(double, double)>& psi);

/// (1/(2 kbt)) * sum over faces of u^2 * hx * hy.
double kinetic_energy(const FlowState& flow, double kbt);
double kinetic_energy(const VectorField& u, double kbt);

/// (nu/kbt) * |grad_h u|^2, the quadratic form of the viscous operator used by
/// the flow step, including the wall terms of the ghost reflection.
double viscous_dissipation(const VectorField& u, double nu, double kbt);

/// safety * h / ||u||, infinite for a fluid at rest.
double flow_admissible_dt(const VectorField& u, double safety = 0.4);

/// Projection stepper for the forced Navier-Stokes equations with no-slip
/// walls: explicit centered advection, backward-Euler viscosity, then the
/// force, then projection onto discretely divergence-free fields. Pressure
/// is returned with zero mean. Factorizations are built once per (grid, nu)
/// and per dt.
class FlowSolver {
public:
    FlowSolver(const Grid2D& g, double nu);

    /// Throws StepRejected when dt violates the advective CFL bound.
    FlowState step(const FlowState& flow, const VectorField& force, double dt,
                   double safety = 0.4);

    /// The projection alone: the divergence-free part of `u` and the
    /// potential q with u - grad_h q divergence free.
    VectorField project(const VectorField& u, ScalarField* q = nullptr) const;

    const Grid2D& grid() const noexcept { return grid_; }

private:
    void prepare(double dt);

    Grid2D grid_;
    double nu_;
    SparseMatrix lap_u_, lap_v_;  // -Lap on interior x- and y-faces
    SpdSolver pressure_;          // Neumann Laplacian with cell 0 eliminated
    double dt_ = -1.0;
    SpdSolver visc_u_, visc_v_;
};

FlowState ns_step(const FlowState& flow, const VectorField& force, const PhysicalParams& params,
                  double dt);

} // namespace npns
