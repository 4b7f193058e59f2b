#pragma once

#include <optional>
#include <vector>

#include "npns/boundary.hpp"
#include "npns/grid.hpp"

namespace npns {

/// Which constant is held fixed for a species in the steady-state problem.
enum class PBDatum {
    fixed_z,     // Dirichlet-type species: Z_i given
    fixed_mass,  // blocking species: I_i^0 = integral of c_i given, Z_i follows from Phi*
};

struct PBSpecies {
    double z = 0.0;
    PBDatum datum = PBDatum::fixed_mass;
    double value = 1.0;  // Z_i or I_i^0, > 0
};

/// -eps Lap Phi = sum_{fixed_z} z Z^{-1} e^{-z Phi}
///              + sum_{fixed_mass} z I e^{-z Phi} / int e^{-z Phi},   Phi = W on the boundary.
struct PBProblem {
    double eps = 1.0;
    BoundarySpec w;
    std::vector<PBSpecies> species;

    void validate() const;
    const Grid2D& grid() const { return w.grid(); }
};

struct BoltzmannState {
    ScalarField phi_star;
    std::vector<ScalarField> c_star;
    std::vector<double> z_const;
    ScalarField rho_star;
};

enum class InitialGuess { zero, harmonic, custom };

struct NewtonConfig {
    int max_iters = 60;
    double residual_tol = 1e-10;  // sup norm of the PB residual
    double line_search_shrink = 0.5;
    InitialGuess guess = InitialGuess::harmonic;
    std::optional<ScalarField> custom_guess;  // used with InitialGuess::custom
};

struct NewtonTrace {
    std::vector<double> residuals;  // sup norm before each iteration, plus the final one
    std::vector<double> energies;
    int gradient_fallbacks = 0;
};

/// Discrete energy: (eps/2) sum |grad_h Phi|^2 (boundary faces through the
/// ghost values) + sum_{fixed_z} Z^{-1} e^{-z Phi} + sum_{fixed_mass} I log int e^{-z Phi}.
/// Its gradient with respect to Phi_k is cell_area * pb_residual(Phi)_k.
double pb_energy(const ScalarField& phi, const PBProblem& prob);

/// -eps Lap_h Phi - rho*(Phi).
ScalarField pb_residual(const ScalarField& phi, const PBProblem& prob);

/// Linearization at Phi applied to psi (psi has zero boundary trace):
/// -eps Lap psi + G''(Phi) psi + sum_{fixed_mass} z^2 I (psi - (psi, p)) p,
/// p = e^{-z Phi} / int e^{-z Phi}.
ScalarField apply_L_phi(const ScalarField& phi, const ScalarField& psi, const PBProblem& prob);

/// Damped Newton with energy line search. Throws SolverError carrying the
/// residual history if it fails within max_iters.
BoltzmannState solve_pb(const PBProblem& prob, const NewtonConfig& cfg = {},
                        NewtonTrace* trace = nullptr);

/// Concentrations, Z_i and charge density implied by a potential.
BoltzmannState boltzmann_from_phi(const ScalarField& phi, const PBProblem& prob);

} // namespace npns
