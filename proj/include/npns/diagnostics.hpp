#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "npns/boundary.hpp"
#include "npns/grid.hpp"
#include "npns/pb.hpp"
#include "npns/poisson.hpp"
#include "npns/species.hpp"

namespace npns {

/// Concentrations below this floor are treated as zero in logarithms.
inline constexpr double concentration_floor = 1e-300;

struct EnergyReport {
    double t = 0.0;
    double total_energy = 0.0;  // sum of entropies + potential term + kinetic
    double kinetic = 0.0;
    double dissipation = 0.0;          // ionic part D
    double viscous_dissipation = 0.0;  // (nu/kbt) |grad u|^2
    std::vector<double> masses;
    std::vector<double> entropies;  // integral of E_i c_i*
    double potential_term = 0.0;    // (1/2) (rho - rho*) (Phi - Phi*)
    std::vector<double> dist_l2;        // ||c_i - c_i*||_2
    std::vector<double> grad_tilde_l2;  // ||grad c~_i||_2
    double modified_energy = 0.0;       // total_energy - integral of rho W~

    /// The energy without the kinetic part.
    double entropy_energy() const { return total_energy - kinetic; }
};

/// Energy, dissipation and distance functionals of a state relative to a
/// Boltzmann reference. Caches the homogeneous Poisson factorization and
/// the harmonic extension of W.
class EnergyEvaluator {
public:
    EnergyEvaluator(const Grid2D& g, std::vector<IonSpecies> species, BoundarySpec w,
                    PhysicalParams params);

    EnergyReport evaluate(const SimulationState& state, const BoltzmannState& ref) const;

    /// Relative entropy plus potential term, without kinetic energy.
    double energy(const SimulationState& state, const BoltzmannState& ref) const;
    double potential_term(const ScalarField& rho, const ScalarField& rho_star) const;
    double dissipation(const SimulationState& state) const;
    std::vector<double> dissipation_per_species(const SimulationState& state) const;
    std::vector<double> grad_tilde_l2(const SimulationState& state) const;

    const ScalarField& w_tilde() const noexcept { return w_tilde_; }
    const std::vector<IonSpecies>& species() const noexcept { return species_; }

private:
    Grid2D grid_;
    std::vector<IonSpecies> species_;
    std::vector<FaceMask> selective_;
    BoundarySpec w_;
    PhysicalParams params_;
    PoissonSolver poisson_;
    ScalarField w_tilde_;
};

EnergyReport compute_energy(const SimulationState& state, const BoltzmannState& ref,
                            const std::vector<IonSpecies>& species, const BoundarySpec& w,
                            const PhysicalParams& params);

/// D = sum_i D_i * integral of c_i |grad(log c_i + z_i Phi)|^2, by face
/// quadrature. Faces next to a cell below the floor are skipped.
double compute_dissipation(const SimulationState& state, const std::vector<IonSpecies>& species,
                           const BoundarySpec& w);

/// Integral of E_i c_i* = c log(c/c*) - c + c*, with 0 log 0 = 0.
double relative_entropy(const ScalarField& c, const ScalarField& c_star);

/// F = energy + kinetic - integral of rho W~.
double compute_modified_energy(const SimulationState& state, const BoltzmannState& ref,
                               const ScalarField& w_tilde, const std::vector<IonSpecies>& species,
                               const PhysicalParams& params);

struct DecayReport {
    bool monotone = true;
    int first_violation = -1;     // index into the history of the first uptick
    double max_increase = 0.0;    // largest relative step increase
    bool rate_consistent = true;  // -dE/dt within 20% of the dissipation
    double worst_rate_error = 0.0;
    int rate_samples = 0;

    bool ok() const { return monotone; }
};

inline constexpr double decay_step_tol = 1e-8;
inline constexpr double decay_rate_tol = 0.2;

/// Flags every step whose total energy grows by more than 1e-8 (1 + |E|).
/// The rate comparison uses the trapezoid average of D + viscous
/// dissipation and skips steps where both sides are below `rate_floor`.
DecayReport check_decay(const std::vector<EnergyReport>& history, double rate_floor = 1e-6);

struct InvarianceReport {
    bool ok = true;
    double initial_difference = 0.0;
    double max_drift = 0.0;  // relative to max(1, |initial difference|)
    int worst_index = -1;
};

inline constexpr double invariance_tol = 1e-8;

/// Tests that a series of energy differences E_A - E_B stays constant.
InvarianceReport check_constant_difference(const std::vector<double>& differences,
                                           double tol = invariance_tol);

/// Throws ConfigError unless both references share Z_i on selective species.
void require_admissible_pair(const BoltzmannState& a, const BoltzmannState& b,
                             const std::vector<IonSpecies>& species);

InvarianceReport reference_invariance_check(const std::vector<SimulationState>& history,
                                            const BoltzmannState& ref_a,
                                            const BoltzmannState& ref_b,
                                            const EnergyEvaluator& evaluator,
                                            double tol = invariance_tol);

/// Predicted E_A - E_B = sum_i log(Z_i^A / Z_i^B) * mass_i + integral of K*.
double predicted_energy_difference(const std::vector<double>& masses, const BoltzmannState& a,
                                   const BoltzmannState& b, const ScalarField& phi_w);

struct GronwallReport {
    bool ok = true;
    double c = 0.0;           // fitted constant
    int fit_samples = 0;      // samples in the first 10% of the time span
    int first_violation = -1;
    double worst_ratio = 0.0;  // max over the check window of (F + C) / envelope
};

/// Smallest C with F(t) + C <= (F(0) + C) e^{C t} on the first `fit_fraction`
/// of the time span, then the same envelope is checked on the rest.
GronwallReport check_gronwall(const std::vector<double>& t, const std::vector<double>& f,
                              double fit_fraction = 0.1);

/// Per-step convergence record: distances to the reference, gradients of
/// c~_i, kinetic energy, energy increments and the means of c~_i.
class ConvergenceMonitor {
public:
    void record(const EnergyReport& r, std::vector<double> tilde_means);

    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<std::vector<double>>& dist_l2() const noexcept { return dist_; }
    const std::vector<std::vector<double>>& grad_tilde_l2() const noexcept { return grad_; }
    const std::vector<double>& kinetic() const noexcept { return kin_; }
    const std::vector<double>& increments() const noexcept { return inc_; }
    const std::vector<std::vector<double>>& tilde_means() const noexcept { return means_; }

    /// Time average of ||grad c~_i|| over the final quarter divided by its
    /// initial value, maximized over species.
    double final_quarter_gradient_ratio() const;

private:
    std::vector<double> t_, kin_, inc_, energy_;
    std::vector<std::vector<double>> dist_, grad_, means_;
};

} // namespace npns
