#pragma once

#include <vector>

#include "npns/boundary.hpp"
#include "npns/grid.hpp"
#include "npns/species.hpp"

namespace npns {

/// Largest |z*phi| for which exp(+-z*phi) is evaluated.
inline constexpr double exponent_guard = 60.0;

/// Throws OverflowError naming `what` when max |z*phi| exceeds the guard.
void check_exponent(const ScalarField& phi, double z, const char* what);

/// rho = sum_i z_i c_i.
ScalarField compute_charge_density(const std::vector<ScalarField>& c,
                                   const std::vector<IonSpecies>& species);

/// Discrete harmonic function with trace W on the whole boundary.
ScalarField harmonic_extension(const BoundarySpec& w, const Grid2D& g, double eps = 1.0);

/// c_i exp(z_i phi).
ScalarField compute_tilde_c(const ScalarField& c, const ScalarField& phi, double z);

} // namespace npns
