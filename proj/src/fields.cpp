#include "npns/fields.hpp"

#include <cmath>
#include <string>

#include "npns/error.hpp"
#include "npns/poisson.hpp"

namespace npns {

void check_exponent(const ScalarField& phi, double z, const char* what) {
    const double m = std::abs(z) * phi.max_abs();
    if (!(m <= exponent_guard))
        throw OverflowError(std::string(what) + ": max |z*phi| = " + std::to_string(m) +
                                " exceeds the exponential guard " +
                                std::to_string(exponent_guard),
                            m);
}

ScalarField compute_charge_density(const std::vector<ScalarField>& c,
                                   const std::vector<IonSpecies>& species) {
    if (c.size() != species.size())
        throw ShapeError("charge density: " + std::to_string(c.size()) + " fields for " +
                         std::to_string(species.size()) + " species");
    if (c.empty()) throw ShapeError("charge density: no species");
    ScalarField rho(c.front().grid());
    for (std::size_t s = 0; s < c.size(); ++s) {
        require_same_grid(rho.grid(), c[s].grid(), "charge density");
        const double z = species[s].z;
        for (std::size_t k = 0; k < rho.size(); ++k) rho[k] += z * c[s][k];
    }
    return rho;
}

ScalarField harmonic_extension(const BoundarySpec& w, const Grid2D& g, double eps) {
    return PoissonSolver(g, eps).solve(ScalarField(g), w);
}

ScalarField compute_tilde_c(const ScalarField& c, const ScalarField& phi, double z) {
    require_same_grid(c.grid(), phi.grid(), "tilde c");
    check_exponent(phi, z, "tilde c");
    ScalarField out(c.grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c[k] * std::exp(z * phi[k]);
    return out;
}

} // namespace npns
