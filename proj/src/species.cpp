#include "npns/species.hpp"

#include <cmath>

#include "npns/error.hpp"

namespace npns {

void IonSpecies::validate() const {
    if (!std::isfinite(z)) throw ConfigError("species '" + name + "': valence must be finite");
    if (!(d > 0.0) || !std::isfinite(d))
        throw ConfigError("species '" + name + "': diffusivity must be positive");
    if (regime == Regime::selective) {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw ConfigError("species '" + name + "': selective species needs gamma > 0");
        if (segments.empty())
            throw ConfigError("species '" + name + "': selective species needs boundary segments");
    }
}

FaceMask IonSpecies::selective_faces(const Grid2D& g) const {
    if (!selective()) return FaceMask(g);
    return mask_from_segments(g, segments);
}

void PhysicalParams::validate() const {
    auto pos = [](double x) { return x > 0.0 && std::isfinite(x); };
    if (!pos(eps)) throw ConfigError("eps must be positive");
    if (!pos(nu)) throw ConfigError("nu must be positive");
    if (!pos(kbt)) throw ConfigError("kbt must be positive");
}

} // namespace npns
