#include "npns/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "npns/error.hpp"

namespace npns {

namespace {

void check_state(const SimulationState& st, const std::vector<IonSpecies>& species,
                 const BoundarySpec& w) {
    if (st.c.size() != species.size())
        throw ShapeError("transport: " + std::to_string(st.c.size()) + " concentration fields for " +
                         std::to_string(species.size()) + " species");
    const Grid2D& g = st.phi.grid();
    for (const auto& c : st.c) require_same_grid(g, c.grid(), "transport concentrations");
    require_same_grid(g, st.flow.velocity.grid(), "transport velocity");
    require_same_grid(g, w.grid(), "transport boundary data");
}

// One species' face fluxes; `sel` flags the selective boundary faces.
VectorField species_flux(const ScalarField& c, const ScalarField& phi, const VectorField& vel,
                         const IonSpecies& sp, const FaceMask& sel, const BoundarySpec& w,
                         unsigned parts) {
    const Grid2D& g = c.grid();
    const double hx = g.hx(), hy = g.hy();
    const bool adv = parts & flux_part::advection;
    const bool dif = parts & flux_part::diffusion;
    const bool dri = parts & flux_part::drift;
    const double d = sp.d, z = sp.z;
    VectorField j(g);

    auto interior = [&](double ca, double cb, double pa, double pb, double un, double h) {
        const double cf = 0.5 * (ca + cb);
        double f = 0.0;
        if (adv) f += un * cf;
        if (dif) f -= d * (cb - ca) / h;
        if (dri) f -= d * z * cf * (pb - pa) / h;
        return f;
    };
    // Flux through a selective face in the +coordinate direction, with the
    // ghost cell on the `lower` side (left/bottom edge) or the upper side.
    auto selective = [&](double cin, double pin, double wv, double un, double h, bool lower) {
        const double gamma = sp.gamma;
        const double cg = 2.0 * gamma - cin, pg = 2.0 * wv - pin;
        const double ca = lower ? cg : cin, cb = lower ? cin : cg;
        const double pa = lower ? pg : pin, pb = lower ? pin : pg;
        double f = 0.0;
        if (adv) f += un * gamma;
        if (dif) f -= d * (cb - ca) / h;
        if (dri) f -= d * z * gamma * (pb - pa) / h;
        return f;
    };

    for (int jj = 0; jj < g.ny; ++jj) {
        for (int i = 1; i < g.nx; ++i)
            j.u(i, jj) = interior(c(i - 1, jj), c(i, jj), phi(i - 1, jj), phi(i, jj), vel.u(i, jj), hx);
        j.u(0, jj) = sel(Edge::left, jj)
                         ? selective(c(0, jj), phi(0, jj), w.w(Edge::left, jj), vel.u(0, jj), hx, true)
                         : 0.0;
        j.u(g.nx, jj) = sel(Edge::right, jj)
                            ? selective(c(g.nx - 1, jj), phi(g.nx - 1, jj), w.w(Edge::right, jj),
                                        vel.u(g.nx, jj), hx, false)
                            : 0.0;
    }
    for (int i = 0; i < g.nx; ++i) {
        for (int jj = 1; jj < g.ny; ++jj)
            j.v(i, jj) = interior(c(i, jj - 1), c(i, jj), phi(i, jj - 1), phi(i, jj), vel.v(i, jj), hy);
        j.v(i, 0) = sel(Edge::bottom, i)
                        ? selective(c(i, 0), phi(i, 0), w.w(Edge::bottom, i), vel.v(i, 0), hy, true)
                        : 0.0;
        j.v(i, g.ny) = sel(Edge::top, i)
                           ? selective(c(i, g.ny - 1), phi(i, g.ny - 1), w.w(Edge::top, i),
                                       vel.v(i, g.ny), hy, false)
                           : 0.0;
    }
    return j;
}

double max_face_gradient(const ScalarField& phi, const BoundarySpec& w) {
    const Grid2D& g = phi.grid();
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) m = std::max(m, std::abs(phi(i, j) - phi(i - 1, j)) / g.hx());
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(phi(i, j) - phi(i, j - 1)) / g.hy());
    for (Edge e : all_edges) {
        const double h = (e == Edge::bottom || e == Edge::top) ? g.hy() : g.hx();
        for (int k = 0; k < edge_faces(g, e); ++k)
            m = std::max(m, 2.0 * std::abs(w.w(e, k) - phi[edge_cell(g, e, k)]) / h);
    }
    return m;
}

} // namespace

FluxSet compute_fluxes(const SimulationState& state, const std::vector<IonSpecies>& species,
                       const BoundarySpec& w, unsigned parts) {
    check_state(state, species, w);
    FluxSet out;
    for (std::size_t s = 0; s < species.size(); ++s)
        out.j.push_back(species_flux(state.c[s], state.phi, state.flow.velocity, species[s],
                                     species[s].selective_faces(state.grid()), w, parts));
    return out;
}

double transport_admissible_dt(const SimulationState& state,
                               const std::vector<IonSpecies>& species, const BoundarySpec& w,
                               double safety) {
    check_state(state, species, w);
    const Grid2D& g = state.grid();
    const double h = std::min(g.hx(), g.hy());
    const double umax = state.flow.velocity.max_abs();
    const double grad = max_face_gradient(state.phi, w);
    double drift = 0.0;
    for (const auto& sp : species) drift = std::max(drift, sp.d * std::abs(sp.z) * grad);
    double dt = std::numeric_limits<double>::infinity();
    if (umax > 0.0) dt = std::min(dt, h / umax);
    if (drift > 0.0) dt = std::min(dt, h / drift);
    return safety * dt;
}

std::array<std::vector<double>, 4> boundary_face_values(const ScalarField& c,
                                                        const IonSpecies& sp) {
    const Grid2D& g = c.grid();
    const FaceMask sel = sp.selective_faces(g);
    std::array<std::vector<double>, 4> out;
    for (Edge e : all_edges) {
        auto& v = out[static_cast<int>(e)];
        for (int k = 0; k < edge_faces(g, e); ++k) {
            // Face value is the mean of the cell and its ghost.
            const double cin = c[edge_cell(g, e, k)];
            v.push_back(sel(e, k) ? 0.5 * (cin + (2.0 * sp.gamma - cin)) : cin);
        }
    }
    return out;
}

PositivityReport check_positivity(const SimulationState& state, double threshold) {
    PositivityReport r;
    r.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < state.c.size(); ++s)
        for (std::size_t k = 0; k < state.c[s].size(); ++k)
            if (state.c[s][k] < r.min_value) {
                r.min_value = state.c[s][k];
                r.species = static_cast<int>(s);
                r.cell = static_cast<int>(k);
            }
    r.ok = !(r.min_value < threshold);
    return r;
}

Transport::Transport(const Grid2D& g, std::vector<IonSpecies> species, BoundarySpec w)
    : grid_(g), species_(std::move(species)), w_(std::move(w)) {
    require_same_grid(g, w_.grid(), "transport boundary data");
    for (const auto& sp : species_) {
        sp.validate();
        selective_.push_back(sp.selective_faces(g));
        laplacians_.push_back(assemble_cell_laplacian(g, selective_.back()));
        sources_.push_back(dirichlet_source(g, selective_.back(), BoundarySpec(g, sp.gamma)));
    }
}

double Transport::admissible_dt(const SimulationState& state, double safety) const {
    return transport_admissible_dt(state, species_, w_, safety);
}

const SpdSolver& Transport::diffusion_solver(std::size_t s, double dt) {
    auto it = cache_.find(s);
    if (it != cache_.end() && it->second.first == dt) return it->second.second;
    SparseMatrix a = (dt * species_[s].d) * laplacians_[s];
    for (int k = 0; k < grid_.cells(); ++k) a.coeffRef(k, k) += 1.0;
    auto& slot = cache_[s];
    slot = {dt, SpdSolver(std::move(a))};
    return slot.second;
}

std::vector<ScalarField> Transport::step(const SimulationState& state, double dt, double safety) {
    check_state(state, species_, w_);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("transport step needs dt > 0");
    const double limit = admissible_dt(state, safety);
    if (dt > limit) {
        std::ostringstream os;
        os << "transport CFL violated: dt = " << dt << " exceeds admissible " << limit;
        throw StepRejected(os.str(), limit);
    }
    std::vector<ScalarField> out;
    for (std::size_t s = 0; s < species_.size(); ++s) {
        const VectorField jexp =
            species_flux(state.c[s], state.phi, state.flow.velocity, species_[s], selective_[s], w_,
                         flux_part::advection | flux_part::drift);
        const ScalarField div = divergence(jexp);
        Vec rhs(grid_.cells());
        const double dd = dt * species_[s].d;
        for (int k = 0; k < grid_.cells(); ++k)
            rhs[k] = state.c[s][k] - dt * div[k] + dd * sources_[s][k];
        ScalarField next = to_field(grid_, diffusion_solver(s, dt).solve(rhs));
        const double m = next.min();
        if (m < positivity_floor || !next.all_finite()) {
            std::ostringstream os;
            os << "species '" << species_[s].name << "' reached concentration " << m
               << " with dt = " << dt;
            throw PositivityFailure(os.str(), m);
        }
        out.push_back(std::move(next));
    }
    return out;
}

std::vector<ScalarField> np_step(const SimulationState& state,
                                 const std::vector<IonSpecies>& species, const BoundarySpec& w,
                                 double dt, double safety) {
    Transport t(state.grid(), species, w);
    return t.step(state, dt, safety);
}

} // namespace npns
