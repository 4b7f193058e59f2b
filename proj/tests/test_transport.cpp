#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "npns/error.hpp"
#include "npns/fields.hpp"
#include "npns/pb.hpp"
#include "npns/poisson.hpp"
#include "npns/transport.hpp"

using namespace npns;
using std::numbers::pi;

namespace {

IonSpecies blocking(double z, double d = 1.0) {
    IonSpecies s;
    s.name = z > 0 ? "cation" : "anion";
    s.z = z;
    s.d = d;
    return s;
}

double total(const ScalarField& c) {
    double s = 0.0;
    for (double x : c.values()) s += x;
    return s * c.grid().cell_area();
}

// Discretely divergence-free face velocity from a stream function on nodes
// that vanishes on the boundary.
VectorField solenoidal(const Grid2D& g, double amp) {
    auto psi = [&](int i, int j) {
        const double x = i * g.hx(), y = j * g.hy();
        return amp * std::pow(std::sin(pi * x) * std::sin(pi * y), 2);
    };
    VectorField u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) u.u(i, j) = (psi(i, j + 1) - psi(i, j)) / g.hy();
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            u.v(i, j) = -(psi(i + 1, j) - psi(i, j)) / g.hx();
    return u;
}

double max_interior_flux(const FluxSet& f) {
    const Grid2D& g = f.j[0].grid();
    double m = 0.0;
    for (const auto& j : f.j) {
        for (int jj = 0; jj < g.ny; ++jj)
            for (int i = 1; i < g.nx; ++i) m = std::max(m, std::abs(j.u(i, jj)));
        for (int jj = 1; jj < g.ny; ++jj)
            for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(j.v(i, jj)));
    }
    return m;
}

} // namespace

TEST_CASE("constant data carries no flux") {
    const Grid2D g = Grid2D::make(8, 8);
    SimulationState st(g, 2);
    st.c[0] = ScalarField(g, 1.5);
    st.c[1] = ScalarField(g, 1.5);
    st.phi = ScalarField(g, 0.3);
    const std::vector<IonSpecies> sp{blocking(1), blocking(-1)};
    const BoundarySpec w(g, 0.3);
    const FluxSet f = compute_fluxes(st, sp, w);
    for (const auto& j : f.j) CHECK(j.max_abs() == 0.0);

    const auto next = np_step(st, sp, w, 0.1);
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t k = 0; k < next[s].size(); ++k) CHECK(next[s][k] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("Boltzmann data annihilates drift plus diffusion to second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64, 128}) {
        const Grid2D g = Grid2D::make(n, n);
        SimulationState st(g, 2);
        st.phi = ScalarField::sample(g, [](double x, double y) {
            return 0.8 * std::sin(pi * x) * std::cos(pi * y) + 0.3 * x;
        });
        for (std::size_t k = 0; k < st.c[0].size(); ++k) {
            st.c[0][k] = 0.5 * std::exp(-st.phi[k]);
            st.c[1][k] = 2.0 * std::exp(2.0 * st.phi[k]);
        }
        const FluxSet f = compute_fluxes(st, {blocking(1), blocking(-2, 0.7)}, BoundarySpec(g));
        const double err = max_interior_flux(f);
        if (prev > 0.0) {
            const double ratio = prev / err;
            CHECK(ratio >= 3.5);
            CHECK(ratio <= 4.5);
        }
        prev = err;
    }
}

TEST_CASE("blocking boundary faces carry exactly zero flux") {
    const Grid2D g = Grid2D::make(12, 10);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    SimulationState st(g, 2);
    for (auto& c : st.c)
        for (auto& x : c.values()) x = u(rng);
    for (auto& x : st.phi.values()) x = u(rng);
    st.flow.velocity = solenoidal(g, 0.1);
    const FluxSet f = compute_fluxes(st, {blocking(1), blocking(-1)}, BoundarySpec(g, 0.7));
    for (const auto& j : f.j) {
        for (int jj = 0; jj < g.ny; ++jj) {
            CHECK(j.u(0, jj) == 0.0);
            CHECK(j.u(g.nx, jj) == 0.0);
        }
        for (int i = 0; i < g.nx; ++i) {
            CHECK(j.v(i, 0) == 0.0);
            CHECK(j.v(i, g.ny) == 0.0);
        }
    }
}

TEST_CASE("np_step conserves blocking masses") {
    const Grid2D g = Grid2D::make(24, 20);
    SimulationState st(g, 2);
    st.c[0] = ScalarField::sample(g, [](double x, double y) {
        return 1.0 + 0.5 * std::exp(-40 * ((x - 0.3) * (x - 0.3) + (y - 0.6) * (y - 0.6)));
    });
    st.c[1] = ScalarField::sample(g, [](double x, double y) {
        return 1.0 + 0.5 * std::exp(-40 * ((x - 0.7) * (x - 0.7) + (y - 0.4) * (y - 0.4)));
    });
    const std::vector<IonSpecies> sp{blocking(1), blocking(-1, 0.5)};
    const BoundarySpec w = BoundarySpec::from_function(g, [](double x, double) { return x; });
    PoissonSolver ps(g, 0.05);
    st.flow.velocity = solenoidal(g, 0.05);
    Transport tr(g, sp, w);
    const double m0 = total(st.c[0]), m1 = total(st.c[1]);
    for (int step = 0; step < 20; ++step) {
        st.phi = ps.solve(compute_charge_density(st.c, sp), w);
        const double dt = std::min(2e-3, tr.admissible_dt(st));
        const double before0 = total(st.c[0]), before1 = total(st.c[1]);
        st.c = tr.step(st, dt);
        CHECK(std::abs(total(st.c[0]) - before0) <= 1e-12 * before0);
        CHECK(std::abs(total(st.c[1]) - before1) <= 1e-12 * before1);
    }
    CHECK(std::abs(total(st.c[0]) - m0) <= 1e-11 * m0);
    CHECK(std::abs(total(st.c[1]) - m1) <= 1e-11 * m1);
}

TEST_CASE("pure diffusion follows the Neumann eigenmode decay") {
    const Grid2D g = Grid2D::make(16, 12);
    const double amp = 0.3, mean = 1.0, d = 0.8, dt = 0.01;
    SimulationState st(g, 1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) st.c[0](i, j) = mean + amp * std::cos(pi * (i + 0.5) / g.nx);
    IonSpecies sp = blocking(0, d);
    Transport tr(g, {sp}, BoundarySpec(g));
    const double lambda = 4.0 / (g.hx() * g.hx()) * std::pow(std::sin(pi / (2.0 * g.nx)), 2);
    const double m0 = total(st.c[0]);
    double prev_sup = st.c[0].max_abs();
    for (int n = 1; n <= 200; ++n) {
        st.c = tr.step(st, dt);
        CHECK(std::abs(total(st.c[0]) - m0) <= 1e-12 * m0);
        CHECK(st.c[0].max_abs() <= prev_sup);
        prev_sup = st.c[0].max_abs();
        if (n % 50 == 0) {
            const double a = amp * std::pow(1.0 + dt * d * lambda, -n);
            double err = 0.0;
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    err = std::max(err, std::abs(st.c[0](i, j) - mean -
                                                 a * std::cos(pi * (i + 0.5) / g.nx)));
            CHECK(err <= 1e-12);
        }
    }
    CHECK(st.c[0].max() - st.c[0].min() < 1e-3);
}

TEST_CASE("backward-Euler diffusion is an L-infinity contraction for any dt") {
    const Grid2D g = Grid2D::make(16, 16);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    SimulationState st(g, 1);
    for (auto& x : st.c[0].values()) x = u(rng);
    Transport tr(g, {blocking(1)}, BoundarySpec(g));
    // Backward error of the direct solve grows with the condition number 1 + dt*8/h^2.
    auto roundoff = [&](double dt) {
        return 64 * std::numeric_limits<double>::epsilon() * (1 + dt * 8 / (g.hx() * g.hx()));
    };
    for (double dt : {1e-4, 1e-2, 1.0, 100.0}) {
        SimulationState s2 = st;
        double prev = s2.c[0].max_abs();
        for (int k = 0; k < 5; ++k) {
            s2.c = tr.step(s2, dt);
            CHECK(s2.c[0].max_abs() <= prev * (1 + roundoff(dt)));
            prev = s2.c[0].max_abs();
        }
    }
}

TEST_CASE("selective faces are pinned at gamma") {
    const Grid2D g = Grid2D::make(16, 16);
    IonSpecies sel = blocking(1);
    sel.regime = Regime::selective;
    sel.gamma = 1.3;
    sel.segments = {{Edge::bottom, 0.0, 1.0}, {Edge::left, 0.25, 0.75}};
    const std::vector<IonSpecies> sp{sel, blocking(-1)};
    SimulationState st(g, 2);
    st.c[0] = ScalarField(g, 0.6);
    st.c[1] = ScalarField(g, 0.6);
    const BoundarySpec w(g, 0.2);
    st.phi = PoissonSolver(g, 0.1).solve(compute_charge_density(st.c, sp), w);
    Transport tr(g, sp, w);
    for (int k = 0; k < 5; ++k) {
        st.c = tr.step(st, std::min(1e-3, tr.admissible_dt(st)));
        const FaceMask m = sel.selective_faces(g);
        const auto faces = boundary_face_values(st.c[0], sel);
        for (Edge e : all_edges)
            for (int f = 0; f < edge_faces(g, e); ++f)
                if (m(e, f)) CHECK(faces[static_cast<int>(e)][f] == doctest::Approx(1.3).epsilon(1e-15));
    }
    // Mass flows in through the selective edge.
    CHECK(total(st.c[0]) > 0.6);
}

TEST_CASE("Boltzmann state is stationary up to truncation") {
    std::vector<double> consts;
    const double dt = 5e-4;
    for (int n : {32, 64}) {
        const Grid2D g = Grid2D::make(n, n);
        const BoundarySpec w = BoundarySpec::from_function(g, [](double x, double y) {
            return 0.5 * std::sin(pi * x) + y;
        });
        PBProblem prob;
        prob.eps = 0.1;
        prob.w = w;
        prob.species = {{1.0, PBDatum::fixed_mass, 1.0}, {-1.0, PBDatum::fixed_mass, 1.0}};
        const BoltzmannState ref = solve_pb(prob);
        const std::vector<IonSpecies> sp{blocking(1), blocking(-1)};
        SimulationState st(g, 2);
        st.c = ref.c_star;
        PoissonSolver ps(g, prob.eps);
        Transport tr(g, sp, w);
        for (int k = 0; k < 100; ++k) {
            st.phi = ps.solve(compute_charge_density(st.c, sp), w);
            st.c = tr.step(st, dt);
        }
        double err = 0.0;
        for (int s = 0; s < 2; ++s)
            err = std::max(err, (st.c[s] - ref.c_star[s]).max_abs());
        const double h = g.hx();
        consts.push_back(err / (100 * dt * h * h));
    }
    MESSAGE("stationarity constants " << consts[0] << " " << consts[1]);
    CHECK(consts[1] <= 1.5 * consts[0]);
    CHECK(consts[1] >= 0.5 * consts[0]);
}

TEST_CASE("CFL violation is rejected with the admissible step") {
    const Grid2D g = Grid2D::make(8, 8);
    SimulationState st(g, 1);
    st.c[0] = ScalarField(g, 1.0);
    st.flow.velocity = solenoidal(g, 1.0);
    Transport tr(g, {blocking(1)}, BoundarySpec(g));
    const double limit = tr.admissible_dt(st);
    const double h = g.hx();
    CHECK(limit == doctest::Approx(0.4 * h / st.flow.velocity.max_abs()));
    try {
        tr.step(st, 2 * limit);
        FAIL("expected StepRejected");
    } catch (const StepRejected& e) {
        CHECK(e.admissible_dt() == doctest::Approx(limit));
    }
    CHECK_NOTHROW(tr.step(st, limit));
}

TEST_CASE("drift CFL uses boundary face gradients") {
    const Grid2D g = Grid2D::make(8, 8);
    SimulationState st(g, 1);
    st.c[0] = ScalarField(g, 1.0);
    IonSpecies sp = blocking(2, 0.5);
    const BoundarySpec w(g, 1.0);
    // Phi = 0 inside, W = 1 outside: face gradient 2/h at the walls.
    const double dt = transport_admissible_dt(st, {sp}, w);
    CHECK(dt == doctest::Approx(0.4 * g.hx() / (0.5 * 2 * 2 / g.hx())));
}

TEST_CASE("positivity failure leaves the state untouched") {
    const Grid2D g = Grid2D::make(8, 8);
    SimulationState st(g, 1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) st.c[0](i, j) = i < 4 ? 0.0 : 1.0;
    st.phi = ScalarField::sample(g, [](double x, double) { return -40.0 * x; });
    const BoundarySpec w = BoundarySpec::from_function(g, [](double x, double) { return -40.0 * x; });
    Transport tr(g, {blocking(1)}, w);
    const SimulationState copy = st;
    CHECK_THROWS_AS(tr.step(st, tr.admissible_dt(st)), PositivityFailure);
    CHECK(st.c[0].data() == copy.c[0].data());
}

TEST_CASE("check_positivity") {
    const Grid2D g = Grid2D::make(6, 6);
    SimulationState st(g, 2);
    st.c[0] = ScalarField(g, 0.5);
    st.c[1] = ScalarField(g, 0.25);
    PositivityReport r = check_positivity(st);
    CHECK(r.ok);
    CHECK(r.min_value == 0.25);
    CHECK(r.species == 1);
    st.c[0][7] = -1e-6;
    r = check_positivity(st);
    CHECK_FALSE(r.ok);
    CHECK(r.min_value == -1e-6);
    CHECK(r.species == 0);
    CHECK(r.cell == 7);
    st.c[0][7] = -1e-13;
    CHECK(check_positivity(st).ok);
}

TEST_CASE("shape mismatch") {
    const Grid2D g = Grid2D::make(6, 6);
    SimulationState st(g, 2);
    CHECK_THROWS_AS(compute_fluxes(st, {blocking(1)}, BoundarySpec(g)), ShapeError);
    CHECK_THROWS_AS(compute_fluxes(st, {blocking(1), blocking(-1)}, BoundarySpec(Grid2D::make(8, 6))),
                    ShapeError);
}
