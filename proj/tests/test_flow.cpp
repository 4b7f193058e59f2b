#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "npns/error.hpp"
#include "npns/flow.hpp"

using namespace npns;
using std::numbers::pi;

namespace {

double max_interior(const VectorField& f, bool want_u) {
    const Grid2D& g = f.grid();
    double m = 0.0;
    if (want_u) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) m = std::max(m, std::abs(f.u(i, j)));
    } else {
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(f.v(i, j)));
    }
    return m;
}

bool walls_zero(const VectorField& f) {
    const Grid2D& g = f.grid();
    for (int j = 0; j < g.ny; ++j)
        if (f.u(0, j) != 0.0 || f.u(g.nx, j) != 0.0) return false;
    for (int i = 0; i < g.nx; ++i)
        if (f.v(i, 0) != 0.0 || f.v(i, g.ny) != 0.0) return false;
    return true;
}

FlowState vortex(const Grid2D& g, double amp) {
    FlowState s(g);
    s.velocity = velocity_from_stream(g, [amp](double x, double y) {
        return amp * std::pow(std::sin(pi * x) * std::sin(pi * y), 2);
    });
    return s;
}

} // namespace

TEST_CASE("force examples") {
    const Grid2D g = Grid2D::make(8, 8);
    const ScalarField phi_x = ScalarField::sample(g, [](double x, double) { return x; });
    CHECK(compute_force(ScalarField(g), phi_x, 1.0).max_abs() == 0.0);
    CHECK(compute_force(ScalarField(g, 2.0), ScalarField(g, 0.4), 1.0).max_abs() == 0.0);

    const VectorField f = compute_force(ScalarField(g, 1.0), phi_x, 1.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) CHECK(f.u(i, j) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(max_interior(f, false) == 0.0);
    CHECK(walls_zero(f));
    const VectorField f3 = compute_force(ScalarField(g, 1.0), phi_x, 3.0);
    CHECK(f3.u(3, 3) == doctest::Approx(-3.0));
}

TEST_CASE("stream-function velocity is discretely solenoidal") {
    const Grid2D g = Grid2D::make(20, 14, 1.0, 0.7);
    const VectorField u = velocity_from_stream(g, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
    CHECK(divergence(u).max_abs() <= 1e-12);
    CHECK(walls_zero(u));
}

TEST_CASE("kinetic energy") {
    const Grid2D g = Grid2D::make(16, 16);
    FlowState s(g);
    CHECK(kinetic_energy(s, 1.0) == 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) s.velocity.u(i, j) = 1.0;
    // (nx-1) ny interior faces, each weighted by hx hy.
    CHECK(kinetic_energy(s, 1.0) == doctest::Approx(0.5 * (1.0 - g.hx())).epsilon(1e-14));
    CHECK(kinetic_energy(s, 2.0) == doctest::Approx(0.25 * (1.0 - g.hx())).epsilon(1e-14));
    const double e = kinetic_energy(s, 1.0);
    for (auto& x : s.velocity.u_data()) x *= 2.0;
    CHECK(kinetic_energy(s, 1.0) == doctest::Approx(4.0 * e).epsilon(1e-14));
}

TEST_CASE("fluid at rest with no force stays at rest") {
    const Grid2D g = Grid2D::make(16, 16);
    FlowSolver fs(g, 1.0);
    const FlowState out = fs.step(FlowState(g), VectorField(g), 0.01);
    CHECK(out.velocity.max_abs() == 0.0);
    CHECK(out.pressure.max_abs() == 0.0);
}

TEST_CASE("gradient forces are absorbed by the pressure") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n : {16, 64}) {
        const Grid2D g = Grid2D::make(n, n);
        ScalarField psi(g);
        for (auto& x : psi.values()) x = u(rng);
        const VectorField grad = discrete_gradient(psi);
        FlowSolver fs(g, 1.0);
        for (double dt : {1e-3, 1e-2}) {
            const FlowState out = fs.step(FlowState(g), grad, dt);
            CHECK(out.velocity.max_abs() <= 1e-12);
            // The pressure recovers psi up to its mean.
            const double mean = psi.integral() / g.area();
            double err = 0.0;
            for (std::size_t k = 0; k < psi.size(); ++k)
                err = std::max(err, std::abs(out.pressure[k] - (psi[k] - mean)));
            CHECK(err <= 1e-9);
        }
    }
    const Grid2D g = Grid2D::make(32, 32);
    const ScalarField smooth = ScalarField::sample(g, [](double x, double y) { return std::exp(x) * std::cos(3 * y); });
    const FlowState out = ns_step(FlowState(g), discrete_gradient(smooth), PhysicalParams{}, 5e-3);
    CHECK(out.velocity.max_abs() <= 1e-12);
}

TEST_CASE("projection yields divergence-free, no-slip fields") {
    const Grid2D g = Grid2D::make(24, 18, 1.2, 0.9);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) f.u(i, j) = u(rng);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.v(i, j) = u(rng);
    FlowSolver fs(g, 0.5);
    FlowState st(g);
    for (int k = 0; k < 5; ++k) {
        st = fs.step(st, f, 1e-3);
        CHECK(divergence(st.velocity).max_abs() <= 1e-10);
        CHECK(walls_zero(st.velocity));
        CHECK(std::abs(st.pressure.integral()) <= 1e-12);
    }
    // Projection is idempotent.
    const VectorField p = fs.project(st.velocity);
    CHECK(max_interior(p, true) == doctest::Approx(max_interior(st.velocity, true)));
}

TEST_CASE("unforced flow loses kinetic energy every step") {
    const Grid2D g = Grid2D::make(32, 32);
    FlowState st = vortex(g, 0.2);
    FlowSolver fs(g, 0.1);
    double prev = kinetic_energy(st, 1.0);
    const double dt = std::min(1e-2, flow_admissible_dt(st.velocity));
    for (int k = 0; k < 100; ++k) {
        const double diss = viscous_dissipation(st.velocity, 0.1, 1.0);
        st = fs.step(st, VectorField(g), dt);
        const double e = kinetic_energy(st, 1.0);
        CHECK(e < prev);
        // Energy identity of backward Euler: the loss is at least dt times
        // the dissipation of the new field, up to the advection error.
        CHECK(prev - e == doctest::Approx(dt * diss).epsilon(0.2));
        prev = e;
    }
}

TEST_CASE("viscous dissipation") {
    const Grid2D g = Grid2D::make(64, 64);
    CHECK(viscous_dissipation(VectorField(g), 1.0, 1.0) == 0.0);
    // psi = sin^2(pi x) sin^2(pi y) satisfies no-slip; the integral of
    // |grad u|^2 + |grad v|^2 is 2 pi^4.
    const VectorField u = velocity_from_stream(g, [](double x, double y) {
        return std::pow(std::sin(pi * x) * std::sin(pi * y), 2);
    });
    CHECK(viscous_dissipation(u, 1.0, 1.0) == doctest::Approx(2 * std::pow(pi, 4)).epsilon(0.01));
    CHECK(viscous_dissipation(u, 3.0, 1.5) == doctest::Approx(2.0 * viscous_dissipation(u, 1.0, 1.0)));
}

TEST_CASE("flow CFL") {
    const Grid2D g = Grid2D::make(16, 16);
    FlowState st = vortex(g, 1.0);
    FlowSolver fs(g, 1.0);
    const double lim = flow_admissible_dt(st.velocity);
    CHECK(lim == doctest::Approx(0.4 * g.hx() / st.velocity.max_abs()));
    CHECK_THROWS_AS(fs.step(st, VectorField(g), 1.5 * lim), StepRejected);
    CHECK_NOTHROW(fs.step(st, VectorField(g), lim));
    CHECK_THROWS_AS(FlowSolver(g, 0.0), ConfigError);
}
