#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "npns/diagnostics.hpp"
#include "npns/error.hpp"
#include "npns/fields.hpp"
#include "npns/flow.hpp"
#include "npns/transport.hpp"

using namespace npns;
using std::numbers::pi;

namespace {

IonSpecies ion(double z, double d = 1.0) {
    IonSpecies s;
    s.name = "s" + std::to_string(static_cast<int>(z));
    s.z = z;
    s.d = d;
    return s;
}

PBProblem masses_problem(const Grid2D& g, double eps, const BoundarySpec& w) {
    PBProblem p;
    p.eps = eps;
    p.w = w;
    p.species = {{1.0, PBDatum::fixed_mass, 1.0}, {-1.0, PBDatum::fixed_mass, 1.0}};
    (void)g;
    return p;
}

SimulationState bumps(const Grid2D& g) {
    SimulationState st(g, 2);
    st.c[0] = ScalarField::sample(g, [](double x, double y) {
        return 0.8 + 0.6 * std::exp(-30 * ((x - 0.3) * (x - 0.3) + (y - 0.6) * (y - 0.6)));
    });
    st.c[1] = ScalarField::sample(g, [](double x, double y) {
        return 0.8 + 0.6 * std::exp(-30 * ((x - 0.7) * (x - 0.7) + (y - 0.4) * (y - 0.4)));
    });
    return st;
}

// Dense -Lap with homogeneous Dirichlet data, assembled from scratch.
Eigen::MatrixXd dense_dirichlet(const Grid2D& g) {
    const int n = g.cells();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    const double ax = 1 / (g.hx() * g.hx()), ay = 1 / (g.hy() * g.hy());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.idx(i, j);
            auto link = [&](int ii, int jj, double c) {
                if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) {
                    a(k, k) += 2 * c;  // ghost -u at the wall
                } else {
                    a(k, k) += c;
                    a(k, g.idx(ii, jj)) -= c;
                }
            };
            link(i - 1, j, ax);
            link(i + 1, j, ax);
            link(i, j - 1, ay);
            link(i, j + 1, ay);
        }
    return a;
}

} // namespace

TEST_CASE("energy vanishes at the reference") {
    const Grid2D g = Grid2D::make(24, 24);
    const BoundarySpec w = BoundarySpec::from_function(g, [](double x, double y) { return x - y; });
    const PhysicalParams pp{0.1, 1.0, 1.0};
    const BoltzmannState ref = solve_pb(masses_problem(g, pp.eps, w));
    SimulationState st(g, 2);
    st.c = ref.c_star;
    st.phi = ref.phi_star;
    const std::vector<IonSpecies> sp{ion(1), ion(-1)};
    const EnergyReport r = compute_energy(st, ref, sp, w, pp);
    for (double e : r.entropies) CHECK(e == 0.0);
    CHECK(std::abs(r.potential_term) <= 1e-20);
    CHECK(r.kinetic == 0.0);
    CHECK(std::abs(r.total_energy) <= 1e-20);
    for (double d : r.dist_l2) CHECK(d == 0.0);
    // log c + z Phi is constant for a Boltzmann state.
    CHECK(r.dissipation <= 1e-20);
}

TEST_CASE("doubling the concentrations") {
    const Grid2D g = Grid2D::make(16, 16);
    const BoundarySpec w(g, 0.4);
    const PhysicalParams pp{0.2, 1.0, 1.0};
    const BoltzmannState ref = solve_pb(masses_problem(g, pp.eps, w));
    SimulationState st(g, 2);
    for (int i = 0; i < 2; ++i) st.c[i] = 2.0 * ref.c_star[i];
    st.phi = ref.phi_star;
    const EnergyReport r = compute_energy(st, ref, {ion(1), ion(-1)}, w, pp);
    for (int i = 0; i < 2; ++i)
        CHECK(r.entropies[i] == doctest::Approx((2 * std::log(2.0) - 1) * ref.c_star[i].integral()).epsilon(1e-13));
}

TEST_CASE("energy matches a direct-sum oracle") {
    const Grid2D g = Grid2D::make(12, 10, 1.0, 0.8);
    const BoundarySpec w = BoundarySpec::from_function(g, [](double x, double y) { return std::sin(3 * x) + y; });
    const PhysicalParams pp{0.3, 0.7, 1.3};
    PBProblem p = masses_problem(g, pp.eps, w);
    p.species[1].value = 0.6;
    const BoltzmannState ref = solve_pb(p);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    SimulationState st(g, 2);
    for (int i = 0; i < 2; ++i) {
        st.c[i] = ref.c_star[i];
        for (auto& x : st.c[i].values()) x *= 1.0 + u(rng);
    }
    st.flow.velocity = velocity_from_stream(g, [](double x, double y) { return 0.1 * std::sin(pi * x) * std::sin(pi * y); });
    const std::vector<IonSpecies> sp{ion(1), ion(-1)};
    const EnergyReport r = compute_energy(st, ref, sp, w, pp);

    // Naive oracle.
    const double a = g.cell_area();
    double ent = 0.0;
    Eigen::VectorXd drho(g.cells());
    for (int k = 0; k < g.cells(); ++k) {
        for (int i = 0; i < 2; ++i) {
            const double c = st.c[i][k], cs = ref.c_star[i][k];
            ent += (c / cs * std::log(c / cs) - c / cs + 1) * cs * a;
        }
        drho[k] = st.c[0][k] - st.c[1][k] - ref.rho_star[k];
    }
    const Eigen::VectorXd psi = (pp.eps * dense_dirichlet(g)).fullPivLu().solve(drho);
    const double pot = 0.5 * drho.dot(psi) * a;
    double kin = 0.0;
    for (double x : st.flow.velocity.u_data()) kin += x * x * a;
    for (double x : st.flow.velocity.v_data()) kin += x * x * a;
    kin /= 2 * pp.kbt;
    CHECK(r.total_energy > 0.0);
    CHECK(r.potential_term > 0.0);
    CHECK(r.total_energy == doctest::Approx(ent + pot + kin).epsilon(1e-12));
    CHECK(r.potential_term == doctest::Approx(pot).epsilon(1e-12));
    CHECK(r.kinetic == doctest::Approx(kin).epsilon(1e-12));
}

TEST_CASE("zero concentrations use 0 log 0 = 0") {
    const Grid2D g = Grid2D::make(6, 6);
    const ScalarField cs(g, 0.5);
    CHECK(relative_entropy(ScalarField(g), cs) == doctest::Approx(0.5));
    CHECK(relative_entropy(ScalarField(g, 1e-320), cs) == doctest::Approx(0.5));
    CHECK(std::isfinite(relative_entropy(ScalarField(g, 1e-310), cs)));
}

TEST_CASE("dissipation of a neutral sinusoid matches 1D quadrature") {
    // Integral of |c'|^2 / c for c = 1 + 0.1 sin(pi x) by composite Simpson.
    const int m = 200000;
    double oracle = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double x = static_cast<double>(k) / m;
        const double d = 0.1 * pi * std::cos(pi * x);
        const double f = d * d / (1 + 0.1 * std::sin(pi * x));
        oracle += f * (k == 0 || k == m ? 1 : (k % 2 ? 4 : 2));
    }
    oracle /= 3.0 * m;
    const Grid2D g = Grid2D::make(128, 8);
    SimulationState st(g, 1);
    st.c[0] = ScalarField::sample(g, [](double x, double) { return 1 + 0.1 * std::sin(pi * x); });
    const double d = compute_dissipation(st, {ion(0)}, BoundarySpec(g));
    MESSAGE("dissipation " << d << " oracle " << oracle);
    CHECK(std::abs(d - oracle) <= 1e-4 * oracle);
    CHECK(compute_dissipation(st, {ion(0, 2.5)}, BoundarySpec(g)) == doctest::Approx(2.5 * d));
}

TEST_CASE("dissipation is homogeneous in c at fixed potential") {
    const Grid2D g = Grid2D::make(20, 20);
    SimulationState st = bumps(g);
    st.phi = ScalarField::sample(g, [](double x, double y) { return std::cos(2 * x) * y; });
    const BoundarySpec w(g, 0.1);
    const std::vector<IonSpecies> sp{ion(1), ion(-1)};
    const double d0 = compute_dissipation(st, sp, w);
    CHECK(d0 > 0.0);
    EnergyEvaluator ev(g, sp, w, PhysicalParams{});
    const auto per = ev.dissipation_per_species(st);
    st.c[0] *= 3.0;
    const auto per3 = ev.dissipation_per_species(st);
    CHECK(per3[0] == doctest::Approx(3.0 * per[0]).epsilon(1e-12));
    CHECK(per3[1] == per[1]);
}

TEST_CASE("modified energy without a boundary potential or charge") {
    const Grid2D g = Grid2D::make(12, 12);
    const BoundarySpec w(g, 0.0);
    const PhysicalParams pp{0.2, 1.0, 1.0};
    const BoltzmannState ref = solve_pb(masses_problem(g, pp.eps, w));
    SimulationState st = bumps(g);
    const std::vector<IonSpecies> sp{ion(1), ion(-1)};
    const EnergyReport r = compute_energy(st, ref, sp, w, pp);
    CHECK(r.modified_energy == doctest::Approx(r.total_energy).epsilon(1e-14));
    const ScalarField wt = ScalarField::sample(g, [](double x, double) { return x; });
    CHECK(compute_modified_energy(st, ref, ScalarField(g), sp, pp) == doctest::Approx(r.total_energy).epsilon(1e-13));
    st.c[1] = st.c[0];
    const double e = compute_energy(st, ref, sp, w, pp).total_energy;
    CHECK(compute_modified_energy(st, ref, wt, sp, pp) == doctest::Approx(e).epsilon(1e-13));
}

TEST_CASE("decay check on synthetic histories") {
    std::vector<EnergyReport> h(10);
    for (int k = 0; k < 10; ++k) {
        h[k].t = 0.1 * k;
        h[k].total_energy = std::exp(-h[k].t);
        h[k].dissipation = std::exp(-h[k].t);
    }
    DecayReport r = check_decay(h);
    CHECK(r.ok());
    CHECK(r.rate_consistent);
    CHECK(r.rate_samples == 9);
    h[6].total_energy = h[5].total_energy + 1e-3;
    r = check_decay(h);
    CHECK_FALSE(r.ok());
    CHECK(r.first_violation == 6);
    h[6].total_energy = h[5].total_energy + 1e-10;
    CHECK(check_decay(h).ok());
}

TEST_CASE("reference invariance over a blocking run") {
    const Grid2D g = Grid2D::make(16, 16);
    const BoundarySpec w = BoundarySpec::from_function(g, [](double x, double) { return 0.5 * x; });
    const PhysicalParams pp{0.1, 1.0, 1.0};
    const std::vector<IonSpecies> sp{ion(1), ion(-1)};
    SimulationState st = bumps(g);
    st.flow.velocity = velocity_from_stream(g, [](double x, double y) {
        return 0.02 * std::pow(std::sin(pi * x) * std::sin(pi * y), 2);
    });
    PBProblem pa = masses_problem(g, pp.eps, w);
    pa.species[0].value = st.c[0].integral();
    pa.species[1].value = st.c[1].integral();
    const BoltzmannState ra = solve_pb(pa);
    PBProblem pb = pa;
    for (int i = 0; i < 2; ++i) pb.species[i] = {sp[i].z, PBDatum::fixed_z, 2.0 * ra.z_const[i]};
    const BoltzmannState rb = solve_pb(pb);

    EnergyEvaluator ev(g, sp, w, pp);
    PoissonSolver ps(g, pp.eps);
    Transport tr(g, sp, w);
    FlowSolver fs(g, pp.nu);
    std::vector<SimulationState> hist;
    const double dt = 2e-3;
    for (int k = 0; k < 30; ++k) {
        st.phi = ps.solve(compute_charge_density(st.c, sp), w);
        hist.push_back(st);
        const VectorField f = compute_force(compute_charge_density(st.c, sp), st.phi, pp.kbt);
        auto c = tr.step(st, dt);
        st.flow = fs.step(st.flow, f, dt);
        st.c = std::move(c);
        st.t += dt;
    }
    CHECK(reference_invariance_check(hist, ra, ra, ev).max_drift == 0.0);
    const InvarianceReport r = reference_invariance_check(hist, ra, rb, ev);
    CHECK(r.ok);
    MESSAGE("drift " << r.max_drift << " difference " << r.initial_difference);
    const ScalarField phi_w = harmonic_extension(w, g);
    std::vector<double> masses{hist[0].c[0].integral(), hist[0].c[1].integral()};
    CHECK(r.initial_difference == doctest::Approx(predicted_energy_difference(masses, ra, rb, phi_w)).epsilon(1e-8));

    hist[17].c[0] *= 1.001;
    CHECK_FALSE(reference_invariance_check(hist, ra, rb, ev).ok);
}

TEST_CASE("inadmissible reference pair") {
    const Grid2D g = Grid2D::make(8, 8);
    IonSpecies sel = ion(1);
    sel.regime = Regime::selective;
    sel.gamma = 1.0;
    sel.segments = {{Edge::bottom, 0.0, 1.0}};
    BoltzmannState a, b;
    a.z_const = {1.0, 1.0};
    b.z_const = {2.0, 1.0};
    CHECK_THROWS_AS(require_admissible_pair(a, b, {sel, ion(-1)}), ConfigError);
    CHECK_NOTHROW(require_admissible_pair(a, b, {ion(1), ion(-1)}));
    b.z_const = {1.0, 3.0};
    CHECK_NOTHROW(require_admissible_pair(a, b, {sel, ion(-1)}));
}

TEST_CASE("gronwall envelope") {
    std::vector<double> t, f;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(0.01 * k);
        f.push_back((2.0 + 0.5) * std::exp(0.5 * t.back()) - 0.5);
    }
    GronwallReport r = check_gronwall(t, f);
    CHECK(r.ok);
    CHECK(r.c == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.fit_samples == 11);
    // Decreasing functional: C = 0 suffices.
    for (int k = 0; k <= 100; ++k) f[k] = 1.0 + std::exp(-t[k]);
    r = check_gronwall(t, f);
    CHECK(r.ok);
    CHECK(r.c == 0.0);
    f[60] = 10.0;
    r = check_gronwall(t, f);
    CHECK_FALSE(r.ok);
    CHECK(r.first_violation == 60);
}

TEST_CASE("convergence monitor") {
    ConvergenceMonitor m;
    for (int k = 0; k <= 40; ++k) {
        EnergyReport r;
        r.t = 0.1 * k;
        r.total_energy = std::exp(-r.t);
        r.grad_tilde_l2 = {std::exp(-2 * r.t), 0.0};
        r.dist_l2 = {0.0, 0.0};
        m.record(r, {1.0, 1.0});
    }
    CHECK(m.times().size() == 41);
    CHECK(m.increments()[0] == 0.0);
    CHECK(m.increments()[5] < 0.0);
    // Average of e^{-2t} over [3, 4].
    const double expect = (std::exp(-6.0) - std::exp(-8.0)) / 2.0;
    CHECK(m.final_quarter_gradient_ratio() == doctest::Approx(expect).epsilon(1e-2));
}
