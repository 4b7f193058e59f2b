#include "npns/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "npns/error.hpp"

namespace npns {

namespace {

using Triplet = Eigen::Triplet<double>;

// -Lap on the interior faces of one velocity component. Along its own
// direction the neighbors at the walls are zero; across, the wall is
// halfway between the last face and a ghost carrying -u. Unknown (a, b) has
// index b * (m - 1) + (a - 1), a = 1..m-1 along, b = 0..n-1 across.
SparseMatrix face_laplacian(int m, int n, double h_along, double h_across) {
    const int rows = (m - 1) * n;
    const double ca = 1.0 / (h_along * h_along), cc = 1.0 / (h_across * h_across);
    std::vector<Triplet> t;
    t.reserve(5 * rows);
    auto id = [&](int a, int b) { return b * (m - 1) + (a - 1); };
    for (int b = 0; b < n; ++b)
        for (int a = 1; a < m; ++a) {
            const int k = id(a, b);
            double diag = 2.0 * ca;
            if (a > 1) t.emplace_back(k, id(a - 1, b), -ca);
            if (a < m - 1) t.emplace_back(k, id(a + 1, b), -ca);
            if (b > 0) {
                t.emplace_back(k, id(a, b - 1), -cc);
                diag += cc;
            } else {
                diag += 2.0 * cc;
            }
            if (b < n - 1) {
                t.emplace_back(k, id(a, b + 1), -cc);
                diag += cc;
            } else {
                diag += 2.0 * cc;
            }
            t.emplace_back(k, k, diag);
        }
    SparseMatrix a(rows, rows);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

Vec gather_u(const VectorField& f) {
    const Grid2D& g = f.grid();
    Vec x((g.nx - 1) * g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) x[j * (g.nx - 1) + i - 1] = f.u(i, j);
    return x;
}

// y-faces are ordered with y as the "along" direction.
Vec gather_v(const VectorField& f) {
    const Grid2D& g = f.grid();
    Vec x((g.ny - 1) * g.nx);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) x[i * (g.ny - 1) + j - 1] = f.v(i, j);
    return x;
}

void scatter(VectorField& f, const Vec& xu, const Vec& xv) {
    const Grid2D& g = f.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) f.u(i, j) = xu[j * (g.nx - 1) + i - 1];
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) f.v(i, j) = xv[i * (g.ny - 1) + j - 1];
}

// Centered divergence-form advection div(u (x) u) on interior faces.
VectorField advection(const VectorField& u) {
    const Grid2D& g = u.grid();
    const double hx = g.hx(), hy = g.hy();
    VectorField a(g);
    // u at node (i, j), zero on the walls.
    auto u_node = [&](int i, int j) {
        if (j == 0 || j == g.ny) return 0.0;
        return 0.5 * (u.u(i, j - 1) + u.u(i, j));
    };
    auto v_node = [&](int i, int j) {
        if (i == 0 || i == g.nx) return 0.0;
        return 0.5 * (u.v(i - 1, j) + u.v(i, j));
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double ue = 0.5 * (u.u(i, j) + u.u(i + 1, j));
            const double uw = 0.5 * (u.u(i - 1, j) + u.u(i, j));
            const double fn = u_node(i, j + 1) * v_node(i, j + 1);
            const double fs = u_node(i, j) * v_node(i, j);
            a.u(i, j) = (ue * ue - uw * uw) / hx + (fn - fs) / hy;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double vn = 0.5 * (u.v(i, j) + u.v(i, j + 1));
            const double vs = 0.5 * (u.v(i, j - 1) + u.v(i, j));
            const double fe = u_node(i + 1, j) * v_node(i + 1, j);
            const double fw = u_node(i, j) * v_node(i, j);
            a.v(i, j) = (vn * vn - vs * vs) / hy + (fe - fw) / hx;
        }
    return a;
}

SparseMatrix shifted(const SparseMatrix& lap, double s) {
    SparseMatrix a = s * lap;
    for (int k = 0; k < a.rows(); ++k) a.coeffRef(k, k) += 1.0;
    return a;
}

} // namespace

VectorField compute_force(const ScalarField& rho, const ScalarField& phi, double kbt) {
    require_same_grid(rho.grid(), phi.grid(), "compute_force");
    const Grid2D& g = rho.grid();
    VectorField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            f.u(i, j) = -kbt * 0.5 * (rho(i - 1, j) + rho(i, j)) * (phi(i, j) - phi(i - 1, j)) / g.hx();
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.v(i, j) = -kbt * 0.5 * (rho(i, j - 1) + rho(i, j)) * (phi(i, j) - phi(i, j - 1)) / g.hy();
    return f;
}

VectorField discrete_gradient(const ScalarField& psi) {
    const Grid2D& g = psi.grid();
    VectorField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) f.u(i, j) = (psi(i, j) - psi(i - 1, j)) / g.hx();
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.v(i, j) = (psi(i, j) - psi(i, j - 1)) / g.hy();
    return f;
}

VectorField velocity_from_stream(const Grid2D& g,
                                 const std::function<double(double, double)>& psi) {
    auto node = [&](int i, int j) {
        if (i == 0 || j == 0 || i == g.nx || j == g.ny) return 0.0;
        return psi(i * g.hx(), j * g.hy());
    };
    VectorField u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) u.u(i, j) = (node(i, j + 1) - node(i, j)) / g.hy();
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u.v(i, j) = -(node(i + 1, j) - node(i, j)) / g.hx();
    return u;
}

double kinetic_energy(const VectorField& u, double kbt) {
    double s = 0.0;
    for (double x : u.u_data()) s += x * x;
    for (double x : u.v_data()) s += x * x;
    return 0.5 / kbt * s * u.grid().cell_area();
}

double kinetic_energy(const FlowState& flow, double kbt) {
    return kinetic_energy(flow.velocity, kbt);
}

double viscous_dissipation(const VectorField& u, double nu, double kbt) {
    const Grid2D& g = u.grid();
    const Vec xu = gather_u(u), xv = gather_v(u);
    const SparseMatrix lu = face_laplacian(g.nx, g.ny, g.hx(), g.hy());
    const SparseMatrix lv = face_laplacian(g.ny, g.nx, g.hy(), g.hx());
    const double q = xu.dot(lu * xu) + xv.dot(lv * xv);
    return nu / kbt * q * g.cell_area();
}

double flow_admissible_dt(const VectorField& u, double safety) {
    const Grid2D& g = u.grid();
    const double m = u.max_abs();
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return safety * std::min(g.hx(), g.hy()) / m;
}

FlowSolver::FlowSolver(const Grid2D& g, double nu) : grid_(g), nu_(nu) {
    if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
    lap_u_ = face_laplacian(g.nx, g.ny, g.hx(), g.hy());
    lap_v_ = face_laplacian(g.ny, g.nx, g.hy(), g.hx());
    // Neumann Laplacian is singular on constants; pin cell 0 by dropping it.
    const SparseMatrix k = assemble_cell_laplacian(g, FaceMask(g));
    const int n = g.cells() - 1;
    SparseMatrix reduced = k.bottomRightCorner(n, n);
    reduced.makeCompressed();
    pressure_ = SpdSolver(std::move(reduced), 1e-13);
}

void FlowSolver::prepare(double dt) {
    if (dt == dt_) return;
    visc_u_ = SpdSolver(shifted(lap_u_, dt * nu_));
    visc_v_ = SpdSolver(shifted(lap_v_, dt * nu_));
    dt_ = dt;
}

VectorField FlowSolver::project(const VectorField& u, ScalarField* q) const {
    require_same_grid(grid_, u.grid(), "projection");
    const ScalarField div = divergence(u);
    const int n = grid_.cells() - 1;
    Vec rhs(n);
    // K q = -div u; K = -div grad on zero-flux cells.
    for (int k = 0; k < n; ++k) rhs[k] = -div[k + 1];
    const Vec sol = pressure_.solve(rhs);
    ScalarField qf(grid_);
    for (int k = 0; k < n; ++k) qf[k + 1] = sol[k];
    const double mean = qf.integral() / grid_.area();
    for (auto& x : qf.values()) x -= mean;
    const VectorField gq = discrete_gradient(qf);
    VectorField out = u;
    for (std::size_t k = 0; k < out.u_data().size(); ++k) out.u_data()[k] -= gq.u_data()[k];
    for (std::size_t k = 0; k < out.v_data().size(); ++k) out.v_data()[k] -= gq.v_data()[k];
    if (q) *q = std::move(qf);
    return out;
}

FlowState FlowSolver::step(const FlowState& flow, const VectorField& force, double dt,
                           double safety) {
    require_same_grid(grid_, flow.velocity.grid(), "flow step");
    require_same_grid(grid_, force.grid(), "flow force");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("flow step needs dt > 0");
    const double limit = flow_admissible_dt(flow.velocity, safety);
    if (dt > limit) {
        std::ostringstream os;
        os << "flow CFL violated: dt = " << dt << " exceeds admissible " << limit;
        throw StepRejected(os.str(), limit);
    }
    prepare(dt);
    const VectorField adv = advection(flow.velocity);
    Vec ru = gather_u(flow.velocity) - dt * gather_u(adv);
    Vec rv = gather_v(flow.velocity) - dt * gather_v(adv);
    // Force enters after the viscous solve so that gradient forces are
    // removed exactly by the projection.
    const Vec xu = visc_u_.solve(ru) + dt * gather_u(force);
    const Vec xv = visc_v_.solve(rv) + dt * gather_v(force);
    VectorField star(grid_);
    scatter(star, xu, xv);
    FlowState out(grid_);
    ScalarField q;
    out.velocity = project(star, &q);
    out.pressure = (1.0 / dt) * q;
    if (!out.velocity.all_finite()) throw SolverError("flow step produced non-finite velocity", 0.0);
    return out;
}

FlowState ns_step(const FlowState& flow, const VectorField& force, const PhysicalParams& params,
                  double dt) {
    FlowSolver s(flow.velocity.grid(), params.nu);
    return s.step(flow, force, dt);
}

} // namespace npns
