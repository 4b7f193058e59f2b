#include "npns/poisson.hpp"

#include <cmath>

#include "npns/error.hpp"

namespace npns {

PoissonSolver::PoissonSolver(const Grid2D& g, double eps)
    : grid_(g), eps_(eps), all_(all_faces(g)) {
    if (!(eps > 0.0)) throw ConfigError("Poisson solve needs eps > 0");
    solver_ = SpdSolver(eps * assemble_cell_laplacian(g, all_));
}

ScalarField PoissonSolver::solve(const ScalarField& rho, const BoundarySpec& w) const {
    require_same_grid(grid_, rho.grid(), "Poisson right-hand side");
    require_same_grid(grid_, w.grid(), "Poisson boundary data");
    const Vec b = to_vec(rho) + eps_ * dirichlet_source(grid_, all_, w);
    ScalarField phi = to_field(grid_, solver_.solve(b));
    const double res = poisson_residual(phi, rho, w, eps_);
    if (!(res <= poisson_residual_tol * (1.0 + rho.max_abs())))
        throw SolverError("Poisson solve residual too large", res);
    return phi;
}

ScalarField PoissonSolver::solve_homogeneous(const ScalarField& rho) const {
    return solve(rho, BoundarySpec(grid_, 0.0));
}

double poisson_residual(const ScalarField& phi, const ScalarField& rho, const BoundarySpec& w,
                        double eps) {
    const ScalarField k = apply_neg_laplacian(phi, w);
    double m = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) m = std::max(m, std::abs(rho[i] - eps * k[i]));
    return m;
}

ScalarField solve_poisson(const PoissonProblem& p) {
    if (!p.rho.all_finite() || !p.w.all_finite())
        throw ConfigError("Poisson problem has non-finite data");
    return PoissonSolver(p.rho.grid(), p.eps).solve(p.rho, p.w);
}

} // namespace npns
