#pragma once

#include "npns/boundary.hpp"
#include "npns/grid.hpp"
#include "npns/linalg.hpp"

namespace npns {

/// -eps Lap Phi = rho in the rectangle, Phi = W on the boundary.
struct PoissonProblem {
    double eps = 1.0;
    ScalarField rho;
    BoundarySpec w;
};

/// Relative residual accepted by the post-solve check,
/// ||eps Lap_h Phi + rho||_inf <= tol * (1 + ||rho||_inf).
inline constexpr double poisson_residual_tol = 1e-8;

/// Dirichlet Poisson solver that factors the five-point operator once per
/// grid and reuses it for every right-hand side.
class PoissonSolver {
public:
    PoissonSolver(const Grid2D& g, double eps);

    ScalarField solve(const ScalarField& rho, const BoundarySpec& w) const;
    /// Homogeneous Dirichlet data.
    ScalarField solve_homogeneous(const ScalarField& rho) const;

    const Grid2D& grid() const noexcept { return grid_; }
    double eps() const noexcept { return eps_; }
    /// eps * K, the assembled SPD operator.
    const SparseMatrix& matrix() const { return solver_.matrix(); }

private:
    Grid2D grid_;
    double eps_;
    FaceMask all_;
    SpdSolver solver_;
};

/// sup-norm of eps Lap_h Phi + rho with Dirichlet data W.
double poisson_residual(const ScalarField& phi, const ScalarField& rho, const BoundarySpec& w,
                        double eps);

ScalarField solve_poisson(const PoissonProblem& p);

} // namespace npns
