#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <optional>

#include "npns/boundary.hpp"
#include "npns/grid.hpp"

namespace npns {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Five-point operator K = -Laplacian on cell centers. Boundary faces flagged
/// in `dirichlet` use the ghost value 2g - u (face value g); the others are
/// zero-flux. The Dirichlet data enters through dirichlet_source().
SparseMatrix assemble_cell_laplacian(const Grid2D& g, const FaceMask& dirichlet);

/// Right-hand-side contribution 2g/h^2 of Dirichlet faces, so that
/// -Lap_h u = K u - source.
Vec dirichlet_source(const Grid2D& g, const FaceMask& dirichlet, const BoundarySpec& values);

/// Matrix-free -Lap_h u with Dirichlet ghost values taken from `values` on
/// every boundary face.
ScalarField apply_neg_laplacian(const ScalarField& u, const BoundarySpec& values);

FaceMask all_faces(const Grid2D& g);

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for SPD A. Starts from x.
CgResult conjugate_gradient(const SparseMatrix& a, const Vec& b, Vec& x, double rel_tol = 1e-10,
                            int max_iters = -1);

/// Factor-once SPD solver: sparse LDL^T up to `direct_limit` unknowns,
/// conjugate gradients above it.
class SpdSolver {
public:
    static constexpr int direct_limit = 128 * 128;

    SpdSolver() = default;
    explicit SpdSolver(SparseMatrix a, double cg_tol = 1e-10);

    /// Throws SolverError when the factorization or the iteration fails.
    Vec solve(const Vec& b) const;
    const SparseMatrix& matrix() const { return a_; }
    bool direct() const noexcept { return direct_; }
    int rows() const { return static_cast<int>(a_.rows()); }

private:
    struct Factor;
    SparseMatrix a_;
    std::shared_ptr<const Factor> factor_;
    bool direct_ = true;
    double cg_tol_ = 1e-10;
};

Vec to_vec(const ScalarField& f);
ScalarField to_field(const Grid2D& g, const Vec& v);

} // namespace npns
