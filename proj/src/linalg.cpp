#include "npns/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <vector>

#include "npns/error.hpp"

namespace npns {

FaceMask all_faces(const Grid2D& g) {
    FaceMask m(g);
    for (Edge e : all_edges)
        for (int k = 0; k < edge_faces(g, e); ++k) m.set(e, k);
    return m;
}

SparseMatrix assemble_cell_laplacian(const Grid2D& g, const FaceMask& dirichlet) {
    const double ax = 1.0 / (g.hx() * g.hx());
    const double ay = 1.0 / (g.hy() * g.hy());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(5 * g.cells());
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.idx(i, j);
            double diag = 0.0;
            auto link = [&](int ni, int nj, double a) {
                t.emplace_back(k, g.idx(ni, nj), -a);
                diag += a;
            };
            if (i > 0) link(i - 1, j, ax);
            else if (dirichlet(Edge::left, j)) diag += 2.0 * ax;
            if (i < g.nx - 1) link(i + 1, j, ax);
            else if (dirichlet(Edge::right, j)) diag += 2.0 * ax;
            if (j > 0) link(i, j - 1, ay);
            else if (dirichlet(Edge::bottom, i)) diag += 2.0 * ay;
            if (j < g.ny - 1) link(i, j + 1, ay);
            else if (dirichlet(Edge::top, i)) diag += 2.0 * ay;
            t.emplace_back(k, k, diag);
        }
    }
    SparseMatrix a(g.cells(), g.cells());
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

Vec dirichlet_source(const Grid2D& g, const FaceMask& dirichlet, const BoundarySpec& values) {
    Vec b = Vec::Zero(g.cells());
    for (Edge e : all_edges) {
        const double h = (e == Edge::bottom || e == Edge::top) ? g.hy() : g.hx();
        for (int k = 0; k < edge_faces(g, e); ++k)
            if (dirichlet(e, k)) b[edge_cell(g, e, k)] += 2.0 * values.w(e, k) / (h * h);
    }
    return b;
}

ScalarField apply_neg_laplacian(const ScalarField& u, const BoundarySpec& values) {
    const Grid2D& g = u.grid();
    const double ax = 1.0 / (g.hx() * g.hx());
    const double ay = 1.0 / (g.hy() * g.hy());
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = u(i, j);
            const double l = i > 0 ? u(i - 1, j) : 2.0 * values.w(Edge::left, j) - c;
            const double r = i < g.nx - 1 ? u(i + 1, j) : 2.0 * values.w(Edge::right, j) - c;
            const double b = j > 0 ? u(i, j - 1) : 2.0 * values.w(Edge::bottom, i) - c;
            const double tp = j < g.ny - 1 ? u(i, j + 1) : 2.0 * values.w(Edge::top, i) - c;
            out(i, j) = ax * (2.0 * c - l - r) + ay * (2.0 * c - b - tp);
        }
    }
    return out;
}

CgResult conjugate_gradient(const SparseMatrix& a, const Vec& b, Vec& x, double rel_tol,
                            int max_iters) {
    const Eigen::Index n = b.size();
    if (max_iters < 0) max_iters = static_cast<int>(10 * n + 100);
    if (x.size() != n) x = Vec::Zero(n);
    const Vec dinv = a.diagonal().cwiseInverse();
    const double bnorm = b.norm();
    CgResult res;
    if (bnorm == 0.0) {
        x.setZero();
        res.converged = true;
        return res;
    }
    Vec r = b - a * x;
    Vec z = dinv.cwiseProduct(r);
    Vec p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iters; ++it) {
        res.relative_residual = r.norm() / bnorm;
        if (res.relative_residual <= rel_tol) {
            res.iterations = it;
            res.converged = true;
            return res;
        }
        const Vec ap = a * p;
        const double alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        z = dinv.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    res.iterations = max_iters;
    res.relative_residual = r.norm() / bnorm;
    res.converged = res.relative_residual <= rel_tol;
    return res;
}

struct SpdSolver::Factor {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

SpdSolver::SpdSolver(SparseMatrix a, double cg_tol) : a_(std::move(a)), cg_tol_(cg_tol) {
    direct_ = a_.rows() <= direct_limit;
    if (direct_) {
        auto f = std::make_shared<Factor>();
        f->ldlt.compute(a_);
        if (f->ldlt.info() != Eigen::Success)
            throw SolverError("sparse LDL^T factorization failed (matrix not SPD?)", NAN);
        factor_ = std::move(f);
    }
}

Vec SpdSolver::solve(const Vec& b) const {
    if (direct_) {
        Vec x = factor_->ldlt.solve(b);
        if (factor_->ldlt.info() != Eigen::Success) throw SolverError("LDL^T solve failed", NAN);
        return x;
    }
    Vec x = Vec::Zero(b.size());
    const CgResult r = conjugate_gradient(a_, b, x, cg_tol_);
    if (!r.converged)
        throw SolverError("conjugate gradients did not converge in " +
                              std::to_string(r.iterations) + " iterations",
                          r.relative_residual);
    return x;
}

Vec to_vec(const ScalarField& f) {
    return Eigen::Map<const Vec>(f.data().data(), static_cast<Eigen::Index>(f.size()));
}

ScalarField to_field(const Grid2D& g, const Vec& v) {
    return ScalarField(g, std::vector<double>(v.data(), v.data() + v.size()));
}

} // namespace npns
