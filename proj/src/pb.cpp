#include "npns/pb.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "npns/error.hpp"
#include "npns/fields.hpp"
#include "npns/linalg.hpp"
#include "npns/poisson.hpp"

namespace npns {

namespace {

// e^{-z Phi} / int e^{-z Phi}, with the maximum exponent subtracted first.
// Also returns log int e^{-z Phi}.
ScalarField normalized_weight(const ScalarField& phi, double z, double* log_integral) {
    const Grid2D& g = phi.grid();
    double m = -std::numeric_limits<double>::infinity();
    for (double x : phi.values()) m = std::max(m, -z * x);
    ScalarField p(g);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = std::exp(-z * phi[k] - m);
        s += p[k];
    }
    s *= g.cell_area();
    for (auto& x : p.values()) x /= s;
    if (log_integral) *log_integral = m + std::log(s);
    return p;
}

void guard_all(const ScalarField& phi, const PBProblem& prob, const char* what) {
    for (const auto& s : prob.species) check_exponent(phi, s.z, what);
}

// rho*(Phi) and the diagonal d = -d rho*/d Phi of the local part.
void local_terms(const ScalarField& phi, const PBProblem& prob, ScalarField& rho,
                 ScalarField& diag, std::vector<ScalarField>* weights) {
    const Grid2D& g = phi.grid();
    rho = ScalarField(g);
    diag = ScalarField(g);
    if (weights) weights->clear();
    for (const auto& s : prob.species) {
        if (s.datum == PBDatum::fixed_z) {
            for (std::size_t k = 0; k < rho.size(); ++k) {
                const double e = std::exp(-s.z * phi[k]) / s.value;
                rho[k] += s.z * e;
                diag[k] += s.z * s.z * e;
            }
        } else {
            ScalarField p = normalized_weight(phi, s.z, nullptr);
            for (std::size_t k = 0; k < rho.size(); ++k) {
                rho[k] += s.z * s.value * p[k];
                diag[k] += s.z * s.z * s.value * p[k];
            }
            if (weights) weights->push_back(std::move(p));
        }
    }
}

double sup(const ScalarField& f) { return f.max_abs(); }

} // namespace

void PBProblem::validate() const {
    if (!(eps > 0.0)) throw ConfigError("PB problem needs eps > 0");
    if (!w.all_finite()) throw ConfigError("PB boundary data must be finite");
    for (const auto& s : species) {
        if (!std::isfinite(s.z)) throw ConfigError("PB species valence must be finite");
        if (!(s.value > 0.0) || !std::isfinite(s.value))
            throw ConfigError("PB species needs a positive Z_i or I_i^0");
    }
}

double pb_energy(const ScalarField& phi, const PBProblem& prob) {
    const Grid2D& g = phi.grid();
    require_same_grid(g, prob.grid(), "PB energy");
    guard_all(phi, prob, "PB energy");
    const double rx = g.hy() / g.hx(), ry = g.hx() / g.hy();
    double grad = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double d = phi(i + 1, j) - phi(i, j);
            grad += rx * d * d;
        }
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d = phi(i, j + 1) - phi(i, j);
            grad += ry * d * d;
        }
    // Boundary faces: face value W at half spacing, so each carries twice the weight.
    for (Edge e : all_edges) {
        const double r = (e == Edge::bottom || e == Edge::top) ? ry : rx;
        for (int k = 0; k < edge_faces(g, e); ++k) {
            const double d = prob.w.w(e, k) - phi[edge_cell(g, e, k)];
            grad += 2.0 * r * d * d;
        }
    }
    double energy = 0.5 * prob.eps * grad;
    for (const auto& s : prob.species) {
        if (s.datum == PBDatum::fixed_z) {
            double sum = 0.0;
            for (double x : phi.values()) sum += std::exp(-s.z * x);
            energy += sum * g.cell_area() / s.value;
        } else {
            double log_int = 0.0;
            normalized_weight(phi, s.z, &log_int);
            energy += s.value * log_int;
        }
    }
    return energy;
}

ScalarField pb_residual(const ScalarField& phi, const PBProblem& prob) {
    require_same_grid(phi.grid(), prob.grid(), "PB residual");
    guard_all(phi, prob, "PB residual");
    ScalarField rho, diag;
    local_terms(phi, prob, rho, diag, nullptr);
    ScalarField r = apply_neg_laplacian(phi, prob.w);
    r *= prob.eps;
    r -= rho;
    return r;
}

ScalarField apply_L_phi(const ScalarField& phi, const ScalarField& psi, const PBProblem& prob) {
    const Grid2D& g = phi.grid();
    require_same_grid(g, psi.grid(), "L_phi");
    require_same_grid(g, prob.grid(), "L_phi");
    guard_all(phi, prob, "L_phi");
    ScalarField out = apply_neg_laplacian(psi, BoundarySpec(g, 0.0));
    out *= prob.eps;
    for (const auto& s : prob.species) {
        if (s.datum == PBDatum::fixed_z) {
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] += s.z * s.z / s.value * std::exp(-s.z * phi[k]) * psi[k];
        } else {
            const ScalarField p = normalized_weight(phi, s.z, nullptr);
            double proj = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) proj += psi[k] * p[k];
            proj *= g.cell_area();
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] += s.z * s.z * s.value * (psi[k] - proj) * p[k];
        }
    }
    return out;
}

BoltzmannState boltzmann_from_phi(const ScalarField& phi, const PBProblem& prob) {
    const Grid2D& g = phi.grid();
    guard_all(phi, prob, "Boltzmann state");
    BoltzmannState b;
    b.phi_star = phi;
    b.rho_star = ScalarField(g);
    for (const auto& s : prob.species) {
        double zc = s.value;
        if (s.datum == PBDatum::fixed_mass) {
            double sum = 0.0;
            for (double x : phi.values()) sum += std::exp(-s.z * x);
            zc = sum * g.cell_area() / s.value;
        }
        ScalarField c(g);
        for (std::size_t k = 0; k < c.size(); ++k) {
            c[k] = std::exp(-s.z * phi[k]) / zc;
            b.rho_star[k] += s.z * c[k];
        }
        b.z_const.push_back(zc);
        b.c_star.push_back(std::move(c));
    }
    return b;
}

namespace {

// Solves L_phi delta = rhs using the sparse part plus a Woodbury correction
// for the rank-one nonlocal terms.
Vec newton_direction(const ScalarField& phi, const PBProblem& prob, const SparseMatrix& eps_k,
                     const Vec& rhs) {
    const Grid2D& g = phi.grid();
    ScalarField rho, diag;
    std::vector<ScalarField> weights;
    local_terms(phi, prob, rho, diag, &weights);

    SparseMatrix a = eps_k;
    for (int k = 0; k < g.cells(); ++k) a.coeffRef(k, k) += diag[k];
    const SpdSolver solver(std::move(a));

    const Vec y = solver.solve(rhs);
    if (weights.empty()) return y;

    const int m = static_cast<int>(weights.size());
    Eigen::MatrixXd u(g.cells(), m), au(g.cells(), m);
    int col = 0;
    for (const auto& s : prob.species) {
        if (s.datum != PBDatum::fixed_mass) continue;
        const double scale = std::sqrt(s.z * s.z * s.value * g.cell_area());
        u.col(col) = scale * to_vec(weights[col]);
        au.col(col) = solver.solve(u.col(col));
        ++col;
    }
    const Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(m, m) - u.transpose() * au;
    const Eigen::VectorXd corr = cap.ldlt().solve(u.transpose() * y);
    return y + au * corr;
}

struct Trial {
    ScalarField phi;
    double energy;
    double residual;
};

std::optional<Trial> evaluate(const ScalarField& phi, const PBProblem& prob) {
    try {
        const double e = pb_energy(phi, prob);
        const double r = sup(pb_residual(phi, prob));
        if (!std::isfinite(e) || !std::isfinite(r)) return std::nullopt;
        return Trial{phi, e, r};
    } catch (const OverflowError&) {
        return std::nullopt;
    }
}

ScalarField step(const ScalarField& phi, const Vec& dir, double t) {
    ScalarField out = phi;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += t * dir[static_cast<Eigen::Index>(k)];
    return out;
}

// Backtracking on the energy; accepts any decrease, or an energy change at
// roundoff level accompanied by a smaller residual.
std::optional<Trial> line_search(const Trial& cur, const Vec& dir, const PBProblem& prob,
                                 double shrink) {
    double t = 1.0;
    const double flat = 1e-13 * (1.0 + std::abs(cur.energy));
    for (int k = 0; k < 60; ++k, t *= shrink) {
        auto trial = evaluate(step(cur.phi, dir, t), prob);
        if (!trial) continue;
        if (trial->energy < cur.energy) return trial;
        if (trial->energy - cur.energy <= flat && trial->residual < cur.residual) return trial;
    }
    return std::nullopt;
}

} // namespace

BoltzmannState solve_pb(const PBProblem& prob, const NewtonConfig& cfg, NewtonTrace* trace) {
    prob.validate();
    if (!(cfg.residual_tol > 0.0)) throw ConfigError("Newton residual_tol must be positive");
    if (!(cfg.line_search_shrink > 0.0 && cfg.line_search_shrink < 1.0))
        throw ConfigError("Newton line-search shrink must lie in (0,1)");
    const Grid2D& g = prob.grid();

    ScalarField phi0(g);
    switch (cfg.guess) {
    case InitialGuess::zero: break;
    case InitialGuess::harmonic: phi0 = harmonic_extension(prob.w, g); break;
    case InitialGuess::custom:
        if (!cfg.custom_guess) throw ConfigError("custom initial guess requested but not given");
        require_same_grid(g, cfg.custom_guess->grid(), "PB initial guess");
        phi0 = *cfg.custom_guess;
        break;
    }

    auto start = evaluate(phi0, prob);
    if (!start) {
        // Fall back to the harmonic extension when the guess overflows.
        start = evaluate(harmonic_extension(prob.w, g), prob);
        if (!start) throw OverflowError("PB initial guess overflows the exponential guard", NAN);
    }
    Trial cur = *start;

    const SparseMatrix eps_k = prob.eps * assemble_cell_laplacian(g, all_faces(g));
    const SpdSolver laplace(eps_k);
    NewtonTrace local;
    NewtonTrace& tr = trace ? *trace : local;
    tr = NewtonTrace{};

    for (int it = 0; it < cfg.max_iters; ++it) {
        tr.residuals.push_back(cur.residual);
        tr.energies.push_back(cur.energy);
        if (cur.residual <= cfg.residual_tol) return boltzmann_from_phi(cur.phi, prob);

        const Vec r = to_vec(pb_residual(cur.phi, prob));
        const Vec dir = newton_direction(cur.phi, prob, eps_k, -r);
        if (auto next = line_search(cur, dir, prob, cfg.line_search_shrink)) {
            cur = std::move(*next);
            continue;
        }
        // Line search stalled: preconditioned gradient descent.
        ++tr.gradient_fallbacks;
        for (int k = 0; k < 50; ++k) {
            const Vec gdir = -laplace.solve(to_vec(pb_residual(cur.phi, prob)));
            auto next = line_search(cur, gdir, prob, cfg.line_search_shrink);
            if (!next) break;
            cur = std::move(*next);
        }
    }
    tr.residuals.push_back(cur.residual);
    tr.energies.push_back(cur.energy);
    if (cur.residual <= cfg.residual_tol) return boltzmann_from_phi(cur.phi, prob);
    throw SolverError("Poisson-Boltzmann Newton iteration did not converge in " +
                          std::to_string(cfg.max_iters) + " iterations",
                      cur.residual, tr.residuals);
}

} // namespace npns
