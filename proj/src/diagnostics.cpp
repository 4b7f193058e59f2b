#include "npns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "npns/error.hpp"
#include "npns/fields.hpp"
#include "npns/flow.hpp"

namespace npns {

namespace {

// Face quadrature of w_f * |grad q|^2. Interior faces weight the midpoint
// of the two cells; selective boundary faces use the ghost value 2 q_b - q
// with weight w_b on a half cell; other boundary half cells repeat the
// integrand of the adjacent interior face. Faces touching a skipped cell
// contribute nothing.
template <class BoundaryQ, class BoundaryW>
double gradient_quadrature(const Grid2D& g, const std::vector<double>& q,
                           const std::vector<double>* w, const std::vector<bool>& skip,
                           const FaceMask& sel, BoundaryQ bq, BoundaryW bw) {
    const double area = g.cell_area();
    auto face = [&](int a, int b, double h) {
        if (skip[a] || skip[b]) return 0.0;
        const double wf = w ? 0.5 * ((*w)[a] + (*w)[b]) : 1.0;
        const double d = (q[b] - q[a]) / h;
        return wf * d * d;
    };
    auto wall = [&](Edge e, int k, int cell, double h, double neighbour) {
        if (!sel(e, k)) return neighbour;
        if (skip[cell]) return 0.0;
        const double d = 2.0 * (q[cell] - bq(e, k)) / h;
        return bw(e, k) * d * d;
    };
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        double first = 0.0, last = 0.0;
        for (int i = 1; i < g.nx; ++i) {
            const double v = face(g.idx(i - 1, j), g.idx(i, j), g.hx());
            if (i == 1) first = v;
            if (i == g.nx - 1) last = v;
            s += v;
        }
        s += 0.5 * wall(Edge::left, j, g.idx(0, j), g.hx(), first);
        s += 0.5 * wall(Edge::right, j, g.idx(g.nx - 1, j), g.hx(), last);
    }
    for (int i = 0; i < g.nx; ++i) {
        double first = 0.0, last = 0.0;
        for (int j = 1; j < g.ny; ++j) {
            const double v = face(g.idx(i, j - 1), g.idx(i, j), g.hy());
            if (j == 1) first = v;
            if (j == g.ny - 1) last = v;
            s += v;
        }
        s += 0.5 * wall(Edge::bottom, i, g.idx(i, 0), g.hy(), first);
        s += 0.5 * wall(Edge::top, i, g.idx(i, g.ny - 1), g.hy(), last);
    }
    return s * area;
}

double species_dissipation(const ScalarField& c, const ScalarField& phi, const IonSpecies& sp,
                           const FaceMask& sel, const BoundarySpec& w) {
    const Grid2D& g = c.grid();
    std::vector<double> mu(c.size());
    std::vector<bool> skip(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        skip[k] = !(c[k] > concentration_floor);
        mu[k] = skip[k] ? 0.0 : std::log(c[k]) + sp.z * phi[k];
    }
    const double lg = sp.selective() ? std::log(sp.gamma) : 0.0;
    return sp.d * gradient_quadrature(
                      g, mu, &c.data(), skip, sel,
                      [&](Edge e, int k) { return lg + sp.z * w.w(e, k); },
                      [&](Edge, int) { return sp.gamma; });
}

double species_grad_tilde(const ScalarField& c, const ScalarField& phi, const IonSpecies& sp,
                          const FaceMask& sel, const BoundarySpec& w) {
    const ScalarField ct = compute_tilde_c(c, phi, sp.z);
    const std::vector<bool> skip(c.size(), false);
    const double q = gradient_quadrature(
        c.grid(), ct.data(), nullptr, skip, sel,
        [&](Edge e, int k) { return sp.gamma * std::exp(sp.z * w.w(e, k)); },
        [](Edge, int) { return 1.0; });
    return std::sqrt(q);
}

ScalarField charge(const std::vector<ScalarField>& c, const std::vector<IonSpecies>& species) {
    return compute_charge_density(c, species);
}

void check_reference(const SimulationState& st, const BoltzmannState& ref) {
    if (ref.c_star.size() != st.c.size())
        throw ShapeError("reference has " + std::to_string(ref.c_star.size()) +
                         " species, state has " + std::to_string(st.c.size()));
    require_same_grid(st.grid(), ref.phi_star.grid(), "energy reference");
    for (std::size_t i = 0; i < st.c.size(); ++i)
        require_same_grid(st.c[i].grid(), ref.c_star[i].grid(), "energy reference");
}

} // namespace

double relative_entropy(const ScalarField& c, const ScalarField& c_star) {
    require_same_grid(c.grid(), c_star.grid(), "relative entropy");
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double cs = c_star[k];
        const double x = c[k];
        if (x > 0.0) {
            const double lx = std::log(std::max(x, concentration_floor));
            s += x * (lx - std::log(cs)) - x + cs;
        } else {
            s += cs;
        }
    }
    return s * c.grid().cell_area();
}

EnergyEvaluator::EnergyEvaluator(const Grid2D& g, std::vector<IonSpecies> species, BoundarySpec w,
                                 PhysicalParams params)
    : grid_(g), species_(std::move(species)), w_(std::move(w)), params_(params),
      poisson_(g, params.eps), w_tilde_(harmonic_extension(w_, g)) {
    for (const auto& sp : species_) selective_.push_back(sp.selective_faces(g));
}

double EnergyEvaluator::potential_term(const ScalarField& rho, const ScalarField& rho_star) const {
    const ScalarField diff = rho - rho_star;
    const ScalarField psi = poisson_.solve_homogeneous(diff);
    double s = 0.0;
    for (std::size_t k = 0; k < diff.size(); ++k) s += diff[k] * psi[k];
    return 0.5 * s * grid_.cell_area();
}

double EnergyEvaluator::energy(const SimulationState& state, const BoltzmannState& ref) const {
    check_reference(state, ref);
    double e = 0.0;
    for (std::size_t i = 0; i < state.c.size(); ++i) e += relative_entropy(state.c[i], ref.c_star[i]);
    return e + potential_term(charge(state.c, species_), ref.rho_star);
}

std::vector<double> EnergyEvaluator::dissipation_per_species(const SimulationState& state) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < species_.size(); ++i)
        out.push_back(species_dissipation(state.c[i], state.phi, species_[i], selective_[i], w_));
    return out;
}

double EnergyEvaluator::dissipation(const SimulationState& state) const {
    double s = 0.0;
    for (double d : dissipation_per_species(state)) s += d;
    return s;
}

std::vector<double> EnergyEvaluator::grad_tilde_l2(const SimulationState& state) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < species_.size(); ++i)
        out.push_back(species_grad_tilde(state.c[i], state.phi, species_[i], selective_[i], w_));
    return out;
}

EnergyReport EnergyEvaluator::evaluate(const SimulationState& state,
                                       const BoltzmannState& ref) const {
    check_reference(state, ref);
    if (state.c.size() != species_.size())
        throw ShapeError("energy: state and species lists differ in length");
    EnergyReport r;
    r.t = state.t;
    const ScalarField rho = charge(state.c, species_);
    double ent = 0.0;
    for (std::size_t i = 0; i < state.c.size(); ++i) {
        r.masses.push_back(state.c[i].integral());
        r.entropies.push_back(relative_entropy(state.c[i], ref.c_star[i]));
        ent += r.entropies.back();
        double d2 = 0.0;
        for (std::size_t k = 0; k < state.c[i].size(); ++k) {
            const double d = state.c[i][k] - ref.c_star[i][k];
            d2 += d * d;
        }
        r.dist_l2.push_back(std::sqrt(d2 * grid_.cell_area()));
    }
    r.potential_term = potential_term(rho, ref.rho_star);
    r.kinetic = kinetic_energy(state.flow.velocity, params_.kbt);
    r.total_energy = ent + r.potential_term + r.kinetic;
    r.dissipation = dissipation(state);
    r.viscous_dissipation = viscous_dissipation(state.flow.velocity, params_.nu, params_.kbt);
    r.grad_tilde_l2 = grad_tilde_l2(state);
    double rw = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) rw += rho[k] * w_tilde_[k];
    r.modified_energy = r.total_energy - rw * grid_.cell_area();
    return r;
}

EnergyReport compute_energy(const SimulationState& state, const BoltzmannState& ref,
                            const std::vector<IonSpecies>& species, const BoundarySpec& w,
                            const PhysicalParams& params) {
    return EnergyEvaluator(state.grid(), species, w, params).evaluate(state, ref);
}

double compute_dissipation(const SimulationState& state, const std::vector<IonSpecies>& species,
                           const BoundarySpec& w) {
    if (state.c.size() != species.size())
        throw ShapeError("dissipation: state and species lists differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < species.size(); ++i)
        s += species_dissipation(state.c[i], state.phi, species[i],
                                 species[i].selective_faces(state.grid()), w);
    return s;
}

double compute_modified_energy(const SimulationState& state, const BoltzmannState& ref,
                               const ScalarField& w_tilde, const std::vector<IonSpecies>& species,
                               const PhysicalParams& params) {
    const Grid2D& g = state.grid();
    require_same_grid(g, w_tilde.grid(), "modified energy");
    EnergyEvaluator ev(g, species, BoundarySpec(g), params);
    const double e = ev.energy(state, ref) + kinetic_energy(state.flow.velocity, params.kbt);
    const ScalarField rho = compute_charge_density(state.c, species);
    double rw = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) rw += rho[k] * w_tilde[k];
    return e - rw * g.cell_area();
}

DecayReport check_decay(const std::vector<EnergyReport>& history, double rate_floor) {
    DecayReport r;
    for (std::size_t k = 1; k < history.size(); ++k) {
        const EnergyReport& a = history[k - 1];
        const EnergyReport& b = history[k];
        const double scale = 1.0 + std::abs(a.total_energy);
        const double inc = b.total_energy - a.total_energy;
        r.max_increase = std::max(r.max_increase, inc / scale);
        if (inc > decay_step_tol * scale && r.monotone) {
            r.monotone = false;
            r.first_violation = static_cast<int>(k);
        }
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) continue;
        const double rate = -inc / dt;
        const double pred = 0.5 * (a.dissipation + a.viscous_dissipation + b.dissipation +
                                   b.viscous_dissipation);
        if (std::max(std::abs(rate), pred) <= rate_floor) continue;
        ++r.rate_samples;
        const double err = std::abs(rate - pred) / std::max(pred, rate_floor);
        r.worst_rate_error = std::max(r.worst_rate_error, err);
        if (err > decay_rate_tol) r.rate_consistent = false;
    }
    return r;
}

InvarianceReport check_constant_difference(const std::vector<double>& differences, double tol) {
    InvarianceReport r;
    if (differences.empty()) return r;
    r.initial_difference = differences.front();
    const double scale = std::max(1.0, std::abs(r.initial_difference));
    for (std::size_t k = 0; k < differences.size(); ++k) {
        const double drift = std::abs(differences[k] - r.initial_difference) / scale;
        if (drift > r.max_drift) {
            r.max_drift = drift;
            r.worst_index = static_cast<int>(k);
        }
    }
    r.ok = r.max_drift <= tol;
    return r;
}

void require_admissible_pair(const BoltzmannState& a, const BoltzmannState& b,
                             const std::vector<IonSpecies>& species) {
    if (a.z_const.size() != species.size() || b.z_const.size() != species.size())
        throw ConfigError("reference states do not match the species list");
    for (std::size_t i = 0; i < species.size(); ++i) {
        if (!species[i].selective()) continue;
        const double za = a.z_const[i], zb = b.z_const[i];
        if (std::abs(za - zb) > 1e-12 * std::max(std::abs(za), std::abs(zb))) {
            std::ostringstream os;
            os << "references differ on selective species '" << species[i].name << "': Z = " << za
               << " vs " << zb;
            throw ConfigError(os.str());
        }
    }
}

InvarianceReport reference_invariance_check(const std::vector<SimulationState>& history,
                                            const BoltzmannState& ref_a,
                                            const BoltzmannState& ref_b,
                                            const EnergyEvaluator& evaluator, double tol) {
    require_admissible_pair(ref_a, ref_b, evaluator.species());
    std::vector<double> diffs;
    for (const auto& s : history) diffs.push_back(evaluator.energy(s, ref_a) - evaluator.energy(s, ref_b));
    return check_constant_difference(diffs, tol);
}

double predicted_energy_difference(const std::vector<double>& masses, const BoltzmannState& a,
                                   const BoltzmannState& b, const ScalarField& phi_w) {
    const Grid2D& g = phi_w.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i)
        s += std::log(a.z_const[i] / b.z_const[i]) * masses[i];
    double k = 0.0;
    for (int m = 0; m < g.cells(); ++m) {
        double v = 0.5 * phi_w[m] * (b.rho_star[m] - a.rho_star[m]) +
                   0.5 * (a.rho_star[m] * a.phi_star[m] - b.rho_star[m] * b.phi_star[m]);
        for (std::size_t i = 0; i < masses.size(); ++i) v += a.c_star[i][m] - b.c_star[i][m];
        k += v;
    }
    return s + k * g.cell_area();
}

GronwallReport check_gronwall(const std::vector<double>& t, const std::vector<double>& f,
                              double fit_fraction) {
    GronwallReport r;
    if (t.size() != f.size()) throw ShapeError("gronwall: time and value series differ in length");
    if (t.size() < 2) return r;
    const double t0 = t.front(), f0 = f.front();
    const double span = t.back() - t0;
    std::size_t nfit = 1;
    while (nfit < t.size() && t[nfit] - t0 <= fit_fraction * span) ++nfit;
    r.fit_samples = static_cast<int>(nfit);
    // The fit is strict; the check allows for rounding in the envelope.
    auto holds = [&](double c, std::size_t k, double slack) {
        const double env = (f0 + c) * std::exp(c * (t[k] - t0));
        return f[k] + c <= env + slack * (1.0 + std::abs(f0) + c);
    };
    auto fits = [&](double c) {
        for (std::size_t k = 0; k < nfit; ++k)
            if (!holds(c, k, 0.0)) return false;
        return true;
    };
    double lo = std::max(0.0, -f0);
    double c = lo;
    if (!fits(lo)) {
        double hi = std::max(1.0, 2.0 * lo);
        while (!fits(hi)) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (fits(mid) ? hi : lo) = mid;
        }
        c = hi;
    }
    r.c = c;
    for (std::size_t k = nfit; k < t.size(); ++k) {
        const double env = (f0 + c) * std::exp(c * (t[k] - t0));
        if (env > 0.0) r.worst_ratio = std::max(r.worst_ratio, (f[k] + c) / env);
        if (!holds(c, k, 1e-12) && r.ok) {
            r.ok = false;
            r.first_violation = static_cast<int>(k);
        }
    }
    return r;
}

void ConvergenceMonitor::record(const EnergyReport& r, std::vector<double> tilde_means) {
    inc_.push_back(energy_.empty() ? 0.0 : r.total_energy - energy_.back());
    energy_.push_back(r.total_energy);
    t_.push_back(r.t);
    kin_.push_back(r.kinetic);
    dist_.push_back(r.dist_l2);
    grad_.push_back(r.grad_tilde_l2);
    means_.push_back(std::move(tilde_means));
}

double ConvergenceMonitor::final_quarter_gradient_ratio() const {
    if (t_.size() < 2) return 0.0;
    const double start = t_.front() + 0.75 * (t_.back() - t_.front());
    double worst = 0.0;
    for (std::size_t s = 0; s < grad_.front().size(); ++s) {
        double integral = 0.0, len = 0.0;
        for (std::size_t k = 1; k < t_.size(); ++k) {
            if (t_[k] <= start) continue;
            const double a = std::max(t_[k - 1], start);
            // Linear interpolation of the left value when the window starts mid-interval.
            const double w = (a - t_[k - 1]) / (t_[k] - t_[k - 1]);
            const double ga = grad_[k - 1][s] + w * (grad_[k][s] - grad_[k - 1][s]);
            integral += 0.5 * (ga + grad_[k][s]) * (t_[k] - a);
            len += t_[k] - a;
        }
        const double avg = len > 0.0 ? integral / len : grad_.back()[s];
        const double g0 = grad_.front()[s];
        // A state that starts at equilibrium only has to stay there up to rounding.
        const double ratio = g0 > 0.0 ? avg / g0 : (avg > 1e-12 ? INFINITY : 0.0);
        worst = std::max(worst, ratio);
    }
    return worst;
}

} // namespace npns
