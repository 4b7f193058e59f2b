#include "npns/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "npns/error.hpp"
#include "npns/fields.hpp"
#include "npns/flow.hpp"
#include "npns/io.hpp"
#include "npns/poisson.hpp"
#include "npns/transport.hpp"

namespace npns {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

SimulationState as_state(const BoltzmannState& b) {
    SimulationState s(b.phi_star.grid(), b.c_star.size());
    s.c = b.c_star;
    s.phi = b.phi_star;
    return s;
}

double l2(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    return std::sqrt(s * f.grid().cell_area());
}

} // namespace

bool RunArtifacts::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

BoltzmannState reference_state(const ScenarioConfig& cfg, const SimulationState& initial) {
    return solve_pb(cfg.reference_problem(initial));
}

BoltzmannState scaled_reference(const ScenarioConfig& cfg, const BoltzmannState& ref,
                                double factor) {
    PBProblem p;
    p.eps = cfg.params.eps;
    p.w = cfg.boundary();
    for (std::size_t i = 0; i < cfg.species.size(); ++i) {
        const double scale = cfg.species[i].selective() ? 1.0 : factor;
        p.species.push_back({cfg.species[i].z, PBDatum::fixed_z, scale * ref.z_const[i]});
    }
    return solve_pb(p);
}

RunArtifacts run_simulation(const ScenarioConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    const Grid2D& g = cfg.grid;
    const BoundarySpec w = cfg.boundary();
    RunArtifacts art;

    std::ofstream csv;
    std::optional<TimeseriesWriter> writer;
    if (opts.out_dir) {
        std::filesystem::create_directories(*opts.out_dir);
        art.snapshot_dir = *opts.out_dir / "snapshots";
        std::filesystem::create_directories(art.snapshot_dir);
        art.timeseries = *opts.out_dir / "timeseries.csv";
        csv.open(art.timeseries, std::ios::trunc);
        if (!csv) throw Error("cannot open '" + art.timeseries.string() + "' for writing");
        writer.emplace(csv, cfg.species.size());
    }

    SimulationState state = cfg.initial_state();
    art.reference = reference_state(cfg, state);
    const bool decaying = cfg.regime != BoundaryRegime::general_selective;
    if (decaying)
        art.alternate_reference =
            scaled_reference(cfg, art.reference, cfg.checks.invariance_z_factor);

    PoissonSolver poisson(g, cfg.params.eps);
    Transport transport(g, cfg.species, w);
    FlowSolver flow(g, cfg.params.nu);
    EnergyEvaluator energy(g, cfg.species, w, cfg.params);
    const double safety = cfg.run.cfl_safety;

    auto refresh_phi = [&](SimulationState& s) {
        s.phi = poisson.solve(compute_charge_density(s.c, cfg.species), w);
    };
    std::vector<double> mass0;
    auto record = [&](const SimulationState& s) {
        EnergyReport r = energy.evaluate(s, art.reference);
        if (!art.history.empty()) {
            for (std::size_t i = 0; i < cfg.species.size(); ++i) {
                if (cfg.species[i].selective()) continue;
                const double prev = art.history.back().masses[i];
                art.max_mass_step_error =
                    std::max(art.max_mass_step_error, std::abs(r.masses[i] - prev) / std::abs(prev));
                art.max_mass_drift =
                    std::max(art.max_mass_drift, std::abs(r.masses[i] - mass0[i]) / std::abs(mass0[i]));
            }
        } else {
            mass0 = r.masses;
        }
        if (decaying)
            art.reference_differences.push_back(r.entropy_energy() -
                                                energy.energy(s, art.alternate_reference));
        const PositivityReport pos = check_positivity(s);
        art.min_concentration =
            art.history.empty() ? pos.min_value : std::min(art.min_concentration, pos.min_value);
        const int step = static_cast<int>(art.history.size());
        if (writer && step % cfg.run.output_every == 0) writer->write(r);
        if (opts.out_dir && cfg.run.snapshot_every > 0 && step % cfg.run.snapshot_every == 0) {
            std::ostringstream name;
            name << "step_" << step << ".npns";
            save_snapshot(art.snapshot_dir / name.str(), s);
        }
        if (opts.observer) opts.observer(s, r);
        art.history.push_back(std::move(r));
    };

    refresh_phi(state);
    record(state);

    const double t_end = cfg.run.t_end;
    const double dt_floor = 1e-12 * t_end;
    try {
        while (state.t < t_end * (1.0 - 1e-14)) {
            double dt = std::min({cfg.run.dt_max, t_end - state.t,
                                  transport.admissible_dt(state, safety),
                                  flow_admissible_dt(state.flow.velocity, safety)});
            for (;;) {
                if (dt < dt_floor)
                    throw SolverError("time step fell below " + fmt(dt_floor) + " at t = " +
                                          fmt(state.t) + " after repeated rejections",
                                      dt);
                try {
                    std::vector<ScalarField> c = transport.step(state, dt, safety);
                    const VectorField force =
                        compute_force(compute_charge_density(state.c, cfg.species), state.phi,
                                      cfg.params.kbt);
                    FlowState fl = flow.step(state.flow, force, dt, safety);
                    state.c = std::move(c);
                    state.flow = std::move(fl);
                    break;
                } catch (const PositivityFailure&) {
                    ++art.rejected_steps;
                    dt *= 0.5;
                } catch (const StepRejected& e) {
                    ++art.rejected_steps;
                    dt = std::min(0.5 * dt, e.admissible_dt());
                }
            }
            state.t += dt;
            if (t_end - state.t < 1e-14 * t_end) state.t = t_end;
            refresh_phi(state);
            ++art.accepted_steps;
            record(state);
        }
    } catch (const Error&) {
        if (opts.out_dir) save_snapshot(*opts.out_dir / "last_good.npns", state);
        throw;
    }

    art.final_state = state;
    if (opts.out_dir) {
        save_snapshot(*opts.out_dir / "final.npns", state);
        art.boltzmann = *opts.out_dir / "boltzmann.npns";
        SimulationState b = as_state(art.reference);
        b.t = state.t;
        save_snapshot(art.boltzmann, b);
    }
    if (opts.check_properties) art.checks = evaluate_properties(cfg, art);
    if (opts.out_dir) {
        std::ofstream sum(*opts.out_dir / "properties.txt", std::ios::trunc);
        sum << "scenario " << cfg.name << " (" << regime_name(cfg.regime) << ")\n"
            << "accepted steps " << art.accepted_steps << ", rejected " << art.rejected_steps << "\n";
        for (const auto& c : art.checks)
            sum << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    }
    return art;
}

std::vector<PropertyCheck> evaluate_properties(const ScenarioConfig& cfg, const RunArtifacts& run) {
    std::vector<PropertyCheck> out;
    const auto& h = run.history;
    {
        PropertyCheck c{"positivity", run.min_concentration >= positivity_floor,
                        "min c = " + fmt(run.min_concentration)};
        out.push_back(c);
    }
    {
        bool finite = true;
        for (const auto& r : h) finite = finite && std::isfinite(r.total_energy) && std::isfinite(r.modified_energy);
        out.push_back({"finite", finite, std::to_string(h.size()) + " reports"});
    }
    const bool any_blocking = std::any_of(cfg.species.begin(), cfg.species.end(),
                                          [](const IonSpecies& s) { return !s.selective(); });
    if (any_blocking) {
        out.push_back({"mass conservation",
                       run.max_mass_step_error <= 1e-12 && run.max_mass_drift <= 1e-9,
                       "per step " + fmt(run.max_mass_step_error) + ", total " + fmt(run.max_mass_drift)});
    }
    if (cfg.regime != BoundaryRegime::general_selective) {
        const DecayReport d = check_decay(h);
        out.push_back({"energy decay", d.ok(),
                       d.ok() ? "max relative step change " + fmt(d.max_increase)
                              : "uptick at report " + std::to_string(d.first_violation)});
        const InvarianceReport inv = check_constant_difference(run.reference_differences);
        out.push_back({"reference invariance", inv.ok, "drift " + fmt(inv.max_drift)});
        if (cfg.checks.convergence) {
            double worst = 0.0;
            for (std::size_t i = 0; i < cfg.species.size(); ++i)
                worst = std::max(worst, h.back().dist_l2[i] / l2(run.reference.c_star[i]));
            out.push_back({"convergence", worst <= cfg.checks.convergence_tol,
                           "relative l2 distance " + fmt(worst)});
            out.push_back({"kinetic decay", h.back().kinetic <= cfg.checks.kinetic_tol,
                           "final kinetic " + fmt(h.back().kinetic)});
            ConvergenceMonitor m;
            for (const auto& r : h) m.record(r, {});
            const double ratio = m.final_quarter_gradient_ratio();
            out.push_back({"gradient decay", ratio <= cfg.checks.gradient_ratio,
                           "final-quarter ratio " + fmt(ratio)});
        }
    } else {
        std::vector<double> t, f;
        for (const auto& r : h) {
            t.push_back(r.t);
            f.push_back(r.modified_energy);
        }
        const GronwallReport gr = check_gronwall(t, f);
        out.push_back({"gronwall envelope", gr.ok,
                       "C = " + fmt(gr.c) + ", worst ratio " + fmt(gr.worst_ratio)});
    }
    return out;
}

} // namespace npns
