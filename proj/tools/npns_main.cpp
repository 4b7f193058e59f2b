#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <iostream>

#include "npns/config.hpp"
#include "npns/error.hpp"
#include "npns/io.hpp"
#include "npns/pb.hpp"
#include "npns/pb1d.hpp"
#include "npns/simulation.hpp"

namespace {

using namespace npns;

void apply_thread_cap() {
    if (const char* s = std::getenv("NPNS_THREADS")) {
        const int n = std::atoi(s);
        if (n > 0) Eigen::setNbThreads(n);
    }
}

void print_checks(const RunArtifacts& art) {
    for (const auto& c : art.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
}

int cmd_run(const std::string& path, const std::string& out, bool check) {
    const ScenarioConfig cfg = load_config(path);
    RunOptions opts;
    opts.out_dir = out;
    opts.check_properties = check;
    const RunArtifacts art = run_simulation(cfg, opts);
    std::cout << cfg.name << ": " << art.accepted_steps << " steps (" << art.rejected_steps
              << " rejected) to t = " << art.final_state.t << "\n"
              << "timeseries " << art.timeseries.string() << "\n"
              << "reference  " << art.boltzmann.string() << "\n";
    print_checks(art);
    return art.all_passed() ? 0 : 1;
}

int cmd_verify(const std::string& path, const std::string& out) {
    const ScenarioConfig cfg = load_config(path);
    RunOptions opts;
    if (!out.empty()) opts.out_dir = out;
    opts.check_properties = true;
    const RunArtifacts art = run_simulation(cfg, opts);
    print_checks(art);
    std::cout << (art.all_passed() ? "all properties hold" : "property check failed") << "\n";
    return art.all_passed() ? 0 : 1;
}

int cmd_pb(const std::string& path, const std::string& out) {
    const ScenarioConfig cfg = load_config(path);
    const SimulationState init = cfg.initial_state();
    const PBProblem prob = cfg.reference_problem(init);
    NewtonTrace trace;
    const BoltzmannState b = solve_pb(prob, {}, &trace);
    std::cout << "newton iterations " << trace.residuals.size() - 1 << ", residual "
              << trace.residuals.back() << "\n";
    for (std::size_t i = 0; i < cfg.species.size(); ++i)
        std::cout << cfg.species[i].name << ": Z = " << format_double(b.z_const[i])
                  << ", mass = " << format_double(b.c_star[i].integral()) << "\n";
    std::cout << "max |phi*| = " << format_double(b.phi_star.max_abs()) << "\n";
    if (!out.empty()) {
        SimulationState s(cfg.grid, cfg.species.size());
        s.c = b.c_star;
        s.phi = b.phi_star;
        save_snapshot(out, s);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int cmd_pb1d(double eps, double height, double w, const std::string& species, int points) {
    PB1DProblem p;
    p.eps = eps;
    p.h_len = height;
    p.w_val = w;
    std::stringstream ss(species);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("species entry '" + item + "' is not z:Z");
        p.species.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
    }
    const PB1DProfile prof(p);
    std::cout << "# alpha = " << format_double(prof.alpha()) << "\n" << "y,phi\n";
    for (const auto& [y, phi] : prof.sample(points))
        std::cout << format_double(y) << "," << format_double(phi) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nernst-Planck-Navier-Stokes solver with Boltzmann steady states"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir = "npns_out", pb_out, verify_out;
    bool check = false;
    auto* run = app.add_subcommand("run", "time-dependent simulation");
    run->add_option("config", cfg_path, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--check-properties", check, "evaluate the property suite; exit 1 on failure");

    auto* pb = app.add_subcommand("pb", "steady Poisson-Boltzmann state of a scenario");
    pb->add_option("config", cfg_path, "scenario file")->required()->check(CLI::ExistingFile);
    pb->add_option("--out", pb_out, "write the state as a snapshot");

    double eps = 1.0, height = 1.0, w = 1.0;
    int points = 101;
    std::string species;
    auto* pb1d = app.add_subcommand("pb1d", "one-dimensional Poisson-Boltzmann profile");
    pb1d->add_option("--eps", eps, "dielectric coefficient")->required();
    pb1d->add_option("--height", height, "strip height H")->required();
    pb1d->add_option("--w", w, "potential at y = H")->required();
    pb1d->add_option("--species", species, "comma-separated z:Z pairs")->required();
    pb1d->add_option("--points", points, "number of output samples")->check(CLI::Range(2, 1000000));

    auto* verify = app.add_subcommand("verify", "run a scenario and check its properties");
    verify->add_option("config", cfg_path, "scenario file")->required()->check(CLI::ExistingFile);
    verify->add_option("--out", verify_out, "also write run artifacts here");

    CLI11_PARSE(app, argc, argv);
    apply_thread_cap();
    try {
        if (*run) return cmd_run(cfg_path, out_dir, check);
        if (*pb) return cmd_pb(cfg_path, pb_out);
        if (*pb1d) return cmd_pb1d(eps, height, w, species, points);
        if (*verify) return cmd_verify(cfg_path, verify_out);
    } catch (const npns::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
