#include "npns/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "npns/error.hpp"
#include "npns/flow.hpp"

namespace npns {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

struct Where {
    std::string file;
    int line;
    std::string context() const { return file + ":" + std::to_string(line); }
};

double to_double(const std::string& v, const Where& w, const std::string& key) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end)
        throw ConfigError(w.context() + ": '" + key + "' expects a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& v, const Where& w, const std::string& key) {
    long long x = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end)
        throw ConfigError(w.context() + ": '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& v, const Where& w, const std::string& key) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(w.context() + ": '" + key + "' expects true or false, got '" + v + "'");
}

Expr to_expr(const std::string& v, const Where& w) {
    try {
        return Expr::parse(v);
    } catch (const ConfigError& e) {
        throw ConfigError(w.context() + ": " + e.what());
    }
}

std::vector<BoundarySegment> to_segments(const std::string& v, const Where& w) {
    std::vector<BoundarySegment> out;
    for (const auto& item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3)
            throw ConfigError(w.context() + ": segment '" + item + "' is not edge:start:end");
        BoundarySegment s;
        try {
            s.edge = parse_edge(parts[0]);
        } catch (const Error& e) {
            throw ConfigError(w.context() + ": " + e.what());
        }
        s.start = to_double(parts[1], w, "segments");
        s.end = to_double(parts[2], w, "segments");
        out.push_back(s);
    }
    return out;
}

std::string segment_text(const BoundarySegment& s) {
    std::ostringstream os;
    os << edge_name(s.edge) << ":" << s.start << ":" << s.end;
    return os.str();
}

} // namespace

const char* regime_name(BoundaryRegime r) {
    switch (r) {
    case BoundaryRegime::blocking: return "blocking";
    case BoundaryRegime::uniform_selective: return "uniform-selective";
    case BoundaryRegime::general_selective: return "general-selective";
    }
    return "?";
}

ScenarioConfig parse_config(std::istream& in, const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    std::string section;
    int species_index = -1;
    int nx = cfg.grid.nx, ny = cfg.grid.ny;
    double lx = cfg.grid.lx, ly = cfg.grid.ly;
    std::map<std::string, int> seen_species;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const Where where{name, lineno};
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where.context() + ": unterminated section header");
            const std::string head = trim(line.substr(1, line.size() - 2));
            const auto sp = head.find(' ');
            section = sp == std::string::npos ? head : head.substr(0, sp);
            if (section == "species") {
                const std::string sname = sp == std::string::npos ? "" : trim(head.substr(sp + 1));
                if (sname.empty()) throw ConfigError(where.context() + ": species section needs a name");
                if (seen_species.count(sname))
                    throw ConfigError(where.context() + ": duplicate species '" + sname + "'");
                species_index = static_cast<int>(cfg.species.size());
                seen_species[sname] = species_index;
                IonSpecies s;
                s.name = sname;
                cfg.species.push_back(s);
                cfg.init.emplace_back();
            } else if (section != "grid" && section != "physics" && section != "boundary" &&
                       section != "flow" && section != "run" && section != "reference" &&
                       section != "checks") {
                throw ConfigError(where.context() + ": unknown section [" + head + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where.context() + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto unknown = [&]() {
            return ConfigError(where.context() + ": unknown key '" + key + "' in [" + section + "]");
        };
        if (section.empty()) throw ConfigError(where.context() + ": key outside of any section");
        if (section == "grid") {
            if (key == "nx") nx = static_cast<int>(to_int(val, where, key));
            else if (key == "ny") ny = static_cast<int>(to_int(val, where, key));
            else if (key == "lx") lx = to_double(val, where, key);
            else if (key == "ly") ly = to_double(val, where, key);
            else throw unknown();
        } else if (section == "physics") {
            if (key == "eps") cfg.params.eps = to_double(val, where, key);
            else if (key == "nu") cfg.params.nu = to_double(val, where, key);
            else if (key == "kbt") cfg.params.kbt = to_double(val, where, key);
            else throw unknown();
        } else if (section == "species") {
            IonSpecies& s = cfg.species[species_index];
            SpeciesInit& init = cfg.init[species_index];
            if (key == "z") s.z = to_double(val, where, key);
            else if (key == "d") s.d = to_double(val, where, key);
            else if (key == "regime") {
                if (val == "blocking") s.regime = Regime::blocking;
                else if (val == "selective") s.regime = Regime::selective;
                else throw ConfigError(where.context() + ": regime must be blocking or selective");
            } else if (key == "gamma") s.gamma = to_double(val, where, key);
            else if (key == "segments") s.segments = to_segments(val, where);
            else if (key == "initial") init.profile = to_expr(val, where);
            else if (key == "noise") init.noise = to_double(val, where, key);
            else if (key == "mass") init.mass = to_double(val, where, key);
            else throw unknown();
        } else if (section == "boundary") {
            if (key == "regime") {
                if (val == "blocking") cfg.regime = BoundaryRegime::blocking;
                else if (val == "uniform-selective") cfg.regime = BoundaryRegime::uniform_selective;
                else if (val == "general-selective") cfg.regime = BoundaryRegime::general_selective;
                else
                    throw ConfigError(where.context() +
                                      ": regime must be blocking, uniform-selective or general-selective");
            } else if (key == "w") {
                for (Edge e : all_edges) cfg.w[static_cast<int>(e)] = to_expr(val, where);
            } else if (key.rfind("w.", 0) == 0) {
                Edge e;
                try {
                    e = parse_edge(key.substr(2));
                } catch (const Error&) {
                    throw unknown();
                }
                cfg.w[static_cast<int>(e)] = to_expr(val, where);
            } else {
                throw unknown();
            }
        } else if (section == "flow") {
            if (key == "stream") cfg.stream = to_expr(val, where);
            else throw unknown();
        } else if (section == "run") {
            if (key == "t_end") cfg.run.t_end = to_double(val, where, key);
            else if (key == "dt_max") cfg.run.dt_max = to_double(val, where, key);
            else if (key == "cfl_safety") cfg.run.cfl_safety = to_double(val, where, key);
            else if (key == "output_every") cfg.run.output_every = static_cast<int>(to_int(val, where, key));
            else if (key == "snapshot_every") cfg.run.snapshot_every = static_cast<int>(to_int(val, where, key));
            else if (key == "seed") cfg.run.seed = static_cast<std::uint64_t>(to_int(val, where, key));
            else throw unknown();
        } else if (section == "reference") {
            if (key == "policy") {
                if (val == "auto") cfg.reference = ReferencePolicy::auto_from_masses;
                else if (val == "explicit") cfg.reference = ReferencePolicy::explicit_z;
                else throw ConfigError(where.context() + ": policy must be auto or explicit");
            } else if (key == "z") {
                cfg.explicit_z.clear();
                for (const auto& p : split(val, ',')) cfg.explicit_z.push_back(to_double(p, where, key));
            } else {
                throw unknown();
            }
        } else if (section == "checks") {
            if (key == "convergence_tol") cfg.checks.convergence_tol = to_double(val, where, key);
            else if (key == "kinetic_tol") cfg.checks.kinetic_tol = to_double(val, where, key);
            else if (key == "invariance_z_factor") cfg.checks.invariance_z_factor = to_double(val, where, key);
            else if (key == "gradient_ratio") cfg.checks.gradient_ratio = to_double(val, where, key);
            else if (key == "convergence") cfg.checks.convergence = to_bool(val, where, key);
            else throw unknown();
        }
    }
    try {
        cfg.grid = Grid2D::make(nx, ny, lx, ly);
    } catch (const Error& e) {
        throw ConfigError(name + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.filename().string());
}

void ScenarioConfig::validate() const {
    params.validate();
    if (species.empty()) throw ConfigError(name + ": at least one [species] section is required");
    if (init.size() != species.size()) throw ConfigError(name + ": species initial data missing");
    for (const auto& s : species) {
        s.validate();
        for (const auto& seg : s.segments) (void)snap_segment(grid, seg);
    }
    for (std::size_t i = 0; i < init.size(); ++i) {
        if (!(init[i].noise >= 0.0) || init[i].noise >= 1.0)
            throw ConfigError(name + ": species '" + species[i].name + "' noise must lie in [0, 1)");
        if (init[i].mass && !(*init[i].mass > 0.0))
            throw ConfigError(name + ": species '" + species[i].name + "' mass must be positive");
    }
    if (!(run.t_end > 0.0)) throw ConfigError(name + ": t_end must be positive");
    if (!(run.dt_max > 0.0)) throw ConfigError(name + ": dt_max must be positive");
    if (!(run.cfl_safety > 0.0) || run.cfl_safety > 1.0)
        throw ConfigError(name + ": cfl_safety must lie in (0, 1]");
    if (run.output_every < 1) throw ConfigError(name + ": output_every must be at least 1");
    if (run.snapshot_every < 0) throw ConfigError(name + ": snapshot_every must be non-negative");
    if (!(checks.invariance_z_factor > 0.0))
        throw ConfigError(name + ": invariance_z_factor must be positive");

    const bool any_selective =
        std::any_of(species.begin(), species.end(), [](const IonSpecies& s) { return s.selective(); });
    if (regime == BoundaryRegime::blocking && any_selective)
        throw ConfigError(name + ": blocking regime does not allow selective species");
    if (regime != BoundaryRegime::blocking && !any_selective)
        throw ConfigError(name + ": " + regime_name(regime) + " regime needs a selective species");

    if (reference == ReferencePolicy::explicit_z) {
        if (explicit_z.size() != species.size())
            throw ConfigError(name + ": explicit reference needs one Z per species");
        for (double z : explicit_z)
            if (!(z > 0.0)) throw ConfigError(name + ": reference Z values must be positive");
    }

    const BoundarySpec w = boundary();
    if (!w.all_finite()) throw ConfigError(name + ": boundary potential is not finite");
    if (regime == BoundaryRegime::uniform_selective) {
        for (const auto& s : species) {
            if (!s.selective()) continue;
            std::optional<double> value;
            for (const auto& seg : s.segments) {
                const auto r = snap_segment(grid, seg);
                for (int k = r[0]; k < r[1]; ++k) {
                    const double v = w.w(seg.edge, k);
                    if (!value) value = v;
                    if (std::abs(v - *value) > 1e-12 * (1.0 + std::abs(*value))) {
                        std::ostringstream os;
                        os << name << ": uniform-selective species '" << s.name << "' segment "
                           << segment_text(seg) << " has W = " << v << " at face " << k
                           << ", expected the constant " << *value;
                        throw ConfigError(os.str());
                    }
                }
            }
        }
    }
}

BoundarySpec ScenarioConfig::boundary() const {
    BoundarySpec b(grid);
    for (Edge e : all_edges)
        for (int k = 0; k < edge_faces(grid, e); ++k) {
            const auto p = edge_point(grid, e, k);
            b.w(e, k) = w[static_cast<int>(e)](p[0], p[1]);
        }
    return b;
}

SimulationState ScenarioConfig::initial_state() const {
    SimulationState st(grid, species.size());
    for (std::size_t i = 0; i < species.size(); ++i) {
        const Expr& f = init[i].profile;
        st.c[i] = ScalarField::sample(grid, [&](double x, double y) { return f(x, y); });
        if (init[i].noise > 0.0) {
            std::mt19937_64 rng(run.seed * 1000003ULL + i);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (auto& x : st.c[i].values()) x *= 1.0 + init[i].noise * u(rng);
        }
        if (init[i].mass) {
            const double m = st.c[i].integral();
            if (!(m > 0.0))
                throw ConfigError(name + ": species '" + species[i].name +
                                  "' initial profile has no mass to rescale");
            st.c[i] *= *init[i].mass / m;
        }
        if (!st.c[i].all_finite() || st.c[i].min() < 0.0)
            throw ConfigError(name + ": species '" + species[i].name +
                              "' initial concentration must be finite and non-negative");
    }
    st.flow.velocity = velocity_from_stream(grid, [&](double x, double y) { return stream(x, y); });
    return st;
}

PBProblem ScenarioConfig::reference_problem(const SimulationState& initial) const {
    PBProblem p;
    p.eps = params.eps;
    p.w = boundary();
    for (std::size_t i = 0; i < species.size(); ++i) {
        const IonSpecies& s = species[i];
        PBSpecies ps;
        ps.z = s.z;
        if (reference == ReferencePolicy::explicit_z) {
            ps.datum = PBDatum::fixed_z;
            ps.value = explicit_z[i];
        } else if (!s.selective()) {
            ps.datum = PBDatum::fixed_mass;
            ps.value = initial.c[i].integral();
        } else if (regime == BoundaryRegime::uniform_selective) {
            // Z = (gamma e^{z w})^{-1} with w the constant trace on the segments.
            const auto r = snap_segment(grid, s.segments.front());
            const double wv = p.w.w(s.segments.front().edge, r[0]);
            ps.datum = PBDatum::fixed_z;
            ps.value = 1.0 / (s.gamma * std::exp(s.z * wv));
        } else {
            ps.datum = PBDatum::fixed_z;
            ps.value = 1.0 / s.gamma;
        }
        p.species.push_back(ps);
    }
    p.validate();
    return p;
}

} // namespace npns
