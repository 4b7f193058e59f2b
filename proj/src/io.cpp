#include "npns/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "npns/error.hpp"

namespace npns {

namespace {

constexpr char magic[5] = {'N', 'P', 'N', 'S', '1'};

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto b = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(b.begin(), b.end());
        return std::bit_cast<T>(b);
    }
    return v;
}

template <class T>
void put(std::ostream& out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const char* what) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw FormatError(std::string("snapshot truncated while reading ") + what);
    return to_little(v);
}

void put_all(std::ostream& out, const std::vector<double>& v) {
    for (double x : v) put(out, x);
}

void get_all(std::istream& in, std::vector<double>& v, const char* what) {
    for (double& x : v) x = get<double>(in, what);
}

} // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw FormatError("not a number: '" + s + "'");
    return v;
}

std::string timeseries_header(std::size_t n) {
    std::string h = "t,total_energy,kinetic,dissipation";
    auto cols = [&](const char* stem) {
        for (std::size_t i = 1; i <= n; ++i) h += std::string(",") + stem + "_" + std::to_string(i);
    };
    cols("mass");
    cols("entropy");
    h += ",potential_term";
    cols("dist_l2");
    cols("grad_tilde_l2");
    h += ",modified_energy";
    return h;
}

std::string timeseries_row(const EnergyReport& r) {
    std::string s;
    auto add = [&](double v) {
        if (!s.empty()) s += ',';
        s += format_double(v);
    };
    add(r.t);
    add(r.total_energy);
    add(r.kinetic);
    add(r.dissipation);
    for (double v : r.masses) add(v);
    for (double v : r.entropies) add(v);
    add(r.potential_term);
    for (double v : r.dist_l2) add(v);
    for (double v : r.grad_tilde_l2) add(v);
    add(r.modified_energy);
    return s;
}

EnergyReport parse_timeseries_row(const std::string& line, std::size_t n) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_double(cell));
    if (v.size() != 6 + 4 * n)
        throw FormatError("timeseries row has " + std::to_string(v.size()) + " columns, expected " +
                          std::to_string(6 + 4 * n));
    EnergyReport r;
    std::size_t k = 0;
    r.t = v[k++];
    r.total_energy = v[k++];
    r.kinetic = v[k++];
    r.dissipation = v[k++];
    for (std::size_t i = 0; i < n; ++i) r.masses.push_back(v[k++]);
    for (std::size_t i = 0; i < n; ++i) r.entropies.push_back(v[k++]);
    r.potential_term = v[k++];
    for (std::size_t i = 0; i < n; ++i) r.dist_l2.push_back(v[k++]);
    for (std::size_t i = 0; i < n; ++i) r.grad_tilde_l2.push_back(v[k++]);
    r.modified_energy = v[k++];
    return r;
}

TimeseriesWriter::TimeseriesWriter(std::ostream& out, std::size_t n) : out_(out), n_(n) {
    out_ << timeseries_header(n_) << '\n';
}

void TimeseriesWriter::write(const EnergyReport& r) {
    if (r.masses.size() != n_) throw ShapeError("timeseries row has the wrong species count");
    out_ << timeseries_row(r) << '\n';
    if (!out_) throw Error("failed to write timeseries row");
}

void write_snapshot(std::ostream& out, const SimulationState& st) {
    const Grid2D& g = st.grid();
    out.write(magic, sizeof magic);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(st.c.size()));
    for (const auto& c : st.c) put_all(out, c.data());
    put_all(out, st.phi.data());
    put_all(out, st.flow.velocity.u_data());
    put_all(out, st.flow.velocity.v_data());
    put_all(out, st.flow.pressure.data());
    put(out, st.t);
    put(out, g.lx);
    put(out, g.ly);
    if (!out) throw Error("failed to write snapshot");
}

SimulationState read_snapshot(std::istream& in) {
    char m[sizeof magic];
    if (!in.read(m, sizeof m) || std::memcmp(m, magic, sizeof m) != 0)
        throw FormatError("not a snapshot: expected magic 'NPNS1'");
    const auto nx = get<std::uint32_t>(in, "nx");
    const auto ny = get<std::uint32_t>(in, "ny");
    const auto ns = get<std::uint32_t>(in, "species count");
    if (nx < 4 || ny < 4 || nx > (1u << 16) || ny > (1u << 16) || ns > 1024)
        throw FormatError("snapshot dimensions out of range: " + std::to_string(nx) + " x " +
                          std::to_string(ny) + ", " + std::to_string(ns) + " species");
    // Fields are read into a unit-square grid first; the trailer fixes the lengths.
    Grid2D g{static_cast<int>(nx), static_cast<int>(ny), 1.0, 1.0};
    SimulationState st(g, ns);
    for (auto& c : st.c) get_all(in, c.data(), "concentrations");
    get_all(in, st.phi.data(), "potential");
    get_all(in, st.flow.velocity.u_data(), "velocity");
    get_all(in, st.flow.velocity.v_data(), "velocity");
    get_all(in, st.flow.pressure.data(), "pressure");
    const double t = get<double>(in, "time");
    const double lx = get<double>(in, "lx");
    const double ly = get<double>(in, "ly");
    if (!(lx > 0.0) || !(ly > 0.0)) throw FormatError("snapshot has non-positive domain lengths");
    in.peek();
    if (!in.eof()) throw FormatError("snapshot has trailing bytes");
    const Grid2D real = Grid2D::make(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
    SimulationState out(real, ns);
    for (std::size_t i = 0; i < ns; ++i) out.c[i] = ScalarField(real, std::move(st.c[i].data()));
    out.phi = ScalarField(real, std::move(st.phi.data()));
    out.flow.velocity = VectorField(real);
    out.flow.velocity.u_data() = std::move(st.flow.velocity.u_data());
    out.flow.velocity.v_data() = std::move(st.flow.velocity.v_data());
    out.flow.pressure = ScalarField(real, std::move(st.flow.pressure.data()));
    out.t = t;
    return out;
}

void save_snapshot(const std::filesystem::path& path, const SimulationState& state) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_snapshot(out, state);
}

SimulationState load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open snapshot '" + path.string() + "'");
    return read_snapshot(in);
}

} // namespace npns
