#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "npns/diagnostics.hpp"
#include "npns/species.hpp"

namespace npns {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// t,total_energy,kinetic,dissipation,mass_1..N,entropy_1..N,potential_term,
/// dist_l2_1..N,grad_tilde_l2_1..N,modified_energy
std::string timeseries_header(std::size_t n_species);
std::string timeseries_row(const EnergyReport& r);
/// Inverse of timeseries_row for the CSV columns. Throws FormatError.
EnergyReport parse_timeseries_row(const std::string& line, std::size_t n_species);

/// Writes the header on construction and one line per report.
class TimeseriesWriter {
public:
    TimeseriesWriter(std::ostream& out, std::size_t n_species);
    void write(const EnergyReport& r);

private:
    std::ostream& out_;
    std::size_t n_;
};

/// Binary snapshot: magic "NPNS1", u32 nx, ny, n_species, then f64 fields
/// c_1..c_N, Phi, u, v, p in row-major order, then f64 t, lx, ly. All
/// little-endian.
void write_snapshot(std::ostream& out, const SimulationState& state);
SimulationState read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const SimulationState& state);
/// Throws FormatError on a wrong magic, inconsistent sizes or truncation.
SimulationState load_snapshot(const std::filesystem::path& path);

} // namespace npns
