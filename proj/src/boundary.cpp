#include "npns/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "npns/error.hpp"

namespace npns {

const char* edge_name(Edge e) {
    switch (e) {
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
    case Edge::left: return "left";
    case Edge::right: return "right";
    }
    return "?";
}

Edge parse_edge(const std::string& s) {
    for (Edge e : all_edges)
        if (s == edge_name(e)) return e;
    throw ConfigError("unknown boundary edge '" + s + "'");
}

int edge_faces(const Grid2D& g, Edge e) {
    return (e == Edge::bottom || e == Edge::top) ? g.nx : g.ny;
}

double edge_length(const Grid2D& g, Edge e) {
    return (e == Edge::bottom || e == Edge::top) ? g.lx : g.ly;
}

double edge_spacing(const Grid2D& g, Edge e) {
    return (e == Edge::bottom || e == Edge::top) ? g.hx() : g.hy();
}

int edge_cell(const Grid2D& g, Edge e, int k) {
    switch (e) {
    case Edge::bottom: return g.idx(k, 0);
    case Edge::top: return g.idx(k, g.ny - 1);
    case Edge::left: return g.idx(0, k);
    case Edge::right: return g.idx(g.nx - 1, k);
    }
    return -1;
}

std::array<double, 2> edge_point(const Grid2D& g, Edge e, int k) {
    switch (e) {
    case Edge::bottom: return {g.xc(k), 0.0};
    case Edge::top: return {g.xc(k), g.ly};
    case Edge::left: return {0.0, g.yc(k)};
    case Edge::right: return {g.lx, g.yc(k)};
    }
    return {0.0, 0.0};
}

std::array<int, 2> snap_segment(const Grid2D& g, const BoundarySegment& s) {
    const double len = edge_length(g, s.edge);
    const double h = edge_spacing(g, s.edge);
    const double tol = 1e-9 * len;
    if (!(s.start >= -tol) || !(s.end <= len + tol) || !(s.start < s.end))
        throw ConfigError(std::string("segment on ") + edge_name(s.edge) + " edge [" +
                          std::to_string(s.start) + ", " + std::to_string(s.end) +
                          "] must satisfy 0 <= start < end <= edge length");
    const int n = edge_faces(g, s.edge);
    const int a = std::clamp(static_cast<int>(std::lround(s.start / h)), 0, n);
    const int b = std::clamp(static_cast<int>(std::lround(s.end / h)), 0, n);
    if (b - a < 1)
        throw ConfigError(std::string("segment on ") + edge_name(s.edge) + " edge [" +
                          std::to_string(s.start) + ", " + std::to_string(s.end) +
                          "] is shorter than one boundary face");
    return {a, b};
}

FaceMask::FaceMask(const Grid2D& g) {
    for (Edge e : all_edges) flags[static_cast<int>(e)].assign(edge_faces(g, e), 0);
}

bool FaceMask::any() const {
    for (const auto& f : flags)
        if (std::any_of(f.begin(), f.end(), [](auto b) { return b != 0; })) return true;
    return false;
}

FaceMask mask_from_segments(const Grid2D& g, const std::vector<BoundarySegment>& segs) {
    FaceMask m(g);
    for (const auto& s : segs) {
        auto [a, b] = snap_segment(g, s);
        for (int k = a; k < b; ++k) m.set(s.edge, k);
    }
    return m;
}

BoundarySpec::BoundarySpec(const Grid2D& g, double constant) : grid_(g) {
    for (Edge e : all_edges) w_[static_cast<int>(e)].assign(edge_faces(g, e), constant);
}

BoundarySpec BoundarySpec::from_function(const Grid2D& g,
                                         const std::function<double(double, double)>& w) {
    BoundarySpec b(g);
    for (Edge e : all_edges)
        for (int k = 0; k < edge_faces(g, e); ++k) {
            auto [x, y] = edge_point(g, e, k);
            b.w(e, k) = w(x, y);
        }
    return b;
}

double BoundarySpec::max_abs() const {
    double m = 0.0;
    for (const auto& v : w_)
        for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool BoundarySpec::all_finite() const {
    for (const auto& v : w_)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    return true;
}

} // namespace npns
