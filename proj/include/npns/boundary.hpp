#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "npns/grid.hpp"

namespace npns {

enum class Edge { bottom = 0, top = 1, left = 2, right = 3 };

inline constexpr std::array<Edge, 4> all_edges{Edge::bottom, Edge::top, Edge::left, Edge::right};

const char* edge_name(Edge e);
Edge parse_edge(const std::string& s);

/// Number of boundary faces along an edge (nx for bottom/top, ny for left/right).
int edge_faces(const Grid2D& g, Edge e);
double edge_length(const Grid2D& g, Edge e);
double edge_spacing(const Grid2D& g, Edge e);
/// Interior cell index adjacent to face k of edge e.
int edge_cell(const Grid2D& g, Edge e, int k);
/// Face midpoint in physical coordinates.
std::array<double, 2> edge_point(const Grid2D& g, Edge e, int k);

/// Arc-length interval [start, end] along one edge.
struct BoundarySegment {
    Edge edge = Edge::bottom;
    double start = 0.0;
    double end = 0.0;
};

/// First and one-past-last face index covered by a segment after snapping its
/// endpoints to the nearest face boundaries. Throws ConfigError if the
/// snapped segment is empty or the segment lies outside the edge.
std::array<int, 2> snap_segment(const Grid2D& g, const BoundarySegment& s);

/// One flag per boundary face on each edge.
struct FaceMask {
    std::array<std::vector<std::uint8_t>, 4> flags;

    explicit FaceMask(const Grid2D& g);
    FaceMask() = default;

    bool operator()(Edge e, int k) const { return flags[static_cast<int>(e)][k] != 0; }
    void set(Edge e, int k, bool on = true) { flags[static_cast<int>(e)][k] = on ? 1 : 0; }
    bool any() const;
};

FaceMask mask_from_segments(const Grid2D& g, const std::vector<BoundarySegment>& segs);

/// Potential trace W sampled at the midpoints of all boundary faces.
class BoundarySpec {
public:
    BoundarySpec() = default;
    explicit BoundarySpec(const Grid2D& g, double constant = 0.0);

    static BoundarySpec from_function(const Grid2D& g,
                                      const std::function<double(double, double)>& w);

    const Grid2D& grid() const noexcept { return grid_; }
    double& w(Edge e, int k) { return w_[static_cast<int>(e)][k]; }
    double w(Edge e, int k) const { return w_[static_cast<int>(e)][k]; }
    const std::vector<double>& edge_values(Edge e) const { return w_[static_cast<int>(e)]; }

    double max_abs() const;
    bool all_finite() const;

private:
    Grid2D grid_;
    std::array<std::vector<double>, 4> w_;
};

} // namespace npns
