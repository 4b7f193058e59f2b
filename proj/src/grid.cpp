#include "npns/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "npns/error.hpp"

namespace npns {

Grid2D Grid2D::make(int nx, int ny, double lx, double ly) {
    if (nx < 4 || ny < 4)
        throw ShapeError("grid needs at least 4 cells per direction, got " + std::to_string(nx) +
                         "x" + std::to_string(ny));
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw ShapeError("grid lengths must be positive and finite");
    return Grid2D{nx, ny, lx, ly};
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
    if (!(a == b))
        throw ShapeError(std::string("grid mismatch in ") + what + ": " + std::to_string(a.nx) +
                         "x" + std::to_string(a.ny) + " vs " + std::to_string(b.nx) + "x" +
                         std::to_string(b.ny));
}

ScalarField::ScalarField(const Grid2D& g, std::vector<double> values)
    : grid_(g), v_(std::move(values)) {
    if (v_.size() != static_cast<std::size_t>(g.cells()))
        throw ShapeError("scalar field has " + std::to_string(v_.size()) + " values, grid has " +
                         std::to_string(g.cells()) + " cells");
}

double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

double ScalarField::integral() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s * grid_.cell_area();
}

bool ScalarField::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "field addition");
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "field subtraction");
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double VectorField::max_abs() const {
    double m = 0.0;
    for (double x : u_) m = std::max(m, std::abs(x));
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

bool VectorField::all_finite() const {
    auto fin = [](double x) { return std::isfinite(x); };
    return std::all_of(u_.begin(), u_.end(), fin) && std::all_of(v_.begin(), v_.end(), fin);
}

ScalarField divergence(const VectorField& f) {
    const Grid2D& g = f.grid();
    ScalarField div(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            div(i, j) = (f.u(i + 1, j) - f.u(i, j)) / g.hx() + (f.v(i, j + 1) - f.v(i, j)) / g.hy();
    return div;
}

} // namespace npns
