#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace npns {

/// Uniform cell-centered grid on the rectangle [0,lx] x [0,ly].
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;

    /// Validating constructor; throws ShapeError unless nx, ny >= 4 and lengths > 0.
    static Grid2D make(int nx, int ny, double lx = 1.0, double ly = 1.0);

    double hx() const noexcept { return lx / nx; }
    double hy() const noexcept { return ly / ny; }
    double cell_area() const noexcept { return hx() * hy(); }
    double area() const noexcept { return lx * ly; }
    int cells() const noexcept { return nx * ny; }
    int idx(int i, int j) const noexcept { return j * nx + i; }
    double xc(int i) const noexcept { return (i + 0.5) * hx(); }
    double yc(int j) const noexcept { return (j + 0.5) * hy(); }

    // Face counts of the staggered layout: x-faces are vertical, y-faces horizontal.
    int x_faces() const noexcept { return (nx + 1) * ny; }
    int y_faces() const noexcept { return nx * (ny + 1); }
    int xf(int i, int j) const noexcept { return j * (nx + 1) + i; }
    int yf(int i, int j) const noexcept { return j * nx + i; }

    bool operator==(const Grid2D&) const = default;
};

/// One value per cell center.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0) : grid_(g), v_(g.cells(), fill) {}
    ScalarField(const Grid2D& g, std::vector<double> values);

    const Grid2D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return v_.size(); }

    double& operator()(int i, int j) noexcept { return v_[grid_.idx(i, j)]; }
    double operator()(int i, int j) const noexcept { return v_[grid_.idx(i, j)]; }
    double& operator[](std::size_t k) noexcept { return v_[k]; }
    double operator[](std::size_t k) const noexcept { return v_[k]; }

    std::span<double> values() noexcept { return v_; }
    std::span<const double> values() const noexcept { return v_; }
    std::vector<double>& data() noexcept { return v_; }
    const std::vector<double>& data() const noexcept { return v_; }

    double max() const;
    double min() const;
    double max_abs() const;
    /// Midpoint-rule integral: sum of values times the cell area.
    double integral() const;
    bool all_finite() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);

    template <class F>
    static ScalarField sample(const Grid2D& g, F&& f) {
        ScalarField out(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) out(i, j) = f(g.xc(i), g.yc(j));
        return out;
    }

private:
    Grid2D grid_;
    std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Staggered face field: x-components on vertical faces ((nx+1) x ny),
/// y-components on horizontal faces (nx x (ny+1)). Used for velocities,
/// forces and fluxes alike.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const Grid2D& g)
        : grid_(g), u_(g.x_faces(), 0.0), v_(g.y_faces(), 0.0) {}

    const Grid2D& grid() const noexcept { return grid_; }

    double& u(int i, int j) noexcept { return u_[grid_.xf(i, j)]; }
    double u(int i, int j) const noexcept { return u_[grid_.xf(i, j)]; }
    double& v(int i, int j) noexcept { return v_[grid_.yf(i, j)]; }
    double v(int i, int j) const noexcept { return v_[grid_.yf(i, j)]; }

    std::vector<double>& u_data() noexcept { return u_; }
    const std::vector<double>& u_data() const noexcept { return u_; }
    std::vector<double>& v_data() noexcept { return v_; }
    const std::vector<double>& v_data() const noexcept { return v_; }

    double max_abs() const;
    bool all_finite() const;

private:
    Grid2D grid_;
    std::vector<double> u_;
    std::vector<double> v_;
};

/// Cell-centered divergence of a face field.
ScalarField divergence(const VectorField& f);

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what);

} // namespace npns
