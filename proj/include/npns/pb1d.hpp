#pragma once

#include <array>
#include <vector>

namespace npns {

struct PB1DSpecies {
    double z = 0.0;
    double zc = 1.0;  // Z_i > 0
};

/// -eps Phi'' + G'(Phi) = 0 on [0, H], Phi(0) = 0, Phi(H) = W > 0, with
/// G(Phi) = sum Z_i^{-1} e^{-z_i Phi} and sum z_i / Z_i = 0.
struct PB1DProblem {
    double eps = 1.0;
    double h_len = 1.0;
    double w_val = 1.0;
    std::vector<PB1DSpecies> species;

    void validate() const;
};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    /// x strictly increasing, y monotone.
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;

private:
    std::vector<double> x_, y_, m_;
};

/// The first-integral construction: alpha solves
///   int_0^W dPhi / sqrt(G(Phi) - G(0) + alpha^2) = sqrt(2/eps) H,
/// and Phi*(y) = P^{-1}(sqrt(2/eps) y) with P the same integral up to Phi.
class PB1DProfile {
public:
    explicit PB1DProfile(const PB1DProblem& prob);

    double alpha() const noexcept { return alpha_; }
    /// Phi*(y) for y in [0, H].
    double operator()(double y) const;
    /// n_out equally spaced samples (y, Phi*(y)) including both endpoints.
    std::vector<std::array<double, 2>> sample(int n_out) const;

    /// P(Phi) for the solved alpha, by quadrature.
    double p_of(double phi) const;

private:
    PB1DProblem prob_;
    double alpha_ = 0.0;
    MonotoneCubic inverse_;
};

/// G(Phi) - G(0), evaluated without cancellation for small Phi.
double pb1d_g_excess(const std::vector<PB1DSpecies>& sp, double phi);

/// Value of the alpha-integral; exposed for tests and the bracket diagnostics.
double pb1d_alpha_integral(const PB1DProblem& prob, double alpha);

std::vector<std::array<double, 2>> solve_pb_1d(const PB1DProblem& prob, int n_out);

} // namespace npns
