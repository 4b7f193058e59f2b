#include "npns/pb1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "npns/error.hpp"

namespace npns {

namespace {

constexpr double quad_tol = 1e-10;

// expm1(x) - x, accurate for small |x|.
double expm1_minus_x(double x) {
    if (std::abs(x) < 0.1) {
        double term = x * x / 2.0, sum = 0.0;
        for (int k = 3; k <= 14; ++k) {
            sum += term;
            term *= x / k;
        }
        return sum;
    }
    return std::expm1(x) - x;
}

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// The integral from 0 to phi splits at `split`: below it the substitution
// Phi = alpha sinh(s) removes the near-singular behaviour at Phi = 0.
struct AlphaIntegrand {
    const std::vector<PB1DSpecies>& sp;
    double alpha;

    double direct(double phi) const { return 1.0 / std::sqrt(pb1d_g_excess(sp, phi) + alpha * alpha); }
    double substituted(double s) const {
        const double phi = alpha * std::sinh(s);
        return alpha * std::cosh(s) / std::sqrt(pb1d_g_excess(sp, phi) + alpha * alpha);
    }
    double integral(double lo_phi, double hi_phi, double split) const {
        double total = 0.0;
        const double a = std::min(lo_phi, split), b = std::min(hi_phi, split);
        if (b > a)
            total += adaptive_simpson([this](double s) { return substituted(s); },
                                      std::asinh(a / alpha), std::asinh(b / alpha), quad_tol);
        const double c = std::max(lo_phi, split), d = std::max(hi_phi, split);
        if (d > c) total += adaptive_simpson([this](double p) { return direct(p); }, c, d, quad_tol);
        return total;
    }
};

} // namespace

void PB1DProblem::validate() const {
    if (!(eps > 0.0)) throw ConfigError("1D PB: eps must be positive");
    if (!(h_len > 0.0)) throw ConfigError("1D PB: interval length must be positive");
    if (!(w_val > 0.0) || !std::isfinite(w_val)) throw ConfigError("1D PB: W must be positive");
    if (species.empty()) throw ConfigError("1D PB: no species");
    double neut = 0.0, scale = 0.0;
    for (const auto& s : species) {
        if (!(s.zc > 0.0)) throw ConfigError("1D PB: Z_i must be positive");
        neut += s.z / s.zc;
        scale += std::abs(s.z / s.zc);
    }
    if (!(std::abs(neut) <= 1e-12 * std::max(1.0, scale)))
        throw ConfigError("1D PB: neutrality sum z_i/Z_i = 0 violated (sum = " +
                          std::to_string(neut) + ")");
    bool convex = false;
    for (const auto& s : species) convex = convex || s.z != 0.0;
    if (!convex) throw ConfigError("1D PB: all valences are zero");
}

double pb1d_g_excess(const std::vector<PB1DSpecies>& sp, double phi) {
    // sum (e^{-z phi} - 1)/Z = sum (expm1(-z phi) + z phi)/Z - phi sum z/Z
    double s = 0.0, lin = 0.0;
    for (const auto& x : sp) {
        s += expm1_minus_x(-x.z * phi) / x.zc;
        lin += x.z / x.zc;
    }
    return std::max(0.0, s - phi * lin);
}

double pb1d_alpha_integral(const PB1DProblem& prob, double alpha) {
    const AlphaIntegrand f{prob.species, alpha};
    return f.integral(0.0, prob.w_val, 0.5 * prob.w_val);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw ConfigError("monotone cubic needs >= 2 matching samples");
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] <= 0.0) {
            m_[k] = 0.0;
        } else {
            // Weighted harmonic mean (Fritsch-Butland), keeps monotonicity.
            const double h0 = x_[k] - x_[k - 1], h1 = x_[k + 1] - x_[k];
            const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
            m_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
}

double MonotoneCubic::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] +
           (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * m_[k + 1];
}

PB1DProfile::PB1DProfile(const PB1DProblem& prob) : prob_(prob) {
    prob_.validate();
    const double target = std::sqrt(2.0 / prob_.eps) * prob_.h_len;

    double lo = -12.0, hi = 6.0;  // log10 alpha
    const double i_lo = pb1d_alpha_integral(prob_, std::pow(10.0, lo));
    const double i_hi = pb1d_alpha_integral(prob_, std::pow(10.0, hi));
    if (!(i_lo >= target && i_hi <= target)) {
        std::ostringstream os;
        os << "1D PB: alpha bracket [1e-12, 1e6] does not contain the root; integral = " << i_lo
           << " at alpha=1e-12 and " << i_hi << " at alpha=1e6, target " << target;
        throw SolverError(os.str(), std::abs(i_lo - target));
    }
    // The integral decreases in alpha.
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = pb1d_alpha_integral(prob_, std::pow(10.0, mid));
        if (val > target) lo = mid;
        else hi = mid;
    }
    alpha_ = std::pow(10.0, 0.5 * (lo + hi));

    // Tabulate P on nodes uniform in s (Phi = alpha sinh s) below W/2 and
    // uniform in Phi above, then invert by monotone cubic interpolation.
    const double w = prob_.w_val, split = 0.5 * w;
    const int n = 3000;
    std::vector<double> phis;
    const double smax = std::asinh(split / alpha_);
    for (int k = 0; k <= n; ++k) phis.push_back(alpha_ * std::sinh(smax * k / n));
    for (int k = 1; k <= n; ++k) phis.push_back(split + (w - split) * k / n);
    phis.back() = w;

    const AlphaIntegrand f{prob_.species, alpha_};
    std::vector<double> ps(phis.size(), 0.0);
    for (std::size_t k = 1; k < phis.size(); ++k)
        ps[k] = ps[k - 1] + f.integral(phis[k - 1], phis[k], split);
    // Remove duplicate abscissae that can appear when increments underflow.
    std::vector<double> px, py;
    for (std::size_t k = 0; k < ps.size(); ++k)
        if (px.empty() || ps[k] > px.back()) {
            px.push_back(ps[k]);
            py.push_back(phis[k]);
        }
    inverse_ = MonotoneCubic(std::move(px), std::move(py));
}

double PB1DProfile::p_of(double phi) const {
    const AlphaIntegrand f{prob_.species, alpha_};
    return f.integral(0.0, phi, 0.5 * prob_.w_val);
}

double PB1DProfile::operator()(double y) const {
    if (y <= 0.0) return 0.0;
    if (y >= prob_.h_len) return prob_.w_val;
    return inverse_(std::sqrt(2.0 / prob_.eps) * y);
}

std::vector<std::array<double, 2>> PB1DProfile::sample(int n_out) const {
    if (n_out < 2) throw ConfigError("1D PB: need at least two output samples");
    std::vector<std::array<double, 2>> out;
    out.reserve(n_out);
    for (int k = 0; k < n_out; ++k) {
        const double y = prob_.h_len * k / (n_out - 1);
        out.push_back({y, (*this)(y)});
    }
    return out;
}

std::vector<std::array<double, 2>> solve_pb_1d(const PB1DProblem& prob, int n_out) {
    return PB1DProfile(prob).sample(n_out);
}

} // namespace npns
