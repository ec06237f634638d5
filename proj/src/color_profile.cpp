#include "dafermos/color_profile.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dafermos {

ColorProfile::ColorProfile(double eps_, double p_, double M_) : eps(eps_), p(p_), M(M_) {
    if (!(eps > 0.0) || !(p > 0.0) || !(M > 0.0))
        throw std::invalid_argument("color profile needs eps, p, M > 0");
    const double s = width();
    normalization = s * std::sqrt(2.0 * std::numbers::pi) * std::erf(M / (s * std::numbers::sqrt2));
}

double ColorProfile::width() const { return std::pow(eps, 0.5 * p); }

// With a = sqrt(2) eps^(p/2) the partial Gaussian masses reduce to v = erf(xi/a) / erf(M/a).
// The erfc branch keeps relative accuracy of 1 - |v| near the window edges.
double evaluate_v(const ColorProfile& profile, double xi) {
    const double a = profile.width() * std::numbers::sqrt2;
    const double edge = std::erf(profile.M / a);
    if (xi >= profile.M) return 1.0;
    if (xi <= -profile.M) return -1.0;
    const double t = std::abs(xi) / a;
    double v;
    if (t < 0.5) {
        v = std::erf(t) / edge;
    } else {
        v = 1.0 - (std::erfc(t) - std::erfc(profile.M / a)) / edge;
    }
    return xi < 0.0 ? -v : v;
}

double evaluate_psi(const ColorProfile& profile, double xi) {
    const double s2 = std::pow(profile.eps, profile.p);
    return 2.0 * std::exp(-xi * xi / (2.0 * s2)) / profile.normalization;
}

double sgn_deviation(const ColorProfile& profile, double c) {
    if (!(c >= 0.0) || !(c < profile.M)) throw std::invalid_argument("sgn_deviation needs 0 <= c < M");
    // v is odd and increasing, so the sup over c <= |xi| <= M is attained at |xi| = c.
    if (c == 0.0) return 1.0;
    const double a = profile.width() * std::numbers::sqrt2;
    return (std::erfc(c / a) - std::erfc(profile.M / a)) / std::erf(profile.M / a);
}

double invert_v(const ColorProfile& profile, double target, double tol) {
    if (!(target > -1.0 && target < 1.0)) throw std::invalid_argument("invert_v target must be in (-1, 1)");
    double lo = -profile.M, hi = profile.M;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (evaluate_v(profile, mid) < target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

GridFunction sample_v(const ColorProfile& profile, const Grid& grid) {
    GridFunction f(grid);
    for (std::size_t k = 0; k < grid.n; ++k) f[k] = evaluate_v(profile, grid.x(k));
    f[0] = -1.0;
    f[grid.n - 1] = 1.0;
    return f;
}

GridFunction sample_psi(const ColorProfile& profile, const Grid& grid) {
    GridFunction f(grid);
    for (std::size_t k = 0; k < grid.n; ++k) f[k] = evaluate_psi(profile, grid.x(k));
    return f;
}

}  // namespace dafermos
