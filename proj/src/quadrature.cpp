#include "dafermos/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dafermos {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Grid::Grid(double half_width, std::size_t nodes) : M(half_width), n(nodes) {
    if (!(half_width > 0.0)) throw std::invalid_argument("grid half-width must be positive");
    if (nodes < 2) throw std::invalid_argument("grid needs at least two nodes");
    dx = 2.0 * M / static_cast<double>(n - 1);
}

std::vector<double> Grid::points() const {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = x(k);
    p.back() = M;
    return p;
}

std::size_t Grid::nearest(double xi) const {
    double s = std::round((xi + M) / dx);
    if (s <= 0.0) return 0;
    if (s >= static_cast<double>(n - 1)) return n - 1;
    return static_cast<std::size_t>(s);
}

std::size_t Grid::cell(double xi) const {
    double s = std::floor((xi + M) / dx);
    if (s <= 0.0) return 0;
    if (s >= static_cast<double>(n - 2)) return n - 2;
    return static_cast<std::size_t>(s);
}

double GridFunction::at(double xi) const {
    if (xi <= -grid.M) return values.front();
    if (xi >= grid.M) return values.back();
    std::size_t k = grid.cell(xi);
    double t = (xi - grid.x(k)) / grid.dx;
    t = std::clamp(t, 0.0, 1.0);
    return (1.0 - t) * values[k] + t * values[k + 1];
}

GridFunction VectorGridFunction::component(int i) const {
    GridFunction f(grid);
    for (std::size_t k = 0; k < grid.n; ++k) f[k] = values(static_cast<Eigen::Index>(k), i);
    return f;
}

GridFunction resample(const GridFunction& f, const Grid& target) {
    GridFunction out(target);
    for (std::size_t k = 0; k < target.n; ++k) out[k] = f.at(target.x(k));
    return out;
}

double total_variation(const std::vector<double>& values) {
    double tv = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) tv += std::abs(values[k] - values[k - 1]);
    return tv;
}

double l1_distance(const GridFunction& f, const GridFunction& g) {
    std::vector<double> diff(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) diff[k] = std::abs(f[k] - g.at(f.grid.x(k)));
    return trapezoid(diff, f.grid.dx);
}

double trapezoid(const std::vector<double>& f, double dx) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
    return s * dx;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double dx) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * dx * (f[k - 1] + f[k]);
    return out;
}

double antiderivative_at(const std::vector<double>& F, const std::vector<double>& f, const Grid& grid, double xi) {
    const std::size_t k = grid.cell(xi);
    const double t = std::clamp((xi - grid.x(k)) / grid.dx, 0.0, 1.0);
    const double f_xi = (1.0 - t) * f[k] + t * f[k + 1];
    return F[k] + 0.5 * t * grid.dx * (f[k] + f_xi);
}

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

double log_trapezoid(const std::vector<double>& logf, double dx) {
    if (logf.size() < 2) return kNegInf;
    double acc = kNegInf;
    const double lh = std::log(0.5 * dx);
    for (std::size_t k = 1; k < logf.size(); ++k) acc = log_add(acc, lh + log_add(logf[k - 1], logf[k]));
    return acc;
}

std::vector<double> log_cumulative_from(const std::vector<double>& logf, double dx, std::size_t anchor) {
    const std::size_t n = logf.size();
    if (anchor >= n) throw std::out_of_range("anchor outside grid");
    std::vector<double> out(n, kNegInf);
    const double lh = std::log(0.5 * dx);
    for (std::size_t k = anchor + 1; k < n; ++k) out[k] = log_add(out[k - 1], lh + log_add(logf[k - 1], logf[k]));
    for (std::size_t k = anchor; k-- > 0;) out[k] = log_add(out[k + 1], lh + log_add(logf[k], logf[k + 1]));
    return out;
}

std::vector<double> anchored_transport(const std::vector<double>& log_phi, const std::vector<double>& r,
                                       double dx, std::size_t anchor) {
    const std::size_t n = log_phi.size();
    if (anchor >= n) throw std::out_of_range("anchor outside grid");
    std::vector<double> out(n, 0.0);
    // Moving right: T[k] = ratio * T[k-1] + dx/2 * (ratio * r[k-1] + r[k]), ratio = phi[k] / phi[k-1].
    for (std::size_t k = anchor + 1; k < n; ++k) {
        double ratio = std::exp(log_phi[k] - log_phi[k - 1]);
        out[k] = ratio * out[k - 1] + 0.5 * dx * (ratio * r[k - 1] + r[k]);
    }
    // Moving left the integral changes sign.
    for (std::size_t k = anchor; k-- > 0;) {
        double ratio = std::exp(log_phi[k] - log_phi[k + 1]);
        out[k] = ratio * out[k + 1] - 0.5 * dx * (ratio * r[k + 1] + r[k]);
    }
    return out;
}

}  // namespace dafermos
