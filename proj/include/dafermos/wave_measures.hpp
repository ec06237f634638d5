#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dafermos/grid.hpp"

namespace dafermos {

struct WaveMeasureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// h(x) = d(x) (lam(x) - x) with d in [d_min, d_max] and lam in [lam_min, lam_max].
struct ClassLFunction {
    std::function<double(double)> h;
    double d_min = 1, d_max = 1;
    double lam_min = 0, lam_max = 0;
    double M = 1;
};

enum class TieBreak { Leftmost, Rightmost };

// Minimizer of g(x) = -integral h over [-M, M]: grid scan, then bisection on the sign change of h.
double find_rho(const ClassLFunction& f, std::size_t scan_points = 4097, TieBreak tie = TieBreak::Leftmost);

// Same search on a sampled exponent derivative.
double find_rho(const GridFunction& mu, TieBreak tie = TieBreak::Leftmost);

struct WaveMeasure {
    GridFunction mu;
    GridFunction g;              // -integral_rho^x mu
    double rho = 0;
    double log_mass = 0;         // log of integral exp(-g / eps)
    std::vector<double> log_phi; // log phi_star
    std::vector<double> phi;     // phi_star, may underflow to 0
    double mass() const;
};

struct WaveMeasureSet {
    Grid grid;
    double eps = 0;
    std::vector<WaveMeasure> families;
    std::size_t size() const { return families.size(); }
};

// phi_star_i = exp(-g_i / eps) / I_i for each sampled mu_i.
WaveMeasureSet build_phi_star(const std::vector<GridFunction>& mu, double eps);

// log phi(y, x; h) = (1 / eps) integral_y^x h, with h sampled on a grid.
double log_phi_ratio(double y, double x, const GridFunction& h, double eps);

// A coefficient evaluated by the two algebraically equivalent forms.
struct Coefficient {
    std::vector<double> value;        // primary form
    std::vector<double> alternate;    // second form
    double max_relative_gap = 0;      // where both magnitudes exceed 1e-300
    std::size_t anchor = 0;           // grid index used for c_i
};

// J_{j->i}(y) = phi_i(y) integral_{c_i}^y phi_j / phi_i.
Coefficient compute_J(const WaveMeasureSet& set, int j, int i, double c_i);
// F_{j,k->i}(y) = phi_i(y) integral_{c_i}^y phi_j phi_k / phi_i.
Coefficient compute_F(const WaveMeasureSet& set, int j, int k, int i, double c_i);
// J^psi_{j->i}(y) = phi_i(y) integral_{c_i}^y psi phi_j / phi_i, psi >= 0.
Coefficient compute_J_psi(const WaveMeasureSet& set, const GridFunction& psi, int j, int i, double c_i);

struct LadderPoint {
    WaveMeasureSet measures;
    GridFunction psi;
};

struct BandInfo {
    std::vector<double> low, high;  // speed bands per family
    std::vector<double> d_min;      // lower bound of the class-L factor per family
};

struct FittedBound {
    std::string name;
    std::vector<double> per_eps;  // sup ratio or fitted constant at each ladder point
    double fitted = 0;            // slope, decay constant or spread, depending on the bound
    bool passed = false;
    std::string verdict;
};

struct BoundsReport {
    std::vector<double> eps;
    std::vector<FittedBound> bounds;
    bool all_passed() const;
    const FittedBound* find(const std::string& name) const;
};

// Fits the constants of the wave-coefficient estimates along an eps ladder (ordered as given).
BoundsReport verify_bounds(const std::vector<LadderPoint>& ladder, const BandInfo& bands);

// Least squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dafermos
