#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dafermos/coupling_model.hpp"
#include "dafermos/grid.hpp"
#include "dafermos/scalar_solver.hpp"

namespace dafermos {

enum class Side { Minus, Plus };
const char* side_name(Side side);

// phi(x) = (1 - s^2)^4 with s = (x - center) / radius, zero outside |s| < 1.
struct BumpTest {
    double center = 0;
    double radius = 1;
    double value(double x) const;
    double derivative(double x) const;
};

struct TestSet {
    Side side = Side::Plus;
    double exclusion = 0;  // supports stay in exclusion <= |xi| <= M
    std::vector<BumpTest> bumps;
    std::string description;
};

// count bumps on the half-line, radius (b - a) / (count + 1), centres a + (k + 1) radius.
TestSet make_test_set(Side side, double exclusion, double M, int count = 12);

// max over the set of |integral w (xi phi)' - f(w) phi'|, w = gamma(u) of the side's half-model.
double weak_conservation_residual(const ScalarSolution& solution, const ScalarCouplingModel& model, Side side,
                                  const TestSet& tests);

struct EntropyPair {
    std::string name;
    RealFn eta;  // in the conserved variable
    RealFn q;
};

// |w - k| with q = sgn(w - k) (f(w) - f(k)) for the given half-model flux.
EntropyPair kruzhkov_entropy(const HalfModel& half, double k);

// max over the set of integral eta(w) (xi phi)' - q(w) phi'; admissible solutions give values <= 0
// up to viscous terms. Throws std::invalid_argument if eta is not convex on the solution range.
double weak_entropy_residual(const ScalarSolution& solution, const ScalarCouplingModel& model, Side side,
                             const EntropyPair& entropy, const TestSet& tests);

struct EntropyResidual {
    Side side;
    double k;
    double value;
};

struct WeakResidualReport {
    std::string test_functions;
    double conservation_residual_minus = 0;
    double conservation_residual_plus = 0;
    std::vector<EntropyResidual> entropy_residuals;
    double max_entropy_residual = 0;
};

// Conservation residual on both half-lines and Kruzhkov residuals for k_count values of k
// equispaced over the data range in each side's conserved variable. Test functions avoid
// |xi| < exclusion; exclusion <= 0 uses 3 eps^(p/2). Pass one fixed value to compare along a ladder.
WeakResidualReport weak_residual_report(const ScalarSolution& solution, const ScalarCouplingModel& model, double u_L,
                                        double u_R, int k_count = 9, double exclusion = 0.0);

// Sampled check of grad^2 eta B0 >= 0 (symmetric part) over the model ball and v in [-1, 1].
bool entropy_compatible(const SystemCouplingModel& model, const MatrixField& hessian, int samples = 16,
                        double* worst_eigenvalue = nullptr);

enum class WaveKind { Shock, Contact, Rarefaction };
const char* wave_kind_name(WaveKind kind);

struct Wave {
    WaveKind kind;
    double speed_left, speed_right;  // equal for discontinuities
    double u_left, u_right;
};

struct RiemannFan {
    double u_L = 0, u_R = 0;
    std::vector<Wave> waves;  // ordered by speed
    RealFn flux, dflux;
    double at(double xi) const;
};

// Entropy solution by the convex hull construction on sampled flux values.
RiemannFan exact_scalar_riemann(const RealFn& flux, double u_L, double u_R, const RealFn& dflux = {},
                                int samples = 2001);

struct FanCheck {
    double rankine_hugoniot = 0;     // max |s [u] - [f]| over discontinuities
    double oleinik_violation = 0;    // max chord-condition violation
    bool ok = false;
};

FanCheck check_fan(const RiemannFan& fan, int samples = 401);

struct ContinuationReport {
    std::vector<double> eps;
    std::vector<ScalarSolution> solutions;
    std::vector<double> l1_distances;  // between consecutive ladder points, on the finer grid
    std::vector<double> tv;
    std::vector<std::string> failures;  // stage failures with their eps
    bool distances_decreasing = false;
    bool pointwise_cauchy = false;
    bool tv_bounded = false;  // tv <= |u_R - u_L| + 1e-6 at every point
    std::string verdict;
};

// Solves along a strictly decreasing ladder, warm-starting each point from the previous one.
ContinuationReport epsilon_continuation(const ScalarCouplingModel& model, const ScalarSolveConfig& config, double u_L,
                                        double u_R, const std::vector<double>& eps_ladder);

struct TraceReport {
    std::vector<double> eps, left, right;
    double left_limit = 0, right_limit = 0, gap = 0;
    bool agree = false;
    bool weak_condition_checked = false;
    bool weak_condition_ok = false;
    double left_set_distance = 0, right_set_distance = 0;
    std::string verdict;
};

// One-sided linear fits on [5, 10] eps^(p/2) from the interface, Richardson-extrapolated in eps^(p/2).
TraceReport interface_trace_report(const std::vector<ScalarSolution>& ladder, const ScalarCouplingModel& model,
                                   double tol = 1e-2);

// Distance of trace from the admissible trace sets: the 0+ traces of the right half-model Riemann
// problems from b, and the 0- traces of the left half-model problems into b.
double trace_set_distance(const ScalarCouplingModel& model, Side side, double b, double trace, int samples = 401);

}  // namespace dafermos
