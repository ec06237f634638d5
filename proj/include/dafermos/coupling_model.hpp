#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dafermos {

using RealFn = std::function<double(double)>;
using RealField = std::function<double(double, double)>;  // (u, v)
using MatrixField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)>;

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

// Data of one half-model: gamma maps the solver variable u to the conserved variable,
// flux is the half-model flux in the conserved variable. Empty derivatives are finite-differenced.
struct HalfModel {
    RealFn gamma;
    RealFn flux;
    RealFn dgamma;
    RealFn dflux;
};

// Weight of the v = +1 endpoint as a function of v; must satisfy w(-1) = 0 and w(1) = 1.
using BlendWeight = std::function<double(double)>;
BlendWeight affine_blend();

struct ScalarModelOptions {
    BlendWeight blend;           // default: affine in v
    RealField B0;                // default: B0 = 1
    int samples_per_axis = 64;
};

struct ScalarCouplingModel {
    RealField A0, A1, B0;
    HalfModel minus, plus;
    double c1 = 0, c2 = 0, c3 = 0;
    double omega0 = 0, omega1 = 0;
    double Lambda = 0;
    Interval u_domain;
    int samples_per_axis = 64;

    double speed(double u, double v) const { return A1(u, v) / A0(u, v); }
    double weight(double u, double v) const { return A0(u, v) / B0(u, v); }
};

// A0(u, +-1) = gamma_+-'(u), A1(u, +-1) = (f_+- o gamma_+-)'(u), blended in v.
ScalarCouplingModel build_scalar_model(const HalfModel& minus, const HalfModel& plus, Interval u_domain,
                                       const ScalarModelOptions& options = {});

struct SystemCouplingModel {
    int N = 1;
    MatrixField A0, A1, B0;
    Eigen::VectorXd center;  // the ball B(delta0) is centred here
    int m = 0;               // resonant family (0-based)
    double delta0 = 0;
    std::vector<double> lam_low, lam_high;
    double eta = 0, nu = 0;
    double M = 1;
    std::string name;

    Eigen::MatrixXd A(const Eigen::VectorXd& u, double v) const;  // A1 A0^-1
    Eigen::MatrixXd B(const Eigen::VectorXd& u, double v) const;  // B0 A0^-1
};

struct SystemModelOptions {
    double delta0 = 0;       // <= 0: a quarter of the smallest eigenvalue gap at (center, v = 0)
    double M = 0;            // <= 0: largest band edge in absolute value plus one
    int samples_per_axis = 64;
    int state_samples_per_axis = 9;  // per state component inside the ball
    std::vector<double> lam_low, lam_high;  // empty: sampled band edges
};

// Fills delta0, the bands, eta, nu and M by sampling.
SystemCouplingModel finalize_system_model(int N, MatrixField A0, MatrixField A1, MatrixField B0,
                                          const Eigen::VectorXd& center, const SystemModelOptions& options = {});

struct PressureLaw {
    RealFn p;
    RealFn dp;
};

// p-system in (tau, w): A0 = B0 = I, A = [[0, -1], [P'(tau, v), 0]] with P' the affine blend of p_-' and p_+'.
SystemCouplingModel build_p_system_model(const PressureLaw& p_minus, const PressureLaw& p_plus, Interval tau_domain,
                                         const SystemModelOptions& options = {});

// The N = 1 view of a scalar model with A0, A1, B0 as 1x1 matrices.
SystemCouplingModel scalar_as_system(const ScalarCouplingModel& model, double center);

struct HypothesisCheck {
    std::string name;
    double value = 0;   // extremal sampled value
    double bound = 0;   // bound it is compared against
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_passed() const;
    const HypothesisCheck* find(const std::string& name) const;
};

ValidationReport validate_hypotheses(const ScalarCouplingModel& model, int sample_count = 64);
ValidationReport validate_hypotheses(const SystemCouplingModel& model, int sample_count = 16);

// Central-difference derivative with a step scaled to |x|.
double central_difference(const RealFn& f, double x);

}  // namespace dafermos
