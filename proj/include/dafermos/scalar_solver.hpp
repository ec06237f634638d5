#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dafermos/coupling_model.hpp"
#include "dafermos/grid.hpp"

namespace dafermos {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureError : SolverError {
    using SolverError::SolverError;
};

struct ConvergenceError : SolverError {
    ConvergenceError(const std::string& what, std::vector<double> history)
        : SolverError(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

struct ScalarSolveConfig {
    double eps = 0.05;
    double p = 1.0;
    double M = 0.0;          // <= 0: Lambda + 1
    std::size_t grid_size = 0;  // 0: max(512, ceil(40 M / eps))
    double fix_tol = 1e-10;
    int max_iters = 5000;
    double relaxation = 0.5;
    int anderson_depth = 8;  // 0: plain relaxed Picard
};

// Fills the automatic M and grid size for a model.
ScalarSolveConfig resolve_config(const ScalarCouplingModel& model, ScalarSolveConfig config);

struct ScalarSolution {
    GridFunction u, v, h;
    int iterations = 0;
    double residual = 0;
    std::vector<double> residual_history;
    double tv_u = 0;
    bool monotone = false;
    double alpha = 0;  // anchor of the exponent at the last step
    double eps = 0, p = 1;
};

// h(xi) = integral_alpha^xi (zeta - lambda(u, v)) G(u, v) d zeta by cumulative trapezoid.
GridFunction exponent_h(const ScalarCouplingModel& model, const GridFunction& u_tilde, const GridFunction& v,
                        double alpha);

// Leftmost grid argmin of the antiderivative of (zeta - lambda) G, which makes the exponent nonnegative.
double exponent_anchor(const ScalarCouplingModel& model, const GridFunction& u_tilde, const GridFunction& v);

// The explicit representation map u_tilde -> u_L + (u_R - u_L) * W(xi) / W(M), W the cumulative weight.
GridFunction picard_step(const ScalarCouplingModel& model, const ScalarSolveConfig& config, const GridFunction& u_tilde,
                         const GridFunction& v, double u_L, double u_R, GridFunction* h_out = nullptr,
                         double* alpha_out = nullptr);

ScalarSolution solve_scalar(const ScalarCouplingModel& model, const ScalarSolveConfig& config, double u_L, double u_R,
                            const GridFunction* initial_guess = nullptr);

struct TraceWindowReport {
    double window_start = 0;  // (Lambda + M) / 2
    double right_deviation = 0;  // sup |u - u_R| on ((Lambda + M)/2, M]
    double left_deviation = 0;   // sup |u - u_L| on [-M, -(Lambda + M)/2)
};

TraceWindowReport trace_window_check(const ScalarSolution& solution, const ScalarCouplingModel& model, double u_L,
                                     double u_R);

bool is_monotone(const std::vector<double>& u, double u_L, double u_R, double slack = 1e-12);

}  // namespace dafermos
