#pragma once

#include <cstddef>
#include <vector>

#include "dafermos/grid.hpp"

namespace dafermos {

double trapezoid(const std::vector<double>& f, double dx);

// F[0] = 0, F[k] = integral of f from x_0 to x_k.
std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double dx);

// Value at xi of the cumulative trapezoid F of f, with f interpolated linearly inside the cell.
double antiderivative_at(const std::vector<double>& F, const std::vector<double>& f, const Grid& grid, double xi);

// log(exp(a) + exp(b)), safe for -inf arguments.
double log_add(double a, double b);

// log of the trapezoid integral of exp(logf) over the whole grid.
double log_trapezoid(const std::vector<double>& logf, double dx);

// out[k] = log |integral of exp(logf) between x_anchor and x_k|; out[anchor] = -inf.
std::vector<double> log_cumulative_from(const std::vector<double>& logf, double dx, std::size_t anchor);

// Stable evaluation of out(y) = phi(y) * integral_{x_anchor}^{y} r(x) / phi(x) dx with phi = exp(log_phi),
// using the same trapezoid rule as the log-space forms. Integration proceeds outward from the anchor,
// one cell at a time, so only per-cell ratios of phi are ever exponentiated.
std::vector<double> anchored_transport(const std::vector<double>& log_phi, const std::vector<double>& r,
                                       double dx, std::size_t anchor);

}  // namespace dafermos
