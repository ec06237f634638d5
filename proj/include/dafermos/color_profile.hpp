#pragma once

#include "dafermos/grid.hpp"

namespace dafermos {

// Closed-form color function v(xi) = -1 + 2 * (Gaussian mass up to xi) / (Gaussian mass on [-M, M]),
// with Gaussian weight exp(-x^2 / (2 eps^p)), and its derivative psi = v'.
struct ColorProfile {
    double eps = 0.1;
    double p = 1.0;
    double M = 1.0;
    double normalization = 0.0;  // integral of exp(-x^2 / 2 eps^p) over [-M, M]

    ColorProfile(double eps, double p, double M);

    double width() const;  // eps^(p/2)
};

double evaluate_v(const ColorProfile& profile, double xi);
double evaluate_psi(const ColorProfile& profile, double xi);

// sup over c <= |xi| <= M of |v(xi) - sgn(xi)|.
double sgn_deviation(const ColorProfile& profile, double c);

// Inverse of evaluate_v by bisection; target must lie in (-1, 1).
double invert_v(const ColorProfile& profile, double target, double tol = 1e-13);

GridFunction sample_v(const ColorProfile& profile, const Grid& grid);
GridFunction sample_psi(const ColorProfile& profile, const Grid& grid);

}  // namespace dafermos
