#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dafermos/quadrature.hpp"

using namespace dafermos;

TEST(Quadrature, TrapezoidIsExactForLinear) {
    const Grid g(1.0, 11);
    std::vector<double> f;
    for (double x : g.points()) f.push_back(3.0 * x + 2.0);
    EXPECT_NEAR(trapezoid(f, g.dx), 4.0, 1e-14);
    const auto F = cumulative_trapezoid(f, g.dx);
    EXPECT_EQ(F.front(), 0.0);
    EXPECT_NEAR(F.back(), 4.0, 1e-14);
}

TEST(Quadrature, LogAddHandlesNegativeInfinity) {
    const double ninf = -std::numeric_limits<double>::infinity();
    EXPECT_EQ(log_add(ninf, ninf), ninf);
    EXPECT_DOUBLE_EQ(log_add(ninf, 2.0), 2.0);
    EXPECT_NEAR(log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
}

TEST(Quadrature, LogTrapezoidMatchesLinearSpace) {
    const Grid g(2.0, 401);
    std::vector<double> logf, f;
    for (double x : g.points()) {
        logf.push_back(-x * x);
        f.push_back(std::exp(-x * x));
    }
    EXPECT_NEAR(std::exp(log_trapezoid(logf, g.dx)), trapezoid(f, g.dx), 1e-14);
    // shifting the log-integrand far below underflow keeps the relative value
    for (double& v : logf) v -= 2000.0;
    EXPECT_NEAR(log_trapezoid(logf, g.dx) + 2000.0, std::log(trapezoid(f, g.dx)), 1e-12);
}

TEST(Quadrature, LogCumulativeFromAnchor) {
    const Grid g(1.0, 201);
    std::vector<double> logf(g.n, 0.0);  // f = 1
    const std::size_t anchor = 100;
    const auto C = log_cumulative_from(logf, g.dx, anchor);
    EXPECT_EQ(C[anchor], -std::numeric_limits<double>::infinity());
    EXPECT_NEAR(std::exp(C.back()), 1.0, 1e-13);
    EXPECT_NEAR(std::exp(C.front()), 1.0, 1e-13);
}

TEST(Quadrature, AnchoredTransportWithFlatWeightIsPlainIntegral) {
    const Grid g(1.0, 101);
    std::vector<double> log_phi(g.n, 0.0), r(g.n, 2.0);
    const auto out = anchored_transport(log_phi, r, g.dx, 50);
    EXPECT_NEAR(out[50], 0.0, 1e-15);
    EXPECT_NEAR(out.back(), 2.0, 1e-13);
    EXPECT_NEAR(out.front(), -2.0, 1e-13);
}
