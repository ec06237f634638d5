#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace dafermos {

// Uniform grid on [-M, M] with n nodes, endpoints included.
struct Grid {
    double M = 1.0;
    std::size_t n = 2;
    double dx = 1.0;

    Grid() = default;
    Grid(double half_width, std::size_t nodes);

    double x(std::size_t k) const { return -M + static_cast<double>(k) * dx; }
    std::vector<double> points() const;
    // Index of the node closest to xi (clamped to the grid).
    std::size_t nearest(double xi) const;
    // Largest k with x(k) <= xi, clamped to [0, n-2].
    std::size_t cell(double xi) const;
};

// Sampled real function of xi.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.n, fill) {}
    GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    double at(double xi) const;  // piecewise-linear interpolation
};

// Sampled vector function of xi; row k holds the value at node k.
struct VectorGridFunction {
    Grid grid;
    Eigen::MatrixXd values;

    VectorGridFunction() = default;
    VectorGridFunction(const Grid& g, int components)
        : grid(g), values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n), components)) {}

    int components() const { return static_cast<int>(values.cols()); }
    Eigen::VectorXd row(std::size_t k) const { return values.row(static_cast<Eigen::Index>(k)).transpose(); }
    GridFunction component(int i) const;
};

// Resample a grid function onto another grid by linear interpolation.
GridFunction resample(const GridFunction& f, const Grid& target);

double total_variation(const std::vector<double>& values);

// L1 distance on [-M, M]; g is interpolated onto the grid of f.
double l1_distance(const GridFunction& f, const GridFunction& g);

}  // namespace dafermos
