#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dafermos/coupling_model.hpp"

namespace dafermos {

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Generalized eigen data of (-xi I + A) r = mu B r, families sorted by lambda_hat.
struct SpectralData {
    Eigen::VectorXd mu;
    Eigen::MatrixXd r_hat;  // column i is r_hat_i, unit length
    Eigen::MatrixXd l_hat;  // row i is l_hat_i, with l_hat_i . B r_hat_j = delta_ij
    Eigen::VectorXd lambda_hat;
    Eigen::VectorXd d;
    double residual = 0;          // max_i |(-xi I + A) r_i - mu_i B r_i|
    double biorthogonality = 0;   // max_ij |l_i . B r_j - delta_ij|
    double condition = 0;         // condition number of the eigenvector matrix
    bool near_defective = false;
};

// Core solver on explicit matrices. If previous is given, eigenvector signs follow it.
SpectralData generalized_eigen(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double xi,
                               const SpectralData* previous = nullptr);

SpectralData solve_generalized_eigen(const SystemCouplingModel& model, const Eigen::VectorXd& u, double v, double xi,
                                     const SpectralData* previous = nullptr);

// Ordinary right/left eigenvectors of A (B = I form), normalized |r_i| = 1, l_i . r_j = delta_ij.
SpectralData hyperbolic_eigen(const Eigen::MatrixXd& A);

// Operator 2-norm.
double matrix_norm(const Eigen::MatrixXd& m);

struct EtaNu {
    double eta = 0;
    double nu = 0;
};

// eta = sup |B - I|, nu = sup |l_i . d_v(B r_j)| over tensor samples of ball x [-1, 1] x xi.
EtaNu estimate_eta_nu(const SystemCouplingModel& model, int sample_count = 64, int state_samples_per_axis = 9);

// Tensor sample of the ball of radius delta0 around the model centre (cube grid clipped to the ball).
std::vector<Eigen::VectorXd> ball_samples(const SystemCouplingModel& model, int per_axis);

struct XiDerivativeReport {
    double step = 0;
    std::vector<double> dr_norm;        // |d_xi r_hat_i|
    std::vector<double> dmu;            // d_xi mu_i
    std::vector<double> dmu_plus_one;   // |d_xi mu_i + 1|
    std::vector<double> dr_norm_half;   // same at step / 2
    std::vector<double> dmu_half;
    double richardson_change = 0;       // max change between step and step / 2
    double eta = 0;
};

XiDerivativeReport check_xi_derivatives(const SystemCouplingModel& model, const Eigen::VectorXd& u, double v,
                                        double xi, double step = 1e-5);

}  // namespace dafermos
