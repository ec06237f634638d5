#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dafermos/coupling_model.hpp"
#include "dafermos/grid.hpp"
#include "dafermos/scalar_solver.hpp"
#include "dafermos/spectral.hpp"
#include "dafermos/wave_measures.hpp"

namespace dafermos {

// Raised when an iterate leaves the admissible set or a measured contraction factor reaches one.
struct SmallnessError : SolverError {
    SmallnessError(const std::string& what, std::string stage_name) : SolverError(what), stage(std::move(stage_name)) {}
    std::string stage;
    int component = -1;
    double xi = 0;
    std::vector<double> history;
};

// Coefficients of the characteristic-coefficient equations at a frozen state, on the grid.
// Row-major indexing: pi[i * N + j], sigma[i * N + j], kappa[(i * N + j) * N + k].
struct CoefficientFields {
    Grid grid;
    int N = 0;
    double eta = 0;
    std::vector<GridFunction> eta_pi;  // eta * pi, the combination entering the equations
    std::vector<GridFunction> pi;      // eta_pi / eta, or eta_pi itself when eta = 0
    std::vector<GridFunction> kappa;
    std::vector<GridFunction> sigma;
    GridFunction psi;
    std::vector<SpectralData> spectra;  // generalized eigen data per node
    std::vector<Eigen::MatrixXd> A0_inv;
    double sigma_sup = 0;
    double r_sup = 0;   // sup |r_hat_k| over nodes and families
    double A0_norm = 0; // sup |A0| over nodes

    const GridFunction& pi_at(int i, int j) const { return pi[static_cast<std::size_t>(i * N + j)]; }
    const GridFunction& sigma_at(int i, int j) const { return sigma[static_cast<std::size_t>(i * N + j)]; }
    const GridFunction& kappa_at(int i, int j, int k) const {
        return kappa[static_cast<std::size_t>((i * N + j) * N + k)];
    }
};

// u has one row per grid node.
CoefficientFields assemble_coefficients(const SystemCouplingModel& model, const VectorGridFunction& u,
                                        const GridFunction& v, const GridFunction& psi);

// Wave measures of the frozen exponents mu_i(u, v, xi) with c_k at the band centres.
struct FrozenState {
    CoefficientFields fields;
    WaveMeasureSet measures;
    std::vector<double> anchors;  // c_k
    std::vector<double> log_weight;  // log of sum_h phi_h
    double nu = 0;     // max of the model nu and the sampled sup |sigma|
    double A = 0;      // constant of the admissible correction set
    bool calibrated = false;  // envelope checks are skipped until A is set
};

FrozenState freeze(const SystemCouplingModel& model, const VectorGridFunction& u, const GridFunction& v,
                   const GridFunction& psi, double eps);

// sup_xi |theta_k| / max(sum_h phi_h, 1e-300), summed over k.
double e_norm(const FrozenState& state, const std::vector<GridFunction>& theta);

// A (eta |tau| + |tau|^2 + nu |tau|).
double envelope(const FrozenState& state, const Eigen::VectorXd& tau);

// Largest k-th component ratio |theta_k| / (envelope * sum_h phi_h); <= 1 inside the admissible set.
double envelope_ratio(const FrozenState& state, const Eigen::VectorXd& tau, const std::vector<GridFunction>& theta,
                      int* worst_k = nullptr, double* worst_xi = nullptr);

// T_k = phi_k(xi) integral_{c_k}^xi R_k / phi_k, R_k the right-hand side of the k-th coefficient equation
// evaluated at a = tau phi + theta. With check set, inputs and outputs outside the admissible set throw.
std::vector<GridFunction> correction_map(const FrozenState& state, const Eigen::VectorXd& tau,
                                         const std::vector<GridFunction>& theta, bool check = true);

// Sets A = 4 C_fit from one application of the map at theta = 0.
double calibrate_envelope(FrozenState& state, const Eigen::VectorXd& tau_probe);

struct CorrectionResult {
    std::vector<GridFunction> theta;
    int iterations = 0;
    double contraction = 0;  // largest measured ratio of successive updates
    std::vector<double> updates;
    double envelope_ratio = 0;
};

CorrectionResult solve_correction(const FrozenState& state, const Eigen::VectorXd& tau, double tol = 1e-12,
                                  int max_iters = 200);

struct StrengthMatrix {
    Eigen::MatrixXd C;         // columns integral phi_k r_hat_k
    Eigen::MatrixXd weighted;  // columns integral A0^-1 phi_k r_hat_k
    double beta = 0;           // |weighted^-1|
    double condition = 0;
};

StrengthMatrix strength_matrix(const FrozenState& state);

struct StrengthResult {
    Eigen::VectorXd tau;
    CorrectionResult correction;
    int iterations = 0;
    double contraction = 0;
    double max_correction_contraction = 0;
    double max_envelope_ratio = 0;
};

StrengthResult solve_strength(const FrozenState& state, const StrengthMatrix& C, const Eigen::VectorXd& u_L,
                              const Eigen::VectorXd& u_R, double delta, double tol = 1e-12, int max_iters = 200,
                              double inner_tol = 1e-12);

// u_L + cumulative integral of A0^-1 sum_j a_j r_hat_j.
VectorGridFunction reconstruct_u(const FrozenState& state, const Eigen::VectorXd& tau,
                                 const std::vector<GridFunction>& theta, const Eigen::VectorXd& u_L);

struct SystemSolveConfig {
    double eps = 0.05;
    double p = 1.0;
    double M = 0.0;             // <= 0: model M
    std::size_t grid_size = 0;  // 0: max(512, ceil(40 M / eps))
    double outer_tol = 1e-10;   // sup-norm update relative to |u_R - u_L|
    int max_outer = 2000;
    double relaxation = 1.0;
    double strength_tol = 1e-12;
    double correction_tol = 1e-12;
    int max_inner = 200;
    double A = 0;         // <= 0: four times the probed constant
    double delta = 0;     // <= 0: min(delta0 / 4, 1 / (4 C_fit (eta + nu + 1)))
    double varsigma = 0;  // <= 0: largest of delta0 / 2^k passing the separation checks around u_L
    bool enforce_smallness = true;
};

struct SystemSolveState {
    VectorGridFunction u;
    GridFunction v, psi;
    Eigen::VectorXd tau;
    std::vector<GridFunction> theta;
    std::vector<GridFunction> a;
    WaveMeasureSet measures;
    double weighted_norm_theta = 0;
    double boundary_residual = 0;

    int outer_iterations = 0;
    std::vector<double> outer_history;
    std::vector<double> correction_contractions;  // one per inner solve
    std::vector<double> strength_contractions;    // one per outer iteration
    double max_envelope_ratio = 0;
    double A = 0, delta = 0, r = 0, varsigma = 0, beta = 0, A0_norm = 0, R = 0, nu = 0, eta = 0;
    double tv = 0;
    double sup_eps_u_xi = 0;
    double decomposition_residual = 0;
    double ode_residual = 0;
    double eps = 0, p = 1;
};

SystemSolveState solve_system(const SystemCouplingModel& model, const SystemSolveConfig& config,
                              const Eigen::VectorXd& u_L, const Eigen::VectorXd& u_R);

// Largest radius delta0 / 2^k (k < 8) whose ball around u_L passes the eigenvalue separation checks.
double choose_varsigma(const SystemCouplingModel& model, const Eigen::VectorXd& u_L);

double vector_total_variation(const VectorGridFunction& u);

}  // namespace dafermos
