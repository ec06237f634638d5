#include "dafermos/scalar_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "dafermos/color_profile.hpp"
#include "dafermos/quadrature.hpp"

namespace dafermos {

namespace {

std::vector<double> exponent_integrand(const ScalarCouplingModel& model, const GridFunction& u_tilde,
                                       const GridFunction& v) {
    const Grid& g = u_tilde.grid;
    const double lo = model.u_domain.lo, hi = model.u_domain.hi;
    const double slack = 1e-10 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    std::vector<double> q(g.n);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double u = u_tilde[k];
        if (u < lo - slack || u > hi + slack) {
            std::ostringstream os;
            os << "state " << u << " left the domain [" << lo << ", " << hi << "] at xi = " << g.x(k);
            throw SolverError(os.str());
        }
        q[k] = (g.x(k) - model.speed(u, v[k])) * model.weight(u, v[k]);
    }
    return q;
}

}  // namespace

ScalarSolveConfig resolve_config(const ScalarCouplingModel& model, ScalarSolveConfig config) {
    if (!(config.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(config.p > 0.0)) throw std::invalid_argument("p must be positive");
    if (config.M <= 0.0) config.M = model.Lambda + 1.0;
    if (!(config.M > model.Lambda)) {
        std::ostringstream os;
        os << "M = " << config.M << " must exceed the speed bound Lambda = " << model.Lambda;
        throw std::invalid_argument(os.str());
    }
    if (config.grid_size == 0)
        config.grid_size = std::max<std::size_t>(512, static_cast<std::size_t>(std::ceil(40.0 * config.M / config.eps)));
    if (config.grid_size < 64) throw std::invalid_argument("grid_size must be at least 64");
    if (!(config.fix_tol > 0.0)) throw std::invalid_argument("fix_tol must be positive");
    if (!(config.relaxation > 0.0 && config.relaxation <= 1.0)) throw std::invalid_argument("relaxation must be in (0, 1]");
    return config;
}

GridFunction exponent_h(const ScalarCouplingModel& model, const GridFunction& u_tilde, const GridFunction& v,
                        double alpha) {
    const Grid& g = u_tilde.grid;
    const auto q = exponent_integrand(model, u_tilde, v);
    const auto Q = cumulative_trapezoid(q, g.dx);
    const double Qa = antiderivative_at(Q, q, g, alpha);
    GridFunction h(g);
    for (std::size_t k = 0; k < g.n; ++k) h[k] = Q[k] - Qa;
    return h;
}

double exponent_anchor(const ScalarCouplingModel& model, const GridFunction& u_tilde, const GridFunction& v) {
    const auto q = exponent_integrand(model, u_tilde, v);
    const auto Q = cumulative_trapezoid(q, u_tilde.grid.dx);
    const auto it = std::min_element(Q.begin(), Q.end());  // first minimum: leftmost tie-break
    return u_tilde.grid.x(static_cast<std::size_t>(it - Q.begin()));
}

GridFunction picard_step(const ScalarCouplingModel& model, const ScalarSolveConfig& config, const GridFunction& u_tilde,
                         const GridFunction& v, double u_L, double u_R, GridFunction* h_out, double* alpha_out) {
    const Grid& g = u_tilde.grid;
    const double alpha = exponent_anchor(model, u_tilde, v);
    GridFunction h = exponent_h(model, u_tilde, v, alpha);

    std::vector<double> logw(g.n);
    for (std::size_t k = 0; k < g.n; ++k) logw[k] = -h[k] / config.eps - std::log(model.B0(u_tilde[k], v[k]));
    const auto logW = log_cumulative_from(logw, g.dx, 0);
    const double total = logW.back();
    if (!std::isfinite(total)) throw QuadratureError("weight integral underflowed; grid too coarse for this eps");

    GridFunction out(g);
    const double jump = u_R - u_L;
    for (std::size_t k = 0; k < g.n; ++k) out[k] = u_L + jump * std::exp(logW[k] - total);
    out[0] = u_L;
    out[g.n - 1] = u_R;
    if (h_out) *h_out = std::move(h);
    if (alpha_out) *alpha_out = alpha;
    return out;
}

bool is_monotone(const std::vector<double>& u, double u_L, double u_R, double slack) {
    const double dir = u_R >= u_L ? 1.0 : -1.0;
    for (std::size_t k = 1; k < u.size(); ++k)
        if (dir * (u[k] - u[k - 1]) < -slack) return false;
    return true;
}

ScalarSolution solve_scalar(const ScalarCouplingModel& model, const ScalarSolveConfig& config_in, double u_L,
                            double u_R, const GridFunction* initial_guess) {
    const ScalarSolveConfig config = resolve_config(model, config_in);
    const Grid grid(config.M, config.grid_size);
    const ColorProfile color(config.eps, config.p, config.M);

    ScalarSolution sol;
    sol.eps = config.eps;
    sol.p = config.p;
    sol.v = sample_v(color, grid);
    const double jump = u_R - u_L;

    GridFunction u(grid);
    if (initial_guess) {
        u = resample(*initial_guess, grid);
        u[0] = u_L;
        u[grid.n - 1] = u_R;
    } else {
        for (std::size_t k = 0; k < grid.n; ++k) u[k] = u_L + jump * 0.5 * (1.0 + sol.v[k]);
    }

    if (jump == 0.0) {
        sol.u = GridFunction(grid, u_L);
        sol.alpha = exponent_anchor(model, sol.u, sol.v);
        sol.h = exponent_h(model, sol.u, sol.v, sol.alpha);
        sol.iterations = 1;
        sol.residual = 0.0;
        sol.residual_history = {0.0};
        sol.tv_u = 0.0;
        sol.monotone = true;
        return sol;
    }

    // Relaxed Picard with Anderson mixing over the last few residuals. Plain relaxation alone
    // does not converge for rarefaction data: the linearized map has eigenvalues above one.
    const double omega = config.relaxation;
    const Eigen::Index n = static_cast<Eigen::Index>(grid.n);
    const double lo = model.u_domain.lo, hi = model.u_domain.hi;
    std::deque<Eigen::VectorXd> dF, dG;
    Eigen::VectorXd f_prev, g_prev;
    double best = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= config.max_iters; ++it) {
        GridFunction h;
        double alpha = 0;
        GridFunction next = picard_step(model, config, u, sol.v, u_L, u_R, &h, &alpha);
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(u.values.data(), n);
        const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(next.values.data(), n);
        const Eigen::VectorXd f = g - x;
        const double res = f.cwiseAbs().maxCoeff() / std::abs(jump);
        sol.residual_history.push_back(res);
        if (res < config.fix_tol) {
            sol.u = std::move(next);
            sol.h = std::move(h);
            sol.alpha = alpha;
            sol.iterations = it;
            sol.residual = res;
            sol.tv_u = total_variation(sol.u.values);
            sol.monotone = is_monotone(sol.u.values, u_L, u_R);
            return sol;
        }
        if (res > 1e3 * best) {
            dF.clear();
            dG.clear();
        } else if (it > 1 && config.anderson_depth > 0) {
            dF.push_back(f - f_prev);
            dG.push_back(g - g_prev);
            if (static_cast<int>(dF.size()) > config.anderson_depth) {
                dF.pop_front();
                dG.pop_front();
            }
        }
        best = std::min(best, res);
        f_prev = f;
        g_prev = g;

        Eigen::VectorXd x_next;
        if (dF.empty()) {
            x_next = x + omega * f;
        } else {
            const Eigen::Index m = static_cast<Eigen::Index>(dF.size());
            Eigen::MatrixXd F(n, m), G(n, m);
            for (Eigen::Index j = 0; j < m; ++j) {
                F.col(j) = dF[static_cast<std::size_t>(j)];
                G.col(j) = dG[static_cast<std::size_t>(j)];
            }
            const Eigen::VectorXd gamma = F.colPivHouseholderQr().solve(f);
            x_next = (g - G * gamma) - (1.0 - omega) * (f - F * gamma);
        }
        for (std::size_t k = 0; k < grid.n; ++k) u[k] = std::clamp(x_next(static_cast<Eigen::Index>(k)), lo, hi);
        u[0] = u_L;
        u[grid.n - 1] = u_R;
    }
    std::ostringstream os;
    os << "scalar fixed point did not converge in " << config.max_iters << " iterations (last residual "
       << sol.residual_history.back() << ")";
    throw ConvergenceError(os.str(), sol.residual_history);
}

TraceWindowReport trace_window_check(const ScalarSolution& solution, const ScalarCouplingModel& model, double u_L,
                                     double u_R) {
    TraceWindowReport rep;
    const Grid& g = solution.u.grid;
    rep.window_start = 0.5 * (model.Lambda + g.M);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double x = g.x(k);
        if (x > rep.window_start) rep.right_deviation = std::max(rep.right_deviation, std::abs(solution.u[k] - u_R));
        if (x < -rep.window_start) rep.left_deviation = std::max(rep.left_deviation, std::abs(solution.u[k] - u_L));
    }
    return rep;
}

}  // namespace dafermos
