#include "dafermos/system_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dafermos/color_profile.hpp"
#include "dafermos/quadrature.hpp"

namespace dafermos {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kWeightFloor = 1e-300;

Eigen::VectorXd row_of(const VectorGridFunction& u, std::size_t k) { return u.row(k); }

SpectralData spectral_at(const SystemCouplingModel& model, const Eigen::VectorXd& u, double v, double xi,
                         const SpectralData* previous, const char* what) {
    try {
        return solve_generalized_eigen(model, u, v, xi, previous);
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << what << ": " << e.what();
        throw SolverError(os.str());
    }
}

double weight_at(const FrozenState& s, std::size_t k) { return std::max(std::exp(s.log_weight[k]), kWeightFloor); }

}  // namespace

CoefficientFields assemble_coefficients(const SystemCouplingModel& model, const VectorGridFunction& u,
                                        const GridFunction& v, const GridFunction& psi) {
    const Grid& g = u.grid;
    const int N = model.N;
    const auto NN = static_cast<std::size_t>(N);
    CoefficientFields f;
    f.grid = g;
    f.N = N;
    f.eta = model.eta;
    f.psi = psi;
    f.eta_pi.assign(NN * NN, GridFunction(g));
    f.sigma.assign(NN * NN, GridFunction(g));
    f.kappa.assign(NN * NN * NN, GridFunction(g));
    f.spectra.resize(g.n);
    f.A0_inv.resize(g.n);

    const double hx = 1e-5, hv = 1e-5;
    const double hu = 1e-5 * std::max(model.delta0, 1e-8);
    for (std::size_t k = 0; k < g.n; ++k) {
        const Eigen::VectorXd uk = row_of(u, k);
        const double vk = v[k], xi = g.x(k);
        const SpectralData base = spectral_at(model, uk, vk, xi, k > 0 ? &f.spectra[k - 1] : nullptr, "eigen solve");
        const Eigen::MatrixXd A0 = model.A0(uk, vk);
        const Eigen::MatrixXd B = model.B(uk, vk);
        f.A0_inv[k] = A0.inverse();
        f.A0_norm = std::max(f.A0_norm, matrix_norm(A0));
        for (int j = 0; j < N; ++j) f.r_sup = std::max(f.r_sup, base.r_hat.col(j).norm());

        const SpectralData xp = spectral_at(model, uk, vk, xi + hx, &base, "xi derivative");
        const SpectralData xm = spectral_at(model, uk, vk, xi - hx, &base, "xi derivative");
        const Eigen::MatrixXd BdR = B * (xp.r_hat - xm.r_hat) / (2.0 * hx);

        const double vp = std::min(1.0, vk + hv), vm = std::max(-1.0, vk - hv);
        const SpectralData sp = spectral_at(model, uk, vp, xi, &base, "v derivative");
        const SpectralData sm = spectral_at(model, uk, vm, xi, &base, "v derivative");
        const Eigen::MatrixXd dvBR = (model.B(uk, vp) * sp.r_hat - model.B(uk, vm) * sm.r_hat) / (vp - vm);

        std::vector<Eigen::MatrixXd> duBR(NN);
        for (int m = 0; m < N; ++m) {
            Eigen::VectorXd up = uk, um = uk;
            up(m) += hu;
            um(m) -= hu;
            const SpectralData p = spectral_at(model, up, vk, xi, &base, "state derivative near the domain boundary");
            const SpectralData q = spectral_at(model, um, vk, xi, &base, "state derivative near the domain boundary");
            duBR[static_cast<std::size_t>(m)] = (model.B(up, vk) * p.r_hat - model.B(um, vk) * q.r_hat) / (2.0 * hu);
        }

        for (int i = 0; i < N; ++i) {
            const Eigen::RowVectorXd li = base.l_hat.row(i);
            for (int j = 0; j < N; ++j) {
                const auto ij = static_cast<std::size_t>(i * N + j);
                f.eta_pi[ij][k] = -li.dot(BdR.col(j).transpose());
                f.sigma[ij][k] = li.dot(dvBR.col(j).transpose());
                f.sigma_sup = std::max(f.sigma_sup, std::abs(f.sigma[ij][k]));
                for (int l = 0; l < N; ++l) {
                    const Eigen::VectorXd w = f.A0_inv[k] * base.r_hat.col(l);
                    Eigen::VectorXd dir = Eigen::VectorXd::Zero(N);
                    for (int m = 0; m < N; ++m) dir += duBR[static_cast<std::size_t>(m)].col(j) * w(m);
                    f.kappa[static_cast<std::size_t>((i * N + j) * N + l)][k] = -li.dot(dir.transpose());
                }
            }
        }
        f.spectra[k] = base;
    }
    f.pi = f.eta_pi;
    if (f.eta > 0.0)
        for (auto& p : f.pi)
            for (double& x : p.values) x /= f.eta;
    return f;
}

FrozenState freeze(const SystemCouplingModel& model, const VectorGridFunction& u, const GridFunction& v,
                   const GridFunction& psi, double eps) {
    FrozenState s;
    s.fields = assemble_coefficients(model, u, v, psi);
    const Grid& g = u.grid;
    std::vector<GridFunction> mu(static_cast<std::size_t>(model.N), GridFunction(g));
    for (std::size_t k = 0; k < g.n; ++k)
        for (int i = 0; i < model.N; ++i) mu[static_cast<std::size_t>(i)][k] = s.fields.spectra[k].mu(i);
    try {
        s.measures = build_phi_star(mu, eps);
    } catch (const WaveMeasureError& e) {
        throw SolverError(std::string("wave measures: ") + e.what());
    }
    for (int i = 0; i < model.N; ++i)
        s.anchors.push_back(0.5 * (model.lam_low[static_cast<std::size_t>(i)] + model.lam_high[static_cast<std::size_t>(i)]));
    s.log_weight.assign(g.n, kNegInf);
    for (const auto& fam : s.measures.families)
        for (std::size_t k = 0; k < g.n; ++k) s.log_weight[k] = log_add(s.log_weight[k], fam.log_phi[k]);
    s.nu = std::max(model.nu, s.fields.sigma_sup);
    return s;
}

double e_norm(const FrozenState& state, const std::vector<GridFunction>& theta) {
    double total = 0.0;
    for (const auto& t : theta) {
        double sup = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) sup = std::max(sup, std::abs(t[k]) / weight_at(state, k));
        total += sup;
    }
    return total;
}

double envelope(const FrozenState& state, const Eigen::VectorXd& tau) {
    const double t = tau.norm();
    return state.A * (state.fields.eta * t + t * t + state.nu * t);
}

double envelope_ratio(const FrozenState& state, const Eigen::VectorXd& tau, const std::vector<GridFunction>& theta,
                      int* worst_k, double* worst_xi) {
    const double env = envelope(state, tau);
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i)
        for (std::size_t k = 0; k < theta[i].size(); ++k) {
            const double t = std::abs(theta[i][k]);
            if (t == 0.0) continue;
            const double r = env > 0.0 ? t / (env * weight_at(state, k)) : std::numeric_limits<double>::infinity();
            if (r > worst) {
                worst = r;
                if (worst_k) *worst_k = static_cast<int>(i);
                if (worst_xi) *worst_xi = state.fields.grid.x(k);
            }
        }
    return worst;
}

namespace {

void check_envelope(const FrozenState& state, const Eigen::VectorXd& tau, const std::vector<GridFunction>& theta,
                    const char* which) {
    int k = -1;
    double xi = 0;
    const double ratio = envelope_ratio(state, tau, theta, &k, &xi);
    if (ratio > 1.0 + 1e-9) {
        std::ostringstream os;
        os << which << " correction leaves the admissible set: component " << k + 1 << " at xi = " << xi
           << " exceeds the envelope by a factor " << ratio << " (A, eta, nu or delta too large)";
        SmallnessError err(os.str(), "correction");
        err.component = k;
        err.xi = xi;
        throw err;
    }
}

}  // namespace

std::vector<GridFunction> correction_map(const FrozenState& state, const Eigen::VectorXd& tau,
                                         const std::vector<GridFunction>& theta, bool check) {
    const CoefficientFields& f = state.fields;
    const Grid& g = f.grid;
    const int N = f.N;
    const auto NN = static_cast<std::size_t>(N);
    if (theta.size() != NN) throw std::invalid_argument("correction needs one component per family");
    const bool enforce = check && state.calibrated;
    if (enforce) check_envelope(state, tau, theta, "input");

    std::vector<std::vector<double>> a(NN, std::vector<double>(g.n));
    for (std::size_t i = 0; i < NN; ++i)
        for (std::size_t k = 0; k < g.n; ++k)
            a[i][k] = tau(static_cast<Eigen::Index>(i)) * state.measures.families[i].phi[k] + theta[i][k];

    std::vector<GridFunction> out;
    out.reserve(NN);
    for (int i = 0; i < N; ++i) {
        std::vector<double> rhs(g.n, 0.0);
        for (std::size_t k = 0; k < g.n; ++k) {
            double r = 0.0;
            for (int j = 0; j < N; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                const double aj = a[jj][k];
                if (aj == 0.0) continue;
                r += (f.eta_pi[static_cast<std::size_t>(i * N + j)][k] - f.sigma_at(i, j)[k] * f.psi[k]) * aj;
                for (int l = 0; l < N; ++l) r += f.kappa_at(i, j, l)[k] * aj * a[static_cast<std::size_t>(l)][k];
            }
            rhs[k] = r;
        }
        const auto& fam = state.measures.families[static_cast<std::size_t>(i)];
        out.emplace_back(g, anchored_transport(fam.log_phi, rhs, g.dx, g.nearest(state.anchors[static_cast<std::size_t>(i)])));
    }
    if (enforce) check_envelope(state, tau, out, "output");
    return out;
}

double calibrate_envelope(FrozenState& state, const Eigen::VectorXd& tau_probe) {
    const auto N = static_cast<std::size_t>(state.fields.N);
    const auto T = correction_map(state, tau_probe, std::vector<GridFunction>(N, GridFunction(state.fields.grid)), false);
    const double t = tau_probe.norm();
    const double s = state.fields.eta * t + t * t + state.nu * t;
    double c_fit = 0.0;
    if (s > 0.0)
        for (const auto& comp : T)
            for (std::size_t k = 0; k < comp.size(); ++k)
                c_fit = std::max(c_fit, std::abs(comp[k]) / (s * weight_at(state, k)));
    state.A = 4.0 * c_fit;
    state.calibrated = true;
    return c_fit;
}

CorrectionResult solve_correction(const FrozenState& state, const Eigen::VectorXd& tau, double tol, int max_iters) {
    const auto N = static_cast<std::size_t>(state.fields.N);
    CorrectionResult res;
    res.theta.assign(N, GridFunction(state.fields.grid));
    const double scale = std::max(tau.norm(), std::numeric_limits<double>::min());
    double prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        auto next = correction_map(state, tau, res.theta);
        std::vector<GridFunction> diff = next;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < diff[i].size(); ++k) diff[i][k] -= res.theta[i][k];
        const double d = e_norm(state, diff);
        res.updates.push_back(d);
        res.theta = std::move(next);
        res.iterations = it;
        if (it > 1 && prev > 1e3 * tol * scale) {
            const double alpha = d / prev;
            res.contraction = std::max(res.contraction, alpha);
            if (alpha >= 1.0) {
                std::ostringstream os;
                os << "correction map is not contracting: measured factor " << alpha << " at iteration " << it;
                SmallnessError err(os.str(), "correction");
                err.history = res.updates;
                throw err;
            }
        }
        if (d <= tol * scale) break;
        prev = d;
        if (it == max_iters) {
            std::ostringstream os;
            os << "correction did not converge in " << max_iters << " iterations (last update " << d << ")";
            throw ConvergenceError(os.str(), res.updates);
        }
    }
    if (state.calibrated) res.envelope_ratio = envelope_ratio(state, tau, res.theta);
    return res;
}

StrengthMatrix strength_matrix(const FrozenState& state) {
    const CoefficientFields& f = state.fields;
    const Grid& g = f.grid;
    const int N = f.N;
    StrengthMatrix out;
    out.C = Eigen::MatrixXd::Zero(N, N);
    out.weighted = Eigen::MatrixXd::Zero(N, N);
    for (int col = 0; col < N; ++col) {
        const auto& phi = state.measures.families[static_cast<std::size_t>(col)].phi;
        for (std::size_t k = 0; k < g.n; ++k) {
            const double w = (k == 0 || k + 1 == g.n ? 0.5 : 1.0) * g.dx * phi[k];
            const Eigen::VectorXd r = f.spectra[k].r_hat.col(col);
            out.C.col(col) += w * r;
            out.weighted.col(col) += w * (f.A0_inv[k] * r);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.weighted);
    const auto& sv = svd.singularValues();
    out.condition = sv(N - 1) > 0.0 ? sv(0) / sv(N - 1) : std::numeric_limits<double>::infinity();
    if (!(out.condition < 1e12)) {
        std::ostringstream os;
        os << "strength matrix is singular to tolerance (condition " << out.condition
           << "); band separation is insufficient";
        throw SolverError(os.str());
    }
    out.beta = 1.0 / sv(N - 1);
    return out;
}

StrengthResult solve_strength(const FrozenState& state, const StrengthMatrix& C, const Eigen::VectorXd& u_L,
                              const Eigen::VectorXd& u_R, double delta, double tol, int max_iters, double inner_tol) {
    const CoefficientFields& f = state.fields;
    const Grid& g = f.grid;
    const int N = f.N;
    const Eigen::VectorXd du = u_R - u_L;
    const auto lu = C.weighted.partialPivLu();
    StrengthResult res;
    res.tau = Eigen::VectorXd::Zero(N);

    auto correction_moment = [&](const std::vector<GridFunction>& theta) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(N);
        for (std::size_t k = 0; k < g.n; ++k) {
            const double w = (k == 0 || k + 1 == g.n ? 0.5 : 1.0) * g.dx;
            Eigen::VectorXd s = Eigen::VectorXd::Zero(N);
            for (int i = 0; i < N; ++i) s += theta[static_cast<std::size_t>(i)][k] * f.spectra[k].r_hat.col(i);
            m += w * (f.A0_inv[k] * s);
        }
        return m;
    };
    auto record = [&](const CorrectionResult& c) {
        res.max_correction_contraction = std::max(res.max_correction_contraction, c.contraction);
        res.max_envelope_ratio = std::max(res.max_envelope_ratio, c.envelope_ratio);
    };

    if (du.norm() == 0.0) {
        res.correction = solve_correction(state, res.tau, inner_tol, max_iters);
        res.iterations = 1;
        return res;
    }
    res.tau = lu.solve(du);
    double prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        if (res.tau.norm() > delta) {
            std::ostringstream os;
            os << "strength |tau| = " << res.tau.norm() << " left the ball of radius delta = " << delta;
            throw SmallnessError(os.str(), "strength");
        }
        CorrectionResult c = solve_correction(state, res.tau, inner_tol, max_iters);
        record(c);
        const Eigen::VectorXd next = lu.solve(du - correction_moment(c.theta));
        const double step = (next - res.tau).norm();
        res.iterations = it;
        if (it > 1 && prev > 1e3 * tol * du.norm()) {
            const double alpha = step / prev;
            res.contraction = std::max(res.contraction, alpha);
            if (alpha >= 1.0) {
                std::ostringstream os;
                os << "strength map is not contracting: measured factor " << alpha;
                throw SmallnessError(os.str(), "strength");
            }
        }
        res.tau = next;
        if (step <= tol * du.norm()) break;
        prev = step;
        if (it == max_iters) throw ConvergenceError("strength iteration did not converge", {step});
    }
    if (res.tau.norm() > delta) {
        std::ostringstream os;
        os << "strength |tau| = " << res.tau.norm() << " left the ball of radius delta = " << delta;
        throw SmallnessError(os.str(), "strength");
    }
    res.correction = solve_correction(state, res.tau, inner_tol, max_iters);
    record(res.correction);
    return res;
}

VectorGridFunction reconstruct_u(const FrozenState& state, const Eigen::VectorXd& tau,
                                 const std::vector<GridFunction>& theta, const Eigen::VectorXd& u_L) {
    const CoefficientFields& f = state.fields;
    const Grid& g = f.grid;
    const int N = f.N;
    VectorGridFunction z(g, N);
    Eigen::VectorXd acc = u_L, prev_rate;
    for (std::size_t k = 0; k < g.n; ++k) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(N);
        for (int j = 0; j < N; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double a = tau(j) * state.measures.families[jj].phi[k] + theta[jj][k];
            s += a * f.spectra[k].r_hat.col(j);
        }
        const Eigen::VectorXd rate = f.A0_inv[k] * s;
        if (k > 0) acc += 0.5 * g.dx * (prev_rate + rate);
        z.values.row(static_cast<Eigen::Index>(k)) = acc.transpose();
        prev_rate = rate;
    }
    return z;
}

double vector_total_variation(const VectorGridFunction& u) {
    double tv = 0.0;
    for (Eigen::Index k = 1; k < u.values.rows(); ++k) tv += (u.values.row(k) - u.values.row(k - 1)).norm();
    return tv;
}

double choose_varsigma(const SystemCouplingModel& model, const Eigen::VectorXd& u_L) {
    SystemCouplingModel trial = model;
    trial.center = u_L;
    double radius = model.delta0;
    for (int k = 0; k < 8; ++k, radius *= 0.5) {
        trial.delta0 = radius;
        try {
            const ValidationReport rep = validate_hypotheses(trial);
            bool ok = true;
            for (const char* name : {"A0 invertible", "hyperbolicity", "eigenvalues within bands", "bands separated"})
                if (const HypothesisCheck* c = rep.find(name); c && !c->passed) ok = false;
            if (ok) return radius;
        } catch (const std::exception&) {
            // evaluation outside the model domain: shrink
        }
    }
    std::ostringstream os;
    os << "no radius down to " << 2.0 * radius << " around u_L passes the hypothesis checks";
    throw SmallnessError(os.str(), "setup");
}

SystemSolveState solve_system(const SystemCouplingModel& model, const SystemSolveConfig& config,
                              const Eigen::VectorXd& u_L, const Eigen::VectorXd& u_R) {
    if (!(config.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(config.p > 0.0)) throw std::invalid_argument("p must be positive");
    if (!(config.relaxation > 0.0 && config.relaxation <= 1.0)) throw std::invalid_argument("relaxation must be in (0, 1]");
    if (u_L.size() != model.N || u_R.size() != model.N) throw std::invalid_argument("states must have N components");
    const double M = config.M > 0.0 ? config.M : model.M;
    const std::size_t n = config.grid_size > 0
                              ? config.grid_size
                              : std::max<std::size_t>(512, static_cast<std::size_t>(std::ceil(40.0 * M / config.eps)));
    if (n < 64) throw std::invalid_argument("grid_size must be at least 64");
    const Grid grid(M, n);
    const ColorProfile color(config.eps, config.p, M);
    const int N = model.N;
    const Eigen::VectorXd du = u_R - u_L;
    const double jump = du.norm();

    SystemSolveState st;
    st.eps = config.eps;
    st.p = config.p;
    st.v = sample_v(color, grid);
    st.psi = sample_psi(color, grid);
    st.eta = model.eta;
    const bool enforce = config.enforce_smallness;
    if (enforce && (u_L - model.center).norm() > model.delta0) throw SmallnessError("u_L lies outside the ball B(delta0)", "setup");
    st.varsigma = config.varsigma > 0.0 ? config.varsigma
                                        : (enforce ? choose_varsigma(model, u_L) : std::numeric_limits<double>::infinity());

    VectorGridFunction u(grid, N);
    for (std::size_t k = 0; k < n; ++k)
        u.values.row(static_cast<Eigen::Index>(k)) = (u_L + 0.5 * (1.0 + st.v[k]) * du).transpose();

    auto check_admissible = [&](const VectorGridFunction& z) {
        if (!enforce) return;
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::VectorXd zk = z.row(k);
            const double ball = (zk - model.center).norm(), omega = (zk - u_L).norm();
            if (ball > model.delta0 * (1 + 1e-9) || omega > st.varsigma * (1 + 1e-9)) {
                std::ostringstream os;
                os << "reconstructed state left " << (ball > model.delta0 ? "B(delta0)" : "the sup-ball around u_L")
                   << " at xi = " << grid.x(k);
                SmallnessError err(os.str(), "reconstruct");
                err.xi = grid.x(k);
                throw err;
            }
        }
    };

    double c_fit = 0.0;
    FrozenState frozen;
    VectorGridFunction z;
    StrengthResult sr;
    for (int it = 1; it <= config.max_outer; ++it) {
        frozen = freeze(model, u, st.v, st.psi, config.eps);
        const StrengthMatrix C = strength_matrix(frozen);
        if (it == 1) {
            c_fit = calibrate_envelope(frozen, C.weighted.partialPivLu().solve(du));
            st.A = config.A > 0.0 ? config.A : 4.0 * c_fit;
            if (config.delta > 0.0)
                st.delta = config.delta;
            else
                st.delta = c_fit > 0.0 ? std::min(0.25 * model.delta0, 1.0 / (4.0 * c_fit * (model.eta + frozen.nu + 1.0)))
                                       : 0.25 * model.delta0;
            st.r = st.delta / (2.0 * frozen.fields.A0_norm);
            if (enforce && jump > st.r) {
                std::ostringstream os;
                os << "|u_R - u_L| = " << jump << " exceeds the admissible radius r = " << st.r;
                throw SmallnessError(os.str(), "setup");
            }
        }
        frozen.A = st.A;
        frozen.calibrated = true;
        st.beta = std::max(st.beta, C.beta);
        st.A0_norm = std::max(st.A0_norm, frozen.fields.A0_norm);
        st.R = std::max(st.R, frozen.fields.r_sup);
        st.nu = std::max(st.nu, frozen.nu);

        sr = solve_strength(frozen, C, u_L, u_R, enforce ? st.delta : std::numeric_limits<double>::infinity(),
                            config.strength_tol, config.max_inner, config.correction_tol);
        st.strength_contractions.push_back(sr.contraction);
        st.correction_contractions.push_back(sr.max_correction_contraction);
        st.max_envelope_ratio = std::max(st.max_envelope_ratio, sr.max_envelope_ratio);
        z = reconstruct_u(frozen, sr.tau, sr.correction.theta, u_L);
        check_admissible(z);

        const double update = jump > 0.0 ? (z.values - u.values).rowwise().norm().maxCoeff() / jump : 0.0;
        st.outer_history.push_back(update);
        st.outer_iterations = it;
        if (update < config.outer_tol) break;
        if (it == config.max_outer) {
            std::ostringstream os;
            os << "outer iteration did not converge in " << config.max_outer << " iterations (last update " << update << ")";
            throw ConvergenceError(os.str(), st.outer_history);
        }
        u.values += config.relaxation * (z.values - u.values);
    }

    st.u = z;
    st.tau = sr.tau;
    st.theta = sr.correction.theta;
    st.measures = frozen.measures;
    st.weighted_norm_theta = e_norm(frozen, st.theta);
    st.boundary_residual = (z.row(n - 1) - u_R).norm();
    st.a.assign(static_cast<std::size_t>(N), GridFunction(grid));
    for (int i = 0; i < N; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        for (std::size_t k = 0; k < n; ++k) st.a[ii][k] = st.tau(i) * st.measures.families[ii].phi[k] + st.theta[ii][k];
    }
    st.tv = vector_total_variation(z);
    for (std::size_t k = 1; k < n; ++k)
        st.sup_eps_u_xi = std::max(st.sup_eps_u_xi, config.eps * (z.row(k) - z.row(k - 1)).norm() / grid.dx);

    // Coefficients recovered from the reconstructed profile against the assembled ones.
    double amax = 0.0, dev = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const Eigen::VectorXd uk = z.row(k);
        const Eigen::VectorXd dz = (z.row(k + 1) - z.row(k - 1)).transpose() / (2.0 * grid.dx);
        const Eigen::VectorXd rec = frozen.fields.spectra[k].l_hat * model.B(uk, st.v[k]) * model.A0(uk, st.v[k]) * dz;
        for (int i = 0; i < N; ++i) {
            amax = std::max(amax, std::abs(st.a[static_cast<std::size_t>(i)][k]));
            dev = std::max(dev, std::abs(rec(i) - st.a[static_cast<std::size_t>(i)][k]));
        }
    }
    st.decomposition_residual = amax > 0.0 ? dev / amax : dev;

    const auto Ttheta = correction_map(frozen, st.tau, st.theta, false);
    std::vector<GridFunction> diff = Ttheta;
    for (std::size_t i = 0; i < diff.size(); ++i)
        for (std::size_t k = 0; k < n; ++k) diff[i][k] -= st.theta[i][k];
    st.ode_residual = e_norm(frozen, diff) / std::max(st.tau.norm(), std::numeric_limits<double>::min());
    return st;
}

}  // namespace dafermos
