#include "dafermos/coupling_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dafermos/spectral.hpp"

namespace dafermos {

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 1)));
    if (n <= 1) {
        out[0] = 0.5 * (a + b);
        return out;
    }
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    out.back() = b;
    return out;
}

RealFn derivative_or_fd(const RealFn& f, const RealFn& df) {
    if (df) return df;
    return [f](double x) { return central_difference(f, x); };
}

// (f o gamma)'(u) = f'(gamma(u)) gamma'(u).
RealFn composed_speed(const HalfModel& half) {
    RealFn dg = derivative_or_fd(half.gamma, half.dgamma);
    RealFn df = derivative_or_fd(half.flux, half.dflux);
    RealFn g = half.gamma;
    return [g, dg, df](double u) { return df(g(u)) * dg(u); };
}

struct SampledField {
    std::vector<double> u, v;
    std::vector<double> a;  // row-major over (u, v)
};

SampledField sample_field(const RealField& f, const std::vector<double>& us, const std::vector<double>& vs) {
    SampledField s{us, vs, {}};
    s.a.reserve(us.size() * vs.size());
    for (double u : us)
        for (double v : vs) s.a.push_back(f(u, v));
    return s;
}

// Largest |f(p) - f(q)| / (|u_p - u_q| + |v_p - v_q|) over all sampled pairs.
double lipschitz_over_pairs(const SampledField& s) {
    const std::size_t nv = s.v.size();
    const std::size_t total = s.a.size();
    double best = 0.0;
    for (std::size_t p = 0; p < total; ++p) {
        const double up = s.u[p / nv], vp = s.v[p % nv];
        for (std::size_t q = p + 1; q < total; ++q) {
            const double dist = std::abs(up - s.u[q / nv]) + std::abs(vp - s.v[q % nv]);
            if (dist <= 0.0) continue;
            best = std::max(best, std::abs(s.a[p] - s.a[q]) / dist);
        }
    }
    return best;
}

std::vector<double> sorted_eigenvalues(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    std::vector<double> out;
    double scale = std::max(1.0, A.norm());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-12 * scale) throw SpectralError("complex eigenvalue of A");
        out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double central_difference(const RealFn& f, double x) {
    const double h = 1e-3 * std::max(1.0, std::abs(x));
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

BlendWeight affine_blend() {
    return [](double v) { return 0.5 * (1.0 + v); };
}

ScalarCouplingModel build_scalar_model(const HalfModel& minus, const HalfModel& plus, Interval u_domain,
                                       const ScalarModelOptions& options) {
    if (!minus.gamma || !plus.gamma || !minus.flux || !plus.flux)
        throw ModelError("half-models need gamma and flux");
    if (u_domain.hi < u_domain.lo) std::swap(u_domain.lo, u_domain.hi);

    ScalarCouplingModel model;
    model.minus = minus;
    model.plus = plus;
    model.u_domain = u_domain;
    model.samples_per_axis = options.samples_per_axis;

    BlendWeight w = options.blend ? options.blend : affine_blend();
    RealFn a0m = derivative_or_fd(minus.gamma, minus.dgamma);
    RealFn a0p = derivative_or_fd(plus.gamma, plus.dgamma);
    RealFn a1m = composed_speed(minus);
    RealFn a1p = composed_speed(plus);
    model.A0 = [=](double u, double v) { double t = w(v); return (1.0 - t) * a0m(u) + t * a0p(u); };
    model.A1 = [=](double u, double v) { double t = w(v); return (1.0 - t) * a1m(u) + t * a1p(u); };
    model.B0 = options.B0 ? options.B0 : RealField([](double, double) { return 1.0; });

    const int n = std::max(2, options.samples_per_axis);
    const auto us = linspace(u_domain.lo, u_domain.hi, n);
    const auto vs = linspace(-1.0, 1.0, n);

    for (const auto* half : {&minus, &plus}) {
        const char* side = half == &minus ? "gamma_minus" : "gamma_plus";
        RealFn dg = half == &minus ? a0m : a0p;
        for (std::size_t i = 0; i < us.size(); ++i) {
            if (!(dg(us[i]) > 0.0)) throw ModelError(std::string(side) + " is not strictly increasing on the state domain");
            if (i > 0 && us[i] > us[i - 1] && !(half->gamma(us[i]) > half->gamma(us[i - 1])))
                throw ModelError(std::string(side) + " is not strictly increasing on the state domain");
        }
    }

    SampledField sA0 = sample_field(model.A0, us, vs);
    SampledField sA1 = sample_field(model.A1, us, vs);
    SampledField sB0 = sample_field(model.B0, us, vs);

    model.c1 = *std::min_element(sA0.a.begin(), sA0.a.end());
    if (!(model.c1 > 0.0)) {
        std::ostringstream os;
        os << "A0 is not positive on samples (min " << model.c1 << ")";
        throw ModelError(os.str());
    }
    auto [bmin, bmax] = std::minmax_element(sB0.a.begin(), sB0.a.end());
    model.c2 = *bmin;
    model.c3 = *bmax;
    if (!(model.c2 > 0.0)) {
        std::ostringstream os;
        os << "B0 is not positive on samples (min " << model.c2 << ")";
        throw ModelError(os.str());
    }
    model.omega0 = lipschitz_over_pairs(sA0);
    model.omega1 = lipschitz_over_pairs(sA1);
    double lam = 0.0;
    for (std::size_t k = 0; k < sA0.a.size(); ++k) lam = std::max(lam, std::abs(sA1.a[k] / sA0.a[k]));
    model.Lambda = lam;
    return model;
}

Eigen::MatrixXd SystemCouplingModel::A(const Eigen::VectorXd& u, double v) const {
    return A1(u, v) * A0(u, v).inverse();
}

Eigen::MatrixXd SystemCouplingModel::B(const Eigen::VectorXd& u, double v) const {
    return B0(u, v) * A0(u, v).inverse();
}

SystemCouplingModel finalize_system_model(int N, MatrixField A0, MatrixField A1, MatrixField B0,
                                          const Eigen::VectorXd& center, const SystemModelOptions& options) {
    SystemCouplingModel model;
    model.N = N;
    model.A0 = std::move(A0);
    model.A1 = std::move(A1);
    model.B0 = std::move(B0);
    model.center = center;

    if (options.delta0 > 0.0) {
        model.delta0 = options.delta0;
    } else {
        auto ev = sorted_eigenvalues(model.A(center, 0.0));
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < ev.size(); ++i) gap = std::min(gap, ev[i] - ev[i - 1]);
        if (N == 1) throw ModelError("delta0 must be given for N = 1");
        if (!(gap > 0.0)) throw ModelError("eigenvalues at the centre state are not distinct");
        model.delta0 = 0.25 * gap;
    }

    if (!options.lam_low.empty()) {
        if (options.lam_low.size() != static_cast<std::size_t>(N) || options.lam_high.size() != static_cast<std::size_t>(N))
            throw ModelError("band lists must have N entries");
        model.lam_low = options.lam_low;
        model.lam_high = options.lam_high;
    } else {
        model.lam_low.assign(static_cast<std::size_t>(N), std::numeric_limits<double>::infinity());
        model.lam_high.assign(static_cast<std::size_t>(N), -std::numeric_limits<double>::infinity());
        const auto states = ball_samples(model, options.state_samples_per_axis);
        const auto vs = linspace(-1.0, 1.0, std::max(2, options.samples_per_axis));
        for (const auto& u : states)
            for (double v : vs) {
                std::vector<double> ev;
                try {
                    ev = sorted_eigenvalues(model.A(u, v));
                } catch (const SpectralError&) {
                    std::ostringstream os;
                    os << "complex eigenvalues of A at v = " << v << ", u = (" << u.transpose() << ")";
                    throw ModelError(os.str());
                }
                for (int i = 0; i < N; ++i) {
                    model.lam_low[static_cast<std::size_t>(i)] = std::min(model.lam_low[static_cast<std::size_t>(i)], ev[static_cast<std::size_t>(i)]);
                    model.lam_high[static_cast<std::size_t>(i)] = std::max(model.lam_high[static_cast<std::size_t>(i)], ev[static_cast<std::size_t>(i)]);
                }
            }
    }

    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
        double lo = model.lam_low[static_cast<std::size_t>(i)], hi = model.lam_high[static_cast<std::size_t>(i)];
        double di = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        if (di < dist) {
            dist = di;
            model.m = i;
        }
    }

    model.M = options.M > 0.0 ? options.M
                              : std::max(std::abs(model.lam_low.front()), std::abs(model.lam_high.back())) + 1.0;
    EtaNu en = estimate_eta_nu(model, options.samples_per_axis, options.state_samples_per_axis);
    model.eta = en.eta;
    model.nu = en.nu;
    return model;
}

SystemCouplingModel build_p_system_model(const PressureLaw& p_minus, const PressureLaw& p_plus, Interval tau_domain,
                                         const SystemModelOptions& options) {
    if (!p_minus.p || !p_plus.p) throw ModelError("pressure laws need p");
    if (tau_domain.hi < tau_domain.lo) std::swap(tau_domain.lo, tau_domain.hi);
    RealFn dpm = derivative_or_fd(p_minus.p, p_minus.dp);
    RealFn dpp = derivative_or_fd(p_plus.p, p_plus.dp);

    for (double tau : linspace(tau_domain.lo, tau_domain.hi, std::max(2, options.samples_per_axis))) {
        for (const auto& [name, dp] : {std::pair{"p_minus", dpm}, std::pair{"p_plus", dpp}}) {
            if (!(dp(tau) < 0.0)) {
                std::ostringstream os;
                os << "loss of hyperbolicity: " << name << "'(" << tau << ") = " << dp(tau) << " is not negative";
                throw ModelError(os.str());
            }
        }
    }

    auto slope = [dpm, dpp](double tau, double v) { return 0.5 * (1.0 - v) * dpm(tau) + 0.5 * (1.0 + v) * dpp(tau); };
    MatrixField identity = [](const Eigen::VectorXd&, double) { return Eigen::MatrixXd::Identity(2, 2); };
    MatrixField A1 = [slope](const Eigen::VectorXd& u, double v) {
        Eigen::MatrixXd a(2, 2);
        a << 0.0, -1.0, slope(u(0), v), 0.0;
        return a;
    };

    Eigen::VectorXd center(2);
    center << 0.5 * (tau_domain.lo + tau_domain.hi), 0.0;
    SystemModelOptions opts = options;
    if (opts.delta0 <= 0.0) {
        double s0 = std::sqrt(-slope(center(0), 0.0));
        opts.delta0 = std::min(0.25 * 2.0 * s0, 0.5 * tau_domain.width());
    }
    SystemCouplingModel model = finalize_system_model(2, identity, A1, identity, center, opts);
    model.name = "p-system";
    return model;
}

SystemCouplingModel scalar_as_system(const ScalarCouplingModel& scalar, double center) {
    auto wrap = [](RealField f) -> MatrixField {
        return [f](const Eigen::VectorXd& u, double v) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = f(u(0), v);
            return m;
        };
    };
    SystemModelOptions opts;
    opts.delta0 = std::max({std::abs(scalar.u_domain.hi - center), std::abs(scalar.u_domain.lo - center), 1e-6});
    opts.samples_per_axis = scalar.samples_per_axis;
    Eigen::VectorXd c(1);
    c(0) = center;
    SystemCouplingModel model = finalize_system_model(1, wrap(scalar.A0), wrap(scalar.A1), wrap(scalar.B0), c, opts);
    model.name = "scalar";
    return model;
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate_hypotheses(const ScalarCouplingModel& model, int sample_count) {
    ValidationReport report;
    const int n = std::max(2, sample_count);
    const auto us = linspace(model.u_domain.lo, model.u_domain.hi, n);
    const auto vs = linspace(-1.0, 1.0, n);
    SampledField sA0 = sample_field(model.A0, us, vs);
    SampledField sA1 = sample_field(model.A1, us, vs);
    SampledField sB0 = sample_field(model.B0, us, vs);

    const double a0min = *std::min_element(sA0.a.begin(), sA0.a.end());
    report.checks.push_back({"A0 positive", a0min, model.c1, a0min > 0.0 && a0min >= model.c1 * (1 - 1e-12),
                             "min sampled A0 against c1"});
    auto [bmin, bmax] = std::minmax_element(sB0.a.begin(), sB0.a.end());
    report.checks.push_back({"B0 lower bound", *bmin, model.c2, *bmin > 0.0 && *bmin >= model.c2 * (1 - 1e-12),
                             "min sampled B0 against c2"});
    report.checks.push_back({"B0 upper bound", *bmax, model.c3, *bmax <= model.c3 * (1 + 1e-12),
                             "max sampled B0 against c3"});
    const double l0 = lipschitz_over_pairs(sA0), l1 = lipschitz_over_pairs(sA1);
    report.checks.push_back({"A0 Lipschitz", l0, model.omega0, l0 <= model.omega0 * (1 + 1e-9) + 1e-12,
                             "pairwise difference quotient against omega0"});
    report.checks.push_back({"A1 Lipschitz", l1, model.omega1, l1 <= model.omega1 * (1 + 1e-9) + 1e-12,
                             "pairwise difference quotient against omega1"});
    double lam = 0.0;
    for (std::size_t k = 0; k < sA0.a.size(); ++k) lam = std::max(lam, std::abs(sA1.a[k] / sA0.a[k]));
    report.checks.push_back({"speed bound", lam, model.Lambda, lam <= model.Lambda * (1 + 1e-12) + 1e-15,
                             "max |A1/A0| against Lambda"});

    // Consistency at v = +-1 against independent finite differences of gamma and f o gamma.
    double c0 = 0.0, c1 = 0.0;
    for (double u : us) {
        for (const auto& [half, v] : {std::pair{&model.minus, -1.0}, std::pair{&model.plus, 1.0}}) {
            const RealFn g = half->gamma, f = half->flux;
            const double dg = central_difference(g, u);
            const double dfg = central_difference([g, f](double x) { return f(g(x)); }, u);
            c0 = std::max(c0, std::abs(model.A0(u, v) - dg) / std::max(1.0, std::abs(dg)));
            c1 = std::max(c1, std::abs(model.A1(u, v) - dfg) / std::max(1.0, std::abs(dfg)));
        }
    }
    report.checks.push_back({"A0 endpoint consistency", c0, 1e-6, c0 <= 1e-6, "A0(u, +-1) against gamma_+-'"});
    report.checks.push_back({"A1 endpoint consistency", c1, 1e-6, c1 <= 1e-6, "A1(u, +-1) against (f_+- o gamma_+-)'"});
    return report;
}

ValidationReport validate_hypotheses(const SystemCouplingModel& model, int sample_count) {
    ValidationReport report;
    const int N = model.N;
    const auto states = ball_samples(model, std::max(2, sample_count / 4 + 1));
    const auto vs = linspace(-1.0, 1.0, std::max(2, sample_count));

    double min_sv = std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    double band_violation = 0.0;
    double eta_sample = 0.0;
    std::string hyperbolic_detail = "all sampled eigenvalues real and distinct";
    bool complex_found = false;
    for (const auto& u : states)
        for (double v : vs) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.A0(u, v));
            min_sv = std::min(min_sv, svd.singularValues().minCoeff());
            eta_sample = std::max(eta_sample, matrix_norm(model.B(u, v) - Eigen::MatrixXd::Identity(N, N)));
            std::vector<double> ev;
            try {
                ev = sorted_eigenvalues(model.A(u, v));
            } catch (const SpectralError&) {
                complex_found = true;
                min_gap = std::min(min_gap, 0.0);
                std::ostringstream os;
                os << "complex eigenvalues at v = " << v << ", u = (" << u.transpose() << ")";
                hyperbolic_detail = os.str();
                continue;
            }
            for (int i = 0; i < N; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                if (i > 0) {
                    double gap = ev[ii] - ev[ii - 1];
                    if (gap < min_gap) {
                        min_gap = gap;
                        if (gap <= 0.0) {
                            std::ostringstream os;
                            os << "repeated eigenvalue at v = " << v << ", u = (" << u.transpose() << ")";
                            hyperbolic_detail = os.str();
                        }
                    }
                }
                band_violation = std::max(band_violation, model.lam_low[ii] - ev[ii]);
                band_violation = std::max(band_violation, ev[ii] - model.lam_high[ii]);
            }
        }
    if (N == 1) min_gap = complex_found ? 0.0 : std::numeric_limits<double>::infinity();
    report.checks.push_back({"A0 invertible", min_sv, 0.0, min_sv > 1e-12, "smallest singular value of A0"});
    report.checks.push_back({"hyperbolicity", N == 1 ? 0.0 : min_gap, 0.0, !complex_found && (N == 1 || min_gap > 1e-12),
                             hyperbolic_detail});
    report.checks.push_back({"eigenvalues within bands", band_violation, 0.0, band_violation <= 1e-12,
                             "largest excursion of lambda_i outside [low_i, high_i]"});
    double sep = std::numeric_limits<double>::infinity();
    std::string sep_detail = "bands separated";
    for (int i = 0; i + 1 < N; ++i) {
        double s = model.lam_low[static_cast<std::size_t>(i) + 1] - model.lam_high[static_cast<std::size_t>(i)];
        if (s < sep) {
            sep = s;
            if (s <= 0.0) {
                std::ostringstream os;
                os << "bands " << i + 1 << " [" << model.lam_low[static_cast<std::size_t>(i)] << ", "
                   << model.lam_high[static_cast<std::size_t>(i)] << "] and " << i + 2 << " ["
                   << model.lam_low[static_cast<std::size_t>(i) + 1] << ", " << model.lam_high[static_cast<std::size_t>(i) + 1]
                   << "] overlap";
                sep_detail = os.str();
            }
        }
    }
    if (N == 1) sep = 0.0;
    report.checks.push_back({"bands separated", sep, 0.0, N == 1 || sep > 0.0, sep_detail});
    report.checks.push_back({"viscosity proximity", eta_sample, model.eta, eta_sample <= model.eta * (1 + 1e-9) + 1e-14,
                             "sampled |B - I| against eta"});

    // Near-orthogonality of eigenvectors taken at two sampled states.
    double diag_min = std::numeric_limits<double>::infinity(), off_max = 0.0;
    if (!complex_found && (N == 1 || min_gap > 1e-12)) {
        const auto coarse = ball_samples(model, 3);
        for (double v : linspace(-1.0, 1.0, 5))
            for (const auto& u1 : coarse)
                for (const auto& u2 : coarse) {
                    SpectralData e1 = hyperbolic_eigen(model.A(u1, v));
                    SpectralData e2 = hyperbolic_eigen(model.A(u2, v));
                    Eigen::MatrixXd P = e1.l_hat * e2.r_hat;
                    for (int i = 0; i < N; ++i)
                        for (int j = 0; j < N; ++j) {
                            // Sign conventions may differ between states; compare orientations.
                            if (i == j) diag_min = std::min(diag_min, std::abs(P(i, j)));
                            else off_max = std::max(off_max, std::abs(P(i, j)));
                        }
                }
    } else {
        diag_min = 0.0;
        off_max = std::numeric_limits<double>::infinity();
    }
    report.checks.push_back({"eigenvector alignment", diag_min, 1.0 - model.delta0, diag_min >= 1.0 - model.delta0,
                             "min |l_i(u1) . r_i(u2)|"});
    report.checks.push_back({"eigenvector cross terms", off_max, model.delta0, off_max <= model.delta0,
                             "max |l_i(u1) . r_j(u2)|, i != j"});
    const double edge = std::max(std::abs(model.lam_low.front()), std::abs(model.lam_high.back()));
    report.checks.push_back({"window contains bands", edge, model.M, model.M > edge, "max |band edge| against M"});
    return report;
}

}  // namespace dafermos
