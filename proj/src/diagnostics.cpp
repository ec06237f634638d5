#include "dafermos/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dafermos/color_profile.hpp"
#include "dafermos/quadrature.hpp"
#include "dafermos/spectral.hpp"
#include "dafermos/wave_measures.hpp"

namespace dafermos {

namespace {

const HalfModel& half_of(const ScalarCouplingModel& model, Side side) {
    return side == Side::Minus ? model.minus : model.plus;
}

// integral of a(w) (xi phi)' - b(w) phi' for one bump, trapezoid on the solution grid.
double bump_form(const ScalarSolution& s, const RealFn& gamma, const RealFn& a, const RealFn& b, const BumpTest& bump) {
    const Grid& g = s.u.grid;
    const std::size_t k0 = g.cell(bump.center - bump.radius);
    const std::size_t k1 = std::min(g.n - 1, g.cell(bump.center + bump.radius) + 1);
    double sum = 0.0;
    for (std::size_t k = k0; k <= k1; ++k) {
        const double x = g.x(k);
        const double phi = bump.value(x), dphi = bump.derivative(x);
        if (phi == 0.0 && dphi == 0.0) continue;
        const double w = gamma(s.u[k]);
        const double term = a(w) * (phi + x * dphi) - b(w) * dphi;
        sum += (k == 0 || k + 1 == g.n ? 0.5 : 1.0) * term;
    }
    return sum * g.dx;
}

RealFn derivative_of(const RealFn& f, const RealFn& df) {
    if (df) return df;
    return [f](double x) { return central_difference(f, x); };
}

double invert_monotone(const RealFn& f, double target, Interval dom) {
    double lo = dom.lo, hi = dom.hi;
    const bool increasing = f(hi) >= f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < target) == increasing) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double slope = fit_slope(x, y);
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    return {my - slope * mx, slope};
}

}  // namespace

const char* side_name(Side side) { return side == Side::Minus ? "minus" : "plus"; }

double BumpTest::value(double x) const {
    const double s = (x - center) / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    const double t = 1.0 - s * s;
    return t * t * t * t;
}

double BumpTest::derivative(double x) const {
    const double s = (x - center) / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    const double t = 1.0 - s * s;
    return -8.0 * s * t * t * t / radius;
}

TestSet make_test_set(Side side, double exclusion, double M, int count) {
    if (count < 1) throw std::invalid_argument("test set needs at least one function");
    if (!(exclusion >= 0.0 && exclusion < M)) throw std::invalid_argument("exclusion zone must lie inside [0, M)");
    TestSet set;
    set.side = side;
    set.exclusion = exclusion;
    const double a = exclusion, b = M;
    const double r = (b - a) / (count + 1);
    for (int k = 0; k < count; ++k) {
        const double c = a + (k + 1) * r;
        set.bumps.push_back({side == Side::Minus ? -c : c, r});
    }
    std::ostringstream os;
    os << count << " bumps (1 - s^2)^4 of radius " << r << " on " << (side == Side::Minus ? "[-M, -" : "[")
       << exclusion << (side == Side::Minus ? "]" : ", M]");
    set.description = os.str();
    return set;
}

double weak_conservation_residual(const ScalarSolution& solution, const ScalarCouplingModel& model, Side side,
                                  const TestSet& tests) {
    const HalfModel& h = half_of(model, side);
    const RealFn id = [](double w) { return w; };
    double worst = 0.0;
    for (const auto& b : tests.bumps) worst = std::max(worst, std::abs(bump_form(solution, h.gamma, id, h.flux, b)));
    return worst;
}

EntropyPair kruzhkov_entropy(const HalfModel& half, double k) {
    const RealFn f = half.flux;
    std::ostringstream os;
    os << "|w - " << k << "|";
    return {os.str(), [k](double w) { return std::abs(w - k); },
            [f, k](double w) { return (w > k ? 1.0 : (w < k ? -1.0 : 0.0)) * (f(w) - f(k)); }};
}

double weak_entropy_residual(const ScalarSolution& solution, const ScalarCouplingModel& model, Side side,
                             const EntropyPair& entropy, const TestSet& tests) {
    const HalfModel& h = half_of(model, side);
    double wlo = std::numeric_limits<double>::infinity(), whi = -wlo;
    for (double u : solution.u.values) {
        wlo = std::min(wlo, h.gamma(u));
        whi = std::max(whi, h.gamma(u));
    }
    if (whi > wlo) {
        const int n = 65;
        const double dw = (whi - wlo) / (n - 1);
        double scale = 0.0;
        for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(entropy.eta(wlo + i * dw)));
        for (int i = 1; i + 1 < n; ++i) {
            const double w = wlo + i * dw;
            const double second = entropy.eta(w - dw) - 2.0 * entropy.eta(w) + entropy.eta(w + dw);
            if (second < -1e-10 * std::max(1.0, scale))
                throw std::invalid_argument("entropy " + entropy.name + " is not convex on the solution range");
        }
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& b : tests.bumps) worst = std::max(worst, bump_form(solution, h.gamma, entropy.eta, entropy.q, b));
    return worst;
}

WeakResidualReport weak_residual_report(const ScalarSolution& solution, const ScalarCouplingModel& model, double u_L,
                                        double u_R, int k_count, double exclusion) {
    WeakResidualReport rep;
    const double M = solution.u.grid.M;
    if (!(exclusion > 0.0)) exclusion = std::min(3.0 * std::pow(solution.eps, 0.5 * solution.p), 0.5 * M);
    const TestSet minus = make_test_set(Side::Minus, exclusion, M);
    const TestSet plus = make_test_set(Side::Plus, exclusion, M);
    rep.test_functions = minus.description + "; " + plus.description;
    rep.conservation_residual_minus = weak_conservation_residual(solution, model, Side::Minus, minus);
    rep.conservation_residual_plus = weak_conservation_residual(solution, model, Side::Plus, plus);
    rep.max_entropy_residual = -std::numeric_limits<double>::infinity();
    for (Side side : {Side::Minus, Side::Plus}) {
        const HalfModel& h = half_of(model, side);
        const double a = std::min(h.gamma(u_L), h.gamma(u_R)), b = std::max(h.gamma(u_L), h.gamma(u_R));
        for (int i = 0; i < k_count; ++i) {
            const double k = k_count == 1 ? a : a + (b - a) * i / (k_count - 1);
            const double value =
                weak_entropy_residual(solution, model, side, kruzhkov_entropy(h, k), side == Side::Minus ? minus : plus);
            rep.entropy_residuals.push_back({side, k, value});
            rep.max_entropy_residual = std::max(rep.max_entropy_residual, value);
        }
    }
    return rep;
}

bool entropy_compatible(const SystemCouplingModel& model, const MatrixField& hessian, int samples,
                        double* worst_eigenvalue) {
    double worst = std::numeric_limits<double>::infinity();
    const int nv = std::max(2, samples);
    for (const auto& u : ball_samples(model, std::max(2, samples / 4 + 1)))
        for (int i = 0; i < nv; ++i) {
            const double v = -1.0 + 2.0 * i / (nv - 1);
            const Eigen::MatrixXd S = hessian(u, v) * model.B0(u, v);
            const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
            worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff());
        }
    if (worst_eigenvalue) *worst_eigenvalue = worst;
    return worst >= -1e-12;
}

const char* wave_kind_name(WaveKind kind) {
    switch (kind) {
        case WaveKind::Shock: return "shock";
        case WaveKind::Contact: return "contact";
        case WaveKind::Rarefaction: return "rarefaction";
    }
    return "unknown";
}

double RiemannFan::at(double xi) const {
    double u = u_L;
    for (const auto& w : waves) {
        if (w.kind != WaveKind::Rarefaction) {
            if (xi <= w.speed_left) return u;
            u = w.u_right;
            continue;
        }
        if (xi <= w.speed_left) return u;
        if (xi < w.speed_right) {
            double a = w.u_left, b = w.u_right;
            const bool up = dflux(b) >= dflux(a);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                if ((dflux(mid) < xi) == up) a = mid; else b = mid;
            }
            return 0.5 * (a + b);
        }
        u = w.u_right;
    }
    return u;
}

RiemannFan exact_scalar_riemann(const RealFn& flux, double u_L, double u_R, const RealFn& dflux, int samples) {
    RiemannFan fan;
    fan.u_L = u_L;
    fan.u_R = u_R;
    fan.flux = flux;
    fan.dflux = derivative_of(flux, dflux);
    if (u_L == u_R) return fan;

    const int n = std::max(3, samples);
    const double lo = std::min(u_L, u_R), hi = std::max(u_L, u_R);
    std::vector<double> us(static_cast<std::size_t>(n)), fs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        us[static_cast<std::size_t>(i)] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
        fs[static_cast<std::size_t>(i)] = flux(us[static_cast<std::size_t>(i)]);
    }
    // Lower convex envelope for increasing data, upper concave envelope for decreasing data.
    const double orient = u_L < u_R ? 1.0 : -1.0;
    // Points within rounding of a chord are dropped so linear stretches become single contacts.
    const double fspan = *std::max_element(fs.begin(), fs.end()) - *std::min_element(fs.begin(), fs.end());
    const double collinear = 1e-13 * (hi - lo) * std::max(fspan, 1e-300);
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < us.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t o = hull[hull.size() - 2], a = hull.back();
            const double cross = (us[a] - us[o]) * (fs[i] - fs[o]) - (fs[a] - fs[o]) * (us[i] - us[o]);
            if (orient * cross <= collinear) hull.pop_back(); else break;
        }
        hull.push_back(i);
    }
    if (u_L > u_R) std::reverse(hull.begin(), hull.end());

    const double fscale = std::max(1.0, *std::max_element(fs.begin(), fs.end()) - *std::min_element(fs.begin(), fs.end()));
    for (std::size_t h = 0; h + 1 < hull.size();) {
        const std::size_t a = hull[h], b = hull[h + 1];
        const std::size_t span = a > b ? a - b : b - a;
        if (span > 1) {
            const double s = (fs[b] - fs[a]) / (us[b] - us[a]);
            double dev = 0.0;
            for (std::size_t i = std::min(a, b) + 1; i < std::max(a, b); ++i)
                dev = std::max(dev, std::abs(fs[a] + s * (us[i] - us[a]) - fs[i]));
            fan.waves.push_back({dev <= 1e-12 * fscale ? WaveKind::Contact : WaveKind::Shock, s, s, us[a], us[b]});
            ++h;
            continue;
        }
        std::size_t e = h + 1;
        while (e + 1 < hull.size()) {
            const std::size_t p = hull[e], q = hull[e + 1];
            if ((p > q ? p - q : q - p) != 1) break;
            ++e;
        }
        const double ua = us[hull[h]], ub = us[hull[e]];
        fan.waves.push_back({WaveKind::Rarefaction, fan.dflux(ua), fan.dflux(ub), ua, ub});
        h = e;
    }
    // Sampling leaves O(du) mismatches at tangency points; keep the fan ordered.
    for (std::size_t i = 1; i < fan.waves.size(); ++i) {
        auto& w = fan.waves[i];
        const double prev = fan.waves[i - 1].speed_right;
        if (w.speed_left < prev) {
            w.speed_left = prev;
            if (w.kind != WaveKind::Rarefaction) w.speed_right = prev;
        }
        w.speed_right = std::max(w.speed_right, w.speed_left);
    }
    return fan;
}

FanCheck check_fan(const RiemannFan& fan, int samples) {
    FanCheck c;
    for (const auto& w : fan.waves) {
        if (w.kind == WaveKind::Rarefaction) continue;
        const double s = w.speed_left;
        const double fl = fan.flux(w.u_left), fr = fan.flux(w.u_right);
        c.rankine_hugoniot = std::max(c.rankine_hugoniot, std::abs(s * (w.u_right - w.u_left) - (fr - fl)));
        for (int i = 1; i < samples; ++i) {
            const double u = w.u_left + (w.u_right - w.u_left) * i / samples;
            const double fu = fan.flux(u);
            const double left_chord = (fu - fl) / (u - w.u_left);
            const double right_chord = (fu - fr) / (u - w.u_right);
            c.oleinik_violation = std::max({c.oleinik_violation, s - left_chord, right_chord - s});
        }
    }
    c.ok = c.rankine_hugoniot <= 1e-10 && c.oleinik_violation <= 1e-6;
    return c;
}

ContinuationReport epsilon_continuation(const ScalarCouplingModel& model, const ScalarSolveConfig& config, double u_L,
                                        double u_R, const std::vector<double>& eps_ladder) {
    for (std::size_t i = 1; i < eps_ladder.size(); ++i)
        if (!(eps_ladder[i] < eps_ladder[i - 1])) throw std::invalid_argument("ladder must be strictly decreasing");
    ContinuationReport rep;
    const double jump = std::abs(u_R - u_L);
    const GridFunction* guess = nullptr;
    for (double eps : eps_ladder) {
        ScalarSolveConfig c = config;
        c.eps = eps;
        try {
            rep.solutions.push_back(solve_scalar(model, c, u_L, u_R, guess));
            rep.eps.push_back(eps);
            rep.tv.push_back(rep.solutions.back().tv_u);
            guess = &rep.solutions.back().u;
        } catch (const SolverError& e) {
            std::ostringstream os;
            os << "eps = " << eps << ": " << e.what();
            rep.failures.push_back(os.str());
            guess = nullptr;
        }
    }
    for (std::size_t i = 1; i < rep.solutions.size(); ++i)
        rep.l1_distances.push_back(l1_distance(rep.solutions[i].u, rep.solutions[i - 1].u));

    rep.distances_decreasing = true;
    for (std::size_t i = 1; i < rep.l1_distances.size(); ++i)
        if (rep.l1_distances[i] > rep.l1_distances[i - 1] + 1e-12) rep.distances_decreasing = false;
    rep.tv_bounded = std::all_of(rep.tv.begin(), rep.tv.end(), [&](double t) { return t <= jump + 1e-6; });

    rep.pointwise_cauchy = true;
    if (rep.solutions.size() >= 3) {
        const double M = rep.solutions.front().u.grid.M;
        const int probes = 41;
        for (int p = 0; p < probes; ++p) {
            const double xi = -M + 2.0 * M * p / (probes - 1);
            bool near_wave = false;
            for (const auto& s : rep.solutions) {
                const Grid& g = s.u.grid;
                const std::size_t a = g.cell(std::max(-M, xi - 0.1)), b = g.cell(std::min(M, xi + 0.1));
                for (std::size_t k = a; k <= b && !near_wave; ++k)
                    if (s.eps * std::abs(s.u[k + 1] - s.u[k]) / g.dx > 0.05 * jump) near_wave = true;
            }
            if (near_wave) continue;
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < rep.solutions.size(); ++i) {
                const double d = std::abs(rep.solutions[i].u.at(xi) - rep.solutions[i - 1].u.at(xi));
                if (d > prev + 1e-12 && d > 1e-10) rep.pointwise_cauchy = false;
                prev = d;
            }
        }
    }
    std::ostringstream os;
    if (!rep.failures.empty()) os << rep.failures.size() << " ladder point(s) failed; ";
    os << (rep.distances_decreasing && rep.pointwise_cauchy ? "Cauchy along the ladder"
                                                             : "not Cauchy along the ladder (flagged; only subsequential convergence is guaranteed)");
    rep.verdict = os.str();
    return rep;
}

double trace_set_distance(const ScalarCouplingModel& model, Side side, double b, double trace, int samples) {
    const HalfModel& h = half_of(model, side);
    const Interval dom = model.u_domain;
    const RealFn df = derivative_of(h.flux, h.dflux);
    double best = std::numeric_limits<double>::infinity();
    const int n = std::max(2, samples);
    for (int i = 0; i < n; ++i) {
        const double a = dom.lo + dom.width() * i / (n - 1);
        const double wl = h.gamma(side == Side::Plus ? b : a), wr = h.gamma(side == Side::Plus ? a : b);
        const RiemannFan fan = exact_scalar_riemann(h.flux, wl, wr, df, 401);
        const double w0 = fan.at(side == Side::Plus ? 1e-13 : -1e-13);
        best = std::min(best, std::abs(invert_monotone(h.gamma, w0, dom) - trace));
    }
    return best;
}

TraceReport interface_trace_report(const std::vector<ScalarSolution>& ladder, const ScalarCouplingModel& model,
                                   double tol) {
    TraceReport rep;
    if (ladder.empty()) return rep;
    for (const auto& s : ladder) {
        const Grid& g = s.u.grid;
        const double w = std::pow(s.eps, 0.5 * s.p);
        double traces[2];
        for (int side = 0; side < 2; ++side) {
            const double sgn = side == 0 ? -1.0 : 1.0;
            const double a = std::min(5.0 * w, 0.5 * g.M), b = std::min(10.0 * w, g.M);
            std::vector<double> xs, ys;
            for (std::size_t k = 0; k < g.n; ++k) {
                const double d = sgn * g.x(k);
                if (d >= a && d <= b) {
                    xs.push_back(g.x(k));
                    ys.push_back(s.u[k]);
                }
            }
            traces[side] = xs.size() >= 2 ? line_fit(xs, ys).first : s.u.at(sgn * a);
        }
        rep.eps.push_back(s.eps);
        rep.left.push_back(traces[0]);
        rep.right.push_back(traces[1]);
    }
    auto extrapolate = [&](const std::vector<double>& t) {
        const std::size_t n = t.size();
        if (n < 2) return t.back();
        const double q = 0.5 * ladder.back().p;
        const double e1 = std::pow(rep.eps[n - 2], q), e2 = std::pow(rep.eps[n - 1], q);
        return t[n - 1] + (t[n - 1] - t[n - 2]) * e2 / (e1 - e2);
    };
    rep.left_limit = extrapolate(rep.left);
    rep.right_limit = extrapolate(rep.right);
    rep.gap = rep.right_limit - rep.left_limit;
    rep.agree = std::abs(rep.gap) <= tol;

    // Weak coupling check through the trace sets, for convex or concave fluxes only.
    auto convex_or_concave = [&](const HalfModel& h) {
        const Interval d = model.u_domain;
        int sign = 0;
        const int n = 65;
        const double du = d.width() / (n - 1);
        for (int i = 1; i + 1 < n; ++i) {
            const double u = d.lo + i * du;
            const double second = h.flux(h.gamma(u - du)) - 2.0 * h.flux(h.gamma(u)) + h.flux(h.gamma(u + du));
            const int s = second > 1e-12 ? 1 : (second < -1e-12 ? -1 : 0);
            if (s != 0 && sign != 0 && s != sign) return false;
            if (s != 0) sign = s;
        }
        return true;
    };
    rep.weak_condition_checked = convex_or_concave(model.minus) && convex_or_concave(model.plus);
    if (rep.weak_condition_checked) {
        rep.right_set_distance = trace_set_distance(model, Side::Plus, rep.left_limit, rep.right_limit);
        rep.left_set_distance = trace_set_distance(model, Side::Minus, rep.right_limit, rep.left_limit);
        rep.weak_condition_ok = rep.right_set_distance <= tol && rep.left_set_distance <= tol;
    }
    std::ostringstream os;
    os << (rep.agree ? "traces agree" : "traces differ (resonant interface)") << "; ";
    if (rep.weak_condition_checked)
        os << "weak coupling condition " << (rep.weak_condition_ok ? "holds" : "fails");
    else
        os << "weak coupling condition not checked (flux neither convex nor concave)";
    rep.verdict = os.str();
    return rep;
}

}  // namespace dafermos
