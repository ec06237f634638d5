#include "dafermos/wave_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dafermos/quadrature.hpp"

namespace dafermos {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Values below this are subnormal or close to it; their logarithms are too coarse for ratio fits.
constexpr double kTiny = 1e-290;

std::size_t argmin_with_tie(const std::vector<double>& G, TieBreak tie) {
    const double gmin = *std::min_element(G.begin(), G.end());
    double lo = G.front(), hi = G.front();
    for (double v : G) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double tol = 1e-12 * std::max(1.0, hi - lo);
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < G.size(); ++k) {
        if (G[k] <= gmin + tol) {
            best = k;
            found = true;
            if (tie == TieBreak::Leftmost) break;
        }
    }
    return found ? best : 0;
}

// Log-space evaluation of outer(y) * integral_{anchor}^y exp(inner(x)) dx, signed by the direction.
std::vector<double> log_form(const std::vector<double>& log_outer, const std::vector<double>& log_inner, double dx,
                             std::size_t anchor) {
    const auto C = log_cumulative_from(log_inner, dx, anchor);
    std::vector<double> out(log_outer.size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (k == anchor || C[k] == kNegInf) continue;
        const double mag = std::exp(log_outer[k] + C[k]);
        out[k] = k > anchor ? mag : -mag;
    }
    return out;
}

// phi_i(y) integral_c^y psi phi_j / phi_i in both forms: through log phi_i, and through
// phi_j(y) integral_c^y psi(x) phi(x, y; mu_i - mu_j) dx.
Coefficient two_forms(const WaveMeasureSet& set, const std::vector<double>& log_psi, int j, int i, double c_i) {
    const auto& fi = set.families.at(static_cast<std::size_t>(i));
    const auto& fj = set.families.at(static_cast<std::size_t>(j));
    const Grid& g = set.grid;
    const std::size_t n = g.n;
    Coefficient out;
    out.anchor = g.nearest(c_i);

    std::vector<double> inner1(n);
    for (std::size_t k = 0; k < n; ++k) inner1[k] = log_psi[k] + fj.log_phi[k] - fi.log_phi[k];
    out.value = log_form(fi.log_phi, inner1, g.dx, out.anchor);

    std::vector<double> diff(n);
    for (std::size_t k = 0; k < n; ++k) diff[k] = fi.mu[k] - fj.mu[k];
    const auto K = cumulative_trapezoid(diff, g.dx);
    std::vector<double> outer2(n), inner2(n);
    for (std::size_t k = 0; k < n; ++k) {
        outer2[k] = fj.log_phi[k] + K[k] / set.eps;
        inner2[k] = log_psi[k] - K[k] / set.eps;
    }
    out.alternate = log_form(outer2, inner2, g.dx, out.anchor);

    for (std::size_t k = 0; k < n; ++k) {
        const double a = std::abs(out.value[k]), b = std::abs(out.alternate[k]);
        if (a > 1e-300 && b > 1e-300)
            out.max_relative_gap = std::max(out.max_relative_gap, std::abs(out.value[k] - out.alternate[k]) / std::max(a, b));
    }
    return out;
}

double sup_log_ratio(const std::vector<double>& value, const std::vector<std::vector<double>>& log_terms) {
    double best = kNegInf;
    for (std::size_t k = 0; k < value.size(); ++k) {
        if (std::abs(value[k]) < kTiny) continue;
        double denom = kNegInf;
        for (const auto& t : log_terms) denom = log_add(denom, t[k]);
        best = std::max(best, std::log(std::abs(value[k])) - denom);
    }
    return best;
}

double spread(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? (*hi - *lo) / *lo : std::numeric_limits<double>::infinity();
}

}  // namespace

double WaveMeasure::mass() const { return std::exp(log_mass); }

double find_rho(const ClassLFunction& f, std::size_t scan_points, TieBreak tie) {
    const Grid g(f.M, std::max<std::size_t>(scan_points, 3));
    std::vector<double> h(g.n), neg(g.n);
    for (std::size_t k = 0; k < g.n; ++k) {
        h[k] = f.h(g.x(k));
        neg[k] = -h[k];
    }
    const auto G = cumulative_trapezoid(neg, g.dx);
    const std::size_t k = argmin_with_tie(G, tie);
    double a, b;
    if (h[k] == 0.0) return std::clamp(g.x(k), f.lam_min, f.lam_max);
    if (h[k] < 0.0 && k > 0) {
        a = g.x(k - 1);
        b = g.x(k);
    } else if (h[k] > 0.0 && k + 1 < g.n) {
        a = g.x(k);
        b = g.x(k + 1);
    } else {
        return std::clamp(g.x(k), f.lam_min, f.lam_max);
    }
    double ha = f.h(a);
    if (!(ha > 0.0 && f.h(b) <= 0.0)) return std::clamp(g.x(k), f.lam_min, f.lam_max);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        if (f.h(mid) > 0.0) a = mid; else b = mid;
    }
    return std::clamp(0.5 * (a + b), f.lam_min, f.lam_max);
}

double find_rho(const GridFunction& mu, TieBreak tie) {
    const Grid& g = mu.grid;
    std::vector<double> neg(g.n);
    for (std::size_t k = 0; k < g.n; ++k) neg[k] = -mu[k];
    const auto G = cumulative_trapezoid(neg, g.dx);
    const std::size_t k = argmin_with_tie(G, tie);
    auto root = [&](std::size_t a) {
        const double ya = mu[a], yb = mu[a + 1];
        return g.x(a) + g.dx * ya / (ya - yb);
    };
    if (mu[k] == 0.0) return g.x(k);
    if (mu[k] < 0.0 && k > 0 && mu[k - 1] > 0.0) return root(k - 1);
    if (mu[k] > 0.0 && k + 1 < g.n && mu[k + 1] < 0.0) return root(k);
    return g.x(k);
}

WaveMeasureSet build_phi_star(const std::vector<GridFunction>& mu, double eps) {
    if (mu.empty()) throw WaveMeasureError("no families given");
    if (!(eps > 0.0)) throw WaveMeasureError("eps must be positive");
    WaveMeasureSet set;
    set.grid = mu.front().grid;
    set.eps = eps;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const GridFunction& m = mu[i];
        if (!(m.values.front() > 0.0 && m.values.back() < 0.0)) {
            std::ostringstream os;
            os << "family " << i + 1 << ": mu is not of class L (mu(-M) = " << m.values.front()
               << ", mu(M) = " << m.values.back() << ")";
            throw WaveMeasureError(os.str());
        }
        WaveMeasure w;
        w.mu = m;
        w.rho = find_rho(m);
        const Grid& g = m.grid;
        std::vector<double> neg(g.n);
        for (std::size_t k = 0; k < g.n; ++k) neg[k] = -m[k];
        const auto G = cumulative_trapezoid(neg, g.dx);
        const double G_rho = antiderivative_at(G, neg, g, w.rho);
        w.g = GridFunction(g);
        std::vector<double> logw(g.n);
        for (std::size_t k = 0; k < g.n; ++k) {
            w.g[k] = G[k] - G_rho;
            logw[k] = -w.g[k] / eps;
        }
        w.log_mass = log_trapezoid(logw, g.dx);
        w.log_phi.resize(g.n);
        w.phi.resize(g.n);
        for (std::size_t k = 0; k < g.n; ++k) {
            w.log_phi[k] = logw[k] - w.log_mass;
            w.phi[k] = std::exp(w.log_phi[k]);
        }
        set.families.push_back(std::move(w));
    }
    return set;
}

double log_phi_ratio(double y, double x, const GridFunction& h, double eps) {
    const auto H = cumulative_trapezoid(h.values, h.grid.dx);
    return (antiderivative_at(H, h.values, h.grid, x) - antiderivative_at(H, h.values, h.grid, y)) / eps;
}

Coefficient compute_J(const WaveMeasureSet& set, int j, int i, double c_i) {
    return two_forms(set, std::vector<double>(set.grid.n, 0.0), j, i, c_i);
}

Coefficient compute_F(const WaveMeasureSet& set, int j, int k, int i, double c_i) {
    return two_forms(set, set.families.at(static_cast<std::size_t>(k)).log_phi, j, i, c_i);
}

Coefficient compute_J_psi(const WaveMeasureSet& set, const GridFunction& psi, int j, int i, double c_i) {
    std::vector<double> log_psi(set.grid.n);
    for (std::size_t k = 0; k < set.grid.n; ++k) {
        if (psi[k] < 0.0) throw WaveMeasureError("psi must be nonnegative");
        log_psi[k] = psi[k] > 0.0 ? std::log(psi[k]) : kNegInf;
    }
    return two_forms(set, log_psi, j, i, c_i);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

bool BoundsReport::all_passed() const {
    return std::all_of(bounds.begin(), bounds.end(), [](const FittedBound& b) { return b.passed; });
}

const FittedBound* BoundsReport::find(const std::string& name) const {
    for (const auto& b : bounds)
        if (b.name == name) return &b;
    return nullptr;
}

BoundsReport verify_bounds(const std::vector<LadderPoint>& ladder, const BandInfo& bands) {
    BoundsReport rep;
    if (ladder.empty()) return rep;
    const int N = static_cast<int>(ladder.front().measures.size());
    const auto NN = static_cast<std::size_t>(N);
    if (bands.low.size() != NN || bands.high.size() != NN) throw WaveMeasureError("band info must list every family");
    for (const auto& lp : ladder) rep.eps.push_back(lp.measures.eps);
    std::vector<double> log_eps, inv_eps;
    for (double e : rep.eps) {
        log_eps.push_back(std::log(e));
        inv_eps.push_back(1.0 / e);
    }
    std::vector<double> centers(NN);
    for (std::size_t i = 0; i < NN; ++i) centers[i] = 0.5 * (bands.low[i] + bands.high[i]);

    FittedBound mass{"unit mass", {}, 0, true, ""};
    FittedBound diag{"diagonal linear coefficient", {}, 0, true, ""};
    FittedBound quad{"quadratic coefficient", {}, 0, true, ""};
    FittedBound convex{"quadratic convexity", {}, 0, true, ""};
    FittedBound masses{"mass bounds", {}, 0, true, ""};
    FittedBound asym{"asymptotic integral", {}, 0, true, ""};
    FittedBound forms{"two-form agreement", {}, 0, true, ""};
    std::vector<FittedBound> offdiag, jpsi, local, wavelocal;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (i == j) continue;
            std::ostringstream a, b, c;
            a << "linear coefficient " << j + 1 << "->" << i + 1;
            b << "resonant coefficient " << j + 1 << "->" << i + 1;
            c << "cross-band suppression " << i + 1 << " on band " << j + 1;
            offdiag.push_back({a.str(), {}, 0, false, ""});
            jpsi.push_back({b.str(), {}, 0, false, ""});
            local.push_back({c.str(), {}, 0, false, ""});
        }
    const double kappa = 0.25;
    for (int i = 0; i < N; ++i) {
        std::ostringstream a;
        a << "concentration of family " << i + 1;
        wavelocal.push_back({a.str(), {}, 0, false, ""});
    }

    for (const auto& lp : ladder) {
        const WaveMeasureSet& set = lp.measures;
        const Grid& g = set.grid;
        const double eps = set.eps;
        double mass_err = 0, diag_ratio = 0, quad_c = 0, convex_excess = 0, cmass = std::numeric_limits<double>::infinity();
        double asym_ratio = 0, gap = 0;
        double imax = 0;
        const double psi_l1 = trapezoid(lp.psi.values, g.dx);

        for (int i = 0; i < N; ++i) {
            const auto& fi = set.families[static_cast<std::size_t>(i)];
            mass_err = std::max(mass_err, std::abs(trapezoid(fi.phi, g.dx) - 1.0));
            cmass = std::min(cmass, fi.mass() / eps);
            imax = std::max(imax, fi.mass());

            Coefficient Jii = compute_J(set, i, i, centers[static_cast<std::size_t>(i)]);
            gap = std::max(gap, Jii.max_relative_gap);
            for (std::size_t k = 0; k < g.n; ++k) {
                if (std::abs(Jii.value[k]) < kTiny) continue;
                diag_ratio = std::max(diag_ratio, std::exp(std::log(std::abs(Jii.value[k])) - std::log(2.0 * g.M) - fi.log_phi[k]));
            }

            for (int j = 0; j < N; ++j)
                for (int k2 = j; k2 < N; ++k2) {
                    Coefficient F = compute_F(set, j, k2, i, centers[static_cast<std::size_t>(i)]);
                    gap = std::max(gap, F.max_relative_gap);
                    const double r = sup_log_ratio(F.value, {fi.log_phi, set.families[static_cast<std::size_t>(j)].log_phi,
                                                             set.families[static_cast<std::size_t>(k2)].log_phi});
                    quad_c = std::max(quad_c, std::exp(r));
                    if (j != k2) {
                        Coefficient Fjj = compute_F(set, j, j, i, centers[static_cast<std::size_t>(i)]);
                        Coefficient Fkk = compute_F(set, k2, k2, i, centers[static_cast<std::size_t>(i)]);
                        for (std::size_t x = 0; x < g.n; ++x) {
                            const double rhs = 0.5 * (std::abs(Fjj.value[x]) + std::abs(Fkk.value[x]));
                            convex_excess = std::max(convex_excess, std::abs(F.value[x]) - rhs * (1 + 1e-12));
                        }
                    }
                }

            // Positive-h stretches to the right of band i (h = -mu_i) and to its left (h = mu_i).
            const double hi_edge = bands.high[static_cast<std::size_t>(i)] + kappa;
            const double lo_edge = bands.low[static_cast<std::size_t>(i)] - kappa;
            for (int side = 0; side < 2; ++side) {
                const double a = side == 0 ? hi_edge : -g.M;
                const double b = side == 0 ? g.M : lo_edge;
                if (!(b > a)) continue;
                const std::size_t ka = g.nearest(a), kb = g.nearest(b);
                if (kb <= ka + 1) continue;
                std::vector<double> h;
                double hmin = std::numeric_limits<double>::infinity();
                for (std::size_t x = ka; x <= kb; ++x) {
                    const double hv = side == 0 ? -fi.mu[x] : fi.mu[x];
                    h.push_back(hv);
                    hmin = std::min(hmin, hv);
                }
                if (!(hmin > 0.0)) continue;
                const auto H = cumulative_trapezoid(h, g.dx);
                std::vector<double> logint(h.size());
                for (std::size_t x = 0; x < h.size(); ++x) logint[x] = -(H.back() - H[x]) / eps;
                const double integral = std::exp(log_trapezoid(logint, g.dx));
                asym_ratio = std::max(asym_ratio, integral / (eps / hmin));
            }

            // Unnormalized phi_i = exp(-g_i / eps) away from its band against exp(-kappa^2 d_min / 2 eps).
            double sup_out = kNegInf;
            for (std::size_t x = 0; x < g.n; ++x) {
                const double xv = g.x(x);
                if (xv < lo_edge || xv > hi_edge) sup_out = std::max(sup_out, fi.log_phi[x] + fi.log_mass);
            }
            wavelocal[static_cast<std::size_t>(i)].per_eps.push_back(sup_out);
        }

        std::size_t pair = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                if (i == j) continue;
                const auto& fi = set.families[static_cast<std::size_t>(i)];
                const auto& fj = set.families[static_cast<std::size_t>(j)];
                const double c = centers[static_cast<std::size_t>(i)];
                Coefficient J = compute_J(set, j, i, c);
                gap = std::max(gap, J.max_relative_gap);
                offdiag[pair].per_eps.push_back(std::exp(sup_log_ratio(J.value, {fi.log_phi, fj.log_phi})));
                Coefficient Jp = compute_J_psi(set, lp.psi, j, i, c);
                gap = std::max(gap, Jp.max_relative_gap);
                jpsi[pair].per_eps.push_back(std::exp(sup_log_ratio(Jp.value, {fi.log_phi, fj.log_phi})) / psi_l1);
                double loc = kNegInf;
                for (std::size_t x = 0; x < g.n; ++x) {
                    const double xv = g.x(x);
                    if (xv >= bands.low[static_cast<std::size_t>(j)] && xv <= bands.high[static_cast<std::size_t>(j)])
                        loc = std::max(loc, fi.log_phi[x] - fj.log_phi[x]);
                }
                local[pair].per_eps.push_back(loc);
                ++pair;
            }

        mass.per_eps.push_back(mass_err);
        diag.per_eps.push_back(diag_ratio);
        quad.per_eps.push_back(quad_c);
        convex.per_eps.push_back(std::max(0.0, convex_excess));
        masses.per_eps.push_back(cmass);
        asym.per_eps.push_back(asym_ratio);
        forms.per_eps.push_back(gap);
        if (imax > 2.0 * g.M) masses.passed = false;
    }

    mass.fitted = *std::max_element(mass.per_eps.begin(), mass.per_eps.end());
    mass.passed = mass.fitted <= 1e-8;
    mass.verdict = "max |integral phi_i - 1| over the ladder";
    diag.fitted = *std::max_element(diag.per_eps.begin(), diag.per_eps.end());
    diag.passed = diag.fitted <= 1.0 + 1e-12;
    diag.verdict = "max |J_ii| / (2 M phi_i)";
    quad.fitted = *std::max_element(quad.per_eps.begin(), quad.per_eps.end()) /
                  *std::min_element(quad.per_eps.begin(), quad.per_eps.end());
    quad.passed = quad.fitted <= 2.0;
    quad.verdict = "max over min of the fitted constant C";
    convex.fitted = *std::max_element(convex.per_eps.begin(), convex.per_eps.end());
    convex.passed = convex.fitted <= 1e-300;
    convex.verdict = "excess of |F_jk| over (|F_jj| + |F_kk|) / 2";
    masses.fitted = *std::min_element(masses.per_eps.begin(), masses.per_eps.end());
    masses.passed = masses.passed && masses.fitted > 0.0;
    masses.verdict = "min I_i / eps; every I_i <= 2M";
    asym.fitted = *std::max_element(asym.per_eps.begin(), asym.per_eps.end());
    asym.passed = asym.fitted <= 1.0;
    asym.verdict = "max integral / (eps / h_min)";
    forms.fitted = *std::max_element(forms.per_eps.begin(), forms.per_eps.end());
    forms.passed = forms.fitted <= 1e-8;
    forms.verdict = "max relative gap between the two forms";

    for (auto& b : offdiag) {
        std::vector<double> logs;
        for (double v : b.per_eps) logs.push_back(std::log(v));
        b.fitted = fit_slope(log_eps, logs);
        b.passed = b.fitted >= 0.8;
        b.verdict = "slope of log sup |J| / (phi_i + phi_j) against log eps";
    }
    // The constant is stable when psi has width O(eps) and overlaps band j; otherwise it decays,
    // which still satisfies the bound.
    for (auto& b : jpsi) {
        b.fitted = spread(b.per_eps);
        const double first = b.per_eps.front();
        const double top = *std::max_element(b.per_eps.begin(), b.per_eps.end());
        const bool stable = b.fitted < 0.25;
        const bool bounded = top <= 1.25 * first;
        b.passed = stable || bounded;
        b.verdict = stable ? "(max - min) / min of C over the ladder; stable"
                           : (bounded ? "(max - min) / min of C over the ladder; C decays along the ladder"
                                      : "(max - min) / min of C over the ladder; C grows");
    }
    for (auto& b : local) {
        b.fitted = -fit_slope(inv_eps, b.per_eps);
        b.passed = b.fitted > 0.0;
        b.verdict = "decay constant D in log ratio = log C - D / eps";
        for (double& v : b.per_eps) v = std::exp(v);
    }
    for (std::size_t i = 0; i < wavelocal.size(); ++i) {
        auto& b = wavelocal[i];
        const double predicted = 0.5 * kappa * kappa * (bands.d_min.size() > i ? bands.d_min[i] : 1.0);
        b.fitted = -fit_slope(inv_eps, b.per_eps);
        b.passed = b.fitted >= 0.9 * predicted;
        std::ostringstream os;
        os << "fitted decay rate against kappa^2 d_min / 2 = " << predicted;
        b.verdict = os.str();
        for (double& v : b.per_eps) v = std::exp(v);
    }

    rep.bounds = {mass, diag};
    rep.bounds.insert(rep.bounds.end(), offdiag.begin(), offdiag.end());
    rep.bounds.push_back(quad);
    rep.bounds.push_back(convex);
    rep.bounds.insert(rep.bounds.end(), jpsi.begin(), jpsi.end());
    rep.bounds.insert(rep.bounds.end(), local.begin(), local.end());
    rep.bounds.push_back(asym);
    rep.bounds.push_back(masses);
    rep.bounds.insert(rep.bounds.end(), wavelocal.begin(), wavelocal.end());
    rep.bounds.push_back(forms);
    return rep;
}

}  // namespace dafermos
