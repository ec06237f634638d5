#include "dafermos/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dafermos {

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> r, const Eigen::VectorXd* reference) {
    if (reference) {
        if (r.dot(*reference) < 0.0) r = -r;
        return;
    }
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < r.size(); ++k)
        if (std::abs(r(k)) > std::abs(r(best))) best = k;
    if (r(best) < 0.0) r = -r;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 1)), 0.5 * (a + b));
    if (n > 1)
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return out;
}

}  // namespace

double matrix_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

SpectralData generalized_eigen(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double xi,
                               const SpectralData* previous) {
    const Eigen::Index N = A.rows();
    const Eigen::MatrixXd shifted = A - xi * Eigen::MatrixXd::Identity(N, N);
    const Eigen::MatrixXd K = B.partialPivLu().solve(shifted);

    Eigen::EigenSolver<Eigen::MatrixXd> es(K, true);
    if (es.info() != Eigen::Success) throw SpectralError("eigensolver failed");
    const double scale = std::max(1.0, K.norm());
    for (Eigen::Index i = 0; i < N; ++i)
        if (std::abs(es.eigenvalues()(i).imag()) > 1e-10 * scale) {
            std::ostringstream os;
            os << "complex generalized eigenvalue " << es.eigenvalues()(i);
            throw SpectralError(os.str());
        }

    Eigen::MatrixXd R(N, N);
    Eigen::VectorXd mu(N), lam(N), d(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        Eigen::VectorXd r = es.eigenvectors().col(i).real();
        r.normalize();
        R.col(i) = r;
        mu(i) = es.eigenvalues()(i).real();
        lam(i) = r.dot(A * r);
        d(i) = 1.0 / r.dot(B * r);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return lam(a) < lam(b); });

    SpectralData out;
    out.mu.resize(N);
    out.lambda_hat.resize(N);
    out.d.resize(N);
    out.r_hat.resize(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        out.mu(i) = mu(src);
        out.lambda_hat(i) = lam(src);
        out.d(i) = d(src);
        out.r_hat.col(i) = R.col(src);
        Eigen::VectorXd ref;
        if (previous && previous->r_hat.cols() == N) ref = previous->r_hat.col(i);
        fix_sign(out.r_hat.col(i), previous ? &ref : nullptr);
    }

    const Eigen::MatrixXd BR = B * out.r_hat;
    out.l_hat = BR.partialPivLu().inverse();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.r_hat);
    const auto& sv = svd.singularValues();
    out.condition = sv(N - 1) > 0.0 ? sv(0) / sv(N - 1) : std::numeric_limits<double>::infinity();
    out.near_defective = out.condition > 1e8;

    out.residual = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
        out.residual = std::max(out.residual, (shifted * out.r_hat.col(i) - out.mu(i) * B * out.r_hat.col(i)).norm());
    out.biorthogonality = (out.l_hat * BR - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
    return out;
}

SpectralData solve_generalized_eigen(const SystemCouplingModel& model, const Eigen::VectorXd& u, double v, double xi,
                                     const SpectralData* previous) {
    try {
        return generalized_eigen(model.A(u, v), model.B(u, v), xi, previous);
    } catch (const SpectralError& e) {
        std::ostringstream os;
        os << e.what() << " at u = (" << u.transpose() << "), v = " << v << ", xi = " << xi;
        throw SpectralError(os.str());
    }
}

SpectralData hyperbolic_eigen(const Eigen::MatrixXd& A) {
    return generalized_eigen(A, Eigen::MatrixXd::Identity(A.rows(), A.cols()), 0.0, nullptr);
}

std::vector<Eigen::VectorXd> ball_samples(const SystemCouplingModel& model, int per_axis) {
    const int N = model.N;
    std::vector<Eigen::VectorXd> out;
    if (per_axis <= 1) {
        out.push_back(model.center);
        return out;
    }
    const auto axis = linspace(-model.delta0, model.delta0, per_axis);
    std::vector<int> idx(static_cast<std::size_t>(N), 0);
    bool has_center = false;
    while (true) {
        Eigen::VectorXd off(N);
        for (int k = 0; k < N; ++k) off(k) = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        if (off.norm() <= model.delta0 * (1.0 + 1e-12)) {
            out.push_back(model.center + off);
            if (off.norm() == 0.0) has_center = true;
        }
        int k = 0;
        while (k < N && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == N) break;
    }
    if (!has_center) out.insert(out.begin(), model.center);
    return out;
}

EtaNu estimate_eta_nu(const SystemCouplingModel& model, int sample_count, int state_samples_per_axis) {
    const int N = model.N;
    const auto states = ball_samples(model, state_samples_per_axis);
    const auto vs = linspace(-1.0, 1.0, std::max(2, sample_count));
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);

    EtaNu out;
    for (const auto& u : states)
        for (double v : vs) out.eta = std::max(out.eta, matrix_norm(model.B(u, v) - I));

    // With B = I the eigenvectors do not depend on xi.
    const std::vector<double> xis = out.eta == 0.0 ? std::vector<double>{0.0} : linspace(-model.M, model.M, 5);
    const double h = 1e-5;
    for (const auto& u : states)
        for (double v : vs)
            for (double xi : xis) {
                SpectralData base = solve_generalized_eigen(model, u, v, xi);
                const double vp = std::min(v + h, 1.0), vm = std::max(v - h, -1.0);
                SpectralData sp = solve_generalized_eigen(model, u, vp, xi, &base);
                SpectralData sm = solve_generalized_eigen(model, u, vm, xi, &base);
                const Eigen::MatrixXd dBR = (model.B(u, vp) * sp.r_hat - model.B(u, vm) * sm.r_hat) / (vp - vm);
                out.nu = std::max(out.nu, (base.l_hat * dBR).cwiseAbs().maxCoeff());
            }
    return out;
}

XiDerivativeReport check_xi_derivatives(const SystemCouplingModel& model, const Eigen::VectorXd& u, double v,
                                        double xi, double step) {
    const int N = model.N;
    XiDerivativeReport rep;
    rep.step = step;
    rep.eta = model.eta;
    const SpectralData base = solve_generalized_eigen(model, u, v, xi);
    auto derivs = [&](double h, std::vector<double>& dr, std::vector<double>& dmu) {
        SpectralData p = solve_generalized_eigen(model, u, v, xi + h, &base);
        SpectralData m = solve_generalized_eigen(model, u, v, xi - h, &base);
        dr.resize(static_cast<std::size_t>(N));
        dmu.resize(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            dr[static_cast<std::size_t>(i)] = ((p.r_hat.col(i) - m.r_hat.col(i)) / (2 * h)).norm();
            dmu[static_cast<std::size_t>(i)] = (p.mu(i) - m.mu(i)) / (2 * h);
        }
    };
    derivs(step, rep.dr_norm, rep.dmu);
    derivs(0.5 * step, rep.dr_norm_half, rep.dmu_half);
    rep.dmu_plus_one.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        rep.dmu_plus_one[ii] = std::abs(rep.dmu[ii] + 1.0);
        rep.richardson_change = std::max({rep.richardson_change, std::abs(rep.dr_norm[ii] - rep.dr_norm_half[ii]),
                                          std::abs(rep.dmu[ii] - rep.dmu_half[ii])});
    }
    return rep;
}

}  // namespace dafermos
