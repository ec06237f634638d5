#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dafermos/color_profile.hpp"
#include "dafermos/diagnostics.hpp"
#include "dafermos/presets.hpp"
#include "dafermos/scalar_solver.hpp"
#include "dafermos/spectral.hpp"
#include "dafermos/system_solver.hpp"

namespace py = pybind11;
using namespace dafermos;

namespace {

std::vector<double> grid_points(const Grid& g) { return g.points(); }

py::dict solution_dict(const ScalarSolution& s) {
    py::dict d;
    d["xi"] = grid_points(s.u.grid);
    d["u"] = s.u.values;
    d["v"] = s.v.values;
    d["h"] = s.h.values;
    d["iterations"] = s.iterations;
    d["residual"] = s.residual;
    d["residual_history"] = s.residual_history;
    d["tv_u"] = s.tv_u;
    d["monotone"] = s.monotone;
    d["alpha"] = s.alpha;
    d["eps"] = s.eps;
    d["p"] = s.p;
    return d;
}

py::dict system_dict(const SystemSolveState& s) {
    py::dict d;
    d["xi"] = grid_points(s.u.grid);
    d["u"] = s.u.values;
    d["v"] = s.v.values;
    d["psi"] = s.psi.values;
    d["tau"] = s.tau;
    std::vector<std::vector<double>> a;
    for (const auto& f : s.a) a.push_back(f.values);
    d["a"] = a;
    d["weighted_norm_theta"] = s.weighted_norm_theta;
    d["boundary_residual"] = s.boundary_residual;
    d["outer_iterations"] = s.outer_iterations;
    d["outer_history"] = s.outer_history;
    d["correction_contractions"] = s.correction_contractions;
    d["strength_contractions"] = s.strength_contractions;
    d["max_envelope_ratio"] = s.max_envelope_ratio;
    d["tv"] = s.tv;
    d["sup_eps_u_xi"] = s.sup_eps_u_xi;
    d["decomposition_residual"] = s.decomposition_residual;
    d["ode_residual"] = s.ode_residual;
    d["A"] = s.A;
    d["delta"] = s.delta;
    d["r"] = s.r;
    d["varsigma"] = s.varsigma;
    d["beta"] = s.beta;
    d["A0_norm"] = s.A0_norm;
    d["eps"] = s.eps;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Self-similar vanishing-viscosity Riemann solutions for coupled hyperbolic models";
    m.attr("__version__") = DAFERMOS_VERSION;

    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<SpectralError>(m, "SpectralError", PyExc_RuntimeError);

    py::class_<ScalarCouplingModel>(m, "ScalarModel")
        .def_readonly("Lambda", &ScalarCouplingModel::Lambda)
        .def_property_readonly("u_domain",
                               [](const ScalarCouplingModel& s) { return std::make_pair(s.u_domain.lo, s.u_domain.hi); })
        .def("speed", &ScalarCouplingModel::speed, py::arg("u"), py::arg("v"));

    py::class_<SystemCouplingModel>(m, "SystemModel")
        .def_readonly("N", &SystemCouplingModel::N)
        .def_readonly("center", &SystemCouplingModel::center)
        .def_readonly("delta0", &SystemCouplingModel::delta0)
        .def_readonly("lam_low", &SystemCouplingModel::lam_low)
        .def_readonly("lam_high", &SystemCouplingModel::lam_high)
        .def_readonly("eta", &SystemCouplingModel::eta)
        .def_readonly("nu", &SystemCouplingModel::nu)
        .def_readonly("M", &SystemCouplingModel::M)
        .def_readonly("name", &SystemCouplingModel::name)
        .def("A", &SystemCouplingModel::A, py::arg("u"), py::arg("v"))
        .def("B", &SystemCouplingModel::B, py::arg("u"), py::arg("v"));

    m.def("scalar_preset", &scalar_preset, py::arg("name"));
    m.def("scalar_preset_names", &scalar_preset_names);
    m.def("p_system_preset", [] { return p_system_preset(); });
    m.def("scalar_as_system", &scalar_as_system, py::arg("model"), py::arg("center"));

    py::class_<ColorProfile>(m, "ColorProfile")
        .def(py::init<double, double, double>(), py::arg("eps"), py::arg("p"), py::arg("M"))
        .def_readonly("eps", &ColorProfile::eps)
        .def_readonly("p", &ColorProfile::p)
        .def_readonly("M", &ColorProfile::M)
        .def_readonly("normalization", &ColorProfile::normalization)
        .def("v", [](const ColorProfile& c, double xi) { return evaluate_v(c, xi); }, py::arg("xi"))
        .def("psi", [](const ColorProfile& c, double xi) { return evaluate_psi(c, xi); }, py::arg("xi"))
        .def("sgn_deviation", [](const ColorProfile& c, double cut) { return sgn_deviation(c, cut); }, py::arg("c"));

    py::class_<ScalarSolveConfig>(m, "ScalarSolveConfig")
        .def(py::init<>())
        .def_readwrite("eps", &ScalarSolveConfig::eps)
        .def_readwrite("p", &ScalarSolveConfig::p)
        .def_readwrite("M", &ScalarSolveConfig::M)
        .def_readwrite("grid_size", &ScalarSolveConfig::grid_size)
        .def_readwrite("fix_tol", &ScalarSolveConfig::fix_tol)
        .def_readwrite("max_iters", &ScalarSolveConfig::max_iters)
        .def_readwrite("relaxation", &ScalarSolveConfig::relaxation)
        .def_readwrite("anderson_depth", &ScalarSolveConfig::anderson_depth);

    m.def(
        "solve_scalar",
        [](const ScalarCouplingModel& model, const ScalarSolveConfig& config, double u_L, double u_R) {
            return solution_dict(solve_scalar(model, config, u_L, u_R));
        },
        py::arg("model"), py::arg("config"), py::arg("u_L"), py::arg("u_R"));

    py::class_<SpectralData>(m, "SpectralData")
        .def_readonly("mu", &SpectralData::mu)
        .def_readonly("r_hat", &SpectralData::r_hat)
        .def_readonly("l_hat", &SpectralData::l_hat)
        .def_readonly("lambda_hat", &SpectralData::lambda_hat)
        .def_readonly("d", &SpectralData::d)
        .def_readonly("residual", &SpectralData::residual)
        .def_readonly("biorthogonality", &SpectralData::biorthogonality)
        .def_readonly("condition", &SpectralData::condition)
        .def_readonly("near_defective", &SpectralData::near_defective);

    m.def(
        "generalized_eigen",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double xi) { return generalized_eigen(A, B, xi); },
        py::arg("A"), py::arg("B"), py::arg("xi"));
    m.def(
        "solve_generalized_eigen",
        [](const SystemCouplingModel& model, const Eigen::VectorXd& u, double v, double xi) {
            return solve_generalized_eigen(model, u, v, xi);
        },
        py::arg("model"), py::arg("u"), py::arg("v"), py::arg("xi"));

    py::class_<SystemSolveConfig>(m, "SystemSolveConfig")
        .def(py::init<>())
        .def_readwrite("eps", &SystemSolveConfig::eps)
        .def_readwrite("p", &SystemSolveConfig::p)
        .def_readwrite("M", &SystemSolveConfig::M)
        .def_readwrite("grid_size", &SystemSolveConfig::grid_size)
        .def_readwrite("outer_tol", &SystemSolveConfig::outer_tol)
        .def_readwrite("max_outer", &SystemSolveConfig::max_outer)
        .def_readwrite("relaxation", &SystemSolveConfig::relaxation)
        .def_readwrite("enforce_smallness", &SystemSolveConfig::enforce_smallness);

    m.def(
        "solve_system",
        [](const SystemCouplingModel& model, const SystemSolveConfig& config, const Eigen::VectorXd& u_L,
           const Eigen::VectorXd& u_R) { return system_dict(solve_system(model, config, u_L, u_R)); },
        py::arg("model"), py::arg("config"), py::arg("u_L"), py::arg("u_R"));

    m.def(
        "exact_scalar_riemann",
        [](const std::function<double(double)>& flux, double u_L, double u_R, const std::vector<double>& xi) {
            const RiemannFan fan = exact_scalar_riemann(flux, u_L, u_R);
            std::vector<double> out;
            out.reserve(xi.size());
            for (double x : xi) out.push_back(fan.at(x));
            return out;
        },
        py::arg("flux"), py::arg("u_L"), py::arg("u_R"), py::arg("xi"),
        "Entropy solution of the scalar Riemann problem sampled at the given xi.");
}
