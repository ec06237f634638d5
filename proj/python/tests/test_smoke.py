import math

import numpy as np
import pytest

import dafermos


def test_presets_listed():
    names = dafermos.scalar_preset_names()
    assert "burgers-identical" in names
    assert "linear-advection-pair" in names


def test_constant_data_gives_constant_solution():
    model = dafermos.scalar_preset("burgers-identical")
    sol = dafermos.solve_scalar(model, dafermos.ScalarSolveConfig(), 0.3, 0.3)
    assert np.allclose(sol["u"], 0.3, atol=1e-14)
    assert sol["tv_u"] == pytest.approx(0.0, abs=1e-14)


def test_burgers_shock_is_monotone_and_tv_bounded():
    model = dafermos.scalar_preset("burgers-identical")
    cfg = dafermos.ScalarSolveConfig()
    cfg.eps = 0.05
    sol = dafermos.solve_scalar(model, cfg, 1.0, 0.0)
    assert sol["monotone"]
    assert sol["tv_u"] <= 1.0 + 1e-6
    xi = np.asarray(sol["xi"])
    exact = np.asarray(dafermos.exact_scalar_riemann(lambda w: 0.5 * w * w, 1.0, 0.0, list(xi)))
    l1 = np.trapezoid(np.abs(np.asarray(sol["u"]) - exact), xi)
    assert l1 <= 5 * cfg.eps


def test_color_profile_limits():
    prof = dafermos.ColorProfile(0.05, 1.0, 2.0)
    assert prof.v(-2.0) == pytest.approx(-1.0)
    assert prof.v(2.0) == pytest.approx(1.0)
    assert prof.v(0.0) == pytest.approx(0.0, abs=1e-14)
    assert prof.psi(0.0) > 0.0


def test_generalized_eigen_identity_weight():
    A = np.array([[0.0, -1.0], [2.0, 0.0]])
    with pytest.raises(dafermos.SpectralError):
        dafermos.generalized_eigen(A, np.eye(2), 0.0)
    A = np.array([[0.0, -1.0], [-2.0, 0.0]])
    s = dafermos.generalized_eigen(A, np.eye(2), 0.25)
    assert np.allclose(sorted(s.mu), sorted(np.linalg.eigvals(A).real - 0.25), atol=1e-12)
    assert s.residual < 1e-12


def test_p_system_small_jump():
    model = dafermos.p_system_preset()
    cfg = dafermos.SystemSolveConfig()
    cfg.eps = 0.1
    uL = np.array(model.center)
    uR = uL + np.array([0.004, 0.001])
    st = dafermos.solve_system(model, cfg, uL, uR)
    assert st["boundary_residual"] < 1e-6
    assert max(st["correction_contractions"]) < 1.0
    u = np.asarray(st["u"])
    assert np.allclose(u[0], uL, atol=1e-12)
    assert math.isfinite(st["tv"])
