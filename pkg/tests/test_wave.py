import numpy as np
import pytest

from mcrd_layers.numerics import fd_second_derivative, simpson_integral, tail_log_slope
from mcrd_layers.reaction import BistableReaction, balance_integral, find_vstar
from mcrd_layers.wave import check_speed_identity, solve_profile, wave_mass


@pytest.fixture(scope="module")
def eq_cubic():
    return find_vstar(BistableReaction.cubic_linear())


@pytest.fixture(scope="module")
def eq_mori():
    return find_vstar(BistableReaction.mori(gamma=9.0, delta=1.0))


@pytest.fixture(scope="module")
def prof_cubic(eq_cubic):
    return solve_profile(eq_cubic, 0.0, Z=20.0, n_z=4096)


def test_tanh_closed_form_is_a_solution():
    # oracle for the benchmark: q(z) = -tanh(z/sqrt(2)) solves q'' + q - q^3 = 0
    import sympy

    zs = sympy.symbols("z")
    q = -sympy.tanh(zs / sympy.sqrt(2))
    assert sympy.simplify(sympy.diff(q, zs, 2) + q - q**3) == 0


def test_cubic_profile_matches_tanh(prof_cubic):
    exact = -np.tanh(prof_cubic.z / np.sqrt(2.0))
    assert np.max(np.abs(prof_cubic.Q - exact)) <= 1e-6
    assert abs(prof_cubic.c) <= 1e-8
    assert prof_cubic.Q[len(prof_cubic.z) // 2] == pytest.approx(0.0, abs=1e-10)


def test_cubic_wave_mass(prof_cubic):
    # closed form: integral of Q_z^2 = (1/2) sech^4(z/sqrt 2) equals 2*sqrt(2)/3;
    # cross-checked against quadrature of the closed-form integrand
    z = prof_cubic.z
    quad_oracle = simpson_integral(0.5 / np.cosh(z / np.sqrt(2.0)) ** 4, prof_cubic.h_z)
    assert quad_oracle == pytest.approx(2.0 * np.sqrt(2.0) / 3.0, abs=1e-9)
    assert abs(prof_cubic.m - 2.0 * np.sqrt(2.0) / 3.0) <= 1e-6
    assert wave_mass(prof_cubic) == pytest.approx(prof_cubic.m, abs=1e-14)


def test_wave_mass_grid_refinement(eq_cubic, prof_cubic):
    m2 = solve_profile(eq_cubic, 0.0, Z=20.0, n_z=8192).m
    assert abs(prof_cubic.m - m2) <= 1e-9


def test_monotone_and_ode_residual(prof_cubic):
    assert np.all(prof_cubic.Qz[1:-1] < 1e-13)
    r = prof_cubic.Qzz - prof_cubic.c * prof_cubic.Qz + (
        prof_cubic.Q - prof_cubic.Q**3 + prof_cubic.s
    )
    assert np.max(np.abs(r[2:-2])) <= 1e-8


def test_translation_gauge(eq_cubic, prof_cubic):
    z = prof_cubic.z
    bumped = prof_cubic.Q + 0.02 * np.exp(-(z**2))
    again = solve_profile(eq_cubic, 0.0, Z=20.0, n_z=4096, initial=(bumped, 0.05))
    assert np.max(np.abs(again.Q - prof_cubic.Q)) <= 1e-9
    assert abs(again.c - prof_cubic.c) <= 1e-10


def test_l0_kernel(prof_cubic):
    # L0 Qz = Qz_zz + f_u(Q, v*) Qz should vanish (translation mode)
    fu = 1.0 - 3.0 * prof_cubic.Q**2
    res = fd_second_derivative(prof_cubic.Qz, prof_cubic.h_z) + fu * prof_cubic.Qz
    assert np.max(np.abs(res[3:-3])) <= 1e-8


def test_exponential_tails(prof_cubic):
    z = prof_cubic.z
    right = z > 5.0
    slope = tail_log_slope(z[right], prof_cubic.Q[right] - prof_cubic.h_minus, floor=1e-11)
    assert slope <= -prof_cubic.d0


def test_speed_identity_balanced_points(eq_cubic, eq_mori):
    out = check_speed_identity(eq_cubic, 0.0, Z=20.0, n_z=2048)
    assert abs(out["c"]) <= 1e-8 and abs(out["rhs"]) <= 1e-8
    out = check_speed_identity(eq_mori, eq_mori.v_star, n_z=2048)
    assert abs(out["c"]) <= 1e-8 and abs(out["rhs"]) <= 1e-8


def test_speed_identity_off_balance(eq_mori):
    s = eq_mori.v_star + 0.01 * (eq_mori.v_hi - eq_mori.v_star)
    out = check_speed_identity(eq_mori, s, n_z=2048)
    assert np.sign(out["c"]) == -np.sign(balance_integral(eq_mori.reaction, s))
    assert out["rel_err"] <= 1e-4
