import numpy as np
import pytest

from mcrd_layers.errors import GridTooCoarse, MassOutOfRange
from mcrd_layers.expansion import build_expansion
from mcrd_layers.geometry import RadialGrid, ball_volume, cutoff_theta, interface_radius
from mcrd_layers.profile import (
    assemble,
    layer_width,
    nonlocal_mean,
    residual,
    residual_sweep,
    s_expansion_defect,
)
from mcrd_layers.reaction import BistableReaction, find_vstar
from mcrd_layers.wave import solve_profile


@pytest.fixture(scope="module")
def eq():
    return find_vstar(BistableReaction.cubic_linear())


@pytest.fixture(scope="module")
def prof(eq):
    return solve_profile(eq, 0.0, Z=20.0, n_z=4096)


@pytest.fixture(scope="module")
def exp_n2(eq, prof):
    return build_expansion(eq, prof, M=0.0, D=1.0, N=2, k=1)


def test_interface_radius_values(eq):
    for N in (1, 2, 3):
        mid = eq.v_star + 0.5 * (eq.h_plus_star + eq.h_minus_star)
        assert interface_radius(eq, mid, N) == pytest.approx(2.0 ** (-1.0 / N), rel=1e-14)
    assert interface_radius(eq, 0.0, 1) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(MassOutOfRange):
        interface_radius(eq, eq.v_star + eq.h_plus_star, 2)


def test_interface_radius_mirror_identity(eq):
    rng = np.random.default_rng(5)
    lo, hi = eq.v_star + eq.h_minus_star, eq.v_star + eq.h_plus_star
    for N in (1, 2, 3):
        for M in rng.uniform(lo + 1e-6, hi - 1e-6, 20):
            R = interface_radius(eq, M, N)
            Rh = interface_radius(eq, M, N, mirrored=True)
            assert abs(R**N + Rh**N - 1.0) <= 1e-14


def test_cutoff_theta_plateaus_and_symmetry():
    assert cutoff_theta(0.5) == 1.0
    assert cutoff_theta(1.0) == 1.0
    assert cutoff_theta(3.0) == 0.0
    assert cutoff_theta(3.0, order=1) == 0.0
    assert cutoff_theta(-2.5) == 0.0
    x = np.linspace(-3, 3, 41)
    assert np.allclose(cutoff_theta(x), cutoff_theta(-x))
    assert np.all((cutoff_theta(x) >= 0.0) & (cutoff_theta(x) <= 1.0))


def test_cutoff_theta_derivatives_match_fd():
    x = np.linspace(-2.6, 2.6, 301)
    x = x[np.abs(np.abs(x) - 1.0) > 1e-2]
    x = x[np.abs(np.abs(x) - 2.0) > 1e-2]
    h = 1e-6
    d1_fd = (cutoff_theta(x + h) - cutoff_theta(x - h)) / (2 * h)
    assert np.max(np.abs(cutoff_theta(x, 1) - d1_fd)) <= 1e-6
    d2_fd = (cutoff_theta(x + h, 1) - cutoff_theta(x - h, 1)) / (2 * h)
    assert np.max(np.abs(cutoff_theta(x, 2) - d2_fd)) <= 1e-5


def test_ball_volumes():
    assert ball_volume(1) == 2.0
    assert ball_volume(2) == pytest.approx(np.pi, rel=1e-15)
    assert ball_volume(3) == pytest.approx(4 * np.pi / 3, rel=1e-15)
    for N in (3, 4, 5):
        assert ball_volume(N) == pytest.approx(2 * np.pi * ball_volume(N - 2) / N, rel=1e-15)


def test_radial_grid_weights():
    for N in (1, 2, 3):
        g = RadialGrid.build(N, 0.6, 0.1, 0.02)
        assert abs(g.mean(np.ones(g.n)) - 1.0) <= 1e-14
        # 4th-order quadrature sanity on a smooth function
        val = g.mean(np.cos(g.r))
        from scipy.integrate import quad

        ref = quad(lambda r: N * r ** (N - 1) * np.cos(r), 0, 1, limit=200)[0]
        assert val == pytest.approx(ref, abs=5e-8)


def test_radial_laplacian_row_sums_and_symmetry():
    g = RadialGrid.build(3, 0.55, 0.11, 0.02)
    lo, di, up = g.laplacian_tridiag()
    rs = lo + di + up
    assert np.max(np.abs(rs)) <= 1e-10 * np.max(np.abs(di))
    m = g.cell_masses()
    assert abs(m.sum() - 1.0 / 3.0) <= 1e-15
    assert np.max(np.abs(m[:-1] * up[:-1] - m[1:] * lo[1:])) <= 1e-14 * np.max(np.abs(di * m))


def test_nonlocal_mean_trivial(exp_n2):
    g = RadialGrid.build(2, exp_n2.R_star, exp_n2.r0, 0.02)
    zeros = np.zeros(g.n)
    assert nonlocal_mean(g, zeros, M=0.3, eps=0.01, D=1.0) == pytest.approx(0.3)
    const = 0.7 * np.ones(g.n)
    assert nonlocal_mean(g, const, M=0.3, eps=0.5, D=0.5) == pytest.approx(0.3)
    assert nonlocal_mean(g, const, M=0.3, eps=0.01, D=1.0) == pytest.approx(
        0.3 - (1 - 0.01) * 0.7
    )


def test_assemble_regions(exp_n2):
    d = exp_n2
    eps = 0.02
    sol = assemble(d, eps)
    r = sol.grid.r
    outer = np.abs(r - d.R_star) >= 2 * d.r0
    exp_outer = np.where(r < d.R_star, d.outer_value(-1, eps), d.outer_value(+1, eps))
    assert np.max(np.abs(sol.u[outer] - exp_outer[outer])) == 0.0
    # deep inside the cutoff plateau the profile is the pure inner sum
    inner = np.abs(r - d.R_star) <= d.r0
    z = (r - d.R_star) / eps
    w_sum = sum(eps**j * d.w_eval(j, z) for j in range(d.k + 1))
    assert np.max(np.abs(sol.u[inner] - w_sum[inner])) <= 1e-14


def test_assemble_mass_identity(exp_n2):
    sol = assemble(exp_n2, 0.02)
    assert abs(sol.grid.mean(sol.u + sol.v) - exp_n2.M) <= 1e-12


def test_assemble_monotone_and_crossing(exp_n2):
    sol = assemble(exp_n2, 0.02)
    band = np.abs(sol.grid.r - exp_n2.R_star) <= 5 * sol.eps
    du = np.diff(sol.u[band])
    assert np.all(du < 0.0)
    assert abs(sol.crossing_radius() - exp_n2.R_star) <= 5 * sol.eps


def test_grid_too_coarse(exp_n2):
    g = RadialGrid.build(exp_n2.N, exp_n2.R_star, exp_n2.r0, 0.04)
    with pytest.raises(GridTooCoarse):
        assemble(exp_n2, 0.005, grid=g)


def test_residual_constant_equilibrium(eq, exp_n2):
    # u == M^(1/3) solves f(u, M - u) = 0 for the cubic benchmark, and the
    # constant field has zero residual for any eps, D
    d = build_expansion(eq, exp_n2.profile, M=0.5, D=2.0, N=2, k=0)
    sol = assemble(d, 0.02)
    u_c = 0.5 ** (1.0 / 3.0)
    sol.u = np.full(sol.grid.n, u_c)
    sol.S_value = 0.5 - (1 - sol.eps / sol.D) * sol.grid.mean(sol.u)
    sol.v = sol.S_value - (sol.eps / sol.D) * sol.u
    sol.u_r = np.zeros(sol.grid.n)
    sol.u_rr = np.zeros(sol.grid.n)
    fld, norms = residual(sol)
    assert norms["inf"] <= 1e-13


def test_residual_outer_region_is_pure_reaction(exp_n2):
    sol = assemble(exp_n2, 0.02)
    fld, _ = residual(sol)
    outer = np.abs(sol.grid.r - exp_n2.R_star) >= 2 * exp_n2.r0
    direct = exp_n2.eq.reaction(sol.u[outer], sol.v[outer])
    assert np.max(np.abs(fld[outer] - direct)) <= 1e-14


def test_residual_sweep_precondition(exp_n2):
    with pytest.raises(ValueError):
        residual_sweep(exp_n2, [0.04, 0.03, 0.02])


def test_v_approaches_vstar(exp_n2):
    sups = []
    for eps in (0.04, 0.02, 0.01):
        sol = assemble(exp_n2, eps)
        sups.append(np.max(np.abs(sol.v - exp_n2.eq.v_star)))
    assert sups[0] > sups[1] > sups[2]
    assert sups[2] <= 1.5 * (0.01 / 0.02) * sups[1]  # ~O(eps)


def test_layer_width_small(exp_n2):
    sol = assemble(exp_n2, 0.01)
    for eta in (0.1, 0.05):
        K, ok = layer_width(sol, eta)
        assert ok and K <= 12.0


def test_s_defect_slope_n2(exp_n2):
    eps_list = [0.04, 0.02, 0.01]
    defects = [s_expansion_defect(exp_n2, e) for e in eps_list]
    from mcrd_layers.numerics import loglog_slope

    assert loglog_slope(eps_list, defects) >= exp_n2.k + 1.7
