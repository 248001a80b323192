"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summary lines with measured values and wall time. Runtime targets from the
criteria are printed for reference, not asserted (CI wall clocks vary).
"""

import time

import numpy as np
import pytest

from mcrd_layers.errors import SolvabilityViolation
from mcrd_layers.expansion import L0Context, build_expansion, l0_solve
from mcrd_layers.geometry import RadialGrid, ball_volume, interface_radius
from mcrd_layers.numerics import loglog_slope
from mcrd_layers.profile import assemble, layer_width, residual_sweep
from mcrd_layers.reaction import BistableReaction, find_vstar
from mcrd_layers.solve import accuracy_report, newton_solve
from mcrd_layers.spectrum import (
    local_principal_eigenpair,
    richardson_ratio,
    secular_root,
    spectral_sweep,
)
from mcrd_layers.wave import solve_profile, wave_mass

EPS_SWEEP = [0.04, 0.02, 0.01]


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.dt = time.perf_counter() - self.t0
        return False


def _report(n, budget, dt, text):
    print(f"\nPASS criterion {n:2d} [{dt:6.2f}s, target <{budget}]: {text}")


@pytest.fixture(scope="module")
def eq():
    return find_vstar(BistableReaction.cubic_linear())


@pytest.fixture(scope="module")
def eq_mori():
    return find_vstar(BistableReaction.mori(gamma=9.0, delta=1.0))


@pytest.fixture(scope="module")
def prof(eq):
    return solve_profile(eq, 0.0, Z=20.0, n_z=4096)


@pytest.fixture(scope="module")
def expansions(eq, prof):
    cache = {}

    def get(N, k, D=1.0, M=0.0, mirrored=False):
        key = (N, k, D, M, mirrored)
        if key not in cache:
            cache[key] = build_expansion(eq, prof, M=M, D=D, N=N, k=k, mirrored=mirrored)
        return cache[key]

    return get


@pytest.fixture(scope="module")
def sweeps(expansions):
    cache = {}

    def get(N, k):
        if (N, k) not in cache:
            cache[(N, k)] = residual_sweep(expansions(N, k), EPS_SWEEP)
        return cache[(N, k)]

    return get


def test_criterion_01_equilibrium_structure(eq):
    with _Timer() as t:
        assert abs(eq.v_star) <= 1e-10
        assert abs(eq.J_prime_star - 2.0) <= 1e-8
        assert abs(eq.h_minus_star + 1.0) <= 1e-12
        assert abs(eq.h_plus_star - 1.0) <= 1e-12
    _report(1, "1s", t.dt, f"v*={eq.v_star:.2e}, J'={eq.J_prime_star}, h±=±1")


def test_criterion_02_wave_benchmark(prof):
    with _Timer() as t:
        dev = float(np.max(np.abs(prof.Q + np.tanh(prof.z / np.sqrt(2.0)))))
        m = wave_mass(prof)
        assert dev <= 1e-6
        assert abs(prof.c) <= 1e-8
        assert abs(m - 2.0 * np.sqrt(2.0) / 3.0) <= 1e-6
    _report(2, "5s", t.dt, f"|Q+tanh|={dev:.1e}, |c|={abs(prof.c):.1e}, m err={abs(m - 2*np.sqrt(2)/3):.1e}")


def test_criterion_03_mori_speed_identity(eq_mori):
    from mcrd_layers.wave import check_speed_identity

    with _Timer() as t:
        lo, hi = eq_mori.v_lo, eq_mori.v_hi
        svals = lo + (hi - lo) * np.array([0.15, 0.3, 0.5, 0.7, 0.85])
        errs = []
        for s in svals:
            # the Mori tails decay at rate ~0.25, so the default domain
            # 12/d0 leaves ~3e-6 at the ends; Z=70 puts them below 1e-8
            out = check_speed_identity(eq_mori, s, Z=70.0, n_z=4096)
            assert abs(out["c"] - out["rhs"]) <= 1e-4 * max(abs(out["c"]), 1e-3)
            errs.append(abs(out["c"] - out["rhs"]))
    _report(3, "30s", t.dt, f"5 points, max |c + J/m| = {max(errs):.2e}")


def test_criterion_04_l0_inverse(eq, prof):
    with _Timer() as t:
        ctx = L0Context.from_wave(eq, prof)
        rng = np.random.default_rng(17)
        z = prof.z
        worst_rt, worst_orth = 0.0, 0.0
        for _ in range(20):
            c = rng.standard_normal(4)
            g = c[0] + c[1] * np.tanh(z / 2.0) + c[2] * np.exp(-((z - c[3]) ** 2) / 8.0)
            g -= ctx.inner(g, ctx.w0_z) / ctx.inner(ctx.w0_z, ctx.w0_z) * ctx.w0_z
            w = l0_solve(ctx, g)
            rt = float(np.max(np.abs((ctx.apply(w) - g)[2:-2])))
            orth = abs(ctx.inner(w, ctx.w0_z)) / np.sqrt(
                ctx.inner(w, w) * ctx.inner(ctx.w0_z, ctx.w0_z)
            )
            worst_rt, worst_orth = max(worst_rt, rt), max(worst_orth, orth)
        assert worst_rt <= 1e-8
        assert worst_orth <= 1e-9
        with pytest.raises(SolvabilityViolation):
            l0_solve(ctx, ctx.w0_z)
    _report(4, "5s", t.dt, f"20 draws: round-trip {worst_rt:.1e}, orth {worst_orth:.1e}")


def test_criterion_05_residual_order(sweeps):
    with _Timer() as t:
        slopes = {}
        for N in (1, 2):
            for k in (0, 1, 2):
                s = sweeps(N, k)["slope"]
                slopes[(N, k)] = s
                assert s >= k + 0.7, f"N={N} k={k}: slope {s:.2f} < {k + 0.7}"
    txt = ", ".join(f"N={N},k={k}:{s:.2f}" for (N, k), s in slopes.items())
    _report(5, "1min", t.dt, f"residual slopes {txt}")


def test_criterion_06_expansion_identity(sweeps, expansions):
    # For N=1, M=0 the benchmark is antisymmetric about the interface: every
    # A_j vanishes and the identity holds at machine precision, which counts
    # as (better than) the required order.
    with _Timer() as t:
        notes = []
        for N in (1, 2):
            for k in (0, 1, 2):
                defects = [row["s_defect"] for row in sweeps(N, k)["table"]]
                if max(defects) <= 1e-12:
                    notes.append(f"N={N},k={k}:machine-floor({max(defects):.0e})")
                    continue
                s = loglog_slope(EPS_SWEEP, defects)
                notes.append(f"N={N},k={k}:{s:.2f}")
                assert s >= k + 1.7, f"N={N} k={k}: identity slope {s:.2f} < {k + 1.7}"
    _report(6, "10s", t.dt, "identity slopes " + ", ".join(notes))


def test_criterion_07_exact_solve_accuracy(expansions):
    with _Timer() as t:
        sol02 = assemble(expansions(1, 2), 0.02)
        res02 = newton_solve(sol02)
        assert res02.iters <= 8
        assert res02.history[-1] <= 1e-11
        assert abs(res02.grid.mean(res02.u + res02.v) - 0.0) <= 1e-12

        msgs = [f"iters={res02.iters}"]
        for N in (1, 2):
            d2 = expansions(N, 2)
            exact, approx = {}, {}
            for eps in EPS_SWEEP:
                rho = 32 * max(EPS_SWEEP) / eps
                grid = RadialGrid.build(N, d2.R_star, d2.r0, eps,
                                        nodes_per_eps=rho, fine_cap=np.inf)
                s2 = assemble(d2, eps, grid=grid)
                exact[eps] = newton_solve(s2)
                approx[(2, eps)] = s2
                approx[(1, eps)] = assemble(expansions(N, 1), eps, grid=grid)
            acc = accuracy_report(exact, approx, [1, 2], EPS_SWEEP)
            for k in (1, 2):
                su, sv = acc["slopes"][f"u_k{k}"], acc["slopes"][f"v_k{k}"]
                assert su >= k - 0.3, f"N={N}: u slope {su:.2f} < {k - 0.3}"
                assert sv >= k - 0.3, f"N={N}: v slope {sv:.2f} < {k - 0.3}"
                msgs.append(f"N={N},k={k}:u{su:.2f}/v{sv:.2f}")
    _report(7, "1min", t.dt, "; ".join(msgs))


def test_criterion_08_critical_eigenvalue(expansions):
    with _Timer() as t:
        msgs = []
        for N, target in ((1, -2.0 * np.sqrt(2.0)), (2, -4.0)):
            d = expansions(N, 2)
            reports = spectral_sweep(d, EPS_SWEEP)
            rich = richardson_ratio(reports)
            assert abs(rich - target) / abs(target) <= 0.05
            for r in reports:
                assert np.isreal(r.lambda0)
                assert abs(r.lambda0_adjoint - r.lambda0) <= 1e-9 * (1 + abs(r.lambda0))
                assert r.next_eig_bound < 0.0
            mu_star = min(-r.next_eig_bound for r in reports)
            spread = (max(-r.next_eig_bound for r in reports) - mu_star) / mu_star
            assert mu_star > 0.0 and spread <= 0.25
            # dense-matrix oracle on an n <= 400 instance of the same operator
            grid = RadialGrid.build(N, d.R_star, d.r0, 0.04, nodes_per_eps=24,
                                    fine_cap=24, coarse_h=0.05)
            assert grid.n <= 400
            sol_small = assemble(d, 0.04, grid=grid)
            secular_root(sol_small, dense_check=True)  # raises beyond 1e-8
            msgs.append(f"N={N}: ratio {rich:.4f} (target {target:.4f}), mu*>={mu_star:.2f}")
    _report(8, "2min", t.dt, "; ".join(msgs))


def test_criterion_09_layer_localization(expansions):
    with _Timer() as t:
        worst_K = 0.0
        for N in (1, 2):
            d = expansions(N, 2)
            for eps in EPS_SWEEP:
                sol = assemble(d, eps)
                K, ok = layer_width(sol, 0.05)
                assert ok and K <= 12.0
                worst_K = max(worst_K, K)
                assert abs(sol.crossing_radius() - d.R_star) <= 5 * eps
    _report(9, "10s", t.dt, f"max K(0.05) = {worst_K:.2f} <= 12, crossing within 5 eps")


def test_criterion_10_mirrored_family(eq, expansions):
    with _Timer() as t:
        rng = np.random.default_rng(23)
        lo, hi = eq.v_star + eq.h_minus_star, eq.v_star + eq.h_plus_star
        for N in (1, 2, 3):
            for M in rng.uniform(lo + 1e-3, hi - 1e-3, 12):
                R = interface_radius(eq, M, N)
                Rh = interface_radius(eq, M, N, mirrored=True)
                assert abs(Rh**N - (1.0 - R**N)) <= 1e-14
        dm = expansions(1, 2, mirrored=True)
        res = newton_solve(assemble(dm, 0.02))
        assert res.history[-1] <= 1e-11
        assert abs(res.u[0] - eq.h_minus_star) < 0.05
        assert abs(res.u[-1] - eq.h_plus_star) < 0.05
    _report(10, "30s", t.dt,
            f"R-hat identity to 1e-14; mirrored solve u(0)={res.u[0]:.3f}, u(1)={res.u[-1]:.3f}")


def test_criterion_11_eigenfunction_norms(expansions):
    with _Timer() as t:
        d = expansions(1, 2)
        reports = spectral_sweep(d, EPS_SWEEP)
        slope = loglog_slope([r.eps for r in reports], [r.l1_norm for r in reports])
        assert abs(slope - 0.5) <= 0.15
        eps = 0.01
        grid = RadialGrid.build(d.N, d.R_star, d.r0, eps, nodes_per_eps=96,
                                fine_cap=np.inf)
        sol = assemble(d, eps, grid=grid)
        _, phi0, _ = local_principal_eigenpair(sol)
        zq = np.linspace(-5, 5, 101)
        vals = np.sqrt(eps) * np.interp(d.R_star + eps * zq, sol.grid.r, phi0)
        scale = np.sqrt(d.R_star ** (1 - d.N) / (d.N * ball_volume(d.N) * d.profile.m))
        target = -d.w_eval(0, zq, deriv=1) * scale
        rel = float(np.max(np.abs(vals - target)) / np.max(np.abs(target)))
        assert rel <= 0.05
    _report(11, "30s", t.dt, f"L1 slope {slope:.3f} (0.5±0.15); profile match {rel*100:.1f}% <= 5%")
