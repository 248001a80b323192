import numpy as np
import pytest

from mcrd_layers.errors import (
    DegenerateBalance,
    NoBistability,
    OrderUnavailable,
)
from mcrd_layers.reaction import (
    BistableReaction,
    balance_integral,
    balance_prime,
    equilibrium_roots,
    find_vstar,
)

CUBIC_WINDOW_EDGE = 2.0 / (3.0 * np.sqrt(3.0))  # discriminant of u^3 - u - v


def test_eval_partial_trivial_values():
    cubic = BistableReaction.cubic_linear()
    assert cubic.eval_partial(0, 0, 1.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    mori = BistableReaction.mori(gamma=9.0, delta=1.0)
    v = 0.37
    assert mori.eval_partial(0, 0, 0.0, v) == pytest.approx(1.0 * v, abs=1e-15)
    # d f / dv at u=1: delta + gamma * 1/(1+1) = delta + gamma/2
    assert mori.eval_partial(0, 1, 1.0, 0.0) == pytest.approx(1.0 + 9.0 / 2.0, abs=1e-14)


def test_eval_partial_order_unavailable():
    r = BistableReaction.cubic_linear(max_derivative_order=3)
    with pytest.raises(OrderUnavailable):
        r.eval_partial(2, 2, 0.1, 0.2)


@pytest.mark.parametrize(
    "reaction",
    [
        BistableReaction.cubic_linear(),
        BistableReaction.mori(gamma=9.0, delta=1.0),
        BistableReaction.polynomial([[0.0, 1.0], [1.0, 0.5], [0.2, 0.0], [-1.0, 0.0]]),
    ],
    ids=["cubic", "mori", "poly"],
)
def test_derivative_selftest_vs_central_differences(reaction):
    assert reaction.derivative_selftest(seed=7, max_order=4) < 1e-6


def test_mori_rejects_non_bistable_parameters():
    with pytest.raises(NoBistability):
        BistableReaction.mori(gamma=8.0, delta=1.0)
    with pytest.raises(NoBistability):
        BistableReaction.mori(gamma=7.9, delta=1.0)


def test_equilibrium_roots_cubic_symmetric():
    r = BistableReaction.cubic_linear()
    hm, h0, hp = equilibrium_roots(r, 0.0)
    assert (hm, h0, hp) == pytest.approx((-1.0, 0.0, 1.0), abs=1e-12)


def test_equilibrium_roots_outside_window():
    r = BistableReaction.cubic_linear()
    with pytest.raises(NoBistability):
        equilibrium_roots(r, 1.0)
    # oracle: three real roots exist exactly for |v| < 2/(3*sqrt(3))
    equilibrium_roots(r, 0.99 * CUBIC_WINDOW_EDGE)
    with pytest.raises(NoBistability):
        equilibrium_roots(r, 1.01 * CUBIC_WINDOW_EDGE)


def test_mori_roots_against_companion_oracle():
    r = BistableReaction.mori(gamma=9.0, delta=1.0)
    v = 0.1775  # inside the (0.176777, 0.178885) window
    oracle = np.sort(np.roots([1.0, -10.0 * v, 1.0, -v]).real)
    got = np.array(equilibrium_roots(r, v))
    assert got == pytest.approx(oracle, abs=1e-9)
    for h in got:
        assert abs(r(h, v)) <= 1e-12 * max(1.0, abs(v))


def test_balance_integral_cubic():
    r = BistableReaction.cubic_linear()
    assert balance_integral(r, 0.0) == pytest.approx(0.0, abs=1e-13)
    # dJ/dv(0) = 2 > 0 so J > 0 for small v > 0
    assert balance_integral(r, 0.05) > 0.0
    fd = (balance_integral(r, 1e-6) - balance_integral(r, -1e-6)) / 2e-6
    assert fd == pytest.approx(2.0, rel=1e-6)


def test_balance_integral_mori_against_simpson_oracle():
    r = BistableReaction.mori(gamma=9.0, delta=1.0)
    v = 0.5 * (0.176777 + 0.178885)
    hm, _, hp = equilibrium_roots(r, v)

    def simpson(n):
        s = np.linspace(hm, hp, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        return (hp - hm) / (3 * n) * (w @ r(s, v))

    coarse, fine = simpson(512), simpson(1024)
    oracle = fine + (fine - coarse) / 15.0
    assert balance_integral(r, v) == pytest.approx(oracle, abs=1e-10)


def test_balance_prime_matches_centered_difference():
    for r in (BistableReaction.cubic_linear(), BistableReaction.mori(gamma=9.0, delta=1.0)):
        eq_v = 0.1 if r.kind == "cubic_linear" else 0.1778
        h = 1e-6 if r.kind == "cubic_linear" else 1e-7
        fd = (balance_integral(r, eq_v + h) - balance_integral(r, eq_v - h)) / (2 * h)
        assert balance_prime(r, eq_v) == pytest.approx(fd, rel=1e-6)


def test_find_vstar_cubic():
    eq = find_vstar(BistableReaction.cubic_linear())
    assert abs(eq.v_star) <= 1e-10
    assert eq.J_prime_star == pytest.approx(2.0, abs=1e-8)
    assert (eq.h_minus_star, eq.h_plus_star) == pytest.approx((-1.0, 1.0), abs=1e-12)
    assert eq.v_lo == pytest.approx(-CUBIC_WINDOW_EDGE, abs=1e-9)
    assert eq.v_hi == pytest.approx(CUBIC_WINDOW_EDGE, abs=1e-9)
    assert eq.a2_margin < 0.0


def test_find_vstar_mori_bisection_oracle():
    eq = find_vstar(BistableReaction.mori(gamma=9.0, delta=1.0))
    assert abs(balance_integral(eq.reaction, eq.v_star)) <= 1e-10
    assert eq.v_lo == pytest.approx(np.sqrt(250.0 / 8000.0), abs=1e-8)
    assert eq.v_hi == pytest.approx(np.sqrt(256.0 / 8000.0), abs=1e-8)
    assert eq.v_lo < eq.v_star < eq.v_hi
    # the mirrored window at v < 0 is reported, not used
    assert all(w[1] < 0 for w in eq.other_windows) or eq.other_windows == []


def test_translation_symmetric_reaction_is_degenerate():
    # f(u,v) = (u-v) - (u-v)^3: J(v) = 0 identically, so J'(v*) = 0
    coeffs = np.zeros((4, 4))
    coeffs[1, 0], coeffs[0, 1] = 1.0, -1.0
    coeffs[3, 0], coeffs[2, 1], coeffs[1, 2], coeffs[0, 3] = -1.0, 3.0, -3.0, 1.0
    r = BistableReaction.polynomial(coeffs)
    with pytest.raises(DegenerateBalance):
        find_vstar(r, v_range=(-0.3, 0.3))


def test_root_residual_property_randomized():
    rng = np.random.default_rng(11)
    r = BistableReaction.cubic_linear()
    eq = find_vstar(r)
    for v in rng.uniform(eq.v_lo + 1e-3, eq.v_hi - 1e-3, 25):
        for h in equilibrium_roots(r, v):
            assert abs(r(h, v)) <= 1e-12 * max(1.0, abs(v))
        hm, _, hp = equilibrium_roots(r, v)
        for h in (hm, hp):
            assert r.eval_partial(1, 0, h, v) - r.eval_partial(0, 1, h, v) < 0.0
