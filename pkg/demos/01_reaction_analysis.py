"""Equilibrium structure of bistable reactions.

Walks the bottom layer of the pipeline: the three equilibrium branches
h^-(v) < h^0(v) < h^+(v), the balance integral J(v) and the balanced value
v* where the front speed will vanish. Shown for the cubic-linear benchmark
(closed forms known) and the saturating Mori interconversion term, whose
bistable window turns out to be remarkably narrow.
"""

import numpy as np

from mcrd_layers import BistableReaction, balance_integral, equilibrium_roots, find_vstar

print("=" * 70)
print("cubic-linear benchmark: f(u, v) = u - u^3 + v")
print("=" * 70)
eq = find_vstar(BistableReaction.cubic_linear())
print(f"bistable window : ({eq.v_lo:+.6f}, {eq.v_hi:+.6f})  [exact edge 2/(3*sqrt(3))]")
print(f"balanced value  : v* = {eq.v_star:+.3e}")
print(f"slope J'(v*)    : {eq.J_prime_star:.12f}")
print(f"branches at v*  : h- = {eq.h_minus_star:+.6f}, h0 = {eq.h_zero_star:+.6f}, "
      f"h+ = {eq.h_plus_star:+.6f}")
print(f"(A2) margin     : {eq.a2_margin:+.4f}  (transversality holds while < 0)")

print()
print("J(v) across the window (area rule: J(v*) = 0):")
for v in np.linspace(eq.v_lo + 0.02, eq.v_hi - 0.02, 7):
    print(f"  J({v:+.4f}) = {balance_integral(eq.reaction, v):+.6f}")

print()
print("=" * 70)
print("Mori interconversion: f(u, v) = -u + (1 + 9 u^2/(1+u^2)) v")
print("=" * 70)
eqm = find_vstar(BistableReaction.mori(gamma=9.0, delta=1.0))
print(f"bistable window : ({eqm.v_lo:.9f}, {eqm.v_hi:.9f})   width {eqm.v_hi - eqm.v_lo:.2e}")
print("                  (a fixed 2048-point scan would step right over it;")
print("                   the edges come from the exact discriminant in v)")
print(f"balanced value  : v* = {eqm.v_star:.9f}")
print(f"slope J'(v*)    : {eqm.J_prime_star:.9f}")
hm, h0, hp = equilibrium_roots(eqm.reaction, eqm.v_star)
print(f"branches at v*  : {hm:.6f} < {h0:.6f} < {hp:.6f}")
print(f"mirror window   : {eqm.other_windows} (reported, not used)")
