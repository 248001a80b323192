"""Newton solution of the exact nonlocal problem and approximation accuracy.

Starts the damped Newton iteration from the order-2 approximation, checks
the conserved mean mass, and measures how fast |u - u_k| shrinks with eps.
Also reports, empirically, what happens when Newton starts from the cruder
u_0 and u_1 approximations at the same eps - the theory fixes k >= 2 for
its contraction argument but makes no claim either way about the solver.
"""

import numpy as np

from mcrd_layers import (
    BistableReaction,
    assemble,
    build_expansion,
    find_vstar,
    newton_solve,
    solve_profile,
)

eq = find_vstar(BistableReaction.cubic_linear())
prof = solve_profile(eq, 0.0, Z=20.0, n_z=4096)
N, M, D = 2, 0.0, 1.0
exp_by_k = {k: build_expansion(eq, prof, M=M, D=D, N=N, k=k) for k in (0, 1, 2)}

print(f"disk benchmark, N={N}, M={M}, D={D}")
for eps in (0.04, 0.02, 0.01):
    sol2 = assemble(exp_by_k[2], eps)
    res = newton_solve(sol2)
    print(f"eps = {eps}: {res.iters} Newton steps, final residual {res.history[-1]:.1e}, "
          f"mean(u+v) - M = {res.grid.mean(res.u + res.v) - M:+.1e}")
    for k in (0, 1, 2):
        ak = assemble(exp_by_k[k], eps, grid=res.grid)
        print(f"    |u - u_{k}|_inf = {np.max(np.abs(res.u - ak.u)):.3e}")

print()
print("Newton started from lower-order approximations at eps = 0.02")
print("(empirical observation only):")
for k in (0, 1, 2):
    sol = assemble(exp_by_k[k], 0.02)
    try:
        res = newton_solve(sol)
        print(f"  from u_{k}: converged in {res.iters} steps "
              f"(initial residual {res.history[0]:.1e})")
    except Exception as exc:
        print(f"  from u_{k}: {type(exc).__name__}: {exc}")
