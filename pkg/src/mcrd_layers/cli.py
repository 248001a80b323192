"""Batch front-end: config-driven pipelines with machine-readable reports.

Subcommands (each takes a config file of dotted keys, see README):

    analyze    equilibrium structure, window, balanced value
    wave       heteroclinic profile at the balanced value
    expand     matched-asymptotic coefficients at order k
    residual   assembled approximations and residual norms over the sweep
    solve      Newton solutions of the exact nonlocal problem over the sweep
    spectrum   local pair, critical eigenvalue, adjoint and limit constants
    sweep      order-of-accuracy study (residual, identity, solution error)
    report     aggregate prior outputs into report.json and SVG plots

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure
(the error name and message are also written to <out>/error.json).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import reporting
from .errors import ConfigInvalid, MassOutOfRange, McrdError
from .expansion import build_expansion
from .profile import assemble, residual, residual_sweep, s_expansion_defect
from .reaction import BistableReaction, find_vstar
from .solve import accuracy_report, newton_solve
from .spectrum import richardson_ratio, spectral_sweep
from .wave import solve_profile

__all__ = ["RunConfig", "parse_config", "run", "main"]


class RunConfig:
    """Flat dotted-key configuration with typed, validated access."""

    def __init__(self, data, path="<config>"):
        self.data = dict(data)
        self.path = path

    def get(self, key, default=None):
        return self.data.get(key, default)

    def require(self, key):
        if key not in self.data:
            raise ConfigInvalid(f"{self.path}: missing required key '{key}'")
        return self.data[key]

    def number(self, key, default=None, positive=False):
        val = self.data.get(key, default)
        if val is None:
            raise ConfigInvalid(f"{self.path}: missing required key '{key}'")
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigInvalid(f"{self.path}: key '{key}' must be a number, got {val!r}")
        if positive and not val > 0:
            raise ConfigInvalid(f"{self.path}: key '{key}' must be positive, got {val}")
        return float(val)

    def integer(self, key, default=None, minimum=None):
        val = self.data.get(key, default)
        if val is None:
            raise ConfigInvalid(f"{self.path}: missing required key '{key}'")
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigInvalid(f"{self.path}: key '{key}' must be an integer, got {val!r}")
        if minimum is not None and val < minimum:
            raise ConfigInvalid(f"{self.path}: key '{key}' must be >= {minimum}, got {val}")
        return int(val)

    def eps_list(self):
        val = self.get("sweep.eps_list", [0.04, 0.02, 0.01])
        if not isinstance(val, list) or not val:
            raise ConfigInvalid(f"{self.path}: sweep.eps_list must be a non-empty list")
        eps = [float(e) for e in val]
        if any(e <= 0 for e in eps):
            raise ConfigInvalid(f"{self.path}: sweep.eps_list entries must be positive")
        if sorted(eps, reverse=True) != eps:
            raise ConfigInvalid(f"{self.path}: sweep.eps_list must be strictly descending")
        return eps


def parse_config(path):
    """Parse a dotted-key config file; values are JSON literals or strings."""
    if not os.path.exists(path):
        raise ConfigInvalid(f"config file not found: {path}")
    data = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigInvalid(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            try:
                data[key] = json.loads(value)
            except json.JSONDecodeError:
                data[key] = value
    return RunConfig(data, path)


def _build_reaction(cfg):
    kind = cfg.get("reaction.kind")
    if kind is None:
        raise ConfigInvalid(f"{cfg.path}: missing required key 'reaction.kind'")
    if kind == "cubic_linear":
        return BistableReaction.cubic_linear()
    if kind == "mori":
        gamma = cfg.number("reaction.gamma")
        delta = cfg.number("reaction.delta")
        return BistableReaction.mori(gamma=gamma, delta=delta)
    if kind == "polynomial":
        coeffs = cfg.require("reaction.poly_coeffs")
        return BistableReaction.polynomial(coeffs)
    raise ConfigInvalid(
        f"{cfg.path}: reaction.kind must be cubic_linear|mori|polynomial, got {kind!r}"
    )


class _Pipeline:
    """Lazily chained stages shared by the subcommands."""

    def __init__(self, cfg, mirrored=False, k_override=None):
        self.cfg = cfg
        self.mirrored = mirrored
        self.k = k_override if k_override is not None else cfg.integer("model.k", 2, minimum=0)
        self._cache = {}

    def reaction(self):
        return self._memo("reaction", lambda: _build_reaction(self.cfg))

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def eq(self):
        v_range = self.cfg.get("reaction.v_range")
        return self._memo("eq", lambda: find_vstar(self.reaction(), v_range=tuple(v_range) if v_range else None))

    def wave(self, s=None):
        eq = self.eq()
        s = eq.v_star if s is None else s
        Z = self.cfg.get("wave.Z")
        n_z = self.cfg.integer("wave.n_z", 4096, minimum=1024)
        return self._memo(
            ("wave", s), lambda: solve_profile(eq, s, Z=Z, n_z=n_z)
        )

    def expansion(self, k=None):
        k = self.k if k is None else k
        M = self.cfg.number("model.M")
        D = self.cfg.number("model.D", positive=True)
        N = self.cfg.integer("model.N", minimum=1)
        return self._memo(
            ("exp", k, self.mirrored),
            lambda: build_expansion(self.eq(), self.wave(), M, D, N, k, mirrored=self.mirrored),
        )

    def nodes_per_eps(self):
        return self.cfg.integer("grid.nodes_per_eps", 24, minimum=24)


def _stage_analyze(pipe, out):
    cfg = pipe.cfg
    eq = pipe.eq()
    r = pipe.reaction()
    seed = cfg.integer("run.seed", 0)
    payload = {
        "v_star": eq.v_star,
        "J_prime": eq.J_prime_star,
        "window": [eq.v_lo, eq.v_hi],
        "h_minus": eq.h_minus_star,
        "h_zero": eq.h_zero_star,
        "h_plus": eq.h_plus_star,
        "a2_margin": eq.a2_margin,
        "other_windows": eq.other_windows,
        "derivative_selftest_max_rel_err": r.derivative_selftest(seed=seed),
    }
    reporting.write_json(os.path.join(out, "analysis.json"), payload)
    return payload


def _stage_wave(pipe, out):
    prof = pipe.wave(pipe.cfg.get("wave.s"))
    reporting.write_csv(
        os.path.join(out, "wave_profile.csv"),
        [prof.z, prof.Q, prof.Qz, prof.Qzz],
        ["z", "Q", "Qz", "Qzz"],
    )
    payload = {
        "s": prof.s, "c": prof.c, "m": prof.m, "d0": prof.d0,
        "tail_rates": list(prof.tail_rates), "Z": prof.Z,
        "n_z": len(prof.z) - 1, "newton_iters": prof.newton_iters,
        "m_tail_bound": prof.m_tail_bound,
    }
    reporting.write_json(os.path.join(out, "wave.json"), payload)
    return payload


def _stage_expand(pipe, out):
    d = pipe.expansion()
    cols = [d.z] + [d.w[j] for j in range(d.k + 1)] + [d.w_hat[j] for j in range(d.k)]
    names = ["z"] + [f"w{j}" for j in range(d.k + 1)] + [f"what{j+1}" for j in range(d.k)]
    reporting.write_csv(os.path.join(out, "inner_profiles.csv"), cols, names)
    payload = {
        "R_star": d.R_star, "r0": d.r0, "mirrored": d.mirrored,
        "M": d.M, "D": d.D, "N": d.N, "k": d.k,
        "A": d.A, "a": d.a, "U_minus": d.U_minus, "U_plus": d.U_plus,
        "K_moments": {f"{j},{m}": v for (j, m), v in sorted(d.K.items())},
        "J_tail": d.J_tail,
        "independence_gaps": d.independence_gaps,
        "mass_match_residuals": d.mass_match_residuals,
    }
    reporting.write_json(os.path.join(out, "expansion.json"), payload)
    return payload


def _stage_residual(pipe, out):
    d = pipe.expansion()
    rows = []
    for i, eps in enumerate(pipe.cfg.eps_list()):
        sol = assemble(d, eps, nodes_per_eps=pipe.nodes_per_eps())
        _, norms = residual(sol)
        reporting.write_csv(
            os.path.join(out, f"residual_{i}.csv"),
            [sol.grid.r, sol.u, sol.v, sol.residual_field],
            ["r", "u", "v", "residual"],
        )
        rows.append(
            {
                "eps": eps, "S_value": sol.S_value,
                "res_inf": norms["inf"], "res_outer": norms["outer"],
                "res_blend": norms["blend"], "res_inner": norms["inner"],
                "s_defect": s_expansion_defect(d, eps),
            }
        )
    from .numerics import loglog_slope

    payload = {
        "rows": rows, "R_star": d.R_star, "k": d.k,
        "M": d.M, "D": d.D, "N": d.N,
        "slope": loglog_slope([t["eps"] for t in rows], [t["res_inf"] for t in rows]),
    }
    reporting.write_json(os.path.join(out, "residual.json"), payload)
    return payload


def _stage_solve(pipe, out):
    cfg = pipe.cfg
    d = pipe.expansion()
    tol = cfg.number("solve.tol", 1e-11, positive=True)
    max_iter = cfg.integer("solve.max_iter", 25, minimum=1)
    continuation = bool(cfg.get("solve.continuation", False))
    rows = []
    for i, eps in enumerate(cfg.eps_list()):
        sol0 = assemble(d, eps, nodes_per_eps=pipe.nodes_per_eps())
        res = newton_solve(sol0, tol=tol, max_iter=max_iter, continuation=continuation)
        reporting.write_csv(
            os.path.join(out, f"solution_{i}.csv"),
            [res.grid.r, res.u, res.v],
            ["r", "u", "v"],
        )
        diffs = {}
        for k in range(d.k + 1):
            dk = pipe.expansion(k)
            ak = assemble(dk, eps, grid=res.grid)
            diffs[f"k{k}"] = float(np.max(np.abs(res.u - ak.u)))
        rows.append(
            {
                "eps": eps, "iters": res.iters, "res_final": res.history[-1],
                "diff_to_uk_by_k": diffs, "S_value": res.S_value,
                "mass_mean_u_plus_v": float(res.grid.mean(res.u + res.v)),
            }
        )
    payload = {"rows": rows, "k": d.k}
    reporting.write_json(os.path.join(out, "solve.json"), payload)
    return payload


def _stage_spectrum(pipe, out):
    d = pipe.expansion()
    reports = spectral_sweep(d, pipe.cfg.eps_list(), nodes_per_eps=pipe.nodes_per_eps())
    rows = [
        {
            "eps": r.eps, "mu0": r.mu0, "lambda0": r.lambda0,
            "lambda0_adj": r.lambda0_adjoint, "ratio": r.ratio,
            "next_eig_bound": r.next_eig_bound, "E": r.E, "G": r.G,
            "lambda_star": r.lambda_star, "Lambda_star": r.Lambda_star,
            "pairing": r.pairing, "l1_norm": r.l1_norm,
            "decay_rates": r.decay["rates"],
            "far_mass_fraction": r.decay["far_mass_fraction"],
        }
        for r in reports
    ]
    payload = {"rows": rows}
    if len(reports) >= 2:
        payload["ratio_extrapolated"] = richardson_ratio(reports)
    reporting.write_json(os.path.join(out, "spectrum.json"), payload)
    return payload


def _stage_sweep(pipe, out):
    d = pipe.expansion()
    eps_list = pipe.cfg.eps_list()
    sw = residual_sweep(d, eps_list, nodes_per_eps=pipe.nodes_per_eps())
    defects = [t["s_defect"] for t in sw["table"]]
    payload = {
        "k": d.k,
        "residual_slope": sw["slope"],
        "rows": [
            {k2: v for k2, v in t.items() if k2 != "sol"} for t in sw["table"]
        ],
    }
    if min(defects) > 1e-13:
        from .numerics import loglog_slope

        payload["s_defect_slope"] = loglog_slope(eps_list, defects)
    else:
        payload["s_defect_slope"] = None  # identity already at machine precision
    # solution-accuracy slopes against each truncation order
    exact, approx = {}, {}
    for eps in eps_list:
        sol0 = assemble(d, eps, nodes_per_eps=pipe.nodes_per_eps())
        exact[eps] = newton_solve(sol0)
        for k in range(1, d.k + 1):
            approx[(k, eps)] = assemble(pipe.expansion(k), eps, grid=sol0.grid)
    if d.k >= 1:
        acc = accuracy_report(exact, approx, list(range(1, d.k + 1)), eps_list)
        payload["accuracy"] = acc
    reporting.write_json(os.path.join(out, "sweep.json"), payload)
    return payload


def _stage_report(pipe, out):
    summary = {}
    for name in ("analysis", "wave", "expansion", "residual", "solve", "spectrum", "sweep"):
        path = os.path.join(out, f"{name}.json")
        if os.path.exists(path):
            with open(path) as fh:
                summary[name] = json.load(fh)
    if "residual" in summary:
        rows = summary["residual"]["rows"]
        reporting.write_svg_lines(
            os.path.join(out, "orders.svg"),
            [
                {"x": [t["eps"] for t in rows], "y": [t["res_inf"] for t in rows],
                 "label": "residual sup-norm"},
            ],
            title="residual vs eps (log-log)", logx=True, logy=True,
        )
    for i in range(8):
        path = os.path.join(out, f"solution_{i}.csv")
        if not os.path.exists(path):
            break
        header, data = reporting.read_csv(path)
        reporting.write_svg_lines(
            os.path.join(out, f"solution_{i}.svg"),
            [
                {"x": data[:, 0], "y": data[:, 1], "label": "u"},
                {"x": data[:, 0], "y": data[:, 2], "label": "v"},
            ],
            title=f"solved profile #{i}",
        )
    reporting.write_json(os.path.join(out, "report.json"), summary)
    return summary


_STAGES = {
    "analyze": _stage_analyze,
    "wave": _stage_wave,
    "expand": _stage_expand,
    "residual": _stage_residual,
    "solve": _stage_solve,
    "spectrum": _stage_spectrum,
    "sweep": _stage_sweep,
    "report": _stage_report,
}


def run(argv):
    parser = argparse.ArgumentParser(
        prog="mcrd-layers",
        description="transition-layer steady states of mass-conserving "
        "reaction-diffusion systems on the unit ball",
    )
    parser.add_argument("command", choices=sorted(_STAGES))
    parser.add_argument("config", help="path to the dotted-key config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--mirrored", action="store_true",
                        help="build the branch-swapped family")
    parser.add_argument("--k", type=int, default=None, help="override model.k")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        out = args.out or str(cfg.get("run.out_dir", "out"))
        reporting.ensure_dir(out)
        pipe = _Pipeline(cfg, mirrored=args.mirrored, k_override=args.k)
        _STAGES[args.command](pipe, out)
        return 0
    except (ConfigInvalid, MassOutOfRange) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except McrdError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        try:
            reporting.ensure_dir(out)
            reporting.write_json(
                os.path.join(out, "error.json"),
                {"error": type(exc).__name__, "message": str(exc)},
            )
        except Exception:
            pass
        return 3


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
