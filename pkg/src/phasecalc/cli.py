"""Command-line entry point.

Machine output is a single JSON report (stdout or ``--out``), written with
sorted keys so that a fixed config and seed give byte-identical files. A
short human summary goes to standard error.

Exit codes: 0 pass, 1 input error, 2 certificate violation, 3 divergence,
4 internal inconsistency.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .grids import GridSpec, GridSymbol, read_grid_symbol, write_grid_symbol, write_matrix
from .order_functions import (DivergenceError, OrderFunction, OrderFunctionError, as_separable,
                              certify_order_axiom, compose, fit_covector_exponent,
                              l1_fiber_certificate, schur_certificate, separable_compose)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_DIVERGENCE, EXIT_INCONSISTENT = range(5)
COMMANDS = ("certify-order", "compose", "certify-symbol", "quantize", "moyal", "bound", "accept")


class InputError(ValueError):
    pass


class Violation(Exception):
    """A certificate or check failed; carries the partial report."""

    def __init__(self, msg, result, code=EXIT_VIOLATION):
        super().__init__(msg)
        self.result = result
        self.code = code


# ------------------------------------------------------------------ config
@dataclass
class JobConfig:
    command: str
    options: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    grid: GridSpec | None = None
    tol: float | None = None
    base: Path = Path(".")

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.tol is not None and not self.tol > 0:
            raise InputError("--tol must be positive")
        for key in ("symbol", "a", "b"):
            v = self.options.get(key)
            if isinstance(v, str) and not v.startswith("family:") and not self.path(v).exists():
                raise InputError(f"input file {v} does not exist")

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    def get_grid(self) -> GridSpec:
        if self.grid is not None:
            return self.grid
        g = self.options.get("grid")
        return GridSpec.parse(g) if isinstance(g, str) else GridSpec.balanced(48)

    def inputs(self) -> dict:
        """sha256 of every referenced input file."""
        out = {}
        for key in ("symbol", "a", "b", "m", "m1", "m2"):
            v = self.options.get(key)
            if isinstance(v, str) and not v.startswith("family:"):
                p = self.path(v)
                if p.exists():
                    out[key] = hashlib.sha256(p.read_bytes()).hexdigest()
                    raw = p.with_suffix(".bin")
                    if raw.exists():
                        out[key + ".bin"] = hashlib.sha256(raw.read_bytes()).hexdigest()
        return out

    def canonical(self) -> dict:
        return {"command": self.command, "options": self.options, "seed": self.seed,
                "grid": None if self.grid is None else self.grid.to_json(), "tol": self.tol,
                "inputs": self.inputs()}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()


def load_config(args) -> JobConfig:
    options, base = {}, Path(".")
    if args.config:
        p = Path(args.config)
        try:
            options = json.loads(p.read_text())
        except FileNotFoundError:
            raise InputError(f"config file {p} does not exist")
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}")
        if not isinstance(options, dict):
            raise InputError("config must be a JSON object")
        base = p.parent
    grid = None
    if args.grid:
        try:
            grid = GridSpec.parse(args.grid)
        except Exception as exc:
            raise InputError(f"bad --grid {args.grid!r}: {exc}")
    return JobConfig(args.command, options, args.seed, args.out, grid, args.tol, base)


def _order_function(cfg: JobConfig, key: str) -> OrderFunction:
    if key not in cfg.options:
        raise InputError(f"config needs an order function under {key!r}")
    v = cfg.options[key]
    try:
        if isinstance(v, str):
            v = json.loads(cfg.path(v).read_text())
        return OrderFunction.from_json(v)
    except FileNotFoundError:
        raise InputError(f"order-function file {v} does not exist")
    except json.JSONDecodeError as exc:
        raise InputError(f"order function {key!r} is not valid JSON: {exc}")
    except (OrderFunctionError, KeyError, TypeError) as exc:
        raise InputError(f"order function {key!r}: {exc}")


def _symbol(cfg: JobConfig, key: str = "symbol") -> GridSymbol:
    v = cfg.options.get(key)
    if v is None:
        raise InputError(f"config needs a symbol under {key!r}")
    if v.startswith("family:"):
        from .families import family
        name = v.split(":", 1)[1]
        fam = family()
        if name not in fam:
            raise InputError(f"unknown built-in symbol {name!r}")
        g = cfg.get_grid()
        return GridSymbol.from_function(fam[name][0], (g, g))
    try:
        return read_grid_symbol(cfg.path(v))
    except (KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"symbol file {v}: {exc}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isfinite(v):
            return v
        return "inf" if v > 0 else "-inf" if v < 0 else "nan"
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _quad(cfg):
    return {} if cfg.tol is None else {"rel_tol": cfg.tol}


# ------------------------------------------------------------------ commands
def cmd_certify_order(cfg: JobConfig) -> dict:
    m = _order_function(cfg, "m")
    sweep = certify_order_axiom(m, samples=int(cfg.options.get("samples", 20000)),
                                radius=float(cfg.options.get("radius", 50.0)), seed=cfg.seed)
    res = {"certificate": m.certificate.to_json(), "sweep": sweep.to_json(),
           "order_function": m.to_json()}
    if not sweep.passed:
        raise Violation("sweep found a pair above the certified constant", res)
    return res


def _compose_points(cfg, m):
    pts = cfg.options.get("points")
    if pts is None:
        d = 2 * m.n
        e = np.ones(d) / np.sqrt(d)
        return [np.concatenate([np.zeros(d), r * e]) for r in (0.0, 10.0, 30.0, 100.0)]
    return [np.asarray(p, float) for p in pts]


def cmd_compose(cfg: JobConfig) -> dict:
    m1, m2 = _order_function(cfg, "m1"), _order_function(cfg, "m2")
    if (m1.n, m1.domain) != (m2.n, m2.domain):
        raise InputError("m1 and m2 live on different spaces")
    s1, s2 = as_separable(m1), as_separable(m2)
    res = {}
    if s1 is not None and s2 is not None:
        res["path"] = "separable"
        res["descriptor"] = separable_compose(s1, s2, m1.n).to_json()
    else:
        res["path"] = "generic"
    d = 2 * m1.n
    vals = []
    for p in _compose_points(cfg, m1):
        r = compose(m1, m2, p[:d], p[d:], raise_on_divergence=True, **_quad(cfg))
        vals.append({"point": p.tolist(), "value": r.value, "tail_estimate": r.tail_estimate,
                     "truncation_radius": r.radius})
    res["values"] = vals
    if cfg.options.get("fit", True):
        fit = fit_covector_exponent(m1, m2, **_quad(cfg))
        res["fitted_exponent"] = fit.slope
        res["fit"] = fit.to_json()
    res["m3"] = ("<x*>^{%g}%s" % (res["descriptor"]["exponent"],
                                  " ln<x*>" if res["descriptor"]["log_factor"] else "")
                 if res["path"] == "separable" else
                 "<x*>^{%.3f} (fitted)" % res.get("fitted_exponent", np.nan))
    return res


def cmd_certify_symbol(cfg: JobConfig) -> dict:
    from .bargmann import BargmannSetup, calibrate, membership_via_bargmann
    from .bspaces import SeqSpaceSpec
    from .phase_space import Lattice
    from .quantize import AliasingError, GridError
    from .symbol_class import (WindowError, bspace_stilde_norm, build_partition, stft_membership,
                               stilde_norm)

    a = _symbol(cfg)
    m = _order_function(cfg, "m")
    mode = cfg.options.get("mode")
    modes = [mode] if mode else cfg.options.get("modes", ["lattice", "stft", "bargmann"])
    bad = set(modes) - {"lattice", "stft", "bargmann"}
    if bad:
        raise InputError(f"unknown membership modes {sorted(bad)}")
    B = cfg.options.get("B")
    B = SeqSpaceSpec.from_json(B) if B else None
    scale = float(cfg.options.get("lattice_scale", 1.0))
    width = float(cfg.options.get("width", 1.0))
    btol = cfg.tol if cfg.tol is not None else 1e-8
    reports = {}
    try:
        for mode in modes:
            if mode == "lattice":
                fam = build_partition(Lattice.scaled(2 * a.ndim, scale), width)
                r = (bspace_stilde_norm(a, m, fam, B, boundary_tol=btol) if B
                     else stilde_norm(a, m, fam, boundary_tol=btol))
            elif mode == "stft":
                fam = build_partition(Lattice.scaled(a.ndim, scale), width)
                r = stft_membership(a, m, fam)
            else:
                S = BargmannSetup.standard(a.ndim // 2)
                calibrate(S)
                r = membership_via_bargmann(a, m, S, B=B, boundary_tol=btol)
            reports[mode] = r.to_json()
    except (GridError, AliasingError, WindowError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    verdicts = {k: v["verdict"] for k, v in reports.items()}
    res = {"reports": reports, "verdicts": verdicts, "agree": len(set(verdicts.values())) <= 1}
    if not res["agree"]:
        raise Violation("membership modes disagree", res, EXIT_INCONSISTENT)
    return res


def cmd_quantize(cfg: JobConfig) -> dict:
    from .quantize import AliasingError, GridError, weyl_quantize
    a = _symbol(cfg)
    if a.ndim != 2:
        raise InputError("quantize expects a symbol on the phase plane (n = 1)")
    try:
        op = weyl_quantize(a, a.axes[0])
    except (GridError, AliasingError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    M = op.matrix
    res = {"shape": list(M.shape), "hermitian": op.is_hermitian,
           "operator_norm": float(np.linalg.norm(M, 2)),
           "frobenius_norm": float(np.linalg.norm(M)), "grid": a.axes[0].to_json()}
    target = cfg.options.get("matrix")
    if target:
        write_matrix(M, cfg.path(target), a.axes[0])
        res["matrix"] = str(target)
    return res


def cmd_moyal(cfg: JobConfig) -> dict:
    from .quantize import AliasingError, GridError, composition_error, moyal_product, \
        spectral_tail_fraction
    a, b = _symbol(cfg, "a"), _symbol(cfg, "b")
    try:
        c = moyal_product(a, b)
        res = {"tail_fraction": {"a": spectral_tail_fraction(a), "b": spectral_tail_fraction(b)},
               "grid": [ax.to_json() for ax in a.axes]}
        if cfg.options.get("check", True) and a.ndim == 2:
            res["composition_error"] = composition_error(a, b, a.axes[0])
    except (GridError, AliasingError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}")
    target = cfg.options.get("product")
    if target:
        write_grid_symbol(c, cfg.path(target))
        res["product"] = str(target)
    else:
        res["product_sup"] = float(np.abs(c.values).max())
    return res


def cmd_bound(cfg: JobConfig) -> dict:
    from .phase_space import Lattice
    from .quantize import weyl_quantize
    from .schatten import cp_norm, diagonal_cp_bound, symbol_cp_check
    from .symbol_class import build_partition

    m = _order_function(cfg, "m")
    target = cfg.options.get("target", "l2_schur")
    res = {"target": target}
    if target == "l2_schur":
        r = schur_certificate(m, **_quad(cfg))
        res["certificate"] = r.to_json()
        if not r.finite:
            raise Violation("Schur integrals diverge", res, EXIT_DIVERGENCE)
        res["bound"] = float(np.sqrt(r.row_sup * r.column_sup))
    elif target == "l1_fiber":
        try:
            r = l1_fiber_certificate(m, **_quad(cfg))
        except OrderFunctionError as exc:
            raise InputError(str(exc))
        res["certificate"] = {"value": r.value, "finite": r.finite, "degree": r.degree,
                              "truncation_radius": r.radius, "tail_estimate": r.tail_estimate}
        if not r.finite:
            raise Violation("fiber integral diverges", res, EXIT_DIVERGENCE)
        res["bound"] = r.value
        res["bound_over_2pi"] = r.value / (2 * np.pi)
    elif target == "cp":
        p = float(cfg.options.get("p", 1))
        lat = Lattice.scaled(2 * m.n, float(cfg.options.get("lattice_scale", 1.0)))
        diag = diagonal_cp_bound(m, lat, p)
        res["diagonal"] = diag.to_json()
        if not diag.finite:
            raise Violation("diagonal C_p bound diverges", res, EXIT_DIVERGENCE)
        if "symbol" in cfg.options:
            a = _symbol(cfg)
            fam = build_partition(Lattice.scaled(4), 1.0)
            t = symbol_cp_check(a, m, p, fam, lat, diag=diag,
                                constant=cfg.options.get("constant"))
            res["symbol_check"] = t.to_json()
            if t.within is False:
                raise Violation("measured ratio outside the calibrated band", res)
    else:
        raise InputError(f"unknown bound target {target!r}")
    if target != "cp" and "symbol" in cfg.options:
        a = _symbol(cfg)
        if a.axes[0].N <= 128:
            res["measured_operator_norm"] = float(cp_norm(weyl_quantize(a, a.axes[0]).matrix,
                                                          np.inf))
    return res


def cmd_accept(cfg: JobConfig) -> dict:
    from . import acceptance
    numbers = cfg.options.get("criteria")
    results = acceptance.run(numbers, seed=cfg.seed,
                             log=lambda s: print(s, file=sys.stderr, flush=True))
    res = {"criteria": [r.to_json() for r in results],
           "passed": sum(r.passed for r in results), "total": len(results)}
    if res["passed"] != res["total"]:
        raise Violation("acceptance criteria failed", res)
    return res


HANDLERS = {"certify-order": cmd_certify_order, "compose": cmd_compose,
            "certify-symbol": cmd_certify_symbol, "quantize": cmd_quantize,
            "moyal": cmd_moyal, "bound": cmd_bound, "accept": cmd_accept}


# ------------------------------------------------------------------ main
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasecalc", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON job configuration")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--grid", help="grid as N,L")
    ap.add_argument("--tol", type=float)
    return ap


def run(cfg: JobConfig) -> tuple[int, dict]:
    report = {"command": cfg.command, "config_hash": cfg.digest(), "seed": cfg.seed,
              "versions": {"phasecalc": __version__, "numpy": np.__version__,
                           "scipy": scipy.__version__}}
    try:
        result = HANDLERS[cfg.command](cfg)
        code, status = EXIT_OK, "pass"
    except Violation as exc:
        result, code, status = exc.result, exc.code, str(exc)
    except DivergenceError as exc:
        result, code, status = {"error": str(exc)}, EXIT_DIVERGENCE, "divergence"
    except (InputError, OrderFunctionError) as exc:
        result, code, status = {"error": str(exc)}, EXIT_INPUT, "input error"
    report.update({"result": result, "exit_code": code, "status": status})
    return code, _jsonable(report)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except InputError as exc:
        print(f"phasecalc: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code, report = run(cfg)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"phasecalc {cfg.command}: {report['status']} (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
