"""Command-line entry point.

    brakeindex index-path --config path.json
    brakeindex verify --seed 0 --sweep 1000 --sweep 200
    brakeindex ellipsoid --radii 1 1.189 --pretty

Exit codes: 0 success, 1 input error, 2 numerical refinement needed,
3 identity violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import brakeorbit
from .errors import RefinementNeeded
from .iteration import bott_check, brake_square_endpoint, decomposition_check
from .maslov import IndexPair, i_omega, lemma25_audit, m_eps_signature_stable, theorem21_check
from .paths import brake_iterate, path_from_json, random_generator_path

EXIT_OK, EXIT_INPUT, EXIT_REFINE, EXIT_VIOLATION = 0, 1, 2, 3

TOL_DEFAULTS = {"brake_identity": 1e-10, **brakeorbit.TOLERANCES}


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    seed: int = 0
    sweep: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    pretty: bool = False
    plot: str | None = None
    radii: list | None = None
    starts: int = 12
    workers: int = 1
    fault: str | None = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")
        self.seed = int(self.seed)


# ----------------------------------------------------------------- helpers

def _jsonable(obj):
    if isinstance(obj, IndexPair):
        return [obj.index, obj.nullity]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, default=_jsonable, sort_keys=True, indent=2)


def _parse_tol(items) -> dict:
    tol = dict(TOL_DEFAULTS)
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or key not in tol:
            raise InputError(f"bad --tol {item!r}; known keys: {', '.join(sorted(tol))}")
        try:
            tol[key] = type(tol[key])(float(val))
        except ValueError:
            raise InputError(f"bad value in --tol {item!r}") from None
    return tol


def _parse_omega(w):
    if isinstance(w, (int, float)):
        return complex(w)
    if isinstance(w, dict):
        if "angle" in w:
            return complex(np.exp(1j * float(w["angle"])))
        return complex(float(w["re"]), float(w.get("im", 0.0)))
    raise InputError(f"cannot read omega {w!r}")


def _omega_key(w: complex) -> str:
    return f"{w.real:.12g}{w.imag:+.12g}j"


def _load_json(path: str | None) -> dict:
    if path is None:
        raise InputError("--config is required")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


# ----------------------------------------------------------------- index-path

def cmd_index_path(cfg: RunConfig) -> tuple[int, dict]:
    doc = _load_json(cfg.input)
    if "paths" in doc:
        docs = doc["paths"]
    elif "k" in doc:
        docs = [doc]
    else:
        raise InputError("expected a path document or {\"paths\": [...]}")
    if not isinstance(docs, list) or not docs:
        raise InputError("empty path list")
    omegas = [_parse_omega(w) for w in doc.get("omegas", [1.0])]
    rows = []
    code = EXIT_OK
    for i, d in enumerate(docs):
        try:
            path = path_from_json(d)
        except ValueError as exc:
            raise InputError(f"path {i}: {exc}") from None
        if any(abs(abs(w) - 1) > 1e-12 for w in omegas):
            raise InputError("omega must lie on the unit circle")
        row = {"id": i, "k": path.k, "tau": path.tau,
               "i_omega": {_omega_key(w): i_omega(path, w) for w in omegas}}
        t21 = theorem21_check(path)
        row.update({"i_L0": t21.i_L0, "i_L1": t21.i_L1, "sgn_M_eps_plus": t21.sgn_plus,
                    "sgn_M_eps_minus": t21.sgn_minus, "index_difference_passed": t21.passed})
        if not t21.passed:
            code = EXIT_VIOLATION
        rows.append(row)
    return code, {"paths": rows}


# ----------------------------------------------------------------- verify

SHEAR_BS = (0.1, 1.0, 10.0)
ROTATION_THETAS = (0.5, np.pi / 2, 3.0)


def m_eps_table() -> dict:
    """Signatures of ``M_eps`` on rotations and the two shears, both signs of eps."""
    from .sympcore import rotation

    rows, ok = [], True
    for th in ROTATION_THETAS:
        for side in "+-":
            s = m_eps_signature_stable(rotation(th), side)
            rows.append({"matrix": f"R({th:.6g})", "side": side, "sgn": s, "expected": 0})
            ok &= s == 0
    for b in SHEAR_BS:
        s1 = m_eps_signature_stable(np.array([[1.0, -b], [0.0, 1.0]]), "+")
        s2 = m_eps_signature_stable(np.array([[1.0, 0.0], [b, 1.0]]), "+")
        rows.append({"matrix": f"[[1,-{b:g}],[0,1]]", "side": "+", "sgn": s1, "expected": 2})
        rows.append({"matrix": f"[[1,0],[{b:g},1]]", "side": "+", "sgn": s2, "expected": -2})
        ok &= s1 == 2 and s2 == -2
    return {"rows": rows, "passed": bool(ok)}


def _verify_sample(args) -> dict:
    seed, k, idx, fault, brake_tol = args
    rng = np.random.default_rng([seed, k, idx])
    path = random_generator_path(k, rng)
    res = {"id": [k, idx]}
    try:
        t21 = theorem21_check(path)
        plus, minus = t21.passed_plus, t21.passed_minus
        if fault == "sign-flip":
            plus = 2 * t21.lhs_plus == -t21.sgn_plus
        res["index_difference"] = plus and minus
        res["bott"] = bott_check(path).passed
        res["decomposition"] = decomposition_check(path).passed
        res["m_eps_bounds"] = lemma25_audit(path.endpoint)["passed"]
        P = path.endpoint
        it = brake_iterate(path, 2)
        err = float(np.abs(it.endpoint - brake_square_endpoint(P)).max())
        res["brake_iteration"] = err <= brake_tol * max(1.0, float(np.abs(P).max()) ** 2)
    except RefinementNeeded as exc:
        res["refinement"] = str(exc)
    if "refinement" in res or not all(res.get(name) for name in IDENTITIES):
        res["sample"] = path.to_json()
    return res


IDENTITIES = ("index_difference", "bott", "decomposition", "m_eps_bounds", "brake_iteration")


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    sizes = list(cfg.sweep) or [1000, 200]
    if len(sizes) == 1:
        sizes = [sizes[0], max(1, sizes[0] // 5)]
    if len(sizes) != 2 or any(int(s) < 1 for s in sizes):
        raise InputError("sweep sizes must be >= 1 (Sp(2) count, Sp(4) count)")
    jobs = [(cfg.seed, k, i, cfg.fault, cfg.tolerances["brake_identity"])
            for k, size in ((1, sizes[0]), (2, sizes[1])) for i in range(int(size))]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_verify_sample, jobs, chunksize=16))
    else:
        results = [_verify_sample(j) for j in jobs]
    results.sort(key=lambda r: tuple(r["id"]))
    counts = {name: {"passed": sum(bool(r.get(name)) for r in results), "total": len(results)}
              for name in IDENTITIES}
    table = m_eps_table()
    counts["m_eps_table"] = {"passed": int(table["passed"]), "total": 1}
    failures = [r for r in results if "sample" in r]
    refine = [r for r in failures if "refinement" in r]
    report = {"counts": counts, "m_eps_table": table, "sizes": sizes,
              "failures": failures[:5], "failure_count": len(failures)}
    if refine and len(refine) == len(failures) and table["passed"]:
        return EXIT_REFINE, report
    if failures or not table["passed"]:
        return EXIT_VIOLATION, report
    return EXIT_OK, report


# ----------------------------------------------------------------- ellipsoid

def cmd_ellipsoid(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.radii is not None:
        radii = list(cfg.radii)
    else:
        doc = _load_json(cfg.input)
        if doc.get("type") != "ellipsoid":
            raise InputError("the ellipsoid command needs {\"type\": \"ellipsoid\", \"radii\": [...]}")
        radii = doc.get("radii")
    try:
        spec = brakeorbit.EllipsoidSpec(tuple(float(r) for r in radii))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    H = brakeorbit.gauge_hamiltonian(spec)
    analytic = brakeorbit.ellipsoid_analytic_orbits(spec)
    audit = brakeorbit.multiplicity_audit(H, starts=cfg.starts, seed=cfg.seed)
    sym = brakeorbit.multiplicity_audit(H, starts=cfg.starts, seed=cfg.seed, symmetric=True)
    orbits = []
    for o in audit["orbits"]:
        match = next((a.label for a in analytic if brakeorbit.geometrically_equal(o, a)), None)
        rep = brakeorbit.orbit_index_report(o, k_max=8)
        rec = o.to_json(indices={"i_L0": rep["i_L0"], "i_L1": rep["i_L1"],
                                 "i_periodic_double": rep["i_periodic_double"],
                                 "S+_P2(1)": rep["S+_P2(1)"], "profile_L0": rep["profile"]["L0"]})
        rec["analytic_match"] = match
        rec["nondegenerate"] = rep["nondegenerate"]
        rec["theorem_gap"] = rep["theorem_gap"]
        orbits.append(rec)
    warnings = []
    if spec.resonances:
        warnings.append(f"squared radius ratios are rational for pairs {spec.resonances}: "
                        "expect families of brake orbits")
    if audit["degenerate_shots"]:
        warnings.append(f"{audit['degenerate_shots']} shots ended on a degenerate Jacobian; "
                        "the orbit count is not a multiplicity statement")
    report = {"radii": list(spec.radii), "analytic_periods": spec.periods.tolist(),
              "nonresonant": spec.nonresonant, "orbits": orbits,
              "count": audit["count"], "bound": audit["bound"], "status": audit["status"],
              "attempts": len(audit["attempts"]), "degenerate_shots": audit["degenerate_shots"],
              "symmetric_search": {"count": sym["count"], "periods": [o.tau for o in sym["orbits"]],
                                   "nondegenerate": [_nu_L0(o) == 1 for o in sym["orbits"]],
                                   "degenerate_shots": sym["degenerate_shots"]},
              "warnings": warnings}
    if cfg.plot:
        _plot_ellipsoid(Path(cfg.plot), spec, orbits)
    return EXIT_OK, report


def _nu_L0(o) -> int:
    from .maslov import nu_lagrangian
    return nu_lagrangian(o.monodromy_half, 0)


def _plot_ellipsoid(outdir: Path, spec, orbits):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(4, 3))
    r = np.asarray(spec.radii)
    ax.plot(r, spec.periods, "o", label="analytic")
    ax.plot(r, np.pi * r ** 2, ":", color="gray")
    ax.set_xlabel("radius r_k")
    ax.set_ylabel("period")
    ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / "period_vs_radius.svg")
    plt.close(fig)
    fig, ax = plt.subplots(figsize=(4, 3))
    for i, o in enumerate(orbits):
        L0 = [p[0] for p in o["indices"]["profile_L0"]]
        ax.plot(range(1, len(L0) + 1), L0, "o-", label=f"orbit {i + 1}")
    ax.set_xlabel("iterate k")
    ax.set_ylabel("i_L0")
    ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / "index_vs_iterate.svg")
    plt.close(fig)


# ----------------------------------------------------------------- pretty

def _pretty(command: str, report: dict) -> str:
    lines = []
    if command == "verify":
        for name, c in report["counts"].items():
            lines.append(f"{name:18s} {c['passed']:6d} / {c['total']}")
    elif command == "index-path":
        for row in report["paths"]:
            om = "  ".join(f"i[{k}]={tuple(v)}" for k, v in row["i_omega"].items())
            lines.append(f"path {row['id']}: L0={tuple(row['i_L0'])} L1={tuple(row['i_L1'])} "
                         f"sgn+={row['sgn_M_eps_plus']} sgn-={row['sgn_M_eps_minus']} {om} "
                         f"thm={'ok' if row['index_difference_passed'] else 'FAIL'}")
    elif command == "ellipsoid":
        lines.append(f"radii {report['radii']}  count {report['count']}  "
                     f"bound {report['bound']}  ({report['status']})  "
                     f"symmetric {report['symmetric_search']['count']}")
        lines.append(f"{'tau':>12s} {'sym':>5s} {'i_L0':>8s} {'i_L1':>8s}  match")
        for o in report["orbits"]:
            lines.append(f"{o['tau']:12.8f} {str(o['symmetric']):>5s} "
                         f"{str(tuple(o['indices']['i_L0'])):>8s} "
                         f"{str(tuple(o['indices']['i_L1'])):>8s}  {o['analytic_match']}")
        lines += [f"warning: {w}" for w in report["warnings"]]
    lines.append(f"exit {report['exit_code']}")
    return "\n".join(lines)


# ----------------------------------------------------------------- main

COMMANDS = {"index-path": cmd_index_path, "verify": cmd_verify, "ellipsoid": cmd_ellipsoid}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brakeindex", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="input JSON document")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep", type=int, action="append", default=[],
                   help="sweep size; repeat for Sp(2) then Sp(4) counts")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--pretty", action="store_true", help="human-readable table")
    p.add_argument("--plot", metavar="DIR", help="write SVG plots to DIR")
    p.add_argument("--tol", action="append", default=[], metavar="KEY=VAL")
    p.add_argument("--radii", type=float, nargs="+")
    p.add_argument("--starts", type=int, default=12, help="multistart count (ellipsoid)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--inject-fault", dest="fault", choices=["sign-flip"], help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    saved = dict(brakeorbit.TOLERANCES)
    try:
        cfg = RunConfig(args.command, args.config, args.seed, args.sweep, _parse_tol(args.tol),
                        args.out, args.pretty, args.plot, args.radii, args.starts, args.workers,
                        args.fault)
        brakeorbit.TOLERANCES.update({k: v for k, v in cfg.tolerances.items()
                                      if k in brakeorbit.TOLERANCES})
        code, report = COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RefinementNeeded as exc:
        print(f"refinement needed: {exc}", file=sys.stderr)
        return EXIT_REFINE
    finally:
        brakeorbit.TOLERANCES.clear()
        brakeorbit.TOLERANCES.update(saved)
    report = {"command": cfg.command, "config": asdict(cfg), "exit_code": code, **report}
    text = _pretty(cfg.command, report) if cfg.pretty else dumps(report)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
