"""Command-line entry point: ``kuranishi <command> <inputs> [options]``.

Exit codes: 0 success, 1 a checked condition failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass

from .atlas import KuranishiAtlas, check_atlas
from .charts import KuranishiChart
from .schemas import InputError, dumps, validate_input
from .su2rep.local import UnstableCount, casson_count
from .su2rep.presentation import homology_sphere_check
from .su2rep.solve import solve_reps
from .tangent import check_embedding, tangent_table
from .vfc import CountError, deformation_sweep, fiber_product, perturb_and_count, uniform_grid, virtual_count

COMMANDS = ("check-atlas", "count", "deform", "fiber", "tangent", "reps", "casson", "check-homology")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: tuple
    eps: float = 1e-3
    seed: int = 0
    starts: int | None = None
    margin: float = 0.1
    grid: int = 11
    radius: float = 0.05
    order: int = 3
    base_dim: int | None = None
    morphism: str | None = None
    bits: tuple | None = None
    sigma: int = 1
    rank_tol: float = 1e-8
    allow_positive_dim: bool = False
    allow_reducible: bool = False
    fmt: str = "human"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        need = 2 if self.command == "fiber" else 1
        if len(self.inputs) != need:
            raise UsageError(f"{self.command} takes {need} input file(s)")
        if not 0 < self.eps <= 0.1:
            raise UsageError("--eps must lie in (0, 0.1]")
        if self.starts is not None and self.starts < 1:
            raise UsageError("--starts must be at least 1")
        if self.margin < 0:
            raise UsageError("--margin must be non-negative")
        if self.grid < 2:
            raise UsageError("--grid needs at least 2 points")
        if not 0 < self.radius <= 1:
            raise UsageError("--radius must lie in (0, 1]")
        if not 1 <= self.order <= 6:
            raise UsageError("--order must lie in 1..6")
        if self.sigma not in (1, -1):
            raise UsageError("--sigma must be +1 or -1")
        if not 0 < self.rank_tol < 1:
            raise UsageError("--rank-tol must lie in (0, 1)")
        if self.base_dim is not None and self.base_dim < 0:
            raise UsageError("--base-dim must be non-negative")
        if self.command == "tangent" and not self.morphism:
            raise UsageError("tangent needs --morphism")
        if self.fmt not in ("human", "json"):
            raise UsageError("--format is human or json")


def _bits(text):
    if text is None:
        return None
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            out.append(1)
        elif tok in ("-", "-1"):
            out.append(-1)
        else:
            raise UsageError(f"orientation bit {tok!r} is not + or -")
    return tuple(out)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, JSON-able report, human lines)


def _check_atlas(cfg):
    atlas = validate_input(cfg.inputs[0], "atlas")
    rep = check_atlas(atlas)
    return (0 if rep.passed else 1), rep.to_dict(), rep.lines()


def _count_lines(sc):
    tail = "" if sc.certified else f", {sc.degenerate_zeros} degenerate zeros"
    return [f"value {sc.value:+d} (plus {sc.plus}, minus {sc.minus}){tail}", f"perturbation {[round(float(v), 12) for v in sc.perturbation]}"]


def _count(cfg):
    obj = validate_input(cfg.inputs[0])
    if isinstance(obj, KuranishiAtlas):
        sc = virtual_count(obj, cfg.eps, cfg.seed, cfg.margin)
    elif isinstance(obj, KuranishiChart):
        sc = perturb_and_count(obj, cfg.eps, cfg.seed, cfg.margin)
    else:
        raise InputError("count needs a chart or an atlas")
    return (0 if sc.certified else 1), sc.to_dict(), _count_lines(sc)


def _deform(cfg):
    family = validate_input(cfg.inputs[0], "family")
    res = deformation_sweep(family, uniform_grid(cfg.grid), cfg.eps, cfg.seed, cfg.margin)
    lines = [f"verdict: {res.verdict}"]
    for t, c in zip(res.t_grid, res.counts):
        lines.append(f"  t={t:.4f}  " + (f"{c.value:+d}" if c is not None else f"error: {res.errors[t]}"))
    return (0 if res.verdict == "invariant" else 1), res.to_dict(), lines


def _fiber(cfg):
    X, gX = validate_input(cfg.inputs[0], "mapped_chart")
    Y, gY = validate_input(cfg.inputs[1], "mapped_chart")
    if cfg.base_dim is not None and (gX.n_out != cfg.base_dim or gY.n_out != cfg.base_dim):
        raise InputError(f"maps land in R^{gX.n_out} and R^{gY.n_out}, --base-dim is {cfg.base_dim}", "$.map")
    Z = fiber_product(X, gX, Y, gY)
    report = {"chart": Z.to_dict(), "vdim": Z.vdim, "count": None}
    lines = [f"fiber product {Z.id}: n={Z.n}, m={Z.m}, vdim={Z.vdim}, orientation {Z.orientation:+d}", f"footprint {list(Z.labels)}"]
    code = 0
    if Z.vdim == 0:
        sc = perturb_and_count(Z, cfg.eps, cfg.seed, cfg.margin)
        report["count"] = sc.to_dict()
        lines += _count_lines(sc)
        code = 0 if sc.certified else 1
    return code, report, lines


def _tangent(cfg):
    A = validate_input(cfg.inputs[0], "atlas")
    B, h = validate_input(cfg.morphism, "morphism")
    table = tangent_table(A, B, h, cfg.rank_tol)
    emb = check_embedding(h, A, B, cfg.rank_tol) if len(B.charts) == 1 and B.charts[0].m == 0 else None
    rows = [{"label": lab, "chart": i, "t": list(r.as_tuple()), "borderline": r.borderline} for lab in sorted(table) for i, r in sorted(table[lab].items())]
    report = {"ranks": rows, "embedding": emb.to_dict() if emb else None}
    lines = [f"{'label':<10} {'chart':<8} t0 t1 t2"] + [f"{r['label']:<10} {r['chart']:<8} {r['t'][0]:>2} {r['t'][1]:>2} {r['t'][2]:>2}" for r in rows]
    if emb:
        lines += emb.lines()
    return (0 if emb is None or emb.passed else 1), report, lines


def _presentation(cfg):
    return validate_input(cfg.inputs[0], "presentation")


def _orbit_lines(orbits):
    lines = [f"{'#':>3}  {'fingerprint':<44} h0 h1 h2  hits"]
    for k, o in enumerate(orbits):
        fp = " ".join(f"{v:+.6f}" for v in o.fingerprint)
        h = o.h or ("?", "?", "?")
        flag = "  COLLISION" if o.collision else ""
        lines.append(f"{k:>3}  {fp:<44} {h[0]:>2} {h[1]:>2} {h[2]:>2}  {o.multiplicity}{flag}")
    return lines


def _reps(cfg):
    P = _presentation(cfg)
    orbits = solve_reps(P, starts=cfg.starts or 2000, seed=cfg.seed, allow_positive_dim=cfg.allow_positive_dim, allow_reducible=cfg.allow_reducible)
    report = {"presentation": P.to_dict(), "N": len(orbits), "orbits": [o.to_dict() for o in orbits]}
    return 0, report, [str(P), f"{len(orbits)} orbit(s)"] + _orbit_lines(orbits)


def _casson(cfg):
    P = _presentation(cfg)
    res = casson_count(P, cfg.bits, cfg.sigma, starts=cfg.starts or 100000, seed=cfg.seed, radius=cfg.radius, order=cfg.order)
    lines = [str(P), f"N = {res.N} irreducible orbit(s), stable over seeds {list(res.seed_counts)}", f"lambda = {res.lam}  (|lambda| = {res.lambda_abs})"]
    lines += _orbit_lines(res.orbits)
    return 0, res.to_dict(), lines


def _check_homology(cfg):
    P = _presentation(cfg)
    chk = homology_sphere_check(P)
    lines = [str(P), f"exponent matrix {chk.matrix.tolist()}, det {chk.det}", "integral homology sphere" if chk.is_homology_sphere else f"not a homology sphere (H_1 invariants {list(chk.h1_invariants)})"]
    return (0 if chk.is_homology_sphere else 1), chk.to_dict(), lines


HANDLERS = {
    "check-atlas": _check_atlas,
    "count": _count,
    "deform": _deform,
    "fiber": _fiber,
    "tangent": _tangent,
    "reps": _reps,
    "casson": _casson,
    "check-homology": _check_homology,
}


def run(cfg: RunConfig, out=None, err=None):
    """Dispatch a configuration; writes the report and returns the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code, report, lines = HANDLERS[cfg.command](cfg)
    except (CountError, UnstableCount) as e:
        report = {"error": str(e)}
        if cfg.fmt == "json":
            out.write(dumps(report))
        else:
            out.write(f"FAIL: {e}\n")
        return 1
    except ValueError as e:
        # InputError, UsageError, PresentationError and bad option values
        err.write(f"error: {e}\n")
        return 2
    for w in caught:
        err.write(f"warning: {w.message}\n")
    if cfg.fmt == "json":
        out.write(dumps(report))
    else:
        out.write("\n".join(lines) + "\n")
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="kuranishi", description="Kuranishi chart validation, virtual counts and SU(2) representation counts.")
    p.add_argument("--format", dest="fmt", choices=("human", "json"), default="human")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, n_inputs=1, **kw):
        s = sub.add_parser(name, **kw)
        s.add_argument("inputs", nargs=n_inputs, metavar="FILE")
        s.add_argument("--format", dest="fmt", choices=("human", "json"), default=argparse.SUPPRESS)
        return s

    cmd("check-atlas", help="validate an atlas")
    s = cmd("count", help="signed count of a chart or atlas of virtual dimension 0")
    _count_opts(s)
    s = cmd("deform", help="counts along a one-parameter family")
    _count_opts(s)
    s.add_argument("--grid", type=int, default=11)
    s = cmd("fiber", 2, help="fiber product of two mapped charts over R^k")
    _count_opts(s)
    s.add_argument("--base-dim", type=int, default=None)
    s = cmd("tangent", help="tangent ranks of a strict morphism")
    s.add_argument("--morphism", required=True)
    s.add_argument("--rank-tol", type=float, default=1e-8)
    s = cmd("reps", help="irreducible SU(2) representation classes")
    _solver_opts(s, 2000)
    s.add_argument("--allow-positive-dim", action="store_true")
    s.add_argument("--allow-reducible", action="store_true")
    s = cmd("casson", help="half the signed count of irreducible classes")
    _solver_opts(s, 100000)
    s.add_argument("--bits", default=None, help="comma-separated orientation bits, e.g. +,-")
    s.add_argument("--sigma", type=int, default=1)
    s.add_argument("--radius", type=float, default=0.05)
    s.add_argument("--order", type=int, default=3)
    cmd("check-homology", help="exponent-sum matrix and H_1 test")
    return p


def _count_opts(s):
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--margin", type=float, default=0.1)


def _solver_opts(s, starts):
    s.add_argument("--starts", type=int, default=starts)
    s.add_argument("--seed", type=int, default=0)


def config_from_args(ns) -> RunConfig:
    d = vars(ns).copy()
    d["inputs"] = tuple(d["inputs"])
    d["bits"] = _bits(d.get("bits"))
    known = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in d.items() if k in known})


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = config_from_args(ns)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
