"""Command-line sweeps that regenerate the numerical data behind each figure.

Every subcommand resolves a single JSON configuration (``--config``) whose
keys may be overridden by flags, computes its rows (optionally in parallel)
and writes a CSV or JSON table plus a sidecar ``*.config.json`` holding the
resolved configuration.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import alphabet as ab
from . import analysis as an
from . import cloners as cl
from . import discrimination as dc
from . import fock
from .errors import BCSCloneError, ConfigError
from .optimize import STRATEGIES, OptimizerSpec

log = logging.getLogger("bcsclone")

UNITS = ("n_mean", "amplitude")
WIGNER_STATES = ("coherent", "cat_even", "cat_odd", "qubit_basis_0", "qubit_basis_1", "optimal_clone")
CUMULANT_SCHEMES = ("optimal", "mp_exact", "mp_optimized_squeezed")
PARAM_SCHEMES = ("psa", "mp_optimized_coherent", "partial_mp", "usd_optimized_squeezed")
PARAM_KEYS = {
    "psa": ("r",),
    "mp": ("beta", "delta_beta", "r"),
    "partial_mp": ("T", "g", "r1", "r2"),
    "usd": ("beta", "r"),
}

DEFAULTS: dict[str, Any] = {
    "alpha_grid": {"start": 0.0, "stop": 3.0, "points": 31, "units": "n_mean"},
    "schemes": None,
    "receiver": "helstrom",
    "optimizer": {"strategy": None, "tolerance": 1e-8, "max_evals": 100_000, "starts": 8},
    "truncation": {"dim": None, "tail_tol": 1e-10},
    "axes": ["x", "p"],
    "format": "csv",
    "out": None,
    "seed": 0,
    "mc_shots": 0,
    "jobs": 1,
    "wigner": {"state": "coherent", "n_mean": 0.5, "points": 121, "half_width": 4.5, "center": None, "diff": False},
}


@dataclass
class RunConfig:
    """Fully resolved configuration of one CLI run."""

    command: str
    alpha_grid: dict
    schemes: list
    receiver: str
    optimizer: dict
    truncation: dict
    axes: list
    format: str
    out: str | None
    seed: int
    mc_shots: int
    jobs: int
    wigner: dict = field(default_factory=dict)

    def validate(self):
        g = self.alpha_grid
        if g.get("units") not in UNITS:
            raise ConfigError(f"alpha_grid.units must be one of {UNITS}")
        if int(g["points"]) < 2:
            raise ConfigError("alpha_grid.points must be >= 2")
        if not float(g["start"]) < float(g["stop"]):
            raise ConfigError("alpha_grid.start must be below alpha_grid.stop")
        if float(g["start"]) < 0:
            raise ConfigError("alpha_grid.start must be non-negative")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.receiver not in dc.RECEIVERS:
            raise ConfigError(f"unknown receiver {self.receiver!r}")
        strat = self.optimizer.get("strategy")
        if strat is not None and strat not in STRATEGIES:
            raise ConfigError(f"unknown optimizer strategy {strat!r}")
        if self.jobs < 1 or self.mc_shots < 0:
            raise ConfigError("jobs must be >= 1 and mc_shots >= 0")
        for ax in self.axes:
            if ax not in ("x", "p"):
                raise ConfigError(f"unknown axis {ax!r}")
        if self.command == "wigner":
            w = self.wigner
            if w["state"] not in WIGNER_STATES:
                raise ConfigError(f"unknown state {w['state']!r}; choose from {WIGNER_STATES}")
            if int(w["points"]) < 2 or float(w["half_width"]) <= 0:
                raise ConfigError("wigner grid needs >= 2 points and a positive half width")
            if self.out is None:
                raise ConfigError("wigner needs --out")

    def n_means(self) -> np.ndarray:
        g = self.alpha_grid
        v = np.linspace(float(g["start"]), float(g["stop"]), int(g["points"]))
        return v if g["units"] == "n_mean" else v**2

    def optimizer_spec(self, k: int = 1) -> OptimizerSpec | None:
        o = self.optimizer
        if o.get("strategy") is None:
            return None
        return OptimizerSpec(
            [(0.0, 1.0)] * k, tolerance=float(o["tolerance"]), max_evals=int(o["max_evals"]),
            strategy=o["strategy"], starts=int(o.get("starts", 8)),
        )

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["package_version"] = __version__
        return d


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            user = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(user) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg = _merge(cfg, user)
    grid = cfg["alpha_grid"]
    for key in ("start", "stop", "points"):
        if getattr(args, key, None) is not None:
            grid[key] = getattr(args, key)
    if getattr(args, "amplitude", False):
        grid["units"] = "amplitude"
    for key in ("receiver", "format", "out", "seed", "mc_shots", "jobs"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    if getattr(args, "schemes", None):
        cfg["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if getattr(args, "strategy", None):
        cfg["optimizer"]["strategy"] = args.strategy
    if getattr(args, "dim", None):
        cfg["truncation"]["dim"] = args.dim
    if args.command == "wigner":
        w = cfg["wigner"]
        for key in ("state", "points", "half_width"):
            if getattr(args, key, None) is not None:
                w[key] = getattr(args, key)
        if args.n_mean is not None:
            w["n_mean"] = args.n_mean
        if args.alpha is not None:
            w["n_mean"] = args.alpha**2
        if args.diff:
            w["diff"] = True
    if cfg["schemes"] is None:
        cfg["schemes"] = {
            "fidelity-curve": list(cl.SCHEME_COLUMNS),
            "params": list(PARAM_SCHEMES),
            "cumulants": list(CUMULANT_SCHEMES),
        }.get(args.command, [])
    rc = RunConfig(command=args.command, **cfg)
    rc.validate()
    known = {"fidelity-curve": cl.SCHEME_COLUMNS, "params": cl.SCHEME_COLUMNS, "cumulants": CUMULANT_SCHEMES}
    for s in rc.schemes:
        if args.command in known and s not in known[args.command]:
            raise ConfigError(f"scheme {s!r} is not available for {args.command}")
    return rc


# -- row producers (module level so they pickle for process pools) ----------


def discrim_row(n: float, cfg: RunConfig, index: int) -> dict:
    a = math.sqrt(n)
    od = dc.optimized_displacement(a)
    row = {
        "n_mean": n,
        "homodyne": dc.homodyne_error(a).error_prob,
        "kennedy": dc.kennedy_error(a).error_prob,
        "od": od.error_prob,
        "od_beta": od.params["beta"],
        "helstrom": dc.helstrom_error(a).error_prob,
    }
    if cfg.mc_shots:
        rng = np.random.default_rng([cfg.seed, index])
        x = rng.normal(a, 0.5, cfg.mc_shots)
        row["homodyne_mc"] = float(np.count_nonzero(x < 0) / cfg.mc_shots)
    return row


def _run(fn: Callable[[], Any]) -> tuple[Any, str]:
    try:
        return fn(), "ok"
    except BCSCloneError as exc:
        log.warning("row failed: %s", exc)
        return None, type(exc).__name__


def fidelity_row(n: float, cfg: RunConfig, index: int) -> dict:
    a = math.sqrt(n)
    row: dict[str, Any] = {"n_mean": n}
    statuses = []
    for s in cfg.schemes:
        k = 4 if s == "partial_mp" else 2
        rep, st = _run(lambda: cl.run_scheme(s, a, cfg.optimizer_spec(k), cfg.receiver))
        row[s] = rep.mean_fidelity if rep else math.nan
        if st != "ok":
            statuses.append(f"{s}:{st}")
    row["bruss_bound"] = cl.bruss_bound_alpha(a)
    row["status"] = ";".join(statuses) or "ok"
    return row


def _param_keys(scheme: str) -> tuple:
    return PARAM_KEYS.get(scheme.split("_")[0] if scheme not in PARAM_KEYS else scheme, ())


def params_row(n: float, cfg: RunConfig, index: int) -> dict:
    a = math.sqrt(n)
    row: dict[str, Any] = {"n_mean": n}
    statuses = []
    for s in cfg.schemes:
        k = 4 if s == "partial_mp" else 2
        rep, st = _run(lambda: cl.run_scheme(s, a, cfg.optimizer_spec(k), cfg.receiver))
        for key in _param_keys(s):
            row[f"{s}_{key}"] = float(rep.params[key]) if rep else math.nan
        row[f"{s}_fidelity"] = rep.mean_fidelity if rep else math.nan
        if st != "ok":
            statuses.append(f"{s}:{st}")
    row["status"] = ";".join(statuses) or "ok"
    return row


def _truncation(cfg: RunConfig, a: float) -> fock.TruncationConfig:
    t = cfg.truncation
    if t.get("dim"):
        return fock.TruncationConfig(int(t["dim"]), float(t["tail_tol"]))
    return fock.default_truncation(a, tail_tol=float(t["tail_tol"]))


def cumulant_rows(n: float, cfg: RunConfig, index: int) -> list[dict]:
    a = math.sqrt(n)
    rows = []
    for s in cfg.schemes:
        def density(s=s):
            if s == "optimal":
                if a == 0:
                    return fock.vacuum(_truncation(cfg, a)).density()
                return cl.optimal_clone_state(a, _truncation(cfg, a))[1]
            rep = cl.run_scheme(s, a, cfg.optimizer_spec(2), cfg.receiver)
            return an.clone_density(rep)

        rho, st = _run(density)
        for ax in cfg.axes:
            row: dict[str, Any] = {"scheme": s, "n_mean": n, "axis": ax}
            ks, st2 = (None, st) if rho is None else _run(lambda: an.cumulants(rho, ax))
            for i in range(6):
                row[f"k{i + 1}"] = ks.k[i] if ks else math.nan
            row["status"] = st2
            rows.append(row)
    return rows


def _sweep(fn, cfg: RunConfig) -> list:
    ns = cfg.n_means()
    args = [(float(n), cfg, i) for i, n in enumerate(ns)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_call, [(fn, *x) for x in args]))
    return [fn(*x) for x in args]


def _call(packed):
    fn, *rest = packed
    return fn(*rest)


# -- output ------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return an.fmt(v)


def table_text(rows: Sequence[dict], fmt: str) -> str:
    if not rows:
        return ""
    header = list(rows[0])
    if fmt == "json":
        out = [{k: (r[k] if isinstance(r[k], str) else (None if math.isnan(r[k]) else float(an.fmt(r[k])))) for k in header} for r in rows]
        return json.dumps(out, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r[k]) for k in header])
    return buf.getvalue()


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.stem + ".config.json")


def write_sidecar(out: Path, cfg: RunConfig, extra: dict | None = None):
    doc = cfg.as_dict() | (extra or {})
    sidecar_path(out).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def emit(rows: Sequence[dict], cfg: RunConfig) -> str:
    text = table_text(rows, cfg.format)
    if cfg.out:
        out = Path(cfg.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        write_sidecar(out, cfg)
    else:
        sys.stdout.write(text)
    return text


# -- commands ----------------------------------------------------------------


def cmd_discrim_curve(cfg: RunConfig) -> list[dict]:
    rows = _sweep(discrim_row, cfg)
    emit(rows, cfg)
    return rows


def cmd_fidelity_curve(cfg: RunConfig) -> list[dict]:
    rows = _sweep(fidelity_row, cfg)
    emit(rows, cfg)
    return rows


def cmd_params(cfg: RunConfig) -> list[dict]:
    rows = _sweep(params_row, cfg)
    emit(rows, cfg)
    return rows


def cmd_cumulants(cfg: RunConfig) -> list[dict]:
    rows = [r for chunk in _sweep(cumulant_rows, cfg) for r in chunk]
    rows.sort(key=lambda r: (cfg.schemes.index(r["scheme"]), r["n_mean"], r["axis"]))
    emit(rows, cfg)
    return rows


def wigner_state(name: str, n_mean: float, cfg: RunConfig) -> fock.DensityOp:
    a = math.sqrt(n_mean)
    tc = _truncation(cfg, a)
    if name == "coherent":
        return fock.coherent_state(a, tc).density()
    if name in ("cat_even", "cat_odd"):
        even, odd = ab.cat_basis(a, tc)
        return (even if name == "cat_even" else odd).density()
    if name in ("qubit_basis_0", "qubit_basis_1"):
        zero, one = ab.qubit_basis(a, tc)
        return (zero if name.endswith("0") else one).density()
    return cl.optimal_clone_state(a, tc)[1]


def cmd_wigner(cfg: RunConfig) -> dict:
    w = cfg.wigner
    try:
        rho = wigner_state(w["state"], float(w["n_mean"]), cfg)
    except (BCSCloneError, ValueError) as exc:
        raise ConfigError(f"cannot build {w['state']} at n_mean={w['n_mean']}: {exc}") from exc
    xa, pa = an.default_axes(rho, int(w["points"]), float(w["half_width"]), w.get("center"))
    grid = an.wigner(rho, xa, pa)
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stem = out.with_suffix("")
    summary = {
        "state": w["state"],
        "n_mean": float(w["n_mean"]),
        "integral": grid.integral(),
        "trace": rho.trace(),
        "w_origin": an.wigner_at(rho, 0.0, 0.0),
    }
    an.write_grid_csv(grid, stem.with_suffix(".csv"))
    an.write_grid_json(grid, stem.with_suffix(".json"), {"state": w["state"], "n_mean": float(w["n_mean"])})
    an.write_marginals_csv(grid, Path(f"{stem}.marginals.csv"))
    if w.get("diff"):
        ref = fock.coherent_state(math.sqrt(float(w["n_mean"])), rho.config)
        diff = an.wigner_diff(grid, an.wigner(ref, xa, pa))
        an.write_grid_csv(diff, Path(f"{stem}.diff.csv"))
        halves = an.half_plane_integrals(diff)
        summary["diff"] = {
            "integral": diff.integral(),
            "abs_integral": float(np.abs(diff.values).sum() * diff.dxdp),
            **halves,
            "bias_toward_negative_x": halves["x_neg"] > halves["x_pos"],
        }
    Path(f"{stem}.summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    write_sidecar(stem.with_suffix(".csv"), cfg)
    return summary


COMMANDS = {
    "discrim-curve": cmd_discrim_curve,
    "fidelity-curve": cmd_fidelity_curve,
    "params": cmd_params,
    "cumulants": cmd_cumulants,
    "wigner": cmd_wigner,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcsclone", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", help="output path (stdout when omitted)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int, help="seed for Monte-Carlo checks")
        sp.add_argument("--jobs", type=int, help="worker processes for the sweep")
        sp.add_argument("--start", type=float)
        sp.add_argument("--stop", type=float)
        sp.add_argument("--points", type=int)
        sp.add_argument("--amplitude", action="store_true", help="grid is in |alpha| instead of |alpha|^2")
        sp.add_argument("--receiver", choices=sorted(dc.RECEIVERS))
        sp.add_argument("--schemes", help="comma-separated scheme columns")
        sp.add_argument("--strategy", choices=STRATEGIES)
        sp.add_argument("--dim", type=int, help="Fock cutoff override")
        if name == "discrim-curve":
            sp.add_argument("--mc-shots", dest="mc_shots", type=int, help="add a sampled homodyne column")
        if name == "wigner":
            sp.add_argument("--state", choices=WIGNER_STATES)
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--n-mean", dest="n_mean", type=float)
            g.add_argument("--alpha", type=float)
            sp.add_argument("--half-width", dest="half_width", type=float)
            sp.add_argument("--diff", action="store_true", help="also write W_state - W_coherent")
            # grid points for the wigner command are per axis
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "wigner" and args.points is not None:
            args.points, wpoints = None, args.points
        else:
            wpoints = None
        cfg = resolve_config(args)
        if wpoints is not None:
            cfg.wigner["points"] = wpoints
            cfg.validate()
        result = COMMANDS[args.command](cfg)
        if args.command == "wigner":
            sys.stdout.write(json.dumps(result, indent=1, sort_keys=True) + "\n")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
