"""Command-line interface: one subcommand per numerical claim.

Every run writes a table (CSV or JSON lines) whose header records the full
configuration, so identical invocations produce byte-identical output.

Exit codes: 0 claim witnessed, 2 usage error, 3 inconclusive at tolerance,
4 numerical budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import BudgetExceededError, DomainError
from .euler_lagrange import criticality_residual, moments
from .exponents import (Signature, admissible_range, critical_exponent, critical_exponent_bisection,
                        kappa, strichartz_q)
from .extremizer_search import SliceConfig, ascend, lambda_functional
from .gaussian_extension import gaussian_grid, gaussian_strichartz_norm, gaussian_strichartz_norm_grid
from .grid import GridFunction, write_gridfunction
from .saddle_kernel import (gaussian_tensor, inner4, k1_divergence_table, k_apply_line_integral,
                            k_pairing, kernel_check_points, kg_closed, kg_l2_divergence_table,
                            pairing_grid, smooth_test_function, symmetric_decompose)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
EXIT_BUDGET = 4

KERNEL_TOL = 1e-4
SYMMETRY_TOL = 1e-6
NORM_TOLS = {"reduced-1d": 1e-10, "grid-3d": 1e-2, "pairing-4d": 2e-2}

# Per-command defaults for the options whose natural value depends on the task.
GRID_DEFAULTS = {"search": (64, 6.0), "norm": (24, 2.0), "symmetry": (16, 2.0)}


@dataclass
class RunConfig:
    """All tunables of a run.  ``None`` means the command-specific default."""

    command: str
    d: int = 3
    d_plus: int = 1
    d_minus: int = 1
    p: float = 2.0
    kmax: int = 5
    tol_abs: float = 1e-12
    tol_rel: float = 1e-10
    samples: Tuple[Tuple[float, float], ...] = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
    check: Optional[str] = None
    grid_n: Optional[int] = None
    grid_box: Optional[float] = None
    cutoff_b: float = 12.0
    cutoff_y: float = 10.0
    t_max: float = 0.5
    t_slices: int = 65
    iters: int = 200
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"
    save_f: Optional[str] = None

    @property
    def signature(self) -> Signature:
        return Signature(self.d_plus, self.d_minus)

    @property
    def tol(self) -> Tuple[float, float]:
        return (self.tol_abs, self.tol_rel)

    def grid(self, key: str) -> Tuple[int, float]:
        n, box = GRID_DEFAULTS[key]
        return (self.grid_n or n, self.grid_box or box)

    def validate(self) -> None:
        if self.tol_abs < 0 or self.tol_rel < 0 or (self.tol_abs == 0 and self.tol_rel == 0):
            raise DomainError("tolerances must be non-negative and not both zero")
        if self.grid_n is not None and self.grid_n < 3:
            raise DomainError("grid needs at least 3 points per axis")
        if self.grid_box is not None and not self.grid_box > 0:
            raise DomainError("grid box half-width must be positive")
        if self.cutoff_b <= 0:
            raise DomainError("cutoff B must be positive")
        if self.cutoff_y <= 1:
            raise DomainError("cutoff Y must exceed 1")
        if self.kmax < 1:
            raise DomainError("kmax must be >= 1")
        if self.iters < 0:
            raise DomainError("iteration count must be >= 0")
        if self.command in ("moments", "residual"):
            sig = self.signature  # rejects paraboloids
            lo, hi = admissible_range(sig.d)
            if not lo < self.p < hi:
                raise DomainError(f"p = {self.p} outside the admissible range ({lo}, {hi:g}) for d = {sig.d}")
        if self.command == "search":
            SliceConfig(self.t_max, self.t_slices)

    def header(self) -> Dict:
        cfg = asdict(self)
        cfg["samples"] = [list(s) for s in self.samples]
        cfg["version"] = __version__
        return cfg


@dataclass
class Report:
    rows: List[Dict]
    summary: Dict
    exit_code: int = EXIT_OK
    columns: Optional[List[str]] = None


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def render(report: Report, config: RunConfig) -> str:
    header = config.header()
    if config.format == "jsonl":
        lines = [json.dumps({"config": header}, sort_keys=True)]
        lines += [json.dumps({k: _jsonable(v) for k, v in row.items()}, sort_keys=True)
                  for row in report.rows]
        lines.append(json.dumps({"summary": {k: _jsonable(v) for k, v in report.summary.items()}},
                                sort_keys=True))
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    buf.write("# config " + json.dumps(header, sort_keys=True) + "\n")
    columns = report.columns or (list(report.rows[0]) if report.rows else [])
    writer = csv.writer(buf, lineterminator="\n")
    if columns:
        writer.writerow(columns)
        for row in report.rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
    for key, value in report.summary.items():
        buf.write(f"# {key} = {_fmt(value)}\n")
    return buf.getvalue()


# -- commands -------------------------------------------------------------------

def cmd_critical_exponent(cfg: RunConfig) -> Report:
    d = cfg.d
    pd = critical_exponent(d)
    pb = critical_exponent_bisection(d)
    lo, hi = admissible_range(d)
    row = {"d": d, "p_d": pd, "q_d": strichartz_q(pd, d), "kappa_d": kappa(d),
           "p_bisection": pb, "residual": abs(pd - pb), "in_range": lo < pd < hi}
    return Report([row], {"residual_below_1e-12": abs(pd - pb) < 1e-12})


def cmd_moments(cfg: RunConfig) -> Report:
    reports = moments(cfg.kmax, cfg.p, cfg.signature, tol=cfg.tol)
    rows = [{"k": r.k, "re": r.value.real, "im": r.value.imag, "abs_error": r.abs_error,
             "nonzero": r.nonzero_at_tolerance} for r in reports]
    witnessed = any(r.nonzero_at_tolerance for r in reports)
    first = next((r.k for r in reports if r.nonzero_at_tolerance), None)
    return Report(rows, {"witnessed": witnessed, "first_nonzero_k": first},
                  EXIT_OK if witnessed else EXIT_INCONCLUSIVE)


def cmd_residual(cfg: RunConfig) -> Report:
    rep = criticality_residual(cfg.p, cfg.signature, cfg.samples, tol=cfg.tol, k_max=cfg.kmax)
    origin = rep.values[0]
    rows = [{"r_plus": a, "r_minus": b, "re": v.real, "im": v.imag,
             "deviation": abs(v - origin) / abs(origin)}
            for (a, b), v in zip(rep.sample_points, rep.values)]
    summary = {"lambda_re": rep.lambda_estimate.real, "lambda_im": rep.lambda_estimate.imag,
               "residual": rep.residual, "combined_error": rep.combined_error,
               "witness_k": rep.witness_k, "witnessed": rep.witnessed}
    return Report(rows, summary, EXIT_OK if rep.witnessed else EXIT_INCONCLUSIVE)


def _saddle_kernel(cfg: RunConfig) -> Report:
    rows = []
    for pt in kernel_check_points(cfg.seed):
        eta, nu = pt[:2], pt[2:]
        closed = kg_closed(eta, nu)
        line = k_apply_line_integral(gaussian_tensor, eta, nu, cfg.cutoff_b).real
        rows.append({"eta1": pt[0], "eta2": pt[1], "nu1": pt[2], "nu2": pt[3],
                     "closed_form": closed, "line_integral": line,
                     "rel_error": abs(line - closed) / abs(closed)})
    worst = max(r["rel_error"] for r in rows)
    return Report(rows, {"max_rel_error": worst, "tolerance": KERNEL_TOL, "witnessed": worst <= KERNEL_TOL},
                  EXIT_OK if worst <= KERNEL_TOL else EXIT_INCONCLUSIVE)


def _saddle_divergence(cfg: RunConfig) -> Report:
    b_cut = [cfg.cutoff_b * 2**j for j in range(4)]
    y_cut = [cfg.cutoff_y * 2**j for j in range(4)]
    tables = {"truncated_k1": k1_divergence_table(cutoffs=b_cut),
              "truncated_kg_l2": kg_l2_divergence_table(cutoffs=y_cut)}
    rows, summary, ok = [], {}, True
    for name, table in tables.items():
        for r in table.rows():
            rows.append({"quantity": name, **r})
        diverging = table.increasing and table.mean_slope > 0
        summary[f"{name}_mean_slope"] = table.mean_slope
        summary[f"{name}_slope_dispersion"] = table.relative_dispersion
        summary[f"{name}_increasing"] = diverging
        ok &= diverging and table.relative_dispersion <= 0.1
    summary["witnessed"] = ok
    return Report(rows, summary, EXIT_OK if ok else EXIT_INCONCLUSIVE,
                  columns=["quantity", "cutoff", "value", "log_slope"])


def _saddle_symmetry(cfg: RunConfig) -> Report:
    n, box = cfg.grid("symmetry")
    rows = []
    for j in range(3):
        F = smooth_test_function(cfg.seed + j, n, box)
        F1, F2 = symmetric_decompose(F)
        full = k_pairing(F, cfg.cutoff_b)
        sym = k_pairing(F1, cfg.cutoff_b)
        anti = k_pairing(F2, cfg.cutoff_b)
        norms = math.sqrt(abs(inner4(F1, F1)) * abs(inner4(F2, F2)))
        rows.append({"seed": cfg.seed + j, "pairing_F": full, "pairing_F1": sym, "pairing_F2": anti,
                     "rel_difference": abs(full - sym) / abs(full),
                     "orthogonality": abs(inner4(F1, F2)) / norms})
    worst = max(r["rel_difference"] for r in rows)
    return Report(rows, {"max_rel_difference": worst, "tolerance": SYMMETRY_TOL,
                         "witnessed": worst <= SYMMETRY_TOL},
                  EXIT_OK if worst <= SYMMETRY_TOL else EXIT_INCONCLUSIVE)


def _saddle_norm(cfg: RunConfig) -> Report:
    target = 4 * math.pi**4
    n, box = cfg.grid("norm")
    F = GridFunction.from_callable(gaussian_tensor, *pairing_grid(n, box))
    values = {"reduced-1d": gaussian_strichartz_norm(2, 4.0),
              "grid-3d": gaussian_strichartz_norm_grid(Signature(1, 1), 4.0),
              "pairing-4d": k_pairing(F, cfg.cutoff_b)}
    rows, ok = [], True
    for route, value in values.items():
        dev = abs(value - target) / target
        ok &= dev <= NORM_TOLS[route]
        rows.append({"route": route, "value": value, "target": target, "rel_deviation": dev,
                     "tolerance": NORM_TOLS[route]})
    return Report(rows, {"witnessed": ok}, EXIT_OK if ok else EXIT_INCONCLUSIVE)


SADDLE_CHECKS = {"kernel": _saddle_kernel, "divergence": _saddle_divergence,
                 "symmetry": _saddle_symmetry, "norm": _saddle_norm}


def cmd_saddle(cfg: RunConfig) -> Report:
    return SADDLE_CHECKS[cfg.check](cfg)


def cmd_search(cfg: RunConfig) -> Report:
    n, box = cfg.grid("search")
    config = SliceConfig(cfg.t_max, cfg.t_slices)
    f0 = gaussian_grid(box, n)
    rep = ascend(f0, max_iters=cfg.iters, config=config)
    rows = [json.loads(line) for line in rep.jsonl().splitlines()]
    if cfg.save_f:
        write_gridfunction(rep.final_f, cfg.save_f)
    summary = {"lambda_gaussian": rep.lambda_initial, "lambda_final": rep.lambda_final,
               "relative_gain": rep.relative_gain, "iterations": rep.iterations,
               "gradient_norm_final": rep.gradient_norm_final, "stop_reason": rep.stop_reason,
               "improved_over_gaussian": rep.improved_over_gaussian}
    return Report(rows, summary, EXIT_OK if rep.improved_over_gaussian else EXIT_INCONCLUSIVE,
                  columns=["iteration", "lambda", "step", "gradient_norm"])


COMMANDS = {"critical-exponent": cmd_critical_exponent, "moments": cmd_moments,
            "residual": cmd_residual, "saddle": cmd_saddle, "search": cmd_search}


# -- argument parsing -----------------------------------------------------------

def _parse_samples(text: str) -> Tuple[Tuple[float, float], ...]:
    try:
        pairs = tuple(tuple(float(v) for v in item.split(":")) for item in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sample list {text!r}; expected r+:r-,r+:r-,...")
    if any(len(pr) != 2 for pr in pairs):
        raise argparse.ArgumentTypeError("each sample is r+:r-")
    return pairs


def build_parser() -> argparse.ArgumentParser:
    defaults = RunConfig(command="")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d-plus", type=int, default=defaults.d_plus)
    common.add_argument("--d-minus", type=int, default=defaults.d_minus)
    common.add_argument("--p", type=float, default=defaults.p)
    common.add_argument("--kmax", type=int, default=defaults.kmax)
    common.add_argument("--tol-abs", type=float, default=defaults.tol_abs)
    common.add_argument("--tol-rel", type=float, default=defaults.tol_rel)
    common.add_argument("--grid-n", type=int, default=None,
                        help="points per axis (search: 64, saddle norm: 24, symmetry: 16)")
    common.add_argument("--grid-box", type=float, default=None,
                        help="box half-width (search: 6, saddle grids: 2)")
    common.add_argument("--cutoff-b", type=float, default=defaults.cutoff_b)
    common.add_argument("--cutoff-y", type=float, default=defaults.cutoff_y)
    common.add_argument("--t-max", type=float, default=defaults.t_max,
                        help="|t| below which slices are taken directly; the rest is pseudo-conformal")
    common.add_argument("--t-slices", type=int, default=defaults.t_slices,
                        help="Simpson slices per field (odd)")
    common.add_argument("--iters", type=int, default=defaults.iters)
    common.add_argument("--seed", type=int, default=defaults.seed)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "jsonl"), default=defaults.format)

    parser = argparse.ArgumentParser(prog="saddle-strichartz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    ce = sub.add_parser("critical-exponent", parents=[common], help="p_d, q_d, kappa_d")
    ce.add_argument("--d", type=int, default=defaults.d)
    sub.add_parser("moments", parents=[common], help="moment sweep k = 1..kmax")
    res = sub.add_parser("residual", parents=[common], help="spread of the normalized EL identity")
    res.add_argument("--samples", type=_parse_samples, default=defaults.samples,
                     help="comma-separated r+:r- pairs")
    sad = sub.add_parser("saddle", parents=[common], help="kernel diagnostics on the saddle")
    sad.add_argument("--check", choices=sorted(SADDLE_CHECKS), required=True)
    se = sub.add_parser("search", parents=[common], help="gradient ascent of Lambda from g")
    se.add_argument("--save-f", default=None, help="write the final f as a gridfunction file")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    return RunConfig(**values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cfg = config_from_args(args)
    try:
        cfg.validate()
        report = COMMANDS[cfg.command](cfg)
    except BudgetExceededError as exc:
        print(f"error: numerical budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, cfg)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
