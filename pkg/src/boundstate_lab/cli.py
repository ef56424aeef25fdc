"""Command-line front end.

Six subcommands over one flag vocabulary:

* ``solve``     -- one shot; trajectory CSV plus portrait JSON.
* ``classify``  -- one shot; class tag with its witness.
* ``ladder``    -- jump-amplitude brackets for a k range.
* ``sweep``     -- classify a whole alpha grid; tabular output.
* ``verify``    -- qualitative check suite; report JSON plus a table.
* ``export``    -- trajectory CSV with optional functional columns.

Exit codes: 0 success, 1 usage or parameter error, 2 integration failure,
3 output I/O failure, 4 verification failure (report still written).

Flags override config-file entries (same keys, flat ``key=value`` lines);
built-in defaults fill the rest.  Every artifact embeds the fully
resolved configuration.  The only environment variable honored is
BOUNDSTATE_LAB_OUTDIR, the directory for relative output paths.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields as dc_fields
from typing import Any, Callable, Sequence

import numpy as np

from . import io as artio
from .classify import (
    INDETERMINATE,
    BracketNotFound,
    MonotonicityViolation,
    SolutionClass,
    classify,
    find_alpha_k,
)
from .field import FieldParams, ParameterError, critical_amplitudes
from .functionals import AuxSample, eval_aux
from .integrate import (
    FULL_RANGE_POLICY,
    STEP_LIMIT,
    STEP_UNDERFLOW,
    DenseRangeError,
    IntegrationError,
    IntegratorControls,
    ProblemParams,
    integrate,
)
from .portrait import (
    AmbiguousEvent,
    IndeterminateCount,
    InterlacingViolation,
    detect_events,
    find_zeros,
)
from .verify import (
    CHECK_IDS,
    PRESETS,
    MalformedPlan,
    VerificationPlan,
    default_cases,
    run_checks,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRATOR = 2
EXIT_IO = 3
EXIT_VERIFY = 4

OUTDIR_ENV = "BOUNDSTATE_LAB_OUTDIR"

_TOL_LO = 1e-15
_TOL_HI = 1e-3

_GAVE_UP = (STEP_LIMIT, STEP_UNDERFLOW)

_AUX_COLUMNS = tuple(f.name for f in dc_fields(AuxSample) if f.name != "r")


class UsageError(ValueError):
    """Bad flags, bad config entries, or an unusable flag combination."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; 2 means integration failure
    # here, so turn parse errors into the usage exit instead.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _parse_float_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition("..")
    if not sep:
        value = float(text)
        return (value, value)
    return (float(lo), float(hi))


def _parse_int_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        value = int(text)
        return (value, value)
    return (int(lo), int(hi))


def _parse_name_list(text: str) -> tuple[str, ...]:
    return tuple(name.strip() for name in text.split(",") if name.strip())


COMMANDS = ("solve", "classify", "ladder", "sweep", "verify", "export")

# config-file key -> converter to the typed value the flag would carry
_CONVERTERS: dict[str, Callable[[str], Any]] = {
    "n": int,
    "p": float,
    "alpha": float,
    "alpha_range": _parse_float_range,
    "k": _parse_int_range,
    "points": int,
    "tol": float,
    "rmax": float,
    "abs_tol": float,
    "rel_tol": float,
    "out": str,
    "format": str,
    "preset": str,
    "checks": _parse_name_list,
    "functionals": _parse_name_list,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="boundstate-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="|".join(COMMANDS))
    for name in COMMANDS:
        cmd = sub.add_parser(name, add_help=True)
        cmd.add_argument("--config", type=str, default=None,
                         help="flat key=value file; flags override it")
        cmd.add_argument("--n", type=int, default=None, help="space dimension")
        cmd.add_argument("--p", type=float, default=None, help="nonlinearity exponent")
        cmd.add_argument("--alpha", type=float, default=None, help="shooting height")
        cmd.add_argument("--alpha-range", dest="alpha_range",
                         type=_parse_float_range, default=None,
                         metavar="LO..HI", help="alpha grid range")
        cmd.add_argument("--k", type=_parse_int_range, default=None,
                         metavar="K|LO..HI", help="node count or count range")
        cmd.add_argument("--points", type=int, default=None,
                         help="grid size for sweep (default 200)")
        cmd.add_argument("--tol", type=float, default=None,
                         help="bracket tolerance (relative)")
        cmd.add_argument("--rmax", type=float, default=None, help="integration range")
        cmd.add_argument("--abs-tol", dest="abs_tol", type=float, default=None,
                         help="integrator absolute tolerance")
        cmd.add_argument("--rel-tol", dest="rel_tol", type=float, default=None,
                         help="integrator relative tolerance")
        cmd.add_argument("--out", type=str, default=None,
                         help="output path stem (suffixes appended per artifact)")
        cmd.add_argument("--format", type=str, default=None,
                         choices=("json", "csv"), help="tabular artifact format")
        cmd.add_argument("--preset", type=str, default=None,
                         help="verify: check preset (core|residual|full)")
        cmd.add_argument("--checks", type=_parse_name_list, default=None,
                         help="verify: explicit comma-separated check ids")
        cmd.add_argument("--functionals", type=_parse_name_list, default=None,
                         help="export: extra functional columns")
    return parser


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved invocation (defaults applied)."""

    command: str
    n: int
    p: float
    alpha: float | None
    alpha_range: tuple[float, float] | None
    k_range: tuple[int, int] | None
    points: int
    tol: float
    rmax: float
    abs_tol: float
    rel_tol: float
    out: str | None
    format: str
    preset: str
    checks: tuple[str, ...] | None
    functionals: tuple[str, ...]

    def validate(self) -> None:
        for label, value in (("tol", self.tol), ("abs-tol", self.abs_tol),
                             ("rel-tol", self.rel_tol)):
            if not (_TOL_LO <= value <= _TOL_HI):
                raise UsageError(
                    f"--{label} must lie in [{_TOL_LO:g}, {_TOL_HI:g}], got {value:g}"
                )
        if not (self.rmax > 0.0 and math.isfinite(self.rmax)):
            raise UsageError(f"--rmax must be positive and finite, got {self.rmax}")
        if self.points < 1:
            raise UsageError(f"--points must be at least 1, got {self.points}")
        if self.alpha_range is not None and self.alpha_range[0] > self.alpha_range[1]:
            raise UsageError(f"empty alpha range {self.alpha_range[0]:g}..{self.alpha_range[1]:g}")
        if self.k_range is not None:
            if self.k_range[0] > self.k_range[1]:
                raise UsageError(f"empty k range {self.k_range[0]}..{self.k_range[1]}")
            if self.k_range[0] < 0:
                raise UsageError("node counts are nonnegative")
        if self.command == "verify" and self.preset not in PRESETS:
            raise UsageError(
                f"unknown preset {self.preset!r}; choose from {', '.join(sorted(PRESETS))}"
            )
        for name in self.functionals:
            if name not in _AUX_COLUMNS:
                raise UsageError(
                    f"unknown functional {name!r}; choose from {', '.join(_AUX_COLUMNS)}"
                )

    def field(self) -> FieldParams:
        return FieldParams(n=self.n, p=self.p)

    def controls(self) -> IntegratorControls:
        return IntegratorControls(abs_tol=self.abs_tol, rel_tol=self.rel_tol,
                                  r_max=self.rmax)

    def need_alpha(self) -> float:
        if self.alpha is None:
            raise UsageError(f"{self.command} needs --alpha")
        return self.alpha

    def need_k_range(self) -> tuple[int, int]:
        if self.k_range is None:
            raise UsageError(f"{self.command} needs --k (a count or LO..HI)")
        return self.k_range

    def echo(self) -> dict[str, Any]:
        """The resolved configuration embedded in every artifact."""
        out: dict[str, Any] = {
            "command": self.command,
            "n": self.n,
            "p": self.p,
            "rmax": self.rmax,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "format": self.format,
            "out": _out_stem(self),
        }
        if self.command in ("solve", "classify", "export"):
            out["alpha"] = self.alpha
        if self.command == "export":
            out["functionals"] = ",".join(self.functionals)
        if self.command == "ladder":
            out["k"] = f"{self.k_range[0]}..{self.k_range[1]}" if self.k_range else ""
            out["tol"] = self.tol
        if self.command == "sweep":
            if self.alpha_range is not None:
                out["alpha_range"] = f"{self.alpha_range[0]:.17g}..{self.alpha_range[1]:.17g}"
                out["points"] = self.points
            else:
                out["alpha"] = self.alpha
        if self.command == "verify":
            out["preset"] = self.preset
            out["checks"] = ",".join(self.checks) if self.checks is not None else ""
            out["tol"] = self.tol
        return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over config-file entries over defaults."""
    if not args.command:
        raise UsageError("missing command; choose from " + ", ".join(COMMANDS))
    file_cfg: dict[str, str] = {}
    if args.config is not None:
        try:
            file_cfg = artio.parse_config_file(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
    for key in file_cfg:
        if key not in _CONVERTERS and key != "command":
            raise UsageError(f"unknown config key {key!r}")
    if file_cfg.get("command", args.command) != args.command:
        raise UsageError(
            f"config file names command {file_cfg['command']!r}, invoked {args.command!r}"
        )

    def pick(name: str, default: Any) -> Any:
        flag = getattr(args, name)
        if flag is not None:
            return flag
        if name in file_cfg:
            try:
                return _CONVERTERS[name](file_cfg[name])
            except ValueError as exc:
                raise UsageError(f"config key {name}: {exc}") from exc
        return default

    defaults = IntegratorControls()
    cfg = RunConfig(
        command=args.command,
        n=pick("n", 3),
        p=pick("p", 3.0),
        alpha=pick("alpha", None),
        alpha_range=pick("alpha_range", None),
        k_range=pick("k", None),
        points=pick("points", 200),
        tol=pick("tol", 1e-10),
        rmax=pick("rmax", defaults.r_max),
        abs_tol=pick("abs_tol", defaults.abs_tol),
        rel_tol=pick("rel_tol", defaults.rel_tol),
        out=pick("out", None),
        format=pick("format", "csv" if args.command in ("export", "sweep") else "json"),
        preset=pick("preset", "core"),
        checks=pick("checks", None),
        functionals=pick("functionals", ()),
    )
    cfg.validate()
    return cfg


_DEFAULT_STEMS = {
    "solve": "solve",
    "classify": "classify",
    "ladder": "ladder",
    "sweep": "sweep",
    "verify": "verify_report",
    "export": "export",
}


def _out_stem(cfg: RunConfig) -> str:
    stem = cfg.out if cfg.out is not None else _DEFAULT_STEMS[cfg.command]
    outdir = os.environ.get(OUTDIR_ENV, "")
    if outdir:
        return os.path.join(outdir, stem)
    return stem


def _note(text: str) -> None:
    print(text, file=sys.stderr)


def _write_artifacts(paths_text: Sequence[tuple[str, str]]) -> None:
    for path, text in paths_text:
        artio.write_text(path, text)
        _note(f"wrote {path}")


def _tabular(cfg: RunConfig, stem: str, columns: Sequence[str],
             rows: Sequence[Sequence[Any]], body_key: str) -> tuple[str, str]:
    """(path, text) for one table in the configured format."""
    if cfg.format == "csv":
        return stem + ".csv", artio.csv_text(columns, rows, cfg.echo())
    payload = artio.artifact(
        {body_key: [dict(zip(columns, row)) for row in rows]}, cfg.echo()
    )
    return stem + ".json", artio.json_text(payload)


def cmd_solve(cfg: RunConfig) -> int:
    field = cfg.field()
    traj = integrate(ProblemParams(field, cfg.need_alpha(), cfg.controls()),
                     FULL_RANGE_POLICY)
    if traj.termination.tag in _GAVE_UP:
        _note(f"integration gave up: {traj.termination.tag} at r={traj.termination.r_stop:g} "
              f"{traj.termination.detail}")
        return EXIT_INTEGRATOR
    portrait = detect_events(traj, critical_amplitudes(field))
    _note(f"terminated {traj.termination.tag} at r={traj.termination.r_stop:.6g}; "
          f"{len(traj.knots)} samples, {len(portrait.zeros_u)} zeros, "
          f"phase kind {portrait.phase_kind}")
    stem = _out_stem(cfg)
    payload = artio.artifact(
        {
            "alpha": cfg.alpha,
            "termination": artio.termination_to_dict(traj),
            "portrait": artio.portrait_to_dict(portrait),
        },
        cfg.echo(),
    )
    _write_artifacts([
        (stem + ".csv", artio.trajectory_csv(traj, cfg.echo())),
        (stem + ".portrait.json", artio.json_text(payload)),
    ])
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    result = classify(cfg.field(), cfg.need_alpha(), cfg.controls())
    _note(f"alpha={cfg.alpha:g}: {result.tag} ({result.detail})")
    stem = _out_stem(cfg)
    if cfg.format == "csv":
        rows = [_class_row(cfg.alpha, result)]
        path, text = stem + ".csv", artio.csv_text(_CLASS_COLUMNS, rows, cfg.echo())
    else:
        payload = artio.artifact({"result": artio.solution_class_to_dict(result)},
                                 cfg.echo())
        path, text = stem + ".json", artio.json_text(payload)
    _write_artifacts([(path, text)])
    return EXIT_OK


_CLASS_COLUMNS = ("alpha", "class_tag", "node_count", "oscillation_center",
                  "r_stop", "termination_tag", "E_negative_radius",
                  "decay_slope_error")


def _class_row(alpha: float, sc: SolutionClass) -> tuple:
    w = sc.witness
    return (alpha, sc.tag, sc.node_count, sc.oscillation_center, w.r_stop,
            w.termination_tag, w.energy_nonpositive_radius, w.decay_slope_error)


def cmd_ladder(cfg: RunConfig) -> int:
    field = cfg.field()
    k_lo, k_hi = cfg.need_k_range()
    controls = cfg.controls()
    entries: list[dict[str, Any]] = []
    ok = 0
    for k in range(k_lo, k_hi + 1):
        try:
            entry = find_alpha_k(field, k, tol=cfg.tol, controls=controls)
        except (BracketNotFound, MonotonicityViolation, IndeterminateCount) as exc:
            entries.append({"k": k, "status": "failed", "error": str(exc)})
            _note(f"k={k}: failed ({exc})")
            continue
        ok += 1
        entries.append({
            "k": k,
            "status": "ok",
            "alpha_lo": entry.alpha_lo,
            "alpha_hi": entry.alpha_hi,
            "nodes_lo": entry.nodes_lo,
            "nodes_hi": entry.nodes_hi,
            "midpoint": entry.midpoint,
            "width": entry.width,
        })
        _note(f"k={k}: [{entry.alpha_lo:.12g}, {entry.alpha_hi:.12g}]")
    stem = _out_stem(cfg)
    if cfg.format == "csv":
        columns = ("k", "status", "alpha_lo", "alpha_hi", "nodes_lo", "nodes_hi",
                   "midpoint", "width")
        rows = [tuple(e.get(c) for c in columns) for e in entries]
        files = [(stem + ".csv", artio.csv_text(columns, rows, cfg.echo()))]
    else:
        payload = artio.artifact({"entries": entries, "succeeded": ok}, cfg.echo())
        files = [(stem + ".json", artio.json_text(payload))]
    _write_artifacts(files)
    return EXIT_OK if ok > 0 else EXIT_INTEGRATOR


def _sweep_grid(cfg: RunConfig) -> list[float]:
    if cfg.alpha_range is not None:
        lo, hi = cfg.alpha_range
        if lo == hi:
            return [lo]
        return [float(a) for a in np.linspace(lo, hi, cfg.points)]
    return [cfg.need_alpha()]


def cmd_sweep(cfg: RunConfig) -> int:
    field = cfg.field()
    controls = cfg.controls()
    rows: list[tuple] = []
    warnings = 0
    counts: list[tuple[float, int]] = []
    for alpha in _sweep_grid(cfg):
        sc = classify(field, alpha, controls)
        z_1: float | None = None
        if sc.node_count is not None and sc.node_count > 0:
            traj = integrate(ProblemParams(field, alpha, controls), FULL_RANGE_POLICY)
            zeros = find_zeros(traj, "u")
            z_1 = zeros[0] if zeros else None
        if sc.tag == INDETERMINATE:
            warnings += 1
        else:
            if sc.node_count is not None:
                counts.append((alpha, sc.node_count))
        rows.append((alpha, sc.node_count, sc.tag, z_1,
                     sc.witness.energy_nonpositive_radius))
    for (a_prev, c_prev), (a_cur, c_cur) in zip(counts, counts[1:]):
        if c_cur < c_prev:
            _note(f"node count fell from {c_prev} to {c_cur} between "
                  f"alpha={a_prev:.12g} and alpha={a_cur:.12g}")
            return EXIT_INTEGRATOR
    if warnings:
        _note(f"warning: {warnings} indeterminate grid point(s)")
    _write_artifacts([_tabular(cfg, _out_stem(cfg), artio.SWEEP_COLUMNS, rows, "rows")])
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    field = cfg.field()
    checks = cfg.checks if cfg.checks is not None else PRESETS[cfg.preset]
    plan = VerificationPlan(
        cases=default_cases(field, cfg.preset),
        checks=tuple(checks),
        controls=cfg.controls(),
        bracket_tol=cfg.tol,
    )
    report = run_checks(plan)
    payload = artio.artifact(artio.verification_body(report), cfg.echo())
    _write_artifacts([(_out_stem(cfg) + ".json", artio.json_text(payload))])
    sys.stdout.write(artio.verification_table(report))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_export(cfg: RunConfig) -> int:
    field = cfg.field()
    traj = integrate(ProblemParams(field, cfg.need_alpha(), cfg.controls()),
                     FULL_RANGE_POLICY)
    if traj.termination.tag in _GAVE_UP:
        _note(f"integration gave up: {traj.termination.tag} at r={traj.termination.r_stop:g} "
              f"{traj.termination.detail}")
        return EXIT_INTEGRATOR
    columns = list(artio.TRAJECTORY_COLUMNS) + list(cfg.functionals)
    rows = []
    for state in traj.samples():
        row = [state.r, state.u, state.up, state.v, state.vp]
        if cfg.functionals:
            aux = eval_aux(state, field)
            row.extend(getattr(aux, name) for name in cfg.functionals)
        rows.append(tuple(row))
    _write_artifacts([_tabular(cfg, _out_stem(cfg), columns, rows, "rows")])
    return EXIT_OK


_DISPATCH: dict[str, Callable[[RunConfig], int]] = {
    "solve": cmd_solve,
    "classify": cmd_classify,
    "ladder": cmd_ladder,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _note(f"usage error: {exc}")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return _DISPATCH[cfg.command](cfg)
    except (UsageError, MalformedPlan, ParameterError, artio.ConfigSyntaxError) as exc:
        _note(f"usage error: {exc}")
        return EXIT_USAGE
    except (BracketNotFound, MonotonicityViolation, InterlacingViolation,
            AmbiguousEvent, IndeterminateCount, IntegrationError,
            DenseRangeError) as exc:
        _note(f"integration failure: {exc}")
        return EXIT_INTEGRATOR
    except OSError as exc:
        _note(f"i/o failure: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
