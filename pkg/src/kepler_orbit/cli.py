"""Command-line front end: ``kok <subcommand> [options]``.

Subcommands
-----------
simulate   integrate one orbit, write the trajectory, summarize invariants
brackets   check every Poisson relation at random points (JSON report)
transform  map phase-space rows between the standard and regularized charts
symmetry   group-action property suite (JSON report)
actions    closed-form vs quadrature actions (JSON report)

Exit codes
----------
0 success; 1 bad configuration; 2 singularity or integration abort;
3 a checked relation failed (the report is still written);
4 some input rows could not be transformed (listed on stderr).

Settings come from flags, then from ``--config FILE`` (flat ``key = value``
lines), then from built-in defaults.  ``KOK_TOLERANCE_SCALE`` multiplies
every pass/fail tolerance.
"""

import argparse
import contextlib
import sys
from dataclasses import dataclass, fields

import numpy as np

from .action_angle import compose_cartesian, inverse_cartesian
from .audits import actions_audit, bracket_audit, random_phase_point, symmetry_audit, tolerance_scale
from .dynamics import CHARTS, KeplerParams, hamiltonian_H, hamiltonian_standard_kepler, integrate, invariant_report
from .exceptions import KeplerOrbitError
from .integrators import INTEGRATORS
from .orbit_core import PhasePoint
from .serialization import STATE_COLUMNS, ConfigError, dumps_json, parse_config, read_state_rows, write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SINGULARITY = 2
EXIT_RELATION = 3
EXIT_DEGENERATE = 4

SUBCOMMANDS = ("simulate", "brackets", "transform", "symmetry", "actions")
FORMATS = ("csv", "json")
FLOWS = ("H", "kepler")
TRANSFORM_COLUMNS = STATE_COLUMNS + ("H", "kepler_energy", "residual", "status")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    chart: str = "regularized"
    flow: str = "H"
    x: tuple = (1.0, 0.0, 0.0)
    p: tuple = (0.0, 1.0, 0.0)
    m: float = 1.0
    k: float = 1.0
    dt: float = 1e-3
    t_end: float = 1.0
    integrator: str = "midpoint"
    seed: int = 0
    n_points: int = 100
    input: str = None
    output: str = None
    format: str = None
    perturb: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.chart not in CHARTS:
            raise ConfigError(f"chart must be one of {CHARTS}, got {self.chart!r}")
        if self.flow not in FLOWS:
            raise ConfigError(f"flow must be one of {FLOWS}, got {self.flow!r}")
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.t_end >= 0.0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.n_points < 0:
            raise ConfigError(f"n_points must be >= 0, got {self.n_points}")
        if len(self.x) != 3 or len(self.p) != 3:
            raise ConfigError("x and p need three components each")
        try:
            KeplerParams(self.m, self.k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def params(self):
        return KeplerParams(self.m, self.k)

    def output_format(self, default):
        return self.format or default


def _vector(text):
    try:
        vals = tuple(float(v) for v in str(text).replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None
    return vals


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_CONVERTERS = {
    "x": _vector,
    "p": _vector,
    "m": float,
    "k": float,
    "dt": float,
    "t_end": float,
    "seed": int,
    "n_points": int,
    "perturb": _bool,
}


def _convert(key, value):
    conv = _CONVERTERS.get(key, str)
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def build_config(args):
    """Merge flags over the config file over defaults into a :class:`RunConfig`."""
    known = {f.name for f in fields(RunConfig)} - {"subcommand"}
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_values = parse_config(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        unknown = sorted(set(file_values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        values.update({key: _convert(key, v) for key, v in file_values.items()})
    for key in known:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag)
    return RunConfig(subcommand=args.subcommand, **values)


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="kok", description="Kepler dynamics on the SO(4,2) orbit.")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags take precedence")
    common.add_argument("--chart", choices=CHARTS, default=None)
    common.add_argument("--m", type=float, default=None, help="mass (default 1)")
    common.add_argument("--k", type=float, default=None, help="coupling (default 1)")
    common.add_argument("--dt", type=float, default=None, help="step size (default 1e-3)")
    common.add_argument("--t-end", dest="t_end", type=float, default=None, help="final time (default 1)")
    common.add_argument("--integrator", choices=INTEGRATORS, default=None)
    common.add_argument("--flow", choices=FLOWS, default=None, help="regularized-chart flow: H or the Kepler energy")
    common.add_argument("--x", default=None, help="initial position, e.g. 1,0,0")
    common.add_argument("--p", default=None, help="initial momentum, e.g. 0,1,0")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--n-points", dest="n_points", type=int, default=None)
    common.add_argument("--input", default=None, help="CSV of phase-space rows ('-' for stdin)")
    common.add_argument("--output", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--perturb", action="store_const", const=True, default=None, help="test hook: flip the sign of every expected bracket")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "simulate": "integrate one orbit",
        "brackets": "verify the Poisson relations",
        "transform": "map rows between charts",
        "symmetry": "group-action property suite",
        "actions": "closed-form vs quadrature actions",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


@contextlib.contextmanager
def _open_output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _read_input(path):
    if path in (None, "-"):
        return read_state_rows(sys.stdin)
    try:
        with open(path, newline="") as fh:
            return read_state_rows(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read input: {exc}") from None


def _note(msg):
    print(msg, file=sys.stderr)


# -- subcommands ----------------------------------------------------------------------


def _initial_state(cfg):
    if cfg.input is not None:
        rows = _read_input(cfg.input)
        if rows.shape[0] == 0:
            raise ConfigError("input file holds no initial state")
        return PhasePoint.from_state(rows[0])
    return PhasePoint(cfg.x, cfg.p)


def cmd_simulate(cfg):
    q0 = _initial_state(cfg)
    name = "standard" if cfg.chart == "standard" else cfg.flow
    try:
        traj = integrate(name, q0, cfg.t_end, cfg.dt, cfg.integrator, cfg.params)
    except KeplerOrbitError as exc:
        _note(f"singularity: {type(exc).__name__}: {exc}")
        return EXIT_SINGULARITY
    report = invariant_report(traj, cfg.params)
    with _open_output(cfg.output) as out:
        if cfg.output_format("csv") == "csv":
            write_csv(out, ("t",) + STATE_COLUMNS, traj.to_rows())
        else:
            out.write(dumps_json({"trajectory": traj.to_json(), "invariants": report.to_json()}))
    _note(
        f"{len(traj)} samples, {traj.hamiltonian} flow, {traj.method}: "
        f"energy drift {report.energy_rel_drift:.3e}, L drift {report.L_rel_drift:.3e}, A drift {report.A_rel_drift:.3e}"
    )
    return EXIT_OK


def _write_report(cfg, report, table=None):
    with _open_output(cfg.output) as out:
        if cfg.output_format("json") == "csv" and table is not None:
            write_csv(out, *table)
        else:
            out.write(dumps_json(report))


def cmd_brackets(cfg, scale=1.0):
    report = bracket_audit(cfg.n_points, cfg.seed, cfg.params, cfg.perturb, scale)
    rows = [
        (name, r["max_deviation"], r["max_error_estimate"], r["max_ratio"], str(r["pass"]).lower())
        for name, r in report["relations"].items()
    ]
    _write_report(cfg, report, (("relation", "max_deviation", "max_error_estimate", "max_ratio", "pass"), rows))
    failed = [name for name, r in report["relations"].items() if not r["pass"]]
    if failed:
        _note(f"{len(failed)} relation(s) failed, e.g. {failed[:5]}")
        return EXIT_RELATION
    _note(f"all {len(report['relations'])} relations hold at {cfg.n_points} points")
    return EXIT_OK


def _transform_row(row, chart, params):
    q = PhasePoint.from_state(row)
    if chart == "standard":
        image = compose_cartesian(q, params)
        H, E = hamiltonian_H(image), hamiltonian_standard_kepler(q, params)
    else:
        image = inverse_cartesian(q, params)
        H, E = hamiltonian_H(q), hamiltonian_standard_kepler(image, params)
    return image.state, H, E, abs(H + 2.0 * params.m * params.k**2 / E)


def cmd_transform(cfg):
    """Rows are read in ``cfg.chart`` and written in the other chart."""
    rows = _read_input(cfg.input)
    out_rows, failed = [], []
    for n, row in enumerate(rows):
        try:
            state, H, E, res = _transform_row(row, cfg.chart, cfg.params)
            out_rows.append(list(state) + [H, E, res, "ok"])
        except KeplerOrbitError as exc:
            failed.append({"row": n, "error": type(exc).__name__, "message": str(exc)})
            out_rows.append([float("nan")] * 9 + [type(exc).__name__])
    with _open_output(cfg.output) as out:
        if cfg.output_format("csv") == "csv":
            write_csv(out, TRANSFORM_COLUMNS, out_rows)
        else:
            out.write(dumps_json({"columns": list(TRANSFORM_COLUMNS), "rows": out_rows, "failed_rows": failed}))
    if failed:
        for f in failed:
            _note(f"row {f['row']}: {f['error']}: {f['message']}")
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_symmetry(cfg, scale=1.0):
    report = symmetry_audit(cfg.n_points, cfg.seed, scale)
    _write_report(cfg, report)
    drift = report["adjoint_norm_drift"]
    _note(f"adjoint norm drift: paper {drift['paper']:.3e}, conformal {drift['conformal']:.3e}")
    if not report["all_pass"]:
        _note("failed: " + ", ".join(n for n, c in report["checks"].items() if not c["pass"]))
        return EXIT_RELATION
    return EXIT_OK


def cmd_actions(cfg, scale=1.0):
    if cfg.input is not None:
        points = [PhasePoint.from_state(r) for r in _read_input(cfg.input)]
    else:
        rng = np.random.default_rng(cfg.seed)
        points = [random_phase_point(rng) for _ in range(cfg.n_points)]
    report = actions_audit(points, scale)
    _write_report(cfg, report)
    _note(f"max |closed form - quadrature| = {report['max_difference']:.3e} over {report['n_points']} points")
    return EXIT_OK if report["all_pass"] else EXIT_RELATION


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        scale = tolerance_scale()
    except ValueError as exc:
        _note(f"configuration error: {exc}")
        return EXIT_CONFIG
    try:
        if cfg.subcommand == "simulate":
            return cmd_simulate(cfg)
        if cfg.subcommand == "transform":
            return cmd_transform(cfg)
        handler = {"brackets": cmd_brackets, "symmetry": cmd_symmetry, "actions": cmd_actions}[cfg.subcommand]
        return handler(cfg, scale)
    except ConfigError as exc:
        _note(f"configuration error: {exc}")
        return EXIT_CONFIG


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
