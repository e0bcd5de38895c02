"""Command-line front end: run / sweep / slice / verify.

Configuration comes from flat key=value files plus mirroring flags; physical
inputs (peV, microseconds) are converted to the internal dimensionless pair
(omega*tau, beta*hbar*omega) here and nowhere else.  Energies in all output
are in units of hbar*omega.

Exit codes: 0 success, 1 configuration error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .cycle import CycleEngine, EngineParams, crosscheck, run_cycle
from .errors import ConfigurationError, InvariantViolation, ValidationError
from .sweep import (
    GridSpec,
    Objective,
    SweepTable,
    grid_sweep,
    locate_extrema,
    slice_profile,
    symmetry_residual,
)
from .verification import run_all_suites

HBAR_EV_S = 6.582119569e-16  # reduced Planck constant, eV*s
DEFAULT_SEED = 20201
SEED_ENV_VAR = "QMETER_SEED"

CSV_HEADER = "alpha,phi,w_ext,q_m,q_t,eta,ds,xi,zeta,delta,gamma"
CSV_FIELDS = CSV_HEADER.split(",")
SLICE_HEADER = "alpha,phi,w_ext,q_m,eta,ds,zeta,delta,gamma,dp3,dp4"
SLICE_FIELDS = SLICE_HEADER.split(",")

BETA_TOKEN = "inverse_hbar_omega"

_CONFIG_KEYS = {
    "hbar_omega_pev": float,
    "tau_us": float,
    "beta": str,
    "alpha_rad": float,
    "phi_rad": float,
    "steps": int,
    "grid.alpha_points": int,
    "grid.phi_points": int,
    "seed": int,
}


@dataclass
class RunConfig:
    hbar_omega_pev: float = 1.0
    tau_us: float = 10.0
    beta: str | float = BETA_TOKEN
    alpha_rad: float | None = None
    phi_rad: float | None = None
    steps: int = 1024
    grid_alpha_points: int = 257
    grid_phi_points: int = 257
    seed: int = DEFAULT_SEED

    def validate(self) -> None:
        if not (math.isfinite(self.hbar_omega_pev) and self.hbar_omega_pev > 0):
            raise ConfigurationError("hbar_omega_pev must be positive")
        if not (math.isfinite(self.tau_us) and self.tau_us > 0):
            raise ConfigurationError("tau must be positive")
        if self.steps < 2:
            raise ConfigurationError("steps must be >= 2")
        if isinstance(self.beta, str) and self.beta != BETA_TOKEN:
            raise ConfigurationError(
                f"beta must be a number (1/peV) or the token {BETA_TOKEN!r}"
            )
        if isinstance(self.beta, float) and not (math.isfinite(self.beta) and self.beta >= 0):
            raise ConfigurationError("beta must be >= 0")

    def omega_tau(self) -> float:
        omega = self.hbar_omega_pev * 1e-12 / HBAR_EV_S  # rad/s
        return omega * self.tau_us * 1e-6

    def beta_hbar_omega(self) -> float:
        if isinstance(self.beta, str):
            return 1.0
        return self.beta * self.hbar_omega_pev

    def engine_params(self, alpha: float = 0.0, phi: float = 0.0) -> EngineParams:
        return EngineParams(
            omega_tau=self.omega_tau(),
            beta_hbar_omega=self.beta_hbar_omega(),
            alpha=alpha,
            phi=phi,
            steps=self.steps,
        )


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Flat key=value lines; '#' starts a comment, blank lines are skipped."""
    values: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
        caster = _CONFIG_KEYS[key]
        try:
            values[key] = caster(value)
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _coerce_beta(raw: object) -> str | float:
    if isinstance(raw, (int, float)):
        return float(raw)
    text = str(raw)
    if text == BETA_TOKEN:
        return text
    try:
        return float(text)
    except ValueError:
        return text  # validate() rejects it with a proper message


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file, then flags; seed falls back to the env var."""
    config = RunConfig()
    seed_given = False
    if args.config:
        for key, value in parse_config_file(args.config).items():
            attr = key.replace("grid.", "grid_")
            setattr(config, attr, _coerce_beta(value) if key == "beta" else value)
            seed_given |= key == "seed"
    for attr in ("hbar_omega_pev", "tau_us", "beta", "alpha_rad", "phi_rad",
                 "steps", "grid_alpha_points", "grid_phi_points", "seed"):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(config, attr, _coerce_beta(value) if attr == "beta" else value)
            seed_given |= attr == "seed"
    if not seed_given:
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            try:
                config.seed = int(env_seed)
            except ValueError:
                raise ConfigurationError(
                    f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}"
                ) from None
    config.validate()
    return config


def fmt(value: float) -> str:
    """17-significant-digit token; NaN serializes as 'nan'."""
    return "%.17g" % value


def _csv_line(values: Iterable[float]) -> str:
    return ",".join(fmt(v) for v in values)


def write_table_csv(table: SweepTable, path: Path) -> None:
    with path.open("w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in table.rows:
            fh.write(_csv_line(float(row[name]) for name in CSV_FIELDS) + "\n")


def write_slice_csv(profile, path: Path) -> None:
    with path.open("w", newline="") as fh:
        fh.write(SLICE_HEADER + "\n")
        for row in profile:
            fh.write(_csv_line(float(row[name]) for name in SLICE_FIELDS) + "\n")


def _record_pairs(record) -> list[tuple[str, str]]:
    report = crosscheck(record)
    pairs = [
        ("alpha", fmt(record.params.alpha)),
        ("phi", fmt(record.params.phi)),
        ("omega_tau", fmt(record.params.omega_tau)),
        ("beta_hbar_omega", fmt(record.params.beta_hbar_omega)),
        ("steps", str(record.params.steps)),
        ("w_ext", fmt(record.w_ext)),
        ("q_m", fmt(record.q_m)),
        ("q_t", fmt(record.q_t)),
        ("eta", "undefined" if not record.eta_defined else fmt(record.eta)),
        ("ds", fmt(record.d_s)),
        ("xi", fmt(record.probs.xi)),
        ("zeta", fmt(record.probs.zeta)),
        ("delta", fmt(record.probs.delta)),
        ("gamma", fmt(record.probs.gamma)),
    ]
    pairs.extend((f"residual_{k}", fmt(v)) for k, v in sorted(report.residuals.items()))
    pairs.append(("residual_max", fmt(report.max_residual)))
    return pairs


def cmd_run(args: argparse.Namespace) -> int:
    config = build_config(args)
    if config.alpha_rad is None or config.phi_rad is None:
        raise ConfigurationError("run requires alpha_rad and phi_rad")
    record = run_cycle(config.engine_params(config.alpha_rad, config.phi_rad))
    for key, value in _record_pairs(record):
        print(f"{key}={value}")
    if args.csv:
        path = Path(args.csv)
        with path.open("w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            fh.write(_csv_line([
                record.params.alpha, record.params.phi, record.w_ext, record.q_m,
                record.q_t, record.eta, record.d_s, record.probs.xi,
                record.probs.zeta, record.probs.delta, record.probs.gamma,
            ]) + "\n")
    return 0


def _parse_objectives(raw: str) -> list[Objective]:
    names = [token.strip() for token in raw.split(",") if token.strip()]
    if not names:
        raise ConfigurationError("no objectives given")
    try:
        return [Objective(name) for name in names]
    except ValueError:
        valid = ", ".join(o.value for o in Objective)
        raise ConfigurationError(f"objectives must be among: {valid}") from None


def cmd_sweep(args: argparse.Namespace) -> int:
    config = build_config(args)
    objectives = _parse_objectives(args.objectives)
    out_dir = Path(args.output)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out_dir}: {exc}") from exc

    params = config.engine_params()
    grid = GridSpec(base=params, alpha_points=config.grid_alpha_points,
                    phi_points=config.grid_phi_points)
    engine = CycleEngine(params)
    table = grid_sweep(grid, engine)

    summary: dict[str, object] = {
        "params": {
            "hbar_omega_pev": config.hbar_omega_pev,
            "tau_us": config.tau_us,
            "beta": config.beta,
            "omega_tau": params.omega_tau,
            "beta_hbar_omega": params.beta_hbar_omega,
            "steps": config.steps,
            "grid_alpha_points": config.grid_alpha_points,
            "grid_phi_points": config.grid_phi_points,
        },
        "flagged_rows": table.flagged,
    }
    for objective in objectives:
        try:
            extremum = locate_extrema(table, objective, engine)
        except ConfigurationError:
            # e.g. beta = 0 leaves eta undefined on every row
            summary[objective.value] = None
            continue
        summary[objective.value] = {
            "alpha": extremum.alpha_star,
            "phi": extremum.phi_star,
            "value": extremum.value,
        }
    summary["symmetry_residual"] = symmetry_residual(table)

    csv_path = out_dir / "sweep.csv"
    summary_path = out_dir / "summary.json"
    try:
        write_table_csv(table, csv_path)
        summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        raise ConfigurationError(f"cannot write output: {exc}") from exc
    print(f"wrote {csv_path} ({table.rows.shape[0]} rows) and {summary_path}")
    return 0


def cmd_slice(args: argparse.Namespace) -> int:
    config = build_config(args)
    if (args.fixed_alpha is None) == (args.fixed_phi is None):
        raise ConfigurationError("give exactly one of --fixed-alpha / --fixed-phi")
    fixed = "alpha" if args.fixed_alpha is not None else "phi"
    value = args.fixed_alpha if fixed == "alpha" else args.fixed_phi
    profile = slice_profile(config.engine_params(), fixed, value, points=args.points)
    path = Path(args.output)
    try:
        write_slice_csv(profile, path)
    except OSError as exc:
        raise ConfigurationError(f"cannot write output: {exc}") from exc
    print(f"wrote {path} ({len(profile)} rows)")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    config = build_config(args)
    grid_points = (
        args.grid_alpha_points if args.grid_alpha_points is not None else 129,
        args.grid_phi_points if args.grid_phi_points is not None else 129,
    )
    rehermitize = args.inject_fault != "skip-rehermitize"
    results = run_all_suites(
        config.engine_params(),
        seed=config.seed,
        samples=args.samples,
        grid_points=grid_points,
        rehermitize=rehermitize,
    )
    print(f"seed={config.seed}")
    all_passed = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        all_passed &= res.passed
        line = (f"[{status}] {res.name}: max residual {res.max_residual:.3e}"
                f" (tol {res.tolerance:.1e})")
        if res.detail:
            line += f" - {res.detail}"
        print(line)
    return 0 if all_passed else 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems are configuration errors
        raise ConfigurationError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--hbar-omega-pev", dest="hbar_omega_pev", type=float)
    parser.add_argument("--tau-us", dest="tau_us", type=float)
    parser.add_argument("--beta", dest="beta",
                        help=f"inverse temperature in 1/peV, or {BETA_TOKEN!r}")
    parser.add_argument("--alpha-rad", dest="alpha_rad", type=float)
    parser.add_argument("--phi-rad", dest="phi_rad", type=float)
    parser.add_argument("--steps", dest="steps", type=int)
    parser.add_argument("--grid-alpha-points", dest="grid_alpha_points", type=int)
    parser.add_argument("--grid-phi-points", dest="grid_phi_points", type=int)
    parser.add_argument("--seed", dest="seed", type=int,
                        help=f"RNG seed (alternative: ${SEED_ENV_VAR})")


def build_parser() -> _Parser:
    parser = _Parser(prog="qmeter",
                     description="measurement-fueled single-qubit engine simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate one cycle")
    _add_common(p_run)
    p_run.add_argument("--csv", help="also write the record as a one-row CSV")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="scan the (alpha, phi) plane")
    _add_common(p_sweep)
    p_sweep.add_argument("--output", default=".", help="output directory")
    p_sweep.add_argument("--objectives", default="max_w_ext,max_eta,min_ds")
    p_sweep.set_defaults(func=cmd_sweep)

    p_slice = sub.add_parser("slice", help="1-D profile with one angle fixed")
    _add_common(p_slice)
    p_slice.add_argument("--fixed-alpha", dest="fixed_alpha", type=float)
    p_slice.add_argument("--fixed-phi", dest="fixed_phi", type=float)
    p_slice.add_argument("--points", type=int, default=513)
    p_slice.add_argument("--output", default="slice.csv")
    p_slice.set_defaults(func=cmd_slice)

    p_verify = sub.add_parser("verify", help="run the invariant suites")
    _add_common(p_verify)
    p_verify.add_argument("--samples", type=int, default=2000)
    p_verify.add_argument("--inject-fault", choices=["skip-rehermitize"],
                          help="testing hook: disable a safeguard and expect FAIL")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigurationError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        for name, residual in sorted(exc.residuals.items()):
            print(f"  {name}: {residual:.3e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
