"""
Command-line front end.

    surface-waves permittivity --omega-range 0 5 501
    surface-waves scan --config recipes/plasma_2p13.json --out out/plasma_2p13.csv
    surface-waves trace --config recipes/lossy_continuation.json --seed-k 2.8 --seed-omega 1.1
    surface-waves profile --k 2.8 --omega 1.1
    surface-waves validate

Exit codes: 0 success, 1 unexpected solver failure, 2 config error,
3 mode misuse, 4 continuation failure, 5 non-decaying point.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, lorentz, settings
from .core import MediumConfig, Polarization, WaveCoordinates
from .errors import (
    ConfigError,
    CurveTerminated,
    DegenerateSpectrum,
    ModeMisuse,
    NotDecaying,
    ResonancePole,
    SurfaceWaveError,
)
from .export import RunManifest, load_config, open_output, write_csv
from .solver import ScanGrid, branch_points, continue_in_gamma, scan_lossless
from .transfer import interface_profile
from .validation import (
    INVARIANT,
    CheckResult,
    check_config_roundtrip,
    run_invariant_suite,
    run_reproduction_suite,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_MODE = 3
EXIT_CONTINUATION = 4
EXIT_NOT_DECAYING = 5

# continuation that dies before this share of the range counts as failed
MIN_TRACE_PROGRESS = 0.1


def _manifest(args: argparse.Namespace, outputs: Sequence[str] = ()) -> RunManifest:
    return RunManifest.create(
        command=args.command,
        config_path=args.config,
        overrides=args.set,
        outputs=outputs or ([args.out] if args.out else []),
        stamp=not args.no_timestamp,
    )


def _polarized_path(out: Optional[str], polarization: Polarization, many: bool) -> Optional[str]:
    if out is None or out == "-" or not many:
        return out
    path = Path(out)
    return str(path.with_name(f"{path.stem}_{polarization.value}{path.suffix}"))


# -------------------------------------------------------------------
# Commands
# -------------------------------------------------------------------
def cmd_permittivity(cfg: MediumConfig, args: argparse.Namespace) -> int:
    low, high, n = args.omega_range
    rows = []
    for omega in np.linspace(low, high, n):
        try:
            eps = lorentz.permittivity(cfg.lorentz, float(omega))
        except ResonancePole:
            logger.warning(f"Skipping Omega={omega} (lossless resonance)")
            continue
        rows.append((float(omega), eps.real_part, eps.loss_over_omega))
    with open_output(args.out) as stream:
        write_csv(stream, ("omega_hat", "re_eps", "im_eps"), rows, _manifest(args))
    return EXIT_OK


def cmd_scan(cfg: MediumConfig, args: argparse.Namespace) -> int:
    grid = ScanGrid(k_hat_range=args.k_range, omega_hat_range=args.omega_range)
    polarizations = (
        [Polarization(p.strip().upper()) for p in args.polarizations.split(",") if p.strip()]
        if args.polarizations
        else [cfg.polarization]
    )
    many = len(polarizations) > 1
    for polarization in polarizations:
        branches = scan_lossless(cfg.with_polarization(polarization), grid, workers=args.workers)
        path = _polarized_path(args.out, polarization, many)
        rows = [(branch_id, p.k_hat, p.omega_hat) for branch_id, p in branch_points(branches)]
        with open_output(path) as stream:
            write_csv(stream, ("branch_id", "k_hat", "omega_hat"), rows, _manifest(args, [path] if path else []))
        print(f"📈 {polarization.value}: {len(branches)} branches, {len(rows)} points", file=sys.stderr)
    return EXIT_OK


def cmd_trace(cfg: MediumConfig, args: argparse.Namespace) -> int:
    start, end, n = args.log_gamma
    seed = WaveCoordinates(args.seed_k, args.seed_omega)
    status = EXIT_OK
    try:
        points = continue_in_gamma(cfg, (start, end, n), seed)
    except CurveTerminated as e:
        points = e.points
        span = abs(end - start)
        progress = 0.0 if e.last_log_gamma is None or span == 0 else abs(e.last_log_gamma - start) / span
        logger.error(f"Continuation stopped: {e} ({progress:.0%} of the range)")
        if progress < MIN_TRACE_PROGRESS:
            status = EXIT_CONTINUATION

    rows = [(p.log10_gamma, p.omega_hat, p.k_hat, p.newton_residual) for p in points]
    with open_output(args.out) as stream:
        write_csv(stream, ("log10_gamma", "omega_hat", "k_hat", "residual_norm"), rows, _manifest(args))
    return status


def cmd_profile(cfg: MediumConfig, args: argparse.Namespace) -> int:
    w = WaveCoordinates(args.k, args.omega)
    try:
        profile = interface_profile(
            cfg,
            w,
            depth=args.depth,
            lorentz_samples=args.lorentz_samples,
            n_periods=args.periods,
            samples_per_layer=args.samples_per_layer,
        )
    except NotDecaying as e:
        logger.error(f"Profile unavailable at {w}: {e}")
        print(f"❌ no decaying solution on the {e.side} side", file=sys.stderr)
        return EXIT_NOT_DECAYING
    except DegenerateSpectrum as e:
        logger.error(f"Profile unavailable at {w}: {e}")
        print("❌ no decaying solution on the stratified side (band edge)", file=sys.stderr)
        return EXIT_NOT_DECAYING

    with open_output(args.out) as stream:
        write_csv(stream, profile.columns(), profile.rows(), _manifest(args))
    return EXIT_OK


def _report(results: List[CheckResult], out: Optional[str]) -> bool:
    """Print the pass/fail table and write the JSON summary; True when every invariant passed"""
    print("\n🔎 Validation report")
    print("-" * 72)
    for result in results:
        mark = "✅" if result.passed else ("❌" if result.kind == INVARIANT else "⚠️ ")
        print(f"{mark} [{result.kind}] {result.name}: {result.detail}")
    print("-" * 72)

    invariants_ok = all(r.passed for r in results if r.kind == INVARIANT)
    summary = {
        "passed": invariants_ok,
        "tool_version": __version__,
        "checks": [r.as_dict() for r in results],
    }
    if out:
        with open_output(out) as stream:
            stream.write(json.dumps(summary, indent=2) + "\n")
    else:
        print(json.dumps(summary, indent=2))
    return invariants_ok


def cmd_validate(cfg: MediumConfig, args: argparse.Namespace) -> int:
    results = run_invariant_suite() + [check_config_roundtrip(cfg)]
    if args.reproduce:
        grid = ScanGrid(k_hat_range=args.k_range, omega_hat_range=args.omega_range)
        results += run_reproduction_suite(cfg, grid)
    return EXIT_OK if _report(results, args.out) else EXIT_FAILURE


COMMANDS = {
    "permittivity": cmd_permittivity,
    "scan": cmd_scan,
    "trace": cmd_trace,
    "profile": cmd_profile,
    "validate": cmd_validate,
}


# -------------------------------------------------------------------
# Parser
# -------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=settings.DEFAULT_CONFIG_PATH, help="JSON medium config")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="dotted config override")
    common.add_argument("--no-timestamp", action="store_true", help="omit the manifest timestamp")
    common.add_argument("--log-level", default=settings.LOG_LEVEL)

    parser = argparse.ArgumentParser(
        prog="surface-waves",
        description="Interfacial waves between a stratified dielectric and a Lorentz half-space",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("permittivity", parents=[common], help="Lorentz permittivity over a frequency range")
    p.add_argument("--omega-range", nargs=3, default=(0.0, 5.0, 501), type=float, metavar=("MIN", "MAX", "N"))

    grid_defaults = ScanGrid()
    p = sub.add_parser("scan", parents=[common], help="lossless dispersion branches")
    p.add_argument("--k-range", nargs=3, default=grid_defaults.k_hat_range, type=float, metavar=("MIN", "MAX", "N"))
    p.add_argument("--omega-range", nargs=3, default=grid_defaults.omega_hat_range, type=float, metavar=("MIN", "MAX", "N"))
    p.add_argument("--polarizations", default=None, help="comma list, e.g. TE,TM (default: config)")
    p.add_argument("--workers", type=int, default=settings.WORKERS)

    p = sub.add_parser("trace", parents=[common], help="lossy root continued in log10(gamma)")
    p.add_argument("--log-gamma", nargs=3, default=(-15.0, 15.0, 61), type=float, metavar=("MIN", "MAX", "N"))
    p.add_argument("--seed-k", type=float, required=True)
    p.add_argument("--seed-omega", type=float, required=True)

    p = sub.add_parser("profile", parents=[common], help="two-sided field profile at an admissible point")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--depth", type=float, default=3.0, help="Lorentz-side depth in periods")
    p.add_argument("--lorentz-samples", type=int, default=61)
    p.add_argument("--periods", type=int, default=3)
    p.add_argument("--samples-per-layer", type=int, default=20)

    p = sub.add_parser("validate", parents=[common], help="invariant suite (and reference-value reproduction checks)")
    p.add_argument("--reproduce", action="store_true", help="also run the slow reference-value reproduction checks")
    p.add_argument("--k-range", nargs=3, default=grid_defaults.k_hat_range, type=float, metavar=("MIN", "MAX", "N"))
    p.add_argument("--omega-range", nargs=3, default=(0.05, 3.0, 200), type=float, metavar=("MIN", "MAX", "N"))
    return parser


def _normalize_ranges(args: argparse.Namespace) -> None:
    for name in ("k_range", "omega_range", "log_gamma"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(args, name, (float(value[0]), float(value[1]), int(value[2])))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _normalize_ranges(args)
    settings.configure_logging(args.log_level.upper())

    try:
        cfg = load_config(args.config, args.set)
    except ConfigError as e:
        logger.error(f"Config error: {e}")
        print(f"❌ config: {e}", file=sys.stderr)
        if args.command == "validate":
            _report([CheckResult("config validation", INVARIANT, False, str(e))], args.out)
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](cfg, args)
    except ModeMisuse as e:
        logger.error(f"Mode misuse: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_MODE
    except ValueError as e:
        # grid flags rejected by ScanGrid
        logger.error(f"Invalid arguments: {e}")
        return EXIT_CONFIG
    except SurfaceWaveError as e:
        logger.error(f"Solver failure: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
