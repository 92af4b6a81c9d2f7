"""Command-line interface: chsh, scan, fit, and hbt subcommands.

Every output file is paired with a JSON run manifest (same path plus
".manifest.json") recording the command, config, seed and outputs; CSV
files carry a leading "# manifest: ..." comment pointing back at it.
Floats are written with full repr precision so files round-trip exactly.

Exit codes: 0 success, 2 config/usage error, 3 numerical or degeneracy
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import LoadedConfig, load_config
from .errors import ConfigError, ConsistencyError, DegenerateDesignError, SkybellError
from .montecarlo import estimate_chsh, sample_scan
from .polarization import ChshConfiguration, PolarizerAxis
from .propagation import hbt_intensity, path_amplitudes
from .scenarios import (
    ScanResult,
    angular_scan,
    chsh_with_background,
    extract_signal,
)

SCAN_CSV_COLUMNS = (
    "theta_a",
    "theta_b",
    "E",
    "E_signal",
    "E_background",
    "w_signal",
    "w_background",
)
HBT_CSV_COLUMNS = ("baseline_length", "total_intensity", "interference_term")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclasses.dataclass
class RunManifest:
    """Provenance record written alongside every output file."""

    command: str
    argv: list[str]
    config_path: str | None
    seed: int | None
    outputs: list[str]
    tool: str = "skybell"
    version: str = __version__
    created_utc: str = ""

    def write(self, path: Path) -> None:
        doc = dataclasses.asdict(self)
        doc["created_utc"] = datetime.now(timezone.utc).isoformat()
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _manifest_path(out_path: Path) -> Path:
    return out_path.with_name(out_path.name + ".manifest.json")


def _write_manifest(out_path: Path, command: str, argv, config_path, seed) -> Path:
    mpath = _manifest_path(out_path)
    RunManifest(
        command=command,
        argv=list(argv),
        config_path=str(config_path) if config_path else None,
        seed=seed,
        outputs=[str(out_path)],
    ).write(mpath)
    return mpath


def _fmt(x: float) -> str:
    return repr(float(x))


def write_scan_csv(path: Path, scan: ScanResult, manifest_name: str | None = None) -> None:
    lines = []
    if manifest_name:
        lines.append(f"# manifest: {manifest_name}")
    lines.append(",".join(SCAN_CSV_COLUMNS))
    for i in range(len(scan)):
        lines.append(
            ",".join(
                _fmt(col[i])
                for col in (
                    scan.theta_a,
                    scan.theta_b,
                    scan.e,
                    scan.e_signal,
                    scan.e_background,
                    scan.w_signal,
                    scan.w_background,
                )
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scan_csv(path: Path) -> ScanResult:
    """Read a scan CSV (skipping comment lines); validates the header."""
    rows = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = tuple(line.split(","))
                if header != SCAN_CSV_COLUMNS:
                    raise ConfigError(
                        f"scan file {path}: header {','.join(header)!r} does not "
                        f"match {','.join(SCAN_CSV_COLUMNS)!r}"
                    )
                continue
            parts = line.split(",")
            if len(parts) != len(SCAN_CSV_COLUMNS):
                raise ConfigError(f"scan file {path}: malformed row {line!r}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise ConfigError(f"scan file {path}: malformed row {line!r}") from None
    if header is None or not rows:
        raise ConfigError(f"scan file {path}: no data rows")
    data = np.array(rows)
    return ScanResult(
        theta_a=data[:, 0],
        theta_b=data[:, 1],
        e=data[:, 2],
        e_signal=data[:, 3],
        e_background=data[:, 4],
        w_signal=data[:, 5],
        w_background=data[:, 6],
    )


def _parse_grid(text: str, flag: str) -> np.ndarray:
    """Parse 'start:stop:steps' (degrees) into an inclusive grid in radians."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{flag}: expected start:stop:steps, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        steps = int(parts[2])
    except ValueError:
        raise ConfigError(f"{flag}: expected start:stop:steps, got {text!r}") from None
    if steps < 1:
        raise ConfigError(f"{flag}: steps must be >= 1, got {steps}")
    return np.deg2rad(np.linspace(start, stop, steps))


def _parse_angles(text: str) -> ChshConfiguration:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"--angles: expected a:a':b:b' in degrees, got {text!r}")
    try:
        vals = [math.radians(float(v)) for v in parts]
    except ValueError:
        raise ConfigError(f"--angles: expected a:a':b:b' in degrees, got {text!r}") from None
    return ChshConfiguration(
        a=PolarizerAxis(vals[0]),
        a_prime=PolarizerAxis(vals[1]),
        b=PolarizerAxis(vals[2]),
        b_prime=PolarizerAxis(vals[3]),
    )


def _load(args) -> LoadedConfig:
    return load_config(args.config)


def cmd_chsh(args, argv) -> int:
    loaded = _load(args)
    chsh = _parse_angles(args.angles) if args.angles else loaded.chsh
    seed = args.seed if args.seed is not None else loaded.seed

    s_analytic = chsh_with_background(loaded.experiment, chsh)
    print(f"S = {s_analytic:.6f} (analytic)")
    report = {"analytic_S": s_analytic}

    if args.n:
        s_hat, stderr = estimate_chsh(loaded.experiment, chsh, args.n, seed)
        print(f"S = {s_hat:.6f} +/- {stderr:.6f} (monte carlo, n={args.n} per setting)")
        report["monte_carlo"] = {
            "S_hat": s_hat,
            "stderr": stderr,
            "n_per_setting": args.n,
            "seed": seed,
        }

    if args.out:
        out = Path(args.out)
        mpath = _write_manifest(out, "chsh", argv, args.config, seed)
        report["manifest"] = mpath.name
        out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_scan(args, argv) -> int:
    loaded = _load(args)
    grid_a = _parse_grid(args.grid_a, "--grid-a")
    grid_b = _parse_grid(args.grid_b, "--grid-b")
    seed = args.seed if args.seed is not None else loaded.seed

    if args.n:
        scan = sample_scan(loaded.experiment, grid_a, grid_b, args.n, seed)
    else:
        scan = angular_scan(loaded.experiment, grid_a, grid_b)

    out = Path(args.out)
    mpath = _write_manifest(out, "scan", argv, args.config, seed if args.n else None)
    write_scan_csv(out, scan, manifest_name=mpath.name)
    print(f"wrote {len(scan)} rows to {out}")
    return EXIT_OK


def cmd_fit(args, argv) -> int:
    scan = read_scan_csv(Path(args.scan_csv))
    report = extract_signal(
        scan,
        beta1=math.radians(args.beta1),
        beta2=math.radians(args.beta2),
        background_basis=args.background_basis,
    )
    doc = report.to_dict()
    if args.out:
        out = Path(args.out)
        mpath = _write_manifest(out, "fit", argv, None, None)
        doc["manifest"] = mpath.name
        out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(
        f"S_hat = {report.s_hat:.6f}  B_hat = {report.b_hat:.6f}  "
        f"residual_rms = {report.residual_rms:.3e}  bell_S = {report.bell_s:.6f}"
    )
    if report.violates_bell:
        print("bell inequality violated (|bell_S| > 2)")
    return EXIT_OK


def cmd_hbt(args, argv) -> int:
    loaded = _load(args)
    geometry = loaded.experiment.geometry
    normalization = loaded.experiment.propagator_normalization
    seed = args.seed if args.seed is not None else loaded.seed

    baseline = geometry.detector_b - geometry.detector_a
    length = float(np.linalg.norm(baseline))
    if length <= 0.0:
        raise ValueError(
            "hbt scan needs distinct detector positions to define the baseline direction"
        )
    direction = baseline / length

    parts = args.baseline.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--baseline: expected start:stop:steps, got {args.baseline!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        steps = int(parts[2])
    except ValueError:
        raise ConfigError(
            f"--baseline: expected start:stop:steps, got {args.baseline!r}"
        ) from None
    if steps < 1:
        raise ConfigError(f"--baseline: steps must be >= 1, got {steps}")
    lengths = np.linspace(start, stop, steps)

    phase_rng = np.random.Generator(np.random.Philox(key=seed)) if args.random_phases else None

    lines = []
    out = Path(args.out)
    mpath = _write_manifest(out, "hbt", argv, args.config, seed if args.random_phases else None)
    lines.append(f"# manifest: {mpath.name}")
    lines.append(",".join(HBT_CSV_COLUMNS))
    for L in lengths:
        geo = geometry.with_detector_b(geometry.detector_a + L * direction)
        if phase_rng is not None:
            phi1, phi2 = phase_rng.uniform(0.0, 2.0 * math.pi, size=2)
        else:
            phi1 = phi2 = 0.0
        intensity = hbt_intensity(
            path_amplitudes(geo, phi1=phi1, phi2=phi2, normalization=normalization)
        )
        lines.append(
            ",".join((_fmt(L), _fmt(intensity.total), _fmt(intensity.interference)))
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lengths)} rows to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skybell",
        description=(
            "Polarization-entanglement toolkit for photon pairs from two sky "
            "sources: CHSH tests, angular scans, signal extraction, and "
            "intensity interferometry."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_chsh = sub.add_parser("chsh", help="four-setting CHSH value, analytic and sampled")
    p_chsh.add_argument("--config", required=True, help="YAML run configuration")
    p_chsh.add_argument("--angles", help="override settings as a:a':b:b' in degrees")
    p_chsh.add_argument("--n", type=int, help="Monte Carlo coincidences per setting")
    p_chsh.add_argument("--seed", type=int, help="override the config seed")
    p_chsh.add_argument("--out", help="write a JSON report here")
    p_chsh.set_defaults(func=cmd_chsh)

    p_scan = sub.add_parser("scan", help="correlator over a polarizer-angle grid")
    p_scan.add_argument("--config", required=True, help="YAML run configuration")
    p_scan.add_argument("--grid-a", required=True, help="start:stop:steps in degrees")
    p_scan.add_argument("--grid-b", required=True, help="start:stop:steps in degrees")
    p_scan.add_argument("--n", type=int, help="sample this many coincidences per point")
    p_scan.add_argument("--seed", type=int, help="override the config seed")
    p_scan.add_argument("--out", required=True, help="output CSV path")
    p_scan.set_defaults(func=cmd_scan)

    p_fit = sub.add_parser("fit", help="least-squares signal extraction from a scan CSV")
    p_fit.add_argument("scan_csv", help="scan CSV produced by the scan subcommand")
    p_fit.add_argument("--beta1", type=float, required=True, help="background axis 1 (degrees)")
    p_fit.add_argument("--beta2", type=float, required=True, help="background axis 2 (degrees)")
    p_fit.add_argument(
        "--background-basis",
        choices=("product", "scan"),
        default="product",
        help="background shape: separable product of the betas, or the scan's own column",
    )
    p_fit.add_argument("--out", help="write the fit report JSON here")
    p_fit.set_defaults(func=cmd_fit)

    p_hbt = sub.add_parser("hbt", help="intensity-interference fringe over a baseline scan")
    p_hbt.add_argument("--config", required=True, help="YAML run configuration")
    p_hbt.add_argument(
        "--baseline", required=True, help="detector separation scan start:stop:steps"
    )
    p_hbt.add_argument(
        "--random-phases",
        action="store_true",
        help="redraw source phases per row (the interference column is unchanged)",
    )
    p_hbt.add_argument("--seed", type=int, help="override the config seed")
    p_hbt.add_argument("--out", required=True, help="output CSV path")
    p_hbt.set_defaults(func=cmd_hbt)

    return parser


def run(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches the config-error code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateDesignError, ConsistencyError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SkybellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
