"""Observation scenarios: entangled signal mixed with unentangled background.

Two viewing configurations are supported.  In scenario "I" the two
sources sit close together on the sky, every detector sees both, and all
four propagation legs are live; the interference part of the background
then shares the signal's cos 2(t_a - t_b) angular shape, which is what
makes small-separation signal extraction ill posed.  In scenario "II"
the sources are far apart and each detector is pointed at one of them,
which is modeled by masking the two cross legs; the background becomes
an exactly separable function of the two polarizer angles and can be
nulled or fitted away.

A coincidence correlator is the rate-weighted mixture

    E = [f w_sig E_sig + (1 - f) w_bg E_bg] / [f w_sig + (1 - f) w_bg]

of the entangled-pair correlator (+-cos 2(t_a - t_b) times the
propagation weight) and the unentangled-background correlator, where f
is the entangled fraction of emitted pairs.  Neither weight depends on
the polarizer angles, so the mixture preserves each component's angular
shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .background import (
    BackgroundSpec,
    background_correlator,
    background_rate_total,
)
from .errors import DegenerateDesignError
from .polarization import (
    TSIRELSON_BOUND,
    ChshConfiguration,
    PolarizerAxis,
)
from .propagation import (
    NORMALIZATIONS,
    Geometry,
    PathAmplitudeSet,
    entangled_pair_weight,
    path_amplitudes,
    scenario2_mask,
)

SCENARIOS = ("I", "II")

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one observation run.

    f = entangled_fraction is the fraction of coincident pairs drawn
    from the entangled channel; the rest follow the background spec.
    """

    scenario: str
    bell_kind: int
    entangled_fraction: float
    background: BackgroundSpec
    geometry: Geometry
    propagator_normalization: str = "phase-only"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.bell_kind not in (1, 2):
            raise ValueError(f"bell_kind must be 1 or 2, got {self.bell_kind!r}")
        f = float(self.entangled_fraction)
        if not math.isfinite(f) or not 0.0 <= f <= 1.0:
            raise ValueError(f"entangled_fraction must lie in [0, 1], got {f!r}")
        object.__setattr__(self, "entangled_fraction", f)
        if self.propagator_normalization not in NORMALIZATIONS:
            raise ValueError(
                f"propagator_normalization must be one of {NORMALIZATIONS}, "
                f"got {self.propagator_normalization!r}"
            )


def effective_amplitudes(
    cfg: ExperimentConfig, phi1: float = 0.0, phi2: float = 0.0
) -> PathAmplitudeSet:
    """Leg amplitudes for the config, cross legs masked in scenario II.

    No observable downstream depends on phi1/phi2: the source phases
    enter every retained quantity through magnitudes or the closed loop,
    where they cancel.
    """
    amps = path_amplitudes(
        cfg.geometry, phi1=phi1, phi2=phi2, normalization=cfg.propagator_normalization
    )
    if cfg.scenario == "II":
        amps = scenario2_mask(amps)
    return amps


@dataclass(frozen=True)
class CorrelatorParts:
    """A coincidence correlator with its signal/background decomposition.

    weight_signal = f * w_sig and weight_background = (1 - f) * w_bg are
    the rate-weighted mixture weights, so
    e == (weight_signal * e_signal + weight_background * e_background)
         / (weight_signal + weight_background).
    """

    e: float
    e_signal: float
    e_background: float
    weight_signal: float
    weight_background: float


def coincidence_correlator(
    cfg: ExperimentConfig,
    a: PolarizerAxis,
    b: PolarizerAxis,
    amplitudes: PathAmplitudeSet | None = None,
) -> CorrelatorParts:
    """Mixture correlator at polarizer settings (a, b).

    ``amplitudes`` overrides the geometry-derived legs (useful for
    feeding externally masked or synthetic amplitude sets); when given,
    the scenario mask is not re-applied.
    """
    amps = effective_amplitudes(cfg) if amplitudes is None else amplitudes
    f = cfg.entangled_fraction

    sign = 1.0 if cfg.bell_kind == 1 else -1.0
    e_sig = sign * math.cos(2.0 * (a.angle - b.angle))
    w_sig = f * entangled_pair_weight(amps)

    w_bg_raw = background_rate_total(cfg.background, amps)
    w_bg = (1.0 - f) * w_bg_raw
    e_bg = (
        background_correlator(cfg.background, amps, a, b) if w_bg > 0.0 else 0.0
    )

    total = w_sig + w_bg
    if total <= 0.0:
        raise ValueError(
            "total coincidence weight is zero: no entangled rate and no "
            "background rate at these settings"
        )
    e = (w_sig * e_sig + w_bg * e_bg) / total
    return CorrelatorParts(
        e=e,
        e_signal=e_sig,
        e_background=e_bg,
        weight_signal=w_sig,
        weight_background=w_bg,
    )


@dataclass(eq=False)
class ScanResult:
    """Row-major table of correlators over a polarizer-angle grid.

    Rows are ordered with theta_a as the outer loop and theta_b inner,
    matching the CSV layout written by the command-line tool.
    """

    theta_a: np.ndarray
    theta_b: np.ndarray
    e: np.ndarray
    e_signal: np.ndarray
    e_background: np.ndarray
    w_signal: np.ndarray
    w_background: np.ndarray

    def __post_init__(self):
        arrays = [
            np.asarray(getattr(self, name), dtype=float)
            for name in (
                "theta_a",
                "theta_b",
                "e",
                "e_signal",
                "e_background",
                "w_signal",
                "w_background",
            )
        ]
        n = arrays[0].shape[0]
        if any(arr.shape != (n,) for arr in arrays):
            raise ValueError("scan columns must be 1-D arrays of equal length")
        if n == 0:
            raise ValueError("scan must contain at least one row")
        if np.max(np.abs(arrays[2])) > 1.0 + 1e-9:
            raise ValueError("correlator column leaves [-1, 1]")
        for name, arr in zip(
            (
                "theta_a",
                "theta_b",
                "e",
                "e_signal",
                "e_background",
                "w_signal",
                "w_background",
            ),
            arrays,
        ):
            setattr(self, name, arr)

    def __len__(self) -> int:
        return int(self.theta_a.shape[0])


def angular_scan(cfg: ExperimentConfig, grid_a, grid_b) -> ScanResult:
    """Analytic correlator over the outer product of two angle grids.

    ``grid_a`` and ``grid_b`` are sequences of polarizer angles in
    radians; the result has len(grid_a) * len(grid_b) rows in row-major
    order and is deterministic (no sampling).
    """
    grid_a = [float(x) for x in grid_a]
    grid_b = [float(x) for x in grid_b]
    if not grid_a or not grid_b:
        raise ValueError("scan grids must be non-empty")
    amps = effective_amplitudes(cfg)
    rows = {name: [] for name in ("ta", "tb", "e", "es", "eb", "ws", "wb")}
    for ta in grid_a:
        axis_a = PolarizerAxis(ta)
        for tb in grid_b:
            parts = coincidence_correlator(cfg, axis_a, PolarizerAxis(tb), amplitudes=amps)
            rows["ta"].append(ta)
            rows["tb"].append(tb)
            rows["e"].append(parts.e)
            rows["es"].append(parts.e_signal)
            rows["eb"].append(parts.e_background)
            rows["ws"].append(parts.weight_signal)
            rows["wb"].append(parts.weight_background)
    return ScanResult(
        theta_a=np.array(rows["ta"]),
        theta_b=np.array(rows["tb"]),
        e=np.array(rows["e"]),
        e_signal=np.array(rows["es"]),
        e_background=np.array(rows["eb"]),
        w_signal=np.array(rows["ws"]),
        w_background=np.array(rows["wb"]),
    )


def null_background_axes(spec: BackgroundSpec) -> tuple[float, float]:
    """Polarizer angles that zero the separable background at each detector.

    Rotating each polarizer pi/4 away from its source's polarization
    axis kills the cos 2(t - n) factor; returns the two angles modulo pi.
    """
    return (
        (spec.axis1.angle + math.pi / 4.0) % math.pi,
        (spec.axis2.angle + math.pi / 4.0) % math.pi,
    )


@dataclass(frozen=True)
class FitReport:
    """Least-squares decomposition of a scan into signal and background shapes.

    bell_s = 2*sqrt(2) * s_hat is the CHSH value implied by a pure
    cos 2(t_a - t_b) term of amplitude s_hat at saturating settings;
    violates_bell flags |bell_s| > 2.
    """

    s_hat: float
    b_hat: float
    residual_rms: float
    bell_s: float
    violates_bell: bool

    def to_dict(self) -> dict:
        return {
            "S_hat": self.s_hat,
            "B_hat": self.b_hat,
            "residual_rms": self.residual_rms,
            "bell_S": self.bell_s,
            "violates_bell": self.violates_bell,
        }


def extract_signal(
    scan: ScanResult,
    beta1: float,
    beta2: float,
    background_basis: str = "product",
) -> FitReport:
    """Fit E(t_a, t_b) = s_hat cos 2(t_a - t_b) + b_hat g(t_a, t_b).

    With background_basis "product" (the wide-separation procedure) the
    background shape is g = cos 2(t_a - beta1) cos 2(t_b - beta2).  With
    "scan" the scan's own recorded background correlator column is used
    as the shape; for a small-separation scan with unpolarized sources
    that column is itself proportional to cos 2(t_a - t_b), so the two
    basis functions are parallel and the fit is refused.

    Requires at least 4 distinct (t_a, t_b) rows.  Raises
    DegenerateDesignError when the second singular value of the design
    matrix falls below 1e-10, naming the degenerate direction.
    """
    if background_basis not in ("product", "scan"):
        raise ValueError(
            f"background_basis must be 'product' or 'scan', got {background_basis!r}"
        )
    distinct = {(float(ta), float(tb)) for ta, tb in zip(scan.theta_a, scan.theta_b)}
    if len(distinct) < 4:
        raise ValueError(
            f"need at least 4 distinct (theta_a, theta_b) rows, got {len(distinct)}"
        )

    signal_col = np.cos(2.0 * (scan.theta_a - scan.theta_b))
    if background_basis == "product":
        bg_col = np.cos(2.0 * (scan.theta_a - beta1)) * np.cos(2.0 * (scan.theta_b - beta2))
        bg_name = "background basis cos 2(theta_a - beta1) cos 2(theta_b - beta2)"
    else:
        bg_col = scan.e_background.copy()
        bg_name = "scan background correlator column"
    design = np.column_stack([signal_col, bg_col])

    singular_values = np.linalg.svd(design, compute_uv=False)
    if singular_values[1] < _RANK_TOL:
        norm_signal = float(np.linalg.norm(signal_col))
        norm_bg = float(np.linalg.norm(bg_col))
        scale = math.sqrt(len(scan))
        if norm_bg <= _RANK_TOL * scale:
            direction = f"{bg_name} vanishes on this scan"
        elif norm_signal <= _RANK_TOL * scale:
            direction = "signal basis cos 2(theta_a - theta_b) vanishes on this scan"
        else:
            direction = (
                f"{bg_name} is parallel to the signal basis "
                "cos 2(theta_a - theta_b) on this scan"
            )
        raise DegenerateDesignError(direction, singular_values[1])

    coef, _, _, _ = np.linalg.lstsq(design, scan.e, rcond=None)
    residual = scan.e - design @ coef
    residual_rms = float(np.sqrt(np.mean(residual**2)))
    s_hat = float(coef[0])
    bell_s = TSIRELSON_BOUND * s_hat
    return FitReport(
        s_hat=s_hat,
        b_hat=float(coef[1]),
        residual_rms=residual_rms,
        bell_s=bell_s,
        violates_bell=bool(abs(bell_s) > 2.0),
    )


def chsh_with_background(cfg: ExperimentConfig, chsh: ChshConfiguration) -> float:
    """CHSH sum of the mixture correlator at the four settings.

    Reaches f * 2*sqrt(2) at the saturating settings when the background
    correlator vanishes there and the two channel rates are equal.
    """
    return (
        coincidence_correlator(cfg, chsh.a, chsh.b).e
        + coincidence_correlator(cfg, chsh.a_prime, chsh.b).e
        + coincidence_correlator(cfg, chsh.a, chsh.b_prime).e
        - coincidence_correlator(cfg, chsh.a_prime, chsh.b_prime).e
    )
