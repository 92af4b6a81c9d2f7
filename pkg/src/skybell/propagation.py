"""Scalar path amplitudes and intensity interference for two sources, two detectors.

Photons from point sources 1 and 2 reach detectors A and B along four
legs.  Each leg carries a scalar amplitude

    d_iX = exp(i (k r_iX + phi_i)) / r_iX      ("spherical")
    d_iX = exp(i (k r_iX + phi_i))             ("phase-only")

where r_iX is the leg length, k the wavenumber and phi_i a random
emission phase of source i.  Polarization rides along unchanged, so the
amplitudes are spin independent.

Intensity interferometry pairs one photon from each source.  The
coincidence amplitude is d1a*d2b + d2a*d1b, and its squared magnitude
splits into the direct part |d1a d2b|^2 + |d2a d1b|^2 plus the
interference term 2 Re(d1a d2b conj(d2a d1b)).  The interference term
depends only on the closed four-leg loop, so the random per-source
phases cancel out of it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

#: Allowed leg-amplitude normalizations.
NORMALIZATIONS = ("phase-only", "spherical")


def _as_point(value, name: str) -> np.ndarray:
    p = np.array(value, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} must be finite")
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class Geometry:
    """Positions of the two sources and two detectors, plus the wavenumber.

    All four source-detector separations must be strictly positive.
    """

    source1: np.ndarray
    source2: np.ndarray
    detector_a: np.ndarray
    detector_b: np.ndarray
    wavenumber: float

    def __post_init__(self):
        object.__setattr__(self, "source1", _as_point(self.source1, "source1"))
        object.__setattr__(self, "source2", _as_point(self.source2, "source2"))
        object.__setattr__(self, "detector_a", _as_point(self.detector_a, "detector_a"))
        object.__setattr__(self, "detector_b", _as_point(self.detector_b, "detector_b"))
        k = float(self.wavenumber)
        if not math.isfinite(k) or k <= 0.0:
            raise ValueError(f"wavenumber must be finite and > 0, got {self.wavenumber!r}")
        object.__setattr__(self, "wavenumber", k)
        for r, name in zip(self.path_lengths(), ("1->A", "2->A", "1->B", "2->B")):
            if r <= 0.0:
                raise ValueError(f"source/detector pair {name} is coincident")

    def path_lengths(self) -> tuple[float, float, float, float]:
        """Leg lengths (r_1A, r_2A, r_1B, r_2B)."""
        return (
            float(np.linalg.norm(self.source1 - self.detector_a)),
            float(np.linalg.norm(self.source2 - self.detector_a)),
            float(np.linalg.norm(self.source1 - self.detector_b)),
            float(np.linalg.norm(self.source2 - self.detector_b)),
        )

    def with_detector_b(self, position) -> "Geometry":
        """Same geometry with detector B moved to ``position``."""
        return replace(self, detector_b=_as_point(position, "detector_b"))


@dataclass(frozen=True)
class PathAmplitudeSet:
    """The four leg amplitudes d1a, d2a, d1b, d2b.

    Zeros are legitimate (a mask or an occulted leg); non-finite values
    are not.
    """

    d1a: complex
    d2a: complex
    d1b: complex
    d2b: complex

    def __post_init__(self):
        for name in ("d1a", "d2a", "d1b", "d2b"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"amplitude {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    def loop_product(self) -> complex:
        """d1a * d2b * conj(d2a * d1b): the closed four-leg loop.

        Source emission phases enter each forward leg once and each
        conjugated leg once, so they cancel here.
        """
        return self.d1a * self.d2b * np.conj(self.d2a * self.d1b)


def path_amplitudes(
    geometry: Geometry,
    phi1: float = 0.0,
    phi2: float = 0.0,
    normalization: str = "phase-only",
) -> PathAmplitudeSet:
    """Leg amplitudes for the given geometry and source emission phases.

    Parameters
    ----------
    geometry : Geometry
    phi1, phi2 : float
        Emission phases of sources 1 and 2 (radians).
    normalization : str
        "phase-only" for unit-magnitude legs, "spherical" for 1/r falloff.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(
            f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}"
        )
    k = geometry.wavenumber
    r1a, r2a, r1b, r2b = geometry.path_lengths()

    def leg(r: float, phi: float) -> complex:
        amp = complex(np.exp(1j * (k * r + phi)))
        if normalization == "spherical":
            amp /= r
        return amp

    return PathAmplitudeSet(
        d1a=leg(r1a, phi1), d2a=leg(r2a, phi2), d1b=leg(r1b, phi1), d2b=leg(r2b, phi2)
    )


class HbtIntensity(NamedTuple):
    total: float
    interference: float


def hbt_intensity(amps: PathAmplitudeSet) -> HbtIntensity:
    """Coincidence intensity for one unpolarized photon from each source.

    Returns (total, interference) where

        total        = |d1a d2b|^2 + |d2a d1b|^2 + interference
        interference = 2 Re[d1a d2b conj(d2a d1b)].
    """
    direct = abs(amps.d1a * amps.d2b) ** 2 + abs(amps.d2a * amps.d1b) ** 2
    interference = 2.0 * float(np.real(amps.loop_product()))
    return HbtIntensity(total=direct + interference, interference=interference)


def entangled_pair_weight(amps: PathAmplitudeSet) -> float:
    """Propagation weight |d1a d2b + d2a d1b|^2 of the entangled pair.

    The pair's polarization state factors out of propagation, so its
    correlators at the detectors are the source-frame correlators times
    this single nonnegative number.
    """
    return float(abs(amps.d1a * amps.d2b + amps.d2a * amps.d1b) ** 2)


def scenario2_mask(amps: PathAmplitudeSet) -> PathAmplitudeSet:
    """Wide-separation mask: detector A sees only source 1, B only source 2.

    Zeroes the cross legs d2a and d1b; the loop product and hence every
    interference term vanishes afterwards.
    """
    return replace(amps, d2a=0j, d1b=0j)


def propagate_pair(amp4: np.ndarray, amps: PathAmplitudeSet) -> np.ndarray:
    """Unnormalized pair amplitudes at the detectors.

    Sums the two routes explicitly: source 1 to A with source 2 to B,
    and source 2 to A with source 1 to B.  Both routes carry the same
    polarization amplitudes, so the result equals
    amp4 * (d1a d2b + d2a d1b).
    """
    amp4 = np.asarray(amp4, dtype=complex)
    if amp4.shape != (4,):
        raise ValueError(f"need 4 pair amplitudes, got shape {amp4.shape}")
    return (amps.d1a * amps.d2b) * amp4 + (amps.d2a * amps.d1b) * amp4
