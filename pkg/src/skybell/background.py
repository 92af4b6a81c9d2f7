"""Coincidence model for unentangled photon pairs from partially polarized sources.

A pair drawn from sources (i, j), reaching detectors A and B through the
leg amplitudes d, is detected behind polarizer operators M_A, M_B at the
rate

      Tr(M_A rho_i) Tr(M_B rho_j) |d_iA d_jB|^2
    + Tr(M_A rho_j) Tr(M_B rho_i) |d_jA d_iB|^2
    + 2 Re[ Tr(M_A rho_i M_B rho_j) d_iA d_jB conj(d_jA d_iB) ],

the two direct assignments of photons to detectors plus their
interference.  With the rank-1 outcome projectors this is a nonnegative
detection rate for one of the four (+-, +-) outcome pairs; with the +-1
polarizer observables it is the correlation-weighted rate, i.e. the
(+,+) + (-,-) - (+,-) - (-,+) combination of the former.

Pairs are drawn from the cross-source pairing (one photon from each
source, entered twice as (1,2) and (2,1)) and the same-source pairings
(1,1) and (2,2), mixed with nonnegative weights normalized to sum one.
Every quantity here is an unnormalized rate in arbitrary units;
normalization happens only when forming a correlator.

When the cross legs are masked off (detector A sees only source 1 and B
only source 2), all interference dies and the correlator reduces to the
separable product of single-photon polarizer traces
alpha_1 cos 2(t_A - n_1)/(1+alpha_1) * alpha_2 cos 2(t_B - n_2)/(1+alpha_2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .polarization import (
    PolarizerAxis,
    Projector,
    SourceDensityMatrix,
    outcome_projector,
    projector_from_axis,
    source_density,
)
from .propagation import PathAmplitudeSet

_WEIGHT_TOL = 1e-12
_NEGATIVE_TOL = -1e-12

#: The four +-1 outcome pairs, in fixed (A, B) order.
OUTCOME_PAIRS = ((+1, +1), (+1, -1), (-1, +1), (-1, -1))


@dataclass(frozen=True)
class BackgroundSpec:
    """Two partially polarized sources plus pairing weights.

    axis1/alpha1 and axis2/alpha2 parameterize the source density
    matrices.  w12, w21 weight the cross-source pairing (one photon from
    each source, in either detector assignment; the two entries are
    physically equivalent and share the rate), while w11 and w22 weight
    pairs drawn twice from the same source.  Weights must be nonnegative
    with a positive sum and are renormalized to sum one.
    """

    axis1: PolarizerAxis
    axis2: PolarizerAxis
    alpha1: float
    alpha2: float
    w12: float = 0.5
    w21: float = 0.5
    w11: float = 0.0
    w22: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)
        weights = []
        for name in ("w12", "w21", "w11", "w22"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"weight {name} must be finite and >= 0, got {v!r}")
            weights.append(v)
        total = sum(weights)
        if total <= 0.0:
            raise ValueError("pairing weights must have a positive sum")
        for name, v in zip(("w12", "w21", "w11", "w22"), weights):
            object.__setattr__(self, name, v / total)

    def densities(self) -> tuple[SourceDensityMatrix, SourceDensityMatrix]:
        return (
            source_density(self.axis1, self.alpha1),
            source_density(self.axis2, self.alpha2),
        )

    def pairings(self):
        """(weight, source index i, source index j) for the four pairings."""
        return (
            (self.w12, 0, 1),
            (self.w21, 1, 0),
            (self.w11, 0, 0),
            (self.w22, 1, 1),
        )


def polarizer_trace(p: Projector, rho: SourceDensityMatrix) -> float:
    """Tr(P rho) in closed form: alpha cos 2(t_p - t_n) / (1 + alpha).

    The projector's matrix already carries (cos 2t_p, sin 2t_p) in its
    first row, so no inverse trigonometry is needed.  The result lies in
    (-1, 1).
    """
    c2n = math.cos(2.0 * rho.axis.angle)
    s2n = math.sin(2.0 * rho.axis.angle)
    cos2delta = p.m[0, 0] * c2n + p.m[0, 1] * s2n
    return rho.alpha * cos2delta / (1.0 + rho.alpha)


def interference_trace(
    pa: Projector,
    rho1: SourceDensityMatrix,
    pb: Projector,
    rho2: SourceDensityMatrix,
) -> complex:
    """Tr(P_A rho_1 P_B rho_2), the polarization factor of the cross term.

    Swapping the two density matrices conjugates the result, so the two
    cross terms of the rate formula always sum to something real.  For
    unpolarized sources (alpha = 0) the value is cos 2(t_A - t_B)/2.
    """
    return complex(np.trace(pa.m @ rho1.rho @ pb.m @ rho2.rho))


def _pairing_rate(ma, mb, rhos, amps: PathAmplitudeSet, i: int, j: int) -> complex:
    """Four-term rate for pairing (i, j) with arbitrary 2x2 detector operators."""
    d = (
        (amps.d1a, amps.d1b),
        (amps.d2a, amps.d2b),
    )
    dia, dib = d[i]
    dja, djb = d[j]
    direct1 = np.trace(ma @ rhos[i]).real * np.trace(mb @ rhos[j]).real
    direct2 = np.trace(ma @ rhos[j]).real * np.trace(mb @ rhos[i]).real
    cross = np.trace(ma @ rhos[i] @ mb @ rhos[j])
    cross_swapped = np.trace(ma @ rhos[j] @ mb @ rhos[i])
    z = dia * djb * np.conj(dja * dib)
    return (
        direct1 * abs(dia * djb) ** 2
        + direct2 * abs(dja * dib) ** 2
        + cross * z
        + cross_swapped * np.conj(z)
    )


def background_probability(
    spec: BackgroundSpec, amps: PathAmplitudeSet, a: PolarizerAxis, b: PolarizerAxis
) -> float:
    """Weighted four-term rate with the +-1 polarizer observables.

    This is the correlation-weighted (signed) coincidence rate: it
    equals the (+,+) + (-,-) - (+,-) - (-,+) combination of the rank-1
    outcome rates, and is the numerator of :func:`background_correlator`.
    It is real for every valid input; a non-vanishing imaginary residue
    signals corrupt amplitudes.
    """
    ma = projector_from_axis(a).m
    mb = projector_from_axis(b).m
    rhos = tuple(s.rho for s in spec.densities())
    total = 0j
    for w, i, j in spec.pairings():
        if w == 0.0:
            continue
        total += w * _pairing_rate(ma, mb, rhos, amps, i, j)
    if abs(total.imag) > 1e-12 * max(1.0, abs(total.real)):
        raise ConsistencyError(
            f"correlation-weighted rate has imaginary residue {total.imag:.3e}"
        )
    return float(total.real)


def background_outcome_rate(
    spec: BackgroundSpec,
    amps: PathAmplitudeSet,
    a: PolarizerAxis,
    b: PolarizerAxis,
    oa: int,
    ob: int,
) -> float:
    """Detection rate of the (oa, ob) outcome pair behind the two polarizers.

    Uses the rank-1 outcome projectors in the four-term rate, so the
    result is nonnegative for every physical amplitude set; a value
    below -1e-12 signals an invalid source/amplitude combination.
    """
    ma = outcome_projector(a, oa)
    mb = outcome_projector(b, ob)
    rhos = tuple(s.rho for s in spec.densities())
    total = 0j
    for w, i, j in spec.pairings():
        if w == 0.0:
            continue
        total += w * _pairing_rate(ma, mb, rhos, amps, i, j)
    rate = float(total.real)
    if rate < _NEGATIVE_TOL:
        raise ConsistencyError(
            f"outcome rate {rate:.3e} is negative beyond tolerance; "
            "the source/amplitude combination is not physical"
        )
    return max(rate, 0.0)


def background_rate_total(spec: BackgroundSpec, amps: PathAmplitudeSet) -> float:
    """Total coincidence rate summed over the four outcome pairs.

    Polarizer settings drop out of the sum, leaving the purely geometric
    rate sum_ij w_ij [|d_iA d_jB|^2 + |d_jA d_iB|^2
    + 2 Re(Tr(rho_i rho_j) z_ij)].
    """
    rhos = tuple(s.rho for s in spec.densities())
    d = ((amps.d1a, amps.d1b), (amps.d2a, amps.d2b))
    total = 0.0
    for w, i, j in spec.pairings():
        if w == 0.0:
            continue
        dia, dib = d[i]
        dja, djb = d[j]
        z = dia * djb * np.conj(dja * dib)
        overlap = float(np.trace(rhos[i] @ rhos[j]).real)
        total += w * (
            abs(dia * djb) ** 2
            + abs(dja * dib) ** 2
            + 2.0 * overlap * float(z.real)
        )
    if total < _NEGATIVE_TOL:
        raise ConsistencyError(
            f"total coincidence rate {total:.3e} is negative beyond tolerance"
        )
    return max(total, 0.0)


def background_correlator(
    spec: BackgroundSpec, amps: PathAmplitudeSet, a: PolarizerAxis, b: PolarizerAxis
) -> float:
    """Expected +-1 outcome product for unentangled pairs.

    Assembles [R(+,+) + R(-,-) - R(+,-) - R(-,+)] / sum(R) from the
    rank-1 outcome rates.  With the cross legs masked off this is exactly
    the separable product of the two single-photon polarizer traces.
    """
    total = background_rate_total(spec, amps)
    if total <= 0.0:
        raise ValueError(
            "total background rate is zero for these weights/amplitudes; "
            "no correlator is defined"
        )
    numerator = 0.0
    for oa, ob in OUTCOME_PAIRS:
        numerator += oa * ob * background_outcome_rate(spec, amps, a, b, oa, ob)
    return numerator / total


_SWAP = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)


def effective_density_matrix(spec: BackgroundSpec, amps: PathAmplitudeSet) -> np.ndarray:
    """Unnormalized 4x4 pair density matrix equivalent to the rate formula.

    For any product of single-detector operators M_A x M_B,
    Tr[(M_A x M_B) rho_eff] reproduces the weighted four-term rate; its
    trace equals :func:`background_rate_total`.  Divide by the trace to
    feed it into :func:`skybell.polarization.joint_outcome_probability`.
    """
    rhos = tuple(s.rho for s in spec.densities())
    d = ((amps.d1a, amps.d1b), (amps.d2a, amps.d2b))
    out = np.zeros((4, 4), dtype=complex)
    for w, i, j in spec.pairings():
        if w == 0.0:
            continue
        dia, dib = d[i]
        dja, djb = d[j]
        z = dia * djb * np.conj(dja * dib)
        direct = abs(dia * djb) ** 2 * np.kron(rhos[i], rhos[j]) + abs(
            dja * dib
        ) ** 2 * np.kron(rhos[j], rhos[i])
        exchange = z * (np.kron(rhos[i], rhos[j]) @ _SWAP)
        out += w * (direct + exchange + exchange.conj().T)
    return out
