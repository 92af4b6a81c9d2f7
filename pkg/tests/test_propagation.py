import cmath
import math

import numpy as np
import pytest

from helpers import far_field_geometry, random_geometry

from skybell import (
    Geometry,
    PathAmplitudeSet,
    bell_state,
    correlator,
    PolarizerAxis,
    TwoPhotonPureState,
    entangled_pair_weight,
    hbt_intensity,
    path_amplitudes,
    propagate_pair,
    scenario2_mask,
)


def test_geometry_path_lengths():
    # 3-4-5 triangles on purpose
    geo = Geometry(
        source1=np.array([0.0, 0.0, 3.0]),
        source2=np.array([4.0, 0.0, 3.0]),
        detector_a=np.array([0.0, 0.0, 0.0]),
        detector_b=np.array([4.0, 0.0, 0.0]),
        wavenumber=1.0,
    )
    assert np.allclose(geo.path_lengths(), (3.0, 5.0, 5.0, 3.0))


def test_geometry_validation():
    p = np.zeros(3)
    with pytest.raises(ValueError):
        Geometry(source1=p, source2=[1, 0, 0], detector_a=p, detector_b=[0, 1, 0], wavenumber=1.0)
    with pytest.raises(ValueError):
        Geometry(
            source1=[0, 0, 5], source2=[1, 0, 5], detector_a=p, detector_b=[0, 1, 0],
            wavenumber=0.0,
        )
    with pytest.raises(ValueError):
        Geometry(
            source1=[0, 0, 5], source2=[1, 0, 5], detector_a=p, detector_b=[0, 1], wavenumber=1.0
        )


def test_with_detector_b_moves_only_detector_b():
    geo = far_field_geometry()
    moved = geo.with_detector_b([3.0, 0.0, 0.0])
    assert np.allclose(moved.detector_b, [3.0, 0.0, 0.0])
    assert np.allclose(moved.detector_a, geo.detector_a)
    assert np.allclose(moved.source1, geo.source1)


def test_path_amplitudes_phase_only():
    geo = far_field_geometry()
    amps = path_amplitudes(geo, phi1=0.4, phi2=-1.1)
    r1a, r2a, r1b, r2b = geo.path_lengths()
    k = geo.wavenumber
    assert cmath.isclose(amps.d1a, cmath.exp(1j * (k * r1a + 0.4)), abs_tol=1e-12)
    assert cmath.isclose(amps.d2a, cmath.exp(1j * (k * r2a - 1.1)), abs_tol=1e-12)
    assert cmath.isclose(amps.d1b, cmath.exp(1j * (k * r1b + 0.4)), abs_tol=1e-12)
    for d in (amps.d1a, amps.d2a, amps.d1b, amps.d2b):
        assert abs(abs(d) - 1.0) < 1e-12


def test_path_amplitudes_spherical_falloff():
    geo = far_field_geometry()
    amps = path_amplitudes(geo, normalization="spherical")
    r1a, r2a, r1b, r2b = geo.path_lengths()
    assert abs(abs(amps.d1a) - 1.0 / r1a) < 1e-12
    assert abs(abs(amps.d2b) - 1.0 / r2b) < 1e-12
    with pytest.raises(ValueError):
        path_amplitudes(geo, normalization="cylindrical")


def test_amplitude_set_rejects_non_finite():
    with pytest.raises(ValueError):
        PathAmplitudeSet(d1a=complex("nan"), d2a=1.0, d1b=1.0, d2b=1.0)


def test_loop_product_cancels_source_phases():
    geo = far_field_geometry()
    ref = path_amplitudes(geo).loop_product()
    rng = np.random.default_rng(31)
    for phi1, phi2 in rng.uniform(0.0, 2.0 * math.pi, size=(100, 2)):
        loop = path_amplitudes(geo, phi1=phi1, phi2=phi2).loop_product()
        assert abs(loop - ref) < 1e-12


def test_hbt_intensity_identities():
    ones = PathAmplitudeSet(d1a=1.0, d2a=1.0, d1b=1.0, d2b=1.0)
    assert hbt_intensity(ones) == pytest.approx((4.0, 2.0), abs=1e-15)

    # a quarter-turn loop phase kills the interference term
    quarter = PathAmplitudeSet(d1a=cmath.exp(1j * math.pi / 2), d2a=1.0, d1b=1.0, d2b=1.0)
    total, interference = hbt_intensity(quarter)
    assert abs(interference) < 1e-12
    assert total == pytest.approx(2.0, abs=1e-12)

    # a half-turn loop phase cancels the coincidence rate entirely
    opposite = PathAmplitudeSet(d1a=-1.0, d2a=1.0, d1b=1.0, d2b=1.0)
    assert hbt_intensity(opposite).total == pytest.approx(0.0, abs=1e-12)


def test_hbt_observables_are_phase_invariant():
    rng = np.random.default_rng(32)
    for norm in ("phase-only", "spherical"):
        geo = random_geometry(rng)
        ref = hbt_intensity(path_amplitudes(geo, normalization=norm))
        for phi1, phi2 in rng.uniform(0.0, 2.0 * math.pi, size=(40, 2)):
            got = hbt_intensity(path_amplitudes(geo, phi1=phi1, phi2=phi2, normalization=norm))
            assert abs(got.total - ref.total) < 1e-12
            assert abs(got.interference - ref.interference) < 1e-12


def test_fringe_spacing_matches_far_field_estimate():
    # sources split by 10 at range 1000: fringe period lambda * R / split
    geo = far_field_geometry(split=10.0, distance=1000.0, wavenumber=2.0 * math.pi)
    direction = np.array([1.0, 0.0, 0.0])
    lengths = np.linspace(0.0, 100.0, 1001)
    phases = []
    for L in lengths:
        g = geo.with_detector_b(geo.detector_a + L * direction)
        phases.append(cmath.phase(path_amplitudes(g).loop_product()))
    phases = np.unwrap(phases)
    # the loop phase winds monotonically along the baseline
    assert np.all(np.diff(phases) < 0.0) or np.all(np.diff(phases) > 0.0)
    period = 2.0 * math.pi / abs(phases[-1] - phases[0]) * (lengths[-1] - lengths[0])
    assert period == pytest.approx(100.0, rel=0.02)


def test_entangled_pair_weight_examples():
    ones = PathAmplitudeSet(d1a=1.0, d2a=1.0, d1b=1.0, d2b=1.0)
    assert entangled_pair_weight(ones) == pytest.approx(4.0, abs=1e-15)
    assert entangled_pair_weight(scenario2_mask(ones)) == pytest.approx(1.0, abs=1e-15)
    opposite = PathAmplitudeSet(d1a=-1.0, d2a=1.0, d1b=1.0, d2b=1.0)
    assert entangled_pair_weight(opposite) == pytest.approx(0.0, abs=1e-15)


def test_entangled_pair_weight_is_phase_invariant():
    rng = np.random.default_rng(33)
    geo = random_geometry(rng)
    ref = entangled_pair_weight(path_amplitudes(geo))
    for phi1, phi2 in rng.uniform(0.0, 2.0 * math.pi, size=(50, 2)):
        w = entangled_pair_weight(path_amplitudes(geo, phi1=phi1, phi2=phi2))
        assert abs(w - ref) < 1e-12


def test_scenario2_mask_zeroes_the_cross_legs():
    rng = np.random.default_rng(34)
    amps = path_amplitudes(random_geometry(rng), phi1=0.3, phi2=1.7)
    masked = scenario2_mask(amps)
    assert masked.d2a == 0j and masked.d1b == 0j
    assert masked.d1a == amps.d1a and masked.d2b == amps.d2b
    assert masked.loop_product() == 0j
    assert hbt_intensity(masked).interference == 0.0


def test_propagation_factorizes_out_of_polarization():
    rng = np.random.default_rng(35)
    a = PolarizerAxis(0.25)
    b = PolarizerAxis(1.1)
    for _ in range(30):
        geo = random_geometry(rng)
        norm = "spherical" if rng.uniform() < 0.5 else "phase-only"
        amps = path_amplitudes(geo, normalization=norm)
        for kind in (1, 2):
            source = bell_state(kind)
            out = propagate_pair(source.amp, amps)
            scale = amps.d1a * amps.d2b + amps.d2a * amps.d1b
            assert np.max(np.abs(out - scale * source.amp)) < 1e-12
            # squared norm of the propagated amplitudes is the pair weight
            w = entangled_pair_weight(amps)
            assert abs(float(np.vdot(out, out).real) - w) < 1e-12
            if abs(scale) > 1e-6:
                detected = TwoPhotonPureState(out / np.linalg.norm(out))
                assert abs(correlator(detected, a, b) - correlator(source, a, b)) < 1e-12


def test_propagate_pair_checks_shape():
    amps = PathAmplitudeSet(d1a=1.0, d2a=1.0, d1b=1.0, d2b=1.0)
    with pytest.raises(ValueError):
        propagate_pair(np.zeros(3, dtype=complex), amps)
