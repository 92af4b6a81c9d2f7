"""Shared builders for the test suite."""

import math

import numpy as np

from skybell import BackgroundSpec, ExperimentConfig, Geometry, PolarizerAxis


def far_field_geometry(split=10.0, distance=1000.0, baseline=2.0, wavenumber=2.0 * math.pi):
    """Two sources high above two detectors, symmetric about the z axis."""
    return Geometry(
        source1=np.array([-split / 2.0, 0.0, distance]),
        source2=np.array([split / 2.0, 0.0, distance]),
        detector_a=np.array([-baseline / 2.0, 0.0, 0.0]),
        detector_b=np.array([baseline / 2.0, 0.0, 0.0]),
        wavenumber=wavenumber,
    )


def random_geometry(rng):
    """Random positions with the sources pushed well away from the detectors."""
    while True:
        pts = rng.uniform(-3.0, 3.0, size=(4, 3))
        pts[:2, 2] += 20.0
        try:
            return Geometry(
                source1=pts[0],
                source2=pts[1],
                detector_a=pts[2],
                detector_b=pts[3],
                wavenumber=float(rng.uniform(0.5, 8.0)),
            )
        except ValueError:
            continue


def make_config(
    scenario="II",
    bell_kind=1,
    fraction=0.3,
    alpha1=1.0,
    alpha2=1.0,
    axis1=0.0,
    axis2=0.0,
    geometry=None,
    normalization="phase-only",
    **weights,
):
    background = BackgroundSpec(
        axis1=PolarizerAxis(axis1),
        axis2=PolarizerAxis(axis2),
        alpha1=alpha1,
        alpha2=alpha2,
        **weights,
    )
    return ExperimentConfig(
        scenario=scenario,
        bell_kind=bell_kind,
        entangled_fraction=fraction,
        background=background,
        geometry=geometry if geometry is not None else far_field_geometry(),
        propagator_normalization=normalization,
    )
