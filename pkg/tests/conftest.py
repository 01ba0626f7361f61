"""Shared helpers for the test suite.

Most tests run on small frames (n_f <= 8, L <= 3) so the whole suite stays
fast; the `kind` shorthand covers every scheme/decoupling combination the
engine supports.
"""

import numpy as np
import pytest

from isacbounds.model import Decoupling, ModulationConfig, Scheme
from isacbounds.experiments import reference_scenario


def make_modulation(kind: str, n_f: int) -> ModulationConfig:
    """Build a ModulationConfig from a compact label.

    Kinds: sensing, ppm-raw, bpsk-raw, ppm-pilot, bpsk-pilot, ppm-diff.
    Pilot kinds split the frame evenly (requires n_f >= 2).
    """
    if kind == "sensing":
        return ModulationConfig(scheme=Scheme.SENSING)
    if kind == "ppm-raw":
        return ModulationConfig(scheme=Scheme.PPM, d_data=n_f)
    if kind == "bpsk-raw":
        return ModulationConfig(scheme=Scheme.BPSK, d_data=n_f)
    if kind == "ppm-pilot":
        return ModulationConfig(scheme=Scheme.PPM, decoupling=Decoupling.PILOT,
                                p_pilots=n_f // 2, d_data=n_f - n_f // 2)
    if kind == "bpsk-pilot":
        return ModulationConfig(scheme=Scheme.BPSK, decoupling=Decoupling.PILOT,
                                p_pilots=n_f // 2, d_data=n_f - n_f // 2)
    if kind == "ppm-diff":
        return ModulationConfig(scheme=Scheme.PPM, decoupling=Decoupling.DIFFERENTIAL,
                                d_data=n_f)
    raise ValueError(f"unknown modulation kind {kind!r}")


ALL_KINDS = ("sensing", "ppm-raw", "bpsk-raw", "ppm-pilot", "bpsk-pilot", "ppm-diff")


@pytest.fixture
def ref8():
    """Reference scenario: n_f=8, three paths at 20/40/60 ns, 0 dB per path."""
    return reference_scenario()


@pytest.fixture
def ref8_single():
    """Reference scenario with a single path (L=1)."""
    return reference_scenario(n_paths=1)


def sym_eigs(mat: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (mat + mat.T))
