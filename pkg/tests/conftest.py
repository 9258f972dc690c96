import numpy as np
import pytest

from qoverlap import CompositeSpace, DensityMatrix, ginibre_mixed


def embed_mode_state(dm: DensityMatrix, cutoff: int) -> DensityMatrix:
    """Pad a single-mode state with zero rows/columns up to a larger cutoff."""
    d = dm.space.dim
    assert d <= cutoff
    m = np.zeros((cutoff, cutoff), dtype=complex)
    m[:d, :d] = dm.mat
    return DensityMatrix(CompositeSpace((cutoff,)), m)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_joint_state(d: int, seed: int, rank: int | None = None) -> DensityMatrix:
    """Random correlated state on two d-dimensional subsystems."""
    return ginibre_mixed(d * d, rank or d * d, seed, dims=(d, d))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
