"""Dense complex linear algebra for density matrices on composite spaces.

Everything here works on plain ``numpy`` arrays of ``complex128``; the thin
dataclasses only pin down the subsystem structure (which tensor factor is
which) and the invariants a state or gate must satisfy.

Index convention: for a :class:`CompositeSpace` with ``dims = (d0, d1, ...)``
the leftmost subsystem is the slowest-varying index, i.e. the basis vector
``|i0, i1, ...>`` sits at flat index ``i0*d1*... + i1*... + ...`` and tensor
products are plain Kronecker products in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerances used throughout: algebraic identities are held to 1e-10,
# eigensolver-derived quantities to 1e-9.
ATOL_ALGEBRA = 1e-10
ATOL_EIG = 1e-9


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def is_hermitian(m: np.ndarray, atol: float = ATOL_ALGEBRA) -> bool:
    """Entrywise check ``max|M - M^dag| <= atol``."""
    return m.shape[0] == m.shape[1] and np.abs(m - dag(m)).max() <= atol


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered list of subsystem dimensions fixing the tensor index layout.

    The ancilla qubit, when present, is always the leftmost factor with
    dimension 2; bosonic modes carry their Fock cutoff as dimension.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) == 0:
            raise ValueError("CompositeSpace needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValueError(f"every subsystem dimension must be >= 2, got {dims}")

    @property
    def dim(self) -> int:
        """Total dimension (product of subsystem dimensions)."""
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def subspace(self, keep: tuple[int, ...]) -> "CompositeSpace":
        return CompositeSpace(tuple(self.dims[k] for k in keep))


def _as_complex_matrix(m) -> np.ndarray:
    mat = np.asarray(m, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat.view(float))):
        raise ValueError("matrix contains non-finite entries")
    return mat


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive operator on a composite space.

    Construction checks Hermiticity and unit trace (cheap, O(d^2)).  The
    positivity floor (min eigenvalue >= -1e-9) costs a full eigensolve and is
    checked by :meth:`validate`, which constructors and tests call on the
    states they hand out.
    """

    space: CompositeSpace
    mat: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.mat)
        object.__setattr__(self, "mat", mat)
        if mat.shape[0] != self.space.dim:
            raise ValueError(
                f"matrix dimension {mat.shape[0]} does not match space {self.space.dims}"
            )
        if np.abs(mat - dag(mat)).max() > ATOL_ALGEBRA:
            raise ValueError("density matrix is not Hermitian within 1e-10")
        if abs(np.trace(mat).real - 1.0) > ATOL_ALGEBRA or abs(np.trace(mat).imag) > ATOL_ALGEBRA:
            raise ValueError("density matrix trace differs from 1 by more than 1e-10")

    @property
    def dim(self) -> int:
        return self.space.dim

    def validate(self) -> "DensityMatrix":
        """Full invariant check including the eigenvalue floor; returns self."""
        w = np.linalg.eigvalsh(self.mat)
        if w.min() < -ATOL_EIG:
            raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < -1e-9")
        return self


@dataclass(frozen=True)
class UnitaryGate:
    """Square complex matrix tagged with the composite space it acts on."""

    space: CompositeSpace
    mat: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.mat)
        object.__setattr__(self, "mat", mat)
        if mat.shape[0] != self.space.dim:
            raise ValueError(
                f"matrix dimension {mat.shape[0]} does not match space {self.space.dims}"
            )

    @property
    def dim(self) -> int:
        return self.space.dim

    def validate(self, atol: float = ATOL_ALGEBRA) -> "UnitaryGate":
        """Check unitarity ``max|U^dag U - I| <= atol``; returns self."""
        err = np.abs(dag(self.mat) @ self.mat - np.eye(self.dim)).max()
        if err > atol:
            raise ValueError(f"gate is not unitary: max|U^dag U - I| = {err:.3e}")
        return self


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Rebuild ``sum_k w_k v_k v_k^dag``."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dag(v)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of two or more matrices, leftmost factor slowest."""
    if len(ops) < 2:
        raise ValueError("tensor needs at least two factors")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def tensor_states(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Product state of two density matrices, subsystem lists concatenated."""
    return DensityMatrix(CompositeSpace(a.space.dims + b.space.dims), tensor(a.mat, b.mat))


def as_single_subsystem(rho: DensityMatrix) -> DensityMatrix:
    """Forget internal tensor structure: same matrix on a one-subsystem space."""
    return DensityMatrix(CompositeSpace((rho.space.dim,)), rho.mat)


def _partial_trace_mat(mat: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    n = len(dims)
    tensor_form = mat.reshape(dims + dims)
    remaining = list(range(n))
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        pos = remaining.index(ax)
        tensor_form = np.trace(tensor_form, axis1=pos, axis2=pos + len(remaining))
        remaining.pop(pos)
    d = int(np.prod([dims[k] for k in keep]))
    return tensor_form.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : DensityMatrix
        State on a composite space.
    keep : int or iterable of int
        Indices of the subsystems to retain, in their original order.

    Returns
    -------
    DensityMatrix
        Reduced state on the kept subsystems; the trace is preserved.
    """
    if isinstance(keep, int):
        keep = (keep,)
    keep = tuple(sorted(set(int(k) for k in keep)))
    n = rho.space.n_subsystems
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"subsystem index out of range for {n} subsystems: {keep}")
    reduced = _partial_trace_mat(rho.mat, rho.space.dims, keep)
    reduced = 0.5 * (reduced + dag(reduced))
    return DensityMatrix(rho.space.subspace(keep), reduced)


def partial_transpose(rho: DensityMatrix, subsystem: int) -> np.ndarray:
    """Transpose the indices of one subsystem only.

    With row multi-index ``(.., i_k, ..)`` and column multi-index
    ``(.., j_k, ..)``, the entry at ``(i_k, j_k)`` moves to ``(j_k, i_k)`` for
    the chosen subsystem ``k`` while all other indices stay put.  The result
    is Hermitian with the same trace but may fail to be positive, which is
    exactly what the entanglement witness exploits; it is therefore returned
    as a bare matrix, not a DensityMatrix.
    """
    n = rho.space.n_subsystems
    if subsystem < 0 or subsystem >= n:
        raise ValueError(f"subsystem index {subsystem} out of range for {n} subsystems")
    dims = rho.space.dims
    tensor_form = rho.mat.reshape(dims + dims)
    swapped = np.swapaxes(tensor_form, subsystem, subsystem + n)
    return np.ascontiguousarray(swapped.reshape(rho.space.dim, rho.space.dim))


def spectral_decompose(m: np.ndarray, atol: float = ATOL_ALGEBRA) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises ``ValueError`` if the input is not Hermitian within ``atol``.
    Degenerate eigenvalues may come with any orthonormal basis of their
    eigenspace; downstream quantities are basis independent.
    """
    m = _as_complex_matrix(m)
    if not is_hermitian(m, atol):
        raise ValueError("spectral_decompose requires a Hermitian matrix")
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(np.ascontiguousarray(w[order]), np.ascontiguousarray(v[:, order]))


def exp_unitary(h: np.ndarray, t: float, space: CompositeSpace | None = None) -> UnitaryGate:
    """Unitary ``exp(-i h t)`` of a Hermitian generator, via eigendecomposition.

    ``h`` is given in angular-frequency units (hbar absorbed), ``t`` in the
    matching reciprocal units, so only the product matters.  The sign
    convention is ``exp(-i h t)``: evolving ``sigma_z`` for time ``pi`` gives
    ``diag(exp(-i pi), exp(+i pi)) = -I``.

    Parameters
    ----------
    h : ndarray
        Hermitian generator.
    t : float
        Evolution time.
    space : CompositeSpace, optional
        Space tag for the returned gate; defaults to a single subsystem of
        the matrix dimension.
    """
    dec = spectral_decompose(h)
    phases = np.exp(-1j * dec.eigenvalues * float(t))
    u = (dec.eigenvectors * phases) @ dag(dec.eigenvectors)
    if space is None:
        space = CompositeSpace((h.shape[0],))
    return UnitaryGate(space, u)
