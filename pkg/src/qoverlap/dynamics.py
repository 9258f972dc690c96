"""Gate realization by time evolution under interaction Hamiltonians.

Three effective interactions are supported, each with its prescribed
interaction time (couplings are angular frequencies, hbar absorbed, so only
the dimensionless coupling*time product matters):

* ``linear_coupling``: H = i*xi*(a0^dag a1 - a1^dag a0) on two modes; at
  t = pi/(4 xi) this compiles the 50:50 coupler.
* ``dispersive_cps``: H = kappa * n (x) |up><up| on ancilla + one mode; at
  t = pi/kappa it compiles the controlled phase shift (exp(-i pi n) and
  exp(+i pi n) coincide on integer spectra).
* ``ion_qnd``: H = omega * n * sigma_x on ancilla + one vibrational mode; at
  t = pi/(2 omega) the evolution is diagonal in the sigma_x eigenbasis with
  branch phases exp(-/+ i pi n / 2).  Following it with a pi/2-per-photon
  phase on the same mode turns the pair exactly into a controlled phase
  shift whose active ancilla state is |->; the modified protocol therefore
  prepares and reads the ancilla in the |+/-> basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gates
from .linalg import (
    CompositeSpace,
    DensityMatrix,
    UnitaryGate,
    _partial_trace_mat,
    dag,
    exp_unitary,
    tensor,
)
from .protocol import MIN_CONDITION_PROB, PhaseResult

_KINDS = ("linear_coupling", "dispersive_cps", "ion_qnd")


@dataclass(frozen=True)
class HamiltonianSpec:
    """One interaction Hamiltonian plus cutoff and interaction time."""

    kind: str
    coupling: float
    cutoff: int
    interaction_time: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.coupling <= 0:
            raise ValueError("coupling constant must be positive")
        if self.interaction_time <= 0:
            raise ValueError("interaction time must be positive")
        if self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")


def linear_coupling(xi: float, cutoff: int, interaction_time: float | None = None) -> HamiltonianSpec:
    """Mode-mixing interaction; default time pi/(4 xi) gives the 50:50 coupler."""
    t = math.pi / (4.0 * xi) if interaction_time is None else interaction_time
    return HamiltonianSpec("linear_coupling", xi, cutoff, t)


def dispersive_cps(kappa: float, cutoff: int, interaction_time: float | None = None) -> HamiltonianSpec:
    """Dispersive ancilla-mode interaction; default time pi/kappa gives the CPS."""
    t = math.pi / kappa if interaction_time is None else interaction_time
    return HamiltonianSpec("dispersive_cps", kappa, cutoff, t)


def ion_qnd(omega: float, cutoff: int, interaction_time: float | None = None) -> HamiltonianSpec:
    """Ion QND-type interaction; default time pi/(2 omega)."""
    t = math.pi / (2.0 * omega) if interaction_time is None else interaction_time
    return HamiltonianSpec("ion_qnd", omega, cutoff, t)


def cavity_dispersive_rate(rabi_coupling: float, detuning: float) -> float:
    """Effective dispersive rate from vacuum Rabi coupling and detuning.

    Taken as an opaque input relation (rate = coupling / detuning); the
    validity conditions of the dispersive limit are not modeled here.
    """
    if detuning == 0:
        raise ValueError("detuning must be nonzero")
    return rabi_coupling / detuning


def build_hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    """Hermitian generator of the interaction, in angular-frequency units.

    Spaces: two modes for ``linear_coupling``; (ancilla, mode) for
    ``dispersive_cps`` and ``ion_qnd`` with the ancilla leftmost.
    """
    d = spec.cutoff
    n = gates.number_op(d)
    if spec.kind == "linear_coupling":
        a = gates.annihilation(d)
        ad = dag(a)
        return 1j * spec.coupling * (tensor(ad, a) - tensor(a, ad))
    if spec.kind == "dispersive_cps":
        p_up = np.diag([1.0, 0.0]).astype(complex)
        return spec.coupling * tensor(p_up, n)
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return spec.coupling * tensor(sigma_x, n)


def realize_gate(spec: HamiltonianSpec) -> UnitaryGate:
    """Evolve under the interaction for its prescribed time.

    With the default times this reproduces the ideal gates exactly: the
    50:50 coupler from ``linear_coupling`` and the controlled phase shift
    from ``dispersive_cps``.
    """
    h = build_hamiltonian(spec)
    d = spec.cutoff
    space = CompositeSpace((d, d) if spec.kind == "linear_coupling" else (2, d))
    return exp_unitary(h, spec.interaction_time, space)


def controlled_phase_branch(spec: HamiltonianSpec, atol: float = 1e-12) -> np.ndarray:
    """Mode unitary applied on the active ancilla branch of a realized gate.

    Valid for ``dispersive_cps`` specs: the realized gate is block diagonal
    over the ancilla with the |dn> block equal to the identity; the |up>
    block is returned.  Raises if the gate is not of that controlled form.
    """
    if spec.kind != "dispersive_cps":
        raise ValueError("controlled-form extraction applies to dispersive_cps gates")
    g = realize_gate(spec).mat
    d = spec.cutoff
    if np.abs(g[:d, d:]).max() > atol or np.abs(g[d:, :d]).max() > atol:
        raise ValueError("realized gate is not ancilla-block-diagonal")
    if np.abs(g[d:, d:] - np.eye(d)).max() > atol:
        raise ValueError("realized gate acts nontrivially on the passive branch")
    return np.ascontiguousarray(g[:d, :d])


def _plus_minus_vectors() -> tuple[np.ndarray, np.ndarray]:
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
    minus = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2)
    return plus, minus


def ion_protocol_run(rho_joint: DensityMatrix, psi: float, spec: HamiltonianSpec) -> PhaseResult:
    """Run the trapped-ion variant of the device at one ancilla phase.

    Layout differences from the generic device, all forced by the
    interaction being diagonal in the sigma_x eigenbasis:

    * the ancilla is prepared and measured in the |+/-> basis, with |->
      playing the role the |up> state plays in the generic device (it is the
      branch on which the compiled gate acts);
    * the ancilla rotation and phase gate are the generic ones conjugated
      into that basis;
    * the controlled step is the compiled ion gate followed by a
      pi/2-per-photon phase on the driven (x) mode, which together equal a
      controlled phase shift on that mode;
    * because the driven mode is mode 0, the two mode couplers are applied
      in the opposite order (inverse coupler first), which is the
      orientation that closes the interferometer exactly for a mode-0 target.

    Probabilities are reported in the generic labels: p_up is the |->
    detector, p_down the |+> detector.  On states supported in the safe
    sector (total photon number <= cutoff-1) the outputs match the ideal
    device exactly.
    """
    if spec.kind != "ion_qnd":
        raise ValueError("ion_protocol_run requires an ion_qnd Hamiltonian spec")
    dims = rho_joint.space.dims
    if len(dims) != 2 or dims[0] != dims[1]:
        raise ValueError(f"device input must live on two equal modes, got {dims}")
    d = dims[0]
    if spec.cutoff != d:
        raise ValueError(f"Hamiltonian cutoff {spec.cutoff} does not match mode cutoff {d}")

    plus, minus = _plus_minus_vectors()
    p_plus = np.outer(plus, plus.conj())
    p_minus = np.outer(minus, minus.conj())

    # Generic ancilla gates conjugated into the |+/-> dictionary (|-> <-> up).
    basis_map = np.column_stack([minus, plus])  # maps (up, dn) -> (-, +)
    rot = basis_map @ gates.hadamard().mat @ dag(basis_map)
    phase_gate = basis_map @ gates.phase_shift(psi).mat @ dag(basis_map)

    ident_modes = np.eye(d * d)
    coupler = gates.beamsplitter(d).mat
    ion_gate_full = tensor(realize_gate(spec).mat, np.eye(d))
    phase_fix = tensor(np.eye(2), tensor(gates.number_phase(math.pi / 2, d).mat, np.eye(d)))

    u_total = (
        tensor(rot, ident_modes)
        @ tensor(np.eye(2), coupler)
        @ phase_fix
        @ ion_gate_full
        @ tensor(np.eye(2), dag(coupler))
        @ tensor(phase_gate, ident_modes)
        @ tensor(rot, ident_modes)
    )

    rho_total = tensor(p_minus, rho_joint.mat)
    out = u_total @ rho_total @ dag(u_total)

    full_dims = (2, d, d)
    proj_active = tensor(p_minus, ident_modes)
    proj_passive = tensor(p_plus, ident_modes)
    p_up = float(np.trace(proj_active @ out).real)
    p_dn = float(np.trace(proj_passive @ out).real)

    def _conditional(proj: np.ndarray, p: float) -> DensityMatrix | None:
        if p <= MIN_CONDITION_PROB:
            return None
        m = _partial_trace_mat(proj @ out @ proj, full_dims, (1, 2)) / p
        return DensityMatrix(rho_joint.space, 0.5 * (m + dag(m)))

    unc = _partial_trace_mat(out, full_dims, (1, 2))
    post_unc = DensityMatrix(rho_joint.space, 0.5 * (unc + dag(unc)))
    return PhaseResult(
        psi=float(psi),
        p_up=max(p_up, 0.0),
        p_down=max(p_dn, 0.0),
        post_up=_conditional(proj_active, p_up),
        post_down=_conditional(proj_passive, p_dn),
        post_unconditional=post_unc,
    )
