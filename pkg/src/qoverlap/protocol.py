"""End-to-end execution of the ancilla-interferometric overlap measurement.

The device prepares the ancilla in |up>, applies the ancilla rotation, the
phase gate with phase psi, a controlled mode swap (ideal, gate-composed, or
Hamiltonian-compiled), a final ancilla rotation, and reads out the ancilla.

Every supported controlled step has the exact form ``P_up (x) W + P_dn (x) I``
with a mode-only unitary W (W is the exact flip for the ideal device and the
coupler/phase/coupler sandwich otherwise).  Commuting the ancilla gates
through that structure collapses the whole sequence into two Kraus operators
acting on the modes alone,

    M_up(psi) = (exp(i psi) W - I) / 2,
    M_dn(psi) = (exp(i psi) W + I) / 2,

which is how the engine evaluates the circuit: probabilities and
post-measurement states come from these operators, so the only heavy work is
applying W to the input state once per run.  A test cross-checks this
factored evaluation against literal full-space matrix conjugation.

Consequences used throughout (W unitary, rho Hermitian, Tr rho = 1):

* p_dn(psi) = (1 + Re[exp(i psi) Tr(W rho)]) / 2 and p_up + p_dn = 1.
* For the ideal W = flip, Tr(W rho) is real, the fringe is a pure cosine and
  its contrast (visibility) is |Tr(rho W)|.
* The unconditional post-state (ancilla traced out) is (rho + W rho W^dag)/2,
  independent of psi.

Detector convention: with the asymmetric ancilla rotation used here, the
"dn" detector carries the (1 + cos)-type fringe for positive overlap; only
convention-free quantities (visibility, calibrated probability difference)
are exposed by the high-level pipelines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import gates
from .linalg import CompositeSpace, DensityMatrix, as_single_subsystem, dag, tensor, tensor_states

if TYPE_CHECKING:  # pragma: no cover
    from .dynamics import HamiltonianSpec

# Conditioning probabilities below this are reported as undefined outcomes.
MIN_CONDITION_PROB = 1e-12


@dataclass(frozen=True)
class DeviceMode:
    """Which realization of the controlled swap the device runs.

    ``ideal`` uses the exact finite-dimensional controlled swap, ``physical``
    composes coupler / controlled phase / inverse coupler from the gate
    module, and ``hamiltonian`` compiles one of the gates from an interaction
    Hamiltonian carried in ``hamiltonian``.
    """

    kind: str
    hamiltonian: "HamiltonianSpec | None" = None

    def __post_init__(self):
        if self.kind not in ("ideal", "physical", "hamiltonian"):
            raise ValueError(f"unknown device mode kind {self.kind!r}")
        if (self.kind == "hamiltonian") != (self.hamiltonian is not None):
            raise ValueError("hamiltonian mode requires a HamiltonianSpec, others none")


IDEAL = DeviceMode("ideal")
PHYSICAL = DeviceMode("physical")


def hamiltonian_mode(spec: "HamiltonianSpec") -> DeviceMode:
    return DeviceMode("hamiltonian", spec)


@dataclass(frozen=True)
class PhaseResult:
    """Single-phase device output: detector probabilities and post-states."""

    psi: float
    p_up: float
    p_down: float
    post_up: DensityMatrix | None
    post_down: DensityMatrix | None
    post_unconditional: DensityMatrix


@dataclass(frozen=True)
class ProtocolRun:
    """Phase sweep summary: fringes, extracted visibility, calibrated delta."""

    phases: np.ndarray
    p_up: np.ndarray
    p_down: np.ndarray
    visibility: float
    delta: float
    post_state_unconditional: DensityMatrix


_SWAP = object()  # sentinel: ideal flip, applied by index reshuffling


def _require_mode_pair(space: CompositeSpace) -> int:
    if space.n_subsystems != 2:
        raise ValueError(f"device input must live on two modes, got dims {space.dims}")
    d0, d1 = space.dims
    if d0 != d1:
        raise ValueError(f"both modes must share one cutoff, got {d0} and {d1}")
    return d0


def _swap_left(mat: np.ndarray, d: int) -> np.ndarray:
    """flip @ mat on a (d*d, d*d) matrix, by permuting row factors."""
    return np.ascontiguousarray(
        mat.reshape(d, d, d * d).transpose(1, 0, 2).reshape(d * d, d * d)
    )


def _swap_both(mat: np.ndarray, d: int) -> np.ndarray:
    """flip @ mat @ flip, permuting row and column factors."""
    return np.ascontiguousarray(
        mat.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    )


def _mode_swap_operator(mode: DeviceMode, space: CompositeSpace):
    """Resolve the mode-side unitary W of the controlled step.

    Returns the sentinel ``_SWAP`` for the ideal device, otherwise a dense
    (d^2, d^2) matrix.  The controlled phase always targets mode 1 (module
    docstring of :mod:`qoverlap.gates`).
    """
    d = _require_mode_pair(space)
    if mode.kind == "ideal":
        return _SWAP
    parity_on_1 = tensor(np.eye(d), gates.number_phase(math.pi, d).mat)
    if mode.kind == "physical":
        b = gates.beamsplitter(d).mat
        return dag(b) @ parity_on_1 @ b
    # Hamiltonian-compiled gates; import deferred to avoid a cycle at import
    # time (dynamics imports this module for the result types).
    from . import dynamics

    spec = mode.hamiltonian
    if spec.cutoff != d:
        raise ValueError(f"Hamiltonian cutoff {spec.cutoff} does not match mode cutoff {d}")
    if spec.kind == "linear_coupling":
        b = dynamics.realize_gate(spec).mat
        return dag(b) @ parity_on_1 @ b
    if spec.kind == "dispersive_cps":
        phase = tensor(np.eye(d), dynamics.controlled_phase_branch(spec))
        b = gates.beamsplitter(d).mat
        return dag(b) @ phase @ b
    raise ValueError(f"device mode does not support Hamiltonian kind {spec.kind!r}")


def _is_ion_mode(mode: DeviceMode) -> bool:
    return mode.kind == "hamiltonian" and mode.hamiltonian.kind == "ion_qnd"


class _DeviceKernel:
    """Factored evaluation of one device run around a fixed W (see module doc)."""

    def __init__(self, rho_modes: DensityMatrix, w):
        self.rho = rho_modes
        self.d = _require_mode_pair(rho_modes.space)
        self.w = w
        self._w_rho = None
        self._w_rho_w = None

    def w_rho(self) -> np.ndarray:
        if self._w_rho is None:
            if self.w is None:
                self._w_rho = self.rho.mat
            elif self.w is _SWAP:
                self._w_rho = _swap_left(self.rho.mat, self.d)
            else:
                self._w_rho = self.w @ self.rho.mat
        return self._w_rho

    def w_rho_w(self) -> np.ndarray:
        if self._w_rho_w is None:
            if self.w is None:
                self._w_rho_w = self.rho.mat
            elif self.w is _SWAP:
                self._w_rho_w = _swap_both(self.rho.mat, self.d)
            else:
                self._w_rho_w = self.w_rho() @ dag(self.w)
        return self._w_rho_w

    def fringe_coefficient(self) -> complex:
        """Tr(W rho); real whenever W is Hermitian."""
        return complex(np.trace(self.w_rho()))

    def probabilities(self, psi: float) -> tuple[float, float]:
        if self.w is None or self.w is _SWAP:
            t_wrw = 1.0
        else:
            t_wrw = float(np.sum(self.w_rho() * self.w.conj()).real)
        cross = (np.exp(1j * psi) * self.fringe_coefficient()).real
        p_up = 0.25 * (t_wrw + 1.0 - 2.0 * cross)
        p_dn = 0.25 * (t_wrw + 1.0 + 2.0 * cross)
        return max(p_up, 0.0), max(p_dn, 0.0)

    def post_unconditional(self) -> DensityMatrix:
        unc = 0.5 * (self.rho.mat + self.w_rho_w())
        return DensityMatrix(self.rho.space, 0.5 * (unc + dag(unc)))

    def phase_result(self, psi: float) -> PhaseResult:
        rho = self.rho.mat
        wr = self.w_rho()
        wrw = self.w_rho_w()
        phase = np.exp(1j * psi)
        cross = phase * wr
        cross = cross + dag(cross)
        num_up = 0.25 * (wrw + rho - cross)
        num_dn = 0.25 * (wrw + rho + cross)
        p_up = float(np.trace(num_up).real)
        p_dn = float(np.trace(num_dn).real)

        def _conditional(num: np.ndarray, p: float) -> DensityMatrix | None:
            if p <= MIN_CONDITION_PROB:
                return None
            m = num / p
            return DensityMatrix(self.rho.space, 0.5 * (m + dag(m)))

        return PhaseResult(
            psi=float(psi),
            p_up=max(p_up, 0.0),
            p_down=max(p_dn, 0.0),
            post_up=_conditional(num_up, p_up),
            post_down=_conditional(num_dn, p_dn),
            post_unconditional=self.post_unconditional(),
        )


def fourier_coefficient(values: np.ndarray, phases: np.ndarray) -> complex:
    """First-harmonic coefficient ``(4/K) sum_k values_k exp(-i psi_k)``.

    For samples of ``(1 + Re[exp(i psi) c]) / 2`` on a uniform grid of K >= 3
    phases, this returns ``c`` exactly.
    """
    k = len(phases)
    return complex((4.0 / k) * np.sum(np.asarray(values) * np.exp(-1j * np.asarray(phases))))


def visibility_minmax(p_values: np.ndarray) -> float:
    """Literal fringe contrast (p_max - p_min)/(p_max + p_min), for cross-checks."""
    p = np.asarray(p_values, dtype=float)
    hi, lo = p.max(), p.min()
    if hi + lo == 0.0:
        return 0.0
    return float((hi - lo) / (hi + lo))


def _uniform_phases(phase_count: int) -> np.ndarray:
    if phase_count < 3:
        raise ValueError("phase sweep needs at least 3 phases")
    return 2.0 * math.pi * np.arange(phase_count) / phase_count


def run_device(rho_joint: DensityMatrix, psi: float, mode: DeviceMode = IDEAL) -> PhaseResult:
    """Run the device once at ancilla phase ``psi``.

    Returns detector probabilities, the conditional post-states (None when
    the outcome probability is below 1e-12), and the unconditional
    post-state of the modes.
    """
    if _is_ion_mode(mode):
        from . import dynamics

        return dynamics.ion_protocol_run(rho_joint, psi, mode.hamiltonian)
    kernel = _DeviceKernel(rho_joint, _mode_swap_operator(mode, rho_joint.space))
    return kernel.phase_result(psi)


def calibrate_phase(rho_joint: DensityMatrix, mode: DeviceMode = IDEAL, phase_count: int = 8) -> float:
    """Phase at which the no-controlled-swap interferometer gives p_up = 1.

    Runs the device with the controlled step replaced by the identity (the
    two couplers cancel exactly), sweeps the grid, and returns the exact
    maximizer of the resulting pure cosine fringe, obtained as minus the
    argument of its first-harmonic Fourier coefficient.  The fringe depends
    only on the ancilla gates, so the result is state independent; the same
    holds for the rotated-basis ion layout, whose no-gate fringe is the same
    cosine.
    """
    phases = _uniform_phases(phase_count)
    kernel = _DeviceKernel(rho_joint, None)
    p_up = np.array([kernel.probabilities(psi)[0] for psi in phases])
    coeff = fourier_coefficient(p_up, phases)
    return float((-np.angle(coeff)) % (2.0 * math.pi))


def sweep_visibility(
    rho_joint: DensityMatrix, phase_count: int = 8, mode: DeviceMode = IDEAL
) -> ProtocolRun:
    """Sweep a uniform phase grid and extract visibility and delta.

    The visibility is the magnitude of the first-harmonic Fourier
    coefficient of the p_down fringe, which reproduces the contrast
    (p_max - p_min)/(p_max + p_min) exactly for noiseless cosine fringes on
    any uniform grid of at least 3 phases.  ``delta`` is p_up - p_down at
    the calibrated phase, and the unconditional post-state is taken from the
    calibrated-phase run (it is phase independent).
    """
    phases = _uniform_phases(phase_count)
    psi_star = calibrate_phase(rho_joint, mode, phase_count)
    if _is_ion_mode(mode):
        results = [run_device(rho_joint, psi, mode) for psi in phases]
        p_up = np.array([r.p_up for r in results])
        p_dn = np.array([r.p_down for r in results])
        star = run_device(rho_joint, psi_star, mode)
        delta = star.p_up - star.p_down
        post = star.post_unconditional
    else:
        kernel = _DeviceKernel(rho_joint, _mode_swap_operator(mode, rho_joint.space))
        pairs = [kernel.probabilities(psi) for psi in phases]
        p_up = np.array([p[0] for p in pairs])
        p_dn = np.array([p[1] for p in pairs])
        star_up, star_dn = kernel.probabilities(psi_star)
        delta = star_up - star_dn
        post = kernel.post_unconditional()
    visibility = abs(fourier_coefficient(p_dn, phases))
    return ProtocolRun(
        phases=phases,
        p_up=p_up,
        p_down=p_dn,
        visibility=float(visibility),
        delta=float(delta),
        post_state_unconditional=post,
    )


def witness_delta(rho_joint: DensityMatrix, mode: DeviceMode = IDEAL) -> float:
    """Calibrated probability difference p_up - p_down.

    Negative values certify entanglement of the two-mode input; for a
    product input this equals the overlap of the factors and is never
    negative.
    """
    psi_star = calibrate_phase(rho_joint, mode)
    result = run_device(rho_joint, psi_star, mode)
    return result.p_up - result.p_down


def sample_shots(run: ProtocolRun, shots_per_phase: int, seed: int) -> np.ndarray:
    """Simulate finite counting statistics for a swept run.

    For each phase k an independent Philox stream keyed by (seed, k) draws
    ``shots_per_phase`` Bernoulli trials with success probability p_up; the
    per-phase keying makes the result independent of evaluation order.

    Returns an integer array of shape (K, 2) with columns (count_up,
    count_down).
    """
    if shots_per_phase < 1:
        raise ValueError("shots_per_phase must be at least 1")
    key = int(seed) % 2**64
    counts = np.empty((len(run.phases), 2), dtype=np.int64)
    for k, p in enumerate(run.p_up):
        rng = np.random.Generator(np.random.Philox(key=[key, k]))
        up = int(rng.binomial(shots_per_phase, min(max(float(p), 0.0), 1.0)))
        counts[k, 0] = up
        counts[k, 1] = shots_per_phase - up
    return counts


def estimate_visibility(counts: np.ndarray, phases: np.ndarray) -> tuple[float, float]:
    """Visibility estimate and standard error from per-phase counts.

    Applies the same first-harmonic estimator as :func:`sweep_visibility` to
    the empirical p_down frequencies.  The standard error propagates the
    binomial variance of each frequency through the estimator (delta
    method); at a fringe null, where the gradient degenerates, a
    conservative isotropic scale is reported instead.  ``counts`` may be
    float-valued frequencies; rows must sum to a positive total.
    """
    counts = np.asarray(counts, dtype=float)
    phases = np.asarray(phases, dtype=float)
    k = len(phases)
    if k < 3 or counts.shape != (k, 2):
        raise ValueError("need counts of shape (K, 2) for K >= 3 phases")
    spacing = np.diff(phases)
    if not np.allclose(spacing, 2.0 * math.pi / k, atol=1e-9):
        raise ValueError("phase grid is not uniform")
    totals = counts.sum(axis=1)
    if np.any(totals <= 0):
        raise ValueError("every phase needs a positive total count")
    p_dn = counts[:, 1] / totals
    coeff = fourier_coefficient(p_dn, phases)
    v_hat = abs(coeff)
    var_p = p_dn * (1.0 - p_dn) / totals
    if v_hat > 1e-12:
        grad = (4.0 / k) * (np.conj(coeff) * np.exp(-1j * phases)).real / v_hat
        var_v = float(np.sum(grad**2 * var_p))
    else:
        var_v = float((8.0 / k**2) * np.sum(var_p))
    return float(v_hat), math.sqrt(var_v)


def repeat_measurement_check(
    rho_a: DensityMatrix, rho_b: DensityMatrix, mode: DeviceMode = IDEAL
) -> tuple[float, float]:
    """Visibility before and after one measurement pass.

    The first sweep runs on ``rho_a (x) rho_b``; the second runs on the
    unconditional post-state of the first.  The measurement is nondemolition
    for the overlap, so both values agree in ideal mode.
    """
    joint = tensor_states(as_single_subsystem(rho_a), as_single_subsystem(rho_b))
    first = sweep_visibility(joint, mode=mode)
    second = sweep_visibility(first.post_state_unconditional, mode=mode)
    return first.visibility, second.visibility
