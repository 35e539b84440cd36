"""Simulation of the N-clock-qubit + head-qubit register.

Two interchangeable backends:

* :class:`DenseState` holds the full 2^(N+1) amplitude vector. Index
  convention: ``index = p + 2^N * h`` with ``p = sum_j p_j 2^j`` the
  binary value of the clock register and ``h`` in {0: down, 1: up} the
  head qubit. Exact, but capped at small N.

* :class:`BranchState` stores a sum of product states ("branches"), one
  complex amplitude times N clock 2-vectors times one head 2-vector.
  Every factor is kept unit-norm; the amplitude carries all scale. The
  entangling protocol only ever needs two branches, so a full run costs
  O(N) and the 10^3..10^4 atom regime is simulable.

Gates are plain tuples, e.g. ``("clock_rotation", U)``; see
:func:`apply_gate`. All gate methods mutate in place and return the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ParameterError

DENSE_ATOM_CAP = 14        # 2^15 amplitudes at the default cap
BRANCH_PRUNE_TOL = 1e-14   # branches below this amplitude are dropped
BRANCH_ALIGN_TOL = 1e-14   # head component treated as zero below this
BRANCH_MERGE_MAX_RANK = 64  # skip O(rank^2 N) merging above this rank
_UNITARY_TOL = 1e-12

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)

PROTOCOL_CHECKPOINTS = ("superposition", "entangled", "ghz", "evolved", "final")


def _check_unitary(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ParameterError(f"expected a 2x2 matrix, got shape {m.shape}")
    defect = np.abs(m.conj().T @ m - np.eye(2)).max()
    if defect > _UNITARY_TOL:
        raise ParameterError(f"matrix is not unitary (defect {defect:.3e})")
    return m


class DenseState:
    """Full state vector of N clock qubits and the head qubit."""

    backend = "dense"

    def __init__(self, n_atoms: int, cap: int = DENSE_ATOM_CAP):
        if n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {n_atoms}")
        if n_atoms > cap:
            raise CapacityError(
                f"dense backend capped at {cap} atoms "
                f"({2 ** (cap + 1)} amplitudes); got n_atoms={n_atoms}"
            )
        self.n_atoms = n_atoms
        self.amplitudes = np.zeros(2 ** (n_atoms + 1), dtype=complex)
        self.amplitudes[0] = 1.0

    def copy(self) -> "DenseState":
        new = object.__new__(DenseState)
        new.n_atoms = self.n_atoms
        new.amplitudes = self.amplitudes.copy()
        return new

    def _tensor(self) -> np.ndarray:
        # Axis 0 is the head; axis a in 1..N is clock bit j = N - a.
        return self.amplitudes.reshape([2] * (self.n_atoms + 1))

    def _apply_on_axis(self, matrix: np.ndarray, axis: int):
        psi = self._tensor()
        psi = np.tensordot(matrix, psi, axes=([1], [axis]))
        psi = np.moveaxis(psi, 0, axis)
        self.amplitudes = np.ascontiguousarray(psi).reshape(-1)

    def apply_clock_rotation(self, matrix) -> "DenseState":
        m = _check_unitary(matrix)
        for axis in range(1, self.n_atoms + 1):
            self._apply_on_axis(m, axis)
        return self

    def apply_head_rotation(self, matrix) -> "DenseState":
        m = _check_unitary(matrix)
        self._apply_on_axis(m, 0)
        return self

    def apply_phase_gate(self, site: int) -> "DenseState":
        if not 0 <= site < self.n_atoms:
            raise ParameterError(f"site {site} out of range for {self.n_atoms} atoms")
        psi = self._tensor()
        index = [slice(None)] * (self.n_atoms + 1)
        index[0] = 1                      # head up
        index[self.n_atoms - site] = 1    # clock bit raised
        psi[tuple(index)] *= -1.0
        return self

    def apply_free_evolution(self, delta_omega: float, delta_omega_head: float, t: float) -> "DenseState":
        if t < 0.0:
            raise ParameterError("evolution time must be >= 0")
        psi = self._tensor()
        clock_phase = np.exp(1j * delta_omega * t)
        for axis in range(1, self.n_atoms + 1):
            index = [slice(None)] * (self.n_atoms + 1)
            index[axis] = 1
            psi[tuple(index)] *= clock_phase
        index = [slice(None)] * (self.n_atoms + 1)
        index[0] = 1
        psi[tuple(index)] *= np.exp(1j * delta_omega_head * t)
        return self

    def head_readout(self) -> tuple[float, float]:
        half = 2 ** self.n_atoms
        p_down = float(np.sum(np.abs(self.amplitudes[:half]) ** 2))
        p_up = float(np.sum(np.abs(self.amplitudes[half:]) ** 2))
        return p_down, p_up

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_vector(self) -> np.ndarray:
        return self.amplitudes.copy()


@dataclass
class _Branches:
    amps: np.ndarray    # (r,), complex
    clock: np.ndarray   # (r, N, 2), complex, unit-norm factors
    head: np.ndarray    # (r, 2), complex, unit-norm factors


class BranchState:
    """Rank-bounded branch-product state; linear cost in N at fixed rank."""

    backend = "branch"

    def __init__(self, n_atoms: int):
        if n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {n_atoms}")
        self.n_atoms = n_atoms
        clock = np.zeros((1, n_atoms, 2), dtype=complex)
        clock[:, :, 0] = 1.0
        head = np.array([[1.0, 0.0]], dtype=complex)
        self._b = _Branches(np.array([1.0 + 0.0j]), clock, head)

    @property
    def rank(self) -> int:
        return self._b.amps.shape[0]

    def copy(self) -> "BranchState":
        new = object.__new__(BranchState)
        new.n_atoms = self.n_atoms
        new._b = _Branches(self._b.amps.copy(), self._b.clock.copy(), self._b.head.copy())
        return new

    def apply_clock_rotation(self, matrix) -> "BranchState":
        m = _check_unitary(matrix)
        self._b.clock = np.einsum("ab,rnb->rna", m, self._b.clock)
        return self

    def apply_head_rotation(self, matrix) -> "BranchState":
        m = _check_unitary(matrix)
        self._b.head = self._b.head @ m.T
        return self

    def apply_phase_gate(self, site: int) -> "BranchState":
        if not 0 <= site < self.n_atoms:
            raise ParameterError(f"site {site} out of range for {self.n_atoms} atoms")
        b = self._b
        w_down = np.abs(b.head[:, 0])
        w_up = np.abs(b.head[:, 1])

        aligned_down = w_up <= BRANCH_ALIGN_TOL
        aligned_up = w_down <= BRANCH_ALIGN_TOL
        if np.all(aligned_down | aligned_up):
            # No head superposition anywhere: apply Z in place, no splits.
            b.clock[aligned_up, site, 1] *= -1.0
            return self

        new_amps, new_clock, new_head = [], [], []
        for i in range(b.amps.shape[0]):
            if w_up[i] <= BRANCH_ALIGN_TOL:
                # Head is down: gate acts as identity. Re-pin the factor to
                # the basis axis so later gates see an aligned head.
                amp = b.amps[i] * b.head[i, 0]
                new_amps.append(amp)
                new_clock.append(b.clock[i])
                new_head.append([1.0, 0.0])
            elif w_down[i] <= BRANCH_ALIGN_TOL:
                amp = b.amps[i] * b.head[i, 1]
                clock = b.clock[i].copy()
                clock[site, 1] *= -1.0
                new_amps.append(amp)
                new_clock.append(clock)
                new_head.append([0.0, 1.0])
            else:
                # Superposed head: split into head-basis-aligned branches.
                new_amps.append(b.amps[i] * b.head[i, 0])
                new_clock.append(b.clock[i])
                new_head.append([1.0, 0.0])
                clock = b.clock[i].copy()
                clock[site, 1] *= -1.0
                new_amps.append(b.amps[i] * b.head[i, 1])
                new_clock.append(clock)
                new_head.append([0.0, 1.0])

        self._b = _Branches(
            np.array(new_amps, dtype=complex),
            np.array(new_clock, dtype=complex),
            np.array(new_head, dtype=complex),
        )
        self._prune_and_merge()
        return self

    def apply_free_evolution(self, delta_omega: float, delta_omega_head: float, t: float) -> "BranchState":
        if t < 0.0:
            raise ParameterError("evolution time must be >= 0")
        self._b.clock[:, :, 1] *= np.exp(1j * delta_omega * t)
        self._b.head[:, 1] *= np.exp(1j * delta_omega_head * t)
        return self

    def _gram(self, other: "_Branches") -> np.ndarray:
        # G[i, j] = <branch_i | branch_j> without the amplitudes.
        site_overlaps = np.einsum("inc,jnc->ijn", self._b.clock.conj(), other.clock)
        gram = site_overlaps.prod(axis=2)
        gram *= self._b.head.conj() @ other.head.T
        return gram

    def _prune_and_merge(self):
        b = self._b
        keep = np.abs(b.amps) > BRANCH_PRUNE_TOL
        if not keep.all():
            if not keep.any():
                keep[0] = True  # keep one branch so the object stays well-formed
            b = _Branches(b.amps[keep], b.clock[keep], b.head[keep])

        if b.amps.shape[0] > 1 and b.amps.shape[0] <= BRANCH_MERGE_MAX_RANK:
            site_overlaps = np.einsum("inc,jnc->ijn", b.clock.conj(), b.clock)
            gram = site_overlaps.prod(axis=2) * (b.head.conj() @ b.head.T)
            alive = np.ones(b.amps.shape[0], dtype=bool)
            amps = b.amps.copy()
            for i in range(len(amps)):
                if not alive[i]:
                    continue
                for j in range(i + 1, len(amps)):
                    # Parallel branches: all factors colinear, so the total
                    # overlap has unit magnitude.
                    if alive[j] and abs(gram[i, j]) >= 1.0 - 1e-10:
                        amps[i] += amps[j] * gram[i, j]
                        alive[j] = False
            if not alive.all():
                b = _Branches(amps[alive], b.clock[alive], b.head[alive])
        self._b = b

    def head_readout(self) -> tuple[float, float]:
        b = self._b
        gram = np.einsum("inc,jnc->ijn", b.clock.conj(), b.clock).prod(axis=2)
        weighted = b.amps.conj()[:, None] * b.amps[None, :] * gram
        p_down = float(np.real(np.sum(weighted * (b.head.conj()[:, 0, None] * b.head[None, :, 0]))))
        p_up = float(np.real(np.sum(weighted * (b.head.conj()[:, 1, None] * b.head[None, :, 1]))))
        return min(max(p_down, 0.0), 1.0), min(max(p_up, 0.0), 1.0)

    def norm(self) -> float:
        gram = self._gram(self._b)
        value = self._b.amps.conj() @ gram @ self._b.amps
        return math.sqrt(max(float(np.real(value)), 0.0))

    def overlap_with(self, other: "BranchState") -> complex:
        if other.n_atoms != self.n_atoms:
            raise ParameterError("states have different register sizes")
        gram = self._gram(other._b)
        return complex(self._b.amps.conj() @ gram @ other._b.amps)

    def to_vector(self, max_atoms: int = 20) -> np.ndarray:
        """Expand to the dense index convention; guarded for small N only."""
        if self.n_atoms > max_atoms:
            raise CapacityError(
                f"refusing to expand a {self.n_atoms}-atom branch state "
                f"(limit {max_atoms})"
            )
        b = self._b
        vec = np.ones((b.amps.shape[0], 1), dtype=complex)
        for j in range(self.n_atoms - 1, -1, -1):  # most significant clock bit first
            vec = (vec[:, :, None] * b.clock[:, j, None, :]).reshape(b.amps.shape[0], -1)
        out_down = (b.amps * b.head[:, 0]) @ vec
        out_up = (b.amps * b.head[:, 1]) @ vec
        return np.concatenate([out_down, out_up])


RegisterState = DenseState | BranchState


def init_register(n_atoms: int, backend: str = "dense", dense_cap: int = DENSE_ATOM_CAP) -> RegisterState:
    """All-zeros clock register with the head down: |00...0>|down>."""
    if backend == "dense":
        return DenseState(n_atoms, cap=dense_cap)
    if backend == "branch":
        return BranchState(n_atoms)
    raise ParameterError(f"unknown backend {backend!r}, expected 'dense' or 'branch'")


def apply_clock_rotation(state: RegisterState, matrix) -> RegisterState:
    """Apply one 2x2 unitary to every clock qubit."""
    return state.apply_clock_rotation(matrix)


def apply_head_rotation(state: RegisterState, matrix) -> RegisterState:
    """Apply one 2x2 unitary to the head qubit."""
    return state.apply_head_rotation(matrix)


def apply_phase_gate(state: RegisterState, site: int) -> RegisterState:
    """Conditional sign flip: |1_site>|up> -> -|1_site>|up>, all else fixed."""
    return state.apply_phase_gate(site)


def apply_free_evolution(
    state: RegisterState, delta_omega: float, delta_omega_head: float, t: float
) -> RegisterState:
    """Detuning phases e^{i dw t} per raised clock qubit, e^{i dw' t} on head-up."""
    return state.apply_free_evolution(delta_omega, delta_omega_head, t)


def apply_gate(state: RegisterState, gate: tuple) -> RegisterState:
    """Dispatch one gate tuple onto a state (both backends)."""
    kind = gate[0]
    if kind == "clock_rotation":
        return state.apply_clock_rotation(gate[1])
    if kind == "head_rotation":
        return state.apply_head_rotation(gate[1])
    if kind == "phase_gate":
        return state.apply_phase_gate(gate[1])
    if kind == "free_evolution":
        return state.apply_free_evolution(gate[1], gate[2], gate[3])
    raise ParameterError(f"unknown gate kind {kind!r}")


def protocol_gates(
    n_atoms: int,
    delta_omega: float,
    delta_omega_head: float,
    ramsey_time: float,
) -> list[tuple[str | None, tuple]]:
    """Full noiseless gate sequence, with checkpoint labels after stages.

    A generalized pi/2 pulse is (H on all clocks, P_0..P_{N-1}, H on all
    clocks, H on head); the first pulse takes the product state to the
    GHZ state and the second one brings the Ramsey phase chi back onto
    the head qubit alone.
    """
    seq: list[tuple[str | None, tuple]] = []
    seq.append((None, ("clock_rotation", HADAMARD)))
    seq.append(("superposition", ("head_rotation", HADAMARD)))
    for site in range(n_atoms):
        label = "entangled" if site == n_atoms - 1 else None
        seq.append((label, ("phase_gate", site)))
    seq.append(("ghz", ("clock_rotation", HADAMARD)))
    seq.append(("evolved", ("free_evolution", delta_omega, delta_omega_head, ramsey_time)))
    seq.append((None, ("clock_rotation", HADAMARD)))
    for site in range(n_atoms):
        seq.append((None, ("phase_gate", site)))
    seq.append((None, ("clock_rotation", HADAMARD)))
    seq.append(("final", ("head_rotation", HADAMARD)))
    return seq


@dataclass
class ProtocolResult:
    final: RegisterState
    checkpoints: dict[str, RegisterState] = field(default_factory=dict)

    @property
    def p_up(self) -> float:
        return self.final.head_readout()[1]


def run_protocol(
    n_atoms: int,
    backend: str = "dense",
    delta_omega: float = 0.0,
    delta_omega_head: float = 0.0,
    ramsey_time: float = 0.0,
    dense_cap: int = DENSE_ATOM_CAP,
) -> ProtocolResult:
    """Run the noiseless protocol end to end, recording checkpoint states."""
    state = init_register(n_atoms, backend, dense_cap=dense_cap)
    checkpoints: dict[str, RegisterState] = {}
    for label, gate in protocol_gates(n_atoms, delta_omega, delta_omega_head, ramsey_time):
        apply_gate(state, gate)
        if label is not None:
            checkpoints[label] = state.copy()
    return ProtocolResult(final=state, checkpoints=checkpoints)


def ghz_reference(n_atoms: int, backend: str = "dense", dense_cap: int = DENSE_ATOM_CAP) -> RegisterState:
    """(|0...0>|down> + |1...1>|up>) / sqrt(2)."""
    inv = 1.0 / math.sqrt(2.0)
    if backend == "dense":
        state = DenseState(n_atoms, cap=dense_cap)
        state.amplitudes[:] = 0.0
        state.amplitudes[0] = inv
        state.amplitudes[2 ** (n_atoms + 1) - 1] = inv
        return state
    state = BranchState(n_atoms)
    clock = np.zeros((2, n_atoms, 2), dtype=complex)
    clock[0, :, 0] = 1.0
    clock[1, :, 1] = 1.0
    head = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
    state._b = _Branches(np.array([inv, inv], dtype=complex), clock, head)
    return state


def final_reference(
    n_atoms: int, chi: float, backend: str = "dense", dense_cap: int = DENSE_ATOM_CAP
) -> RegisterState:
    """|0...0>{cos(chi/2)|down> - i sin(chi/2)|up>}, the ideal output."""
    a_down = math.cos(chi / 2.0)
    a_up = -1j * math.sin(chi / 2.0)
    if backend == "dense":
        state = DenseState(n_atoms, cap=dense_cap)
        state.amplitudes[:] = 0.0
        state.amplitudes[0] = a_down
        state.amplitudes[2 ** n_atoms] = a_up
        return state
    state = BranchState(n_atoms)
    state._b.head = np.array([[a_down, a_up]], dtype=complex)
    return state


def protocol_references(
    n_atoms: int,
    delta_omega: float,
    delta_omega_head: float,
    ramsey_time: float,
) -> dict[str, BranchState]:
    """Ideal checkpoint states of the noiseless protocol, as branch states.

    Branch states expand to the dense index convention via ``to_vector``,
    so these serve as references for either backend at dense-capable sizes
    and directly for the branch backend at any size.
    """
    inv = 1.0 / math.sqrt(2.0)
    chi = (n_atoms * delta_omega + delta_omega_head) * ramsey_time

    superposition = BranchState(n_atoms)
    superposition._b.clock[:, :, :] = inv
    superposition._b.head[:] = [inv, inv]

    entangled = BranchState(n_atoms)
    clock = np.full((2, n_atoms, 2), inv, dtype=complex)
    clock[1, :, 1] = -inv
    head = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
    entangled._b = _Branches(np.array([inv, inv], dtype=complex), clock, head)

    evolved = ghz_reference(n_atoms, backend="branch")
    evolved._b.amps = evolved._b.amps * np.array([1.0, np.exp(1j * chi)])

    return {
        "superposition": superposition,
        "entangled": entangled,
        "ghz": ghz_reference(n_atoms, backend="branch"),
        "evolved": evolved,
        "final": final_reference(n_atoms, chi, backend="branch"),
    }


def state_overlap(a: RegisterState, b: RegisterState) -> complex:
    """<a|b> for two states on registers of equal size."""
    if a.n_atoms != b.n_atoms:
        raise ParameterError("states have different register sizes")
    if isinstance(a, DenseState) and isinstance(b, DenseState):
        return complex(np.vdot(a.amplitudes, b.amplitudes))
    if isinstance(a, BranchState) and isinstance(b, BranchState):
        return a.overlap_with(b)
    return complex(np.vdot(a.to_vector(), b.to_vector()))


def state_fidelity(a: RegisterState, b: RegisterState) -> float:
    """|<a|b>|^2."""
    return abs(state_overlap(a, b)) ** 2


def random_gate_sequence(n_atoms: int, n_gates: int = 50, seed: int | None = None) -> list[tuple]:
    """Random sequence from the supported gate set, for differential testing.

    The gate mix is a shuffled fixed multiset so the number of phase gates
    (which can split branches) is bounded and runtimes stay predictable.
    """
    rng = np.random.default_rng(seed)
    n_phase = min(12, max(1, n_gates // 4))
    n_free = max(1, n_gates // 8)
    n_rot = n_gates - n_phase - n_free
    kinds = ["phase_gate"] * n_phase + ["free_evolution"] * n_free
    kinds += [("clock_rotation" if rng.random() < 0.5 else "head_rotation") for _ in range(n_rot)]
    rng.shuffle(kinds)

    def haar_unitary() -> np.ndarray:
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(z)
        return q * (np.diagonal(r) / np.abs(np.diagonal(r)))

    gates: list[tuple] = []
    for kind in kinds:
        if kind == "phase_gate":
            gates.append(("phase_gate", int(rng.integers(n_atoms))))
        elif kind == "free_evolution":
            gates.append(
                ("free_evolution", float(rng.normal()), float(rng.normal()), float(rng.random()))
            )
        else:
            gates.append((kind, haar_unitary()))
    return gates


def backend_crosscheck(
    n_atoms: int,
    gates: list[tuple] | None = None,
    seed: int | None = None,
    n_gates: int = 50,
) -> float:
    """Run one gate sequence on both backends; max |amplitude difference|.

    Global phase is aligned on the largest dense amplitude before
    comparing. With ``gates=None`` a random sequence is drawn from ``seed``.
    """
    if n_atoms > 12:
        raise CapacityError("crosscheck is limited to dense-capable sizes (n_atoms <= 12)")
    if gates is None:
        gates = random_gate_sequence(n_atoms, n_gates=n_gates, seed=seed)
    dense = init_register(n_atoms, "dense")
    branch = init_register(n_atoms, "branch")
    for gate in gates:
        apply_gate(dense, gate)
        apply_gate(branch, gate)
    va = dense.to_vector()
    vb = branch.to_vector()
    ref = int(np.argmax(np.abs(va) + np.abs(vb)))
    phase_a = va[ref] / abs(va[ref]) if va[ref] != 0 else 1.0
    phase_b = vb[ref] / abs(vb[ref]) if vb[ref] != 0 else 1.0
    return float(np.max(np.abs(va / phase_a - vb / phase_b)))
