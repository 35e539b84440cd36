import math
import time

import numpy as np
import pytest

from screwclock import (
    CapacityError,
    ParameterError,
    backend_crosscheck,
    final_reference,
    ghz_reference,
    init_register,
    protocol_gates,
    protocol_references,
    run_protocol,
    state_fidelity,
    state_overlap,
)
from screwclock.register import HADAMARD, apply_gate, random_gate_sequence


class TestInitRegister:
    def test_single_atom_dense(self):
        state = init_register(1, "dense")
        assert state.amplitudes[0] == 1.0
        assert np.all(state.amplitudes[1:] == 0.0)

    def test_three_atoms_start_all_zeros_head_down(self):
        state = init_register(3, "dense")
        assert state.amplitudes[0] == 1.0
        assert state.head_readout() == (1.0, 0.0)

    def test_dense_capacity_guard(self):
        with pytest.raises(CapacityError):
            init_register(20, "dense")
        init_register(20, "branch")  # fine

    def test_branch_starts_rank_one(self):
        assert init_register(4, "branch").rank == 1

    def test_unknown_backend(self):
        with pytest.raises(ParameterError):
            init_register(3, "tensor")


class TestClockRotation:
    def test_hadamard_gives_uniform_superposition(self):
        n = 5
        state = init_register(n, "dense").apply_clock_rotation(HADAMARD)
        expected = np.zeros(2 ** (n + 1), dtype=complex)
        expected[: 2**n] = 1.0 / math.sqrt(2**n)
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)

    def test_identity_leaves_state_unchanged(self):
        state = run_protocol(4, "dense", 0.2, 0.1, 1.0).final
        before = state.to_vector()
        state.apply_clock_rotation(np.eye(2))
        np.testing.assert_allclose(state.to_vector(), before, atol=1e-14)

    @pytest.mark.parametrize("backend", ["dense", "branch"])
    def test_hadamard_is_an_involution(self, backend):
        state = init_register(6, backend)
        state.apply_clock_rotation(HADAMARD).apply_clock_rotation(HADAMARD)
        reference = init_register(6, backend)
        assert abs(state_overlap(state, reference)) ** 2 > 1 - 1e-10

    def test_nonunitary_rejected(self):
        with pytest.raises(ParameterError):
            init_register(2, "dense").apply_clock_rotation([[1.0, 0.0], [0.0, 1.1]])
        with pytest.raises(ParameterError):
            init_register(2, "branch").apply_clock_rotation([[1.0, 0.5], [0.0, 1.0]])


class TestHeadRotation:
    def test_hadamard_on_down(self):
        state = init_register(1, "dense").apply_head_rotation(HADAMARD)
        np.testing.assert_allclose(
            state.amplitudes, [1 / math.sqrt(2), 0, 1 / math.sqrt(2), 0], atol=1e-14
        )

    def test_identity(self):
        state = init_register(3, "branch")
        state.apply_head_rotation(np.eye(2))
        assert state_fidelity(state, init_register(3, "branch")) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_backends_agree_on_random_states(self, seed):
        deviation = backend_crosscheck(6, seed=seed, n_gates=30)
        assert deviation < 1e-12


class TestPhaseGate:
    def test_sign_flip_on_raised_bit_with_head_up(self):
        n = 3
        state = init_register(n, "dense")
        # Prepare |010>|up>: p = 2, index = 2 + 2^3
        state.amplitudes[0] = 0.0
        state.amplitudes[2 + 2**n] = 1.0
        state.apply_phase_gate(1)
        assert state.amplitudes[2 + 2**n] == -1.0
        state.apply_phase_gate(0)  # bit 0 not raised: no flip
        assert state.amplitudes[2 + 2**n] == -1.0

    def test_head_down_untouched(self):
        n = 2
        state = init_register(n, "dense")
        state.amplitudes[0] = 0.0
        state.amplitudes[3] = 1.0  # |11>|down>
        state.apply_phase_gate(0).apply_phase_gate(1)
        assert state.amplitudes[3] == 1.0

    def test_parity_signs_after_full_pass(self):
        # Applying every P_i to the global superposition attaches (-1)^(number
        # of raised bits) to the head-up half.
        n = 4
        state = init_register(n, "dense")
        state.apply_clock_rotation(HADAMARD).apply_head_rotation(HADAMARD)
        for site in range(n):
            state.apply_phase_gate(site)
        norm = 1.0 / math.sqrt(2 ** (n + 1))
        for p in range(2**n):
            k_p = bin(p).count("1")
            assert state.amplitudes[p] == pytest.approx(norm, rel=1e-12)
            assert state.amplitudes[p + 2**n] == pytest.approx((-1) ** k_p * norm, rel=1e-12)

    def test_site_out_of_range(self):
        with pytest.raises(ParameterError):
            init_register(3, "dense").apply_phase_gate(3)
        with pytest.raises(ParameterError):
            init_register(3, "branch").apply_phase_gate(-1)


class TestFreeEvolution:
    def test_zero_time_is_identity(self):
        state = ghz_reference(4, "dense")
        before = state.to_vector()
        state.apply_free_evolution(0.7, 0.3, 0.0)
        np.testing.assert_allclose(state.to_vector(), before, atol=1e-15)

    def test_zero_detunings_are_identity(self):
        state = ghz_reference(4, "branch")
        state.apply_free_evolution(0.0, 0.0, 123.0)
        assert state_fidelity(state, ghz_reference(4, "branch")) == pytest.approx(1.0)

    def test_ghz_accumulates_enhanced_phase(self):
        # N = 5 with dw T = 0.1 and dw' T = 0.02: relative branch phase 0.52.
        n, t = 5, 1.0
        state = ghz_reference(n, "dense").apply_free_evolution(0.1, 0.02, t)
        amp_down = state.amplitudes[0]
        amp_up = state.amplitudes[2 ** (n + 1) - 1]
        phase = np.angle(amp_up / amp_down)
        assert phase == pytest.approx(0.52, abs=1e-12)


class TestRunProtocol:
    def test_ghz_checkpoint_small(self):
        result = run_protocol(3, "dense")
        fid = state_fidelity(result.checkpoints["ghz"], ghz_reference(3, "dense"))
        assert fid >= 1 - 1e-10

    def test_zero_phase_returns_to_start(self):
        for backend in ("dense", "branch"):
            result = run_protocol(6, backend, 0.0, 0.0, 5.0)
            reference = init_register(6, backend)
            assert state_fidelity(result.final, reference) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("chi", [0.3, 1.1, 2.9])
    def test_clock_register_disentangles(self, chi):
        n = 8
        t = 1.0
        result = run_protocol(n, "dense", chi / (n * t), 0.0, t)
        vec = result.final.to_vector().reshape(2, 2**n)
        # All clock amplitude must sit on p = 0 for both head values.
        off = np.abs(vec[:, 1:]).max()
        assert off < 1e-12

    @pytest.mark.parametrize("backend", ["dense", "branch"])
    def test_checkpoints_match_ideal_references(self, backend):
        n, dw, dwh, t = 5, 0.21, 0.013, 1.7
        result = run_protocol(n, backend, dw, dwh, t)
        refs = protocol_references(n, dw, dwh, t)
        for name, reference in refs.items():
            fid = state_fidelity(result.checkpoints[name], reference)
            assert fid == pytest.approx(1.0, abs=1e-10), name

    def test_rank_never_exceeds_two(self):
        n = 6
        state = init_register(n, "branch")
        for _, gate in protocol_gates(n, 0.4, 0.1, 2.0):
            apply_gate(state, gate)
            assert state.rank <= 2

    def test_norm_preserved_by_every_gate(self):
        for backend in ("dense", "branch"):
            state = init_register(5, backend)
            for _, gate in protocol_gates(5, 0.3, 0.07, 1.3):
                apply_gate(state, gate)
                assert state.norm() == pytest.approx(1.0, abs=1e-10)


class TestHeadReadout:
    def test_chi_pi_reads_up(self):
        state = final_reference(4, math.pi, "dense")
        p_down, p_up = state.head_readout()
        assert p_up == pytest.approx(1.0, abs=1e-12)
        assert p_down == pytest.approx(0.0, abs=1e-12)

    def test_chi_half_pi_is_balanced(self):
        state = final_reference(4, math.pi / 2, "branch")
        _, p_up = state.head_readout()
        assert p_up == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_backends_agree_on_random_states(self, seed):
        n = 7
        gates = random_gate_sequence(n, n_gates=25, seed=seed)
        dense = init_register(n, "dense")
        branch = init_register(n, "branch")
        for gate in gates:
            apply_gate(dense, gate)
            apply_gate(branch, gate)
        pd_d, pu_d = dense.head_readout()
        pd_b, pu_b = branch.head_readout()
        assert pu_b == pytest.approx(pu_d, abs=1e-10)
        assert pd_b == pytest.approx(pd_d, abs=1e-10)


class TestFringeLaw:
    @pytest.mark.parametrize("n", [1, 2, 5, 10])
    def test_small_registers_dense(self, n):
        t = 0.8
        for dw in (0.0, 0.3, 1.7):
            result = run_protocol(n, "dense", dw, 0.05, t)
            chi = (n * dw + 0.05) * t
            assert result.p_up == pytest.approx(math.sin(chi / 2) ** 2, abs=1e-10)

    def test_large_register_branch(self):
        n, t = 1000, 0.01
        for dw in (0.0, 0.05, 0.21):
            result = run_protocol(n, "branch", dw, 0.0, t)
            chi = n * dw * t
            assert result.p_up == pytest.approx(math.sin(chi / 2) ** 2, abs=1e-10)


class TestBackendCrosscheck:
    def test_noiseless_protocol_small(self):
        dense = init_register(3, "dense")
        branch = init_register(3, "branch")
        for _, gate in protocol_gates(3, 0.5, 0.1, 1.0):
            apply_gate(dense, gate)
            apply_gate(branch, gate)
        deviation = np.abs(dense.to_vector() - branch.to_vector()).max()
        assert deviation < 1e-10

    def test_single_hadamard(self):
        deviation = backend_crosscheck(1, gates=[("clock_rotation", HADAMARD)])
        assert deviation < 1e-14

    @pytest.mark.parametrize("seed", range(10))
    def test_random_sequences(self, seed):
        assert backend_crosscheck(8, seed=seed) < 1e-9

    def test_size_guard(self):
        with pytest.raises(CapacityError):
            backend_crosscheck(13, seed=0)


def test_branch_protocol_cost_scales_linearly():
    def best_time(n):
        times = []
        for _ in range(3):
            start = time.perf_counter()
            run_protocol(n, "branch", 1e-3, 0.0, 0.01)
            times.append(time.perf_counter() - start)
        return min(times)

    t_small = best_time(500)
    t_large = best_time(8000)
    # 16x the atoms: linear cost allows ~16x the time; quadratic would be 256x.
    assert t_large / t_small < 60.0
