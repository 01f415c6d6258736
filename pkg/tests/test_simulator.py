import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dszne.clifford import identity, random_clifford
from dszne.noise import NoiseModel, apply_pauli_channel, logical_error_rate
from dszne.rb_circuits import fold_global, generate_rb
from dszne.simulator import (
    DensityMatrix,
    DistanceScale,
    FoldScale,
    Observable,
    PauliFrameSampler,
    ShotEstimate,
    choose_backend,
    expectation_at_scale,
    run_exact,
    run_exact_many,
    run_stabilizer,
    tableau_unitary,
)


def two_state_survival(steps, flip):
    """Probability a bit returns to 0 after ``steps`` independent flips of probability ``flip``."""
    return 0.5 + 0.5 * (1 - 2 * flip) ** steps


def dense_reference(circuit, rate, weights=(1 / 3, 1 / 3, 1 / 3)):
    """Straightforward density-matrix evolution with floating-point unitaries."""
    layers = circuit.layers
    n = layers[0].n
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1
    for layer in layers:
        u = tableau_unitary(layer)
        rho = apply_pauli_channel(u @ rho @ u.conj().T, rate, n, weights)
    return rho[0, 0].real


class TestExact:
    @pytest.mark.parametrize("m", [1, 20, 30])
    def test_noiseless_is_exactly_one(self, m):
        for seed in range(10):
            assert run_exact(generate_rb(2, m, seed), 0.0) == 1.0

    def test_two_identity_layers_single_qubit(self):
        # only X and Y flip the bit: flip probability 0.3 * 2/3 = 0.2 per layer
        value = run_exact([identity(1), identity(1)], 0.3)
        assert value == pytest.approx(0.68, abs=1e-14)
        assert value == pytest.approx(two_state_survival(2, 0.2), abs=1e-14)

    @pytest.mark.parametrize("layers", [1, 2, 5, 17])
    def test_identity_layers_markov_oracle(self, layers):
        rate = 0.12
        value = run_exact([identity(1)] * layers, rate)
        assert value == pytest.approx(two_state_survival(layers, 2 * rate / 3), abs=1e-13)

    def test_z_only_noise_is_invisible(self):
        c = [identity(2)] * 5
        assert run_exact(c, 0.4, weights=(0.0, 0.0, 1.0)) == pytest.approx(1.0, abs=1e-15)

    @given(st.integers(0, 2**31), st.floats(0.0, 0.2), st.integers(1, 8))
    @settings(max_examples=100)
    def test_matches_float_reference(self, seed, rate, m):
        c = generate_rb(2, m, seed)
        assert run_exact(c, rate) == pytest.approx(dense_reference(c, rate), abs=1e-12)

    def test_batched_equals_individual(self):
        c = generate_rb(2, 12, 3)
        rates = [0.0, 0.001, 0.01, 0.05]
        batched = run_exact_many(c, rates)
        np.testing.assert_array_equal(batched, [run_exact(c, r) for r in rates])

    def test_invariant_checks_pass(self):
        run_exact(generate_rb(2, 5, 2), 0.05, check_invariants=True)

    def test_density_matrix_checks(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.diag([0.5, 0.4])).check()
        with pytest.raises(ValueError, match="positive"):
            DensityMatrix(np.diag([1.5, -0.5])).check()
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]])).check()

    def test_other_target_state(self):
        c = generate_rb(2, 3, 1)
        assert run_exact(c, 0.0, Observable((0, 1))) == 0.0

    def test_rejects_mismatched_observable(self):
        with pytest.raises(ValueError):
            run_exact(generate_rb(2, 3, 1), 0.0, Observable((0,)))

    def test_rejects_large_dense(self):
        with pytest.raises(ValueError):
            run_exact([identity(7)], 0.0)


class TestStabilizer:
    @pytest.mark.parametrize("m", [1, 20, 30, 500])
    def test_noiseless_all_shots_succeed(self, m):
        est = run_stabilizer(generate_rb(2, m, 4), 0.0, shots=1000, rng=0)
        assert est.value == 1.0 and est.std_error == 0.0

    def test_identity_layers_markov_oracle(self):
        shots = 200_000
        est = run_stabilizer([identity(1)] * 2, 0.3, shots=shots, rng=1)
        assert abs(est.value - 0.68) < 3 * math.sqrt(0.68 * 0.32 / shots)

    def test_reproducible(self):
        c = generate_rb(2, 40, 9)
        a = run_stabilizer(c, 0.01, shots=5000, rng=17)
        b = run_stabilizer(c, 0.01, shots=5000, rng=17)
        assert a == b

    def test_frame_propagation_single_error(self):
        # an X error before an H layer ends up as Z: invisible in the Z basis
        from dszne.clifford import hadamard

        sampler = PauliFrameSampler([identity(1), hadamard(1, 0)])
        assert sampler._flips[0, 0].tolist() == [0, 1, 1]  # X -> Z, Y -> Y, Z -> X
        assert sampler._flips[1, 0].tolist() == [1, 1, 0]

    def test_full_rate(self):
        # with rate 1 and X-only noise on one layer every shot flips
        est = run_stabilizer([identity(1)], 1.0, shots=100, rng=0, weights=(1.0, 0.0, 0.0))
        assert est.value == 0.0

    @pytest.mark.parametrize("rate", [-0.1, 1.1])
    def test_rejects_bad_rate(self, rate):
        with pytest.raises(ValueError):
            run_stabilizer([identity(1)], rate, shots=10)

    def test_shot_estimate_from_counts(self):
        est = ShotEstimate.from_counts(750, 1000)
        assert est.value == 0.75
        assert est.std_error == pytest.approx(math.sqrt(0.75 * 0.25 / 1000))


class TestCrossBackend:
    def test_deep_circuit_agreement(self):
        c = generate_rb(2, 30, 21)
        rate = 0.01
        exact = run_exact(c, rate)
        est = run_stabilizer(c, rate, shots=200_000, rng=3)
        assert abs(est.value - exact) < 3 * est.std_error

    @pytest.mark.parametrize("weights", [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.2, 0.3, 0.5)])
    def test_agreement_with_biased_noise(self, weights):
        c = generate_rb(2, 10, 5)
        exact = run_exact(c, 0.03, weights=weights)
        est = run_stabilizer(c, 0.03, shots=100_000, rng=8, weights=weights)
        assert abs(est.value - exact) < 3 * est.std_error


class TestScaling:
    model = NoiseModel(0.006)

    def test_distance_scale_uses_logical_rate(self):
        c = generate_rb(2, 10, 1)
        est = expectation_at_scale(c, DistanceScale(9), self.model, "exact")
        assert est.value == run_exact(c, logical_error_rate(self.model, 9))
        assert est.std_error == 0.0

    def test_fold_scale_uses_folded_circuit(self):
        c = generate_rb(2, 10, 1)
        est = expectation_at_scale(c, FoldScale(3, 11), self.model, "exact")
        assert est.value == run_exact(fold_global(c, 3), logical_error_rate(self.model, 11))

    def test_stabilizer_path(self):
        c = generate_rb(2, 10, 1)
        est = expectation_at_scale(c, DistanceScale(11), self.model, "stabilizer", shots=500, rng=2)
        assert est.shots == 500 and 0 <= est.value <= 1

    @pytest.mark.parametrize("m, expected", [(20, "exact"), (50, "exact"), (51, "stabilizer"), (10_000, "stabilizer")])
    def test_auto_backend(self, m, expected):
        assert choose_backend("auto", m) == expected

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            choose_backend("gpu", 10)

    def test_realization_validation(self):
        with pytest.raises(ValueError):
            DistanceScale(4)
        with pytest.raises(ValueError):
            FoldScale(2, 11)


def test_random_clifford_unitary_cache_consistency():
    c = random_clifford(2, 77)
    np.testing.assert_array_equal(tableau_unitary(c), tableau_unitary(c))
