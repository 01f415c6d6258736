from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dszne.clifford import (
    CliffordTableau,
    PauliString,
    cnot,
    compose,
    compose_all,
    conjugate,
    hadamard,
    identity,
    invert,
    phase,
    random_clifford,
    symplectic_from_index,
    symplectic_group_order,
)
from dszne.simulator import tableau_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=1, max_value=3)


def pauli_strings(n):
    return st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.integers(0, 3),
    ).map(lambda t: PauliString(*t))


def equal_up_to_phase(a, b):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    ratio = a[idx] / b[idx]
    return np.isclose(abs(ratio), 1) and np.allclose(a, ratio * b)


def single_qubit_group():
    """All 24 single-qubit Cliffords, generated by breadth-first search from H and S."""
    gens = [hadamard(1, 0), phase(1, 0)]
    seen = {identity(1)}
    frontier = [identity(1)]
    while frontier:
        nxt = []
        for el in frontier:
            for g in gens:
                c = compose(el, g)
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


class TestPauliString:
    @pytest.mark.parametrize("text", ["+XZ", "-iYI", "+iZZ", "-XX", "IY"])
    def test_parse_roundtrip(self, text):
        p = PauliString.from_str(text)
        canonical = str(p)
        assert PauliString.from_str(canonical) == p

    def test_y_is_hermitian_convention(self):
        y = PauliString.from_str("Y").to_matrix()
        np.testing.assert_allclose(y, [[0, -1j], [1j, 0]])

    def test_qubit_zero_most_significant(self):
        xi = PauliString.from_str("XI").to_matrix()
        np.testing.assert_allclose(xi @ np.eye(4)[:, 0], np.eye(4)[:, 2])

    def test_immutable(self):
        p = PauliString.from_str("XZ")
        with pytest.raises(AttributeError):
            p.phase = 2
        with pytest.raises(ValueError):
            p.x[0] = 0

    @given(st.data(), sizes)
    @settings(max_examples=300)
    def test_product_matches_matrices(self, data, n):
        a = data.draw(pauli_strings(n))
        b = data.draw(pauli_strings(n))
        np.testing.assert_allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)

    @given(st.data(), sizes)
    @settings(max_examples=300)
    def test_commutation_matches_matrices(self, data, n):
        a = data.draw(pauli_strings(n))
        b = data.draw(pauli_strings(n))
        am, bm = a.to_matrix(), b.to_matrix()
        assert a.commutes(b) == np.allclose(am @ bm, bm @ am)


class TestGates:
    def test_hadamard_swaps_x_and_z(self):
        h = hadamard(1, 0)
        assert str(conjugate(h, PauliString.from_str("X"))) == "+Z"
        assert str(conjugate(h, PauliString.from_str("Z"))) == "+X"
        assert str(conjugate(h, PauliString.from_str("Y"))) == "-Y"

    def test_phase_gate(self):
        s = phase(1, 0)
        assert str(conjugate(s, PauliString.from_str("X"))) == "+Y"
        assert str(conjugate(s, PauliString.from_str("Y"))) == "-X"
        assert compose(s, s).to_text() == "-X +Z"

    def test_cnot_propagation(self):
        c = cnot(2, 0, 1)
        assert str(conjugate(c, PauliString.from_str("XI"))) == "+XX"
        assert str(conjugate(c, PauliString.from_str("IZ"))) == "+ZZ"
        assert str(conjugate(c, PauliString.from_str("IX"))) == "+IX"

    @pytest.mark.parametrize(
        "gate, matrix",
        [
            (hadamard(1, 0), np.array([[1, 1], [1, -1]]) / np.sqrt(2)),
            (phase(1, 0), np.diag([1, 1j])),
            (cnot(2, 0, 1), np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])),
        ],
    )
    def test_unitary_of_known_gates(self, gate, matrix):
        assert equal_up_to_phase(tableau_unitary(gate), matrix)

    def test_rejects_non_symplectic(self):
        with pytest.raises(ValueError):
            CliffordTableau(np.array([[1, 0], [1, 0]]), np.zeros(2))

    def test_text_roundtrip(self):
        c = random_clifford(2, 3)
        assert CliffordTableau.from_text(c.to_text()) == c


class TestGroupStructure:
    def test_single_qubit_group_has_24_elements(self):
        assert len(single_qubit_group()) == 24

    def test_symplectic_group_orders(self):
        assert symplectic_group_order(1) == 6
        assert symplectic_group_order(2) == 720

    @pytest.mark.parametrize("n", [1, 2])
    def test_index_map_is_bijective(self, n):
        order = symplectic_group_order(n)
        mats = {symplectic_from_index(i, n).tobytes() for i in range(order)}
        assert len(mats) == order

    def test_uniform_single_qubit_sampling(self):
        group = single_qubit_group()
        rng = np.random.default_rng(2024)
        n_samples = 100_000
        counts = Counter(random_clifford(1, rng) for _ in range(n_samples))
        assert set(counts) == group
        p = 1 / 24
        sigma = np.sqrt(n_samples * p * (1 - p))
        for c in group:
            assert abs(counts[c] - n_samples * p) < 3 * sigma

    def test_two_qubit_symplectic_part_uniform(self):
        # chi-squared over all 720 two-qubit symplectic matrices; the 0.999
        # quantile for 719 degrees of freedom is about 842
        rng = np.random.default_rng(11)
        n_samples = 72_000
        counts = Counter(random_clifford(2, rng).xz.tobytes() for _ in range(n_samples))
        assert len(counts) == symplectic_group_order(2) == 720
        expected = n_samples / 720
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < 842

    def test_two_qubit_signs_uniform(self):
        rng = np.random.default_rng(7)
        r = np.array([random_clifford(2, rng).r for _ in range(4000)])
        frac = (r // 2).mean(axis=0)  # phase exponent 2 means a minus sign
        assert np.all(np.abs(frac - 0.5) < 3 * np.sqrt(0.25 / 4000))


class TestAlgebra:
    @given(seeds, sizes)
    @settings(max_examples=1000)
    def test_random_elements_are_symplectic(self, seed, n):
        assert random_clifford(n, seed).satisfies_symplectic()

    @given(seeds, sizes)
    @settings(max_examples=1000)
    def test_inverse(self, seed, n):
        c = random_clifford(n, seed)
        assert compose(c, invert(c)).is_identity()
        assert compose(invert(c), c).is_identity()

    @given(seeds, sizes)
    @settings(max_examples=1000)
    def test_associativity(self, seed, n):
        rng = np.random.default_rng(seed)
        a, b, c = (random_clifford(n, rng) for _ in range(3))
        assert compose(compose(a, b), c) == compose(a, compose(b, c))

    @given(seeds, sizes, st.data())
    @settings(max_examples=1000)
    def test_conjugation_is_a_homomorphism(self, seed, n, data):
        rng = np.random.default_rng(seed)
        a, b = random_clifford(n, rng), random_clifford(n, rng)
        p = data.draw(pauli_strings(n))
        assert conjugate(compose(a, b), p) == conjugate(b, conjugate(a, p))

    @given(seeds, st.integers(1, 2))
    @settings(max_examples=200)
    def test_tableau_matches_dense_conjugation(self, seed, n):
        c = random_clifford(n, seed)
        u = tableau_unitary(c)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2**n), atol=1e-12)
        for g, image in enumerate(c.images):
            q = g % n
            kind = "X" if g < n else "Z"
            gen = PauliString.single(n, q, kind).to_matrix()
            np.testing.assert_allclose(u @ gen @ u.conj().T, image.to_matrix(), atol=1e-12)

    @given(seeds, st.integers(1, 2))
    @settings(max_examples=200)
    def test_composition_matches_matrix_product(self, seed, n):
        rng = np.random.default_rng(seed)
        a, b = random_clifford(n, rng), random_clifford(n, rng)
        expected = tableau_unitary(b) @ tableau_unitary(a)
        assert equal_up_to_phase(tableau_unitary(compose(a, b)), expected)

    def test_compose_all_empty_sequence_is_rejected(self):
        with pytest.raises((ValueError, TypeError)):
            compose_all([])
