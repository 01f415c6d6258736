import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dszne.clifford import compose_all, invert
from dszne.rb_circuits import (
    FORMAT_HEADER,
    FoldedCircuit,
    RbCircuit,
    dumps,
    fold_global,
    generate_rb,
    loads,
)

seeds = st.integers(0, 2**32 - 1)


class TestGeneration:
    @pytest.mark.parametrize("m", [1, 3, 20, 30])
    def test_layer_count_and_identity(self, m):
        c = generate_rb(2, m, 11)
        assert len(c) == m + 1
        assert c.clifford_depth == m
        assert compose_all(c.layers).is_identity()

    @given(seeds, st.integers(1, 40), st.integers(1, 3))
    @settings(max_examples=300)
    def test_every_circuit_compiles_to_identity(self, seed, m, n):
        assert compose_all(generate_rb(n, m, seed).layers).is_identity()

    def test_seed_is_recorded_and_reproducible(self):
        a, b = generate_rb(2, 10, 42), generate_rb(2, 10, 42)
        assert a.seed == 42 and a.layers == b.layers
        assert generate_rb(2, 10, 43).layers != a.layers

    def test_generator_argument(self):
        c = generate_rb(2, 5, np.random.default_rng(0))
        assert c.seed is None

    @pytest.mark.parametrize("n, m", [(2, 0), (0, 5)])
    def test_rejects_bad_sizes(self, n, m):
        with pytest.raises(ValueError):
            generate_rb(n, m, 0)

    def test_layer_count_validated(self):
        c = generate_rb(1, 3, 0)
        with pytest.raises(ValueError):
            RbCircuit(1, c.layers[:-1], 3)


class TestFolding:
    @pytest.mark.parametrize("factor", [1, 3, 5, 7, 9])
    def test_length_and_identity(self, factor):
        c = generate_rb(2, 6, 5)
        f = fold_global(c, factor)
        assert isinstance(f, FoldedCircuit)
        assert len(f) == factor * len(c)
        assert f.n_folds == (factor - 1) // 2
        assert compose_all(f.layers).is_identity()

    def test_adjoint_half_is_reversed_inverse(self):
        c = generate_rb(2, 4, 8)
        f = fold_global(c, 3)
        k = len(c)
        assert f.layers[:k] == c.layers
        assert f.layers[k:2 * k] == tuple(invert(layer) for layer in reversed(c.layers))
        assert f.layers[2 * k:] == c.layers

    @given(seeds, st.integers(1, 10), st.integers(0, 4))
    @settings(max_examples=200)
    def test_every_prefix_fold_is_identity(self, seed, m, n_folds):
        c = generate_rb(2, m, seed)
        f = fold_global(c, 1 + 2 * n_folds)
        k = len(c)
        # each U^dag U block composes to the identity on its own
        for start in range(k, len(f), 2 * k):
            assert compose_all(f.layers[start:start + 2 * k]).is_identity()

    @pytest.mark.parametrize("factor", [0, 2, 4, -1, 3.5, True])
    def test_rejects_non_odd_factors(self, factor):
        with pytest.raises(ValueError):
            fold_global(generate_rb(1, 2, 0), factor)


class TestSerialization:
    def test_roundtrip_rb(self):
        c = generate_rb(2, 7, 3)
        text = dumps(c)
        assert text.splitlines()[0] == FORMAT_HEADER
        assert len(text.splitlines()) == 2 + len(c)
        back = loads(text)
        assert back == c

    def test_roundtrip_folded(self):
        f = fold_global(generate_rb(2, 3, 3), 5)
        back = loads(dumps(f))
        assert back.layers == f.layers and back.scale_factor == 5

    def test_golden_format(self):
        from dszne.clifford import hadamard, identity

        c = RbCircuit(1, (hadamard(1, 0), hadamard(1, 0)), 1, seed=9)
        assert dumps(c) == f"{FORMAT_HEADER}\n# kind=rb n=1 m=1 seed=9\n+Z +X\n+Z +X\n"
        assert identity(2).to_text() == "+XI +IX +ZI +IZ"

    def test_rejects_wrong_header(self):
        with pytest.raises(ValueError, match="header"):
            loads("# something else\n")

    def test_detects_tampered_fold(self):
        f = fold_global(generate_rb(1, 2, 1), 3)
        lines = dumps(f).splitlines()
        lines[-1], lines[-2] = lines[-2], lines[-1]
        if lines[-1] != lines[-2]:
            with pytest.raises(ValueError):
                loads("\n".join(lines))
