"""Noisy expectation values of layered Clifford circuits.

Two backends estimate ``E = tr[A N(rho_0)]`` for ``rho_0 = |0..0><0..0|``,
where ``N`` alternates Clifford layers with the per-qubit logical Pauli
channel (one channel application after every layer, none before the first):

* ``exact`` evolves the density matrix and applies the channel analytically;
* ``stabilizer`` samples Pauli errors and pushes them to the end of the
  circuit as a Pauli frame. For an identity-compiling circuit measured in the
  computational basis only the X part of the final frame matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .clifford import CliffordTableau
from .noise import (
    UNIFORM_WEIGHTS,
    NoiseModel,
    _check_weights,
    apply_pauli_channel,
    logical_error_rate,
    validate_distance,
)
from .rb_circuits import RbCircuit, _check_scale_factor, fold_global, layers_of

__all__ = [
    "Observable",
    "DensityMatrix",
    "ShotEstimate",
    "DistanceScale",
    "FoldScale",
    "tableau_unitary",
    "run_exact",
    "run_exact_many",
    "run_stabilizer",
    "PauliFrameSampler",
    "expectation_at_scale",
    "choose_backend",
    "MAX_DENSE_QUBITS",
    "AUTO_EXACT_MAX_DEPTH",
]

MAX_DENSE_QUBITS = 6
AUTO_EXACT_MAX_DEPTH = 50


@dataclass(frozen=True)
class Observable:
    """Projector onto a computational basis state ``|target><target|``."""

    target: tuple[int, ...]

    def __post_init__(self):
        target = tuple(int(b) for b in self.target)
        if not target or any(b not in (0, 1) for b in target):
            raise ValueError(f"target must be a nonempty bit string, got {self.target!r}")
        object.__setattr__(self, "target", target)

    @classmethod
    def zeros(cls, n: int) -> "Observable":
        return cls((0,) * n)

    @property
    def n(self) -> int:
        return len(self.target)

    @property
    def index(self) -> int:
        """Basis index of the target, qubit 0 most significant."""
        out = 0
        for b in self.target:
            out = (out << 1) | b
        return out

    def matrix(self) -> np.ndarray:
        dim = 2**self.n
        out = np.zeros((dim, dim))
        out[self.index, self.index] = 1.0
        return out


class DensityMatrix:
    """A ``2**n x 2**n`` density matrix with invariant checks."""

    def __init__(self, entries: np.ndarray):
        entries = np.asarray(entries, dtype=complex)
        dim = entries.shape[0]
        if entries.shape != (dim, dim) or dim & (dim - 1):
            raise ValueError(f"density matrix must be square with power-of-two size, got {entries.shape}")
        self.entries = entries
        self.n = dim.bit_length() - 1

    @classmethod
    def basis_state(cls, n: int, index: int = 0) -> "DensityMatrix":
        rho = np.zeros((2**n, 2**n), dtype=complex)
        rho[index, index] = 1.0
        return cls(rho)

    def check(self, tol: float = 1e-12, psd_tol: float = 1e-10) -> None:
        """Raise ``ValueError`` unless Hermitian, unit trace and positive semidefinite."""
        rho = self.entries
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            raise ValueError(f"density matrix trace is {np.trace(rho)}")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -psd_tol:
            raise ValueError("density matrix is not positive semidefinite")

    def expectation(self, obs: Observable) -> float:
        return float(self.entries[obs.index, obs.index].real)


@lru_cache(maxsize=1 << 16)
def _scaled_unitary(t: CliffordTableau) -> tuple[np.ndarray, int]:
    """Return ``(G, k)`` with ``U = G / sqrt(2)**k`` and G Gaussian-integer valued.

    Columns are built from the action on basis states: ``U|0..0>`` is the
    stabilizer state of the Z images, and ``U|b> = prod_q (U X_q U^dag)^b_q
    U|0..0>``. The global phase is fixed so the arithmetic stays exact.
    """
    n = t.n
    dim = 2**n
    images = t.images
    proj = np.eye(dim, dtype=complex)
    for q in range(n):
        proj = proj @ (np.eye(dim) + images[n + q].to_matrix()) / 2
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    psi0 = proj[:, col]
    pivot = psi0[np.argmax(np.abs(psi0) > 1e-9)]
    psi0 = psi0 * (abs(pivot) / pivot) / np.linalg.norm(psi0)
    x_mats = [images[q].to_matrix() for q in range(n)]
    u = np.empty((dim, dim), dtype=complex)
    for b in range(dim):
        v = psi0
        for q in range(n):
            if (b >> (n - 1 - q)) & 1:
                v = x_mats[q] @ v
        u[:, b] = v
    support = int(np.count_nonzero(np.abs(psi0) > 1e-9))
    k = support.bit_length() - 1  # amplitudes have magnitude 2**(-k/2)
    g = np.round(u * math.sqrt(2.0) ** k)
    assert np.max(np.abs(g - u * math.sqrt(2.0) ** k)) < 1e-9
    g.setflags(write=False)
    return g, k


def tableau_unitary(t: CliffordTableau) -> np.ndarray:
    """Dense unitary of a Clifford tableau (up to global phase)."""
    g, k = _scaled_unitary(t)
    return g / math.sqrt(2.0) ** k


def _check_dense(n: int) -> None:
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense simulation limited to {MAX_DENSE_QUBITS} qubits, got {n}")


def _layers_and_n(circuit) -> tuple[tuple[CliffordTableau, ...], int]:
    layers = layers_of(circuit)
    if not layers:
        raise ValueError("circuit has no layers")
    return layers, layers[0].n


def run_exact_many(
    circuit,
    noise_rates: Sequence[float],
    obs: Observable | None = None,
    weights: Sequence[float] = UNIFORM_WEIGHTS,
    check_invariants: bool = False,
) -> np.ndarray:
    """Exact expectation values of ``circuit`` at several noise rates at once."""
    layers, n = _layers_and_n(circuit)
    _check_dense(n)
    obs = obs or Observable.zeros(n)
    if obs.n != n:
        raise ValueError(f"observable on {obs.n} qubits, circuit on {n}")
    rates = np.atleast_1d(np.asarray(noise_rates, dtype=float))
    if np.any((rates < 0) | (rates > 1)):
        raise ValueError("noise rates must lie in [0, 1]")
    weights = _check_weights(weights)
    dim = 2**n
    rho = np.zeros((rates.size, dim, dim), dtype=complex)
    rho[:, 0, 0] = 1.0
    noisy = bool(np.any(rates > 0))
    for layer in layers:
        g, k = _scaled_unitary(layer)
        # scaling by a power of two is exact, so noiseless runs stay exact
        rho = (g @ rho @ g.conj().T) * 2.0**-k
        if noisy:
            rho = apply_pauli_channel(rho, rates, n, weights)
        if check_invariants:
            for r in rho:
                DensityMatrix(r).check()
    return rho[:, obs.index, obs.index].real.copy()


def run_exact(
    circuit,
    noise_rate: float,
    obs: Observable | None = None,
    weights: Sequence[float] = UNIFORM_WEIGHTS,
    check_invariants: bool = False,
) -> float:
    """Exact ``tr[A N(rho_0)]`` by density-matrix evolution."""
    return float(run_exact_many(circuit, [noise_rate], obs, weights, check_invariants)[0])


@dataclass(frozen=True)
class ShotEstimate:
    value: float
    shots: int
    std_error: float

    @classmethod
    def from_counts(cls, successes: int, shots: int) -> "ShotEstimate":
        if shots < 1:
            raise ValueError("shots must be at least 1")
        value = successes / shots
        return cls(value, shots, math.sqrt(value * (1 - value) / shots))


class PauliFrameSampler:
    """Monte Carlo sampler of bit-flip outcomes for one layered circuit.

    The propagation of an error inserted after layer ``l`` to the end of the
    circuit depends only on the layers after it, so those suffix maps are
    computed once and reused for any noise rate or shot count.
    """

    def __init__(self, circuit):
        layers, n = _layers_and_n(circuit)
        self.n = n
        self.n_layers = len(layers)
        # suffix[l, g]: X bits (packed, qubit 0 most significant) of generator g
        # pushed through layers l+1 .. end
        bit_weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
        suffix = np.empty((self.n_layers, 2 * n), dtype=np.int64)
        acc = np.eye(2 * n, dtype=np.int64)
        for l in range(self.n_layers - 1, -1, -1):
            suffix[l] = acc[:, :n] @ bit_weights
            acc = (layers[l].xz.astype(np.int64) @ acc) % 2
        # flips caused by X, Y, Z on each qubit after each layer
        xs = suffix[:, :n]
        zs = suffix[:, n:]
        self._flips = np.stack([xs, xs ^ zs, zs], axis=-1)  # (layers, n, 3)

    def sample_final_flips(
        self,
        rate: float,
        shots: int,
        rng: np.random.Generator,
        weights: Sequence[float] = UNIFORM_WEIGHTS,
    ) -> np.ndarray:
        """Packed bit-flip pattern of each shot's final Pauli frame."""
        if not 0 <= rate <= 1:
            raise ValueError(f"noise rate must lie in [0, 1], got {rate!r}")
        if shots < 1:
            raise ValueError("shots must be at least 1")
        weights = _check_weights(weights)
        final = np.zeros(shots, dtype=np.int64)
        if rate == 0:
            return final
        cells = shots * self.n_layers * self.n
        positions = _bernoulli_positions(cells, rate, rng)
        if positions.size == 0:
            return final
        kinds = rng.choice(3, size=positions.size, p=weights)
        per_shot = self.n_layers * self.n
        shot = positions // per_shot
        rem = positions % per_shot
        flips = self._flips[rem // self.n, rem % self.n, kinds]
        # positions are sorted, so each shot's events are contiguous
        starts = np.flatnonzero(np.r_[True, shot[1:] != shot[:-1]])
        final[shot[starts]] = np.bitwise_xor.reduceat(flips, starts)
        return final

    def estimate(
        self,
        rate: float,
        shots: int,
        rng: np.random.Generator,
        obs: Observable | None = None,
        weights: Sequence[float] = UNIFORM_WEIGHTS,
    ) -> ShotEstimate:
        obs = obs or Observable.zeros(self.n)
        if obs.n != self.n:
            raise ValueError(f"observable on {obs.n} qubits, circuit on {self.n}")
        final = self.sample_final_flips(rate, shots, rng, weights)
        return ShotEstimate.from_counts(int(np.count_nonzero(final == obs.index)), shots)


def _bernoulli_positions(cells: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of successes among ``cells`` i.i.d. Bernoulli(rate) trials."""
    mean = cells * rate
    chunk = int(mean + 6 * math.sqrt(mean) + 64)
    pieces = []
    last = -1
    while True:
        gaps = rng.geometric(rate, size=chunk)
        pos = last + np.cumsum(gaps)
        if pos[-1] >= cells:
            pieces.append(pos[pos < cells])
            break
        pieces.append(pos)
        last = int(pos[-1])
    return np.concatenate(pieces)


def run_stabilizer(
    circuit,
    noise_rate: float,
    obs: Observable | None = None,
    shots: int = 10_000,
    rng: np.random.Generator | int | None = None,
    weights: Sequence[float] = UNIFORM_WEIGHTS,
) -> ShotEstimate:
    """Pauli-frame Monte Carlo estimate of the same quantity as :func:`run_exact`."""
    rng = np.random.default_rng(rng)
    return PauliFrameSampler(circuit).estimate(noise_rate, shots, rng, obs, weights)


@dataclass(frozen=True)
class DistanceScale:
    """Run the unfolded circuit at code distance ``d``."""

    d: int

    def __post_init__(self):
        validate_distance(self.d)


@dataclass(frozen=True)
class FoldScale:
    """Run the circuit folded by ``factor`` at the maximum distance ``d``."""

    factor: int
    d: int

    def __post_init__(self):
        _check_scale_factor(self.factor)
        validate_distance(self.d)


def choose_backend(backend: str, clifford_depth: int) -> str:
    if backend == "auto":
        return "exact" if clifford_depth <= AUTO_EXACT_MAX_DEPTH else "stabilizer"
    if backend not in ("exact", "stabilizer"):
        raise ValueError(f"unknown backend {backend!r} (expected exact, stabilizer or auto)")
    return backend


def expectation_at_scale(
    circuit: RbCircuit,
    realization: DistanceScale | FoldScale,
    model: NoiseModel,
    backend: str = "exact",
    shots: int = 10_000,
    rng: np.random.Generator | int | None = None,
    obs: Observable | None = None,
) -> ShotEstimate:
    """Noise-scaled expectation value of an RB circuit.

    Distance scaling keeps the circuit and raises the logical error rate;
    folding keeps the rate of the maximum distance and lengthens the circuit.
    The exact backend reports ``std_error == 0``.
    """
    if isinstance(realization, DistanceScale):
        target = circuit
        rate = logical_error_rate(model, realization.d)
    elif isinstance(realization, FoldScale):
        target = fold_global(circuit, realization.factor)
        rate = logical_error_rate(model, realization.d)
    else:
        raise TypeError(f"unsupported realization {realization!r}")
    backend = choose_backend(backend, circuit.clifford_depth)
    if backend == "exact":
        value = run_exact(target, rate, obs, model.pauli_weights)
        return ShotEstimate(value, shots, 0.0)
    return run_stabilizer(target, rate, obs, shots, rng, model.pauli_weights)
