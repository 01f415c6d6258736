"""Logical error-rate model and the per-cycle logical Pauli channel.

The logical error rate per correction cycle of a distance-``d`` surface code
patch is modelled as ``prefactor * (p / p_th) ** ((d + 1) / 2)``. Lowering the
distance raises that rate, and the ratio to the rate at the largest available
distance is the noise scale factor used for distance-scaled extrapolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .clifford import PauliString

__all__ = [
    "NoiseModel",
    "DistancePlan",
    "logical_error_rate",
    "ds_scale_factors",
    "compose_cycles",
    "layer_channel",
    "sample_pauli_error",
    "pauli_channel_superoperator",
    "apply_superoperator",
    "apply_pauli_channel",
    "validate_distance",
    "UNIFORM_WEIGHTS",
    "MAX_SUPEROPERATOR_QUBITS",
]

UNIFORM_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)
MAX_SUPEROPERATOR_QUBITS = 4


def _check_weights(weights) -> tuple[float, float, float]:
    w = tuple(float(v) for v in weights)
    if len(w) != 3:
        raise ValueError("pauli_weights needs exactly three entries (X, Y, Z)")
    if any(v < 0 for v in w):
        raise ValueError("pauli_weights must be nonnegative")
    if not np.isclose(sum(w), 1.0, rtol=0, atol=1e-12):
        raise ValueError(f"pauli_weights must sum to 1, got {sum(w)!r}")
    return w


def validate_distance(d) -> int:
    """Return ``d`` as an int, rejecting even distances and distances below 3."""
    if isinstance(d, bool) or int(d) != d:
        raise ValueError(f"code distance must be an integer, got {d!r}")
    d = int(d)
    if d < 3:
        raise ValueError(f"code distance must be at least 3, got {d}")
    if d % 2 == 0:
        raise ValueError(f"code distance must be odd for the surface code, got {d}")
    return d


@dataclass(frozen=True)
class NoiseModel:
    """Physical error rate, threshold and the empirical prefactor.

    ``pauli_weights`` splits a logical error into X, Y and Z with the given
    probabilities. ``cycles_per_layer`` is the number of correction cycles,
    each followed by a logical Pauli error draw, per Clifford layer.
    """

    p: float
    p_th: float = 0.009
    prefactor: float = 0.03
    pauli_weights: tuple[float, float, float] = field(default=UNIFORM_WEIGHTS)
    cycles_per_layer: int = 1

    def __post_init__(self):
        if isinstance(self.cycles_per_layer, bool) or int(self.cycles_per_layer) != self.cycles_per_layer \
                or self.cycles_per_layer < 1:
            raise ValueError(f"cycles_per_layer must be a positive integer, got {self.cycles_per_layer!r}")
        object.__setattr__(self, "cycles_per_layer", int(self.cycles_per_layer))
        if not 0 < self.p_th <= 1:
            raise ValueError(f"threshold p_th must lie in (0, 1], got {self.p_th!r}")
        if not 0 < self.p < self.p_th:
            raise ValueError(
                f"physical error rate p={self.p!r} must satisfy 0 < p < p_th={self.p_th!r} "
                "(fault-tolerant regime)"
            )
        if not self.prefactor > 0:
            raise ValueError(f"prefactor must be positive, got {self.prefactor!r}")
        object.__setattr__(self, "pauli_weights", _check_weights(self.pauli_weights))


@dataclass(frozen=True)
class DistancePlan:
    """Distances ``i - j`` obtained by reducing a maximum distance ``i``."""

    i: int
    reductions: tuple[int, ...] = (0, 2, 4, 6)

    def __post_init__(self):
        object.__setattr__(self, "reductions", tuple(int(j) for j in self.reductions))
        if not self.reductions:
            raise ValueError("at least one distance reduction is required")
        if any(j < 0 for j in self.reductions):
            raise ValueError("distance reductions must be nonnegative")
        if any(b <= a for a, b in zip(self.reductions, self.reductions[1:])):
            raise ValueError(f"distance reductions must be strictly increasing: {self.reductions}")
        validate_distance(self.i)
        for d in self.distances:
            try:
                validate_distance(d)
            except ValueError as exc:
                raise ValueError(f"reduced distance {self.i} - j invalid: {exc}") from None

    @property
    def distances(self) -> tuple[int, ...]:
        return tuple(self.i - j for j in self.reductions)


def logical_error_rate(model: NoiseModel, d: int) -> float:
    """Per-cycle logical error rate at code distance ``d``."""
    d = validate_distance(d)
    return model.prefactor * (model.p / model.p_th) ** ((d + 1) / 2)


def ds_scale_factors(model: NoiseModel, plan: DistancePlan) -> np.ndarray:
    """Noise scale factors of the reduced distances relative to ``plan.i``.

    Equal to ``(p_th / p) ** (j / 2)``; the prefactor cancels.
    """
    base = logical_error_rate(model, plan.i)
    return np.array([logical_error_rate(model, d) / base for d in plan.distances])


def compose_cycles(rate: float, weights: Sequence[float], cycles: int) -> tuple[float, tuple]:
    """Single-qubit Pauli channel equivalent to ``cycles`` repetitions of one.

    Pauli channels compose by multiplying their Pauli-transfer eigenvalues.
    Returns the composite ``(rate, weights)``; weights are uniform when the
    composite rate is zero.
    """
    w = _check_weights(weights)
    if cycles == 1 or rate == 0:
        return float(rate), w
    px, py, pz = (rate * v for v in w)
    # one minus the Pauli-transfer eigenvalues on X, Y, Z, raised to the
    # power ``cycles`` without cancellation at small rates
    gaps = np.array([2 * (py + pz), 2 * (px + pz), 2 * (px + py)])
    fx, fy, fz = -np.expm1(cycles * np.log1p(-np.minimum(gaps, 1.0)))
    if np.any(gaps > 1):
        # eigenvalue may be negative: fall back to the direct power
        fx, fy, fz = 1 - (1 - gaps) ** cycles
    q = np.maximum([(fy + fz - fx) / 4, (fx + fz - fy) / 4, (fx + fy - fz) / 4], 0.0)
    total = float(q.sum())
    if total <= 0:
        return 0.0, UNIFORM_WEIGHTS
    q = q / total
    return total, (float(q[0]), float(q[1]), float(q[2]))


def layer_channel(model: NoiseModel, d: int) -> tuple[float, tuple]:
    """Per-layer ``(rate, weights)`` at distance ``d`` for ``model``."""
    return compose_cycles(logical_error_rate(model, d), model.pauli_weights, model.cycles_per_layer)


def sample_pauli_error(
    rate: float,
    n: int,
    rng: np.random.Generator,
    weights: Sequence[float] = UNIFORM_WEIGHTS,
) -> PauliString:
    """Draw one cycle of independent single-qubit Pauli errors.

    Each qubit independently receives a non-identity Pauli with probability
    ``rate``, split between X, Y and Z according to ``weights``.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"error rate must lie in [0, 1], got {rate!r}")
    w = _check_weights(weights)
    hit = rng.random(n) < rate
    kind = rng.choice(3, size=n, p=w)  # 0: X, 1: Y, 2: Z
    x = hit & (kind <= 1)
    z = hit & (kind >= 1)
    return PauliString(x, z)


def _single_qubit_kraus_weights(rate: float, weights) -> list[tuple[float, np.ndarray]]:
    w = _check_weights(weights)
    mats = [PauliString.from_str(c).to_matrix() for c in "XYZ"]
    return [(1 - rate, np.eye(2, dtype=complex))] + [(rate * wk, m) for wk, m in zip(w, mats)]


def pauli_channel_superoperator(
    rate: float, n: int, weights: Sequence[float] = UNIFORM_WEIGHTS
) -> np.ndarray:
    """Dense superoperator of the per-qubit Pauli channel on ``n`` qubits.

    Acts on row-major vectorized density matrices: ``vec(K rho K^dag) =
    (K kron conj(K)) vec(rho)``. Use :func:`apply_superoperator` to apply it.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"error rate must lie in [0, 1], got {rate!r}")
    if not 1 <= n <= MAX_SUPEROPERATOR_QUBITS:
        raise ValueError(
            f"dense superoperator limited to 1..{MAX_SUPEROPERATOR_QUBITS} qubits, got n={n}"
        )
    single = sum(c * np.kron(k, k.conj()) for c, k in _single_qubit_kraus_weights(rate, weights))
    total = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        total = np.kron(total, single)
    dim = 2**n
    # total currently acts on the interleaved index (r0 c0 r1 c1 ...); permute
    # to row-major (r0 r1 ... c0 c1 ...)
    shape = [2] * (4 * n)
    t = total.reshape(shape)
    out_axes = [2 * q for q in range(n)] + [2 * q + 1 for q in range(n)]
    in_axes = [2 * n + a for a in out_axes]
    t = t.transpose(out_axes + in_axes)
    return t.reshape(dim * dim, dim * dim)


def apply_superoperator(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    dim = rho.shape[-1]
    return (superop @ rho.reshape(dim * dim)).reshape(dim, dim)


@lru_cache(maxsize=None)
def _embedded_paulis(n: int) -> tuple[np.ndarray, ...]:
    """X, Y, Z on each qubit as dense matrices, ordered (q0 X, q0 Y, q0 Z, q1 X, ...)."""
    mats = []
    for q in range(n):
        for kind in "XYZ":
            mats.append(PauliString.single(n, q, kind).to_matrix())
    return tuple(mats)


def apply_pauli_channel(
    rho: np.ndarray, rate, n: int, weights: Sequence[float] = UNIFORM_WEIGHTS
) -> np.ndarray:
    """Apply the per-qubit Pauli channel as weighted conjugations.

    ``rho`` may carry leading batch dimensions; ``rate`` is a scalar or an
    array broadcasting against them. Qubits are processed one after another,
    which realizes the tensor product of the single-qubit channels.
    """
    w = _check_weights(weights)
    rate = np.asarray(rate, dtype=float)[..., None, None]
    paulis = _embedded_paulis(n)
    for q in range(n):
        mixed = sum(wk * (p @ rho @ p) for wk, p in zip(w, paulis[3 * q: 3 * q + 3]) if wk)
        rho = (1 - rate) * rho + rate * mixed
    return rho
