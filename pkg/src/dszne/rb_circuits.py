"""Randomized-benchmarking circuits and global unitary folding.

A circuit is a sequence of Clifford layers. An RB circuit holds ``m`` random
Clifford elements followed by the inverse of their product, so the whole
sequence composes to the identity. Global folding replaces ``U`` by
``U (U^dag U)^k`` for scale factor ``1 + 2k``; the adjoint half lists the
inverted layers in reverse order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .clifford import CliffordTableau, compose_all, invert, random_clifford

__all__ = [
    "RbCircuit",
    "FoldedCircuit",
    "generate_rb",
    "fold_global",
    "dumps",
    "loads",
    "FORMAT_HEADER",
]

FORMAT_HEADER = "# dszne-circuit v1"


@dataclass(frozen=True)
class RbCircuit:
    n: int
    layers: tuple[CliffordTableau, ...]
    clifford_depth: int
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if len(self.layers) != self.clifford_depth + 1:
            raise ValueError(
                f"an RB circuit of depth {self.clifford_depth} has "
                f"{self.clifford_depth + 1} layers, got {len(self.layers)}"
            )
        if any(layer.n != self.n for layer in self.layers):
            raise ValueError("all layers must act on n qubits")

    def __len__(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class FoldedCircuit:
    base: RbCircuit
    scale_factor: int
    layers: tuple[CliffordTableau, ...]

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def n_folds(self) -> int:
        return (self.scale_factor - 1) // 2

    def __len__(self) -> int:
        return len(self.layers)


def generate_rb(n: int, m: int, rng: np.random.Generator | int) -> RbCircuit:
    """Build an RB circuit of ``m`` uniformly random Cliffords plus the inverse.

    ``rng`` is either a Generator or an integer seed; an integer is recorded on
    the circuit so it can be regenerated.
    """
    if m < 1:
        raise ValueError(f"Clifford depth must be at least 1, got {m}")
    if n < 1:
        raise ValueError(f"qubit count must be at least 1, got {n}")
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    elements = [random_clifford(n, rng) for _ in range(m)]
    final = invert(compose_all(elements))
    return RbCircuit(n=n, layers=tuple(elements) + (final,), clifford_depth=m, seed=seed)


def _check_scale_factor(scale_factor) -> int:
    if isinstance(scale_factor, bool) or int(scale_factor) != scale_factor:
        raise ValueError(f"fold scale factor must be an odd integer, got {scale_factor!r}")
    scale_factor = int(scale_factor)
    if scale_factor < 1 or scale_factor % 2 == 0:
        raise ValueError(f"fold scale factor must be an odd integer >= 1, got {scale_factor}")
    return scale_factor


def fold_global(c: RbCircuit, scale_factor: int) -> FoldedCircuit:
    """Globally fold ``c`` to ``scale_factor`` times its layer count."""
    scale_factor = _check_scale_factor(scale_factor)
    adjoint = tuple(invert(layer) for layer in reversed(c.layers))
    n_folds = (scale_factor - 1) // 2
    layers = c.layers + (adjoint + c.layers) * n_folds
    return FoldedCircuit(base=c, scale_factor=scale_factor, layers=layers)


def layers_of(circuit) -> tuple[CliffordTableau, ...]:
    """Layers of an RB/folded circuit or of a plain sequence of tableaux."""
    if hasattr(circuit, "layers"):
        return tuple(circuit.layers)
    return tuple(circuit)


def dumps(circuit: RbCircuit | FoldedCircuit) -> str:
    """Serialize to the line-oriented text format (one tableau per line)."""
    if isinstance(circuit, FoldedCircuit):
        base = circuit.base
        meta = f"kind=folded n={base.n} m={base.clifford_depth} seed={base.seed} " \
               f"scale_factor={circuit.scale_factor}"
    else:
        meta = f"kind=rb n={circuit.n} m={circuit.clifford_depth} seed={circuit.seed}"
    lines = [FORMAT_HEADER, "# " + meta]
    lines.extend(layer.to_text() for layer in circuit.layers)
    return "\n".join(lines) + "\n"


def _parse_meta(line: str) -> dict[str, str]:
    if not line.startswith("# "):
        raise ValueError("missing circuit metadata line")
    return dict(item.split("=", 1) for item in line[2:].split())


def loads(text: str) -> RbCircuit | FoldedCircuit:
    """Inverse of :func:`dumps`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise ValueError(f"unsupported circuit format (expected header {FORMAT_HEADER!r})")
    meta = _parse_meta(lines[1])
    layers = tuple(CliffordTableau.from_text(ln) for ln in lines[2:])
    n, m = int(meta["n"]), int(meta["m"])
    seed = None if meta["seed"] == "None" else int(meta["seed"])
    if meta["kind"] == "rb":
        return RbCircuit(n=n, layers=layers, clifford_depth=m, seed=seed)
    if meta["kind"] == "folded":
        base = RbCircuit(n=n, layers=layers[: m + 1], clifford_depth=m, seed=seed)
        folded = fold_global(base, int(meta["scale_factor"]))
        if folded.layers != layers:
            raise ValueError("folded layers do not match the folding of their base")
        return folded
    raise ValueError(f"unknown circuit kind {meta['kind']!r}")


def circuit_product(layers: Iterable[CliffordTableau]) -> CliffordTableau:
    return compose_all(layers)
