"""Clifford group elements as binary symplectic tableaux.

Conventions used throughout the package:

* A Pauli string is ``i**phase * P_0 (x) P_1 (x) ... (x) P_{n-1}`` where each
  ``P_q`` is one of the Hermitian matrices I, X, Y, Z selected by the bit pair
  ``(x[q], z[q])`` -- ``(1, 1)`` is Y, not XZ.
* Qubit 0 is the most significant bit of a computational basis index.
* A tableau stores the conjugation image of every generator. Row ``q`` holds
  the image of ``X_q`` and row ``n + q`` the image of ``Z_q``; columns are the
  x bits followed by the z bits. Global phase is not represented.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PauliString",
    "CliffordTableau",
    "compose",
    "compose_all",
    "invert",
    "conjugate",
    "random_clifford",
    "symplectic_group_order",
    "symplectic_from_index",
    "identity",
    "hadamard",
    "phase",
    "cnot",
]

_PAULI_CHARS = "IXZY"  # indexed by x + 2 z
_PHASE_PREFIX = ("+", "+i", "-", "-i")

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_MATS = (_I2, _X, _Z, _Y)


def _frozen(a, dtype=np.uint8) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


def _product_phase(x1, z1, x2, z2):
    """Power of i picked up by the single-qubit products ``P(x1,z1) P(x2,z2)``.

    Inputs are integer arrays (or scalars) of bits; the result is summed by the
    caller modulo 4.
    """
    x1 = np.asarray(x1, dtype=np.int64)
    z1 = np.asarray(z1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    z2 = np.asarray(z2, dtype=np.int64)
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    )


class PauliString:
    """An n-qubit Pauli operator with a phase in {+1, -1, +i, -i}.

    Args:
        x: length-n bit vector of X components.
        z: length-n bit vector of Z components.
        phase: exponent ``k`` of the prefactor ``i**k``; reduced modulo 4.
    """

    __slots__ = ("x", "z", "phase")

    def __init__(self, x, z, phase: int = 0):
        x = np.asarray(x).astype(np.uint8).ravel()
        z = np.asarray(z).astype(np.uint8).ravel()
        if x.shape != z.shape:
            raise ValueError(f"x and z bit vectors differ in length ({x.size} != {z.size})")
        if np.any(x > 1) or np.any(z > 1):
            raise ValueError("Pauli bit vectors must contain only 0 and 1")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "z", _frozen(z))
        object.__setattr__(self, "phase", int(phase) % 4)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def sign(self) -> complex:
        return 1j**self.phase

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        """The Pauli ``kind`` ('X', 'Y' or 'Z') acting on one qubit."""
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        if kind not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli {kind!r}")
        x[qubit] = kind in ("X", "Y")
        z[qubit] = kind in ("Z", "Y")
        return cls(x, z)

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        """Parse strings such as ``'+XZ'``, ``'-iYI'`` or ``'XX'``."""
        text = text.strip()
        phase = 0
        for k in (3, 1, 2, 0):
            prefix = _PHASE_PREFIX[k]
            if text.startswith(prefix):
                phase = k
                text = text[len(prefix):]
                break
        if text.startswith("i"):
            phase = (phase + 1) % 4
            text = text[1:]
        try:
            codes = [_PAULI_CHARS.index(c) for c in text]
        except ValueError:
            raise ValueError(f"invalid Pauli string {text!r}") from None
        codes = np.array(codes, dtype=np.uint8)
        return cls(codes & 1, codes >> 1, phase)

    def __str__(self) -> str:
        body = "".join(_PAULI_CHARS[int(a) + 2 * int(b)] for a, b in zip(self.x, self.z))
        return _PHASE_PREFIX[self.phase] + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.phase == other.phase
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes(), self.phase))

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
        extra = int(np.sum(_product_phase(self.x, self.z, other.x, other.z)))
        return PauliString(self.x ^ other.x, self.z ^ other.z, self.phase + other.phase + extra)

    def commutes(self, other: "PauliString") -> bool:
        s = int(np.sum(self.x & other.z) + np.sum(self.z & other.x))
        return s % 2 == 0

    def is_identity(self, ignore_phase: bool = True) -> bool:
        if not ignore_phase and self.phase != 0:
            return False
        return not (self.x.any() or self.z.any())

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix, qubit 0 as the most significant factor."""
        mats = [_PAULI_MATS[int(a) + 2 * int(b)] for a, b in zip(self.x, self.z)]
        return self.sign * reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def _conjugate_rows(xz: np.ndarray, r: np.ndarray, bits: np.ndarray, phases: np.ndarray):
    """Push many Pauli rows through a tableau at once.

    ``bits`` is (k, 2n) in x|z layout, ``phases`` the i-exponents of the rows.
    Returns the image bits and phases.
    """
    n = xz.shape[0] // 2
    bits = np.asarray(bits, dtype=np.uint8)
    k = bits.shape[0]
    acc = np.zeros((k, 2 * n), dtype=np.uint8)
    # Y = i X Z, so a Hermitian row carries one extra i per Y factor
    acc_phase = np.asarray(phases, dtype=np.int64) + np.sum(
        bits[:, :n].astype(np.int64) & bits[:, n:], axis=1
    )
    for q in range(n):
        for g in (q, n + q):
            mask = bits[:, g].astype(bool)
            if not mask.any():
                continue
            row = xz[g]
            sel = acc[mask]
            extra = _product_phase(sel[:, :n], sel[:, n:], row[:n], row[n:]).sum(axis=1)
            acc_phase[mask] += int(r[g]) + extra
            acc[mask] = sel ^ row
    return acc, acc_phase % 4


class CliffordTableau:
    """An n-qubit Clifford group element, up to global phase.

    Construct from generator images with :meth:`from_images`, or through the
    gate constructors and :func:`random_clifford`. Instances are immutable and
    hashable; two tableaux compare equal exactly when they represent the same
    Clifford operation modulo global phase.
    """

    __slots__ = ("xz", "r")

    def __init__(self, xz, r, check: bool = True):
        xz = np.asarray(xz, dtype=np.uint8)
        r = np.asarray(r, dtype=np.int64) % 4
        if xz.ndim != 2 or xz.shape[0] != xz.shape[1] or xz.shape[0] % 2:
            raise ValueError(f"tableau matrix must be 2n x 2n, got shape {xz.shape}")
        if r.shape != (xz.shape[0],):
            raise ValueError("one phase per generator image is required")
        if check:
            if np.any(r % 2):
                raise ValueError("generator images must be Hermitian (phase +1 or -1)")
            if not _is_symplectic(xz):
                raise ValueError("generator images violate the symplectic condition")
        object.__setattr__(self, "xz", _frozen(xz))
        object.__setattr__(self, "r", _frozen(r, np.int8))

    def __setattr__(self, name, value):
        raise AttributeError("CliffordTableau is immutable")

    @property
    def n(self) -> int:
        return self.xz.shape[0] // 2

    @classmethod
    def from_images(cls, x_images: Sequence[PauliString], z_images: Sequence[PauliString]):
        images = list(x_images) + list(z_images)
        n = len(x_images)
        if len(z_images) != n or any(p.n != n for p in images):
            raise ValueError("need n X-images and n Z-images on n qubits")
        xz = np.array([np.concatenate([p.x, p.z]) for p in images], dtype=np.uint8)
        r = np.array([p.phase for p in images])
        return cls(xz, r)

    @property
    def images(self) -> list[PauliString]:
        """Images of X_0..X_{n-1} followed by Z_0..Z_{n-1}."""
        n = self.n
        return [PauliString(row[:n], row[n:], ph) for row, ph in zip(self.xz, self.r)]

    def x_image(self, q: int) -> PauliString:
        return self.images[q]

    def z_image(self, q: int) -> PauliString:
        return self.images[self.n + q]

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.xz, np.eye(2 * self.n, dtype=np.uint8)) and not self.r.any())

    def satisfies_symplectic(self) -> bool:
        return _is_symplectic(self.xz)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return np.array_equal(self.xz, other.xz) and np.array_equal(self.r, other.r)

    def __hash__(self) -> int:
        return hash((self.xz.tobytes(), self.r.tobytes()))

    def __repr__(self) -> str:
        return f"CliffordTableau({self.to_text()!r})"

    def to_text(self) -> str:
        """Space-separated generator images, e.g. ``'+ZI +IX +XI -IZ'``."""
        return " ".join(str(p) for p in self.images)

    @classmethod
    def from_text(cls, text: str) -> "CliffordTableau":
        images = [PauliString.from_str(tok) for tok in text.split()]
        if len(images) % 2:
            raise ValueError("a tableau dump lists an even number of images")
        n = len(images) // 2
        return cls.from_images(images[:n], images[n:])

    def then(self, other: "CliffordTableau") -> "CliffordTableau":
        return compose(self, other)


def _symplectic_form(n: int) -> np.ndarray:
    lam = np.zeros((2 * n, 2 * n), dtype=np.int64)
    lam[:n, n:] = np.eye(n, dtype=np.int64)
    lam[n:, :n] = np.eye(n, dtype=np.int64)
    return lam


def _is_symplectic(xz: np.ndarray) -> bool:
    n = xz.shape[0] // 2
    lam = _symplectic_form(n)
    m = xz.astype(np.int64)
    return bool(np.array_equal((m @ lam @ m.T) % 2, lam))


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """The Clifford obtained by applying ``a`` first and then ``b``."""
    if a.n != b.n:
        raise ValueError(f"cannot compose tableaux on {a.n} and {b.n} qubits")
    xz, r = _conjugate_rows(b.xz, b.r, a.xz, a.r)
    return CliffordTableau(xz, r, check=False)


def invert(a: CliffordTableau) -> CliffordTableau:
    """The inverse element, so that ``compose(a, invert(a))`` is the identity."""
    n = a.n
    lam = _symplectic_form(n)
    inv_bits = (lam @ a.xz.T.astype(np.int64) @ lam) % 2
    img, ph = _conjugate_rows(a.xz, a.r, inv_bits, np.zeros(2 * n, dtype=np.int64))
    assert np.array_equal(img, np.eye(2 * n, dtype=np.uint8))
    return CliffordTableau(inv_bits, (-ph) % 4, check=False)


def conjugate(a: CliffordTableau, p: PauliString) -> PauliString:
    """Return ``U p U^dagger`` for the Clifford ``U`` represented by ``a``."""
    if a.n != p.n:
        raise ValueError(f"tableau acts on {a.n} qubits, Pauli on {p.n}")
    bits = np.concatenate([p.x, p.z])[None, :]
    img, ph = _conjugate_rows(a.xz, a.r, bits, np.array([p.phase]))
    return PauliString(img[0, : a.n], img[0, a.n:], int(ph[0]))


# ---------------------------------------------------------------------------
# gate constructors


def identity(n: int) -> CliffordTableau:
    return CliffordTableau(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n), check=False)


def _single_qubit_gate(n: int, q: int, x_img: str, z_img: str) -> CliffordTableau:
    images = [PauliString.single(n, k, "X") for k in range(n)] + [
        PauliString.single(n, k, "Z") for k in range(n)
    ]
    for slot, text in ((q, x_img), (n + q, z_img)):
        local = PauliString.from_str(text)
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        x[q], z[q] = local.x[0], local.z[0]
        images[slot] = PauliString(x, z, local.phase)
    return CliffordTableau.from_images(images[:n], images[n:])


def hadamard(n: int, q: int) -> CliffordTableau:
    return _single_qubit_gate(n, q, "Z", "X")


def phase(n: int, q: int) -> CliffordTableau:
    """The S gate: X -> Y, Z -> Z."""
    return _single_qubit_gate(n, q, "Y", "Z")


def cnot(n: int, control: int, target: int) -> CliffordTableau:
    if control == target:
        raise ValueError("control and target must differ")
    xz = np.eye(2 * n, dtype=np.uint8)
    xz[control, target] = 1  # X_c -> X_c X_t
    xz[n + target, n + control] = 1  # Z_t -> Z_c Z_t
    return CliffordTableau(xz, np.zeros(2 * n))


# ---------------------------------------------------------------------------
# uniform sampling
#
# Index-to-element bijection onto Sp(2n, F2) after Koenig and Smolin,
# J. Math. Phys. 55, 122202 (2014). Internally vectors are interleaved
# (x_0, z_0, x_1, z_1, ...); the result is permuted into the x|z layout.


def symplectic_group_order(n: int) -> int:
    order = 2 ** (n * n)
    for j in range(1, n + 1):
        order *= 4**j - 1
    return order


def _inner(v: np.ndarray, w: np.ndarray) -> int:
    return int(np.sum(v[0::2] * w[1::2] + v[1::2] * w[0::2]) % 2)


def _transvection(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v + _inner(k, v) * k) % 2


def _int_to_bits(i: int, n: int) -> np.ndarray:
    return np.array([(i >> j) & 1 for j in range(n)], dtype=np.int64)


def _find_transvection(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Two vectors h1, h2 with ``y = Z_h1 Z_h2 x`` (either may be zero)."""
    out = np.zeros((2, x.size), dtype=np.int64)
    if np.array_equal(x, y):
        return out
    if _inner(x, y) == 1:
        out[0] = (x + y) % 2
        return out
    z = np.zeros(x.size, dtype=np.int64)
    half = x.size // 2
    for i in range(half):
        ii = 2 * i
        if (x[ii] + x[ii + 1]) != 0 and (y[ii] + y[ii + 1]) != 0:
            z[ii] = (x[ii] + y[ii]) % 2
            z[ii + 1] = (x[ii + 1] + y[ii + 1]) % 2
            if z[ii] + z[ii + 1] == 0:
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            out[0] = (x + z) % 2
            out[1] = (y + z) % 2
            return out
    for i in range(half):
        ii = 2 * i
        if (x[ii] + x[ii + 1]) != 0 and (y[ii] + y[ii + 1]) == 0:
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for i in range(half):
        ii = 2 * i
        if (x[ii] + x[ii + 1]) == 0 and (y[ii] + y[ii + 1]) != 0:
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    out[0] = (x + z) % 2
    out[1] = (y + z) % 2
    return out


def _symplectic_interleaved(i: int, n: int) -> np.ndarray:
    nn = 2 * n
    s = (1 << nn) - 1
    k = (i % s) + 1
    i //= s
    f1 = _int_to_bits(k, nn)
    e1 = np.zeros(nn, dtype=np.int64)
    e1[0] = 1
    t = _find_transvection(e1, f1)
    bits = _int_to_bits(i % (1 << (nn - 1)), nn - 1)
    eprime = e1.copy()
    eprime[2:] = bits[1:]
    h0 = _transvection(t[0], eprime)
    h0 = _transvection(t[1], h0)
    if bits[0] == 1:
        f1 = f1 * 0
    g = np.eye(nn, dtype=np.int64)
    if n > 1:
        g[2:, 2:] = _symplectic_interleaved(i >> (nn - 1), n - 1)
    for j in range(nn):
        row = g[j]
        for h in (t[0], t[1], h0, f1):
            row = _transvection(h, row)
        g[j] = row
    return g


def symplectic_from_index(index: int, n: int) -> np.ndarray:
    """The ``index``-th element of Sp(2n, F2) as a 2n x 2n matrix in x|z layout.

    The map is a bijection from ``range(symplectic_group_order(n))``.
    """
    if not 0 <= index < symplectic_group_order(n):
        raise ValueError(f"index {index} outside the symplectic group of order "
                         f"{symplectic_group_order(n)}")
    g = _symplectic_interleaved(index, n)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return g[np.ix_(perm, perm)].astype(np.uint8)


def _random_index(n: int, rng: np.random.Generator) -> int:
    # mixed-radix digits consumed by _symplectic_interleaved, most significant last
    index = 0
    weight = 1
    for level in range(n, 0, -1):
        nn = 2 * level
        for radix in ((1 << nn) - 1, 1 << (nn - 1)):
            index += int(rng.integers(radix)) * weight
            weight *= radix
    return index


def random_clifford(n: int, rng: np.random.Generator | int | None = None) -> CliffordTableau:
    """Draw an n-qubit Clifford uniformly at random (modulo global phase).

    A uniformly random symplectic matrix is combined with uniformly random
    signs on the 2n generator images; every sign pattern is realized by
    multiplying with a Pauli, so the result is uniform over the group.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(rng)
    xz = symplectic_from_index(_random_index(n, rng), n)
    signs = 2 * rng.integers(0, 2, size=2 * n)
    return CliffordTableau(xz, signs, check=False)


def compose_all(layers: Iterable[CliffordTableau]) -> CliffordTableau:
    """Compose a sequence of tableaux in application order."""
    layers = list(layers)
    if not layers:
        raise ValueError("need at least one layer")
    return reduce(compose, layers)
