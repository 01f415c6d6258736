"""Zero-noise extrapolation of noise-scaled expectation values.

Supported models:

* polynomial ``E(l) = a_0 + a_1 l + ... + a_n l^n`` fitted by (weighted)
  linear least squares; ``linear`` is order 1 and ``richardson`` uses
  order ``len(points) - 1`` (exact interpolation);
* exponential ``E(l) = a_0 + a_1 exp(-a_2 l)`` with ``a_2 >= 0``, fitted by
  damped Gauss-Newton iterations.

The extrapolated value is the model evaluated at ``l = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ScaledData",
    "FitResult",
    "ExtrapolationError",
    "ConvergenceError",
    "fit_polynomial",
    "fit_exponential",
    "extrapolate",
    "METHODS",
]

METHODS = ("polynomial", "linear", "richardson", "exponential")


class ExtrapolationError(ValueError):
    """Raised when a fit is underdetermined or numerically singular."""


class ConvergenceError(ExtrapolationError):
    """The exponential fit ran out of iterations; ``best`` holds the last iterate."""

    def __init__(self, message: str, best: "FitResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class ScaledData:
    """Expectation values measured at increasing scale factors ``>= 1``.

    ``weights`` are optional inverse variances, one per point.
    """

    scale_factors: tuple[float, ...]
    values: tuple[float, ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        lam = tuple(float(v) for v in self.scale_factors)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "scale_factors", lam)
        object.__setattr__(self, "values", vals)
        if len(lam) != len(vals):
            raise ExtrapolationError("scale factors and values differ in length")
        if len(lam) < 2:
            raise ExtrapolationError("at least two scale factors are required")
        if lam[0] < 1:
            raise ExtrapolationError(f"scale factors must be >= 1, got {lam[0]}")
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise ExtrapolationError(f"scale factors must be strictly increasing: {lam}")
        if not np.all(np.isfinite(vals)):
            raise ExtrapolationError("expectation values must be finite")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != len(lam) or any(not (v > 0 and np.isfinite(v)) for v in w):
                raise ExtrapolationError("weights must be finite, positive and one per point")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_std_errors(cls, scale_factors, values, std_errors) -> "ScaledData":
        """Inverse-variance weights from standard errors; any zero error means unweighted."""
        err = np.asarray(std_errors, dtype=float)
        if err.size == 0 or np.any(err <= 0):
            return cls(tuple(scale_factors), tuple(values))
        return cls(tuple(scale_factors), tuple(values), tuple(1.0 / err**2))

    def __len__(self) -> int:
        return len(self.scale_factors)

    @property
    def lam(self) -> np.ndarray:
        return np.asarray(self.scale_factors)

    @property
    def e(self) -> np.ndarray:
        return np.asarray(self.values)


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple[float, ...]
    zne_value: float
    residual_norm: float
    covariance: np.ndarray | None = None
    order: int | None = None
    converged: bool = True
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    def predict(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        a = self.coefficients
        if self.model == "exponential":
            return a[0] + a[1] * np.exp(-a[2] * lam)
        return np.polynomial.polynomial.polyval(lam, a)


def _poly_covariance(design: np.ndarray, weights) -> np.ndarray | None:
    if weights is None:
        return None
    a_w = design * np.sqrt(np.asarray(weights))[:, None]
    return np.linalg.inv(a_w.T @ a_w)


def fit_polynomial(data: ScaledData, order: int, model: str = "polynomial") -> FitResult:
    """Least-squares polynomial fit; ``zne_value`` is the constant term.

    Solved with an SVD-based least-squares routine rather than the normal
    equations, since distance-scaled factors can be closely spaced.
    """
    order = int(order)
    if order < 1:
        raise ExtrapolationError(f"polynomial order must be >= 1, got {order}")
    if len(data) < order + 1:
        raise ExtrapolationError(
            f"order {order} needs at least {order + 1} points, got {len(data)}"
        )
    lam, e = data.lam, data.e
    design = np.vander(lam, order + 1, increasing=True)
    if np.all(e == e[0]):
        # constant data: the exact solution, free of solver roundoff
        return FitResult(
            model=model,
            coefficients=(float(e[0]),) + (0.0,) * order,
            zne_value=float(e[0]),
            residual_norm=0.0,
            covariance=_poly_covariance(design, data.weights),
            order=order,
            diagnostics={"flat": True},
        )
    sqrt_w = np.ones_like(lam) if data.weights is None else np.sqrt(np.asarray(data.weights))
    a_w = design * sqrt_w[:, None]
    b_w = e * sqrt_w
    # column equilibration plus one refinement step; coefficients are unscaled
    # exactly afterwards, so the model itself is unchanged
    col = np.linalg.norm(a_w, axis=0)
    a_s = a_w / col
    sol, _, rank, sv = np.linalg.lstsq(a_s, b_w, rcond=None)
    sol = sol + np.linalg.lstsq(a_s, b_w - a_s @ sol, rcond=None)[0]
    coef = sol / col
    if rank < order + 1:
        raise ExtrapolationError(
            f"design matrix is rank deficient (rank {rank} < {order + 1}); "
            f"singular values {sv}"
        )
    residual = float(np.linalg.norm(design @ coef - e))
    covariance = _poly_covariance(design, data.weights)
    return FitResult(
        model=model,
        coefficients=tuple(float(c) for c in coef),
        zne_value=float(coef[0]),
        residual_norm=residual,
        covariance=covariance,
        order=order,
        diagnostics={"condition_number": float(sv[0] / sv[-1])},
    )


def _exp_initial_guess(lam: np.ndarray, e: np.ndarray) -> np.ndarray:
    i_min = int(np.argmin(lam))
    decaying = e[i_min] >= e[np.argmax(lam)]
    a0 = e.min() if decaying else e.max()
    resid = np.abs(e - a0)
    keep = resid > 1e-12 * max(1.0, np.abs(e).max())
    a2 = 1.0
    if np.count_nonzero(keep) >= 2:
        slope = np.polyfit(lam[keep], np.log(resid[keep]), 1)[0]
        a2 = max(-slope, 0.0)
    a1 = (e[i_min] - a0) * np.exp(a2 * lam[i_min])
    return np.array([a0, a1, a2])


def fit_exponential(
    data: ScaledData,
    max_iter: int = 2000,
    tol: float = 1e-15,
) -> FitResult:
    """Fit ``a_0 + a_1 exp(-a_2 l)`` with ``a_2 >= 0``.

    Levenberg-damped Gauss-Newton. The start is the better of a log-linear
    guess and a scan over ``a_2`` with the linear parameters solved exactly;
    ``a_2`` is projected onto ``[0, inf)`` after every step. Flat data short-circuits
    to ``a_1 = 0``.

    Raises:
        ExtrapolationError: fewer than three points.
        ConvergenceError: the iteration budget ran out (``best`` attached).
    """
    if len(data) < 3:
        raise ExtrapolationError(f"exponential fit needs at least 3 points, got {len(data)}")
    lam, e = data.lam, data.e
    sqrt_w = np.ones_like(lam) if data.weights is None else np.sqrt(np.asarray(data.weights))

    spread = e.max() - e.min()
    if spread <= 1e-14 * max(1.0, np.abs(e).max()):
        a0 = float(np.average(e, weights=sqrt_w**2))
        return FitResult(
            model="exponential",
            coefficients=(a0, 0.0, 0.0),
            zne_value=a0,
            residual_norm=float(np.linalg.norm(e - a0)),
            diagnostics={"flat": True},
        )

    def residuals(a):
        return sqrt_w * (a[0] + a[1] * np.exp(-a[2] * lam) - e)

    def jacobian(a):
        ex = np.exp(-a[2] * lam)
        return sqrt_w[:, None] * np.column_stack([np.ones_like(lam), ex, -a[1] * lam * ex])

    a = _exp_initial_guess(lam, e)
    r = residuals(a)
    cost = float(r @ r)
    # with a_2 fixed the model is linear in (a_0, a_1): scan a_2 for a better start
    for a2 in np.concatenate([[0.0], np.geomspace(1e-4, 1e2, 61)]):
        basis = sqrt_w[:, None] * np.column_stack([np.ones_like(lam), np.exp(-a2 * lam)])
        lin = np.linalg.lstsq(basis, sqrt_w * e, rcond=None)[0]
        cand = np.array([lin[0], lin[1], a2])
        r_cand = residuals(cand)
        if float(r_cand @ r_cand) < cost:
            a, r, cost = cand, r_cand, float(r_cand @ r_cand)
    mu = 1e-3
    converged = False
    it = 0
    scale = max(1.0, float(e @ e))
    for it in range(1, max_iter + 1):
        jac = jacobian(a)
        jtj = jac.T @ jac
        grad = jac.T @ r
        if np.max(np.abs(grad)) <= tol * scale:
            converged = True
            break
        damping = np.sqrt(mu * np.maximum(np.diag(jtj), 1e-12))
        aug = np.vstack([jac, np.diag(damping)])
        rhs = np.concatenate([-r, np.zeros(3)])
        step = np.linalg.lstsq(aug, rhs, rcond=None)[0]
        trial = a + step
        trial[2] = max(trial[2], 0.0)
        r_trial = residuals(trial)
        cost_trial = float(r_trial @ r_trial)
        if cost_trial <= cost:
            small_step = np.max(np.abs(trial - a)) <= 1e-13 * (1 + np.max(np.abs(a)))
            small_gain = cost - cost_trial <= tol * scale
            a, r, cost = trial, r_trial, cost_trial
            mu = max(mu / 10, 1e-12)
            if cost <= (tol * scale) ** 2 or (small_step and small_gain):
                converged = True
                break
        else:
            mu *= 10
            if mu > 1e12:
                # no descent direction left: stationary point under the constraint
                converged = True
                break

    a = tuple(float(v) for v in a)
    result = FitResult(
        model="exponential",
        coefficients=a,
        zne_value=a[0] + a[1],
        residual_norm=float(np.linalg.norm(np.asarray(a[0]) + a[1] * np.exp(-a[2] * lam) - e)),
        converged=converged,
        iterations=it,
        diagnostics={"final_damping": mu},
    )
    if not converged:
        raise ConvergenceError(f"exponential fit did not converge in {max_iter} iterations", result)
    return result


def extrapolate(data: ScaledData, method: str = "polynomial", order: int = 3) -> FitResult:
    """Fit ``data`` with the chosen model and return the zero-noise estimate.

    ``order`` applies to ``method="polynomial"`` only.
    """
    if method == "polynomial":
        return fit_polynomial(data, order)
    if method == "linear":
        return fit_polynomial(data, 1, model="linear")
    if method == "richardson":
        return fit_polynomial(data, len(data) - 1, model="richardson")
    if method == "exponential":
        return fit_exponential(data)
    raise ExtrapolationError(f"unknown extrapolation method {method!r}; choose from {METHODS}")
