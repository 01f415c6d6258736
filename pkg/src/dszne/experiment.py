"""DS-ZNE vs folding ZNE vs unmitigated comparison under an equal sampling budget.

Every trial draws one RB circuit per Clifford depth and evaluates it in three
arms at each maximum distance ``d_max``:

* ``ds_zne``: the unfolded circuit at the reduced distances ``d_max - j``,
  extrapolated over the scale factors ``P_L(d_max - j) / P_L(d_max)``;
* ``fold_zne``: the circuit folded by each odd factor, at ``d_max``;
* ``unmitigated``: the unfolded circuit at ``d_max`` with the whole budget.

The same circuit is shared by all arms and all ``d_max`` values (a paired
comparison).

Seeding: the circuit of trial ``t`` at depth index ``k`` is generated from
``SeedSequence(seed, spawn_key=(k, t))``; the shot noise of arm ``a``, point
``s`` at distance index ``i`` comes from
``SeedSequence(seed, spawn_key=(k, t, i, a, s))``. Results therefore do not
depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .extrapolation import METHODS, ConvergenceError, ScaledData, extrapolate
from .noise import (
    DistancePlan,
    NoiseModel,
    ds_scale_factors,
    layer_channel,
    validate_distance,
)
from .rb_circuits import _check_scale_factor, fold_global, generate_rb
from .simulator import (
    MAX_DENSE_QUBITS,
    PauliFrameSampler,
    choose_backend,
    run_exact_many,
)

__all__ = [
    "Budget",
    "VirtualCoreLayout",
    "virtual_cores",
    "effective_shots",
    "EffectiveDistance",
    "effective_code_distance",
    "qubit_savings",
    "ExperimentConfig",
    "TrialRecord",
    "ArmSummary",
    "ExperimentResult",
    "EffectiveDistanceRow",
    "run_comparison",
    "summarize",
    "effective_distance_report",
    "format_report",
    "METHOD_NAMES",
]

log = logging.getLogger(__name__)

METHOD_NAMES = ("ds_zne", "fold_zne", "unmitigated")
BACKENDS = ("auto", "exact", "stabilizer")


# -- accounting ---------------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    """Device executions of one arm: ``n_circ`` circuits times ``n_shots`` each."""

    n_circ: int
    n_shots: int

    def __post_init__(self):
        if self.n_circ < 1 or self.n_shots < 1:
            raise ValueError(f"budget needs positive counts, got {self.n_circ} x {self.n_shots}")

    @property
    def n_samples(self) -> int:
        return self.n_circ * self.n_shots


def check_budget_parity(budgets: Mapping[str, Budget]) -> int:
    """Return the common ``n_samples`` of all arms or raise ``ValueError``."""
    totals = {name: b.n_samples for name, b in budgets.items()}
    if len(set(totals.values())) != 1:
        raise ValueError(f"budget mismatch between arms: {totals}")
    return next(iter(totals.values()))


@dataclass(frozen=True)
class VirtualCoreLayout:
    """Patches of distance ``d_prime`` that fit in the footprint of one distance-``d`` patch."""

    d: int
    d_prime: int

    def __post_init__(self):
        validate_distance(self.d)
        validate_distance(self.d_prime)
        if self.d_prime > self.d:
            raise ValueError(f"reduced distance {self.d_prime} exceeds the original distance {self.d}")

    @property
    def n_vc(self) -> int:
        return self.d**2 // self.d_prime**2


def virtual_cores(d: int, d_prime: int) -> int:
    """Number of virtual cores, ``floor(d**2 / d_prime**2)``."""
    return VirtualCoreLayout(d, d_prime).n_vc


def effective_shots(base_shots: int, layout: VirtualCoreLayout, parallelism_enabled: bool) -> int:
    """Shots obtainable in the time of ``base_shots`` when virtual cores run in parallel."""
    if base_shots < 1:
        raise ValueError(f"base_shots must be at least 1, got {base_shots}")
    return base_shots * layout.n_vc if parallelism_enabled else base_shots


@dataclass(frozen=True)
class EffectiveDistance:
    d_eff: int
    lower_bound: bool = False

    def __str__(self) -> str:
        return f">={self.d_eff}" if self.lower_bound else str(self.d_eff)


def _complete_curve(curve: Mapping[int, float]) -> dict[int, float]:
    """Fill missing odd distances by interpolating log(eps) linearly in d."""
    ds = sorted(curve)
    full = {}
    use_log = all(curve[d] > 0 for d in ds)
    for lo, hi in zip(ds, ds[1:]):
        for d in range(lo, hi, 2):
            if d in curve:
                full[d] = curve[d]
                continue
            t = (d - lo) / (hi - lo)
            if use_log:
                full[d] = math.exp((1 - t) * math.log(curve[lo]) + t * math.log(curve[hi]))
            else:
                full[d] = (1 - t) * curve[lo] + t * curve[hi]
    full[ds[-1]] = curve[ds[-1]]
    return full


def effective_code_distance(
    epsilon_mitigated: float,
    unmitigated_curve: Mapping[int, float],
    d: int | None = None,
) -> EffectiveDistance:
    """Smallest odd distance whose unmitigated error rate matches a mitigated one.

    Args:
        epsilon_mitigated: mitigated effective error rate.
        unmitigated_curve: unmitigated effective error rate per odd distance,
            strictly decreasing in the distance. Missing odd distances between
            tabulated ones are interpolated on a log scale.
        d: only distances ``>= d`` are considered (the distance the mitigated
            value was obtained at).

    Returns:
        The smallest qualifying distance, or the largest tabulated distance
        flagged as a lower bound when none qualifies.
    """
    if not unmitigated_curve:
        raise ValueError("unmitigated curve is empty")
    curve = {validate_distance(k): float(v) for k, v in unmitigated_curve.items()}
    ds = sorted(curve)
    if any(curve[b] >= curve[a] for a, b in zip(ds, ds[1:])):
        raise ValueError("unmitigated curve must be strictly decreasing in the distance")
    full = _complete_curve(curve)
    start = ds[0] if d is None else validate_distance(d)
    for dist in sorted(full):
        if dist >= start and full[dist] <= epsilon_mitigated:
            return EffectiveDistance(dist)
    if d is not None and d > ds[-1]:
        raise ValueError(f"distance {d} lies beyond the unmitigated curve (max {ds[-1]})")
    return EffectiveDistance(ds[-1], lower_bound=True)


def qubit_savings(d: int, d_eff: int) -> int:
    """Data qubits saved per logical qubit, ``d_eff**2 - d**2``."""
    if d_eff < d:
        raise ValueError(f"effective distance {d_eff} is below the distance {d}")
    return d_eff**2 - d**2


# -- configuration --------------------------------------------------------------


def _as_tuple(values, kind=int) -> tuple:
    if isinstance(values, (int, float)):
        values = (values,)
    return tuple(kind(v) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment recipe; validated on construction.

    Raises ``ValueError`` whose message starts with the offending field name.
    """

    noise: NoiseModel
    distance_max: tuple[int, ...] = (11, 13, 15, 17, 19, 21, 23, 25, 27)
    reductions: tuple[int, ...] = (0, 2, 4, 6)
    fold_factors: tuple[int, ...] = (1, 3, 5, 7)
    n_qubits: int = 2
    clifford_depths: tuple[int, ...] = (20, 30)
    trials: int = 100
    shots_per_scale_factor: int = 10_000
    backend: str = "auto"
    parallel_cores: bool = False
    method: str = "polynomial"
    order: int = 3
    weighted: bool = False
    seed: int = 0

    def __post_init__(self):
        def fail(name, msg):
            raise ValueError(f"{name}: {msg}")

        object.__setattr__(self, "distance_max", _as_tuple(self.distance_max))
        object.__setattr__(self, "reductions", _as_tuple(self.reductions))
        object.__setattr__(self, "fold_factors", _as_tuple(self.fold_factors))
        object.__setattr__(self, "clifford_depths", _as_tuple(self.clifford_depths))
        if not self.distance_max:
            fail("distance_max", "at least one maximum distance is required")
        if len(set(self.distance_max)) != len(self.distance_max):
            fail("distance_max", "distances must be distinct")
        for d in self.distance_max:
            try:
                DistancePlan(d, self.reductions)
            except ValueError as exc:
                fail("distance_max" if "reduction" not in str(exc) else "reductions", str(exc))
        if not self.fold_factors:
            fail("fold_factors", "at least one fold scale factor is required")
        for f in self.fold_factors:
            try:
                _check_scale_factor(f)
            except ValueError as exc:
                fail("fold_factors", str(exc))
        if any(b <= a for a, b in zip(self.fold_factors, self.fold_factors[1:])):
            fail("fold_factors", "scale factors must be strictly increasing")
        if len(self.fold_factors) != len(self.reductions):
            fail(
                "fold_factors",
                f"budget mismatch: {len(self.fold_factors)} fold scale factors vs "
                f"{len(self.reductions)} distance reductions",
            )
        if not 1 <= self.n_qubits <= MAX_DENSE_QUBITS:
            fail("n_qubits", f"must lie in 1..{MAX_DENSE_QUBITS}, got {self.n_qubits}")
        if not self.clifford_depths or any(m < 1 for m in self.clifford_depths):
            fail("clifford_depths", "depths must be positive integers")
        if self.trials < 1:
            fail("trials", f"must be at least 1, got {self.trials}")
        if self.shots_per_scale_factor < 1:
            fail("shots_per_scale_factor", f"must be at least 1, got {self.shots_per_scale_factor}")
        if self.backend not in BACKENDS:
            fail("backend", f"expected one of {BACKENDS}, got {self.backend!r}")
        if self.method not in METHODS:
            fail("method", f"expected one of {METHODS}, got {self.method!r}")
        n_points = len(self.reductions)
        if self.method == "polynomial" and not 1 <= self.order <= n_points - 1:
            fail("order", f"polynomial order must lie in 1..{n_points - 1} for {n_points} points")
        if self.method == "exponential" and n_points < 3:
            fail("method", "the exponential model needs at least three scale factors")
        if n_points < 2:
            fail("reductions", "extrapolation needs at least two scale factors")
        if self.seed < 0:
            fail("seed", "must be a nonnegative integer")

    def budgets(self) -> dict[str, Budget]:
        shots = self.shots_per_scale_factor
        return {
            "ds_zne": Budget(len(self.reductions), shots),
            "fold_zne": Budget(len(self.fold_factors), shots),
            "unmitigated": Budget(1, shots * len(self.reductions)),
        }

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


# -- results ----------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    """One arm of one trial at one maximum distance."""

    method: str
    m: int
    d_max: int
    trial: int
    seed: int
    scale_factors: tuple[float, ...]
    expectations: tuple[float, ...]
    std_errors: tuple[float, ...]
    zne_value: float
    converged: bool = True

    @property
    def epsilon(self) -> float:
        return abs(1.0 - self.zne_value)


@dataclass(frozen=True)
class ArmSummary:
    method: str
    m: int
    d_max: int
    mean: float
    std: float
    n_trials: int

    @property
    def epsilon(self) -> float:
        return abs(1.0 - self.mean)


@dataclass(frozen=True)
class EffectiveDistanceRow:
    m: int
    d: int
    d_f: EffectiveDistance | None
    d_ds: EffectiveDistance | None

    @property
    def delta_n_f(self) -> int | None:
        return None if self.d_f is None else qubit_savings(self.d, self.d_f.d_eff)

    @property
    def delta_n_ds(self) -> int | None:
        return None if self.d_ds is None else qubit_savings(self.d, self.d_ds.d_eff)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summaries: dict[tuple[str, int, int], ArmSummary] = field(default_factory=dict)
    circuit_seeds: dict[tuple[int, int], int] = field(default_factory=dict)

    def summary(self, method: str, m: int, d_max: int) -> ArmSummary:
        return self.summaries[(method, m, d_max)]

    def epsilon(self, method: str, m: int, d_max: int) -> float:
        return self.summaries[(method, m, d_max)].epsilon

    def reduction(self, method: str, m: int, d_max: int) -> float:
        """Percentage reduction of the effective error rate relative to unmitigated."""
        return _reduction(self.summaries, method, m, d_max)

    def effective_distance_report(self) -> list[EffectiveDistanceRow]:
        return effective_distance_report(self.summaries)

    def report(self) -> str:
        return format_report(self.summaries)


# -- evaluation -------------------------------------------------------------------


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def circuit_seed(master: int, depth_index: int, trial: int) -> int:
    """Seed of the RB circuit for one trial; part of the documented scheme."""
    seq = np.random.SeedSequence(master, spawn_key=(depth_index, trial))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _exact_values(circuit, channels: Sequence[tuple[float, tuple]]) -> list[float]:
    """Exact expectations for several ``(rate, weights)`` channels, batched by weights."""
    out = [0.0] * len(channels)
    groups: dict[tuple, list[int]] = {}
    for idx, (_, w) in enumerate(channels):
        groups.setdefault(tuple(w), []).append(idx)
    for w, idxs in groups.items():
        vals = run_exact_many(circuit, [channels[i][0] for i in idxs], weights=w)
        for i, v in zip(idxs, vals):
            out[i] = float(v)
    return out


def _fit(config: ExperimentConfig, lam, values, errors) -> tuple[float, bool]:
    if config.weighted:
        data = ScaledData.from_std_errors(lam, values, errors)
    else:
        data = ScaledData(tuple(lam), tuple(values))
    try:
        result = extrapolate(data, config.method, config.order)
    except ConvergenceError as exc:
        return exc.best.zne_value, False
    return result.zne_value, result.converged


def _run_unit(args) -> list[TrialRecord]:
    config, depth_index, trial, noiseless = args
    m = config.clifford_depths[depth_index]
    seed = circuit_seed(config.seed, depth_index, trial)
    circuit = generate_rb(config.n_qubits, m, seed)
    model = config.noise
    backend = choose_backend(config.backend, m)
    shots = config.shots_per_scale_factor
    unmit_shots = config.budgets()["unmitigated"].n_shots
    folded = {f: (circuit if f == 1 else fold_global(circuit, f)) for f in config.fold_factors}

    def channel(d):
        rate, w = layer_channel(model, d)
        return (0.0 if noiseless else rate), w

    records = []
    if backend == "exact":
        ds_dist = sorted({d - j for d in config.distance_max for j in config.reductions}
                         | set(config.distance_max))
        base = dict(zip(ds_dist, _exact_values(circuit, [channel(d) for d in ds_dist])))
        fold_vals = {1: {d: base[d] for d in config.distance_max}}
        for f in config.fold_factors:
            if f != 1:
                vals = _exact_values(folded[f], [channel(d) for d in config.distance_max])
                fold_vals[f] = dict(zip(config.distance_max, vals))

    samplers = {}
    if backend == "stabilizer":
        samplers = {f: PauliFrameSampler(c) for f, c in folded.items()}

    def sample(f, d, n_shots, key):
        rate, w = channel(d)
        est = samplers[f].estimate(rate, n_shots, _substream(config.seed, *key), weights=w)
        return est.value, est.std_error

    for i, d_max in enumerate(config.distance_max):
        plan = DistancePlan(d_max, config.reductions)
        lam_ds = tuple(float(v) for v in ds_scale_factors(model, plan))
        lam_f = tuple(float(f) for f in config.fold_factors)
        if backend == "exact":
            e_ds = [base[d] for d in plan.distances]
            s_ds = [0.0] * len(e_ds)
            e_f = [fold_vals[f][d_max] for f in config.fold_factors]
            s_f = [0.0] * len(e_f)
            e_u, s_u = base[d_max], 0.0
        else:
            e_ds, s_ds = [], []
            for s, d in enumerate(plan.distances):
                n = effective_shots(shots, VirtualCoreLayout(d_max, d), config.parallel_cores)
                v, err = sample(1, d, n, (depth_index, trial, i, 0, s))
                e_ds.append(v)
                s_ds.append(err)
            e_f, s_f = [], []
            for s, f in enumerate(config.fold_factors):
                v, err = sample(f, d_max, shots, (depth_index, trial, i, 1, s))
                e_f.append(v)
                s_f.append(err)
            e_u, s_u = sample(1, d_max, unmit_shots, (depth_index, trial, i, 2, 0))
        z_ds, ok_ds = _fit(config, lam_ds, e_ds, s_ds)
        z_f, ok_f = _fit(config, lam_f, e_f, s_f)
        common = dict(m=m, d_max=d_max, trial=trial, seed=seed)
        records.append(TrialRecord("ds_zne", scale_factors=lam_ds, expectations=tuple(e_ds),
                                   std_errors=tuple(s_ds), zne_value=z_ds, converged=ok_ds, **common))
        records.append(TrialRecord("fold_zne", scale_factors=lam_f, expectations=tuple(e_f),
                                   std_errors=tuple(s_f), zne_value=z_f, converged=ok_f, **common))
        records.append(TrialRecord("unmitigated", scale_factors=(1.0,), expectations=(e_u,),
                                   std_errors=(s_u,), zne_value=e_u, **common))
    return records


def summarize(records: Sequence[TrialRecord]) -> dict[tuple[str, int, int], ArmSummary]:
    """Mean and sample standard deviation of the zero-noise estimates per arm.

    Trials are reduced in ascending trial order, so the result depends only on
    the records and not on the order they arrived in.
    """
    groups: dict[tuple[str, int, int], list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.m, rec.d_max), []).append(rec)
    out = {}
    for key, recs in groups.items():
        recs = sorted(recs, key=lambda r: r.trial)
        z = np.array([r.zne_value for r in recs])
        std = float(np.std(z, ddof=1)) if z.size > 1 else 0.0
        out[key] = ArmSummary(key[0], key[1], key[2], float(np.mean(z)), std, z.size)
    return out


def run_comparison(
    config: ExperimentConfig,
    jobs: int = 1,
    *,
    noiseless: bool = False,
) -> ExperimentResult:
    """Run every trial of ``config`` and aggregate the three arms.

    Args:
        config: validated experiment configuration.
        jobs: worker processes; the result does not depend on it.
        noiseless: force every logical error rate to zero (sanity runs).
    """
    budgets = config.budgets()
    n_samples = check_budget_parity(budgets)
    log.info(
        "budget parity: %s -> n_samples=%d per arm and distance",
        ", ".join(f"{k}={b.n_circ}x{b.n_shots}" for k, b in budgets.items()),
        n_samples,
    )
    units = [
        (config, k, t, noiseless)
        for k in range(len(config.clifford_depths))
        for t in range(config.trials)
    ]
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_unit, units, chunksize=max(1, len(units) // (4 * jobs))))
    else:
        chunks = [_run_unit(u) for u in units]
    records = [rec for chunk in chunks for rec in chunk]
    seeds = {(k, t): circuit_seed(config.seed, k, t) for _, k, t, _ in units}
    n_bad = sum(not r.converged for r in records)
    if n_bad:
        log.warning("%d extrapolations did not converge; their last iterate was used", n_bad)
    return ExperimentResult(config, records, summarize(records), seeds)


# -- reporting -------------------------------------------------------------------------


def _reduction(summaries, method, m, d_max) -> float:
    eps_u = summaries[("unmitigated", m, d_max)].epsilon
    eps = summaries[(method, m, d_max)].epsilon
    if eps_u == 0:
        return float("nan")
    return 100.0 * (1.0 - eps / eps_u)


def _depths_and_distances(summaries) -> tuple[list[int], list[int]]:
    ms = sorted({k[1] for k in summaries})
    ds = sorted({k[2] for k in summaries})
    return ms, ds


def effective_distance_report(summaries) -> list[EffectiveDistanceRow]:
    """Effective distances of both mitigated arms for every ``(m, d_max)``.

    The unmitigated curve of the same depth is the reference; when it is not
    strictly decreasing the distances are left undetermined (``None``).
    """
    ms, _ = _depths_and_distances(summaries)
    rows = []
    for m in ms:
        ds = sorted(k[2] for k in summaries if k[0] == "unmitigated" and k[1] == m)
        curve = {d: summaries[("unmitigated", m, d)].epsilon for d in ds}
        try:
            effective_code_distance(curve[ds[-1]], curve)
            valid = True
        except ValueError:
            valid = False
        for d in ds:
            def eff(method):
                if not valid or (method, m, d) not in summaries:
                    return None
                return effective_code_distance(summaries[(method, m, d)].epsilon, curve, d)
            rows.append(EffectiveDistanceRow(m, d, eff("fold_zne"), eff("ds_zne")))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.6e}"


def format_report(summaries) -> str:
    """Plain-text summary: error-rate table, reductions and effective distances."""
    ms, _ = _depths_and_distances(summaries)
    lines = ["# dszne summary v1", ""]
    lines.append("effective logical error rate eps = |1 - mean| (mean +- std over trials)")
    header = f"{'m':>6} {'d_max':>5} {'method':>12} {'mean':>14} {'std':>14} {'eps':>14} {'reduction%':>10}"
    lines.append(header)
    for m in ms:
        ds = sorted({k[2] for k in summaries if k[1] == m})
        for d in ds:
            for method in METHOD_NAMES:
                s = summaries.get((method, m, d))
                if s is None:
                    continue
                red = "" if method == "unmitigated" else f"{_reduction(summaries, method, m, d):.2f}"
                lines.append(
                    f"{m:>6} {d:>5} {method:>12} {_fmt(s.mean):>14} {_fmt(s.std):>14} "
                    f"{_fmt(s.epsilon):>14} {red:>10}"
                )
    lines.append("")
    lines.append("best reduction over d_max")
    for m in ms:
        ds = sorted({k[2] for k in summaries if k[1] == m})
        parts = []
        for method in ("fold_zne", "ds_zne"):
            reds = [(_reduction(summaries, method, m, d), d) for d in ds if (method, m, d) in summaries]
            reds = [r for r in reds if not math.isnan(r[0])]
            if reds:
                best, at = max(reds)
                parts.append(f"{method} {best:.2f}% at d_max={at}")
            else:
                parts.append(f"{method} n/a")
        lines.append(f"  m={m}: " + "; ".join(parts))
    lines.append("")
    lines.append("effective code distance and data-qubit savings per logical qubit")
    lines.append(f"{'m':>6} {'d':>5} {'d_F':>5} {'d_DS':>5} {'dn_F':>6} {'dn_DS':>6}")
    for row in effective_distance_report(summaries):
        def cell(v):
            return "n/a" if v is None else str(v)
        lines.append(
            f"{row.m:>6} {row.d:>5} {cell(row.d_f):>5} {cell(row.d_ds):>5} "
            f"{cell(row.delta_n_f):>6} {cell(row.delta_n_ds):>6}"
        )
    lines.append("('>=' marks a lower bound: no tabulated unmitigated distance is as good)")
    return "\n".join(lines) + "\n"
