"""Command-line entry point: ``dszne run | report | plan``.

Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

import yaml

from .experiment import (
    METHOD_NAMES,
    ExperimentConfig,
    TrialRecord,
    format_report,
    run_comparison,
    summarize,
    virtual_cores,
)
from .noise import DistancePlan, NoiseModel, ds_scale_factors, logical_error_rate

log = logging.getLogger("dszne")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

CSV_HEADER = "# dszne-results v1"
CSV_COLUMNS = (
    "method", "m", "d_max", "scale_factor", "trial",
    "expectation", "std_error", "zne_value", "epsilon", "seed",
)


class RecipeError(ValueError):
    """Invalid recipe or CSV content; the message names the offending field."""


# -- recipes -------------------------------------------------------------------------

_SECTIONS = {
    "noise": {"p", "p_th", "prefactor", "pauli_weights", "cycles_per_layer"},
    "distances": {"distance_max", "reductions"},
    "folding": {"scale_factors"},
    "circuits": {"n", "clifford_depths", "trials"},
    "budget": {"shots_per_scale_factor"},
    "extrapolation": {"method", "order", "weighted"},
}
_SCALARS = {"backend", "parallel_cores", "seed"}

# config field -> recipe path, used to translate validation messages
_FIELD_PATHS = {
    "distance_max": "distances.distance_max",
    "reductions": "distances.reductions",
    "fold_factors": "folding.scale_factors",
    "n_qubits": "circuits.n",
    "clifford_depths": "circuits.clifford_depths",
    "trials": "circuits.trials",
    "shots_per_scale_factor": "budget.shots_per_scale_factor",
    "method": "extrapolation.method",
    "order": "extrapolation.order",
    "weighted": "extrapolation.weighted",
    "backend": "backend",
    "parallel_cores": "parallel_cores",
    "seed": "seed",
}


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise RecipeError(f"{path}: expected an integer, got {value!r}")
    return int(value)


def _float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise RecipeError(f"{path}: expected a finite number, got {value!r}")
    return float(value)


def _int_list(value, path: str) -> tuple[int, ...]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise RecipeError(f"{path}: expected a nonempty list of integers, got {value!r}")
    return tuple(_int(v, f"{path}[{i}]") for i, v in enumerate(value))


def _flag(value, path: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("on", "off", "true", "false"):
        return value.lower() in ("on", "true")
    raise RecipeError(f"{path}: expected on/off, got {value!r}")


def config_from_dict(data: Any) -> ExperimentConfig:
    """Validate a parsed recipe tree and build the experiment configuration."""
    if not isinstance(data, dict):
        raise RecipeError("recipe: expected a mapping of sections")
    for key in data:
        if key not in _SECTIONS and key not in _SCALARS:
            raise RecipeError(f"{key}: unknown recipe section")
    sections = {}
    for name, allowed in _SECTIONS.items():
        sec = data.get(name, {}) or {}
        if not isinstance(sec, dict):
            raise RecipeError(f"{name}: expected a mapping")
        for key in sec:
            if key not in allowed:
                raise RecipeError(f"{name}.{key}: unknown key")
        sections[name] = sec

    noise = sections["noise"]
    if "p" not in noise:
        raise RecipeError("noise.p: required")
    noise_kwargs = {"p": _float(noise["p"], "noise.p")}
    for key in ("p_th", "prefactor"):
        if key in noise:
            noise_kwargs[key] = _float(noise[key], f"noise.{key}")
    if "pauli_weights" in noise:
        w = noise["pauli_weights"]
        if not isinstance(w, list):
            raise RecipeError(f"noise.pauli_weights: expected three numbers, got {w!r}")
        noise_kwargs["pauli_weights"] = tuple(
            _float(v, f"noise.pauli_weights[{i}]") for i, v in enumerate(w)
        )
    if "cycles_per_layer" in noise:
        noise_kwargs["cycles_per_layer"] = _int(noise["cycles_per_layer"], "noise.cycles_per_layer")
    try:
        model = NoiseModel(**noise_kwargs)
    except ValueError as exc:
        msg = str(exc)
        key = "p" if "p=" in msg else next(
            (k for k in ("pauli_weights", "cycles_per_layer", "prefactor", "p_th") if k in msg), "p")
        raise RecipeError(f"noise.{key}: {msg}") from None

    kwargs: dict[str, Any] = {"noise": model}
    dist, fold, circ = sections["distances"], sections["folding"], sections["circuits"]
    if "distance_max" in dist:
        kwargs["distance_max"] = _int_list(dist["distance_max"], "distances.distance_max")
    if "reductions" in dist:
        kwargs["reductions"] = _int_list(dist["reductions"], "distances.reductions")
    if "scale_factors" in fold:
        kwargs["fold_factors"] = _int_list(fold["scale_factors"], "folding.scale_factors")
    if "n" in circ:
        kwargs["n_qubits"] = _int(circ["n"], "circuits.n")
    if "clifford_depths" in circ:
        kwargs["clifford_depths"] = _int_list(circ["clifford_depths"], "circuits.clifford_depths")
    if "trials" in circ:
        kwargs["trials"] = _int(circ["trials"], "circuits.trials")
    budget = sections["budget"]
    if "shots_per_scale_factor" in budget:
        kwargs["shots_per_scale_factor"] = _int(
            budget["shots_per_scale_factor"], "budget.shots_per_scale_factor")
    ext = sections["extrapolation"]
    if "method" in ext:
        if not isinstance(ext["method"], str):
            raise RecipeError(f"extrapolation.method: expected a name, got {ext['method']!r}")
        kwargs["method"] = ext["method"]
    if "order" in ext:
        kwargs["order"] = _int(ext["order"], "extrapolation.order")
    if "weighted" in ext:
        kwargs["weighted"] = _flag(ext["weighted"], "extrapolation.weighted")
    if "backend" in data:
        kwargs["backend"] = str(data["backend"])
    if "parallel_cores" in data:
        kwargs["parallel_cores"] = _flag(data["parallel_cores"], "parallel_cores")
    if "seed" in data:
        kwargs["seed"] = _int(data["seed"], "seed")
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        field, _, msg = str(exc).partition(": ")
        raise RecipeError(f"{_FIELD_PATHS.get(field, field)}: {msg}") from None


def config_to_dict(config: ExperimentConfig) -> dict:
    """Recipe tree of a configuration; ``config_from_dict`` inverts it."""
    noise = config.noise
    return {
        "noise": {
            "p": noise.p,
            "p_th": noise.p_th,
            "prefactor": noise.prefactor,
            "pauli_weights": list(noise.pauli_weights),
            "cycles_per_layer": noise.cycles_per_layer,
        },
        "distances": {
            "distance_max": list(config.distance_max),
            "reductions": list(config.reductions),
        },
        "folding": {"scale_factors": list(config.fold_factors)},
        "circuits": {
            "n": config.n_qubits,
            "clifford_depths": list(config.clifford_depths),
            "trials": config.trials,
        },
        "budget": {"shots_per_scale_factor": config.shots_per_scale_factor},
        "extrapolation": {
            "method": config.method,
            "order": config.order,
            "weighted": config.weighted,
        },
        "backend": config.backend,
        "parallel_cores": "on" if config.parallel_cores else "off",
        "seed": config.seed,
    }


def dump_recipe(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def parse_recipe(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise RecipeError(f"recipe: not valid YAML ({exc})") from None
    return config_from_dict(data)


def load_recipe(path: str | os.PathLike) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_recipe(fh.read())


# -- result files ---------------------------------------------------------------------


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    """One row per (trial, scale factor); the unmitigated row is its own summary."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        for lam, e, s in zip(rec.scale_factors, rec.expectations, rec.std_errors):
            writer.writerow([
                rec.method, rec.m, rec.d_max, repr(float(lam)), rec.trial,
                repr(float(e)), repr(float(s)), repr(float(rec.zne_value)),
                repr(float(rec.epsilon)), rec.seed,
            ])
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    """Inverse of :func:`records_to_csv`; raises ``RecipeError`` on schema mismatch."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise RecipeError(f"csv: missing or unsupported version header (expected {CSV_HEADER!r})")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise RecipeError(f"csv: expected columns {','.join(CSV_COLUMNS)}, got {header}")
    groups: dict[tuple, dict] = {}
    for lineno, row in enumerate(reader, start=3):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise RecipeError(f"csv line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        try:
            method = row[0]
            m, d_max, trial, seed = int(row[1]), int(row[2]), int(row[4]), int(row[9])
            lam, e, s, z = (float(row[i]) for i in (3, 5, 6, 7))
        except ValueError as exc:
            raise RecipeError(f"csv line {lineno}: {exc}") from None
        if method not in METHOD_NAMES:
            raise RecipeError(f"csv line {lineno}: unknown method {method!r}")
        g = groups.setdefault((method, m, d_max, trial), {"seed": seed, "zne": z, "rows": []})
        g["rows"].append((lam, e, s))
    if not groups:
        raise RecipeError("csv: no result rows")
    records = []
    for (method, m, d_max, trial), g in groups.items():
        lam, e, s = zip(*g["rows"])
        records.append(TrialRecord(method, m, d_max, trial, g["seed"], lam, e, s, g["zne"]))
    return records


def _atomic_write(path: Path, data: str | bytes) -> None:
    """Write ``data`` to a temporary sibling and move it into place."""
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plot_svgs(summaries) -> dict[str, bytes]:
    """Mean +- std of the zero-noise estimate versus d_max, one figure per depth."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    styles = {"ds_zne": ("--", "o"), "fold_zne": ("-.", "s"), "unmitigated": ("-", "^")}
    out = {}
    with matplotlib.rc_context({"svg.hashsalt": "dszne", "svg.fonttype": "none"}):
        for m in sorted({k[1] for k in summaries}):
            fig, ax = plt.subplots(figsize=(5.5, 4))
            for method in METHOD_NAMES:
                rows = sorted((k[2], s) for k, s in summaries.items() if k[0] == method and k[1] == m)
                if not rows:
                    continue
                ds = [d for d, _ in rows]
                ls, mk = styles[method]
                ax.errorbar(ds, [s.mean for _, s in rows], yerr=[s.std for _, s in rows],
                            linestyle=ls, marker=mk, capsize=3, label=method)
            ax.axhline(1.0, color="0.6", linewidth=0.8)
            ax.set_xlabel("maximum code distance d_max")
            ax.set_ylabel("expectation value")
            ax.set_title(f"Clifford depth m = {m}")
            ax.legend()
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
            plt.close(fig)
            out[f"expectation_m{m}.svg"] = buf.getvalue()
    return out


# -- commands ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    config = load_recipe(args.recipe)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = args.backend
    if overrides:
        try:
            config = config.with_overrides(**overrides)
        except ValueError as exc:
            raise RecipeError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_comparison(config, jobs=args.jobs)
    files: dict[str, str | bytes] = {
        "results.csv": records_to_csv(result.records),
        "summary.txt": format_report(summarize(result.records)),
        "recipe.yaml": dump_recipe(config),
    }
    files.update(_plot_svgs(result.summaries))
    # everything is computed before the first file is touched
    for name, data in files.items():
        _atomic_write(out / name, data)
    sys.stdout.write(files["summary.txt"])
    return EXIT_OK


def cmd_report(args) -> int:
    with open(args.csv, encoding="utf-8") as fh:
        text = fh.read()
    records = records_from_csv(text)
    sys.stdout.write(format_report(summarize(records)))
    return EXIT_OK


def plan_text(p: float, p_th: float, prefactor: float, distance_max: Sequence[int],
              reductions: Sequence[int]) -> str:
    """Scale-factor schedule, logical error rates and virtual-core counts."""
    model = NoiseModel(p, p_th, prefactor)
    lines = [f"p={p!r} p_th={p_th!r} prefactor={prefactor!r}", ""]
    lines.append(f"{'d_max':>5} {'j':>3} {'d':>4} {'P_L':>14} {'lambda':>10} {'N_VC':>5}")
    for i in distance_max:
        plan = DistancePlan(i, tuple(reductions))
        lams = ds_scale_factors(model, plan)
        for j, d, lam in zip(plan.reductions, plan.distances, lams):
            lines.append(
                f"{i:>5} {j:>3} {d:>4} {logical_error_rate(model, d):>14.6e} "
                f"{lam:>10.6g} {virtual_cores(i, d):>5}"
            )
    top = max(distance_max)
    odd = list(range(3, top + 1, 2))
    lines.append("")
    lines.append("virtual cores N_VC = floor(d^2 / d'^2) (rows d, columns d')")
    lines.append("    d " + "".join(f"{dp:>5}" for dp in odd))
    for d in odd:
        cells = "".join(f"{virtual_cores(d, dp):>5}" if dp <= d else f"{'.':>5}" for dp in odd)
        lines.append(f"{d:>5} " + cells)
    return "\n".join(lines) + "\n"


def cmd_plan(args) -> int:
    try:
        text = plan_text(args.p, args.p_th, args.prefactor, args.distance_max, args.reductions)
    except ValueError as exc:
        raise RecipeError(str(exc)) from None
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dszne", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="INFO", help="logging level (default INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment recipe")
    run.add_argument("--recipe", required=True, help="YAML recipe file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override the recipe's master seed")
    run.add_argument("--backend", choices=("auto", "exact", "stabilizer"), help="override the backend")
    run.add_argument("--jobs", type=int, default=1, help="worker processes (output-invariant)")
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="recompute the summary from a results CSV")
    report.add_argument("csv", help="results.csv written by 'run'")
    report.set_defaults(func=cmd_report)

    plan = sub.add_parser("plan", help="print scale factors, logical error rates and virtual cores")
    plan.add_argument("--p", type=float, required=True, help="physical error rate")
    plan.add_argument("--p-th", type=float, default=0.009, help="threshold (default 0.009)")
    plan.add_argument("--prefactor", type=float, default=0.03, help="prefactor (default 0.03)")
    plan.add_argument("--distance-max", type=int, nargs="+", required=True)
    plan.add_argument("--reductions", type=int, nargs="+", default=[0, 2, 4, 6])
    plan.set_defaults(func=cmd_plan)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except RecipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
