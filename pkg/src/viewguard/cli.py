"""Batch experiment runner and command-line interface.

Subcommands: ``run`` (full pipeline over repeated splits), ``adapt`` (fit one
adapted model), ``integrate`` (merge hardened prediction files),
``check-security`` (post-hoc diagnostics against ground truth), ``pca``
(dimensionality reduction for building a second view).

All matrices travel as CSV with one row per sample; reports are JSON plus a
plain-text table. Given the same config and seed, report.json is
byte-identical across runs and parallelism degrees (timings live in
timings.json).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._csvio import read_numeric_csv
from .adaptation import AdaptedModel, adapt_classifier, predict_adapted
from .baselines import (
    PM1,
    ZERO_ONE,
    BaselineSpec,
    DecisionMatrix,
    LabelMatrix,
    decision_values,
    fit_baseline,
    harden_decisions,
    load_external_predictions,
)
from .evaluation import (
    DEFAULT_LAMBDA_GRID,
    SplitPlan,
    TTestResult,
    accuracy,
    cross_validate_lambda,
    f_score,
    make_splits,
    paired_t_test,
)
from .exceptions import InputError, ParseError, ViewguardError
from .integration import integrate, solver_backend
from .numerics import KernelSpec, cross_gram
from .security import SecurityReport, build_security_report, render_security_table

SCHEMA_VERSION = 1
BEST, INTEGRATED = "best", "integrated"


# ---------------------------------------------------------------------------
# Data loading
# ---------------------------------------------------------------------------

def load_view_csv(path: str, expect_labels: bool = False):
    """Load a feature CSV (rows = samples) as d x N, or a label CSV.

    Labels are integer class ids 0..c-1, one per row; they come back as a pm1
    one-vs-rest LabelMatrix with c = max id + 1.
    """
    arr = read_numeric_csv(path)
    if not expect_labels:
        return arr.T
    if arr.shape[1] != 1:
        raise ParseError(f"{path}: label file must have one column, found {arr.shape[1]}")
    ids = arr[:, 0]
    if np.any(ids != np.round(ids)):
        bad = int(np.argmax(ids != np.round(ids)))
        raise ParseError(f"{path}: row {bad + 1}: label {ids[bad]!r} is not an integer")
    ids = ids.astype(int)
    if ids.min() < 0:
        raise ParseError(f"{path}: labels must be >= 0")
    n_classes = int(ids.max()) + 1
    if n_classes < 2:
        raise ParseError(f"{path}: labels cover a single class")
    return LabelMatrix.from_class_ids(ids, n_classes, PM1)


def load_label_csv(path: str) -> LabelMatrix:
    """Load a t-row, c-column 0/1 CSV as a zero_one LabelMatrix (c x t)."""
    arr = read_numeric_csv(path)
    try:
        return LabelMatrix(arr.T, ZERO_ONE)
    except InputError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_matrix_csv(path: str, values: np.ndarray) -> None:
    np.savetxt(path, np.asarray(values).T, delimiter=",", fmt="%.17g")


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PcaBasis:
    """Principal-component basis fit on one sample set (columns = samples)."""

    mean: np.ndarray  # (d,)
    components: np.ndarray  # (dim, d), orthonormal rows
    component_variances: np.ndarray  # (dim,)
    total_variance: float

    @property
    def captured_variance_ratio(self) -> float:
        if self.total_variance == 0.0:
            return 1.0
        return float(self.component_variances.sum() / self.total_variance)

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.components @ (x - self.mean[:, None])


def fit_pca(x: np.ndarray, target_dim: int) -> PcaBasis:
    """Fit the top ``target_dim`` principal components of x (d x N)."""
    x = np.asarray(x, dtype=float)
    d, n = x.shape
    if target_dim > d:
        raise InputError(f"target_dim {target_dim} exceeds feature dimension {d}")
    if target_dim < 1 or n < 2:
        raise InputError("need target_dim >= 1 and at least 2 samples")
    mean = x.mean(axis=1)
    xc = x - mean[:, None]
    u, s, _ = np.linalg.svd(xc, full_matrices=False)
    comps = u[:, :target_dim].T.copy()
    # deterministic sign: largest-magnitude loading is positive
    for row in comps:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    variances = s**2 / (n - 1)
    return PcaBasis(
        mean=mean,
        components=comps,
        component_variances=variances[:target_dim],
        total_variance=float(variances.sum()),
    )


def pca_reduce(x: np.ndarray, target_dim: int) -> np.ndarray:
    """Project x (d x N) onto its own top principal components."""
    return fit_pca(x, target_dim).transform(x)


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    labels_path: str
    view1_path: str | None
    view2_path: str | None  # exclusive with view2_pca_dim
    view2_pca_dim: int | None
    builtin_baselines: list[BaselineSpec]
    external_predictions: dict[str, str]  # name -> CSV path, all N samples
    external_header: bool
    kernel: KernelSpec
    reg_lambda: float | str  # numeric or "auto"
    lambda_grid: tuple[float, ...]
    train_fraction: float
    repetitions: int
    output_dir: str
    solver_tol: float = 1e-6
    solver_max_iters: int = 10000

    def __post_init__(self):
        n_providers = len(self.builtin_baselines) + len(self.external_predictions)
        if n_providers < 2:
            raise InputError("need at least 2 baselines or prediction files")
        if self.builtin_baselines and self.view1_path is None:
            raise InputError("built-in baselines require view-1 features")
        if (self.view2_path is None) == (self.view2_pca_dim is None):
            raise InputError("configure exactly one of view2 features or view2 PCA dim")
        if self.view2_pca_dim is not None and self.view1_path is None:
            raise InputError("PCA-derived view 2 requires view-1 features")
        if isinstance(self.reg_lambda, str) and self.reg_lambda != "auto":
            raise InputError("lambda must be a number or 'auto'")
        for path in self.referenced_files():
            if not os.path.exists(path):
                raise InputError(f"referenced file does not exist: {path}")

    def referenced_files(self) -> list[str]:
        paths = [self.labels_path]
        if self.view1_path:
            paths.append(self.view1_path)
        if self.view2_path:
            paths.append(self.view2_path)
        paths.extend(self.external_predictions.values())
        return paths

    def to_json_dict(self) -> dict:
        return {
            "labels": self.labels_path,
            "view1": self.view1_path,
            "view2": self.view2_path,
            "view2_pca_dim": self.view2_pca_dim,
            "builtin_baselines": [b.name for b in self.builtin_baselines],
            "external_predictions": dict(sorted(self.external_predictions.items())),
            "external_header": self.external_header,
            "kernel": self.kernel.to_dict(),
            "lambda": self.reg_lambda,
            "lambda_grid": list(self.lambda_grid),
            "train_fraction": self.train_fraction,
            "repetitions": self.repetitions,
            "solver_tol": self.solver_tol,
            "solver_max_iters": self.solver_max_iters,
        }


def load_config(path: str) -> ExperimentConfig:
    """Parse the INI-style experiment config."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise InputError(f"cannot read config file {path}")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        data = cp["data"]
        labels = resolve(data["labels"])
        view1 = resolve(data["view1"]) if "view1" in data else None
        view2_raw = data.get("view2", "")
        if view2_raw.startswith("pca:"):
            view2, pca_dim = None, int(view2_raw.split(":", 1)[1])
        elif view2_raw:
            view2, pca_dim = resolve(view2_raw), None
        else:
            raise InputError("config [data] must set view2 = <csv> or pca:<dim>")

        bl = cp["baselines"] if "baselines" in cp else {}
        builtin = [
            BaselineSpec.parse(tok)
            for tok in bl.get("builtin", "").split(",")
            if tok.strip()
        ]
        external = {}
        for tok in bl.get("external", "").split(","):
            tok = tok.strip()
            if not tok:
                continue
            if "=" not in tok:
                raise InputError(f"external entry {tok!r} must be name=path")
            name, p = tok.split("=", 1)
            external[name.strip()] = resolve(p.strip())
        external_header = bl.get("external_header", "false").strip().lower() in (
            "1",
            "true",
            "yes",
        )

        ad = cp["adaptation"] if "adaptation" in cp else {}
        kernel = KernelSpec.parse(ad.get("kernel", "linear"))
        lam_raw = ad.get("lambda", "1.0").strip()
        reg_lambda: float | str = "auto" if lam_raw == "auto" else float(lam_raw)
        grid_raw = ad.get("grid", "")
        grid = (
            tuple(float(g) for g in grid_raw.split(",") if g.strip())
            if grid_raw.strip()
            else DEFAULT_LAMBDA_GRID
        )

        sp = cp["split"]
        fraction = float(sp["train_fraction"])
        reps = int(sp["repetitions"])

        out = cp["output"]["dir"] if "output" in cp and "dir" in cp["output"] else "out"
        solver = cp["integration"] if "integration" in cp else {}
        tol = float(solver.get("tol", "1e-6"))
        max_iters = int(solver.get("max_iters", "10000"))
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: bad config: {exc}") from exc

    return ExperimentConfig(
        labels_path=labels,
        view1_path=view1,
        view2_path=view2,
        view2_pca_dim=pca_dim,
        builtin_baselines=builtin,
        external_predictions=external,
        external_header=external_header,
        kernel=kernel,
        reg_lambda=reg_lambda,
        lambda_grid=grid,
        train_fraction=fraction,
        repetitions=reps,
        output_dir=resolve(out),
        solver_tol=tol,
        solver_max_iters=max_iters,
    )


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------

@dataclass
class RepetitionResult:
    index: int
    completed: bool
    error: str | None
    accuracies: dict[str, float] = field(default_factory=dict)
    f_scores: dict[str, float] = field(default_factory=dict)
    epsilon: float | None = None
    feasible: bool | None = None
    condition_counts: list[int] = field(default_factory=list)
    certified: bool | None = None
    secure: bool | None = None
    chosen_lambdas: dict[str, float] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "completed": self.completed,
            "error": self.error,
            "accuracies": self.accuracies,
            "f_scores": self.f_scores,
            "epsilon": self.epsilon,
            "feasible": self.feasible,
            "condition_counts": self.condition_counts,
            "certified": self.certified,
            "secure": self.secure,
            "chosen_lambdas": self.chosen_lambdas,
        }


@dataclass
class ExperimentReport:
    config: dict
    seed: int
    methods: list[str]
    repetitions: list[RepetitionResult]
    aggregates: dict[str, dict]
    t_tests: dict[str, dict]
    security_summary: dict
    timings: dict  # not part of report.json (non-deterministic)

    @property
    def all_completed(self) -> bool:
        return all(r.completed for r in self.repetitions)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "seed": self.seed,
            "methods": self.methods,
            "repetitions": [r.to_json_dict() for r in self.repetitions],
            "aggregates": self.aggregates,
            "t_tests": self.t_tests,
            "security_summary": self.security_summary,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise InputError(f"unsupported report schema {d.get('schema_version')!r}")
        reps = [
            RepetitionResult(
                index=r["index"],
                completed=r["completed"],
                error=r["error"],
                accuracies=r["accuracies"],
                f_scores=r["f_scores"],
                epsilon=r["epsilon"],
                feasible=r["feasible"],
                condition_counts=r["condition_counts"],
                certified=r["certified"],
                secure=r["secure"],
                chosen_lambdas=r["chosen_lambdas"],
            )
            for r in d["repetitions"]
        ]
        return cls(
            config=d["config"],
            seed=d["seed"],
            methods=d["methods"],
            repetitions=reps,
            aggregates=d["aggregates"],
            t_tests=d["t_tests"],
            security_summary=d["security_summary"],
            timings={},
        )


class _LoadedData:
    """Everything read from disk once, shared across repetitions."""

    def __init__(self, config: ExperimentConfig):
        self.labels: LabelMatrix = load_view_csv(config.labels_path, expect_labels=True)
        self.labels01 = self.labels.to_zero_one()
        n = self.labels.n_samples
        c = self.labels.n_classes
        self.x1 = load_view_csv(config.view1_path) if config.view1_path else None
        if self.x1 is not None and self.x1.shape[1] != n:
            raise InputError(
                f"view1 has {self.x1.shape[1]} samples, labels have {n}"
            )
        self.x2 = load_view_csv(config.view2_path) if config.view2_path else None
        if self.x2 is not None and self.x2.shape[1] != n:
            raise InputError(
                f"view2 has {self.x2.shape[1]} samples, labels have {n}"
            )
        self.external: dict[str, DecisionMatrix] = {
            name: load_external_predictions(path, c, n, has_header=config.external_header)
            for name, path in sorted(config.external_predictions.items())
        }
        self.n_samples = n
        self.n_classes = c


def _provider_names(config: ExperimentConfig) -> list[str]:
    names = [spec.name for spec in config.builtin_baselines]
    names += sorted(config.external_predictions)
    if len(set(names)) != len(names):
        raise InputError(f"duplicate baseline names in {names}")
    return names


def _run_repetition(
    config: ExperimentConfig,
    data: _LoadedData,
    index: int,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
) -> RepetitionResult:
    result = RepetitionResult(index=index, completed=False, error=None)
    try:
        y_tr = data.labels.select(train_idx)
        y_te = data.labels01.select(test_idx)
        if config.view2_pca_dim is not None:
            basis = fit_pca(data.x1[:, train_idx], config.view2_pca_dim)
            x2_tr = basis.transform(data.x1[:, train_idx])
            x2_te = basis.transform(data.x1[:, test_idx])
        else:
            x2_tr = data.x2[:, train_idx]
            x2_te = data.x2[:, test_idx]
        k_cross = cross_gram(x2_tr, x2_te, config.kernel)

        base_hard: list[LabelMatrix] = []
        adapted_hard: list[LabelMatrix] = []
        for spec in config.builtin_baselines:
            model = fit_baseline(spec, data.x1[:, train_idx], y_tr)
            f_tr = decision_values(model, data.x1[:, train_idx])
            f_te = decision_values(model, data.x1[:, test_idx])
            _score_provider(
                config, spec.name, f_tr, f_te, y_tr, y_te, x2_tr, k_cross,
                base_hard, adapted_hard, result,
            )
        for name in sorted(data.external):
            full = data.external[name]
            _score_provider(
                config, name, full.select(train_idx), full.select(test_idx),
                y_tr, y_te, x2_tr, k_cross, base_hard, adapted_hard, result,
            )

        names = _provider_names(config)
        result.accuracies[BEST] = max(result.accuracies[f"baseline_{n}"] for n in names)
        result.f_scores[BEST] = max(result.f_scores[f"baseline_{n}"] for n in names)

        solution = integrate(
            base_hard, adapted_hard,
            tol=config.solver_tol, max_iters=config.solver_max_iters,
        )
        result.accuracies[INTEGRATED] = accuracy(solution.y_hard, y_te)
        result.f_scores[INTEGRATED] = f_score(solution.y_hard, y_te)
        result.epsilon = solution.epsilon
        result.feasible = solution.feasible

        sec = build_security_report(base_hard, adapted_hard, solution.y_hard, y_te)
        result.condition_counts = list(sec.condition_counts)
        result.certified = sec.certified
        result.secure = sec.secure
        result.completed = True
    except Exception as exc:  # recorded, run continues
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _score_provider(
    config, name, f_tr, f_te, y_tr, y_te, x2_tr, k_cross,
    base_hard, adapted_hard, result,
):
    """Harden/score one baseline, adapt it, harden/score the adapted version."""
    hat = harden_decisions(f_te)
    base_hard.append(hat)
    result.accuracies[f"baseline_{name}"] = accuracy(hat, y_te)
    result.f_scores[f"baseline_{name}"] = f_score(hat, y_te)
    if config.reg_lambda == "auto":
        lam = cross_validate_lambda(
            f_tr, y_tr, x2_tr, config.kernel, grid=config.lambda_grid
        )
    else:
        lam = float(config.reg_lambda)
    result.chosen_lambdas[name] = lam
    adapted = adapt_classifier(f_tr, y_tr, x2_tr, config.kernel, reg_lambda=lam)
    bar = harden_decisions(predict_adapted(adapted, f_te, k_cross))
    adapted_hard.append(bar)
    result.accuracies[f"adapted_{name}"] = accuracy(bar, y_te)
    result.f_scores[f"adapted_{name}"] = f_score(bar, y_te)


def run_experiment(config: ExperimentConfig, seed: int, jobs: int = 1) -> ExperimentReport:
    """Execute the full pipeline over all repetitions.

    A failing repetition is recorded with its diagnostic and the run
    continues; aggregates and t-tests cover completed repetitions only.
    """
    data = _LoadedData(config)
    plan = SplitPlan(config.train_fraction, config.repetitions, seed)
    splits = make_splits(data.n_samples, plan)
    names = _provider_names(config)
    methods = [BEST] + [f"adapted_{n}" for n in names] + [INTEGRATED]

    t0 = time.perf_counter()
    rep_times: list[float] = [0.0] * len(splits)

    def timed(i: int) -> RepetitionResult:
        s = time.perf_counter()
        res = _run_repetition(config, data, i, *splits[i])
        rep_times[i] = time.perf_counter() - s
        return res

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(timed, range(len(splits))))
    else:
        results = [timed(i) for i in range(len(splits))]

    completed = [r for r in results if r.completed]
    aggregates = {}
    for method in methods:
        accs = [r.accuracies[method] for r in completed]
        fss = [r.f_scores[method] for r in completed]
        aggregates[method] = {
            "accuracy_mean": float(np.mean(accs)) if accs else None,
            "accuracy_std": float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
            "f_score_mean": float(np.mean(fss)) if fss else None,
            "f_score_std": float(np.std(fss, ddof=1)) if len(fss) > 1 else 0.0,
        }

    t_tests = {}
    if len(completed) >= 2:
        best = np.array([r.accuracies[BEST] for r in completed])
        for method in methods[1:]:
            scores = np.array([r.accuracies[method] for r in completed])
            t_tests[method] = paired_t_test(scores, best).to_json_dict()

    security_summary = {
        "mean_max_count": (
            float(np.mean([max(r.condition_counts) for r in completed]))
            if completed
            else None
        ),
        "n_baselines": len(names),
        "certified_repetitions": sum(1 for r in completed if r.certified),
        "secure_repetitions": sum(1 for r in completed if r.secure),
        "completed_repetitions": len(completed),
    }
    timings = {
        "total_seconds": time.perf_counter() - t0,
        "per_repetition_seconds": rep_times,
        "solver_backend": solver_backend(),
    }
    return ExperimentReport(
        config=config.to_json_dict(),
        seed=seed,
        methods=methods,
        repetitions=results,
        aggregates=aggregates,
        t_tests=t_tests,
        security_summary=security_summary,
        timings=timings,
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def render_report_text(report: ExperimentReport) -> str:
    lines = []
    done = report.security_summary["completed_repetitions"]
    total = len(report.repetitions)
    lines.append(f"repetitions completed: {done}/{total}")
    lines.append("")
    header = f"{'method':<28}{'accuracy':>20}{'f_score':>20}  vs best"
    lines.append(header)
    lines.append("-" * len(header))
    for method in report.methods:
        agg = report.aggregates.get(method)
        if agg is None or agg["accuracy_mean"] is None:
            lines.append(f"{method:<28}{'-':>20}{'-':>20}")
            continue
        acc = f"{agg['accuracy_mean']:.4f} ± {agg['accuracy_std']:.4f}"
        fs = f"{agg['f_score_mean']:.4f} ± {agg['f_score_std']:.4f}"
        mark = ""
        if method in report.t_tests:
            mark = TTestResult.MARKS[report.t_tests[method]["verdict"]]
        lines.append(f"{method:<28}{acc:>20}{fs:>20}  {mark}")
    lines.append("")
    ss = report.security_summary
    lines.append(
        "security: "
        f"mean max condition count {ss['mean_max_count']}/{ss['n_baselines']}, "
        f"certified {ss['certified_repetitions']}/{done}, "
        f"secure {ss['secure_repetitions']}/{done}"
    )
    return "\n".join(lines) + "\n"


def emit_report(report: ExperimentReport, out_dir: str) -> dict[str, str]:
    """Write report.json, report.txt, scores.csv and timings.json."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "json": os.path.join(out_dir, "report.json"),
            "text": os.path.join(out_dir, "report.txt"),
            "scores": os.path.join(out_dir, "scores.csv"),
            "timings": os.path.join(out_dir, "timings.json"),
        }
        with open(paths["json"], "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(paths["text"], "w") as fh:
            fh.write(render_report_text(report))
        with open(paths["scores"], "w") as fh:
            cols = ["repetition", "completed"]
            cols += [f"acc_{m}" for m in report.methods]
            cols += [f"f_{m}" for m in report.methods]
            fh.write(",".join(cols) + "\n")
            for r in report.repetitions:
                row = [str(r.index), str(int(r.completed))]
                for m in report.methods:
                    row.append(f"{r.accuracies[m]:.17g}" if m in r.accuracies else "")
                for m in report.methods:
                    row.append(f"{r.f_scores[m]:.17g}" if m in r.f_scores else "")
                fh.write(",".join(row) + "\n")
        with open(paths["timings"], "w") as fh:
            json.dump(report.timings, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ViewguardError(f"cannot write report to {out_dir}: {exc}") from exc
    return paths


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.output:
        config.output_dir = args.output
    report = run_experiment(config, seed=args.seed, jobs=args.jobs)
    paths = emit_report(report, config.output_dir)
    sys.stdout.write(render_report_text(report))
    sys.stdout.write(f"report written to {paths['json']}\n")
    return 0 if report.all_completed else 1


def _cmd_adapt(args) -> int:
    labels = load_view_csv(args.labels, expect_labels=True)
    n, c = labels.n_samples, labels.n_classes
    scores = load_external_predictions(args.predictions, c, n, has_header=args.header)
    if args.baseline_id:
        scores = DecisionMatrix(scores.values, args.baseline_id)
    x2 = load_view_csv(args.view2)
    if x2.shape[1] != n:
        raise InputError(f"view2 has {x2.shape[1]} samples, labels have {n}")
    kernel = KernelSpec.parse(args.kernel)
    lam = float(args.reg_lambda)
    if lam == 0.0:
        raise InputError("--reg-lambda must be positive")
    model = adapt_classifier(scores, labels, x2, kernel, reg_lambda=lam)
    model.save(args.output)
    sys.stdout.write(
        f"adapted {scores.classifier_id or args.predictions}: "
        f"lambda1={model.lambda1:.6g} lambda2={model.lambda2:.6g} "
        f"iterations={model.iterations} objective={model.objective_trace[-1]:.6g}\n"
    )
    if model.warning:
        sys.stdout.write(f"warning: {model.warning}\n")
    return 0


def _cmd_integrate(args) -> int:
    base = [load_label_csv(p) for p in args.base]
    adapted = [load_label_csv(p) for p in args.adapted]
    solution = integrate(base, adapted, tol=args.tol, max_iters=args.max_iters)
    os.makedirs(args.output_dir, exist_ok=True)
    write_matrix_csv(os.path.join(args.output_dir, "y_soft.csv"), solution.y_soft)
    write_matrix_csv(os.path.join(args.output_dir, "y_hard.csv"), solution.y_hard.values)
    with open(os.path.join(args.output_dir, "solution.json"), "w") as fh:
        json.dump(solution.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    sys.stdout.write(
        f"epsilon={solution.epsilon:.6g} feasible={solution.feasible} "
        f"iterations={solution.iterations} gap={solution.gap:.3g} "
        f"backend={solution.backend}\n"
    )
    return 0


def _cmd_check_security(args) -> int:
    base = [load_label_csv(p) for p in args.base]
    adapted = [load_label_csv(p) for p in args.adapted]
    integrated = load_label_csv(args.integrated)
    truth = load_label_csv(args.truth)
    report = build_security_report(base, adapted, integrated, truth)
    sys.stdout.write(render_security_table(report))
    if args.output:
        report.save(args.output)
        sys.stdout.write(f"security report written to {args.output}\n")
    return 0


def _cmd_pca(args) -> int:
    x = load_view_csv(args.input)
    reduced = pca_reduce(x, args.dim)
    write_matrix_csv(args.output, reduced)
    ratio = fit_pca(x, args.dim).captured_variance_ratio
    sys.stdout.write(
        f"reduced {x.shape[0]} -> {args.dim} dims "
        f"(captured variance ratio {ratio:.4f})\n"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewguard",
        description=(
            "Adapt view-1 classifiers with a new feature view and integrate "
            "them with a worst-case security margin."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full experiment pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default=None, help="override [output] dir")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("adapt", help="adapt one baseline's predictions")
    p.add_argument("--predictions", required=True, help="train scores CSV (n x c)")
    p.add_argument("--labels", required=True, help="train class ids CSV")
    p.add_argument("--view2", required=True, help="view-2 train features CSV")
    p.add_argument("--kernel", default="linear")
    p.add_argument("--reg-lambda", default="1.0")
    p.add_argument("--baseline-id", default="")
    p.add_argument("--header", action="store_true", help="predictions CSV has a header row")
    p.add_argument("--output", required=True, help="model JSON path")
    p.set_defaults(func=_cmd_adapt)

    p = sub.add_parser("integrate", help="integrate hardened prediction files")
    p.add_argument("--base", action="append", required=True, help="baseline 0/1 CSV (repeat)")
    p.add_argument("--adapted", action="append", required=True, help="adapted 0/1 CSV (repeat)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser("check-security", help="post-hoc security diagnostics")
    p.add_argument("--base", action="append", required=True)
    p.add_argument("--adapted", action="append", required=True)
    p.add_argument("--integrated", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--output", default=None, help="JSON output path")
    p.set_defaults(func=_cmd_check_security)

    p = sub.add_parser("pca", help="PCA-reduce a feature CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_pca)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ViewguardError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
