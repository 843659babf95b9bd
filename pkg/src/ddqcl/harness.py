"""Batch experiment runner: N seeded training runs per setting, one shared
readout calibration per batch, aggregation across runs, and file export.

Seeding layout, chosen so every artifact is independently recomputable:
run i draws from default_rng(base_seed + i); the batch calibration from
default_rng((base_seed, 1)); the final-metrics sampling for run i from
default_rng((base_seed + i, 2)).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ansatz import Ansatz, Topology, build_ansatz, execute, line_topology, star_topology
from .bas import BasSpec, bas_patterns, bas_target_distribution
from .metrics import QbasScore, histogram_to_distribution, kl_divergence, qbas_score
from .optim import (
    AdamConfig,
    CostContext,
    LearningCurve,
    OptimizerConfig,
    SvhcConfig,
    ZooConfig,
    run as run_solver,
)
from .readout import (
    DEFAULT_CALIBRATION_SHOTS,
    ConfusionMatrix,
    PerQubitFlipModel,
    apply_channel_sampled,
    calibrate,
    correct,
)
from .sim import Distribution, probabilities, sample


class ConfigError(ValueError):
    """Raised for any malformed or inconsistent experiment configuration."""


_TOPOLOGIES = {"line": line_topology, "star": star_topology}
_OPTION_TYPES = {"adam": AdamConfig, "svhc": SvhcConfig, "zoo": ZooConfig}


@dataclass(frozen=True)
class ReadoutConfig:
    """Synthetic flip channel settings plus the correction toggle."""

    p10: float
    p01: float
    correction: bool = True
    calibration_shots: int = DEFAULT_CALIBRATION_SHOTS

    def __post_init__(self) -> None:
        for name, p in (("p10", self.p10), ("p01", self.p01)):
            if not 0.0 <= p < 0.5:
                raise ConfigError(f"readout.{name} must lie in [0, 0.5), got {p}")
        if self.calibration_shots < 1:
            raise ConfigError(
                f"readout.calibration_shots must be >= 1, got {self.calibration_shots}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """One batch: dataset, circuit, solver, noise, seeds, output."""

    rows: int
    cols: int
    topology: str
    layers: int
    optimizer: OptimizerConfig
    runs: int = 5
    exact_mode: bool = False
    base_seed: int = 0
    out_dir: str | None = None
    readout: ReadoutConfig | None = None

    def __post_init__(self) -> None:
        try:
            BasSpec(self.rows, self.cols)  # validates rows/cols and the qubit cap
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.topology not in _TOPOLOGIES:
            raise ConfigError(
                f"unknown topology {self.topology!r}; choose from {sorted(_TOPOLOGIES)}"
            )
        if self.layers < 0:
            raise ConfigError(f"layers must be >= 0, got {self.layers}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.base_seed < 0:
            raise ConfigError(f"base_seed must be >= 0, got {self.base_seed}")
        if self.exact_mode and self.readout is not None:
            raise ConfigError("readout noise has no effect in exact mode; drop one of the two")
        ansatz = self.build_ansatz()  # validates topology/layers compatibility
        n_ini = self.optimizer.n_ini(ansatz.param_count)
        if self.optimizer.budget < n_ini + 1:
            raise ConfigError(
                f"budget {self.optimizer.budget} too small for initialization "
                f"({n_ini} evaluations) plus at least one solver step"
            )

    # --- derived objects ---

    @property
    def bas(self) -> BasSpec:
        return BasSpec(self.rows, self.cols)

    def build_topology(self) -> Topology:
        return _TOPOLOGIES[self.topology](self.bas.n_qubits)

    def build_ansatz(self) -> Ansatz:
        try:
            return build_ansatz(self.bas.n_qubits, self.build_topology(), self.layers)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def build_channel(self) -> PerQubitFlipModel | None:
        if self.readout is None:
            return None
        return PerQubitFlipModel.uniform(self.bas.n_qubits, self.readout.p10, self.readout.p01)

    # --- JSON round-trip ---

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
        known = {
            "rows", "cols", "topology", "layers", "optimizer", "optimizer_options",
            "runs", "shots", "budget", "n_ini_multiplier", "exact_mode",
            "base_seed", "out_dir", "readout",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("rows", "cols", "topology", "layers", "optimizer"):
            if key not in doc:
                raise ConfigError(f"missing required config key {key!r}")

        kind = _expect(doc, "optimizer", str)
        if kind not in _OPTION_TYPES:
            raise ConfigError(f"unknown optimizer {kind!r}; choose from {sorted(_OPTION_TYPES)}")
        options = doc.get("optimizer_options", {})
        if not isinstance(options, dict):
            raise ConfigError("optimizer_options must be a JSON object")
        option_type = _OPTION_TYPES[kind]
        allowed = {f.name for f in dataclasses.fields(option_type)}
        bad = set(options) - allowed
        if bad:
            raise ConfigError(
                f"unknown optimizer_options keys for {kind}: {sorted(bad)} "
                f"(allowed: {sorted(allowed)})"
            )
        try:
            solver_options = option_type(**options)
            optimizer = OptimizerConfig(
                kind=kind,
                budget=_expect(doc, "budget", int, 2000),
                shots=_expect(doc, "shots", int, 3000),
                n_ini_multiplier=_expect(doc, "n_ini_multiplier", int, 3),
                **{kind: solver_options},
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

        readout_doc = doc.get("readout")
        readout = None
        if readout_doc is not None:
            if not isinstance(readout_doc, dict):
                raise ConfigError("readout must be a JSON object or null")
            bad = set(readout_doc) - {"p10", "p01", "correction", "calibration_shots"}
            if bad:
                raise ConfigError(f"unknown readout keys: {sorted(bad)}")
            if "p10" not in readout_doc:
                raise ConfigError("readout.p10 is required when readout is configured")
            p10 = _expect(readout_doc, "p10", float)
            readout = ReadoutConfig(
                p10=p10,
                p01=_expect(readout_doc, "p01", float, p10),
                correction=_expect(readout_doc, "correction", bool, True),
                calibration_shots=_expect(
                    readout_doc, "calibration_shots", int, DEFAULT_CALIBRATION_SHOTS
                ),
            )

        out_dir = doc.get("out_dir")
        if out_dir is not None and not isinstance(out_dir, str):
            raise ConfigError("out_dir must be a string or null")
        return cls(
            rows=_expect(doc, "rows", int),
            cols=_expect(doc, "cols", int),
            topology=_expect(doc, "topology", str),
            layers=_expect(doc, "layers", int),
            optimizer=optimizer,
            runs=_expect(doc, "runs", int, 5),
            exact_mode=_expect(doc, "exact_mode", bool, False),
            base_seed=_expect(doc, "base_seed", int, 0),
            out_dir=out_dir,
            readout=readout,
        )

    def to_dict(self) -> dict:
        options = dataclasses.asdict(getattr(self.optimizer, self.optimizer.kind))
        doc = {
            "rows": self.rows,
            "cols": self.cols,
            "topology": self.topology,
            "layers": self.layers,
            "optimizer": self.optimizer.kind,
            "optimizer_options": options,
            "runs": self.runs,
            "shots": self.optimizer.shots,
            "budget": self.optimizer.budget,
            "n_ini_multiplier": self.optimizer.n_ini_multiplier,
            "exact_mode": self.exact_mode,
            "base_seed": self.base_seed,
            "out_dir": self.out_dir,
            "readout": None
            if self.readout is None
            else {
                "p10": self.readout.p10,
                "p01": self.readout.p01,
                "correction": self.readout.correction,
                "calibration_shots": self.readout.calibration_shots,
            },
        }
        return doc


def _expect(doc: dict, key: str, kind: type, default=None):
    """Fetch a typed config value, failing closed on wrong JSON types."""
    if key not in doc:
        return default
    value = doc[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"config key {key!r} must be a boolean, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"config key {key!r} must be a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {kind}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON experiment config file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {p} is not valid JSON: {e}") from e
    return ExperimentConfig.from_dict(doc)


# --- batch execution ---


@dataclass(frozen=True)
class RunResult:
    """Final figures for one training run."""

    seed: int
    curve: LearningCurve
    evaluations: int
    shots_per_evaluation: int
    best_js: float
    kl: float
    qbas: QbasScore


@dataclass(frozen=True)
class BatchResult:
    config: ExperimentConfig
    runs: tuple[RunResult, ...]
    aggregate_median: np.ndarray
    aggregate_min: np.ndarray
    aggregate_max: np.ndarray
    confusion: ConfusionMatrix | None


def aggregate(curves: list[LearningCurve]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise (median, min, max) of best-cost-so-far across runs."""
    if not curves:
        raise ValueError("need at least one curve to aggregate")
    lengths = {len(c.best_costs) for c in curves}
    if len(lengths) > 1:
        raise ValueError(f"curves have unequal lengths {sorted(lengths)}")
    stack = np.stack([c.best_costs for c in curves])
    return (
        np.median(stack, axis=0),
        np.min(stack, axis=0),
        np.max(stack, axis=0),
    )


def _final_metrics(
    cfg: ExperimentConfig,
    ansatz: Ansatz,
    target: Distribution,
    curve: LearningCurve,
    seed: int,
    channel: PerQubitFlipModel | None,
    confusion: ConfusionMatrix | None,
) -> tuple[float, QbasScore]:
    """Reported KL and qBAS of the best model, on its own metrics RNG stream.

    qBAS scores the actual read-out samples (after the channel, before
    correction); KL scores the processed model distribution the training
    pipeline would hand to the cost.
    """
    patterns = bas_patterns(cfg.bas)
    dist = probabilities(execute(ansatz, curve.best_params))
    rng = np.random.default_rng((seed, 2))
    shots = cfg.optimizer.shots
    if cfg.exact_mode:
        kl = kl_divergence(target, dist)
        h = sample(dist, shots, rng)
        return kl, qbas_score(h, patterns)
    h = sample(dist, shots, rng)
    if channel is not None:
        h = apply_channel_sampled(h, channel, rng)
    score = qbas_score(h, patterns)
    model = histogram_to_distribution(h)
    if confusion is not None:
        model = correct(model, confusion)
    return kl_divergence(target, model), score


def run_batch(cfg: ExperimentConfig) -> BatchResult:
    """Calibrate once (when correcting), then train `runs` seeded models."""
    ansatz = cfg.build_ansatz()
    target = bas_target_distribution(cfg.bas)
    channel = cfg.build_channel()
    confusion = None
    if channel is not None and cfg.readout is not None and cfg.readout.correction:
        confusion = calibrate(
            channel, cfg.readout.calibration_shots, np.random.default_rng((cfg.base_seed, 1))
        )
    results = []
    for i in range(cfg.runs):
        seed = cfg.base_seed + i
        ctx = CostContext.for_circuit(
            ansatz,
            target,
            budget=cfg.optimizer.budget,
            shots=cfg.optimizer.shots,
            rng=np.random.default_rng(seed),
            exact_mode=cfg.exact_mode,
            channel=channel,
            confusion=confusion,
            seed=seed,
        )
        curve = run_solver(ctx, cfg.optimizer)
        kl, score = _final_metrics(cfg, ansatz, target, curve, seed, channel, confusion)
        results.append(
            RunResult(
                seed=seed,
                curve=curve,
                evaluations=len(curve.costs),
                shots_per_evaluation=0 if cfg.exact_mode else cfg.optimizer.shots,
                best_js=curve.best_cost,
                kl=kl,
                qbas=score,
            )
        )
    med, lo, hi = aggregate([r.curve for r in results])
    return BatchResult(cfg, tuple(results), med, lo, hi, confusion)


# --- export ---


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OSError(f"failed writing {path}: {e}") from e


def summary_dict(result: BatchResult) -> dict:
    """The summary.json document: per-run figures plus batch counters."""
    cfg = result.config
    runs = []
    for r in result.runs:
        runs.append(
            {
                "seed": r.seed,
                "evaluations": r.evaluations,
                "shots_per_evaluation": r.shots_per_evaluation,
                "best_js": r.best_js,
                "kl": r.kl,
                "qbas_precision": r.qbas.precision,
                "qbas_recall": r.qbas.recall,
                "qbas_f1": r.qbas.f1,
                "improvement_evaluations": [i for i, _ in r.curve.improvements],
                "best_params": r.curve.best_params.tolist(),
                "final_params": r.curve.final_params.tolist(),
            }
        )
    best_js = [r.best_js for r in result.runs]
    kls = [r.kl for r in result.runs]
    batch = {
        "runs": cfg.runs,
        "total_evaluations": sum(r.evaluations for r in result.runs),
        "best_js": min(best_js),
        "median_best_js": float(np.median(best_js)),
        "best_kl": min(kls),
        "median_kl": float(np.median(kls)),
        "best_qbas_f1": max(r.qbas.f1 for r in result.runs),
        "calibration": None
        if result.confusion is None
        else {
            "experiments": 2 ** result.confusion.n_qubits,
            "shots_per_experiment": cfg.readout.calibration_shots,
        },
    }
    return {"runs": runs, "batch": batch}


def export(result: BatchResult, out_dir: str | Path) -> list[Path]:
    """Write the batch to disk; returns the created file paths.

    Layout: config.json echo, curve_run<i>.csv per run, aggregate.csv,
    summary.json, and confusion.json when a calibration was used.  UTF-8,
    LF endings, floats at 17 significant digits.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    written = []

    path = out / "config.json"
    _write_text(path, json.dumps(result.config.to_dict(), indent=2, sort_keys=True) + "\n")
    written.append(path)

    for i, r in enumerate(result.runs):
        path = out / f"curve_run{i}.csv"
        lines = ["evaluation,cost,best_cost"]
        for j, (c, b) in enumerate(zip(r.curve.costs, r.curve.best_costs)):
            lines.append(f"{j + 1},{_fmt(c)},{_fmt(b)}")
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)

    path = out / "aggregate.csv"
    lines = ["evaluation,median,min,max"]
    med, lo, hi = result.aggregate_median, result.aggregate_min, result.aggregate_max
    for j in range(len(med)):
        lines.append(f"{j + 1},{_fmt(med[j])},{_fmt(lo[j])},{_fmt(hi[j])}")
    _write_text(path, "\n".join(lines) + "\n")
    written.append(path)

    path = out / "summary.json"
    _write_text(path, json.dumps(summary_dict(result), indent=2, sort_keys=True) + "\n")
    written.append(path)

    if result.confusion is not None:
        path = out / "confusion.json"
        _write_text(path, json.dumps(confusion_dict(result.confusion), indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written


def confusion_dict(m: ConfusionMatrix) -> dict:
    return {"n_qubits": m.n_qubits, "entries": m.entries.reshape(-1).tolist()}
