"""Seeded, file-driven experiment sweeps and their on-disk result bundles.

A sweep runs one solver configuration over a grid of oracle accuracies, with
several repetitions per accuracy (rep r uses oracle seed base_seed + r, shared
across accuracies so per-seed comparisons are meaningful). Everything about a
sweep is deterministic: rerunning the same config reproduces every output file
byte for byte.

Bundle layout (out_dir):
  manifest.json   config echo, config hash, tool version, per-run index
  summary.csv     epsilon, seed, steady_state_error, condition_value,
                  theorem_bound, gap  (bound/gap empty when the condition fails)
  analysis.csv    one AnalysisReport row per epsilon
  traces/trace_eps<EPS>_seed<SEED>.csv   per-run solver traces
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, analysis
from .errors import ConfigError, StackgradError
from .estimator import PositiveBasis, SamplingPlan
from .games import InstanceOptions, QuadraticGame, generate_instance, load_instance
from .oracles import ORACLE_KINDS, OracleConfig
from .solver import SolverConfig, SolverTrace, run, steady_state_error

def _fmt(value) -> str:
    """Shortest exact decimal for a float cell."""
    return repr(float(value))


SUMMARY_CSV_HEADER = ["epsilon", "seed", "steady_state_error", "condition_value", "theorem_bound", "gap"]
ANALYSIS_CSV_HEADER = [
    "epsilon", "a", "b", "kappa", "kappa_certified", "kappa_printed",
    "mu_f", "l_f", "pinv_norm", "delta", "p", "condition_value", "theorem_bound",
]


@dataclass(frozen=True)
class SolverSettings:
    """Sweep-level solver parameters (the per-run SolverConfig is derived)."""

    alpha: float = 0.01
    iters: int = 1000
    delta: float = 0.1
    basis: str = "standard_double"
    x_init_seed: int | None = None  # None: use base_seed
    x_init_scale: float = 10.0
    stop_grad_norm: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one sweep needs; serializable to a single JSON document."""

    instance: dict
    oracle: OracleConfig = OracleConfig(kind="ball")
    solver: SolverSettings = SolverSettings()
    epsilons: tuple[float, ...] = (0.01, 0.025, 0.04, 0.1, 0.2)
    seeds_per_epsilon: int = 10
    base_seed: int = 0
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if not self.epsilons:
            raise ConfigError("epsilons must be a non-empty list")
        if any(e < 0.0 for e in self.epsilons):
            raise ConfigError(f"epsilon values must be >= 0, got {list(self.epsilons)}")
        if self.seeds_per_epsilon < 1:
            raise ConfigError("seeds_per_epsilon must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not isinstance(self.instance, dict) or not self.instance:
            raise ConfigError("instance must be a non-empty object")
        source_keys = set(self.instance) & {"file", "inline", "generate"}
        if len(source_keys) != 1:
            raise ConfigError("instance must specify exactly one of: file, inline, generate")
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "oracle": {
                "kind": self.oracle.kind,
                "epsilon": self.oracle.epsilon,
                "seed": self.oracle.seed,
                "beta": self.oracle.beta,
                "max_iters": self.oracle.max_iters,
                "warm_start": self.oracle.warm_start,
            },
            "solver": {
                "alpha": self.solver.alpha,
                "iters": self.solver.iters,
                "delta": self.solver.delta,
                "basis": self.solver.basis,
                "x_init_seed": self.solver.x_init_seed,
                "x_init_scale": self.solver.x_init_scale,
                "stop_grad_norm": self.solver.stop_grad_norm,
            },
            "epsilons": list(self.epsilons),
            "seeds_per_epsilon": self.seeds_per_epsilon,
            "base_seed": self.base_seed,
            "out_dir": self.out_dir,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be an object")
        unknown = set(doc) - {
            "instance", "oracle", "solver", "epsilons", "seeds_per_epsilon",
            "base_seed", "out_dir", "workers",
        }
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            oracle = OracleConfig(**doc.get("oracle", {}))
            solver_settings = SolverSettings(**doc.get("solver", {}))
        except TypeError as exc:
            raise ConfigError(f"bad oracle/solver settings: {exc}") from exc
        if oracle.kind not in ORACLE_KINDS:
            raise ConfigError(f"unknown oracle kind {oracle.kind!r}")
        return cls(
            instance=doc.get("instance", {}),
            oracle=oracle,
            solver=solver_settings,
            epsilons=tuple(doc.get("epsilons", (0.01, 0.025, 0.04, 0.1, 0.2))),
            seeds_per_epsilon=int(doc.get("seeds_per_epsilon", 10)),
            base_seed=int(doc.get("base_seed", 0)),
            out_dir=str(doc.get("out_dir", "results")),
            workers=int(doc.get("workers", 1)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def resolve_instance(cfg: ExperimentConfig) -> QuadraticGame:
    spec = cfg.instance
    if "file" in spec:
        return load_instance(spec["file"])
    if "inline" in spec:
        return QuadraticGame.from_dict(spec["inline"])
    gen = dict(spec["generate"])
    try:
        n, m, seed = int(gen.pop("n")), int(gen.pop("m")), int(gen.pop("seed"))
    except KeyError as exc:
        raise ConfigError(f"instance.generate missing field {exc}") from exc
    try:
        options = InstanceOptions(**gen)
    except TypeError as exc:
        raise ConfigError(f"bad instance.generate options: {exc}") from exc
    game, _ = generate_instance(n, m, seed, options)
    return game


def initial_point(cfg: ExperimentConfig, n: int) -> np.ndarray:
    """Seeded unit-norm direction scaled by x_init_scale."""
    seed = cfg.solver.x_init_seed if cfg.solver.x_init_seed is not None else cfg.base_seed
    u = np.random.default_rng(seed).standard_normal(n)
    return cfg.solver.x_init_scale * u / np.linalg.norm(u)


@dataclass
class RunResult:
    """One (epsilon, seed) cell of a sweep."""

    epsilon: float
    seed: int
    trace: SolverTrace
    steady_state_error: float
    final_err_x: float
    condition_value: float
    theorem_bound: float | None
    gap: float | None


@dataclass
class ResultBundle:
    """In-memory sweep result; write() lays it out on disk."""

    config: ExperimentConfig
    game: QuadraticGame
    mode: str
    results: list[RunResult]
    reports: dict[float, analysis.AnalysisReport]
    skipped: list[tuple[float, float]] = field(default_factory=list)  # (eps, condition_value)

    def summary_rows(self) -> list[list]:
        rows = []
        for res in self.results:
            rows.append([
                _fmt(res.epsilon),
                res.seed,
                _fmt(res.steady_state_error),
                _fmt(res.condition_value),
                "" if res.theorem_bound is None else _fmt(res.theorem_bound),
                "" if res.gap is None else _fmt(res.gap),
            ])
        return rows

    def analysis_rows(self) -> list[list]:
        rows = []
        for eps in sorted(self.reports):
            rep = self.reports[eps]
            rows.append([
                _fmt(eps), _fmt(rep.a), _fmt(rep.b), _fmt(rep.kappa), _fmt(rep.kappa_certified),
                _fmt(rep.kappa_printed), _fmt(rep.mu_f), _fmt(rep.l_f), _fmt(rep.pinv_norm),
                _fmt(rep.delta), rep.p, _fmt(rep.condition_value),
                "" if rep.theorem_bound is None else _fmt(rep.theorem_bound),
            ])
        return rows

    def write(self, out_dir: str | Path | None = None) -> Path:
        out = Path(out_dir if out_dir is not None else self.config.out_dir)
        traces_dir = out / "traces"
        traces_dir.mkdir(parents=True, exist_ok=True)
        runs_index = []
        for res in self.results:
            name = f"trace_eps{res.epsilon!r}_seed{res.seed}.csv"
            res.trace.write_csv(traces_dir / name)
            runs_index.append({
                "epsilon": res.epsilon,
                "seed": res.seed,
                "trace": f"traces/{name}",
                "status": res.trace.status,
            })
        _write_csv(out / "summary.csv", SUMMARY_CSV_HEADER, self.summary_rows())
        _write_csv(out / "analysis.csv", ANALYSIS_CSV_HEADER, self.analysis_rows())
        manifest = {
            "tool": "stackgrad",
            "version": __version__,
            "mode": self.mode,
            "config": self.config.to_dict(),
            "config_hash": config_hash(self.config),
            "instance": self.game.to_dict(),
            "runs": runs_index,
            "skipped_epsilons": [{"epsilon": e, "condition_value": c} for e, c in self.skipped],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def run_sweep(cfg: ExperimentConfig, mode: str = "run") -> ResultBundle:
    """Execute the (epsilon, seed) grid; mode "tightness" keeps only conforming epsilons.

    Any run that does not complete (oracle failure, divergence) raises
    StackgradError carrying its grid coordinates.
    """
    if mode not in ("run", "tightness"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    game = resolve_instance(cfg)
    basis = _make_basis(cfg.solver.basis, game.n)
    plan = SamplingPlan(delta=cfg.solver.delta, basis=basis)
    x_init = initial_point(cfg, game.n)

    epsilons = sorted(set(cfg.epsilons))
    reports = {eps: analysis.constants(game, plan, eps) for eps in epsilons}
    skipped: list[tuple[float, float]] = []
    if mode == "tightness":
        if any(eps == 0.0 for eps in epsilons):
            raise ConfigError(
                "tightness mode requires epsilon > 0: at finite horizons the epsilon=0 gap "
                "is float noise around zero (run the exact limit in run mode instead)"
            )
        conforming = [eps for eps in epsilons if reports[eps].condition_value < 0.0]
        skipped = [(eps, reports[eps].condition_value) for eps in epsilons if eps not in conforming]
        for eps, cond in skipped:
            print(f"note: skipping eps={eps!r}: condition value {cond:.6g} >= 0", file=sys.stderr)
        if not conforming:
            raise ConfigError(
                "no epsilon in the grid satisfies the convergence condition; condition values: "
                + ", ".join(f"{e!r}: {c:.6g}" for e, c in skipped)
            )
        epsilons = conforming

    cells = [(eps, rep) for eps in epsilons for rep in range(cfg.seeds_per_epsilon)]

    def run_cell(cell: tuple[float, int]) -> RunResult:
        eps, rep = cell
        oracle_cfg = cfg.oracle.replace_epsilon(eps)
        oracle_cfg = replace(oracle_cfg, seed=cfg.base_seed + rep)
        solver_cfg = SolverConfig(
            alpha=cfg.solver.alpha,
            max_iters=cfg.solver.iters,
            x_init=x_init,
            plan=plan,
            oracle=oracle_cfg,
            stop_grad_norm=cfg.solver.stop_grad_norm,
        )
        trace = run(game, solver_cfg)
        if trace.status in ("oracle_failure", "diverged"):
            k = trace.failure.get("k") if trace.failure else None
            raise StackgradError(
                f"run failed ({trace.status}) at eps={eps!r}, seed={oracle_cfg.seed}, k={k}: "
                f"{trace.failure.get('reason') if trace.failure else 'unknown'}"
            )
        sse = steady_state_error(trace)
        report = reports[eps]
        gap = None if report.theorem_bound is None else analysis.tightness_gap(report, sse)
        return RunResult(
            epsilon=eps,
            seed=oracle_cfg.seed,
            trace=trace,
            steady_state_error=sse,
            final_err_x=trace.records[-1][1],
            condition_value=report.condition_value,
            theorem_bound=report.theorem_bound,
            gap=gap,
        )

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(cell) for cell in cells]
    results.sort(key=lambda r: (r.epsilon, r.seed))
    return ResultBundle(
        config=cfg, game=game, mode=mode, results=results, reports=reports, skipped=skipped
    )


def _make_basis(kind: str, n: int) -> PositiveBasis:
    if kind != "standard_double":
        raise ConfigError(f"unsupported basis kind {kind!r} (only 'standard_double' via config)")
    return PositiveBasis.standard_double(n)


def load_bundle_summary(bundle_dir: str | Path) -> list[dict]:
    """Parse summary.csv back into typed rows (None for empty optional cells)."""
    path = Path(bundle_dir) / "summary.csv"
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SUMMARY_CSV_HEADER:
            raise StackgradError(f"unexpected summary schema in {path}: {reader.fieldnames}")
        rows = []
        for raw in reader:
            rows.append({
                "epsilon": float(raw["epsilon"]),
                "seed": int(raw["seed"]),
                "steady_state_error": float(raw["steady_state_error"]),
                "condition_value": float(raw["condition_value"]),
                "theorem_bound": float(raw["theorem_bound"]) if raw["theorem_bound"] else None,
                "gap": float(raw["gap"]) if raw["gap"] else None,
            })
    return rows


def load_manifest(bundle_dir: str | Path) -> dict:
    path = Path(bundle_dir) / "manifest.json"
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise StackgradError(f"cannot read bundle manifest {path}: {exc}") from exc


def export_convergence_data(bundle_dir: str | Path, out_path: str | Path) -> None:
    """Long-format convergence curves (epsilon, seed, k, err_x) from a bundle."""
    bundle = Path(bundle_dir)
    manifest = load_manifest(bundle)
    rows = []
    for entry in manifest["runs"]:
        with open(bundle / entry["trace"], newline="") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                rows.append([_fmt(entry["epsilon"]), entry["seed"], rec["k"], rec["err_x"]])
    _write_csv(Path(out_path), ["epsilon", "seed", "k", "err_x"], rows)


def export_tightness_data(bundle_dir: str | Path, out_path: str | Path) -> None:
    """Seed-averaged tightness curve (epsilon, theorem_bound, mean_sse, mean_gap)."""
    summary = [row for row in load_bundle_summary(bundle_dir) if row["gap"] is not None]
    if not summary:
        raise StackgradError("bundle has no conforming rows to export")
    rows = []
    for eps in sorted({row["epsilon"] for row in summary}):
        cells = [row for row in summary if row["epsilon"] == eps]
        rows.append([
            _fmt(eps),
            _fmt(cells[0]["theorem_bound"]),
            _fmt(np.mean([c["steady_state_error"] for c in cells])),
            _fmt(np.mean([c["gap"] for c in cells])),
        ])
    _write_csv(Path(out_path), ["epsilon", "theorem_bound", "mean_steady_state_error", "mean_gap"], rows)
