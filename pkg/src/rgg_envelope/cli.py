"""Experiment pipeline: config ingestion, cached builds, CSV/JSON emission.

Subcommands cover the pipeline stages (build, solve, simulate, study,
coverage).  A JSON config describes one experiment; every stage is
deterministic given the config, so re-runs produce byte-identical CSV
files.  Wall-clock timings go only into the JSON summaries.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import EnvelopeCase, affine_case, constant_case, saddle_case, sup_error
from .errors import (
    ConfigError,
    EnvelopeError,
    MissingAnnulusError,
    NonConvergenceError,
    NonTerminationError,
)
from .game import monte_carlo_value
from .geometry import DomainSpec, GraphParams, PointCloud, sample_points, schedule_params
from .rgg import (
    AnnulusSystem,
    ProximityGraph,
    VertexClassification,
    build_graph,
    classify,
    coverage_report,
    reflection_errors,
)
from .solver import ValueField, solve_dpp
from .streams import derive_seed

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_MC_DISAGREEMENT = 4
EXIT_COVERAGE = 5


@dataclass(frozen=True)
class RunSpec:
    """One (n, r) experiment size; r is None in asymptotic mode."""

    n: int
    r: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int
    domain: DomainSpec
    datum_kind: str
    case: EnvelopeCase | None
    datum_array: np.ndarray | None
    mode: str
    runs: tuple[RunSpec, ...]
    seeds: tuple[int, ...]
    points: np.ndarray | None
    delta: float | None
    alpha: float | None
    tol: float | None
    max_sweeps: int
    mc_episodes: int
    mc_seed: int
    mc_x0: tuple[int, ...] | None
    mc_x0_count: int | None
    step_cap_factor: float
    grid_resolution: int
    grid_margin: float | None
    coverage_spacing: float | None
    output_dir: str

    def datum(self):
        return self.datum_array if self.case is None else self.case.datum

    @property
    def datum_id(self) -> str:
        return "explicit-values" if self.case is None else self.case.datum_id


def _need(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required field {key!r}")
    val = obj[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ConfigError(f"{where}: field {key!r} must be of type {kind.__name__}")
    return val


def _opt(obj: dict, key: str, kind, default, where: str):
    if key not in obj or obj[key] is None:
        return default
    return _need(obj, key, kind, where)


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {sorted(extra)}")


def _parse_domain(obj, d: int) -> DomainSpec:
    if not isinstance(obj, dict):
        raise ConfigError("domain: must be an object")
    kind = _need(obj, "kind", str, "domain")
    center = np.asarray(_need(obj, "center", list, "domain"), dtype=float)
    if center.shape != (d,):
        raise ConfigError(f"domain: center must have {d} coordinates")
    if kind == "ball":
        _check_keys(obj, {"kind", "center", "radius"}, "domain")
        return DomainSpec.ball(center, _need(obj, "radius", float, "domain"))
    if kind == "ellipsoid":
        _check_keys(obj, {"kind", "center", "radii"}, "domain")
        radii = np.asarray(_need(obj, "radii", list, "domain"), dtype=float)
        if radii.shape != (d,):
            raise ConfigError(f"domain: radii must have {d} entries")
        return DomainSpec.ellipsoid(center, radii)
    raise ConfigError(f"domain: unknown kind {kind!r}")


def _parse_datum(obj, domain: DomainSpec):
    if not isinstance(obj, dict):
        raise ConfigError("datum: must be an object")
    kind = _need(obj, "kind", str, "datum")
    if kind == "constant":
        _check_keys(obj, {"kind", "value"}, "datum")
        return kind, constant_case(domain, _need(obj, "value", float, "datum")), None
    if kind == "affine":
        _check_keys(obj, {"kind", "coefficients", "offset"}, "datum")
        coeffs = _need(obj, "coefficients", list, "datum")
        if len(coeffs) != domain.d:
            raise ConfigError(f"datum: coefficients must have {domain.d} entries")
        return kind, affine_case(domain, coeffs, _need(obj, "offset", float, "datum")), None
    if kind == "saddle":
        _check_keys(obj, {"kind"}, "datum")
        return kind, saddle_case(domain), None
    if kind == "values":
        _check_keys(obj, {"kind", "values"}, "datum")
        vals = np.asarray(_need(obj, "values", list, "datum"), dtype=float)
        if vals.ndim != 1 or not np.all(np.isfinite(vals)):
            raise ConfigError("datum: values must be a flat list of finite numbers")
        return kind, None, vals
    raise ConfigError(f"datum: unknown kind {kind!r}")


def parse_config(obj: dict) -> ExperimentConfig:
    """Validate a parsed JSON object into an ExperimentConfig."""
    if not isinstance(obj, dict):
        raise ConfigError("config: top level must be an object")
    _check_keys(obj, {"schema_version", "dimension", "domain", "datum", "schedule",
                      "seeds", "points", "solver", "mc", "eval_grid", "coverage",
                      "output_dir"}, "config")
    version = _need(obj, "schema_version", int, "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config: unsupported schema_version {version}")
    d = _need(obj, "dimension", int, "config")
    if d < 2:
        raise ConfigError("config: dimension must be >= 2")
    domain = _parse_domain(_need(obj, "domain", dict, "config"), d)
    datum_kind, case, datum_array = _parse_datum(_need(obj, "datum", dict, "config"), domain)

    sched = _need(obj, "schedule", dict, "config")
    _check_keys(sched, {"mode", "runs", "delta", "alpha"}, "schedule")
    mode = _need(sched, "mode", str, "schedule")
    if mode not in ("asymptotic", "practical"):
        raise ConfigError(f"schedule: unknown mode {mode!r}")
    raw_runs = _need(sched, "runs", list, "schedule")
    if not raw_runs:
        raise ConfigError("schedule: need at least one run")
    runs = []
    for i, entry in enumerate(raw_runs):
        if not isinstance(entry, dict):
            raise ConfigError(f"schedule: run {i} must be an object")
        _check_keys(entry, {"n", "r"}, f"schedule run {i}")
        n = _need(entry, "n", int, f"schedule run {i}")
        if mode == "practical":
            runs.append(RunSpec(n=n, r=_need(entry, "r", float, f"schedule run {i}")))
        else:
            if "r" in entry:
                raise ConfigError(f"schedule run {i}: asymptotic mode derives r; drop the field")
            runs.append(RunSpec(n=n))
    delta = _opt(sched, "delta", float, None, "schedule")
    alpha = _opt(sched, "alpha", float, None, "schedule")
    if mode == "asymptotic" and (delta is not None or alpha is not None):
        raise ConfigError("schedule: delta/alpha overrides need practical mode")

    seeds = _need(obj, "seeds", list, "config")
    if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ConfigError("config: seeds must be a nonempty list of integers")
    if any(s < 0 for s in seeds):
        raise ConfigError("config: seeds must be nonnegative")

    points = None
    if obj.get("points") is not None:
        points = np.asarray(_need(obj, "points", list, "config"), dtype=float)
        if points.ndim != 2 or points.shape[1] != d:
            raise ConfigError(f"config: points must be a list of {d}-coordinate rows")
        if mode != "practical" or len(runs) != 1:
            raise ConfigError("config: an explicit cloud needs practical mode and one run")
        if runs[0].n != points.shape[0]:
            raise ConfigError("config: run n must equal the number of explicit points")
    if datum_kind == "values":
        if points is None:
            raise ConfigError("datum: explicit values need an explicit cloud")
        if datum_array.shape[0] != points.shape[0]:
            raise ConfigError("datum: one value per explicit point required")

    solver = _opt(obj, "solver", dict, {}, "config")
    _check_keys(solver, {"tol", "max_sweeps"}, "solver")
    tol = _opt(solver, "tol", float, None, "solver")
    max_sweeps = _opt(solver, "max_sweeps", int, 10**6, "solver")
    if max_sweeps < 1:
        raise ConfigError("solver: max_sweeps must be >= 1")

    mc = _opt(obj, "mc", dict, {}, "config")
    _check_keys(mc, {"episodes", "seed", "x0", "x0_count", "step_cap_factor"}, "mc")
    mc_episodes = _opt(mc, "episodes", int, 10**4, "mc")
    if mc_episodes < 1:
        raise ConfigError("mc: episodes must be >= 1")
    mc_seed = _opt(mc, "seed", int, 0, "mc")
    mc_x0 = mc.get("x0")
    if mc_x0 is not None:
        if not isinstance(mc_x0, list) or not mc_x0 or not all(
            isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in mc_x0
        ):
            raise ConfigError("mc: x0 must be a nonempty list of vertex indices")
        mc_x0 = tuple(mc_x0)
    mc_x0_count = _opt(mc, "x0_count", int, None, "mc")
    if mc_x0 is not None and mc_x0_count is not None:
        raise ConfigError("mc: give x0 or x0_count, not both")
    if mc_x0_count is not None and mc_x0_count < 1:
        raise ConfigError("mc: x0_count must be >= 1")
    step_cap_factor = _opt(mc, "step_cap_factor", float, 50.0, "mc")
    if step_cap_factor <= 0:
        raise ConfigError("mc: step_cap_factor must be positive")

    grid = _opt(obj, "eval_grid", dict, {}, "config")
    _check_keys(grid, {"resolution", "margin"}, "eval_grid")
    resolution = _opt(grid, "resolution", int, 41, "eval_grid")
    if resolution < 2:
        raise ConfigError("eval_grid: resolution must be >= 2")
    margin = _opt(grid, "margin", float, None, "eval_grid")

    cov = _opt(obj, "coverage", dict, {}, "config")
    _check_keys(cov, {"direction_spacing"}, "coverage")
    spacing = _opt(cov, "direction_spacing", float, None, "coverage")

    return ExperimentConfig(
        dimension=d, domain=domain, datum_kind=datum_kind, case=case,
        datum_array=datum_array, mode=mode, runs=tuple(runs),
        seeds=tuple(int(s) for s in seeds), points=points, delta=delta, alpha=alpha,
        tol=tol, max_sweeps=max_sweeps, mc_episodes=mc_episodes, mc_seed=mc_seed,
        mc_x0=mc_x0, mc_x0_count=mc_x0_count, step_cap_factor=step_cap_factor,
        grid_resolution=resolution, grid_margin=margin, coverage_spacing=spacing,
        output_dir=_opt(obj, "output_dir", str, "out", "config"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(obj)


def run_params(cfg: ExperimentConfig, run: RunSpec) -> GraphParams:
    if cfg.mode == "asymptotic":
        return schedule_params(run.n, cfg.dimension, mode="asymptotic")
    base = schedule_params(run.n, cfg.dimension, mode="practical", explicit_r=run.r)
    if cfg.delta is None and cfg.alpha is None:
        return base
    return GraphParams(n=base.n, r=base.r,
                       delta=base.delta if cfg.delta is None else cfg.delta,
                       alpha=base.alpha if cfg.alpha is None else cfg.alpha)


def run_label(params: GraphParams, seed: int) -> str:
    return f"n{params.n}_r{params.r:g}_seed{seed}"


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cache_dir(out_dir: Path) -> Path:
    env = os.environ.get("RGG_ENVELOPE_CACHE")
    return Path(env) if env else out_dir / "cache"


def cache_key(cfg: ExperimentConfig, params: GraphParams, seed: int) -> str:
    text = (f"v{SCHEMA_VERSION}|d={cfg.dimension}|n={params.n}|seed={seed}"
            f"|r={params.r:.17g}|delta={params.delta:.17g}")
    if cfg.points is not None:
        text += "|pts=" + hashlib.sha256(np.ascontiguousarray(cfg.points).tobytes()).hexdigest()
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class BuildResult:
    def __init__(self, params: GraphParams, graph: ProximityGraph,
                 system: AnnulusSystem, cache_hit: bool, path: Path):
        self.params = params
        self.graph = graph
        self.system = system
        self.cache_hit = cache_hit
        self.path = path


def _load_cache(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    sidecar = path.with_suffix(path.suffix + ".sha256")
    try:
        data = path.read_bytes()
        recorded = sidecar.read_text(encoding="utf-8").strip()
    except OSError:
        return None
    if hashlib.sha256(data).hexdigest() != recorded:
        print(f"warning: cache checksum mismatch for {path.name}; rebuilding",
              file=sys.stderr)
        return None
    try:
        with np.load(path) as payload:
            return payload["points"], payload["indptr"], payload["indices"]
    except (OSError, ValueError, KeyError):
        print(f"warning: cache file {path.name} unreadable; rebuilding", file=sys.stderr)
        return None


def build_system(cfg: ExperimentConfig, run: RunSpec, seed: int, out_dir: Path) -> BuildResult:
    params = run_params(cfg, run)
    cdir = cache_dir(out_dir)
    path = cdir / f"rgg_{cache_key(cfg, params, seed)}.npz"
    if path.exists():
        loaded = _load_cache(path)
        if loaded is not None:
            points, indptr, indices = loaded
            graph = build_graph(PointCloud.from_points(points), params.r)
            system = AnnulusSystem(graph, params.delta, indptr=indptr, indices=indices)
            return BuildResult(params, graph, system, True, path)
    if cfg.points is not None:
        cloud = PointCloud.from_points(cfg.points)
    else:
        cloud = sample_points(cfg.dimension, params.n, seed)
    graph = build_graph(cloud, params.r)
    system = AnnulusSystem(graph, params.delta)
    cdir.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, points=graph.points, indptr=system.indptr, indices=system.indices)
    tmp.replace(path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    path.with_suffix(path.suffix + ".sha256").write_text(digest + "\n", encoding="utf-8")
    return BuildResult(params, graph, system, False, path)


def _classify_with_warning(cfg: ExperimentConfig, built: BuildResult,
                           seed: int) -> VertexClassification:
    if cfg.domain.cube_margin() <= built.params.r:
        print(f"warning: run {run_label(built.params, seed)}: cube margin "
              f"{cfg.domain.cube_margin():.6g} <= r {built.params.r:.6g}; the outer "
              "shell is clipped by the unit cube", file=sys.stderr)
    return classify(built.graph, cfg.domain)


def _solve_run(cfg: ExperimentConfig, built: BuildResult,
               classification: VertexClassification) -> tuple[ValueField, float]:
    t0 = time.perf_counter()
    field = solve_dpp(built.system, classification, cfg.datum(), tol=cfg.tol,
                      max_sweeps=cfg.max_sweeps, datum_id=cfg.datum_id)
    return field, time.perf_counter() - t0


def _solve_summary(cfg: ExperimentConfig, built: BuildResult,
                   classification: VertexClassification, field: ValueField,
                   seed: int, runtime: float) -> dict:
    p = built.params
    return {
        "schema_version": SCHEMA_VERSION,
        "n": p.n, "r": p.r, "delta": p.delta, "alpha": p.alpha, "seed": seed,
        "datum": field.datum_id,
        "component_size": int(classification.component.shape[0]),
        "interior_size": int(classification.interior.shape[0]),
        "boundary_size": int(classification.boundary.shape[0]),
        "sweeps": field.sweeps,
        "residual": field.residual,
        "tol": cfg.tol if cfg.tol is not None else 1e-9 * max(1.0, field.sup_datum),
        "runtime_seconds": runtime,
    }


def _values_rows(graph: ProximityGraph, classification: VertexClassification,
                 field: ValueField):
    inside = classification.interior_mask()
    for idx in classification.component:
        region = "interior" if inside[idx] else "boundary"
        yield [int(idx), *graph.points[idx], region, field.values[idx]]


def cmd_build(cfg: ExperimentConfig, out_dir: Path) -> int:
    for run in cfg.runs:
        for seed in cfg.seeds:
            built = build_system(cfg, run, seed, out_dir)
            state = "cache hit" if built.cache_hit else "built"
            print(f"{run_label(built.params, seed)}: {state} ({built.path.name})")
    return EXIT_OK


def cmd_solve(cfg: ExperimentConfig, out_dir: Path) -> int:
    for run in cfg.runs:
        for seed in cfg.seeds:
            built = build_system(cfg, run, seed, out_dir)
            classification = _classify_with_warning(cfg, built, seed)
            field, runtime = _solve_run(cfg, built, classification)
            label = run_label(built.params, seed)
            run_dir = out_dir / "runs" / label
            header = ["vertex_index", *[f"x_{j + 1}" for j in range(cfg.dimension)],
                      "region", "value"]
            write_csv(run_dir / "values.csv", header,
                      _values_rows(built.graph, classification, field))
            write_json(run_dir / "summary.json",
                       _solve_summary(cfg, built, classification, field, seed, runtime))
            print(f"{label}: solved in {field.sweeps} sweeps, residual {field.residual:.3e}")
    return EXIT_OK


def _mc_starts(cfg: ExperimentConfig, classification: VertexClassification) -> np.ndarray:
    if cfg.mc_x0 is not None:
        starts = np.asarray(cfg.mc_x0, dtype=np.int64)
        member = np.isin(starts, classification.component)
        if not member.all():
            raise ConfigError(f"mc: x0 {starts[~member][0]} is outside the component")
        return starts
    interior = classification.interior
    count = min(cfg.mc_x0_count or 1, interior.shape[0])
    picks = np.unique(np.linspace(0, interior.shape[0] - 1, count).round().astype(np.int64))
    return interior[picks]


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path) -> int:
    worst: tuple[float, str] | None = None
    for run in cfg.runs:
        for seed in cfg.seeds:
            built = build_system(cfg, run, seed, out_dir)
            classification = _classify_with_warning(cfg, built, seed)
            field, _ = _solve_run(cfg, built, classification)
            label = run_label(built.params, seed)
            rows = []
            for x0 in _mc_starts(cfg, classification):
                mc_seed = derive_seed(derive_seed(cfg.mc_seed, seed), int(x0))
                est = monte_carlo_value(built.system, classification, field, int(x0),
                                        episodes=cfg.mc_episodes, seed=mc_seed,
                                        step_cap_factor=cfg.step_cap_factor)
                gap = abs(est.mean - field.values[x0])
                if gap > 3.0 * est.stderr and (worst is None or gap > worst[0]):
                    worst = (gap, f"{label} x0={int(x0)}: |mc - dpp| = {gap:.3e} "
                                  f"> 3 stderr = {3.0 * est.stderr:.3e}")
                rows.append([int(x0), field.values[x0], est.mean, est.stderr,
                             est.episodes, est.tau_mean, est.tau_max])
            write_csv(out_dir / "runs" / label / "mc.csv",
                      ["x0_index", "u_dpp", "mc_mean", "mc_stderr", "N",
                       "tau_mean", "tau_max"], rows)
            print(f"{label}: {len(rows)} start(s), {cfg.mc_episodes} episodes each")
    if worst is not None:
        print(f"mc disagreement: {worst[1]}", file=sys.stderr)
        return EXIT_MC_DISAGREEMENT
    return EXIT_OK


def cmd_study(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.case is None:
        raise ConfigError("study needs a datum with a known envelope, not explicit values")
    t0 = time.perf_counter()
    records = []
    for run in cfg.runs:
        for seed in cfg.seeds:
            built = build_system(cfg, run, seed, out_dir)
            classification = _classify_with_warning(cfg, built, seed)
            field, runtime = _solve_run(cfg, built, classification)
            refl = reflection_errors(built.system, classification)
            stats = sup_error(field, classification, built.graph, cfg.case,
                              resolution=cfg.grid_resolution, margin=cfg.grid_margin)
            p = built.params
            records.append({
                "n": p.n, "r": p.r, "delta": p.delta, "alpha": p.alpha, "seed": seed,
                "sup_error": stats.sup, "mean_error": stats.mean,
                "sweeps": field.sweeps, "max_reflection_error": refl.max,
                "runtime_seconds": runtime,
            })
            print(f"{run_label(p, seed)}: sup error {stats.sup:.6g}")
    records.sort(key=lambda rec: (rec["n"], rec["seed"]))
    write_csv(out_dir / "convergence.csv",
              ["n", "r", "delta", "alpha", "seed", "sup_error", "mean_error",
               "sweeps", "max_reflection_error"],
              ([rec[k] for k in ("n", "r", "delta", "alpha", "seed", "sup_error",
                                 "mean_error", "sweeps", "max_reflection_error")]
               for rec in records))
    sizes = sorted({rec["n"] for rec in records})
    write_csv(out_dir / "plotdata.csv", ["n", "median_sup_error"],
              ([n, float(np.median([rec["sup_error"] for rec in records
                                    if rec["n"] == n]))] for n in sizes))
    write_json(out_dir / "study_summary.json", {
        "schema_version": SCHEMA_VERSION,
        "datum": cfg.datum_id,
        "records": records,
        "runtime_seconds": time.perf_counter() - t0,
    })
    return EXIT_OK


def cmd_coverage(cfg: ExperimentConfig, out_dir: Path) -> int:
    rows = []
    failure: str | None = None
    for run in cfg.runs:
        for seed in cfg.seeds:
            built = build_system(cfg, run, seed, out_dir)
            classification = _classify_with_warning(cfg, built, seed)
            empty = built.system.empty_rows(classification.interior)
            if empty.size:
                failure = (f"{run_label(built.params, seed)}: {empty.size} interior "
                           f"vertices with empty annuli (first: vertex {int(empty[0])}); "
                           "n is below the connectivity threshold for this r")
                break
            report = coverage_report(built.system, classification, built.params,
                                     direction_net_spacing=cfg.coverage_spacing)
            p = built.params
            rows.append([p.n, p.r, seed, int(classification.interior.shape[0]),
                         report.sectors_tested, report.sectors_empty,
                         report.max_reflection_error, report.mean_reflection_error,
                         report.expected_sector_count])
        if failure:
            break
    write_csv(out_dir / "coverage.csv",
              ["n", "r", "seed", "interior_vertices", "sectors_tested", "sectors_empty",
               "max_reflection_error", "mean_reflection_error", "expected_sector_count"],
              rows)
    if failure:
        print(f"coverage failure: {failure}", file=sys.stderr)
        return EXIT_COVERAGE
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "study": cmd_study,
    "coverage": cmd_coverage,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rgg-envelope",
        description="Random-geometric-graph convex envelope experiment pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("build", "sample clouds and cache graph structures"),
        ("solve", "solve the DPP and write values.csv per run"),
        ("simulate", "Monte Carlo check of solved values (mc.csv)"),
        ("study", "convergence study across runs (convergence.csv, plotdata.csv)"),
        ("coverage", "annulus direction coverage diagnostics (coverage.csv)"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="experiment config (JSON)")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument("--seeds", default=None,
                         help="comma-separated seed override, e.g. 1,2,3")
        cmd.add_argument("--jobs", type=int, default=1,
                         help="accepted for interface compatibility; runs are sequential")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seeds is not None:
            try:
                seeds = tuple(int(tok) for tok in args.seeds.split(",") if tok)
            except ValueError as exc:
                raise ConfigError(f"--seeds must be comma-separated integers: {exc}")
            if not seeds:
                raise ConfigError("--seeds must name at least one seed")
            cfg = replace(cfg, seeds=seeds)
        out_dir = Path(args.out) if args.out is not None else Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except NonTerminationError as exc:
        print(f"episode hit the step cap: {exc}", file=sys.stderr)
        return EXIT_MC_DISAGREEMENT
    except MissingAnnulusError as exc:
        print(f"coverage failure: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnvelopeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
