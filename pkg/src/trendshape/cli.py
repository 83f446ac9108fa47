"""Command-line pipeline: ingest -> EDA -> symbolic/topological features ->
clustering -> evaluation reports.

All outputs are CSV plus one manifest.json snapshotting the effective config,
input digests, and per-stage output digests; reruns with identical inputs and
config produce byte-identical CSVs. Subcommands are independently re-runnable
for parameter sweeps.

Exit codes: 0 success, 2 user/input error, 3 internal numerical error.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import clustering, eda, symbolic, topology
from .clustering import FeatureMatrix
from .dataset import (
    Dataset,
    ValidationReport,
    archetype_dataset,
    merge,
    parse_trends_csv,
    to_canonical_csv,
    validate,
)
from .errors import (
    ConfigError,
    DegenerateSample,
    EmptyDataset,
    InvalidFiltration,
    NumericalError,
    TrendshapeError,
    UndefinedScore,
)
from .symbolic import Alphabet, WordKind
from .topology import TdaParams, TdaStrategy

USER_ERROR = 2
NUMERICAL_ERROR = 3

REPRESENTATIONS = ("sax", "esax", "tda")
METHODS = ("kmeans", "ward")

_NUMERICAL_EXCEPTIONS = (NumericalError, UndefinedScore, InvalidFiltration, DegenerateSample)


class ValidationFailure(TrendshapeError):
    """Dataset failed validation and --allow-warnings was not given."""


@dataclass(frozen=True)
class PipelineConfig:
    """Effective pipeline settings; flags > config file > these defaults."""

    alphabet_size: int = 4
    window: int = 52
    n_segments: int = 12
    embed_dim: int = 6
    embed_tau: int = 3
    k: int = 6
    seed: int = 0
    strategy: str = "H1_ONLY"
    persistence_floor: float = 0.10
    k_max: int = 5
    grid_size: int = 100
    restarts: int = 10
    max_radius_rule: str = "enclosing"

    def validated(self) -> "PipelineConfig":
        if not 2 <= self.alphabet_size <= 26:
            raise ConfigError(f"alphabet size must be in [2, 26], got {self.alphabet_size}")
        if self.window < 2:
            raise ConfigError(f"window must be >= 2, got {self.window}")
        if not 1 <= self.n_segments <= self.window:
            raise ConfigError(
                f"segments must be in [1, window={self.window}], got {self.n_segments}"
            )
        if self.embed_dim < 1 or self.embed_tau < 1:
            raise ConfigError("embed-dim and tau must be >= 1")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.strategy not in (s.value for s in TdaStrategy):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.persistence_floor <= 1.0:
            raise ConfigError(
                f"persistence-floor must be in [0, 1], got {self.persistence_floor}"
            )
        if self.k_max < 1:
            raise ConfigError(f"kmax must be >= 1, got {self.k_max}")
        if self.grid_size < 2:
            raise ConfigError(f"grid must be >= 2, got {self.grid_size}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_radius_rule not in ("enclosing", "diameter"):
            raise ConfigError(f"unknown radius rule {self.max_radius_rule!r}")
        return self

    def tda_params(self) -> TdaParams:
        return TdaParams(
            embed_dim=self.embed_dim,
            embed_tau=self.embed_tau,
            max_dimension=2,
            max_radius_rule=self.max_radius_rule,
            k_max=self.k_max,
            grid_size=self.grid_size,
            persistence_floor=self.persistence_floor,
        )


_FLAG_FIELDS = {
    "alphabet": "alphabet_size",
    "window": "window",
    "segments": "n_segments",
    "embed_dim": "embed_dim",
    "tau": "embed_tau",
    "k": "k",
    "seed": "seed",
    "strategy": "strategy",
    "persistence_floor": "persistence_floor",
    "kmax": "k_max",
    "grid": "grid_size",
    "restarts": "restarts",
    "radius_rule": "max_radius_rule",
}


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {config_path}: {e}") from None
        defaults = PipelineConfig()
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ConfigError(f"config file {config_path}: unknown keys {sorted(unknown)}")
        coerced = {}
        for key, value in loaded.items():
            try:
                coerced[key] = type(getattr(defaults, key))(value)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"config file {config_path}: bad value for {key}: {value!r}"
                ) from None
        cfg = replace(cfg, **coerced)
    overrides = {
        field: getattr(args, flag)
        for flag, field in _FLAG_FIELDS.items()
        if getattr(args, flag, None) is not None
    }
    return replace(cfg, **overrides).validated()


def _fmt(v: float) -> str:
    return repr(float(v))


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Run:
    """Collects per-stage outputs and timings for the manifest."""

    def __init__(self, command: str, out_dir: Path, cfg: PipelineConfig):
        self.command = command
        self.out_dir = out_dir
        self.cfg = cfg
        self.inputs: dict[str, str] = {}
        self.stages: list[dict] = []
        self._current: dict | None = None
        self._t0 = 0.0
        out_dir.mkdir(parents=True, exist_ok=True)

    def add_input(self, path: Path, data: bytes) -> None:
        self.inputs[str(path)] = _digest(data)

    def start_stage(self, name: str) -> None:
        self._current = {"name": name, "outputs": {}, "seconds": 0.0}
        self._t0 = time.perf_counter()

    def end_stage(self) -> None:
        assert self._current is not None
        self._current["seconds"] = round(time.perf_counter() - self._t0, 6)
        self.stages.append(self._current)
        self._current = None

    @property
    def stage_name(self) -> str:
        return self._current["name"] if self._current else self.command

    def write(self, filename: str, text: str) -> Path:
        path = self.out_dir / filename
        data = text.encode("utf-8")
        path.write_bytes(data)
        if self._current is not None:
            self._current["outputs"][filename] = _digest(data)
        return path

    def finish(self) -> Path:
        manifest = {
            "command": self.command,
            "version": __version__,
            "config": asdict(self.cfg),
            "inputs": self.inputs,
            "stages": self.stages,
        }
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
        return path


class _StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")


@contextlib.contextmanager
def _stage_errors(run: _Run):
    """Annotate any domain error with the stage it interrupted."""
    try:
        yield
    except TrendshapeError as e:
        raise _StageFailure(run.stage_name, e) from e


def _collect_input_files(paths: list[str]) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.glob("*.csv")))
        else:
            files.append(p)
    if not files:
        raise EmptyDataset("no input CSV files found")
    return files


def _load_dataset(run: _Run, paths: list[str]) -> Dataset:
    parts = []
    for path in _collect_input_files(paths):
        data = path.read_bytes()
        run.add_input(path, data)
        parts.append(parse_trends_csv(data.decode("utf-8")))
    return merge(parts)


def _validation_csv(report: ValidationReport) -> str:
    lines = ["keyword,range_ok,spacing_ok,missing_count,aligned,duplicate_keywords"]
    for s in report.series:
        lines.append(
            f"{s.keyword},{str(s.range_ok).lower()},{str(s.spacing_ok).lower()},"
            f"{s.missing_count},{str(report.aligned).lower()},"
            f"{str(report.duplicate_keywords).lower()}"
        )
    return "\n".join(lines) + "\n"


def _stage_ingest(run: _Run, args) -> Dataset:
    run.start_stage("ingest")
    dataset = _load_dataset(run, args.inputs)
    report = validate(dataset)
    run.write("dataset.csv", to_canonical_csv(dataset))
    run.write("validation.csv", _validation_csv(report))
    run.end_stage()
    if not report.ok and not getattr(args, "allow_warnings", False):
        raise ValidationFailure(
            "validation failed (see validation.csv); rerun with --allow-warnings to proceed"
        )
    return dataset


def _stage_eda(run: _Run, dataset: Dataset) -> None:
    run.start_stage("eda")
    lines = ["keyword,count,mean,std,min,q25,median,q75,max"]
    for s in dataset.series:
        st = eda.descriptive_stats(s.values)
        lines.append(
            f"{s.keyword},{st.count},{_fmt(st.mean)},{_fmt(st.std)},{_fmt(st.min)},"
            f"{_fmt(st.q25)},{_fmt(st.median)},{_fmt(st.q75)},{_fmt(st.max)}"
        )
    run.write("eda_summary.csv", "\n".join(lines) + "\n")

    corr = eda.correlation_matrix(dataset)
    lines = ["keyword," + ",".join(corr.keywords)]
    for i, kw in enumerate(corr.keywords):
        cells = [
            _fmt(corr.values[i, j]) if corr.defined[i, j] else ""
            for j in range(len(corr.keywords))
        ]
        lines.append(kw + "," + ",".join(cells))
    run.write("eda_correlation.csv", "\n".join(lines) + "\n")

    lines = ["keyword,ks_statistic,p_value,reject_5pct,note"]
    for s in dataset.series:
        try:
            r = eda.ks_normality(s.values)
            lines.append(
                f"{s.keyword},{_fmt(r.statistic)},{_fmt(r.p_value)},"
                f"{str(r.reject_5pct).lower()},"
            )
        except DegenerateSample:
            lines.append(f"{s.keyword},,,,DegenerateSample")
    run.write("eda_ks.csv", "\n".join(lines) + "\n")

    lines = ["keyword,adf_statistic,lags_used,crit_5pct,stationary,note"]
    for s in dataset.series:
        try:
            r = eda.adf_test(s.values)
            lines.append(
                f"{s.keyword},{_fmt(r.statistic)},{r.lags_used},"
                f"{_fmt(r.critical_values['5%'])},{str(r.reject_5pct).lower()},"
            )
        except NumericalError as e:
            lines.append(f"{s.keyword},,,,,{e}")
    run.write("eda_adf.csv", "\n".join(lines) + "\n")
    run.end_stage()


def _word_sequences(dataset: Dataset, cfg: PipelineConfig, kind: WordKind):
    alphabet = Alphabet(cfg.alphabet_size)
    return [
        symbolic.sliding_words(s, cfg.window, cfg.n_segments, alphabet, kind)
        for s in dataset.series
    ]


def _stage_words(run: _Run, dataset: Dataset, cfg: PipelineConfig, kind: WordKind):
    name = "sax" if kind is WordKind.SAX else "esax"
    run.start_stage(name)
    seqs = _word_sequences(dataset, cfg, kind)
    lines = ["keyword,window_index,word"]
    for seq in seqs:
        for i, w in enumerate(seq.words):
            lines.append(f"{seq.keyword},{i},{w.symbols}")
    run.write(f"words_{name}.csv", "\n".join(lines) + "\n")
    run.end_stage()
    return seqs


def _diagram_csv(dataset: Dataset, diagrams) -> str:
    lines = ["keyword,dim,birth,death,essential"]
    for s, group in zip(dataset.series, diagrams):
        for pd in group:
            for b, d in pd.pairs:
                lines.append(f"{s.keyword},{pd.dimension},{_fmt(b)},{_fmt(d)},false")
            for b in pd.essential_births:
                lines.append(f"{s.keyword},{pd.dimension},{_fmt(b)},,true")
    return "\n".join(lines) + "\n"


def _landscape_csv(matrix: topology.TdaFeatureMatrix) -> str:
    lines = ["keyword,level,t,value"]
    grid = np.linspace(0.0, matrix.t_max, matrix.grid_size)
    n_levels = matrix.rows.shape[1] // matrix.grid_size
    for kw, row in zip(matrix.keywords, matrix.rows):
        levels = row.reshape(n_levels, matrix.grid_size)
        for level_idx in range(n_levels):
            for t, v in zip(grid, levels[level_idx]):
                lines.append(f"{kw},{level_idx + 1},{_fmt(t)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def _stage_tda(run: _Run, dataset: Dataset, cfg: PipelineConfig):
    run.start_stage("tda")
    diagrams = topology.compute_diagrams(dataset, cfg.tda_params())
    run.write("tda_diagrams.csv", _diagram_csv(dataset, diagrams))
    matrix = topology.matrix_from_diagrams(
        dataset.keywords, diagrams, TdaStrategy(cfg.strategy), cfg.tda_params()
    )
    run.write("tda_landscapes.csv", _landscape_csv(matrix))
    run.end_stage()
    return diagrams


def _symbolic_features(dataset: Dataset, cfg: PipelineConfig, kind: WordKind) -> FeatureMatrix:
    seqs = _word_sequences(dataset, cfg, kind)
    rows = np.vstack([symbolic.encode_features(seq).values for seq in seqs])
    return FeatureMatrix(labels=dataset.keywords, rows=rows)


def _features_for(
    dataset: Dataset,
    cfg: PipelineConfig,
    representation: str,
    strategy: TdaStrategy,
    diagrams=None,
) -> FeatureMatrix:
    if representation == "sax":
        return _symbolic_features(dataset, cfg, WordKind.SAX)
    if representation == "esax":
        return _symbolic_features(dataset, cfg, WordKind.ESAX)
    if diagrams is None:
        diagrams = topology.compute_diagrams(dataset, cfg.tda_params())
    tfm = topology.matrix_from_diagrams(dataset.keywords, diagrams, strategy, cfg.tda_params())
    return FeatureMatrix(labels=tfm.keywords, rows=tfm.rows)


def _cluster_outputs(
    run: _Run,
    dataset: Dataset,
    cfg: PipelineConfig,
    representation: str,
    method: str,
    strategy: TdaStrategy,
    diagrams=None,
) -> None:
    suffix = f"{representation}_{method}"
    run.start_stage(f"cluster-{suffix}")
    features = _features_for(dataset, cfg, representation, strategy, diagrams)
    if method == "kmeans":
        result = clustering.kmeans(features, cfg.k, seed=cfg.seed, restarts=cfg.restarts)
    else:
        result = clustering.ward_cluster(features, cfg.k)
    scores = clustering.evaluate(features, result.labels)

    lines = ["keyword,method,representation,cluster_id"]
    for kw, cid in zip(features.labels, result.labels):
        lines.append(f"{kw},{method},{representation},{cid}")
    run.write(f"clusters_{suffix}.csv", "\n".join(lines) + "\n")

    lines = ["cluster_id,size,members"]
    for cid, rows_in in sorted(result.members().items()):
        names = ";".join(features.labels[i] for i in rows_in)
        lines.append(f"{cid},{len(rows_in)},{names}")
    run.write(f"members_{suffix}.csv", "\n".join(lines) + "\n")

    run.write(
        f"scores_{suffix}.csv",
        "method,representation,silhouette,davies_bouldin\n"
        f"{method},{representation},{_fmt(scores.silhouette)},{_fmt(scores.davies_bouldin)}\n",
    )

    # plot-ready members: z-scored series for symbolic runs, raw for TDA
    lines = ["cluster_id,keyword,week,value"]
    for kw, cid, series in zip(features.labels, result.labels, dataset.series):
        values = series.values if representation == "tda" else eda.z_normalize(series.values)
        for week, v in zip(dataset.time_axis, values):
            lines.append(f"{cid},{kw},{week.isoformat()},{_fmt(v)}")
    run.write(f"plotdata_{suffix}.csv", "\n".join(lines) + "\n")
    run.end_stage()


def _stage_report(run: _Run, run_dir: Path) -> None:
    run.start_stage("report")
    scores: dict[tuple[str, str], tuple[str, str]] = {}
    for path in sorted(run_dir.glob("scores_*.csv")):
        lines = path.read_text(encoding="utf-8").strip().splitlines()
        try:
            header, row = lines[0].split(","), lines[1].split(",")
            record = dict(zip(header, row))
            scores[(record["method"], record["representation"])] = (
                record["silhouette"],
                record["davies_bouldin"],
            )
        except (IndexError, KeyError):
            raise TrendshapeError(f"corrupted scores file: {path}") from None
    if not scores:
        raise EmptyDataset(f"no scores_*.csv files found in {run_dir}")

    lines = ["method,metric," + ",".join(REPRESENTATIONS)]
    for method in METHODS:
        for metric_idx, metric in enumerate(("silhouette", "davies_bouldin")):
            cells = [
                scores[(method, rep)][metric_idx] if (method, rep) in scores else ""
                for rep in REPRESENTATIONS
            ]
            lines.append(f"{method},{metric}," + ",".join(cells))
    run.write("report.csv", "\n".join(lines) + "\n")
    run.end_stage()


def cmd_synth(args) -> int:
    cfg = resolve_config(args)
    run = _Run("synth", Path(args.out), cfg)
    with _stage_errors(run):
        run.start_stage("synth")
        dataset = archetype_dataset(cfg.seed, length=args.length)
        run.write("dataset.csv", to_canonical_csv(dataset))
        run.end_stage()
    run.finish()
    print(f"wrote {run.out_dir / 'dataset.csv'} ({len(dataset)} series)")
    return 0


def cmd_ingest(args) -> int:
    cfg = resolve_config(args)
    run = _Run("ingest", Path(args.out), cfg)
    with _stage_errors(run):
        dataset = _stage_ingest(run, args)
    run.finish()
    print(f"ingested {len(dataset)} series over {len(dataset.time_axis)} weeks")
    return 0


def cmd_eda(args) -> int:
    cfg = resolve_config(args)
    run = _Run("eda", Path(args.out), cfg)
    with _stage_errors(run):
        run.start_stage("load")
        dataset = _load_dataset(run, args.inputs)
        run.end_stage()
        _stage_eda(run, dataset)
    run.finish()
    print(f"wrote EDA reports to {run.out_dir}")
    return 0


def _cmd_words(args, kind: WordKind) -> int:
    cfg = resolve_config(args)
    name = "sax" if kind is WordKind.SAX else "esax"
    run = _Run(name, Path(args.out), cfg)
    with _stage_errors(run):
        run.start_stage("load")
        dataset = _load_dataset(run, args.inputs)
        run.end_stage()
        _stage_words(run, dataset, cfg, kind)
    run.finish()
    print(f"wrote words_{name}.csv to {run.out_dir}")
    return 0


def cmd_sax(args) -> int:
    return _cmd_words(args, WordKind.SAX)


def cmd_esax(args) -> int:
    return _cmd_words(args, WordKind.ESAX)


def cmd_tda(args) -> int:
    cfg = resolve_config(args)
    run = _Run("tda", Path(args.out), cfg)
    with _stage_errors(run):
        run.start_stage("load")
        dataset = _load_dataset(run, args.inputs)
        run.end_stage()
        _stage_tda(run, dataset, cfg)
    run.finish()
    print(f"wrote TDA dumps to {run.out_dir}")
    return 0


def cmd_cluster(args) -> int:
    cfg = resolve_config(args)
    representation = args.representation.lower()
    method = args.method.lower()
    run = _Run(f"cluster-{representation}-{method}", Path(args.out), cfg)
    with _stage_errors(run):
        run.start_stage("load")
        dataset = _load_dataset(run, args.inputs)
        run.end_stage()
        _cluster_outputs(run, dataset, cfg, representation, method, TdaStrategy(cfg.strategy))
    run.finish()
    print(f"wrote cluster run {representation}/{method} to {run.out_dir}")
    return 0


def cmd_report(args) -> int:
    cfg = resolve_config(args)
    run_dir = Path(args.run_dir)
    run = _Run("report", run_dir, cfg)
    with _stage_errors(run):
        _stage_report(run, run_dir)
    run.finish()
    print(f"wrote {run_dir / 'report.csv'}")
    return 0


def cmd_run_all(args) -> int:
    cfg = resolve_config(args)
    run = _Run("run-all", Path(args.out), cfg)
    with _stage_errors(run):
        dataset = _stage_ingest(run, args)
        _stage_eda(run, dataset)
        _stage_words(run, dataset, cfg, WordKind.SAX)
        _stage_words(run, dataset, cfg, WordKind.ESAX)
        diagrams = _stage_tda(run, dataset, cfg)
        # TDA pairs each method with the strategy that suits it: K-means on
        # loop-only landscapes, Ward on persistence-filtered H0+H1
        combos = [
            ("sax", "kmeans", TdaStrategy.H1_ONLY),
            ("sax", "ward", TdaStrategy.H1_ONLY),
            ("esax", "kmeans", TdaStrategy.H1_ONLY),
            ("esax", "ward", TdaStrategy.H1_ONLY),
            ("tda", "kmeans", TdaStrategy.H1_ONLY),
            ("tda", "ward", TdaStrategy.H0_H1_FILTERED),
        ]
        for representation, method, strategy in combos:
            _cluster_outputs(run, dataset, cfg, representation, method, strategy, diagrams)
        _stage_report(run, run.out_dir)
    run.finish()
    print(f"pipeline complete: {run.out_dir}")
    return 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alphabet", type=int, help="alphabet size (default 4)")
    p.add_argument("--window", type=int, help="sliding window in weeks (default 52)")
    p.add_argument("--segments", type=int, help="PAA segments per window (default 12)")
    p.add_argument("--embed-dim", dest="embed_dim", type=int,
                   help="delay embedding dimension (default 6)")
    p.add_argument("--tau", type=int, help="delay embedding lag (default 3)")
    p.add_argument("--k", type=int, help="cluster count (default 6)")
    p.add_argument("--seed", type=int, help="master RNG seed (default 0)")
    p.add_argument("--strategy", choices=[s.value for s in TdaStrategy],
                   help="TDA landscape strategy")
    p.add_argument("--persistence-floor", dest="persistence_floor", type=float,
                   help="relative persistence cutoff for H0_H1_FILTERED (default 0.10)")
    p.add_argument("--kmax", type=int, help="landscape levels (default 5)")
    p.add_argument("--grid", type=int, help="landscape grid size (default 100)")
    p.add_argument("--restarts", type=int, help="k-means restarts (default 10)")
    p.add_argument("--radius-rule", dest="radius_rule", choices=["enclosing", "diameter"],
                   help="Rips max-radius rule (default enclosing)")
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--out", default="runs/latest", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendshape",
        description="Cluster weekly search-interest series with SAX, eSAX, and persistent homology.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("synth", help="generate the synthetic archetype dataset")
    p.add_argument("--length", type=int, default=262, help="weeks per series (default 262)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse, merge, and validate trends exports")
    p.add_argument("inputs", nargs="+", help="export CSV files or directories")
    p.add_argument("--allow-warnings", action="store_true",
                   help="do not fail on validation warnings")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("eda", help="summary/correlation/KS/ADF reports")
    p.add_argument("inputs", nargs="+", help="dataset CSV (canonical or export)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eda)

    for name, help_text in (
        ("sax", "dump sliding-window SAX words"),
        ("esax", "dump sliding-window eSAX words"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("inputs", nargs="+")
        _add_config_flags(p)
        p.set_defaults(func=cmd_sax if name == "sax" else cmd_esax)

    p = sub.add_parser("tda", help="dump persistence diagrams and landscapes")
    p.add_argument("inputs", nargs="+")
    _add_config_flags(p)
    p.set_defaults(func=cmd_tda)

    p = sub.add_parser("cluster", help="cluster one representation with one method")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--representation", required=True, choices=REPRESENTATIONS)
    p.add_argument("--method", required=True, choices=METHODS)
    _add_config_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("report", help="consolidate cluster scores into one grid")
    p.add_argument("run_dir", help="directory holding scores_*.csv files")
    _add_config_flags(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run-all", help="full pipeline: ingest through report")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--allow-warnings", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _StageFailure as e:
        code = NUMERICAL_ERROR if isinstance(e.cause, _NUMERICAL_EXCEPTIONS) else USER_ERROR
        print(f"error: {e}", file=sys.stderr)
        return code
    except _NUMERICAL_EXCEPTIONS as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return NUMERICAL_ERROR
    except TrendshapeError as e:
        print(f"error: {e}", file=sys.stderr)
        return USER_ERROR
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
