"""Stage orchestration: one config drives the whole artifact directory.

Every stage reads its inputs from prior-stage artifacts in the output
directory and rebuilds cheap intermediates (period slices, vocabulary,
matrices) from corpus.jsonl, so stages can run one at a time or chained
by `run` with byte-identical results. All randomness flows from the
single config seed through stage-labeled derived seeds.

The terms stage runs before clustering when dispersion cells come from
record categories, and after it when cells are the period clusters
themselves; the canonical stage list in the manifest reflects that.
"""

from __future__ import annotations

import dataclasses
import logging
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import artifacts
from .cluster import ClusterConfig, fit_axial_kmeans, summarize_clusters
from .corpus import (
    CorpusSlice,
    PeriodSpec,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    save_corpus,
    split_periods,
)
from .diachrony import cross_table, link_periods
from .diffusion import DiffusionThresholds, classify_terms, read_terms_csv, write_terms_csv
from .errors import ConfigError
from .mapping import build_cluster_map, render_svg
from .seeding import derive_seed
from .vectorize import WEIGHTINGS, build_matrix

log = logging.getLogger("diachron")

PERIOD_IDS = ("P1", "P2")
GINI_CELL_MODES = ("categories", "clusters")
FORMATS = ("jsonl", "csv")


@dataclass(frozen=True)
class RunConfig:
    input: str
    periods: PeriodSpec
    format: str = "jsonl"
    min_df: int = 2
    weighting: str = "tfidf"
    thresholds: DiffusionThresholds = field(default_factory=DiffusionThresholds)
    k: int = 20
    k_p1: int | None = None
    k_p2: int | None = None
    max_iters: int = 100
    tol: float = 1e-9
    restarts: int = 10
    seed: int = 0
    tau: float = 0.2
    rho: float = 0.3
    top_m: int = 10
    gini_cells: str = "categories"
    dump_matrices: bool = False

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(
                f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}"
            )
        if self.gini_cells not in GINI_CELL_MODES:
            raise ConfigError(
                f"gini_cells must be one of {GINI_CELL_MODES}, got {self.gini_cells!r}"
            )
        for name, value in (("k", self.k), ("k_p1", self.k_p1), ("k_p2", self.k_p2)):
            if value is not None and value < 2:
                raise ConfigError(f"{name} must be >= 2 to map clusters, got {value}")
        if self.min_df < 1:
            raise ConfigError(f"min_df must be >= 1, got {self.min_df}")
        if self.top_m < 1:
            raise ConfigError(f"top_m must be >= 1, got {self.top_m}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"rho must be in (0, 1], got {self.rho}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def cluster_config(self, period_id: str) -> ClusterConfig:
        k = {"P1": self.k_p1, "P2": self.k_p2}[period_id] or self.k
        return ClusterConfig(
            k=k,
            max_iters=self.max_iters,
            tol=self.tol,
            restarts=self.restarts,
            seed=derive_seed(self.seed, f"cluster.{period_id}"),
        )

    def stage_order(self) -> list[str]:
        if self.gini_cells == "clusters":
            return ["ingest", "cluster", "terms", "map", "link", "report"]
        return ["ingest", "terms", "cluster", "map", "link", "report"]

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "format": self.format,
            "periods": {
                "p1": [self.periods.p1_start, self.periods.p1_end],
                "p2": [self.periods.p2_start, self.periods.p2_end],
            },
            "min_df": self.min_df,
            "weighting": self.weighting,
            "thresholds": {
                "df_high_quantile": self.thresholds.df_high_quantile,
                "gini_low_quantile": self.thresholds.gini_low_quantile,
                "novelty_share": self.thresholds.novelty_share,
            },
            "cluster": {
                "k": self.k,
                "k_p1": self.k_p1,
                "k_p2": self.k_p2,
                "max_iters": self.max_iters,
                "tol": self.tol,
                "restarts": self.restarts,
            },
            "tau": self.tau,
            "rho": self.rho,
            "top_m": self.top_m,
            "gini_cells": self.gini_cells,
            "seed": self.seed,
            "dump_matrices": self.dump_matrices,
        }


def _strip_comments(obj):
    if isinstance(obj, dict):
        return {
            k: _strip_comments(v)
            for k, v in obj.items()
            if not k.startswith("_comment")
        }
    if isinstance(obj, list):
        return [_strip_comments(v) for v in obj]
    return obj


def config_from_dict(data: dict, base_dir: str = ".") -> RunConfig:
    data = _strip_comments(data)
    try:
        periods = data["periods"]
        spec = PeriodSpec(
            p1_start=int(periods["p1"][0]),
            p1_end=int(periods["p1"][1]),
            p2_start=int(periods["p2"][0]),
            p2_end=int(periods["p2"][1]),
        )
        input_path = data["input"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError(f"config is missing a required field: {exc}") from exc
    if not os.path.isabs(input_path):
        input_path = os.path.normpath(os.path.join(base_dir, input_path))
    thresholds = DiffusionThresholds(
        df_high_quantile=float(
            data.get("thresholds", {}).get("df_high_quantile", 0.75)
        ),
        gini_low_quantile=float(
            data.get("thresholds", {}).get("gini_low_quantile", 0.25)
        ),
        novelty_share=float(data.get("thresholds", {}).get("novelty_share", 0.8)),
    )
    cluster = data.get("cluster", {})
    try:
        return RunConfig(
            input=input_path,
            periods=spec,
            format=data.get("format", "jsonl"),
            min_df=int(data.get("min_df", 2)),
            weighting=data.get("weighting", "tfidf"),
            thresholds=thresholds,
            k=int(cluster.get("k", 20)),
            k_p1=int(cluster["k_p1"]) if cluster.get("k_p1") is not None else None,
            k_p2=int(cluster["k_p2"]) if cluster.get("k_p2") is not None else None,
            max_iters=int(cluster.get("max_iters", 100)),
            tol=float(cluster.get("tol", 1e-9)),
            restarts=int(cluster.get("restarts", 10)),
            seed=int(data.get("seed", 0)),
            tau=float(data.get("tau", 0.2)),
            rho=float(data.get("rho", 0.3)),
            top_m=int(data.get("top_m", 10)),
            gini_cells=data.get("gini_cells", "categories"),
            dump_matrices=bool(data.get("dump_matrices", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc


def load_config(path: str) -> RunConfig:
    import json

    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def with_overrides(
    config: RunConfig, seed: int | None = None, format: str | None = None
) -> RunConfig:
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    if format is not None:
        config = dataclasses.replace(config, format=format)
    return config


def _corpus_state(
    config: RunConfig, out: str
) -> tuple[CorpusSlice, CorpusSlice, Vocabulary]:
    path = artifacts.require(os.path.join(out, artifacts.CORPUS), "ingest")
    records, _ = load_corpus(path, "jsonl")
    p1, p2, _ = split_periods(records, config.periods)
    vocabulary = build_vocabulary(p1, p2, config.min_df)
    return p1, p2, vocabulary


def stage_ingest(config: RunConfig, out: str, threads: int = 1) -> None:
    records, load_report = load_corpus(config.input, config.format)
    _, _, split_report = split_periods(records, config.periods)
    save_corpus(records, os.path.join(out, artifacts.CORPUS), "jsonl")
    artifacts.write_json(
        {
            "input_sha256": artifacts.sha256_file(config.input),
            "records_read": load_report.records_read,
            "records_kept": load_report.records_kept,
            "dropped_empty_keywords": load_report.dropped_empty_keywords,
            "p1_docs": split_report.p1_docs,
            "p2_docs": split_report.p2_docs,
            "dropped_outside_periods": split_report.dropped_outside_periods,
        },
        os.path.join(out, artifacts.LOAD_REPORT),
    )


def stage_terms(config: RunConfig, out: str, threads: int = 1) -> None:
    p1, p2, vocabulary = _corpus_state(config, out)
    assignments = None
    if config.gini_cells == "clusters":
        assignments = {}
        for period_id in PERIOD_IDS:
            path = artifacts.require(
                os.path.join(out, artifacts.clusters_file(period_id)), "cluster"
            )
            model, _ = artifacts.read_clusters(path, vocabulary)
            for row, doc_id in enumerate(model.doc_ids):
                assignments[doc_id] = f"{period_id}:{int(model.assignment[row])}"
    stats = classify_terms(
        vocabulary,
        (p1, p2),
        config.thresholds,
        cells=config.gini_cells,
        assignments=assignments,
    )
    write_terms_csv(stats, os.path.join(out, artifacts.TERMS))


def stage_cluster(config: RunConfig, out: str, threads: int = 1) -> None:
    p1, p2, vocabulary = _corpus_state(config, out)
    for slice_ in (p1, p2):
        matrix = build_matrix(slice_, vocabulary, config.weighting)
        cluster_config = config.cluster_config(slice_.period_id)
        model = fit_axial_kmeans(matrix, cluster_config, threads=threads)
        summaries = summarize_clusters(model, vocabulary, config.top_m)
        echo = {
            "k": cluster_config.k,
            "max_iters": cluster_config.max_iters,
            "tol": cluster_config.tol,
            "restarts": cluster_config.restarts,
            "seed": cluster_config.seed,
            "weighting": config.weighting,
        }
        artifacts.write_clusters(
            os.path.join(out, artifacts.clusters_file(slice_.period_id)),
            model,
            summaries,
            vocabulary,
            echo,
        )
        if config.dump_matrices:
            artifacts.write_matrix(
                os.path.join(out, artifacts.matrix_file(slice_.period_id)),
                matrix,
                vocabulary,
                config.weighting,
            )


def stage_map(config: RunConfig, out: str, threads: int = 1) -> None:
    _, _, vocabulary = _corpus_state(config, out)
    for period_id in PERIOD_IDS:
        path = artifacts.require(
            os.path.join(out, artifacts.clusters_file(period_id)), "cluster"
        )
        model, summaries = artifacts.read_clusters(path, vocabulary)
        cmap = build_cluster_map(period_id, model.axes_dense(), config.tau)
        artifacts.write_map(
            os.path.join(out, artifacts.map_json_file(period_id)),
            cmap,
            summaries,
            config.tau,
        )
        with open(
            os.path.join(out, artifacts.map_svg_file(period_id)),
            "w",
            encoding="utf-8",
        ) as fh:
            fh.write(render_svg(cmap, summaries))


def stage_link(config: RunConfig, out: str, threads: int = 1) -> None:
    _, _, vocabulary = _corpus_state(config, out)
    model_p1, _ = artifacts.read_clusters(
        artifacts.require(os.path.join(out, artifacts.clusters_file("P1")), "cluster"),
        vocabulary,
    )
    model_p2, summaries_p2 = artifacts.read_clusters(
        artifacts.require(os.path.join(out, artifacts.clusters_file("P2")), "cluster"),
        vocabulary,
    )
    stats = read_terms_csv(
        artifacts.require(os.path.join(out, artifacts.TERMS), "terms")
    )
    linkage = link_periods(model_p1, model_p2, vocabulary, config.rho)
    crosstab = cross_table(linkage, summaries_p2, stats, config.top_m)
    artifacts.write_linkage(
        os.path.join(out, artifacts.LINKAGE),
        linkage,
        [s.label for s in summaries_p2],
    )
    artifacts.write_crosstab(os.path.join(out, artifacts.CROSSTAB), crosstab)


def stage_report(config: RunConfig, out: str, threads: int = 1) -> None:
    for period_id in PERIOD_IDS:
        path = artifacts.require(
            os.path.join(out, artifacts.map_json_file(period_id)), "map"
        )
        cmap, summaries = artifacts.read_map(path)
        with open(
            os.path.join(out, artifacts.map_svg_file(period_id)),
            "w",
            encoding="utf-8",
        ) as fh:
            fh.write(render_svg(cmap, summaries))
    load_report = artifacts.read_json(
        artifacts.require(os.path.join(out, artifacts.LOAD_REPORT), "ingest")
    )
    artifacts.write_json(
        {
            "config": config.to_dict(),
            "input_sha256": load_report["input_sha256"],
            "versions": {
                "diachron": _package_version(),
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "stages": config.stage_order(),
        },
        os.path.join(out, artifacts.MANIFEST),
    )


def _package_version() -> str:
    from . import __version__

    return __version__


STAGES = {
    "ingest": stage_ingest,
    "terms": stage_terms,
    "cluster": stage_cluster,
    "map": stage_map,
    "link": stage_link,
    "report": stage_report,
}


def run_stage(name: str, config: RunConfig, out: str, threads: int = 1) -> None:
    """Run one stage; on failure, remove files this invocation created."""
    os.makedirs(out, exist_ok=True)
    before = set(os.listdir(out))
    start = time.perf_counter()
    try:
        STAGES[name](config, out, threads)
    except BaseException:
        for entry in set(os.listdir(out)) - before:
            try:
                os.remove(os.path.join(out, entry))
            except OSError:
                pass
        raise
    log.info("stage %s finished in %.2fs", name, time.perf_counter() - start)


def run_pipeline(config: RunConfig, out: str, threads: int = 1) -> None:
    """All stages in canonical order; partial outputs removed on failure."""
    os.makedirs(out, exist_ok=True)
    before = set(os.listdir(out))
    start = time.perf_counter()
    try:
        for name in config.stage_order():
            stage_start = time.perf_counter()
            STAGES[name](config, out, threads)
            log.info("stage %s finished in %.2fs", name, time.perf_counter() - stage_start)
    except BaseException:
        for entry in set(os.listdir(out)) - before:
            try:
                os.remove(os.path.join(out, entry))
            except OSError:
                pass
        raise
    log.info("pipeline finished in %.2fs", time.perf_counter() - start)
