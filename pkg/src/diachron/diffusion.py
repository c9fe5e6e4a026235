"""Term-level diffusion indicators and the three-way term classification.

Each vocabulary term gets a salience score (pooled tf times ln(N/df)) and a
dispersion score (Gini over its occurrence counts per cell, classification
categories by default). The decision table then labels it established,
unusual, cross-section, or unclassified. Quantile cuts are taken over the
empirical indicator distributions, so the labels are rank-based and
invariant under duplicating the whole corpus.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusSlice, Vocabulary
from .errors import ConfigError, InputError

CATEGORY_ESTABLISHED = "established"
CATEGORY_UNUSUAL = "unusual"
CATEGORY_CROSS_SECTION = "cross_section"
CATEGORY_UNCLASSIFIED = "unclassified"

CATEGORIES = (
    CATEGORY_ESTABLISHED,
    CATEGORY_UNUSUAL,
    CATEGORY_CROSS_SECTION,
    CATEGORY_UNCLASSIFIED,
)

UNCATEGORIZED_CELL = "(none)"


@dataclass(frozen=True)
class DiffusionThresholds:
    """Quantile cuts and novelty share driving the decision table."""

    df_high_quantile: float = 0.75
    gini_low_quantile: float = 0.25
    novelty_share: float = 0.8

    def __post_init__(self) -> None:
        for name in ("df_high_quantile", "gini_low_quantile"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie strictly between 0 and 1, got {value}")
        if not 0.0 < self.novelty_share <= 1.0:
            raise ConfigError(f"novelty_share must lie in (0, 1], got {self.novelty_share}")


@dataclass(frozen=True)
class TermStats:
    """Per-term indicator values plus the assigned diffusion category."""

    term: str
    tf_p1: int
    tf_p2: int
    df_p1: int
    df_p2: int
    idf_pooled: float
    tfidf: float
    gini: float
    category: str


def gini(shares) -> float:
    """Gini coefficient of a non-negative vector, in [0, 1 - 1/m].

    Computed via the sorted form 2*sum(i * x_(i)) / (m * sum(x)) - (m+1)/m,
    which agrees with the mean absolute pairwise difference over ordered
    pairs normalized by 2*m*sum(x). Permutation- and scale-invariant.
    """
    x = np.asarray(shares, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InputError("gini needs a non-empty 1-D vector")
    if np.any(x < 0):
        raise InputError("gini is undefined for negative shares")
    total = float(x.sum())
    if total <= 0.0:
        raise InputError("gini is undefined for an all-zero vector")
    m = x.size
    ranked = np.sort(x)
    weighted = float(np.arange(1, m + 1, dtype=float) @ ranked)
    return 2.0 * weighted / (m * total) - (m + 1) / m


def tfidf(term: str, vocabulary: Vocabulary, slices: tuple[CorpusSlice, CorpusSlice]) -> float:
    """Pooled tf times ln(N_pooled / df_pooled); zero iff the term is in every document."""
    if term not in vocabulary.index:
        raise InputError(f"term {term!r} is not in the vocabulary")
    n_pooled = slices[0].n_docs + slices[1].n_docs
    return vocabulary.tf_pooled(term) * math.log(n_pooled / vocabulary.df_pooled(term))


def doc_cells(
    slices: tuple[CorpusSlice, CorpusSlice],
    mode: str = "categories",
    assignments: dict[str, str] | None = None,
) -> tuple[tuple[str, ...], dict[str, tuple[int, ...]]]:
    """Build the dispersion cell partition: (cell labels, record id -> cell indices).

    'categories' uses each record's classification categories (records
    without any go to a single uncategorized cell). 'clusters' uses an
    explicit record id -> cluster cell label mapping, one cell per record.
    """
    if mode == "categories":
        labels = set()
        for slice_ in slices:
            for rec in slice_.records:
                labels.update(rec.categories if rec.categories else (UNCATEGORIZED_CELL,))
        ordered = tuple(sorted(labels))
        pos = {c: i for i, c in enumerate(ordered)}
        mapping = {}
        for slice_ in slices:
            for rec in slice_.records:
                cats = rec.categories if rec.categories else (UNCATEGORIZED_CELL,)
                mapping[rec.id] = tuple(pos[c] for c in cats)
        return ordered, mapping
    if mode == "clusters":
        if assignments is None:
            raise ConfigError("cell mode 'clusters' needs a record id -> cluster mapping")
        ordered = tuple(sorted(set(assignments.values())))
        pos = {c: i for i, c in enumerate(ordered)}
        mapping = {}
        for slice_ in slices:
            for rec in slice_.records:
                cell = assignments.get(rec.id)
                mapping[rec.id] = (pos[cell],) if cell is not None else ()
        return ordered, mapping
    raise ConfigError(f"unknown cell mode {mode!r} (expected 'categories' or 'clusters')")


def _term_cell_counts(
    vocabulary: Vocabulary,
    slices: tuple[CorpusSlice, CorpusSlice],
    cell_map: dict[str, tuple[int, ...]],
    n_cells: int,
) -> np.ndarray:
    counts = np.zeros((len(vocabulary), n_cells), dtype=float)
    index = vocabulary.index
    for slice_ in slices:
        for rec in slice_.records:
            cells = cell_map[rec.id]
            for term in rec.keywords:
                t = index.get(term)
                if t is None:
                    continue
                for c in cells:
                    counts[t, c] += 1.0
    return counts


def term_gini(
    term: str,
    slices: tuple[CorpusSlice, CorpusSlice],
    cells: str = "categories",
    assignments: dict[str, str] | None = None,
) -> float:
    """Gini of one term's occurrence counts across the cell partition."""
    labels, cell_map = doc_cells(slices, cells, assignments)
    vector = np.zeros(len(labels), dtype=float)
    for slice_ in slices:
        for rec in slice_.records:
            if term in rec.keywords:
                for c in cell_map[rec.id]:
                    vector[c] += 1.0
    if vector.sum() <= 0.0:
        raise InputError(f"term {term!r} has zero occurrences in the corpus")
    return gini(vector)


def classify_terms(
    vocabulary: Vocabulary,
    slices: tuple[CorpusSlice, CorpusSlice],
    thresholds: DiffusionThresholds | None = None,
    cells: str = "categories",
    assignments: dict[str, str] | None = None,
) -> list[TermStats]:
    """Assign exactly one diffusion category to every vocabulary term.

    Decision table, first matching row wins:
      1. unusual       df_p2/df_pooled >= novelty_share and df_pooled below the high-df cut
      2. cross_section gini below the low-gini cut and df_p1 >= 1
      3. established   df_pooled at or above the high-df cut and df_p1 >= 1
      4. unclassified  everything else
    """
    if thresholds is None:
        thresholds = DiffusionThresholds()
    if len(vocabulary) == 0:
        raise InputError("vocabulary is empty")
    labels, cell_map = doc_cells(slices, cells, assignments)
    counts = _term_cell_counts(vocabulary, slices, cell_map, len(labels))

    n_pooled = slices[0].n_docs + slices[1].n_docs
    df1 = np.asarray(vocabulary.df_p1, dtype=float)
    df2 = np.asarray(vocabulary.df_p2, dtype=float)
    df_pooled = df1 + df2
    ginis = np.array([gini(counts[t]) if counts[t].sum() > 0 else 0.0 for t in range(len(vocabulary))])

    df_cut = float(np.quantile(df_pooled, thresholds.df_high_quantile))
    gini_cut = float(np.quantile(ginis, thresholds.gini_low_quantile))

    stats: list[TermStats] = []
    for t, term in enumerate(vocabulary.terms):
        dfp = df_pooled[t]
        novelty = df2[t] / dfp
        if novelty >= thresholds.novelty_share and dfp < df_cut:
            category = CATEGORY_UNUSUAL
        elif ginis[t] < gini_cut and df1[t] >= 1:
            category = CATEGORY_CROSS_SECTION
        elif dfp >= df_cut and df1[t] >= 1:
            category = CATEGORY_ESTABLISHED
        else:
            category = CATEGORY_UNCLASSIFIED
        stats.append(
            TermStats(
                term=term,
                tf_p1=vocabulary.tf_p1[t],
                tf_p2=vocabulary.tf_p2[t],
                df_p1=int(df1[t]),
                df_p2=int(df2[t]),
                idf_pooled=math.log(n_pooled / dfp),
                tfidf=(vocabulary.tf_p1[t] + vocabulary.tf_p2[t]) * math.log(n_pooled / dfp),
                gini=float(ginis[t]),
                category=category,
            )
        )
    return stats


def write_terms_csv(stats: list[TermStats], path: str) -> None:
    """Write terms.csv in vocabulary order with reals at 6 decimal places."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "tf_p1", "tf_p2", "df_p1", "df_p2", "tfidf", "gini", "category"])
        for s in stats:
            writer.writerow(
                [s.term, s.tf_p1, s.tf_p2, s.df_p1, s.df_p2, f"{s.tfidf:.6f}", f"{s.gini:.6f}", s.category]
            )


def read_terms_csv(path: str) -> list[TermStats]:
    """Reload terms.csv (rounded reals; categories are exact)."""
    stats = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            stats.append(
                TermStats(
                    term=row["term"],
                    tf_p1=int(row["tf_p1"]),
                    tf_p2=int(row["tf_p2"]),
                    df_p1=int(row["df_p1"]),
                    df_p2=int(row["df_p2"]),
                    idf_pooled=float("nan"),
                    tfidf=float(row["tfidf"]),
                    gini=float(row["gini"]),
                    category=row["category"],
                )
            )
    return stats
