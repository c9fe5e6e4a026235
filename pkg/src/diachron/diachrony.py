"""Cross-period cluster linkage and the category-by-status cross table.

The two periods hold disjoint documents, so cluster axes in the shared
term space are the only common coordinate system: a second-period cluster
is linked to every first-period cluster whose axis cosine reaches rho.
Clusters with at least one such parent are rooted, the rest are new.

The cross table then pools each second-period cluster's top terms by
cluster status and reports, per status, the share of pooled terms falling
in each term category. Terms are pooled as a multiset: a term appearing
in the top lists of two clusters of the same status counts twice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import ClusterModel, ClusterSummary
from .corpus import Vocabulary
from .diffusion import (
    CATEGORY_CROSS_SECTION,
    CATEGORY_ESTABLISHED,
    CATEGORY_UNCLASSIFIED,
    CATEGORY_UNUSUAL,
    TermStats,
)
from .errors import ConfigError, InputError

STATUS_ROOTED = "rooted"
STATUS_NEW = "new"

CROSSTAB_CATEGORIES = (
    CATEGORY_ESTABLISHED,
    CATEGORY_UNUSUAL,
    CATEGORY_CROSS_SECTION,
    CATEGORY_UNCLASSIFIED,
)


@dataclass(frozen=True)
class ClusterLink:
    cluster_id: int
    status: str
    parents: tuple[tuple[int, float], ...]

    @property
    def best_parent(self) -> tuple[int, float] | None:
        return self.parents[0] if self.parents else None


@dataclass(frozen=True)
class Linkage:
    rho: float
    links: tuple[ClusterLink, ...]

    def statuses(self) -> dict[int, str]:
        return {link.cluster_id: link.status for link in self.links}


@dataclass(frozen=True)
class CrossTab:
    # status -> category -> share; a status with no clusters maps to None
    shares: dict[str, dict[str, float] | None]
    n_terms: dict[str, int]


def link_periods(
    model_p1: ClusterModel,
    model_p2: ClusterModel,
    vocabulary: Vocabulary,
    rho: float,
) -> Linkage:
    """Link each P2 cluster to its P1 parents by axis cosine >= rho."""
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"linkage threshold must be in (0, 1], got {rho}")
    a1 = model_p1.axes_dense()
    a2 = model_p2.axes_dense()
    v = len(vocabulary)
    if a1.shape[1] != v or a2.shape[1] != v:
        raise InputError(
            "cluster models span different vocabularies "
            f"({a1.shape[1]} and {a2.shape[1]} columns vs {v} terms)"
        )
    n1 = np.linalg.norm(a1, axis=1)
    n2 = np.linalg.norm(a2, axis=1)
    links = []
    for c2 in range(a2.shape[0]):
        parents = []
        for c1 in range(a1.shape[0]):
            denom = n2[c2] * n1[c1]
            sim = min(1.0, float(a2[c2] @ a1[c1] / denom)) if denom > 0.0 else 0.0
            if sim >= rho:
                parents.append((c1, sim))
        parents.sort(key=lambda p: (-p[1], p[0]))
        status = STATUS_ROOTED if parents else STATUS_NEW
        links.append(ClusterLink(cluster_id=c2, status=status, parents=tuple(parents)))
    return Linkage(rho=rho, links=tuple(links))


def cross_table(
    linkage: Linkage,
    summaries_p2: list[ClusterSummary],
    term_stats: list[TermStats],
    top_m: int = 10,
) -> CrossTab:
    """Share of each term category among pooled top terms, per cluster status."""
    category = {s.term: s.category for s in term_stats}
    status_of = linkage.statuses()
    counts: dict[str, dict[str, int]] = {
        STATUS_ROOTED: {c: 0 for c in CROSSTAB_CATEGORIES},
        STATUS_NEW: {c: 0 for c in CROSSTAB_CATEGORIES},
    }
    totals = {STATUS_ROOTED: 0, STATUS_NEW: 0}
    for summary in summaries_p2:
        if summary.cluster_id not in status_of:
            raise InputError(f"cluster {summary.cluster_id} missing from linkage")
        status = status_of[summary.cluster_id]
        for term, _weight in summary.top_terms[:top_m]:
            if term not in category:
                raise InputError(f"term {term!r} missing from term statistics")
            counts[status][category[term]] += 1
            totals[status] += 1
    shares: dict[str, dict[str, float] | None] = {}
    for status in (STATUS_ROOTED, STATUS_NEW):
        if totals[status] == 0:
            shares[status] = None
        else:
            shares[status] = {
                c: counts[status][c] / totals[status] for c in CROSSTAB_CATEGORIES
            }
    return CrossTab(shares=shares, n_terms=totals)
