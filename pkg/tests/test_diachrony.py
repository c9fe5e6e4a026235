import math

import numpy as np
import pytest

from diachron.cluster import ClusterModel, ClusterSummary
from diachron.corpus import Vocabulary
from diachron.diachrony import (
    CROSSTAB_CATEGORIES,
    STATUS_NEW,
    STATUS_ROOTED,
    ClusterLink,
    Linkage,
    cross_table,
    link_periods,
)
from diachron.diffusion import TermStats
from diachron.errors import ConfigError, InputError


def _vocab(n_terms):
    terms = tuple(f"t{i:02d}" for i in range(n_terms))
    ones = tuple(1 for _ in terms)
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        df_p1=ones,
        df_p2=ones,
        tf_p1=ones,
        tf_p2=ones,
        n_docs_p1=n_terms,
        n_docs_p2=n_terms,
    )


def _model(axes, period="P1"):
    axes = np.asarray(axes, dtype=float)
    k, _ = axes.shape
    return ClusterModel(
        period_id=period,
        axes=axes,
        assignment=np.zeros(k, dtype=np.int64),
        objective_trace=(1.0,),
        sizes=tuple(1 for _ in range(k)),
        doc_ids=tuple(f"{period}-d{i}" for i in range(k)),
    )


def _stats(term, category):
    return TermStats(
        term=term,
        tf_p1=1,
        tf_p2=1,
        df_p1=1,
        df_p2=1,
        idf_pooled=0.5,
        tfidf=1.0,
        gini=0.1,
        category=category,
    )


def _summary(cluster_id, terms, size=1):
    return ClusterSummary(
        cluster_id=cluster_id,
        label=terms[0] if terms else "",
        top_terms=tuple((t, 1.0 - 0.01 * i) for i, t in enumerate(terms)),
        size=size,
    )


class TestLinkPeriods:
    def test_identity_linkage_roots_every_cluster_onto_its_twin(self):
        axes = np.eye(3)
        linkage = link_periods(_model(axes, "P1"), _model(axes, "P2"), _vocab(3), rho=0.3)
        assert [link.status for link in linkage.links] == [STATUS_ROOTED] * 3
        for c, link in enumerate(linkage.links):
            assert link.best_parent == (c, 1.0)

    def test_disjoint_support_is_new(self):
        p1 = _model(np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]), "P1")
        p2 = _model(np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]), "P2")
        linkage = link_periods(p1, p2, _vocab(4), rho=0.3)
        assert [link.status for link in linkage.links] == [STATUS_NEW, STATUS_NEW]
        assert all(link.best_parent is None for link in linkage.links)
        assert all(link.parents == () for link in linkage.links)

    def test_parents_sorted_by_similarity_then_id(self):
        s = 1.0 / math.sqrt(2.0)
        p1 = _model(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [s, s, 0.0]]), "P1")
        p2 = _model(np.array([[s, s, 0.0]]), "P2")
        linkage = link_periods(p1, p2, _vocab(3), rho=0.5)
        (link,) = linkage.links
        assert link.status == STATUS_ROOTED
        # parent 2 is identical (sim 1.0); parents 0 and 1 tie at 0.7071
        # and must appear in id order
        assert [pid for pid, _ in link.parents] == [2, 0, 1]
        assert link.parents[0][1] == pytest.approx(1.0, abs=1e-12)
        assert link.parents[1][1] == pytest.approx(s, abs=1e-12)
        assert link.parents[2][1] == pytest.approx(s, abs=1e-12)
        assert link.best_parent == link.parents[0]

    def test_rho_one_requires_identical_axes(self):
        s = 1.0 / math.sqrt(2.0)
        p1 = _model(np.array([[1.0, 0.0], [0.0, 1.0]]), "P1")
        p2 = _model(np.array([[1.0, 0.0], [s, s]]), "P2")
        linkage = link_periods(p1, p2, _vocab(2), rho=1.0)
        assert linkage.links[0].status == STATUS_ROOTED
        assert linkage.links[0].parents == ((0, 1.0),)
        assert linkage.links[1].status == STATUS_NEW

    def test_tiny_rho_roots_any_overlap(self):
        p1 = _model(np.array([[1.0, 0.0, 0.0]]), "P1")
        overlap = np.array([[0.999, 0.0447, 0.0]])
        overlap /= np.linalg.norm(overlap)
        p2 = _model(np.vstack([overlap, [[0.0, 0.0, 1.0]]]), "P2")
        linkage = link_periods(p1, p2, _vocab(3), rho=1e-9)
        assert linkage.links[0].status == STATUS_ROOTED
        assert linkage.links[1].status == STATUS_NEW  # exactly zero overlap

    def test_similarities_capped_at_one(self):
        axes = np.array([[0.6, 0.8], [0.6, 0.8]])
        linkage = link_periods(_model(axes, "P1"), _model(axes, "P2"), _vocab(2), rho=0.2)
        for link in linkage.links:
            for _, sim in link.parents:
                assert sim <= 1.0

    def test_relabeling_p1_clusters_permutes_parent_ids(self):
        rng = np.random.default_rng(21)
        a1 = rng.random((4, 5))
        a2 = rng.random((3, 5))
        base = link_periods(_model(a1, "P1"), _model(a2, "P2"), _vocab(5), rho=0.3)
        perm = [2, 0, 3, 1]  # new position of old cluster i is perm.index(i)
        permuted = link_periods(_model(a1[perm], "P1"), _model(a2, "P2"), _vocab(5), rho=0.3)
        for before, after in zip(base.links, permuted.links):
            assert before.status == after.status
            mapped = sorted(
                ((perm.index(pid), sim) for pid, sim in before.parents),
                key=lambda p: (-p[1], p[0]),
            )
            assert [pid for pid, _ in after.parents] == [pid for pid, _ in mapped]
            for (_, sim_a), (_, sim_b) in zip(after.parents, mapped):
                assert sim_a == pytest.approx(sim_b, abs=1e-12)

    def test_rho_validation(self):
        model = _model(np.eye(2))
        with pytest.raises(ConfigError):
            link_periods(model, model, _vocab(2), rho=0.0)
        with pytest.raises(ConfigError):
            link_periods(model, model, _vocab(2), rho=1.5)

    def test_vocabulary_width_mismatch_rejected(self):
        p1 = _model(np.eye(2), "P1")
        p2 = _model(np.eye(3), "P2")
        with pytest.raises(InputError):
            link_periods(p1, p2, _vocab(2), rho=0.3)
        with pytest.raises(InputError):
            link_periods(p1, _model(np.eye(2), "P2"), _vocab(3), rho=0.3)


def _linkage(statuses, rho=0.3):
    links = tuple(
        ClusterLink(
            cluster_id=c,
            status=status,
            parents=((0, 0.9),) if status == STATUS_ROOTED else (),
        )
        for c, status in enumerate(statuses)
    )
    return Linkage(rho=rho, links=links)


class TestCrossTable:
    def test_all_rooted_all_established(self):
        linkage = _linkage([STATUS_ROOTED, STATUS_ROOTED])
        summaries = [_summary(0, ["a", "b"]), _summary(1, ["c"])]
        stats = [_stats(t, "established") for t in "abc"]
        tab = cross_table(linkage, summaries, stats)
        assert tab.shares[STATUS_ROOTED] == {
            "established": 1.0,
            "unusual": 0.0,
            "cross_section": 0.0,
            "unclassified": 0.0,
        }
        assert tab.shares[STATUS_NEW] is None
        assert tab.n_terms == {STATUS_ROOTED: 3, STATUS_NEW: 0}

    def test_shares_split_by_status(self):
        linkage = _linkage([STATUS_ROOTED, STATUS_NEW])
        summaries = [_summary(0, ["a", "b"]), _summary(1, ["c", "d"])]
        stats = [
            _stats("a", "established"),
            _stats("b", "cross_section"),
            _stats("c", "unusual"),
            _stats("d", "unusual"),
        ]
        tab = cross_table(linkage, summaries, stats)
        assert tab.shares[STATUS_ROOTED]["established"] == 0.5
        assert tab.shares[STATUS_ROOTED]["cross_section"] == 0.5
        assert tab.shares[STATUS_ROOTED]["unusual"] == 0.0
        assert tab.shares[STATUS_NEW]["unusual"] == 1.0
        assert tab.n_terms == {STATUS_ROOTED: 2, STATUS_NEW: 2}

    def test_pooling_is_a_multiset(self):
        linkage = _linkage([STATUS_ROOTED, STATUS_ROOTED])
        summaries = [_summary(0, ["a", "b"]), _summary(1, ["a", "c"])]
        stats = [
            _stats("a", "established"),
            _stats("b", "unusual"),
            _stats("c", "unusual"),
        ]
        tab = cross_table(linkage, summaries, stats)
        assert tab.n_terms[STATUS_ROOTED] == 4
        assert tab.shares[STATUS_ROOTED]["established"] == 0.5

    def test_rows_sum_to_one_when_non_empty(self):
        linkage = _linkage([STATUS_ROOTED, STATUS_NEW])
        summaries = [_summary(0, ["a", "b", "c"]), _summary(1, ["d", "e"])]
        categories = ["established", "unusual", "cross_section", "unclassified", "unusual"]
        stats = [_stats(t, c) for t, c in zip("abcde", categories)]
        tab = cross_table(linkage, summaries, stats)
        for status in (STATUS_ROOTED, STATUS_NEW):
            row = tab.shares[status]
            assert row is not None
            assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)
            assert set(row) == set(CROSSTAB_CATEGORIES)
            assert all(0.0 <= v <= 1.0 for v in row.values())

    def test_top_m_truncates_the_pool(self):
        linkage = _linkage([STATUS_ROOTED])
        summaries = [_summary(0, ["a", "b", "c"])]
        stats = [
            _stats("a", "established"),
            _stats("b", "unusual"),
            _stats("c", "unusual"),
        ]
        tab = cross_table(linkage, summaries, stats, top_m=2)
        assert tab.n_terms[STATUS_ROOTED] == 2
        assert tab.shares[STATUS_ROOTED]["established"] == 0.5
        assert tab.shares[STATUS_ROOTED]["unusual"] == 0.5

    def test_cluster_missing_from_linkage_rejected(self):
        linkage = _linkage([STATUS_ROOTED])
        summaries = [_summary(0, ["a"]), _summary(7, ["a"])]
        stats = [_stats("a", "established")]
        with pytest.raises(InputError):
            cross_table(linkage, summaries, stats)

    def test_term_missing_from_stats_rejected(self):
        linkage = _linkage([STATUS_ROOTED])
        summaries = [_summary(0, ["ghost"])]
        with pytest.raises(InputError):
            cross_table(linkage, summaries, [_stats("a", "established")])
