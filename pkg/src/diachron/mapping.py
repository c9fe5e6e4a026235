"""2D cluster maps: PCA of cluster axes, similarity edges, cluster networks.

The k cluster axes are treated as k points in term space. Because k is
far smaller than the vocabulary, the eigenproblem is solved on the k x k
Gram matrix of the mean-centered rows (population scaling, divide by k):
a unit eigenvector u of the Gram with eigenvalue lam gives projections
sqrt(k * lam) * u onto the corresponding principal direction. The all-ones
vector is a 0-eigenvector of the centered Gram, so nonzero-eigenvalue
coordinates are automatically mean-centered.

Eigenpairs come from power iteration with Hotelling deflation; eigenpairs
are ordered by eigenvalue magnitude, which for the (positive semidefinite)
Gram matrix coincides with algebraic order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .cluster import ClusterSummary
from .errors import ConfigError, InputError, NumericError

PCA_TOL = 1e-12
PCA_MAX_ITERS = 10_000

SVG_WIDTH = 1000
SVG_HEIGHT = 800
SVG_MARGIN = 50.0
MAX_RADIUS = 40.0


@dataclass(frozen=True)
class ClusterMap:
    period_id: str
    coords: tuple[tuple[float, float], ...]
    eigenvalues: tuple[float, float]
    explained_variance: float
    edges: tuple[tuple[int, int, float], ...]
    components: tuple[tuple[int, ...], ...]


def _orthogonalize(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for b in basis:
        v = v - (v @ b) * b
    return v


def _null_direction(k: int, basis: list[np.ndarray]) -> np.ndarray:
    # pick the standard basis vector least aligned with the found
    # eigenvectors, then orthogonalize, so returned directions stay
    # orthonormal even when the deflated matrix has vanished
    best, best_score = 0, np.inf
    for i in range(k):
        score = sum(abs(float(b[i])) for b in basis)
        if score < best_score:
            best, best_score = i, score
    e = np.zeros(k)
    e[best] = 1.0
    v = _orthogonalize(e, basis)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return e
    return v / n


def _ritz_polish(
    S: np.ndarray, v: np.ndarray, basis: list[np.ndarray]
) -> np.ndarray:
    """One Rayleigh-Ritz step on span{v, Sv}.

    Plain power iteration stalls when the two largest-magnitude eigenvalues
    nearly tie with opposite signs (the iterate oscillates between them).
    The 2-space Ritz projection resolves that pair exactly, so the step
    turns a stalled iterate into the correct eigenvector.
    """
    sv = _orthogonalize(S @ v, basis)
    r = sv - (v @ sv) * v
    rn = float(np.linalg.norm(r))
    if rn <= 1e-14 * max(1.0, float(np.linalg.norm(sv))):
        return v
    q2 = r / rn
    a = float(v @ S @ v)
    b = float(v @ S @ q2)
    c = float(q2 @ S @ q2)
    mean = (a + c) / 2.0
    disc = (((a - c) / 2.0) ** 2 + b * b) ** 0.5
    lam = mean + disc if abs(mean + disc) >= abs(mean - disc) else mean - disc
    w = np.array([b, lam - a])
    alt = np.array([lam - c, b])
    if float(np.linalg.norm(alt)) > float(np.linalg.norm(w)):
        w = alt
    wn = float(np.linalg.norm(w))
    if wn == 0.0:
        return v
    out = _orthogonalize(v * w[0] + q2 * w[1], basis)
    n = float(np.linalg.norm(out))
    return out / n if n > 0.0 else v


def top_eigenpairs(
    S: np.ndarray, m: int, tol: float = PCA_TOL, max_iters: int = PCA_MAX_ITERS
) -> tuple[np.ndarray, np.ndarray]:
    """Top-m eigenpairs of a symmetric matrix, largest magnitude first.

    Power iteration with deflation: each iterate is projected off the
    found eigenvectors (so returned vectors are orthonormal to machine
    precision) and the matrix is Hotelling-deflated between eigenpairs.
    The per-step stop criterion is eigenvector alignment,
    1 - |<v_new, v>| < tol, which tolerates the sign alternation of a
    dominant negative eigenvalue; a final 2-space Ritz polish resolves
    near-tied opposite-sign pairs the plain iteration cannot separate.
    Returns (eigenvalues, eigenvectors) with eigenvectors as columns.
    """
    S = np.array(S, dtype=float)
    k = S.shape[0]
    if S.ndim != 2 or S.shape[1] != k:
        raise NumericError("eigendecomposition needs a square matrix")
    if m > k:
        raise NumericError(f"cannot extract {m} eigenpairs from a {k}x{k} matrix")
    rng = random.Random(0xD1AC)
    scale = float(np.max(np.abs(S))) if k else 0.0
    vals: list[float] = []
    vecs: list[np.ndarray] = []
    for _ in range(m):
        resid = float(np.max(np.abs(S)))
        if resid == 0.0 or (scale > 0.0 and resid < scale * 1e-15):
            # deflated remainder is numerically zero: eigenvalue 0
            v = _null_direction(k, vecs)
            vals.append(0.0)
            vecs.append(v)
            continue
        v = np.array([rng.gauss(0.0, 1.0) for _ in range(k)])
        v = _orthogonalize(v, vecs)
        v /= float(np.linalg.norm(v))
        for _ in range(max_iters):
            w = _orthogonalize(S @ v, vecs)
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                # landed exactly in the null space; re-randomize
                v = np.array([rng.gauss(0.0, 1.0) for _ in range(k)])
                v = _orthogonalize(v, vecs)
                v /= float(np.linalg.norm(v))
                continue
            w /= nw
            if 1.0 - abs(float(w @ v)) < tol:
                v = w
                break
            v = w
        v = _ritz_polish(S, v, vecs)
        lam = float(v @ S @ v)
        vals.append(lam)
        vecs.append(v)
        S = S - lam * np.outer(v, v)
    return np.array(vals), np.column_stack(vecs)


def pca_2d(axes: np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    """Project k cluster axes to 2D principal coordinates.

    Returns (coords, (lam1, lam2)) where coords is k x 2 and lam1 >= lam2 >= 0
    are the top population eigenvalues. Collinear inputs give lam2 = 0 and
    y identically 0. Sign convention: within each component the coordinate
    of largest absolute value (first such index) is positive.
    """
    X = np.asarray(axes, dtype=float)
    k = X.shape[0]
    if k < 2:
        raise NumericError(f"need at least 2 cluster axes to map, got {k}")
    Xc = X - X.mean(axis=0)
    G = (Xc @ Xc.T) / k
    # identical axes leave only centering roundoff (~eps^2 of the data
    # scale); floor that to an exactly-zero spectrum
    scale = float(np.sum(X * X)) / k
    if float(np.max(np.abs(G))) <= scale * 1e-24:
        return np.zeros((k, 2)), (0.0, 0.0)
    vals, vecs = top_eigenpairs(G, 2)
    coords = np.zeros((k, 2))
    out_vals = []
    for j in range(2):
        lam = float(vals[j])
        if lam < 0.0:
            lam = 0.0  # Gram matrices are PSD; negatives are roundoff
        out_vals.append(lam)
        if lam > 0.0:
            col = np.sqrt(k * lam) * vecs[:, j]
            pivot = int(np.argmax(np.abs(col)))
            if col[pivot] < 0.0:
                col = -col
            coords[:, j] = col
    return coords, (out_vals[0], out_vals[1])


def build_edges(axes: np.ndarray, tau: float) -> list[tuple[int, int, float]]:
    """Pairs (i, j, cosine) with i < j and cosine >= tau, in (i, j) order."""
    if not 0.0 < tau <= 1.0:
        raise ConfigError(f"edge threshold must be in (0, 1], got {tau}")
    X = np.asarray(axes, dtype=float)
    k = X.shape[0]
    norms = np.linalg.norm(X, axis=1)
    edges = []
    for i in range(k):
        for j in range(i + 1, k):
            denom = norms[i] * norms[j]
            sim = min(1.0, float(X[i] @ X[j] / denom)) if denom > 0.0 else 0.0
            if sim >= tau:
                edges.append((i, j, sim))
    return edges


def connected_components(k: int, edges) -> list[tuple[int, ...]]:
    """Undirected components, largest first, ties by smallest member id."""
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, *_ in edges:
        if not (0 <= i < k and 0 <= j < k):
            raise InputError(f"edge ({i}, {j}) out of range for {k} clusters")
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for x in range(k):
        groups.setdefault(find(x), []).append(x)
    comps = [tuple(sorted(g)) for g in groups.values()]
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def explained_variance(axes: np.ndarray, eigenvalues: tuple[float, float]) -> float:
    """(lam1 + lam2) / total variance; defined as 1.0 when variance is zero."""
    X = np.asarray(axes, dtype=float)
    Xc = X - X.mean(axis=0)
    total = float(np.sum(Xc * Xc)) / X.shape[0]
    scale = float(np.sum(X * X)) / X.shape[0]
    if total <= scale * 1e-24:
        return 1.0
    return min(1.0, (eigenvalues[0] + eigenvalues[1]) / total)


def build_cluster_map(period_id: str, axes: np.ndarray, tau: float) -> ClusterMap:
    coords, vals = pca_2d(axes)
    edges = build_edges(axes, tau)
    comps = connected_components(axes.shape[0], edges)
    return ClusterMap(
        period_id=period_id,
        coords=tuple((float(x), float(y)) for x, y in coords),
        eigenvalues=vals,
        explained_variance=explained_variance(axes, vals),
        edges=tuple(edges),
        components=tuple(comps),
    )


def _scaled(values: list[float], lo: float, hi: float, invert: bool) -> list[float]:
    vmin, vmax = min(values), max(values)
    span = vmax - vmin
    if span == 0.0:
        return [(lo + hi) / 2.0] * len(values)
    out = []
    for v in values:
        t = (v - vmin) / span
        if invert:
            t = 1.0 - t
        out.append(lo + t * (hi - lo))
    return out


def render_svg(cmap: ClusterMap, summaries: list[ClusterSummary]) -> str:
    """Deterministic SVG: edges, then circles, then labels, fixed formatting."""
    k = len(cmap.coords)
    xs = _scaled([c[0] for c in cmap.coords], SVG_MARGIN, SVG_WIDTH - SVG_MARGIN, False)
    # SVG y grows downward, so the vertical axis is inverted
    ys = _scaled([c[1] for c in cmap.coords], SVG_MARGIN, SVG_HEIGHT - SVG_MARGIN, True)
    max_size = max((s.size for s in summaries), default=0)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" '
        f'height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f"<!-- cluster map {escape(cmap.period_id)} -->",
        f'<rect width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
    ]
    for i, j, sim in cmap.edges:
        lines.append(
            f'<line x1="{xs[i]:.2f}" y1="{ys[i]:.2f}" x2="{xs[j]:.2f}" '
            f'y2="{ys[j]:.2f}" stroke="#555555" stroke-opacity="{sim:.3f}" '
            'stroke-width="1.5"/>'
        )
    for c in range(k):
        size = summaries[c].size if c < len(summaries) else 0
        r = MAX_RADIUS * (size / max_size) ** 0.5 if max_size > 0 else 4.0
        lines.append(
            f'<circle cx="{xs[c]:.2f}" cy="{ys[c]:.2f}" r="{r:.2f}" '
            'fill="#4477aa" fill-opacity="0.6" stroke="#223355"/>'
        )
    for c in range(k):
        label = summaries[c].label if c < len(summaries) else str(c)
        size = summaries[c].size if c < len(summaries) else 0
        r = MAX_RADIUS * (size / max_size) ** 0.5 if max_size > 0 else 4.0
        lines.append(
            f'<text x="{xs[c]:.2f}" y="{ys[c] - r - 4.0:.2f}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{escape(label)}</text>"
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
