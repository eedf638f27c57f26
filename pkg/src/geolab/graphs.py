"""Recursive diamond and Laakso graphs with metric and l1-embedding tools.

Both families are built edge by edge.  Level 1 is a single source-sink
edge.  One refinement step rewrites every edge {u, v}:

* diamond: replace by two parallel length-2 paths u-a-v and u-b-v; the new
  pair {a, b} is an anti-edge of the new level.

          a
         / \
        u   v        (the quadrilateral u, a, v, b)
         \ /
          b

* laakso: subdivide into a path of length 4 and replace the middle two
  edges by two parallel length-2 paths:

        u - y1 < y2 > y3 - v      (y2 and b are the two midpoints)
                \ b /

Every edge carries a half-open interval of "mass units" inherited from the
unit interval of the level-1 edge; vertex v is assigned the union of the
units below it.  Interpreting each unit as one 0/1 coordinate yields the
cut-based l1 embedding returned by :func:`l1_embed`: images are integer
vectors and the l1 distance is the Hamming distance of the unit sets.

Vertex ids are assigned in creation order (edges are refined in the order
they were created), so the numbering is deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CollapsedPair, Disconnected, InvalidExponent, TooLarge

EDGE_BUDGET_DEFAULT = 10 ** 6
METRIC_CAP = 5000


@dataclass
class LevelGraph:
    kind: str
    level: int
    n: int
    edges: list
    source: int
    sink: int
    anti_edges: dict = field(default_factory=dict)
    quadrilaterals: dict = field(default_factory=dict)
    provenance: list = field(default_factory=list)

    def adjacency(self):
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass
class FiniteMetric:
    n: int
    dist: np.ndarray


@dataclass
class CoordinateEmbedding:
    """Images of graph vertices as integer vectors under a cut embedding."""

    target_norm: str
    images: np.ndarray          # shape (n, dim)
    scale: float = 1.0


def _refine_diamond(edges, next_id, assigned, anti, quads, prov, level):
    new_edges = []
    for u, v, lo, hi in edges:
        mid = (lo + hi) // 2
        a, b = next_id, next_id + 1
        next_id += 2
        if assigned is not None:
            assigned.append(assigned[u] | frozenset(range(lo, mid)))
            assigned.append(assigned[u] | frozenset(range(mid, hi)))
        prov.extend([level, level])
        anti.setdefault(level, []).append((a, b))
        quads.setdefault(level, []).append((u, v, a, b))
        new_edges.extend([
            (u, a, lo, mid), (a, v, mid, hi),
            (u, b, mid, hi), (b, v, lo, mid),
        ])
    return new_edges, next_id


def _refine_laakso(edges, next_id, assigned, anti, quads, prov, level):
    new_edges = []
    for u, v, lo, hi in edges:
        q = (hi - lo) // 4
        y1, y2, y3, b = next_id, next_id + 1, next_id + 2, next_id + 3
        next_id += 4
        if assigned is not None:
            base = assigned[u]
            assigned.append(base | frozenset(range(lo, lo + q)))          # y1
            assigned.append(base | frozenset(range(lo, lo + 2 * q)))      # y2
            assigned.append(base | frozenset(range(lo, lo + 3 * q)))      # y3
            assigned.append(base | frozenset(range(lo, lo + q))
                            | frozenset(range(lo + 2 * q, lo + 3 * q)))   # b
        prov.extend([level] * 4)
        anti.setdefault(level, []).append((y2, b))
        quads.setdefault(level, []).append((y1, y3, y2, b))
        new_edges.extend([
            (u, y1, lo, lo + q),
            (y1, y2, lo + q, lo + 2 * q), (y2, y3, lo + 2 * q, lo + 3 * q),
            (y1, b, lo + 2 * q, lo + 3 * q), (b, y3, lo + q, lo + 2 * q),
            (y3, v, lo + 3 * q, hi),
        ])
    return new_edges, next_id


def _generate(kind, k, edge_budget, with_units):
    if kind == "diamond":
        branch, unit_base = 4, 2
        refine = _refine_diamond
    else:
        branch, unit_base = 6, 4
        refine = _refine_laakso
    k = int(k)
    if k < 1:
        raise InvalidExponent(f"level must be >= 1, got {k}")
    n_edges = branch ** (k - 1)
    if n_edges > edge_budget:
        raise TooLarge(
            f"{kind} level {k} has {n_edges} edges, over the budget {edge_budget}")
    units = unit_base ** (k - 1)
    assigned = [frozenset(), frozenset(range(units))] if with_units else None
    prov = [1, 1]
    anti, quads = {}, {}
    edges = [(0, 1, 0, units)]
    next_id = 2
    for level in range(2, k + 1):
        edges, next_id = refine(edges, next_id, assigned, anti, quads, prov, level)
    g = LevelGraph(
        kind=kind, level=k, n=next_id,
        edges=[(u, v) for u, v, _, _ in edges],
        source=0, sink=1,
        anti_edges=anti, quadrilaterals=quads, provenance=prov,
    )
    return g, assigned, units


def diamond(k, edge_budget=EDGE_BUDGET_DEFAULT):
    """Level-k diamond graph: 4^(k-1) edges, source 0, sink 1."""
    g, _, _ = _generate("diamond", k, edge_budget, with_units=False)
    return g


def laakso(k, edge_budget=EDGE_BUDGET_DEFAULT):
    """Level-k Laakso graph: 6^(k-1) edges, source 0, sink 1."""
    g, _, _ = _generate("laakso", k, edge_budget, with_units=False)
    return g


def l1_embed(g):
    """Cut-based l1 embedding of a diamond or Laakso graph.

    Regenerates the graph carrying per-vertex unit sets and returns 0/1
    integer images; the embedding is non-expansive edge by edge and its
    exact distortion should be certified a posteriori with
    :func:`distortion`.
    """
    rebuilt, assigned, units = _generate(
        g.kind, g.level, EDGE_BUDGET_DEFAULT, with_units=True)
    if rebuilt.n != g.n or rebuilt.edges != g.edges:
        raise Disconnected("graph does not match its deterministic rebuild")
    images = np.zeros((g.n, units), dtype=np.int64)
    for v, s in enumerate(assigned):
        if s:
            images[v, sorted(s)] = 1
    return CoordinateEmbedding(target_norm="l1", images=images, scale=1.0)


def shortest_path_metric(g):
    """All-pairs BFS distances as a FiniteMetric (exact integers)."""
    if g.n > METRIC_CAP:
        raise TooLarge(f"graph has {g.n} > {METRIC_CAP} vertices")
    adj = g.adjacency()
    dist = np.full((g.n, g.n), -1, dtype=np.int64)
    for s in range(g.n):
        row = dist[s]
        row[s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if row[w] < 0:
                        row[w] = d
                        nxt.append(w)
            frontier = nxt
    if (dist < 0).any():
        raise Disconnected("graph is not connected")
    return FiniteMetric(n=g.n, dist=dist.astype(float))


def hypercube_metric(k, p, max_k=12):
    """l_p metric on the 2^k points of {-1, 1}^k, in fixed binary order.

    Point i has j-th coordinate +1 when bit j of i is set, else -1.
    """
    k = int(k)
    p = float(p)
    if not p > 0:
        raise InvalidExponent(f"p must be positive, got {p}")
    if k < 1 or k > max_k:
        raise TooLarge(f"hypercube level {k} outside [1, {max_k}]")
    idx = np.arange(2 ** k, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(k)) & 1
    ham = (bits[:, None, :] != bits[None, :, :]).sum(axis=2)
    if np.isinf(p):
        d = 2.0 * (ham > 0)
    else:
        d = 2.0 * ham ** (1.0 / p)
    return FiniteMetric(n=2 ** k, dist=d)


def pairwise_l1(images):
    """Pairwise l1 distance matrix of stacked coordinate vectors."""
    images = np.asarray(images, dtype=float)
    n = images.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        out[i] = np.abs(images[i] - images).sum(axis=1)
    return out


def distortion(f_dist, g_dist):
    """Exact bi-Lipschitz distortion between two metrics on the same points.

    ``value = max(d_f / d_g) * max(d_g / d_f)`` over all pairs, which is the
    distortion with the optimal scale factored out.  Also returns the
    extremal pairs.  Raises ``CollapsedPair`` when distinct points have
    distance zero on one side only.
    """
    a = np.asarray(f_dist, dtype=float)
    b = np.asarray(g_dist, dtype=float)
    n = a.shape[0]
    iu = np.triu_indices(n, k=1)
    da, db = a[iu], b[iu]
    bad = (da == 0) != (db == 0)
    if bad.any():
        i = int(np.argmax(bad))
        raise CollapsedPair(
            f"pair ({iu[0][i]}, {iu[1][i]}) collapses on one side only")
    keep = da > 0
    da, db = da[keep], db[keep]
    ia, ib = iu[0][keep], iu[1][keep]
    ratio = da / db
    hi = int(np.argmax(ratio))
    lo = int(np.argmin(ratio))
    value = float(ratio[hi] / ratio[lo])
    return {
        "value": value,
        "expansion_pair": (int(ia[hi]), int(ib[hi])),
        "contraction_pair": (int(ia[lo]), int(ib[lo])),
    }


def is_series_parallel(g):
    """Multigraph series-parallel test by repeated reduction.

    Alternates parallel reductions (merge duplicate edges) and series
    reductions (contract interior degree-2 vertices) until nothing changes;
    the graph is series-parallel iff a single source-sink edge remains.
    """
    from collections import Counter

    edges = Counter(frozenset((u, v)) for u, v in g.edges if u != v)
    terminals = {g.source, g.sink}
    changed = True
    while changed:
        changed = False
        for e in list(edges):
            if edges[e] > 1:
                edges[e] = 1
                changed = True
        deg = Counter()
        for e, c in edges.items():
            for x in e:
                deg[x] += c
        for x, d in deg.items():
            if d == 2 and x not in terminals:
                incident = [e for e in edges if x in e]
                if len(incident) != 2:
                    continue
                (a,) = set(incident[0]) - {x}
                (b,) = set(incident[1]) - {x}
                del edges[incident[0]]
                del edges[incident[1]]
                if a != b:
                    edges[frozenset((a, b))] += 1
                changed = True
                break
    return len(edges) == 1 and frozenset((g.source, g.sink)) in edges


def export_edge_list(g):
    """Plain-text edge list with the header ``# kind k |V| |E|``."""
    lines = [f"# {g.kind} {g.level} {g.n} {len(g.edges)}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def embedding_to_json_dict(emb):
    return {str(v): [int(x) for x in row] for v, row in enumerate(emb.images)}
