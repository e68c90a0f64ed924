"""Undirected weighted graphs in CSR layout, label sequences, and text loaders."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GraphFormatError(ValueError):
    """Raised for malformed or invalid graph/label input."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph; every edge is stored in both directions.

    ``d`` holds neighbor counts and ``D`` weighted degrees. ``node_ids`` maps
    dense internal ids back to the ids used in the source file.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    node_ids: np.ndarray
    d: np.ndarray = field(init=False)
    D: np.ndarray = field(init=False)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.diff(self.indptr).astype(np.int64)
        D = np.bincount(np.repeat(np.arange(len(d)), d), weights=self.weights, minlength=len(d))
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "D", D)
        for name in ("indptr", "indices", "weights", "node_ids", "d", "D"):
            getattr(self, name).flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Each undirected edge once, as (u, v, w) with u < v."""
        rows = np.repeat(np.arange(self.n), self.d)
        keep = rows < self.indices
        return rows[keep], self.indices[keep], self.weights[keep]

    def is_weighted(self) -> bool:
        return bool(np.any(self.weights != 1.0))


def from_edges(u, v, w=None, n: int | None = None, node_ids=None) -> Graph:
    """Build a Graph from dense 0-based endpoint arrays.

    Self-loops are dropped, duplicates collapse to their first occurrence.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
    if not (len(u) == len(v) == len(w)):
        raise GraphFormatError("edge arrays differ in length")
    if len(w) and (not np.all(np.isfinite(w)) or np.any(w <= 0)):
        raise GraphFormatError("edge weights must be finite and positive")
    if n is None:
        n = int(max(u.max(initial=-1), v.max(initial=-1))) + 1
    if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
        raise GraphFormatError("edge endpoint out of range")

    loops = u == v
    n_loops = int(loops.sum())
    u, v, w = u[~loops], v[~loops], w[~loops]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo))  # stable, so the first occurrence wins
    lo, hi, w = lo[order], hi[order], w[order]
    first = np.ones(len(lo), dtype=bool)
    first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    group = np.cumsum(first) - 1
    conflicts = int(np.sum(w != w[first][group]))
    n_dups = int(len(lo) - first.sum())
    lo, hi, w = lo[first], hi[first], w[first]

    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    vals = np.concatenate([w, w])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    if node_ids is None:
        node_ids = np.arange(n, dtype=np.int64)
    info = {"self_loops": n_loops, "duplicates": n_dups, "weight_conflicts": conflicts}
    return Graph(indptr, cols.astype(np.int64), vals.astype(np.float64), np.asarray(node_ids), info=info)


def _read_rows(path, min_cols: int, max_cols: int):
    path = Path(path)
    rows = []
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if not min_cols <= len(tokens) <= max_cols:
                raise GraphFormatError(f"{path}:{lineno}: expected {min_cols}-{max_cols} fields, got {len(tokens)}")
            rows.append((lineno, tokens))
    return rows


def _parse_int(token: str, where: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise GraphFormatError(f"{where}: node id {token!r} is not an integer") from None
    if value < 0:
        raise GraphFormatError(f"{where}: negative node id {value}")
    return value


def _read_edges(path, weighted: bool | None):
    src, dst, wts = [], [], []
    for lineno, tokens in _read_rows(path, 2, 3):
        where = f"{path}:{lineno}"
        src.append(_parse_int(tokens[0], where))
        dst.append(_parse_int(tokens[1], where))
        w = 1.0
        if len(tokens) == 3 and weighted is not False:
            try:
                w = float(tokens[2])
            except ValueError:
                raise GraphFormatError(f"{where}: weight {tokens[2]!r} is not a number") from None
            if not np.isfinite(w) or w <= 0:
                raise GraphFormatError(f"{where}: weight must be positive, got {tokens[2]}")
        elif weighted:
            raise GraphFormatError(f"{where}: missing weight column")
        wts.append(w)
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), np.array(wts)


def _build(src, dst, wts, extra_ids=()) -> Graph:
    ids = np.unique(np.concatenate([src, dst, np.asarray(extra_ids, dtype=np.int64)]))
    g = from_edges(np.searchsorted(ids, src), np.searchsorted(ids, dst), wts, n=len(ids), node_ids=ids)
    if g.info["self_loops"]:
        warnings.warn(f"dropped {g.info['self_loops']} self-loop(s)", stacklevel=3)
    if g.info["weight_conflicts"]:
        warnings.warn(f"{g.info['weight_conflicts']} duplicate edge(s) had conflicting weights; kept the first", stacklevel=3)
    return g


def load_edge_list(path, weighted: bool | None = None) -> Graph:
    """Read whitespace-separated ``u v [w]`` lines.

    ``weighted=None`` uses a weight column when present, ``False`` ignores it
    and ``True`` requires it. Node ids are compacted to ``0..n-1`` in sorted
    order; the original ids stay in ``Graph.node_ids``.
    """
    return _build(*_read_edges(path, weighted))


def write_edge_list(g: Graph, path) -> None:
    u, v, w = g.edges()
    ids = g.node_ids
    with Path(path).open("w", encoding="utf-8") as fh:
        for a, b, c in zip(ids[u], ids[v], w):
            fh.write(f"{a} {b} {float(c)!r}\n")


@dataclass(frozen=True, eq=False)
class LabelSequence:
    """Node labels in ``0..k-1`` (``-1`` for unlabeled) and an arrival order."""

    labels: np.ndarray
    k: int
    order: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        order = np.asarray(self.order, dtype=np.int64)
        if labels.max(initial=-1) >= self.k or labels.min(initial=0) < -1:
            raise GraphFormatError("label id out of range")
        labeled = np.flatnonzero(labels >= 0)
        if len(order) != len(labeled) or not np.array_equal(np.sort(order), labeled):
            raise GraphFormatError("arrival order must be a permutation of the labeled nodes")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)

    def shuffled(self, seed) -> LabelSequence:
        rng = np.random.default_rng(seed)
        return LabelSequence(self.labels, self.k, rng.permutation(self.order), self.names)

    def with_order(self, order) -> LabelSequence:
        return LabelSequence(self.labels, self.k, order, self.names)


def _label_key(token: str):
    try:
        return (0, int(token), token)
    except ValueError:
        return (1, 0, token)


def _read_labels(path):
    nodes, raw = [], []
    for lineno, tokens in _read_rows(path, 2, 2):
        nodes.append(_parse_int(tokens[0], f"{path}:{lineno}"))
        raw.append(tokens[1])
    return np.array(nodes, dtype=np.int64), raw


def _make_labels(g: Graph, nodes, raw, order_ids=None) -> LabelSequence:
    names = sorted(set(raw), key=_label_key)
    code = {name: i for i, name in enumerate(names)}
    pos = np.searchsorted(g.node_ids, nodes)
    pos = np.minimum(pos, g.n - 1)
    missing = g.node_ids[pos] != nodes
    if np.any(missing):
        raise GraphFormatError(f"label file mentions unknown node {nodes[missing][0]}")
    labels = np.full(g.n, -1, dtype=np.int64)
    values = np.array([code[x] for x in raw], dtype=np.int64)
    if len(np.unique(pos)) != len(pos):
        raise GraphFormatError("node labeled more than once")
    labels[pos] = values
    if order_ids is None:
        order = pos  # file order
    else:
        order = np.searchsorted(g.node_ids, order_ids)
        order = np.minimum(order, g.n - 1)
        if np.any(g.node_ids[order] != order_ids):
            raise GraphFormatError("order file mentions unknown node")
    return LabelSequence(labels, len(names), order, tuple(names))


def load_labels(path, g: Graph, order_path=None) -> LabelSequence:
    """Read ``node_id label_id`` lines for the nodes of ``g``."""
    nodes, raw = _read_labels(path)
    order_ids = None if order_path is None else load_order(order_path)
    return _make_labels(g, nodes, raw, order_ids)


def load_order(path) -> np.ndarray:
    return np.array([_parse_int(t[0], f"{path}:{i}") for i, t in _read_rows(path, 1, 1)], dtype=np.int64)


def load_dataset(edge_path, label_path, order_path=None, weighted: bool | None = None):
    """Load a graph and its labels; labeled nodes without edges become singletons."""
    src, dst, wts = _read_edges(edge_path, weighted)
    nodes, raw = _read_labels(label_path)
    g = _build(src, dst, wts, extra_ids=nodes)
    order_ids = None if order_path is None else load_order(order_path)
    return g, _make_labels(g, nodes, raw, order_ids)


def karate() -> tuple[Graph, LabelSequence]:
    """Zachary's karate club (34 nodes, 78 edges), labeled by the final split."""
    here = Path(__file__).parent / "data"
    return load_dataset(here / "karate_edges.txt", here / "karate_labels.txt")


def subgraph(g: Graph, keep: np.ndarray) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on boolean mask ``keep``; returns it and the old->new map."""
    keep = np.asarray(keep, dtype=bool)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(int(keep.sum()))
    u, v, w = g.edges()
    inside = keep[u] & keep[v]
    sub = from_edges(remap[u[inside]], remap[v[inside]], w[inside], n=int(keep.sum()), node_ids=g.node_ids[keep])
    return sub, remap


def largest_connected_component(g: Graph, labels: LabelSequence | None = None):
    """Restrict to the largest connected component (ties: the one holding the smallest id)."""
    if g.n == 0:
        raise GraphFormatError("empty graph has no connected component")
    _, comp = connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(comp)
    keep = comp == int(np.argmax(sizes))
    sub, remap = subgraph(g, keep)
    if labels is None:
        return sub, None
    order = remap[labels.order]
    order = order[order >= 0]
    return sub, LabelSequence(labels.labels[keep], labels.k, order, labels.names)


def volume(g: Graph, nodes) -> int:
    """Sum of unweighted degrees over ``nodes``."""
    nodes = np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes, dtype=np.int64)
    if len(nodes) and (nodes.min() < 0 or nodes.max() >= g.n):
        raise IndexError("node id out of range")
    return int(g.d[nodes].sum())
