"""Small synthetic graphs for tests and demos."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import laplacian

from .graph import Graph, LabelSequence, from_edges


def random_graph(n: int, p: float, seed=None, weighted: bool = False, connected: bool = True) -> Graph:
    """Erdos-Renyi graph, optionally made connected by a random spanning path."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    u, v = iu[keep], ju[keep]
    if connected and n > 1:
        perm = rng.permutation(n)
        u = np.concatenate([u, perm[:-1]])
        v = np.concatenate([v, perm[1:]])
    w = rng.uniform(0.1, 3.0, len(u)) if weighted else None
    return from_edges(u, v, w, n=n)


def sbm(sizes, p_in: float, p_out: float, seed=None) -> tuple[Graph, np.ndarray]:
    """Stochastic block model; returns the graph and the block of every node."""
    rng = np.random.default_rng(seed)
    block = np.repeat(np.arange(len(sizes)), sizes)
    n = len(block)
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(block[iu] == block[ju], p_in, p_out)
    keep = rng.random(len(iu)) < prob
    return from_edges(iu[keep], ju[keep], n=n), block


def smooth_labels(g: Graph, seed=None) -> LabelSequence:
    """Two classes from the sign of the Fiedler vector, in random arrival order."""
    L = laplacian(g.adjacency().astype(float)).toarray()
    _, vecs = np.linalg.eigh(L)
    labels = (vecs[:, 1] > 0).astype(np.int64)
    order = np.random.default_rng(seed).permutation(g.n)
    return LabelSequence(labels, 2, order)


def community_graph(n: int = 500, avg_degree: float = 60, blocks: int = 5, mix: float = 0.2, seed=None) -> Graph:
    """Dense planted-community graph with the requested average degree."""
    size = n // blocks
    sizes = [size] * (blocks - 1) + [n - size * (blocks - 1)]
    within = (1 - mix) * avg_degree / (size - 1)
    across = mix * avg_degree / (n - size)
    g, _ = sbm(sizes, min(within, 1.0), min(across, 1.0), seed)
    return g


def random_labels(n: int, k: int, seed=None) -> LabelSequence:
    rng = np.random.default_rng(seed)
    return LabelSequence(rng.integers(0, k, n), k, rng.permutation(n))


def star(leaves: int) -> Graph:
    return from_edges(np.zeros(leaves, dtype=int), np.arange(1, leaves + 1))


def path(n: int) -> Graph:
    return from_edges(np.arange(n - 1), np.arange(1, n))


def to_scipy(g: Graph) -> sp.csr_matrix:
    return g.adjacency()
