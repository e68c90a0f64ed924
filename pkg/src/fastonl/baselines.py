"""Comparison methods: neighbor Weighted Majority and truncated power iteration."""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp

from .graph import Graph, LabelSequence
from .kernel import DENSE_CAP
from .learner import DenseColumns, ExperimentRecord, online_loop


def weighted_majority_run(g: Graph, labels: LabelSequence, seed=0, count_votes: bool = False) -> ExperimentRecord:
    """Predict the heaviest label among already revealed neighbors.

    Votes are edge weights (plain counts with ``count_votes``); ties go to the
    lowest label id and a node with no revealed neighbor gets a uniform draw.
    """
    rng = np.random.default_rng(seed)
    k = labels.k
    revealed = np.full(g.n, -1, dtype=np.int64)
    order = labels.order
    truth = labels.labels[order]
    pred = np.empty(len(order), dtype=np.int64)
    micros = np.empty(len(order))
    clock = time.perf_counter_ns
    for i, t in enumerate(order):
        start = clock()
        nbrs, w = g.neighbors(t)
        seen = revealed[nbrs]
        mask = seen >= 0
        if mask.any():
            votes = np.ones(mask.sum()) if count_votes else w[mask]
            tally = np.bincount(seen[mask], weights=votes, minlength=k)
            pred[i] = int(np.argmax(tally))
        else:
            pred[i] = int(rng.integers(k))
        revealed[t] = truth[i]
        micros[i] = (clock() - start) / 1000.0
    return ExperimentRecord("wm", order.copy(), truth, pred, micros, meta={"count_votes": count_votes})


def power_iteration_kernel(g: Graph, lam: float, p: int, cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Truncated series for the normalized-Laplacian kernel.

    Returns ``M_p = (2 n lam / (n + lam)) sum_{i<=p} (n/(n+lam) D^-1/2 W D^-1/2)^i``
    and the fraction of nonzero entries of the partial sum after each term.
    """
    n = g.n
    if n > cap:
        raise ValueError(f"dense power iteration limited to n <= {cap}, got n = {n}")
    h = np.zeros(n)
    h[g.D > 0] = 1.0 / np.sqrt(g.D[g.D > 0])
    P = (n / (n + lam)) * (sp.diags(h) @ g.adjacency() @ sp.diags(h)).tocsr()
    term = np.eye(n)
    total = np.eye(n)
    nnz = [np.count_nonzero(total) / n ** 2]
    for _ in range(p):
        term = np.asarray(P @ term)
        total += term
        nnz.append(np.count_nonzero(total) / n ** 2)
    return (2 * n * lam / (n + lam)) * total, np.array(nnz)


def approximate_run(g: Graph, labels: LabelSequence, lam: float, p: int, seed=0,
                    trace_coef: float | None = None, trace_init: float | str | None = None,
                    cap: int = DENSE_CAP, predict: str = "sample") -> ExperimentRecord:
    """The FastONL loop fed with columns of the truncated power series."""
    M, nnz = power_iteration_kernel(g, lam, p, cap)
    k = labels.k
    if trace_init is None or trace_init == "kn2":
        init = k * g.n ** 2
    elif trace_init == "exact":
        init = float(np.trace(M))
    else:
        init = float(trace_init)
    coef = float(k) if trace_coef is None else trace_coef
    rec = online_loop(labels, DenseColumns(M), g.n, init, coef, seed, "approximate", predict=predict)
    rec.meta.update(p=p, lam=lam, nnz=nnz.tolist())
    return rec
