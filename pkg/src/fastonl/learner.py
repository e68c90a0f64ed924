"""Online node labeling: the exact Relaxation learner and FastONL.

Both share one loop. At step t the learner forms ``u = G M[:, t]`` from the
gradients revealed so far, predicts from ``psi = -u / sqrt(A + c T)``,
reveals the label, and updates ``A += 2 grad.u + m_tt |grad|^2`` and
``T -= m_tt``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, LabelSequence
from .kernel import (DENSE_CAP, KernelOperator, KernelSpec, approximate_kernel_matrix,
                     exact_kernel_matrix)

GRAD_BOUND = 2.0  # D in the relaxation; the surrogate gradient never exceeds sqrt(2)
SQRT_FLOOR = 1e-12


@dataclass(frozen=True)
class Prediction:
    q: np.ndarray
    tau: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.q > 0)


def project_distribution(psi) -> Prediction:
    """Euclidean projection of ``psi`` onto the simplex: ``q = max(psi - tau, 0)``."""
    psi = np.asarray(psi, dtype=np.float64)
    if not np.all(np.isfinite(psi)):
        raise FloatingPointError("scores must be finite")
    desc = np.sort(psi)[::-1]
    cums = np.cumsum(desc) - 1.0
    ks = np.arange(1, len(psi) + 1)
    rho = np.flatnonzero(desc - cums / ks > 0)[-1]
    tau = cums[rho] / (rho + 1)
    return Prediction(np.maximum(psi - tau, 0.0), float(tau))


def _in_support(pred: Prediction, y: int) -> bool:
    return pred.q[y] > 0


def surrogate_loss(psi, g, y: int) -> float:
    """Convex surrogate of the 0-1 loss at score ``g``, with support taken from ``psi``."""
    pred = project_distribution(psi)
    g = np.asarray(g, dtype=np.float64)
    size = len(pred.support)
    if not _in_support(pred, y):
        others = np.delete(g, y)
        return (1.0 + others.max() - g[y]) / (1.0 + 1.0 / size)
    return 1.0 - g[y] + (g[pred.support].sum() - 1.0) / size


def surrogate_gradient(psi, y: int, pred: Prediction | None = None) -> np.ndarray:
    """Subgradient of the surrogate in its score argument, evaluated at ``psi``.

    Ties in the max over wrong labels go to the lowest label id.
    """
    psi = np.asarray(psi, dtype=np.float64)
    pred = project_distribution(psi) if pred is None else pred
    k = len(psi)
    grad = np.zeros(k)
    support = pred.support
    if _in_support(pred, y):
        grad[support] = 1.0 / len(support)
        grad[y] -= 1.0
        return grad
    masked = psi.copy()
    masked[y] = -np.inf
    r = int(np.argmax(masked))
    grad[r] = 1.0
    grad[y] = -1.0
    return grad / (1.0 + 1.0 / len(support))


def sample_label(pred: Prediction, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from ``q``; always lands inside the support."""
    cdf = np.cumsum(pred.q)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, int(pred.support[-1]))


@dataclass(eq=False)
class ExperimentRecord:
    """Per-step outcome of one online run, in arrival order."""

    method: str
    nodes: np.ndarray
    truth: np.ndarray
    pred: np.ndarray
    micros: np.ndarray
    psi: np.ndarray | None = None
    grads: np.ndarray | None = None
    diag: np.ndarray | None = None
    scores: np.ndarray | None = None  # u = G M[:, t] before normalization
    meta: dict = field(default_factory=dict)

    @property
    def loss(self) -> np.ndarray:
        return (self.pred != self.truth).astype(np.int64)

    @property
    def mistakes(self) -> int:
        return int(self.loss.sum())

    @property
    def accuracy(self) -> float:
        return 1.0 - self.mistakes / len(self.nodes)

    def cum_error_rate(self) -> np.ndarray:
        return np.cumsum(self.loss) / np.arange(1, len(self.nodes) + 1)

    def to_csv(self, path, node_ids=None, timing: bool = True) -> None:
        ids = self.nodes if node_ids is None else np.asarray(node_ids)[self.nodes]
        rate = self.cum_error_rate()
        loss = self.loss
        micros = self.micros if timing else np.zeros(len(self.nodes))
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("step,node,true_label,pred_label,loss,cum_error_rate,step_micros\n")
            for i in range(len(self.nodes)):
                fh.write(f"{i + 1},{ids[i]},{self.truth[i]},{self.pred[i]},{loss[i]},{rate[i]:.10f},{micros[i]:.3f}\n")


class DenseColumns:
    """Columns read from a dense matrix; ``sym`` averages column and row."""

    def __init__(self, M: np.ndarray, sym: bool = False):
        self.M = (M + M.T) / 2 if sym else M
        self.diag = np.diag(M).copy()

    def score(self, G: np.ndarray, Gsum: np.ndarray, t: int):
        return G @ self.M[:, t], self.diag[t]

    def trace(self) -> float:
        return float(self.diag.sum())


class PushColumns:
    """Columns computed on demand by local push."""

    def __init__(self, op: KernelOperator):
        self.op = op
        self.pushes = 0
        self.work = 0

    def score(self, G: np.ndarray, Gsum: np.ndarray, t: int):
        col = self.op.column(t)
        u = G[:, col.values.indices] @ col.values.values
        if col.shift:
            u = u + col.shift * Gsum
        out = self.op.last_outcome
        if out is not None:
            self.pushes += out.stats.pushes
            self.work += out.stats.R_T
        return u, col.diag


PREDICT_MODES = ("sample", "argmax")


def online_loop(labels: LabelSequence, source, n: int, trace_init: float, trace_coef: float,
                seed, method: str, keep_trace: bool = True, predict: str = "sample") -> ExperimentRecord:
    """Run the shared relaxation loop over ``labels.order`` with columns from ``source``.

    ``predict="argmax"`` replaces the draw from ``q`` by its mode (lowest id on ties).
    """
    if predict not in PREDICT_MODES:
        raise ValueError(f"predict must be one of {PREDICT_MODES}, got {predict!r}")
    k = labels.k
    rng = np.random.default_rng(seed)
    order = labels.order
    steps = len(order)
    G = np.zeros((k, n))
    Gsum = np.zeros(k)
    A, T = 0.0, float(trace_init)
    pred = np.empty(steps, dtype=np.int64)
    micros = np.empty(steps)
    psis = np.empty((steps, k)) if keep_trace else None
    grads = np.empty((steps, k)) if keep_trace else None
    scores = np.empty((steps, k)) if keep_trace else None
    diags = np.empty(steps)
    truth = labels.labels[order]
    clock = time.perf_counter_ns
    for i, t in enumerate(order):
        start = clock()
        u, m = source.score(G, Gsum, t)
        psi = -u / math.sqrt(max(A + trace_coef * T, SQRT_FLOOR))
        if not np.all(np.isfinite(psi)):
            raise FloatingPointError(f"non-finite score at step {i + 1}")
        p = project_distribution(psi)
        pred[i] = sample_label(p, rng) if predict == "sample" else int(np.argmax(p.q))
        grad = surrogate_gradient(psi, int(truth[i]), p)
        A += 2.0 * float(grad @ u) + m * float(grad @ grad)
        T -= m
        G[:, t] = grad
        Gsum += grad
        micros[i] = (clock() - start) / 1000.0
        diags[i] = m
        if keep_trace:
            psis[i], grads[i], scores[i] = psi, grad, u
    return ExperimentRecord(method, order.copy(), truth, pred, micros, psis, grads, diags, scores,
                            meta={"trace_init": float(trace_init), "trace_coef": float(trace_coef), "predict": predict})


def relaxation_run(g: Graph, labels: LabelSequence, spec: KernelSpec, seed=0,
                   trace_coef: float = GRAD_BOUND ** 2, M: np.ndarray | None = None,
                   cap: int = DENSE_CAP, predict: str = "sample") -> ExperimentRecord:
    """Exact-kernel learner: ``psi = -G M[:, t] / sqrt(A + D^2 T)`` with ``T_1 = tr(M)``."""
    if M is None:
        M = exact_kernel_matrix(g, spec, cap)
    src = DenseColumns(M)
    rec = online_loop(labels, src, g.n, src.trace(), trace_coef, seed, "relaxation", predict=predict)
    rec.meta["kernel"] = spec.to_json()
    return rec


def fastonl_run(g: Graph, labels: LabelSequence, spec: KernelSpec, eps: float | None = None, seed=0,
                precompute: bool = False, trace_coef: float | None = None,
                trace_init: float | str | None = None, cap: int = DENSE_CAP,
                predict: str = "sample") -> ExperimentRecord:
    """FastONL with push-approximated kernel columns.

    By default column ``t`` is pushed on arrival and stands in for the row
    as well, ``T_1 = k n^2`` and the trace coefficient is ``k``. With
    ``precompute`` the whole ``M_eps`` is built first and its symmetric part
    is used, with ``T_1`` its trace.

    ``trace_init`` accepts a number, ``"kn2"`` or ``"exact"`` (trace of the
    dense kernel); ``trace_coef`` overrides the coefficient of ``T``.
    """
    k, n = labels.k, g.n
    op = KernelOperator(g, spec, eps)
    if precompute:
        M_eps, _ = approximate_kernel_matrix(g, spec, op.eps, cap)
        source = DenseColumns(M_eps, sym=True)
        default_init = source.trace()
    else:
        source = PushColumns(op)
        default_init = k * n ** 2
    if trace_init is None or trace_init == "kn2":
        init = default_init if trace_init is None else k * n ** 2
    elif trace_init == "exact":
        init = float(np.trace(exact_kernel_matrix(g, spec, cap)))
    else:
        init = float(trace_init)
    coef = float(k) if trace_coef is None else float(trace_coef)
    rec = online_loop(labels, source, n, init, coef, seed, "fastonl", predict=predict)
    rec.meta.update(kernel=spec.to_json(), eps=op.eps, alpha=op.alpha, precompute=precompute)
    if isinstance(source, PushColumns):
        rec.meta.update(pushes=source.pushes, work=source.work)
    return rec


@dataclass(frozen=True, eq=False)
class AuditResult:
    margins: np.ndarray  # Rel_{t-1} - (grad_t . psi_t + Rel_t)
    rel: np.ndarray  # Rel_0 .. Rel_n
    inner: np.ndarray  # grad_t . psi_t
    min_eig: float
    psd: bool
    worst_margins: np.ndarray | None
    record: ExperimentRecord

    @property
    def telescope_gap(self) -> float:
        """``Rel_0 - Rel_n - sum(grad . psi)``; nonnegative when the run is admissible."""
        return float(self.rel[0] - self.rel[-1] - self.inner.sum())


def admissibility_audit(g: Graph, labels: LabelSequence, spec: KernelSpec, eps: float | None = None,
                        seed=0, grid: int = 0, cap: int = DENSE_CAP) -> AuditResult:
    """Run the precomputed learner and check the per-step relaxation inequality.

    ``eps=None`` audits the exact kernel. ``grid > 0`` also searches a polar
    grid (k = 2) or ``grid**2`` random points (k > 2) of the radius-D ball for
    the worst gradient at every step.
    """
    if eps is None:
        M = exact_kernel_matrix(g, spec, cap)
    else:
        M, _ = approximate_kernel_matrix(g, spec, eps, cap)
    sym = (M + M.T) / 2
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    source = DenseColumns(M, sym=True)
    D2 = GRAD_BOUND ** 2
    rec = online_loop(labels, source, g.n, source.trace(), D2, seed, "fastonl-precompute")

    diag = rec.diag
    tail = np.concatenate([np.cumsum(diag[::-1])[::-1], [0.0]])  # sum_{j>=t} m_jj
    Q = np.concatenate([[0.0], np.cumsum(2 * np.einsum("ij,ij->i", rec.grads, rec.scores)
                                         + diag * np.einsum("ij,ij->i", rec.grads, rec.grads))])
    rel = np.sqrt(np.maximum(Q + D2 * tail, 0.0))
    inner = np.einsum("ij,ij->i", rec.grads, rec.psi)
    margins = rel[:-1] - (inner + rel[1:])

    worst = None
    if grid:
        pts = _ball_grid(labels.k, grid, GRAD_BOUND, seed)
        worst = np.empty(len(diag))
        for i in range(len(diag)):
            a = Q[i] + D2 * tail[i + 1]
            vals = pts @ rec.psi[i] + np.sqrt(np.maximum(a + 2 * pts @ rec.scores[i]
                                                         + diag[i] * np.einsum("ij,ij->i", pts, pts), 0.0))
            worst[i] = rel[i] - vals.max()
    return AuditResult(margins, rel, inner, min_eig, min_eig >= -1e-8, worst, rec)


def _ball_grid(k: int, size: int, radius: float, seed) -> np.ndarray:
    if k == 2:
        theta = np.linspace(0, 2 * np.pi, 4 * size, endpoint=False)
        rad = np.linspace(0, radius, size + 1)
        return np.array([[r * np.cos(a), r * np.sin(a)] for r in rad for a in theta])
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((size * size, k))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= radius * rng.random((size * size, 1)) ** (1.0 / k)
    return np.vstack([pts, np.zeros(k)])
