"""The six regularized graph kernels and their push-based column access.

Every kernel has the form ``M = (K^-1 / (2 lam) + I / (2n))^-1`` and factors as
``M = a * diag(left) @ X @ (diag(right) - c * 1 1^T)`` where ``X`` is one of the
two basic kernels computed by local push. ``exact_kernel_matrix`` solves the
definition directly and serves as the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .graph import Graph
from .push import KernelType, PushConfig, Pusher, SparseVec, default_epsilon

DENSE_CAP = 5000

_TYPE = {1: KernelType.TYPE_LAP, 2: KernelType.TYPE_L, 3: KernelType.TYPE_L,
         4: KernelType.TYPE_LAP, 5: KernelType.TYPE_LAP, 6: KernelType.TYPE_LAP}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``id`` in 1..6 with its parameters.

    ``beta`` is used by kernels 3-6, ``b`` by kernel 6, and ``s`` picks the
    diagonal scaling of kernels 4-5: ``"I"`` or ``"D"`` (weighted degree).
    """

    id: int
    lam: float
    beta: float = 0.0
    b: float = 0.0
    s: str = "I"

    def __post_init__(self):
        kid = int(str(self.id).upper().lstrip("K"))
        object.__setattr__(self, "id", kid)
        if kid not in _TYPE:
            raise ValueError(f"unknown kernel id {self.id}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.s not in ("I", "D"):
            raise ValueError(f"s must be 'I' or 'D', got {self.s!r}")
        if kid in (4, 5, 6) and not self.beta > 0:
            raise ValueError(f"kernel {kid} needs beta > 0")
        if kid == 6 and self.b < 0:
            raise ValueError("kernel 6 needs b >= 0")

    @property
    def kind(self) -> KernelType:
        return _TYPE[self.id]

    def to_json(self) -> dict:
        return {"id": f"K{self.id}", "lambda": self.lam, "beta": self.beta, "b": self.b, "s": self.s}

    @classmethod
    def from_json(cls, obj: dict, n: int | None = None) -> KernelSpec:
        lam = obj["lambda"]
        if isinstance(lam, str):
            lam = parse_lambda(lam, n)
        return cls(obj["id"], float(lam), float(obj.get("beta", 0.0)), float(obj.get("b", 0.0)), obj.get("s", "I"))


def parse_lambda(text, n: int | None) -> float:
    """Accept ``"0.15n"``, ``"n"`` or a plain number."""
    text = str(text).strip()
    if text.endswith("n"):
        if n is None:
            raise ValueError("relative lambda needs the node count")
        ratio = text[:-1].strip().rstrip("*")
        return (float(ratio) if ratio else 1.0) * n
    return float(text)


def derive_alpha(spec: KernelSpec, n: int) -> float:
    lam, beta = spec.lam, spec.beta
    if spec.id == 1:
        return lam / n
    if spec.id == 2:
        return lam / (n + lam)
    if spec.id == 3:
        if not 0 < beta < (n + lam) / n:
            raise ValueError(f"kernel 3 needs beta in (0, {(n + lam) / n}), got {beta}")
        return (n + lam - beta * n) / (n + lam)
    if spec.id == 4:
        return (n * beta + lam) / n
    if spec.id == 5:
        return 2 * lam
    return beta + lam / n


def _scaling(g: Graph, spec: KernelSpec) -> np.ndarray:
    if spec.s == "I":
        return np.ones(g.n)
    if np.any(g.D <= 0):
        raise ValueError("S = D needs every node to have positive degree")
    return g.D.copy()


def _inv_sqrt(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = 1.0 / np.sqrt(v[pos])
    return out


@dataclass(frozen=True, eq=False)
class KernelTransform:
    """``M = a * diag(left) @ X @ (diag(right) - c 1 1^T)``.

    ``row_scale`` is the per-node divisor defining the transformed graph the
    push runs on (``None`` for the plain graph). For Type-L kernels,
    degree-0 nodes are decoupled and their diagonal is ``singleton_diag``.
    """

    alpha: float
    kind: KernelType
    a: float
    left: np.ndarray
    right: np.ndarray
    c: float
    row_scale: np.ndarray | None
    singleton_diag: float

    def dense(self, X: np.ndarray, g: Graph) -> np.ndarray:
        n = len(self.left)
        B = np.diag(self.right) - self.c * np.ones((n, n))
        M = self.a * (self.left[:, None] * (X @ B))
        if self.kind is KernelType.TYPE_L:
            for t in np.flatnonzero(g.d == 0):
                M[t, :] = 0.0
                M[:, t] = 0.0
                M[t, t] = self.singleton_diag
        return M


def kernel_transform(g: Graph, spec: KernelSpec) -> KernelTransform:
    n, lam, beta = g.n, spec.lam, spec.beta
    alpha = derive_alpha(spec, n)
    ones = np.ones(n)
    single = 1.0 / (1.0 / (2 * lam) + 1.0 / (2 * n))
    if spec.id == 1:
        return KernelTransform(alpha, spec.kind, 2 * lam, ones, ones, 0.0, None, single)
    if spec.id in (2, 3):
        a = 2 * n if spec.id == 2 else 2 * lam * n / (n + lam - beta * n)
        return KernelTransform(alpha, spec.kind, a, _inv_sqrt(g.D), np.sqrt(g.D), 0.0, None, single)
    S = _scaling(g, spec)
    if spec.id == 4:
        return KernelTransform(alpha, spec.kind, 2 * lam, 1 / np.sqrt(S), np.sqrt(S), 0.0, S, single)
    if spec.id == 5:
        left = 1.0 / (np.sqrt(S) / (4 * n * lam) + beta / (np.sqrt(S) * 4 * lam ** 2))
        tilde = beta / (2 * lam) + S / (2 * n)
        return KernelTransform(alpha, spec.kind, 1.0, left, np.sqrt(S), 0.0, tilde, single)
    c = spec.b / (alpha + n * spec.b)
    return KernelTransform(alpha, spec.kind, 2 * lam, ones, ones, c, None, single)


@dataclass(frozen=True, eq=False)
class KernelColumn:
    """Approximate column ``t`` of M: sparse ``values`` plus a constant ``shift`` on every entry."""

    t: int
    values: SparseVec
    shift: float
    diag: float

    def to_dense(self, n: int) -> np.ndarray:
        return self.values.to_dense(n) + self.shift


class KernelOperator:
    """Push-based column access to one kernel on one graph.

    Holds the transformed graph view and working buffers, so it should not
    be shared between threads.
    """

    def __init__(self, g: Graph, spec: KernelSpec, eps: float | None = None):
        self.g = g
        self.spec = spec
        self.eps = default_epsilon(g.n) if eps is None else float(eps)
        self.transform = kernel_transform(g, spec)
        self.alpha = self.transform.alpha
        self.cfg = PushConfig(self.alpha, self.eps, spec.kind)
        self.pusher = Pusher(g, self.cfg, self.transform.row_scale)
        self.last_outcome = None

    def basic_column(self, t: int) -> SparseVec:
        """Approximate column ``t`` of the basic kernel on the transformed graph."""
        if self.g.d[t] == 0:
            self.last_outcome = None
            value = 1.0 / self.alpha if self.cfg.kind is KernelType.TYPE_LAP else self.alpha
            return SparseVec(np.array([t]), np.array([value]))
        self.last_outcome = self.pusher.push(t)
        return self.last_outcome.x

    def column(self, t: int) -> KernelColumn:
        tr = self.transform
        t = int(t)
        x = self.basic_column(t)
        if tr.kind is KernelType.TYPE_L and self.g.d[t] == 0:
            vals = SparseVec(np.array([t]), np.array([tr.singleton_diag]))
            return KernelColumn(t, vals, 0.0, tr.singleton_diag)
        scaled = tr.a * tr.left[x.indices] * x.values * tr.right[t]
        # X 1 = 1/alpha for the Laplacian basic kernel
        shift = -tr.a * tr.c / tr.alpha if tr.c else 0.0
        vals = SparseVec(x.indices, scaled)
        return KernelColumn(t, vals, shift, vals.get(t) + shift)


def kernel_column(g: Graph, spec: KernelSpec, eps: float | None, t: int) -> KernelColumn:
    return KernelOperator(g, spec, eps).column(t)


def _check_cap(n: int, cap: int):
    if n > cap:
        raise ValueError(f"dense oracle limited to n <= {cap}, got n = {n}")


def _laplacian(g: Graph) -> np.ndarray:
    W = g.adjacency().toarray()
    return np.diag(g.D) - W


def kernel_inverse(g: Graph, spec: KernelSpec) -> np.ndarray:
    """Dense ``K^-1`` for ``spec`` (degree-0 nodes use the pseudo-inverse of D)."""
    n, beta = g.n, spec.beta
    W = g.adjacency().toarray()
    if spec.id == 1:
        return np.diag(g.D) - W
    if spec.id in (2, 3):
        h = _inv_sqrt(g.D)
        scale = 1.0 if spec.id == 2 else beta
        return np.eye(n) - scale * (h[:, None] * W * h[None, :])
    lap = np.diag(g.D) - W
    if spec.id == 6:
        return lap + spec.b * np.ones((n, n)) + beta * np.eye(n)
    h = 1.0 / np.sqrt(_scaling(g, spec))
    if spec.id == 4:
        return beta * np.eye(n) + h[:, None] * lap * h[None, :]
    return h[:, None] * (beta * np.eye(n) + lap) * h[None, :]


def exact_kernel_matrix(g: Graph, spec: KernelSpec, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``(K^-1/(2 lam) + I/(2n))^-1`` by direct factorization."""
    _check_cap(g.n, cap)
    derive_alpha(spec, g.n)  # validates the parameter ranges
    A = kernel_inverse(g, spec) / (2 * spec.lam) + np.eye(g.n) / (2 * g.n)
    try:
        return la.solve(A, np.eye(g.n), assume_a="sym")
    except la.LinAlgError as exc:
        raise la.LinAlgError(f"kernel system is singular: {exc}") from exc


def exact_basic_kernel(g: Graph, spec: KernelSpec, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense basic kernel that the push approximates for this spec."""
    _check_cap(g.n, cap)
    tr = kernel_transform(g, spec)
    return basic_kernel_matrix(g, tr.alpha, spec.kind, tr.row_scale)


def basic_kernel_matrix(g: Graph, alpha: float, kind, row_scale=None) -> np.ndarray:
    """``alpha (I - (1-alpha) W D^+)^-1`` or ``(alpha I + (D - W) S^-1)^-1``."""
    n = g.n
    W = g.adjacency().toarray()
    if KernelType(kind) is KernelType.TYPE_L:
        Dp = np.where(g.D > 0, 1.0 / np.where(g.D > 0, g.D, 1.0), 0.0)
        return alpha * la.solve(np.eye(n) - (1 - alpha) * W * Dp[None, :], np.eye(n))
    s = np.ones(n) if row_scale is None else row_scale
    return la.solve(alpha * np.eye(n) + (np.diag(g.D) - W) / s[None, :], np.eye(n))


def approximate_kernel_matrix(g: Graph, spec: KernelSpec, eps: float | None = None,
                              cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``M_eps`` (column t from a push at t) and the residual matrix ``R_eps``.

    ``R_eps`` satisfies ``X = X_eps + X R_eps``; for Type-Lap its columns are
    ``alpha * r``.
    """
    _check_cap(g.n, cap)
    op = KernelOperator(g, spec, eps)
    n = g.n
    M = np.zeros((n, n))
    R = np.zeros((n, n))
    scale = op.alpha if spec.kind is KernelType.TYPE_LAP else 1.0
    for t in range(n):
        M[:, t] = op.column(t).to_dense(n)
        if op.last_outcome is not None:
            r = op.last_outcome.r
            R[r.indices, t] = scale * r.values
    return M, R


def residual_condition_norm(g: Graph, spec: KernelSpec, eps: float | None = None,
                            tol: float = 1e-8, max_iter: int = 10_000, cap: int = DENSE_CAP) -> float:
    """Spectral norm of the similarity-transformed residual matrix, by power iteration.

    The similarity is ``D^{-1/2} R D^{1/2}`` for Type-L kernels and uses the
    push's row scaling for the Laplacian kernels (identity for kernels 1 and 6).
    """
    _, R = approximate_kernel_matrix(g, spec, eps, cap)
    tr = kernel_transform(g, spec)
    if spec.kind is KernelType.TYPE_L:
        s = g.D
    else:
        s = np.ones(g.n) if tr.row_scale is None else tr.row_scale
    Rt = _inv_sqrt(s)[:, None] * R * np.sqrt(s)[None, :]
    return spectral_norm(Rt, tol, max_iter)


def spectral_norm(A: np.ndarray, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    if not np.any(A):
        return 0.0
    v = np.random.default_rng(0).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = math.sqrt(nw)
        v = w / nw
        if abs(new - sigma) <= tol * new:
            return new
        sigma = new
    raise RuntimeError(f"power iteration did not converge; last estimate {sigma}")
