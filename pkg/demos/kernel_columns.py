"""
Six kernels from two basic inverses
===================================

Every kernel column is a rescaled push column. This script compares the
push-based column with the dense matrix for each kernel on karate.
"""

import numpy as np

from fastonl import KernelOperator, KernelSpec, derive_alpha, exact_kernel_matrix, karate

g, _ = karate()
n = g.n
specs = [
    KernelSpec(1, 0.15 * n),
    KernelSpec(2, 0.15 * n),
    KernelSpec(3, 0.15 * n, beta=0.9),
    KernelSpec(4, 2.0, beta=0.5, s="D"),
    KernelSpec(5, 0.7, beta=0.3),
    KernelSpec(6, 0.15 * n, beta=0.2, b=0.4),
]

for spec in specs:
    M = exact_kernel_matrix(g, spec)
    op = KernelOperator(g, spec, eps=1e-10)
    err = max(np.abs(op.column(t).to_dense(n) - M[:, t]).max() for t in range(n))
    print(f"K{spec.id} ({spec.kind.value:>3}) alpha={derive_alpha(spec, n):.4f}  "
          f"trace={np.trace(M):9.2f}  max column error={err:.1e}")
