"""
Push cost against its bounds
============================

Measured work of FIFO push over an epsilon grid, next to the global bound,
the epoch-based local bound and power iteration. For Type-Lap the quoted
``1/(alpha eps)`` form is shown as well; it undercounts the work.
"""

from fastonl import karate
from fastonl.harness import default_eps_grid, export_bound_comparison, sample_sources

g, _ = karate()
sources = sample_sources(g, 34)

for kind, alpha in (("L", 0.1), ("L", 0.9), ("Lap", 0.5)):
    print(f"\nkind={kind} alpha={alpha}")
    print(f"{'eps':>10} {'R_T':>9} {'global':>10} {'local':>10} {'quoted':>10} {'over quoted':>11}")
    for row in export_bound_comparison(g, alpha, default_eps_grid(alpha, g.n), sources, kind=kind):
        print(f"{row['eps']:10.2e} {row['rt_mean']:9.1f} {row['andersen']:10.1f} {row['local']:10.1f} "
              f"{row['andersen_literal']:10.1f} {row['andersen_literal_violations']:11d}")
