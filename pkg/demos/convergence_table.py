"""Refine the mesh and watch the shock position converge.

With tau ~ h^(4/3)/10 the successive differences of x_s(4) shrink by about
16 per halving (fourth order); with tau = h/16 the time error dominates and
the ratio drops to about 8.
"""
from dgft import convergence_study

hs = [1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32]
for rule in ("T1", "T4"):
    table = convergence_study(hs, rule)
    print(f"rule {rule}")
    print(f"{'h':>8} {'tau':>10} {'x_s(4)':>20} {'difference':>12} {'ratio':>8}")
    for r, d, q in zip(table.rows, table.differences, table.ratios):
        print(f"{r.h:8.5f} {r.tau:10.3e} {r.x_sc:20.15f} "
              f"{'' if d is None else f'{d:.4e}':>12} {'' if q is None else f'{q:.3f}':>8}")
    print()
