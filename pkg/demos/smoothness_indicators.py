"""Inspect the spatial and temporal smoothness indicators of one step.

On a smooth DG solution the scaled jumps D^l stay of moderate size; the
orders log_h|J^l| cluster around p+2-l(1+1/p). The temporal indicator
lists the time derivatives of the shock position and of u.
"""
import warnings

import numpy as np

from dgft import CFLWarning, jump_orders, run_preset_sec6

warnings.simplefilter("ignore", CFLWarning)

h = 1 / 32
rec = run_preset_sec6(h, h / 20, T=71 * h / 20)
ind, tmp = rec.spatial[71], rec.temporal[71]
print(f"step {ind.step}, t={ind.t:.5f}, shock at {ind.x_s:.10f}")

orders = jump_orders(ind)
for l in range(ind.p + 1):
    D = np.abs(ind.D[:, l])
    print(f"l={l}: max |M| {np.nanmax(np.abs(ind.M[:, l])):9.3e}  max |D| {np.nanmax(D):9.3e}  "
          f"median order {np.nanmedian(orders[np.isfinite(orders[:, l]), l]):5.2f}  "
          f"(expected {ind.scale_exponents()[l]:.2f})")

for l, (s, u) in enumerate(zip(tmp.shock, tmp.u_maxnorm)):
    print(f"d^{l}/dt^{l}: |x_s| {s:10.4e}   max |u| {u:10.4e}")
