"""Catch an unstable time step from the jump indicators before it shows.

tau=1/320 on h=1/32 violates the strengthened step restriction. The scaled
boundary jumps D alternate in sign and grow long before the solution looks
wrong; the detector flags this within a few steps. Falling back to
tau=h/20 after four steps gives a clean run to t=4.
"""
from dgft import run_anti_smoothing_scenario

rep = run_anti_smoothing_scenario()
print(f"first flag: step {rep.first_flag_step} at x={rep.first_flag.boundary_x:.4f} "
      f"(derivative order {rep.first_flag.order})")
for n in (0, 2, 4, 8, 12, 16, 20, 24):
    print(f"step {n:2d}: max |D0| = {rep.amplitude_at(n):.3e}")
print(f"stable run (tau=h/20): max |D0| = {rep.stable_max_D0:.3e}, flags = {rep.stable_flags}")
print(f"recovery: {rep.recovery_status} at t={rep.recovery_final_t:g}, "
      f"flags after the switch = {rep.recovery_flags_after_switch}")
