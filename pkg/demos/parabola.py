"""The parabola P_{p,alpha} and its tangency to the critical sector.

The vertex sits at alpha^2 (1/p - 1/p^2), which is largest at p = 2.
Along the parabola |arg| touches arcsin|2/p - 1| at one finite height and
then decreases, so the running supremum equals the critical angle.
"""

import numpy as np

from pellip.spectral import (ParabolaSpec, critical_angle, parabola_samples,
                             tangency_check, touching_height, vertex)

for p in (1.5, 2.0, 3.0, 4.0, 8.0):
    print(f"p = {p}: vertex {vertex(ParabolaSpec(p)):.6f}, "
          f"critical angles {critical_angle(p)[0]:.6f} / {critical_angle(p)[1]:.6f}")

rep = tangency_check(4.0)
print(f"\np = 4: sup |arg| = {rep['sup_arg']:.10f} vs pi/6 = {np.pi / 6:.10f}")
print(f"attained near y = {rep['y_at_sup']:.5f} "
      f"(touching height {touching_height(ParabolaSpec(4.0)):.5f})")
print(f"|arg| at y = 1e6: {rep['arg_at_y_max']:.3e}")

rows = parabola_samples(ParabolaSpec(4.0), np.linspace(-2, 2, 9))
print("\n     y          x        arg")
for y, x, a in rows:
    print(f"{y:+.3f}  {x:9.5f}  {a:+.5f}")
