"""Semigroups on a grid: L^p contractivity and the Bellman energy.

On an interval with 128 cells the semigroup generated by e^{i phi} I is
contractive in L^4 when phi lies below the critical angle, while beyond it
the harness reports a violation or an inconclusive run.  For a p-elliptic
pair the energy E(t) = sum Q(T_t f, T_t g) h decreases and its derivative
matches a centred difference.
"""

import numpy as np

from pellip.algebra import random_p_elliptic
from pellip.bellman import certify as cz
from pellip.bellman.nazarov_treil import BellmanSpec
from pellip.semigroup.domain import interval
from pellip.semigroup.experiments import contractivity, heat_flow_trace, smooth_data
from pellip.semigroup.operator import assemble_operator
from pellip.spectral import critical_angle

p = 4.0
dom = interval(128)
phi_p = critical_angle(p)[1]
for phi in (0.5, phi_p - 0.05, phi_p + 0.2):
    rep = contractivity(assemble_operator(np.exp(1j * phi) * np.eye(1), dom), p,
                        n_states=20, seed=0)
    print(f"phi = {phi:.3f}  Delta_p = {rep['delta_p']:+.4f}  "
          f"worst ratio {rep['worst_ratio']:.8f}  {rep['verdict']}")

rng = np.random.default_rng(0)
A, B = random_p_elliptic(rng, 1, p), random_p_elliptic(rng, 1, p)
delta, _ = cz.calibrate_delta(p, A, B)
opA, opB = assemble_operator(A, dom), assemble_operator(B, dom)
f, g = smooth_data(opA, rng, 1)[:, 0], smooth_data(opB, rng, 1)[:, 0]
times = np.geomspace(1e-4, 0.5, 12)
trace = heat_flow_trace(BellmanSpec(p, delta), opA, opB, f, g, times)
print("\nt          E(t)        -E' formula  -E' centred")
for t, E, a, c in zip(times, trace.energy, trace.extra["rate_a"],
                      trace.extra["rate_fd"]):
    print(f"{t:.3e}  {E:.6e}  {a:.6e}  {c:.6e}")
trace.write_csv("heat_flow_trace.csv", p, p / (p - 1))
print("trace written to heat_flow_trace.csv")
