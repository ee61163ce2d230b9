"""Generalized convexity of power functions and of the Bellman function.

First the scalar example A = I, B = 4I: the sampled sphere minimum of the
generalized Hessian of |zeta|^p + |eta|^p changes sign where
|1 - 2/p| = 2 sqrt(ab)/(a+b), that is at p = 10.  Then the Bellman
function Q is certified for a p-elliptic pair after calibrating delta.
"""

import numpy as np

from pellip.algebra import random_p_elliptic
from pellip.bellman import certify as cz
from pellip.bellman.nazarov_treil import BellmanSpec

A, B = np.eye(1), 4 * np.eye(1)
for p in (8.0, 9.5, 10.5, 12.0):
    print(f"p = {p:5}: sampled sphere minimum "
          f"{cz.sphere_min_power(p, A, B, 20_000, seed=0):+.5f}")
p_star = cz.power_sign_change(A, B, 9.0, 11.0, n_samples=20_000, tol=1e-3)
print(f"bisected sign change at p = {p_star:.4f}\n")

rng = np.random.default_rng(1)
p = 4.0
A, B = random_p_elliptic(rng, 2, p), random_p_elliptic(rng, 2, p)
delta, _ = cz.calibrate_delta(p, A, B, seed=2)
cert = cz.certify_q(BellmanSpec(p, delta), A, B, 20_000, seed=3)
print(f"calibrated delta = {delta}")
print(f"strict bound Delta_p lambda / (5 Lambda) = {cert.bound:.5f}")
print(f"smallest sampled H_Q[X,Y]/(|X||Y|)       = {cert.min_normalized_form:.5f}")
print(f"verdict: {cert.verdict}")
print(f"witness re-evaluated: {cz.reevaluate_q_witness(cert, A, B):.5f}")

neg = cz.rigidity_probe(np.exp(0.25j * np.pi) * np.eye(1),
                        cz.flat_then_quadratic(), 20_000)
print(f"\nradial profile max(0, t - 1)^2 under A = e^(i pi/4): "
      f"{neg.verdict} ({neg.min_normalized_form:.4f})")
