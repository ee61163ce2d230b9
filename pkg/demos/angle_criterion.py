"""Where does p-ellipticity of e^{i phi} I stop?

For a rotated identity the smallest value of the form has the closed form
cos(phi) - |1 - 2/p|.  We compare it with the numerical minimum, find the
range of p for a fixed angle, and bisect the largest admissible angle.
"""

import numpy as np

from pellip.algebra import analyticity_angle, delta_p, p_ellipticity_range
from pellip.spectral import critical_angle, sharpness_scan

phi = 0.9
A = np.exp(1j * phi) * np.eye(2)

print("p      numerical   closed form")
for p in (1.5, 2.0, 3.0, 4.0, 6.0):
    print(f"{p:<6} {delta_p(A, p):+.12f} {np.cos(phi) - abs(1 - 2 / p):+.12f}")

lo, hi, bounded = p_ellipticity_range(A)
print(f"\nphi = {phi}: p-elliptic for p in ({lo:.6f}, {hi:.6f})")
print(f"closed form upper end 2/(1 - cos phi) = {2 / (1 - np.cos(phi)):.6f}")

# the largest angle at each p agrees with pi/2 - arcsin|2/p - 1|
print("\np      threshold    pi/2 - arcsin|2/p-1|")
for row in sharpness_scan([1.5, 3.0, 4.0, 10.0]):
    print(f"{row['p']:<6} {row['threshold']:.9f}  {row['phi_p']:.9f}")

# a real nonsymmetric matrix is p-elliptic for every p
R = np.array([[2.0, 1.0], [-0.5, 1.0]])
print("\nreal matrix, p-range:", p_ellipticity_range(R))
print("analyticity angle at p = 4:", analyticity_angle(R, 4.0))
print("critical angles at p = 4:", critical_angle(4.0))
