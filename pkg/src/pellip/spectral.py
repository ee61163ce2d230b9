"""Closed-form spectral objects: the parabola P_{p,alpha} and critical angles.

For p > 1, p != 2 and alpha > 0 the parabola is

    x = alpha^2 [ p^2/(p-2)^2 (y/alpha^2)^2 + 1/p - 1/p^2 ],

and the critical angles are phi*_p = arcsin|2/p - 1| and phi_p = pi/2 - phi*_p.
Along the parabola |arg(x + iy)| reaches phi*_p exactly once on each side,
at |y| = alpha^2 sqrt(p-1) |p-2| / p^2 (the parabola touches the boundary
of the sector of half-angle phi*_p), and tends to 0 as |y| grows.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import delta_p


@dataclass(frozen=True)
class ParabolaSpec:
    p: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def degenerate(self):
        return self.p == 2


@dataclass(frozen=True)
class DegenerateRay:
    """The p = 2 limit: the ray {y = 0, x >= start}."""

    start: float


def vertex(spec: ParabolaSpec):
    """Real part at y = 0: alpha^2 (1/p - 1/p^2) (alpha^2/4 at p = 2)."""
    p = spec.p
    return spec.alpha ** 2 * (1.0 / p - 1.0 / p ** 2)


def parabola_point(spec: ParabolaSpec, y):
    """x + iy on P_{p,alpha}; a DegenerateRay marker when p = 2."""
    if spec.degenerate:
        return DegenerateRay(spec.alpha ** 2 / 4.0)
    p, a2 = spec.p, spec.alpha ** 2
    y = np.asarray(y, dtype=float)
    x = a2 * ((p / (p - 2.0)) ** 2 * (y / a2) ** 2 + 1.0 / p - 1.0 / p ** 2)
    return x + 1j * y


def critical_angle(p):
    """(phi*_p, phi_p) = (arcsin|2/p - 1|, pi/2 - phi*_p)."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    star = float(np.arcsin(abs(2.0 / p - 1.0)))
    return star, 0.5 * np.pi - star


def touching_height(spec: ParabolaSpec):
    """|y| where |arg| is maximal: alpha^2 sqrt(p-1) |p-2| / p^2."""
    p = spec.p
    return spec.alpha ** 2 * np.sqrt(p - 1.0) * abs(p - 2.0) / p ** 2


def parabola_samples(spec: ParabolaSpec, ys):
    """Rows (y, x, arg) for plotting."""
    z = parabola_point(spec, ys)
    if isinstance(z, DegenerateRay):
        raise ValueError("p = 2: the parabola degenerates to a ray")
    z = np.atleast_1d(z)
    return np.stack([z.imag, z.real, np.angle(z)], axis=1)


def tangency_check(p, alpha=1.0, y_max=1e6, decades=6, per_decade=400,
                   inner=4000):
    """Running supremum of |arg| along the parabola against phi*_p.

    The sweep covers |y| in [0, alpha^2] on a uniform grid of ``inner``
    points and then ``decades`` logarithmic decades up to ``y_max``
    (scaled by alpha^2 so that the arguments do not depend on alpha).
    """
    spec = ParabolaSpec(p, alpha)
    if spec.degenerate:
        raise ValueError("p = 2: the parabola degenerates to a ray")
    a2 = alpha ** 2
    s_max = y_max / a2
    s = np.concatenate([np.linspace(0.0, 1.0, inner),
                        np.geomspace(1.0, s_max, decades * per_decade + 1)[1:]]
                       if s_max > 1 else [np.linspace(0.0, s_max, inner)])
    ys = a2 * s
    args = np.abs(np.angle(parabola_point(spec, ys)))
    star, phi = critical_angle(p)
    running = np.maximum.accumulate(args)
    i = int(np.argmax(args))
    return {
        "p": p, "alpha": alpha, "phi_star": star, "phi": phi,
        "sup_arg": float(running[-1]),
        "y_at_sup": float(ys[i]),
        "touching_height": float(touching_height(spec)),
        "gap_at_y_max": float(star - running[-1]),
        "min_margin": float(np.min(star - args)),
        "arg_at_y_max": float(args[-1]),
        "y_max": float(ys[-1]),
        "running_sup_nondecreasing": bool(np.all(np.diff(running) >= 0)),
        "below_sector": bool(np.min(star - args) >= -1e-12),
    }


def sharpness_scan(ps, tol=1e-8):
    """For each p, the largest phi with Delta_p(e^{i phi} I) > 0 versus phi_p.

    The threshold is found by bisection on [0, pi/2] to ``tol``.
    """
    rows = []
    for p in ps:
        _, phi_p = critical_angle(p)
        lo, hi = 0.0, 0.5 * np.pi
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if delta_p(np.exp(1j * mid) * np.eye(1), p) > 0:
                lo = mid
            else:
                hi = mid
        rows.append({"p": float(p), "phi_p": phi_p, "threshold": 0.5 * (lo + hi),
                     "error": abs(0.5 * (lo + hi) - phi_p)})
    return rows
