"""Mollified Bellman function, mollified approximants and R_{n,nu}.

Convolutions with the radial bump

    phi_nu(y) ~ exp(-1 / (1 - |y/nu|^2))    on |y| < nu,  y in R^4,

are computed by the trapezoidal rule on the lattice (nu/m) Z^4 restricted
to the open ball (m >= 8 nodes per radius), with weights normalized to sum
to one.  Since Q is C^1 the gradient of Q * phi is (DQ) * phi, and the
Hessian is (D^2 Q) * phi with quadrature nodes moved 1e-7 off {eta = 0}.
Nodes that land exactly on the branch interface use the one-sided Hessian
of the separable branch, which is the limit of a 1e-7 perturbation.

The heavy loops are compiled with numba.
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from .nazarov_treil import BellmanSpec

MIN_POINTS_PER_RADIUS = 8
ETA_SHIFT = 1e-7


@dataclass(frozen=True)
class MollifierSpec:
    """Radial bump of radius ``nu`` sampled with ``radius`` nodes per radius."""

    nu: float
    radius: int = MIN_POINTS_PER_RADIUS

    def __post_init__(self):
        if not 0 < self.nu <= 1:
            raise ValueError(f"nu must lie in (0, 1], got {self.nu}")
        if self.radius < MIN_POINTS_PER_RADIUS:
            raise ValueError(
                f"quadrature too coarse: {self.radius} < "
                f"{MIN_POINTS_PER_RADIUS} points per radius")

    @property
    def step(self):
        return self.nu / self.radius

    def to_json(self):
        return {"nu": self.nu, "quadrature_radius": self.radius,
                "quadrature_step": self.step}


_NODE_CACHE = {}


def quadrature(moll):
    """Nodes (K, 4) and weights (K,) of the discretized bump."""
    key = (moll.nu, moll.radius)
    if key not in _NODE_CACHE:
        m = moll.radius
        k = np.arange(-m, m + 1)
        grid = np.stack(np.meshgrid(k, k, k, k, indexing="ij"), axis=-1)
        grid = grid.reshape(-1, 4)
        r2 = np.sum(grid * grid, axis=1) / float(m * m)
        inside = r2 < 1.0
        grid, r2 = grid[inside], r2[inside]
        w = np.exp(-1.0 / (1.0 - r2))
        w /= w.sum()
        _NODE_CACHE[key] = (grid * moll.step, w)
    return _NODE_CACHE[key]


# --------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True)
def _q_point(z1, z2, e1, e2, p, q, delta, out_g, out_h):
    """Value of Q; gradient and Hessian written into out_g, out_h."""
    s2 = z1 * z1 + z2 * z2
    t2 = e1 * e1 + e2 * e2
    shifted = t2 < ETA_SHIFT * ETA_SHIFT
    if shifted:
        e1 += ETA_SHIFT
        t2 = e1 * e1 + e2 * e2
    lt = 0.5 * np.log(t2)
    tq = np.exp(q * lt)
    if s2 > 0.0:
        sp = np.exp(0.5 * p * np.log(s2))
        spm2 = sp / s2
        czz = p * (p - 2.0) * spm2 / s2
    else:
        sp = 0.0
        spm2 = 1.0 if p == 2.0 else 0.0
        czz = 0.0
    tqm2 = tq / t2
    tmq = 1.0 / tq
    t2mq = t2 / tq
    cee = q * (q - 2.0) * tqm2 / t2

    if sp <= tq:
        val = sp + tq + delta * s2 * t2mq
        cz = p * spm2 + 2.0 * delta * t2mq
        ce = q * tqm2 + delta * (2.0 - q) * s2 * tmq
        # zeta-zeta block: a I + b z z^T
        a_zz = p * spm2 + 2.0 * delta * t2mq
        b_zz = czz
        # eta-eta block: a I + b e e^T
        mix = delta * (2.0 - q) * s2 * tmq
        a_ee = q * tqm2 + mix
        b_ee = cee - mix * q / t2
        c_ze = 2.0 * delta * (2.0 - q) * tmq
    else:
        fz = 1.0 + 2.0 * delta / p
        fe = 1.0 + delta * (2.0 / q - 1.0)
        val = fz * sp + fe * tq
        cz = fz * p * spm2
        ce = fe * q * tqm2
        a_zz = fz * p * spm2
        b_zz = fz * czz
        a_ee = fe * q * tqm2
        b_ee = fe * cee
        c_ze = 0.0

    out_g[0] = cz * z1
    out_g[1] = cz * z2
    if shifted:
        # D_eta Q tends to 0 as eta -> 0 on both branches (Q is C^1)
        out_g[2] = 0.0
        out_g[3] = 0.0
    else:
        out_g[2] = ce * e1
        out_g[3] = ce * e2
    z = (z1, z2)
    e = (e1, e2)
    for i in range(2):
        for j in range(2):
            out_h[i, j] = b_zz * z[i] * z[j]
            out_h[2 + i, 2 + j] = b_ee * e[i] * e[j]
            out_h[i, 2 + j] = c_ze * z[i] * e[j]
            out_h[2 + j, i] = out_h[i, 2 + j]
        out_h[i, i] += a_zz
        out_h[2 + i, 2 + i] += a_ee
    return val


@numba.njit(cache=True)
def _conv_q_kernel(omegas, nodes, weights, p, q, delta, vals, grads, hess):
    g = np.empty(4)
    h = np.empty((4, 4))
    for m in range(omegas.shape[0]):
        w0, w1, w2, w3 = omegas[m, 0], omegas[m, 1], omegas[m, 2], omegas[m, 3]
        v = 0.0
        ga = np.zeros(4)
        ha = np.zeros((4, 4))
        for k in range(nodes.shape[0]):
            wk = weights[k]
            v += wk * _q_point(w0 - nodes[k, 0], w1 - nodes[k, 1],
                               w2 - nodes[k, 2], w3 - nodes[k, 3],
                               p, q, delta, g, h)
            for i in range(4):
                ga[i] += wk * g[i]
                for j in range(4):
                    ha[i, j] += wk * h[i, j]
        vals[m] = v
        grads[m, :] = ga
        hess[m, :, :] = ha


@numba.njit(cache=True)
def _radial_fn(r2, n, p, eps):
    """f_n(r), f_n'(r)/r and (f_n'' - f_n'/r)/r^2 as functions of r^2."""
    pe = p + eps
    if r2 <= n * n:
        if r2 == 0.0:
            return 0.0, 0.0, 0.0
        lr = 0.5 * np.log(r2)
        base = n ** (-eps) * np.exp(pe * lr)
        return base, pe * base / r2, pe * (pe - 2.0) * base / (r2 * r2)
    c = pe * n ** (p - 2.0)
    return 0.5 * c * r2 + (1.0 - 0.5 * pe) * n ** p, c, 0.0


@numba.njit(cache=True)
def _conv_pn_kernel(omegas, nodes, weights, n, p, eps, K, vals, grads, hess):
    x = np.empty(4)
    for m in range(omegas.shape[0]):
        v = 0.0
        ga = np.zeros(4)
        ha = np.zeros((4, 4))
        for k in range(nodes.shape[0]):
            wk = weights[k]
            for i in range(4):
                x[i] = omegas[m, i] - nodes[k, i]
            sz = x[0] * x[0] + x[1] * x[1]
            se = x[2] * x[2] + x[3] * x[3]
            f0, a0, b0 = _radial_fn(sz + se, n, p, eps)
            fz, az, bz = _radial_fn(sz, n, p, eps)
            fe, ae, be = _radial_fn(se, n, p, eps)
            v += wk * (f0 + K * (fz + fe))
            for i in range(4):
                if i < 2:
                    ai, bi = a0 + K * az, K * bz
                else:
                    ai, bi = a0 + K * ae, K * be
                ga[i] += wk * ai * x[i]
                for j in range(4):
                    same = (i < 2) == (j < 2)
                    hij = b0 * x[i] * x[j]
                    if same:
                        hij += bi * x[i] * x[j]
                    if i == j:
                        hij += ai
                    ha[i, j] += wk * hij
        vals[m] = v
        grads[m, :] = ga
        hess[m, :, :] = ha


def _as_points(omega):
    omega = np.ascontiguousarray(np.atleast_2d(np.asarray(omega, dtype=float)))
    if omega.shape[-1] != 4:
        raise ValueError("points must be 4-vectors")
    return omega


def mollified_q(spec: BellmanSpec, moll: MollifierSpec, omega):
    """Value, gradient and Hessian of Q * phi_nu at one or many points."""
    pts = _as_points(omega)
    nodes, w = quadrature(moll)
    M = pts.shape[0]
    vals, grads, hess = np.empty(M), np.empty((M, 4)), np.empty((M, 4, 4))
    _conv_q_kernel(pts, nodes, w, float(spec.p), float(spec.q),
                   float(spec.delta), vals, grads, hess)
    if np.ndim(omega) == 1:
        return vals[0], grads[0], hess[0]
    return vals, grads, hess


def mollified_pn(n, p, eps, K, moll: MollifierSpec, omega):
    """Value, gradient and Hessian of P_n * phi_nu at one or many points."""
    pts = _as_points(omega)
    nodes, w = quadrature(moll)
    M = pts.shape[0]
    vals, grads, hess = np.empty(M), np.empty((M, 4)), np.empty((M, 4, 4))
    _conv_pn_kernel(pts, nodes, w, float(n), float(p), float(eps), float(K),
                    vals, grads, hess)
    if np.ndim(omega) == 1:
        return vals[0], grads[0], hess[0]
    return vals, grads, hess


def quadrature_value_q(spec, moll, omega):
    """Plain quadrature sum of Q values (used as a finite-difference oracle)."""
    from .nazarov_treil import q_value
    nodes, w = quadrature(moll)
    pts = _as_points(omega)
    return np.array([np.dot(w, q_value(spec, x - nodes)) for x in pts])


# --------------------------------------------------------------------------
# cutoff


def cutoff(omega, n):
    """psi_n(omega) = psi(omega / n): value, gradient and Hessian.

    psi is radial, equal to 1 on |x| <= 3 and 0 on |x| >= 4, with the C^2
    quintic transition 1 - (10u^3 - 15u^4 + 6u^5), u = |x| - 3.
    """
    omega = np.asarray(omega, dtype=float)
    rad = np.linalg.norm(omega, axis=-1)
    u = np.clip(rad / n - 3.0, 0.0, 1.0)
    val = 1.0 - u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)
    d1 = -30.0 * u * u * (1.0 - u) ** 2 / n
    d2 = -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (n * n)
    safe = np.where(rad > 0, rad, 1.0)
    unit = omega / safe[..., None]
    grad = d1[..., None] * unit
    outer = unit[..., :, None] * unit[..., None, :]
    hess = (d2[..., None, None] * outer
            + (d1 / safe)[..., None, None] * (np.eye(omega.shape[-1]) - outer))
    return val, grad, hess


# --------------------------------------------------------------------------
# R_{n, nu}


@dataclass
class ApproximantSpec:
    """Parameters of R_{n,nu} = psi_n (Q * phi_nu) + C1 nu^{q-2} (P_n * phi_nu)."""

    n: float
    nu: float
    epsilon: float
    kappa: float
    big_k: float
    c1: float = None
    radius: int = MIN_POINTS_PER_RADIUS
    extra: dict = field(default_factory=dict)

    @property
    def mollifier(self):
        return MollifierSpec(self.nu, self.radius)

    def to_json(self):
        return {"n": self.n, "nu": self.nu, "epsilon": self.epsilon,
                "kappa": self.kappa, "bigK": self.big_k, "C1": self.c1,
                "mollifier": self.mollifier.to_json(),
                "cutoff": {"inner": 3.0 * self.n, "outer": 4.0 * self.n,
                           "profile": "quintic"}}


def r_parts(spec: ApproximantSpec, bellman: BellmanSpec, omega, q_parts=None):
    """Pieces of R_{n,nu} that do not involve C1.

    Returns ``(a, b)`` where each is a (value, gradient, Hessian) triple and
    R = a + C1 * b.  ``q_parts`` may pass a precomputed mollified Q.
    """
    moll = spec.mollifier
    pts = _as_points(omega)
    if q_parts is None:
        q_parts = mollified_q(bellman, moll, pts)
    qv, qg, qh = q_parts
    pv, pg, ph = mollified_pn(spec.n, bellman.p, spec.epsilon, spec.big_k,
                              moll, pts)
    sv, sg, sh = cutoff(pts, spec.n)
    av = sv * qv
    ag = sv[:, None] * qg + qv[:, None] * sg
    ah = (sv[:, None, None] * qh + qv[:, None, None] * sh
          + sg[:, :, None] * qg[:, None, :] + qg[:, :, None] * sg[:, None, :])
    scale = spec.nu ** (bellman.q - 2.0)
    return (av, ag, ah), (scale * pv, scale * pg, scale * ph)


def eval_r(spec: ApproximantSpec, bellman: BellmanSpec, omega):
    """Value, gradient and Hessian of R_{n,nu} (batched)."""
    if spec.c1 is None:
        raise ValueError("C1 has not been calibrated")
    (av, ag, ah), (bv, bg, bh) = r_parts(spec, bellman, omega)
    out = (av + spec.c1 * bv, ag + spec.c1 * bg, ah + spec.c1 * bh)
    if np.ndim(omega) == 1:
        return tuple(x[0] for x in out)
    return out
