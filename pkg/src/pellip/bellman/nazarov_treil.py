"""The two-variable Bellman function Q(zeta, eta) and its derivatives.

For p >= 2, q = p/(p-1) and 0 < delta < 1,

    Q = |zeta|^p + |eta|^q + delta * |zeta|^2 |eta|^(2-q)          if |zeta|^p <= |eta|^q
    Q = |zeta|^p + |eta|^q + delta * (2/p |zeta|^p + (2/q - 1) |eta|^q)   otherwise.

Points are 4-vectors omega = (Re zeta, Im zeta, Re eta, Im eta).  Q is C^1
everywhere and C^2 away from the singular set

    Upsilon = {eta = 0} U {|zeta|^p = |eta|^q}.
"""

from dataclasses import dataclass

import numpy as np

UPSILON_TOL = 1e-9


@dataclass(frozen=True)
class BellmanSpec:
    p: float
    delta: float

    def __post_init__(self):
        if not self.p >= 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def q(self):
        return self.p / (self.p - 1.0)

    def to_json(self):
        return {"p": float(self.p), "q": float(self.q), "delta": float(self.delta)}


def _parts(omega):
    omega = np.asarray(omega, dtype=float)
    zeta, eta = omega[..., :2], omega[..., 2:]
    s2 = np.sum(zeta * zeta, axis=-1)
    t2 = np.sum(eta * eta, axis=-1)
    return zeta, eta, np.sqrt(s2), np.sqrt(t2)


def _pow(x, a):
    """x**a with 0**a = 0 for a > 0, 0**0 = 1 and no warnings at x = 0."""
    if a == 0:
        return np.ones_like(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, np.power(np.where(x > 0, x, 1.0), a), 0.0)
    return out


def first_branch(spec, omega):
    """True where |zeta|^p <= |eta|^q (the mixed-term branch)."""
    _, _, s, t = _parts(omega)
    return _pow(s, spec.p) <= _pow(t, spec.q)


def distance_to_upsilon(spec, omega):
    """min(|eta|, | |zeta|^p - |eta|^q |), the indicator used to skip Upsilon."""
    _, _, s, t = _parts(omega)
    return np.minimum(t, np.abs(_pow(s, spec.p) - _pow(t, spec.q)))


def q_value(spec, omega):
    p, q, delta = spec.p, spec.q, spec.delta
    _, _, s, t = _parts(omega)
    sp, tq = _pow(s, p), _pow(t, q)
    mixed = s * s * _pow(t, 2.0 - q)
    b1 = sp <= tq
    extra = np.where(b1, mixed, (2.0 / p) * sp + (2.0 / q - 1.0) * tq)
    return sp + tq + delta * extra


def q_gradient(spec, omega):
    """Gradient in R^4 (real coordinates)."""
    p, q, delta = spec.p, spec.q, spec.delta
    zeta, eta, s, t = _parts(omega)
    sp, tq = _pow(s, p), _pow(t, q)
    b1 = sp <= tq
    # coefficients multiplying zeta and eta
    cz1 = p * _pow(s, p - 2.0) + 2.0 * delta * _pow(t, 2.0 - q)
    ce1 = q * _pow(t, q - 2.0) + delta * (2.0 - q) * s * s * _pow(t, -q)
    cz2 = (p + 2.0 * delta) * _pow(s, p - 2.0)
    ce2 = (q + delta * (2.0 - q)) * _pow(t, q - 2.0)
    cz = np.where(b1, cz1, cz2)
    ce = np.where(b1, ce1, ce2)
    # at eta = 0 the eta-gradient vanishes (q > 1); avoid inf * 0
    ce = np.where(t > 0, ce, 0.0)
    return np.concatenate([cz[..., None] * zeta, ce[..., None] * eta], axis=-1)


def _outer(u):
    return u[..., :, None] * u[..., None, :]


def q_hessian(spec, omega):
    """Hessian in R^4 off Upsilon; entries are NaN where eta = 0."""
    p, q, delta = spec.p, spec.q, spec.delta
    zeta, eta, s, t = _parts(omega)
    sp, tq = _pow(s, p), _pow(t, q)
    b1 = (sp <= tq)[..., None, None]
    I2 = np.eye(2)
    with np.errstate(divide="ignore", invalid="ignore"):
        zh = np.where(s[..., None] > 0, zeta / s[..., None], 0.0)
        eh = eta / t[..., None]
        tm = np.where(t > 0, t, np.nan)
    Pz = _outer(zh)
    Pe = _outer(eh)
    spm2 = _pow(s, p - 2.0)[..., None, None]
    tqm2 = np.power(tm, q - 2.0)[..., None, None]
    t2mq = np.power(tm, 2.0 - q)[..., None, None]
    tmq = np.power(tm, -q)[..., None, None]
    s2 = (s * s)[..., None, None]

    dzz_pow = p * spm2 * (I2 + (p - 2.0) * Pz)
    dee_pow = q * tqm2 * (I2 + (q - 2.0) * Pe)
    # branch 1: mixed term delta |zeta|^2 |eta|^(2-q)
    zz1 = dzz_pow + 2.0 * delta * t2mq * I2
    ze1 = 2.0 * delta * (2.0 - q) * tmq * (zeta[..., :, None] * eta[..., None, :])
    ee1 = dee_pow + delta * (2.0 - q) * s2 * tmq * (I2 - q * Pe)
    # branch 2: separable
    zz2 = (1.0 + 2.0 * delta / p) * dzz_pow
    ee2 = (1.0 + delta * (2.0 / q - 1.0)) * dee_pow
    zz = np.where(b1, zz1, zz2)
    ze = np.where(b1, ze1, 0.0)
    ee = np.where(b1, ee1, ee2)
    top = np.concatenate([zz, ze], axis=-1)
    bottom = np.concatenate([np.swapaxes(ze, -1, -2), ee], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def eval_q(spec, zeta, eta):
    """Value, gradient and Hessian (None on Upsilon) at a single point."""
    omega = np.concatenate([np.asarray(zeta, float), np.asarray(eta, float)])
    value = float(q_value(spec, omega))
    grad = q_gradient(spec, omega)
    if distance_to_upsilon(spec, omega) <= UPSILON_TOL:
        return value, grad, None
    return value, grad, q_hessian(spec, omega)


def complex_derivatives(spec, omega):
    """(d_zeta Q, d_eta Q) with d_zeta = (d_1 - i d_2) / 2 (batched)."""
    g = q_gradient(spec, omega)
    dz = 0.5 * (g[..., 0] - 1j * g[..., 1])
    de = 0.5 * (g[..., 2] - 1j * g[..., 3])
    return dz, de
