"""Power-type approximants: f_n, P_p, the sequence P_n and their constants.

With r = p + eps (eps > 0),

    f_n(t) = n^{-eps} t^r                                     for t <= n,
    f_n(t) = (r/2) n^{p-2} t^2 + (1 - r/2) n^p                for t > n,

which is C^1 at t = n.  For omega = (zeta, eta) in R^4,

    P_n(omega) = f_n(|omega|) + K_r (f_n(|zeta|) + f_n(|eta|)),
    P_p(omega) = F_p(omega) + K_p (F_p(zeta) + F_p(eta)),

where K_p = (2 kappa_p)^{p-1} if kappa_p > 1 and 0 otherwise, and
kappa_p = (p - 2) Lambda(A, B) / Delta_p(A, B).
"""

import numpy as np

from ..algebra import joint_bound, joint_delta
from .power import radial_hessian


def kappa(p, A, B):
    dp = joint_delta(p, A, B)
    if dp <= 0:
        raise ValueError(f"Delta_{p}(A, B) = {dp} is not positive")
    return (p - 2.0) * joint_bound(A, B) / dp


def big_k(p, A, B):
    k = kappa(p, A, B)
    return (2.0 * k) ** (p - 1.0) if k > 1 else 0.0


def in_s_kappa(omega, k):
    """Membership in S_kappa = {|zeta| <= |eta|/kappa} U {|eta| <= |zeta|/kappa}.

    For kappa <= 1 this is all of R^4.
    """
    omega = np.asarray(omega, dtype=float)
    s = np.linalg.norm(omega[..., :2], axis=-1)
    t = np.linalg.norm(omega[..., 2:], axis=-1)
    if k <= 1:
        return np.ones(s.shape, dtype=bool)
    return (k * s <= t) | (k * t <= s)


# --------------------------------------------------------------------------
# the one-dimensional profile f_n


def fn_value(t, n, p, eps):
    r = p + eps
    t = np.asarray(t, dtype=float)
    inner = n ** (-eps) * np.power(np.minimum(t, n), r)
    outer = 0.5 * r * n ** (p - 2.0) * t * t + (1.0 - 0.5 * r) * n ** p
    return np.where(t <= n, inner, outer)


def fn_d1(t, n, p, eps):
    r = p + eps
    t = np.asarray(t, dtype=float)
    inner = r * n ** (-eps) * np.power(np.minimum(t, n), r - 1.0)
    outer = r * n ** (p - 2.0) * t
    return np.where(t <= n, inner, outer)


def fn_d2(t, n, p, eps):
    r = p + eps
    t = np.asarray(t, dtype=float)
    inner = r * (r - 1.0) * n ** (-eps) * np.power(np.minimum(t, n), r - 2.0)
    outer = r * n ** (p - 2.0) * np.ones_like(t)
    return np.where(t <= n, inner, outer)


def fn_breakpoint_jumps(n, p, eps):
    """Left/right values and derivatives of f_n at t = n in closed form."""
    r = p + eps
    left = (n ** (-eps) * n ** r, r * n ** (-eps) * n ** (r - 1.0))
    right = (0.5 * r * n ** (p - 2.0) * n * n + (1.0 - 0.5 * r) * n ** p,
             r * n ** (p - 2.0) * n)
    return left, right


# --------------------------------------------------------------------------
# P_p and P_n in R^4


def _radial(omega, f, f1, f2):
    rad = np.linalg.norm(omega, axis=-1)
    return f(rad), f1(rad)[..., None] * omega / np.where(rad > 0, rad, 1.0)[..., None], \
        radial_hessian(omega, f1(rad), f2(rad))


def _combine(omega, K, f, f1, f2):
    omega = np.asarray(omega, dtype=float)
    v0, g0, h0 = _radial(omega, f, f1, f2)
    vz, gz, hz = _radial(omega[..., :2], f, f1, f2)
    ve, ge, he = _radial(omega[..., 2:], f, f1, f2)
    value = v0 + K * (vz + ve)
    grad = g0 + K * np.concatenate([gz, ge], axis=-1)
    hess = h0.copy()
    hess[..., :2, :2] += K * hz
    hess[..., 2:, 2:] += K * he
    return value, grad, hess


def _pos_pow(t, a):
    t = np.asarray(t, dtype=float)
    if a == 0:
        return np.ones_like(t)
    return np.where(t > 0, np.where(t > 0, t, 1.0) ** a, 0.0)


def pp_eval(omega, p, K):
    """Value, gradient and Hessian of P_p (p >= 2, batched)."""
    return _combine(
        omega, K,
        lambda t: _pos_pow(t, p),
        lambda t: p * _pos_pow(t, p - 1.0),
        lambda t: p * (p - 1.0) * _pos_pow(t, p - 2.0))


def pn_eval(omega, n, p, eps, K):
    """Value, gradient and Hessian of P_n (batched)."""
    return _combine(
        omega, K,
        lambda t: fn_value(t, n, p, eps),
        lambda t: fn_d1(t, n, p, eps),
        lambda t: fn_d2(t, n, p, eps))


def growth_constant(p, eps, K):
    """C with |D P_n(omega)| <= C (|zeta|^{p-1} + |eta|^{p-1}) for every n.

    Uses f_n'(t) <= (p + eps) t^{p-1} and
    |omega|^{p-1} <= max(1, 2^{(p-3)/2}) (|zeta|^{p-1} + |eta|^{p-1}).
    """
    return (p + eps) * (max(1.0, 2.0 ** (0.5 * (p - 3.0))) + K)


def fitted_growth(omega, n, p, eps, K):
    """Largest sampled |D P_n| / (|zeta|^{p-1} + |eta|^{p-1})."""
    omega = np.asarray(omega, dtype=float)
    _, grad, _ = pn_eval(omega, n, p, eps, K)
    s = np.linalg.norm(omega[..., :2], axis=-1)
    t = np.linalg.norm(omega[..., 2:], axis=-1)
    return float(np.max(np.linalg.norm(grad, axis=-1)
                        / (s ** (p - 1.0) + t ** (p - 1.0))))
