"""Power functions F_r(omega) = |omega|^r on (R^2)^l and their Hessians.

Two closed forms of the generalized Hessian of F_p at a unit omega are
provided.  Both are written in terms of the rotated complex vectors

    sigma_j = exp(-i arg omega_j) * complexify(X_j)

and are used as independent oracles for the generic construction in
:mod:`pellip.bellman.genhess`.
"""

import numpy as np

from ..algebra import as_matrix, complexify, delta_p, bound


def power_value(r, omega):
    omega = np.asarray(omega, dtype=float)
    return np.linalg.norm(omega, axis=-1) ** r


def power_gradient(r, omega):
    omega = np.asarray(omega, dtype=float)
    rad = np.linalg.norm(omega, axis=-1, keepdims=True)
    return r * rad ** (r - 2) * omega


def hess_power(r, omega):
    """r |omega|^{r-2} (I + (r-2) u u^T) with u = omega/|omega| (batched)."""
    omega = np.asarray(omega, dtype=float)
    rad = np.linalg.norm(omega, axis=-1)
    if np.any(rad == 0):
        raise ValueError("hess_power is singular at omega = 0")
    u = omega / rad[..., None]
    m = omega.shape[-1]
    outer = u[..., :, None] * u[..., None, :]
    scale = (r * rad ** (r - 2))[..., None, None]
    return scale * (np.eye(m) + (r - 2) * outer)


def radial_hessian(omega, g1, g2):
    """Hessian of g(|omega|) given g'(|omega|) and g''(|omega|) (batched).

    Uses g'' u u^T + (g'/|omega|)(I - u u^T).  At omega = 0 the smooth
    limit g''(0) I is returned.
    """
    omega = np.asarray(omega, dtype=float)
    rad = np.linalg.norm(omega, axis=-1)
    m = omega.shape[-1]
    safe = np.where(rad > 0, rad, 1.0)
    u = omega / safe[..., None]
    outer = u[..., :, None] * u[..., None, :]
    g1r = np.where(rad > 0, g1 / safe, g2)
    return (g2[..., None, None] * outer
            + g1r[..., None, None] * (np.eye(m) - outer))


def _split(omega, X, d):
    omega = np.asarray(omega, dtype=float)
    X = np.asarray(X, dtype=float)
    l = omega.shape[-1] // 2
    w = omega[..., 0::2] + 1j * omega[..., 1::2]
    Xs = X.reshape(X.shape[:-1] + (l, 2 * d))
    sigma = np.exp(-1j * np.angle(w))[..., None] * complexify(Xs)
    return w, sigma


def _re_inner(u, v):
    return np.real(np.sum(u * np.conj(v), axis=-1))


def formula_one(p, omega, matrices, X):
    """p^{-1} H[omega; X] via the Re-sigma cross-term expansion.

    ``omega`` must be a unit vector in R^{2l}; ``matrices`` is a list of l
    complex d x d matrices and ``X`` has length 2 d l.
    """
    mats = [as_matrix(A) for A in matrices]
    d = mats[0].shape[0]
    w, sigma = _split(omega, X, d)
    l = len(mats)
    absw = np.abs(w)
    Asig = np.stack([sigma[..., j, :] @ mats[j].T for j in range(l)], axis=-2)
    total = np.sum(_re_inner(Asig, sigma), axis=-1)
    resig = sigma.real.astype(complex)
    for j in range(l):
        for k in range(l):
            total = total + (p - 2) * absw[..., j] * absw[..., k] * _re_inner(
                Asig[..., j, :], resig[..., k, :])
    return total


def formula_two(p, omega, matrices, X):
    """p^{-1} H[omega; X] via the I_p diagonal and off-diagonal split."""
    mats = [as_matrix(A) for A in matrices]
    d = mats[0].shape[0]
    w, sigma = _split(omega, X, d)
    l = len(mats)
    absw = np.abs(w)
    Asig = np.stack([sigma[..., j, :] @ mats[j].T for j in range(l)], axis=-2)
    ip_sigma = sigma + (1 - 2.0 / p) * np.conj(sigma)
    diag = ((1 - absw ** 2) * _re_inner(Asig, sigma)
            + 0.5 * p * absw ** 2 * _re_inner(Asig, ip_sigma))
    total = np.sum(diag, axis=-1)
    resig = sigma.real.astype(complex)
    for j in range(l):
        for k in range(l):
            if j != k:
                total = total + (p - 2) * absw[..., j] * absw[..., k] * _re_inner(
                    Asig[..., j, :], resig[..., k, :])
    return total


def corollary_lower_bound(p, omega, matrices, X):
    """|X|^2 (Delta_p - (p-2) Lambda sum_{j<k} |omega_j||omega_k|).

    A lower bound for p^{-1} H[omega; X] when p >= 2 and |omega| = 1.
    """
    mats = [as_matrix(A) for A in matrices]
    omega = np.asarray(omega, dtype=float)
    absw = np.hypot(omega[..., 0::2], omega[..., 1::2])
    dp = min(delta_p(A, p) for A in mats)
    lam = max(float(bound(A)) for A in mats)
    l = len(mats)
    cross = sum(absw[..., j] * absw[..., k]
                for j in range(l) for k in range(j + 1, l))
    X = np.asarray(X, dtype=float)
    return np.sum(X ** 2, axis=-1) * (dp - (p - 2) * lam * cross)
