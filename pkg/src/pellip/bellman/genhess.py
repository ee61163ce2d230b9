"""Generalized Hessians and their minimal normalized quadratic forms.

For Phi on (R^2)^k and complex d x d matrices A_1, ..., A_k the generalized
Hessian at omega is the real 2kd x 2kd matrix

    H = (M(A_1^*) + ... + M(A_k^*)) (D^2 Phi(omega) kron I_d)

(block-diagonal sum of adjoint real forms).  Vectors Xi = (X_1, ..., X_k)
are stacked with X_j = (Re xi_j, Im xi_j) in R^{2d}.

Two normalizations of the quadratic form <H Xi, Xi> are used:

* ``sphere``: minimum over |Xi| = 1, the smallest eigenvalue of sym(H);
* ``product`` (k = 2): minimum of H[X, Y] / (|X| |Y|) over X, Y != 0.
"""

import numpy as np

from ..algebra import as_matrix, real_form


def kron_identity(hess, d):
    """Batched ``kron(hess, I_d)``."""
    hess = np.asarray(hess, dtype=float)
    m = hess.shape[-1]
    eye = np.eye(d)
    out = hess[..., :, None, :, None] * eye[:, None, :]
    return out.reshape(hess.shape[:-2] + (m * d, m * d))


def block_adjoint_real_forms(matrices):
    mats = [as_matrix(A) for A in matrices]
    d = mats[0].shape[0]
    if any(A.shape != (d, d) for A in mats):
        raise ValueError("all matrices must share the same dimension")
    k = len(mats)
    out = np.zeros((2 * k * d, 2 * k * d))
    for j, A in enumerate(mats):
        s = slice(2 * d * j, 2 * d * (j + 1))
        out[s, s] = real_form(A).T
    return out


def gen_hessian(hess, matrices):
    """Generalized Hessian matrix for a (batched) ordinary Hessian."""
    hess = np.asarray(hess, dtype=float)
    mats = [as_matrix(A) for A in matrices]
    k, d = len(mats), mats[0].shape[0]
    if hess.shape[-1] != 2 * k or hess.shape[-2] != 2 * k:
        raise ValueError(
            f"Hessian of size {hess.shape[-2:]} does not match {k} matrices")
    return block_adjoint_real_forms(mats) @ kron_identity(hess, d)


def gen_hess_form(hess, matrices, Xs):
    """<H Xi, Xi> for Xi the concatenation of ``Xs``."""
    mats = [as_matrix(A) for A in matrices]
    Xi = np.concatenate([np.asarray(X, dtype=float) for X in Xs], axis=-1)
    d = mats[0].shape[0]
    if Xi.shape[-1] != 2 * d * len(mats):
        raise ValueError("vector length does not match the matrices")
    H = gen_hessian(hess, mats)
    return np.einsum("...i,...ij,...j->...", Xi, H, Xi)


def sym(H):
    return 0.5 * (H + np.swapaxes(H, -1, -2))


# --------------------------------------------------------------------------
# sphere normalization


def min_form_sphere(H):
    """Smallest eigenvalue and eigenvector of sym(H) (batched)."""
    w, V = np.linalg.eigh(sym(H))
    return w[..., 0], V[..., :, 0]


# --------------------------------------------------------------------------
# product normalization


def split_blocks(H, m):
    """Return (P, R, S) with H[X, Y] = X'PX + X'RY + Y'SY, X of size m."""
    Hs = sym(H)
    P = Hs[..., :m, :m]
    S = Hs[..., m:, m:]
    R = 2.0 * Hs[..., :m, m:]
    return P, R, S


def product_objective(P, R, S, x, y):
    """x'Ry + 2 sqrt(x'Px y'Sy) for unit x, y (batched)."""
    px = np.einsum("...i,...ij,...j->...", x, P, x)
    sy = np.einsum("...i,...ij,...j->...", y, S, y)
    rxy = np.einsum("...i,...ij,...j->...", x, R, y)
    return rxy + 2.0 * np.sqrt(np.maximum(px, 0.0) * np.maximum(sy, 0.0))


def _balance_newton(Hs, m, s):
    """Balance g(s) = |z_y|^2 - |z_x|^2 of the lowest eigenvector and g'(s).

    Also returns the relative gap between the two lowest eigenvalues.

    With M = D_s Hs D_s and J = diag(-I, I) one has M' = (J M + M J) / 2,
    so first order perturbation gives
    g' = sum_{k > 0} (l_0 + l_k) / (l_0 - l_k) (v_k' J z)^2 <= 0.
    """
    D = np.concatenate([np.repeat(np.exp(-0.5 * s)[:, None], m, axis=1),
                        np.repeat(np.exp(0.5 * s)[:, None], m, axis=1)], axis=1)
    w, V = np.linalg.eigh(D[:, :, None] * Hs * D[:, None, :])
    sign = np.concatenate([-np.ones(m), np.ones(m)])
    z = V[:, :, 0]
    g = np.einsum("ni,i,ni->n", z, sign, z)
    c = np.einsum("nik,i,ni->nk", V[:, :, 1:], sign, z)
    gap = w[:, :1] - w[:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(gap < 0, (w[:, :1] + w[:, 1:]) / gap * c * c, -np.inf)
    rel_gap = (w[:, 1] - w[:, 0]) / np.maximum(np.abs(w).max(axis=1), 1e-300)
    return g, terms.sum(axis=1), rel_gap


def _product_psd(Hs, m, width=30.0, tol=1e-13, max_iter=200):
    """c* = max_t 2 lambda_min(D_t Hs D_t) for positive semidefinite Hs.

    For every t and X, Y one has H[X, Y] >= lambda (t|X|^2 + |Y|^2/t)
    >= 2 lambda |X||Y|, so each 2 lambda_min is a lower bound.  With
    s = log t the derivative is lambda (|z_y|^2 - |z_x|^2) for the unit
    eigenvector z, which decreases from +1 to -1 in sign; at its root the
    eigenvector splits evenly between the blocks and attains the bound.
    The root is found by Newton's method safeguarded by bisection, from a
    bracket grown around the crossing of the block minima.  Near block
    diagonal matrices g jumps at a crossing of the two lowest eigenvalues;
    the iteration stops once they agree to 1e-10.
    """
    n = Hs.shape[0]
    lp = np.linalg.eigvalsh(Hs[:, :m, :m])[:, 0]
    ls = np.linalg.eigvalsh(Hs[:, m:, m:])[:, 0]
    # the blocks scale as e^{-s} P and e^{s} S; for block diagonal Hs the
    # root is where their lowest eigenvalues cross
    centre = 0.5 * np.log(np.maximum(lp, 1e-300) / np.maximum(ls, 1e-300))
    centre = np.clip(centre, -300.0, 300.0)
    a = centre.copy()
    b = centre.copy()
    ga = np.ones(n)
    gb = -np.ones(n)
    todo = np.arange(n)
    rad = 1e-6
    # grow a bracket around the crossing until g changes sign
    while todo.size:
        ga[todo] = _balance_newton(Hs[todo], m, centre[todo] - rad)[0]
        gb[todo] = _balance_newton(Hs[todo], m, centre[todo] + rad)[0]
        a[todo], b[todo] = centre[todo] - rad, centre[todo] + rad
        if rad >= width:
            break
        todo = todo[(ga[todo] <= 0) | (gb[todo] >= 0)]
        rad = min(100.0 * rad, width)
    s = np.where(ga <= 0, a, np.where(gb >= 0, b, centre))
    open_ = (ga > 0) & (gb < 0)
    for _ in range(max_iter):
        idx = np.nonzero(open_)[0]
        if idx.size == 0:
            break
        sc = s[idx]
        g, dg, gap = _balance_newton(Hs[idx], m, sc)
        right = g < 0
        b[idx] = np.where(right, sc, b[idx])
        a[idx] = np.where(right, a[idx], sc)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = sc - g / dg
        lo, hi = a[idx], b[idx]
        ok = np.isfinite(step) & (step > lo) & (step < hi)
        s[idx] = np.where(ok, step, 0.5 * (lo + hi))
        # a degenerate lowest pair is balanced by _balanced_witness
        done = (np.abs(g) < tol) | (hi - lo < tol) | (gap < 1e-10)
        s[idx[done]] = sc[done]
        open_[idx[done]] = False
    return _balanced_witness(Hs, m, s)


def _balanced_witness(Hs, m, s):
    """Bound 2 lambda_min at s and a witness with |X| = |Y| where possible.

    When the two lowest eigenvalues (nearly) coincide at the root, as for
    block-diagonal Hs, an eigenvector may sit in a single block; the
    balanced witness is then taken from the lowest eigenspace.
    """
    D = np.concatenate([np.repeat(np.exp(-0.5 * s)[:, None], m, axis=1),
                        np.repeat(np.exp(0.5 * s)[:, None], m, axis=1)], axis=1)
    w, V = np.linalg.eigh(D[:, :, None] * Hs * D[:, None, :])
    z = V[:, :, 0].copy()
    sign = np.concatenate([-np.ones(m), np.ones(m)])
    b11 = np.einsum("ni,i,ni->n", z, sign, z)
    scale = np.abs(w).max(axis=1)
    for i in np.nonzero(np.abs(b11) > 1e-6)[0]:
        # balance form on the (near-)degenerate lowest eigenspace
        k = int(np.sum(w[i] - w[i, 0] <= 1e-9 * scale[i]))
        if k < 2:
            continue
        Vc = V[i, :, :k]
        g, U = np.linalg.eigh((Vc.T * sign) @ Vc)
        if g[0] > 0 or g[-1] < 0:
            continue
        zz = Vc @ (np.sqrt(g[-1]) * U[:, 0] + np.sqrt(-g[0]) * U[:, -1])
        z[i] = zz / np.linalg.norm(zz)
    x = D * z
    return 2.0 * w[:, 0], x[:, :m], x[:, m:]


def _product_descent(P, R, S, rng, n_starts=8, max_iter=500, gtol=1e-12):
    """Local minimization of the reduced objective on unit x, y (batched).

    Riemannian gradient descent with Armijo backtracking from the split
    lowest eigenvector of sym(H), the block eigenvectors and random starts;
    the best end point per matrix is kept.  The witness is rescaled so that
    the plain normalized form equals the reduced value.
    """
    n, m = P.shape[0], P.shape[1]
    Hs = np.block([[P, 0.5 * R], [0.5 * np.swapaxes(R, 1, 2), S]])
    z = np.linalg.eigh(Hs)[1][:, :, 0]
    starts = [(z[:, :m], z[:, m:]),
              (np.linalg.eigh(P)[1][:, :, 0], np.linalg.eigh(S)[1][:, :, 0])]
    for _ in range(max(0, n_starts - len(starts))):
        starts.append((rng.standard_normal((n, m)), rng.standard_normal((n, m))))

    def unit(v):
        nv = np.linalg.norm(v, axis=1, keepdims=True)
        return np.where(nv > 0, v / np.where(nv > 0, nv, 1.0), 1.0 / np.sqrt(m))

    def grad(x, y):
        px = np.einsum("ni,nij,nj->n", x, P, x)
        sy = np.einsum("ni,nij,nj->n", y, S, y)
        ratio = np.sqrt(np.maximum(sy, 1e-300) / np.maximum(px, 1e-300))
        gx = 2.0 * ratio[:, None] * np.einsum("nij,nj->ni", P, x) \
            + np.einsum("nij,nj->ni", R, y)
        gy = 2.0 / ratio[:, None] * np.einsum("nij,nj->ni", S, y) \
            + np.einsum("nji,nj->ni", R, x)
        gx -= np.sum(gx * x, axis=1, keepdims=True) * x
        gy -= np.sum(gy * y, axis=1, keepdims=True) * y
        return gx, gy

    best = np.full(n, np.inf)
    bx = np.zeros((n, m))
    by = np.zeros((n, m))
    for x, y in starts:
        x, y = unit(x), unit(y)
        val = product_objective(P, R, S, x, y)
        step = np.ones(n)
        active = np.ones(n, dtype=bool)
        for _ in range(max_iter):
            gx, gy = grad(x, y)
            g2 = np.sum(gx * gx, axis=1) + np.sum(gy * gy, axis=1)
            active &= g2 > gtol ** 2 * np.maximum(1.0, val * val)
            if not active.any():
                break
            xn = unit(x - step[:, None] * gx)
            yn = unit(y - step[:, None] * gy)
            new = product_objective(P, R, S, xn, yn)
            ok = active & (new <= val - 1e-4 * step * g2)
            x = np.where(ok[:, None], xn, x)
            y = np.where(ok[:, None], yn, y)
            val = np.where(ok, new, val)
            step = np.where(ok, np.minimum(2.0 * step, 1e6),
                            np.where(active, 0.5 * step, step))
            active &= step > 1e-14
        better = val < best
        best = np.where(better, val, best)
        bx = np.where(better[:, None], x, bx)
        by = np.where(better[:, None], y, by)
    px = np.einsum("ni,nij,nj->n", bx, P, bx)
    sy = np.einsum("ni,nij,nj->n", by, S, by)
    t = (np.maximum(sy, 1e-300) / np.maximum(px, 1e-300)) ** 0.25
    return best, t[:, None] * bx, by / t[:, None]


def min_form_product(H, m=None, rng=None, n_random=0):
    """Minimum of H[X, Y] / (|X| |Y|) over nonzero X, Y (batched).

    ``H`` has shape (..., 2m, 2m) and the first m coordinates are X.
    Returns ``(value, X, Y)``; the value is the normalized form at the
    returned witness.

    * sym(H) positive semidefinite: the minimum is computed exactly by a
      one-parameter eigenvalue reduction (see ``_product_psd``).
    * a diagonal block of sym(H) indefinite: the infimum is -inf; the
      witness pairs the bad eigenvector with 1e-6 times the other block's
      eigenvector so that the recorded value is finite.
    * otherwise the minimum is negative and finite; it is located by
      multistart gradient descent on unit directions (``_product_descent``).

    ``n_random`` random unit pairs per point are evaluated as an
    independent check; a lower sampled value replaces the result.
    """
    H = np.asarray(H, dtype=float)
    batch = H.shape[:-2]
    H = H.reshape((-1,) + H.shape[-2:])
    n = H.shape[0]
    if m is None:
        m = H.shape[-1] // 2
    rng = np.random.default_rng(0) if rng is None else rng
    Hs = sym(H)
    P, R, S = split_blocks(H, m)
    lam_all = np.linalg.eigvalsh(Hs)[:, 0]
    lp, Vp = np.linalg.eigh(P)
    ls, Vs = np.linalg.eigh(S)

    best = np.full(n, np.inf)
    bx = np.zeros((n, m))
    by = np.zeros((n, m))

    psd = lam_all >= 0
    if psd.any():
        _, x, y = _product_psd(Hs[psd], m)
        bx[psd], by[psd] = x, y

    bad_blocks = (lp[:, 0] < 0) | (ls[:, 0] < 0)
    for i in np.nonzero(bad_blocks)[0]:
        if lp[i, 0] < 0:
            bx[i], by[i] = Vp[i, :, 0], 1e-6 * Vs[i, :, 0]
        else:
            bx[i], by[i] = 1e-6 * Vp[i, :, 0], Vs[i, :, 0]

    rest = ~psd & ~bad_blocks
    if rest.any():
        _, x, y = _product_descent(P[rest], R[rest], S[rest], rng)
        bx[rest], by[rest] = x, y

    best = _batch_value(H, bx, by)

    if n_random:
        idx = np.arange(n)
        done = 0
        while done < n_random:
            k = min(4096, n_random - done)
            x = rng.standard_normal((n, k, m))
            y = rng.standard_normal((n, k, m))
            x /= np.linalg.norm(x, axis=-1, keepdims=True)
            y /= np.linalg.norm(y, axis=-1, keepdims=True)
            vals = product_objective(P[:, None], R[:, None], S[:, None], x, y)
            j = np.argmin(vals, axis=1)
            cand = _batch_value(H, x[idx, j], y[idx, j])
            better = cand < best
            best = np.where(better, cand, best)
            bx[better] = x[idx, j][better]
            by[better] = y[idx, j][better]
            done += k
    return (best.reshape(batch), bx.reshape(batch + (m,)),
            by.reshape(batch + (m,)))


def _batch_value(H, X, Y):
    Xi = np.concatenate([X, Y], axis=-1)
    num = np.einsum("ni,nij,nj->n", Xi, H, Xi)
    return num / (np.linalg.norm(X, axis=-1) * np.linalg.norm(Y, axis=-1))


def _product_value(H, m, X, Y):
    Xi = np.concatenate([X, Y])
    return float(Xi @ H @ Xi) / (np.linalg.norm(X) * np.linalg.norm(Y))


def normalized_value(H, X, Y=None):
    """Re-evaluate a witness: H[X,Y]/(|X||Y|), or H[Xi]/|Xi|^2 if Y is None."""
    H = np.asarray(H, dtype=float)
    if Y is None:
        X = np.asarray(X, dtype=float)
        return float(X @ H @ X) / float(X @ X)
    return _product_value(H, len(X), np.asarray(X, float), np.asarray(Y, float))


def min_gen_hess(phi_hessian, A, B, omega, normalization="sphere",
                 rng=None, n_random=10_000):
    """Minimal normalized generalized Hessian form of Phi at omega.

    ``phi_hessian`` maps a 4-vector omega to the 4 x 4 ordinary Hessian.
    Returns ``(value, X, Y)``; for the sphere normalization ``Y`` is None
    and ``X`` is the full unit vector Xi.
    """
    hess = np.asarray(phi_hessian(np.asarray(omega, dtype=float)), dtype=float)
    if not np.all(np.isfinite(hess)):
        raise ValueError("Hessian is not defined at this omega")
    H = gen_hessian(hess, [A, B])
    if normalization == "sphere":
        w, v = min_form_sphere(H)
        return float(w), v, None
    if normalization in ("product", "productXY"):
        m = H.shape[-1] // 2
        val, x, y = min_form_product(H[None], m, rng=rng, n_random=n_random)
        return float(val[0]), x[0], y[0]
    raise ValueError(f"unknown normalization {normalization!r}")
