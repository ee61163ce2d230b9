"""Desk-scale experiments: L^p contractivity, bilinear embedding, heat flow.

All experiments take assembled operators, so a second operator may use a
different coefficient field and a different Dirichlet set on the same
lattice.
"""

import numpy as np
from ..algebra import joint_delta, real_form, realify
from ..bellman.certify import strict_bound
from ..bellman.nazarov_treil import (complex_derivatives, distance_to_upsilon,
                                     q_hessian, q_value)
from .flow import EigenPropagator, FlowTrace
from .operator import DiscreteOperator

PASS = "pass"
VIOLATION = "violation"
INCONCLUSIVE = "inconclusive"


# --------------------------------------------------------------------------
# data


def smooth_data(op: DiscreteOperator, rng, count, modes=6):
    """Random complex sine series on the domain's bounding box.

    Coefficients decay like 1/k^2 so the data is smooth and the same
    function is sampled under mesh refinement.
    """
    X = op.domain.free_coordinates()
    lo = op.domain.node_coordinates().reshape(-1, op.domain.dim).min(axis=0)
    hi = op.domain.node_coordinates().reshape(-1, op.domain.dim).max(axis=0)
    Y = (X - lo) / (hi - lo)
    out = np.zeros((len(X), count), dtype=complex)
    ks = np.arange(1, modes + 1)
    for s in range(count):
        val = np.ones(len(X), dtype=complex)
        for axis in range(op.domain.dim):
            coef = (rng.standard_normal(modes) + 1j * rng.standard_normal(modes)) / ks ** 2
            phase = rng.uniform(0, 2 * np.pi, modes)
            val = val * (np.sin(np.pi * np.outer(Y[:, axis], ks) + phase) @ coef)
        out[:, s] = val
    return out


def random_data(op: DiscreteOperator, rng, count):
    """Mixture of rough, sparse and smooth complex initial states."""
    n = op.n
    kinds = []
    cols = []
    for s in range(count):
        kind = s % 4
        if kind == 0:
            u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        elif kind == 1:
            u = np.zeros(n, dtype=complex)
            idx = rng.choice(n, size=max(1, n // 50), replace=False)
            u[idx] = np.exp(2j * np.pi * rng.random(len(idx)))
        elif kind == 2:
            u = smooth_data(op, rng, 1)[:, 0]
        else:
            u = np.exp(1j * rng.uniform(0, 2 * np.pi, n)) * rng.random(n) ** 4
        kinds.append(("rough", "sparse", "smooth", "heavy")[kind])
        cols.append(u)
    return np.stack(cols, axis=1), kinds


# --------------------------------------------------------------------------
# contractivity


def _lp_ratio(op, states, u0, p):
    return op.norm(states, p) / op.norm(u0, p)


def _dual(u, r):
    """|u|^{r-2} u with 0 at u = 0."""
    a = np.abs(u)
    return np.where(a > 0, np.where(a > 0, a, 1.0) ** (r - 2.0) * u, 0.0)


def boyd_search(op, prop, t, p, starts, iters=60):
    """Power iteration for the p -> p norm of exp(-tL) (Boyd's method).

    ``prop`` is an EigenPropagator of op.  Returns the best ratio and the
    maximizing initial state.
    """
    q = p / (p - 1.0)
    T, Th = prop.propagator(t)
    best, best_u = -np.inf, None
    f = starts / op.norm(starts, p)
    for _ in range(iters):
        g = T(f)
        ratio = op.norm(g, p) / op.norm(f, p)
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best, best_u = float(ratio[i]), f[:, i].copy()
        z = Th(_dual(g, p))
        f = _dual(z, q)
        f = f / op.norm(f, p)
    return best, best_u


def contractivity(op: DiscreteOperator, p, states=None, times=None, n_states=50,
                  seed=0, tol=1e-6, search=True):
    """Max over data and times of ||T_t f||_p / ||f||_p with a verdict.

    With Delta_p(A) >= 0 the verdict is ``pass`` or ``violation``.  With
    Delta_p(A) < 0 a value above 1 + tol is a ``violation``; otherwise the
    run is ``inconclusive`` and never a pass.  In that case an adversarial
    power-iteration search is run at the two largest-ratio times.
    """
    rng = np.random.default_rng(seed)
    kinds = None
    if states is None:
        states, kinds = random_data(op, rng, n_states)
    if times is None:
        h2 = op.domain.h ** 2
        times = np.geomspace(h2, 2.0, 20)
    dp = joint_delta(p, op.field)
    prop = EigenPropagator(op.matrix)
    coef = prop.coefficients(states.astype(complex))
    ratios = np.stack([_lp_ratio(op, prop.apply(coef, [t])[0], states, p)
                       for t in times])
    k, j = np.unravel_index(np.argmax(ratios), ratios.shape)
    report = {"p": p, "delta_p": dp, "h": op.domain.h, "n": op.n,
              "n_states": int(states.shape[1]), "n_times": len(times),
              "tolerance": tol, "method": "eig", "residual": prop.residual,
              "max_ratio": float(ratios[k, j]), "argmax_time": float(times[k]),
              "argmax_state": int(j),
              "argmax_kind": None if kinds is None else kinds[j],
              "times": [float(t) for t in times],
              "max_ratio_by_time": [float(r) for r in ratios.max(axis=1)]}
    worst = report["max_ratio"]
    if dp < 0 and search and worst <= 1 + tol:
        order = np.argsort(ratios.max(axis=1))[::-1][:2]
        found = []
        for kk in order:
            top = np.argsort(ratios[kk])[::-1][:4]
            starts = np.concatenate(
                [states[:, top],
                 rng.standard_normal((op.n, 4)) + 1j * rng.standard_normal((op.n, 4))],
                axis=1)
            r, _ = boyd_search(op, prop, times[kk], p, starts, iters=30)
            found.append((r, float(times[kk])))
        r, t = max(found)
        report["search"] = {"max_ratio": r, "time": t}
        worst = max(worst, r)
    report["worst_ratio"] = worst
    if worst > 1 + tol:
        report["verdict"] = VIOLATION
    elif dp >= 0:
        report["verdict"] = PASS
    else:
        report["verdict"] = INCONCLUSIVE
    return report


# --------------------------------------------------------------------------
# bilinear embedding


def _has_kernel(op):
    return not op.domain.dirichlet.any()


def _remove_mean(op, u):
    return u - op.mass(u) / (op.n * op.weight)


def bilinear_embedding(opA: DiscreteOperator, opB: DiscreteOperator, p, f, g,
                       per_decade=40, t0_factor=1e-3, horizon=10.0):
    """Time-space integral of |grad T_t f| |grad T_t g| for each data pair.

    ``f`` and ``g`` are (N, S) arrays (one column per pair).  The time grid
    is logarithmic from t0 = t0_factor h^2 to tMax = horizon / gap, where
    gap is the smallest real part of the nonzero spectrum of either
    operator; the integral on [0, t0] uses the integrand at t0 and the tail
    beyond tMax the observed exponential decay rate.  Pure Neumann data
    has its conserved mean removed first.
    """
    p = float(p)
    q = p / (p - 1.0)
    f = np.asarray(f, dtype=complex).reshape(opA.n, -1)
    g = np.asarray(g, dtype=complex).reshape(opB.n, -1)
    notes = []
    if _has_kernel(opA):
        f = _remove_mean(opA, f)
        notes.append("mean removed from f")
    if _has_kernel(opB):
        g = _remove_mean(opB, g)
        notes.append("mean removed from g")
    pa, pb = EigenPropagator(opA.matrix), EigenPropagator(opB.matrix)
    ca, cb = pa.coefficients(f), pb.coefficients(g)
    gaps = []
    for prop, c in ((pa, ca), (pb, cb)):
        live = np.abs(c).max(axis=1) > 1e-12 * np.abs(c).max()
        gaps.append(np.min(prop.mu.real[live & (np.abs(prop.mu) > 1e-9)]))
    gap = min(gaps)
    if gap <= 0:
        raise ValueError("no decay: the tail of the time integral diverges")
    h = opA.domain.h
    t0, tmax = t0_factor * h * h, horizon / gap
    n_t = int(np.ceil(per_decade * np.log10(tmax / t0))) + 1
    ts = np.geomspace(t0, tmax, n_t)
    integrand = np.empty((n_t, f.shape[1]))
    for s in range(0, n_t, 50):
        sl = slice(s, s + 50)
        ua = pa.apply(ca, ts[sl])
        vb = pb.apply(cb, ts[sl])
        for k in range(ua.shape[0]):
            gu = opA.gradient_magnitude(ua[k])
            gv = opA.gradient_magnitude_of(opB, vb[k])
            integrand[s + k] = np.sum(opA.areas[:, None] * gu * gv, axis=0)
    # trapezoid in log t: int I dt = int I t dlog t
    logt = np.log(ts)
    body = np.sum(0.5 * (integrand[1:] * ts[1:, None] + integrand[:-1] * ts[:-1, None])
                  * np.diff(logt)[:, None], axis=0)
    head = t0 * integrand[0]
    rate = -(np.log(np.maximum(integrand[-1], 1e-300))
             - np.log(np.maximum(integrand[-2], 1e-300))) / (ts[-1] - ts[-2])
    tail = np.where(rate > 0, integrand[-1] / np.where(rate > 0, rate, 1.0), np.inf)
    total = head + body + tail
    nf, ng = opA.norm(f, p), opB.norm(g, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(nf * ng > 0, total / (nf * ng), 0.0)
        ratio_sum = np.where(nf ** p + ng ** q > 0, total / (nf ** p + ng ** q), 0.0)
    return {"integral": total, "ratio": ratio, "ratio_sum": ratio_sum,
            "tail": tail, "head": head, "t0": t0, "t_max": tmax, "gap": gap,
            "n_times": n_t, "notes": notes}


# --------------------------------------------------------------------------
# heat flow


def _node_pairs(opA, opB, u, v):
    return opA.extend(u), opB.extend(v)


def bellman_energy(bellman, opA, opB, u, v):
    U, V = _node_pairs(opA, opB, u, v)
    omega = np.stack([U.real, U.imag, V.real, V.imag], axis=-1)
    return float(np.sum(q_value(bellman, omega)) * opA.weight)


def energy_rate(bellman, opA, opB, u, v):
    """-E'(t) = 2 Re sum_i h^d [d_zeta Q (L_A u)_i + d_eta Q (L_B v)_i]."""
    U, V = _node_pairs(opA, opB, u, v)
    LU, LV = opA.extend(opA.apply(u)), opB.extend(opB.apply(v))
    omega = np.stack([U.real, U.imag, V.real, V.imag], axis=-1)
    dz, de = complex_derivatives(bellman, omega)
    return float(2.0 * np.real(np.sum(dz * LU + de * LV)) * opA.weight)


def hessian_integrand(bellman, opA, opB, u, v):
    """Per-element generalized Hessian of Q at element averages.

    Returns ``(form, grad_u, grad_v, off_upsilon)`` where form is
    H_Q^{(A_T, B_T)}[omega_T; (grad u, grad v)] and omega_T is the vertex
    average of (u, v) on element T.
    """
    U, V = _node_pairs(opA, opB, u, v)
    nodes = opA.element_nodes
    uc, vc = U[nodes].mean(axis=1), V[nodes].mean(axis=1)
    omega = np.stack([uc.real, uc.imag, vc.real, vc.imag], axis=-1)
    off = distance_to_upsilon(bellman, omega) > 1e-9
    hess = np.where(off[:, None, None], q_hessian(bellman, np.where(
        off[:, None], omega, 1.0)), 0.0)
    gu = opA.gradient(u)
    gv = opA.gradient_of(opB, v)
    d = opA.domain.dim
    X = realify(gu)
    Y = realify(gv)
    Xi = np.concatenate([X, Y], axis=1).reshape(-1, 4, d)
    Z = np.einsum("eab,ebi->eai", hess, Xi).reshape(-1, 2, 2 * d)
    MA = real_form(opA.element_matrices)
    MB = real_form(opA.matrices_on_elements(opB.field))
    W = np.stack([np.einsum("eij,ej->ei", MA, X), np.einsum("eij,ej->ei", MB, Y)], axis=1)
    form = np.sum(Z * W, axis=(1, 2))
    return form, np.linalg.norm(X, axis=1), np.linalg.norm(Y, axis=1), off


def heat_flow_trace(bellman, opA: DiscreteOperator, opB: DiscreteOperator, f, g,
                    times, fd_rel=1e-3) -> FlowTrace:
    """E(t), both derivative formulas and a centred difference of E.

    States come from the checked eigendecomposition.  ``extra`` holds the
    formula a) rate, the centred difference (step fd_rel * t), the
    integrated formula b), and the pointwise ratio of the formula b)
    integrand to (Delta_p / 5)(lambda / Lambda)|grad u||grad v|.
    """
    p, q = bellman.p, bellman.q
    times = np.asarray(times, dtype=float)
    pa, pb = EigenPropagator(opA.matrix), EigenPropagator(opB.matrix)
    ca = pa.coefficients(np.asarray(f, dtype=complex))
    cb = pb.coefficients(np.asarray(g, dtype=complex))
    U, V = pa.apply(ca, times), pb.apply(cb, times)
    bound = strict_bound(p, opA.field, opB.field)
    E, rate_a, rate_fd, rate_b, bil_rate = [], [], [], [], []
    min_ratio = np.inf
    for k, t in enumerate(times):
        u, v = U[k], V[k]
        E.append(bellman_energy(bellman, opA, opB, u, v))
        rate_a.append(energy_rate(bellman, opA, opB, u, v))
        if t > 0:
            tau = fd_rel * t
            up, um = pa.apply(ca, [t + tau, t - tau])
            vp, vm = pb.apply(cb, [t + tau, t - tau])
            rate_fd.append(-(bellman_energy(bellman, opA, opB, up, vp)
                             - bellman_energy(bellman, opA, opB, um, vm)) / (2 * tau))
        else:
            rate_fd.append(np.nan)
        form, nx, ny, off = hessian_integrand(bellman, opA, opB, u, v)
        rate_b.append(float(np.sum(opA.areas * form)))
        bil_rate.append(float(np.sum(opA.areas * nx * ny)))
        live = off & (nx * ny > 1e-300)
        if live.any():
            min_ratio = min(min_ratio, float(np.min(form[live] / (nx[live] * ny[live]))))
    bil_rate = np.array(bil_rate)
    acc = np.concatenate([[0.0], np.cumsum(0.5 * (bil_rate[1:] + bil_rate[:-1])
                                           * np.diff(times))])
    trace = FlowTrace(times, np.stack([U, V], axis=1), energy=np.array(E),
                      bilinear=acc)
    trace.norms[p] = np.array([opA.norm(u, p) for u in U])
    trace.norms[q] = np.array([opB.norm(v, q) for v in V])
    trace.extra.update(rate_a=np.array(rate_a), rate_fd=np.array(rate_fd),
                       rate_b=np.array(rate_b), strict_bound=bound,
                       min_pointwise_ratio=min_ratio, bellman=bellman.to_json())
    return trace
