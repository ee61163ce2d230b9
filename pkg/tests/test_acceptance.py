"""Acceptance suite: twelve end-to-end criteria at their pinned tolerances.

Each criterion is a function returning a dict of named boolean checks plus
details.  The pytest wrapper asserts every check, the runtime budget
included, and records a one-line summary that ``conftest.py`` prints at
the end of the session.  Running this file directly prints the same lines.
"""

import sys
import time

import numpy as np
import pytest

from pellip.algebra import (ComplexMatrixField, as_field, choose_epsilon, delta_p,
                            joint_delta, random_elliptic, random_p_elliptic)
from pellip.bellman import approximants as appx
from pellip.bellman import certify as cz
from pellip.bellman.genhess import gen_hess_form
from pellip.bellman.mollify import eval_r
from pellip.bellman.nazarov_treil import BellmanSpec
from pellip.bellman.power import formula_one, formula_two, hess_power, power_gradient
from pellip.semigroup.domain import interval, l_shape, rectangle
from pellip.semigroup.experiments import (INCONCLUSIVE, PASS, VIOLATION,
                                          bilinear_embedding, contractivity,
                                          heat_flow_trace, smooth_data)
from pellip.semigroup.flow import max_step, propagate
from pellip.semigroup.operator import assemble_operator
from pellip.spectral import ParabolaSpec, critical_angle, tangency_check, vertex

RESULTS = {}


def rot(phi, d=1):
    return np.exp(1j * phi) * np.eye(d)


def random_real_elliptic(rng, d, margin=0.1):
    G = rng.standard_normal((d, d))
    S = rng.standard_normal((d, d))
    return G @ G.T + (S - S.T) + margin * np.eye(d)


# --------------------------------------------------------------------------
# criteria


def criterion_1():
    ps = np.linspace(1.0, 40.0, 51)[1:]
    phis = np.linspace(-np.pi / 2, np.pi / 2, 52)[1:-1]
    err = max(abs(delta_p(rot(f), p) - (np.cos(f) - abs(1 - 2 / p)))
              for p in ps for f in phis)
    return {"checks": {"closed form within 1e-10": err <= 1e-10},
            "detail": f"max error {err:.1e} on 50x50 grid", "budget": 5}


def criterion_2():
    rng = np.random.default_rng(2)
    dual = mono = 0.0
    adj_ok = real_ok = True
    pgrid = np.linspace(2.0, 20.0, 19)
    for k in range(200):
        d = 1 + k % 3
        A = random_elliptic(rng, d, margin=rng.uniform(-0.5, 0.5))
        p = rng.uniform(1.05, 20.0)
        q = p / (p - 1)
        dual = max(dual, abs(delta_p(A, p) - delta_p(A, q)))
        vals = np.array([delta_p(A, s) for s in pgrid])
        mono = max(mono, np.max(np.diff(vals)))
        dA, dAh = delta_p(A, p), delta_p(A.conj().T, p)
        if abs(dA) > 1e-6 and np.sign(dA) != np.sign(dAh):
            adj_ok = False
        R = random_real_elliptic(rng, d)
        real_ok &= all(delta_p(R, s) > 0 for s in (1.1, 2.0, 50.0))
    return {"checks": {"duality within 1e-10": dual <= 1e-10,
                       "nonincreasing on [2, 20] within 1e-12": mono <= 1e-12,
                       "adjoint sign equivalence": adj_ok,
                       "real matrices positive": real_ok},
            "detail": f"duality {dual:.1e}, largest increase {mono:.1e}, 200 matrices",
            "budget": 30}


def _fd_hess_power(p, w, h=1e-5):
    H = np.empty((4, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        H[:, i] = (power_gradient(p, w + e) - power_gradient(p, w - e)) / (2 * h)
    return 0.5 * (H + H.T)


def criterion_3():
    rng = np.random.default_rng(3)
    agree = fd = 0.0
    for _ in range(500):
        d = int(rng.integers(1, 3))
        p = rng.uniform(1.2, 10.0)
        mats = [random_elliptic(rng, d), random_elliptic(rng, d)]
        w = rng.standard_normal(4)
        w /= np.linalg.norm(w)
        X = rng.standard_normal(4 * d)
        g = gen_hess_form(hess_power(p, w), mats, [X]) / p
        f1, f2 = formula_one(p, w, mats, X), formula_two(p, w, mats, X)
        scale = max(abs(g), abs(f1), abs(f2))
        agree = max(agree, abs(f1 - g) / scale, abs(f2 - g) / scale)
        gfd = gen_hess_form(_fd_hess_power(p, w), mats, [X]) / p
        fd = max(fd, abs(gfd - g) / abs(g))
    return {"checks": {"formulas agree within 1e-9": agree <= 1e-9,
                       "finite differences within 1e-6": fd <= 1e-6},
            "detail": f"formula gap {agree:.1e}, finite-difference gap {fd:.1e}",
            "budget": 30}


def criterion_4():
    p_star = cz.power_sign_change(np.eye(1), 4 * np.eye(1), 9.0, 11.0,
                                  n_samples=100_000, seed=4, tol=1e-4)
    return {"checks": {"sign change at 10 +- 1e-3": abs(p_star - 10.0) <= 1e-3},
            "detail": f"sign change at p = {p_star:.5f}", "budget": 120}


def criterion_5():
    rng = np.random.default_rng(5)
    worst = np.inf
    ok = True
    deltas = []
    for p in (2.5, 4.0, 8.0):
        for _ in range(5):
            d = int(rng.integers(1, 3))
            A, B = random_p_elliptic(rng, d, p), random_p_elliptic(rng, d, p)
            delta, _ = cz.calibrate_delta(p, A, B, seed=int(rng.integers(2 ** 31)))
            deltas.append(delta)
            cert = cz.certify_q(BellmanSpec(p, delta), A, B, 100_000,
                                seed=int(rng.integers(2 ** 31)))
            margin = cert.min_normalized_form - (cz.strict_bound(p, A, B) - 1e-9)
            worst = min(worst, margin)
            ok &= cert.verdict == cz.CERTIFIED and margin >= 0
    return {"checks": {"15 pairs certified above the strict bound": ok},
            "detail": f"smallest margin {worst:.3e}, delta in "
                      f"[{min(deltas):g}, {max(deltas):g}]",
            "budget": 300}


def criterion_6():
    p = 3.0
    A, B = np.eye(1), rot(0.4)
    bell = BellmanSpec(p, 0.5)
    eps = choose_epsilon(p, as_field(A), as_field(B))
    checks = {}
    jumps = [appx.fn_breakpoint_jumps(n, p, eps) for n in (1, 2, 4)]
    checks["f_n C1 matching"] = all(
        abs(lv - rv) <= 1e-14 * abs(rv) and abs(ld - rd) <= 1e-14 * abs(rd)
        for (lv, ld), (rv, rd) in jumps)
    outer = [cz.certify_pn_outer(p, A, B, n, 10_000, seed=60 + n) for n in (1, 2, 4)]
    checks["P_n outer bound on 1e4 samples"] = all(
        c.verdict == cz.CERTIFIED for c in outer)
    details = []
    sym = 0.0
    r_ok = growth_ok = True
    for nu in (0.25, 0.1):
        cal = cz.calibrate_c1(bell, A, B, nu, ns=(1, 2, 4), n_samples=10_000, seed=61)
        if cal["c1"] is None:
            r_ok = False
            details.append(f"nu={nu}: C1 calibration inconclusive")
            continue
        certs = cz.certify_r(bell, A, B, nu, cal["c1"], ns=(1, 2, 4),
                             n_samples=10_000, seed=62)
        r_ok &= all(c.verdict == cz.CERTIFIED for c in certs.values())
        eta = np.random.default_rng(63).standard_normal((20, 2)) * 3
        for n in (1, 2, 4):
            spec = cz.build_approximant(bell, A, B, n, nu)
            spec.c1 = cal["c1"]
            _, g, _ = eval_r(spec, bell, np.concatenate([np.zeros((20, 2)), eta], 1))
            sym = max(sym, float(np.abs(g[:, :2]).max()))
        gr = cz.r_growth(bell, A, B, nu, cal["c1"], ns=(1, 2, 4, 8), seed=64)
        growth_ok &= max(gr["fitted"].values()) <= gr["majorant"]
        mins = min(c.min_normalized_form for c in certs.values())
        details.append(f"nu={nu}: C1={cal['c1']:g}, min form {mins:.2e}, fitted "
                       f"{max(gr['fitted'].values()):.0f} <= {gr['majorant']:.0f}")
    checks["R certified for n in {1,2,4}, nu in {0.25,0.1}"] = r_ok
    checks["symmetry within 1e-10"] = sym <= 1e-10
    checks["n-uniform gradient growth"] = growth_ok
    return {"checks": checks, "detail": "; ".join(details) + f"; symmetry {sym:.1e}",
            "budget": 600}


def _complex_field(rng, shape, d):
    n = int(np.prod(shape))
    M = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    return ComplexMatrixField(M + 3 * np.eye(d), shape)


def criterion_7():
    rng = np.random.default_rng(7)
    ibp = adj = kern = 0.0
    doms = [interval(64, dirichlet="left"), rectangle(12, 12, dirichlet=["left", "top"]),
            l_shape(12)]
    for dom in doms:
        op = assemble_operator(_complex_field(rng, dom.shape, dom.dim), dom)
        u = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
        v = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
        Lu = op.apply(u)
        scale = op.weight * np.sum(np.abs(Lu) * np.abs(v))
        ibp = max(ibp, abs(op.inner(Lu, v) - op.form(u, v)) / scale)
        K = op.stiffness
        adj = max(adj, abs(op.adjoint().stiffness - K.conj().T).max() / abs(K).max())
        free = dom.with_dirichlet("none")
        opn = assemble_operator(_complex_field(rng, free.shape, free.dim), free)
        kern = max(kern, np.abs(opn.apply(np.ones(opn.n))).max()
                   / np.abs(opn.matrix).max())
    dom = rectangle(10, 10)
    op = assemble_operator(_complex_field(rng, dom.shape, 2), dom)
    u0 = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
    s, t = 0.01, 0.02
    dt = s / np.ceil(s / max_step(op))
    semi = {}
    for method in ("dense", "eig", "cn"):
        kw = {"dt_max": dt} if method == "cn" else {}
        both = propagate(op, u0, [s + t], method, **kw)[0][0]
        first = propagate(op, u0, [s], method, **kw)[0][0]
        second = propagate(op, first, [t], method, **kw)[0][0]
        semi[method] = np.abs(both - second).max() / np.abs(both).max()
    eps = np.finfo(float).eps
    return {"checks": {"integration by parts within 1e-13": ibp <= 1e-13,
                       "adjoint consistent to rounding": adj <= 4 * eps,
                       "Neumann kernel within 1e-12": kern <= 1e-12,
                       "semigroup within 1e-8": max(semi["eig"], semi["cn"]) <= 1e-8,
                       "dense semigroup within 1e-12": semi["dense"] <= 1e-12},
            "detail": f"ibp {ibp:.1e}, adjoint {adj:.1e}, kernel {kern:.1e}, "
                      f"semigroup dense {semi['dense']:.1e} eig {semi['eig']:.1e} "
                      f"cn {semi['cn']:.1e}",
            "budget": 60}


def criterion_8():
    p = 4.0
    star = critical_angle(p)[1]
    good, bad = [], []
    for dom in (interval(256), rectangle(64, 64)):
        d = dom.dim
        real_const = np.array([[2.0, 1.0], [-0.5, 1.0]])[:d, :d]
        cells = np.prod(dom.shape)
        rng = np.random.default_rng(8)
        diag = np.zeros((cells, d, d))
        diag[:, range(d), range(d)] = rng.uniform(0.5, 2.0, (cells, d))
        cases = [("real nonsymmetric", real_const),
                 ("real variable", ComplexMatrixField(diag, dom.shape)),
                 ("e^{i0.5}I", rot(0.5, d)),
                 (f"e^{{i{star - 0.05:.3f}}}I", rot(star - 0.05, d))]
        for name, A in cases:
            rep = contractivity(assemble_operator(A, dom), p, n_states=50, seed=8)
            good.append((f"{d}D {name}", rep))
        rep = contractivity(assemble_operator(rot(star + 0.2, d), dom), p,
                            n_states=50, seed=8)
        bad.append((f"{d}D e^{{i{star + 0.2:.3f}}}I", rep))
    worst = max(r["max_ratio"] for _, r in good)
    verdicts = ", ".join(f"{n}: {r['verdict']}" for n, r in bad)
    return {"checks": {"p-elliptic cases pass with ratio <= 1 + 1e-6": all(
                r["verdict"] == PASS and r["max_ratio"] <= 1 + 1e-6 for _, r in good),
            "non p-elliptic cases never pass": all(
                r["delta_p"] < 0 and r["verdict"] in (VIOLATION, INCONCLUSIVE)
                for _, r in bad)},
            "detail": f"worst passing ratio {worst:.12f}; {verdicts}", "budget": 300}


def _halves(dom, m1, m2):
    idx = np.indices(dom.shape)[0]
    first = (idx < dom.shape[0] // 2).reshape(-1)
    mats = np.where(first[:, None, None], m1, m2)
    return ComplexMatrixField(mats, dom.shape)


def criterion_9():
    p = 3.0
    rough = (np.eye(2), 3 * rot(0.5, 2))
    out = {}
    for name in ("identity", "rough"):
        ratios = []
        for n in (16, 32):
            dom = rectangle(n, n)
            A = np.eye(2) if name == "identity" else _halves(dom, *rough)
            op = assemble_operator(A, dom)
            rng = np.random.default_rng(9)
            f, g = smooth_data(op, rng, 50), smooth_data(op, rng, 50)
            res = bilinear_embedding(op, op, p, f, g)
            ratios.append(res["ratio"])
            if n == 16:
                scaled = bilinear_embedding(op, op, p, 10.0 * f, g / 10.0)["ratio"]
                scale_err = np.max(np.abs(scaled - res["ratio"]) / res["ratio"])
        drift = np.max(np.abs(ratios[1] - ratios[0]) / ratios[0])
        out[name] = (np.all(np.isfinite(ratios[0])) and np.all(np.isfinite(ratios[1])),
                     scale_err, drift, float(np.max(ratios[1])))
    dp = joint_delta(p, _halves(rectangle(16, 16), *rough))
    checks = {"rough field is p-elliptic": dp > 0}
    for name, (finite, serr, drift, _) in out.items():
        checks[f"{name}: finite"] = bool(finite)
        checks[f"{name}: scale invariant to 1e-10"] = serr <= 1e-10
        checks[f"{name}: drift < 10%"] = drift < 0.10
    detail = "; ".join(f"{k}: scale {v[1]:.1e}, drift {100 * v[2]:.2f}%, max ratio "
                       f"{v[3]:.3f}" for k, v in out.items())
    return {"checks": checks, "detail": detail, "budget": 600}


def criterion_10():
    rng = np.random.default_rng(10)
    mono = rate = 0.0
    runs = 0
    for p in (3.0, 4.0):
        for dom in (interval(64), rectangle(12, 12, dirichlet=["left"])):
            for _ in range(3):
                d = dom.dim
                A, B = random_p_elliptic(rng, d, p), random_p_elliptic(rng, d, p)
                delta, _ = cz.calibrate_delta(p, A, B, seed=int(rng.integers(2 ** 31)))
                opA, opB = assemble_operator(A, dom), assemble_operator(B, dom)
                f = smooth_data(opA, rng, 1)[:, 0]
                g = smooth_data(opB, rng, 1)[:, 0]
                tr = heat_flow_trace(BellmanSpec(p, delta), opA, opB, f, g,
                                     np.geomspace(1e-4, 0.5, 40))
                E = tr.energy
                mono = max(mono, np.max(np.diff(E)) / np.abs(E).max())
                ra, rfd = tr.extra["rate_a"], tr.extra["rate_fd"]
                rate = max(rate, np.max(np.abs(ra - rfd) / np.abs(ra)))
                runs += 1
    return {"checks": {"E nonincreasing": mono <= 0.0,
                       "rate a) matches centred differences within 1e-4": rate <= 1e-4},
            "detail": f"{runs} traces, largest relative increase {mono:.1e}, "
                      f"rate gap {rate:.1e}",
            "budget": 120}


def criterion_11():
    v = vertex(ParabolaSpec(4.0, 1.0))
    tang = tangency_check(4.0, 1.0, y_max=1e6)
    zero = max(abs(delta_p(rot(critical_angle(p)[1]), p))
               for p in np.linspace(1.05, 40.0, 100))
    return {"checks": {"vertex 3/16": abs(v - 3 / 16) <= 1e-15,
                       "tangency gap < 1e-3 at 1e6": 0 <= tang["gap_at_y_max"] < 1e-3,
                       "below the critical sector": tang["below_sector"],
                       "Delta_p(e^{i phi_p} I) = 0 within 1e-12": zero <= 1e-12},
            "detail": f"gap {tang['gap_at_y_max']:.1e}, zero residual {zero:.1e}",
            "budget": 5}


def criterion_12():
    prof = cz.flat_then_quadratic()
    neg = cz.rigidity_probe(rot(np.pi / 4), prof, 100_000, seed=12)
    pos = cz.rigidity_probe(np.array([[2.0, 0.5], [-0.3, 1.0]]), prof, 100_000,
                            seed=12)
    return {"checks": {"witness below -1e-8": neg.verdict == cz.NEGATIVE
                       and neg.min_normalized_form < -1e-8,
                       "real A nonnegative": pos.verdict == cz.CERTIFIED},
            "detail": f"witness value {neg.min_normalized_form:.3e}, real minimum "
                      f"{pos.min_normalized_form:.1e}",
            "budget": 60}


CRITERIA = {
    1: ("angle formula", criterion_1),
    2: ("Delta_p properties", criterion_2),
    3: ("Hessian formula equivalence", criterion_3),
    4: ("scalar convexity boundary", criterion_4),
    5: ("strict Q bound", criterion_5),
    6: ("approximant suite", criterion_6),
    7: ("operator identities", criterion_7),
    8: ("contractivity", criterion_8),
    9: ("bilinear embedding", criterion_9),
    10: ("heat-flow monotonicity", criterion_10),
    11: ("spectral formulas", criterion_11),
    12: ("rigidity probe", criterion_12),
}


def evaluate(number):
    name, fn = CRITERIA[number]
    start = time.perf_counter()
    res = fn()
    elapsed = time.perf_counter() - start
    res["checks"][f"runtime < {res['budget']} s"] = elapsed < res["budget"]
    failed = [k for k, ok in res["checks"].items() if not ok]
    line = (f"[{'PASS' if not failed else 'FAIL'}] {number:2d}. {name} "
            f"({elapsed:.1f} s): {res['detail']}")
    if failed:
        line += " | failed: " + ", ".join(failed)
    RESULTS[number] = line
    return failed, line


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    failed, line = evaluate(number)
    assert not failed, line


if __name__ == "__main__":
    for k in [int(a) for a in sys.argv[1:]] or sorted(CRITERIA):
        print(evaluate(k)[1], flush=True)
