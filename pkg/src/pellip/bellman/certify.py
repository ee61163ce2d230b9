"""Sampling-based (A,B)-convexity certification with reproducible witnesses.

A certificate records the smallest normalized generalized Hessian form found
over a seeded sample of points, the point and vectors attaining it, and a
verdict:

* ``certified-nonnegative-with-margin``: every sampled value is at least the
  requested bound (minus a stated tolerance);
* ``negativity-witness``: a sampled value is below ``-tolerance``;
* ``inconclusive``: neither.

Sample batches carry their own seeds (spawned from one root seed), so the
result does not depend on how many workers process them.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from ..algebra import (as_field, as_matrix, choose_epsilon, joint_bound,
                       joint_delta, joint_ellipticity)
from . import approximants as appx
from .genhess import gen_hessian, min_form_product, min_form_sphere, normalized_value
from .mollify import (ApproximantSpec, MollifierSpec, mollified_q,
                      quadrature, r_parts)
from .nazarov_treil import BellmanSpec, distance_to_upsilon, q_hessian
from .power import hess_power, radial_hessian

CERTIFIED = "certified-nonnegative-with-margin"
NEGATIVE = "negativity-witness"
INCONCLUSIVE = "inconclusive"
BATCH = 2048


@dataclass
class ConvexityCertificate:
    region: dict
    sample_count: int
    min_normalized_form: float
    witness: dict
    verdict: str
    normalization: str = "product"
    bound: float = 0.0
    tolerance: float = 0.0
    seed: Optional[int] = None
    parameters: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.min_normalized_form - self.bound

    def to_json(self):
        return {
            "region": self.region,
            "sample_count": int(self.sample_count),
            "min_normalized_form": _f(self.min_normalized_form),
            "bound": _f(self.bound),
            "margin": _f(self.margin),
            "tolerance": _f(self.tolerance),
            "normalization": self.normalization,
            "witness": {k: [_f(x) for x in v] if v is not None else None
                        for k, v in self.witness.items()},
            "verdict": self.verdict,
            "seed": self.seed,
            "parameters": self.parameters,
        }

    @classmethod
    def from_json(cls, obj):
        wit = {k: None if v is None else np.array(v, dtype=float)
               for k, v in obj["witness"].items()}
        return cls(region=obj["region"], sample_count=obj["sample_count"],
                   min_normalized_form=float(obj["min_normalized_form"]),
                   witness=wit, verdict=obj["verdict"],
                   normalization=obj["normalization"],
                   bound=float(obj["bound"]), tolerance=float(obj["tolerance"]),
                   seed=obj.get("seed"), parameters=obj.get("parameters", {}))


def _f(x):
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def verdict_for(value, bound, tol):
    if value >= bound - tol:
        return CERTIFIED
    if value < -tol:
        return NEGATIVE
    return INCONCLUSIVE


def _min_forms(H, normalization, rng=None, n_random=0):
    """Batched minimal normalized forms; returns (values, X, Y)."""
    if normalization == "sphere":
        w, v = min_form_sphere(H)
        return w, v, None
    m = H.shape[-1] // 2
    return min_form_product(H, m, rng=rng, n_random=n_random)


def _batch_seeds(seed, n_batches):
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(n_batches)]


def run_batches(sampler, evaluator, n_samples, seed, threads=1):
    """Evaluate ``evaluator(points)`` on seeded batches from ``sampler(rng, k)``.

    Returns the concatenated points and whatever arrays the evaluator
    returns (a tuple of arrays with a leading sample axis).
    """
    n_batches = max(1, -(-n_samples // BATCH))
    rngs = _batch_seeds(seed, n_batches)
    sizes = [min(BATCH, n_samples - i * BATCH) for i in range(n_batches)]

    def work(i):
        pts = sampler(rngs[i], sizes[i])
        return pts, evaluator(pts, rngs[i])

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, range(n_batches)))
    else:
        results = [work(i) for i in range(n_batches)]
    pts = np.concatenate([r[0] for r in results])
    outs = tuple(
        None if results[0][1][j] is None
        else np.concatenate([r[1][j] for r in results])
        for j in range(len(results[0][1])))
    return pts, outs


def _certificate(pts, vals, X, Y, bound, tol, region, normalization, seed,
                 parameters):
    i = int(np.argmin(vals))
    wit = {"omega": pts[i], "X": X[i], "Y": None if Y is None else Y[i]}
    return ConvexityCertificate(
        region=region, sample_count=len(pts),
        min_normalized_form=float(vals[i]), witness=wit,
        verdict=verdict_for(vals[i], bound, tol),
        normalization=normalization, bound=float(bound), tolerance=tol,
        seed=seed, parameters=parameters)


# --------------------------------------------------------------------------
# samplers


def _unit(rng, k, m):
    x = rng.standard_normal((k, m))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_bellman_points(rng, k, p, log_ratio=6.0):
    """Points off Upsilon covering both branches.

    |zeta| is log-uniform on [0.1, 10]; the branch ratio |eta|^q / |zeta|^p
    is log-uniform on [10^-log_ratio, 10^log_ratio].
    """
    q = p / (p - 1.0)
    s = 10.0 ** rng.uniform(-1.0, 1.0, k)
    rho = 10.0 ** rng.uniform(-log_ratio, log_ratio, k)
    t = (rho * s ** p) ** (1.0 / q)
    zeta = _unit(rng, k, 2) * s[:, None]
    eta = _unit(rng, k, 2) * t[:, None]
    return np.concatenate([zeta, eta], axis=1)


def sample_unit_sphere(rng, k, m=4):
    return _unit(rng, k, m)


def sample_s_kappa(rng, k, kap):
    """Unit points of S_kappa: one half-block at most 1/kappa of the other."""
    big = _unit(rng, k, 2)
    frac = rng.uniform(0.0, 1.0, k) / max(kap, 1.0)
    small = _unit(rng, k, 2) * frac[:, None]
    swap = rng.random(k) < 0.5
    zeta = np.where(swap[:, None], small, big)
    eta = np.where(swap[:, None], big, small)
    omega = np.concatenate([zeta, eta], axis=1)
    return omega / np.linalg.norm(omega, axis=1, keepdims=True)


def sample_shell(rng, k, r_lo, r_hi):
    """Points with |omega| uniform in [r_lo, r_hi] and uniform direction."""
    return _unit(rng, k, 4) * rng.uniform(r_lo, r_hi, k)[:, None]


def sample_global(rng, k, n):
    """Half uniform radius in [0, 5n], half log-uniform in [1e-3, 10n]."""
    half = k // 2
    r1 = rng.uniform(0.0, 5.0 * n, half)
    r2 = 10.0 ** rng.uniform(-3.0, np.log10(10.0 * n), k - half)
    return _unit(rng, k, 4) * np.concatenate([r1, r2])[:, None]


# --------------------------------------------------------------------------
# power functions


def certify_power(p, A, B, sampler, region, n_samples=10_000, seed=0,
                  bound=0.0, tol=1e-9, normalization="sphere", threads=1):
    """Certify F_p on R^4 over a sampled region (sphere normalization)."""
    mats = [as_matrix(A), as_matrix(B)]

    def evaluate(pts, rng):
        H = gen_hessian(hess_power(p, pts), mats)
        return _min_forms(H, normalization, rng)

    pts, (vals, X, Y) = run_batches(sampler, evaluate, n_samples, seed, threads)
    return _certificate(pts, vals, X, Y, bound, tol, region, normalization,
                        seed, {"p": p, "target": "F_p"})


def certify_pp(p, A, B, n_samples=10_000, seed=0, tol=1e-9, threads=1):
    """Certify P_p = F_p(omega) + K_p (F_p(zeta) + F_p(eta)) on unit points."""
    K = appx.big_k(p, A, B)
    mats = [as_matrix(A), as_matrix(B)]

    def evaluate(pts, rng):
        _, _, h = appx.pp_eval(pts, p, K)
        return _min_forms(gen_hessian(h, mats), "sphere")

    pts, (vals, X, Y) = run_batches(sample_unit_sphere, evaluate, n_samples,
                                    seed, threads)
    return _certificate(pts, vals, X, Y, 0.0, tol, {"kind": "unit sphere"},
                        "sphere", seed, {"p": p, "K": K, "target": "P_p"})


def sphere_min_power(p, A, B, n_samples, seed=0):
    """Sampled min over unit omega of the sphere-normalized form of F_p."""
    cert = certify_power(p, A, B, sample_unit_sphere, {"kind": "unit sphere"},
                         n_samples=n_samples, seed=seed)
    return cert.min_normalized_form


def power_sign_change(A, B, lo, hi, n_samples=100_000, seed=0, tol=1e-4):
    """Bisect p on [lo, hi] for the sign change of the sampled sphere minimum."""
    if sphere_min_power(lo, A, B, n_samples, seed) < 0:
        raise ValueError("the lower end already fails")
    if sphere_min_power(hi, A, B, n_samples, seed) >= 0:
        raise ValueError("no sign change below the upper end")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sphere_min_power(mid, A, B, n_samples, seed) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# the Bellman function


def strict_bound(p, A, B):
    """Delta_p(A,B) lambda(A,B) / (5 Lambda(A,B))."""
    return (joint_delta(p, A, B) * joint_ellipticity(A, B)
            / (5.0 * joint_bound(A, B)))


def _q_evaluator(spec, mats):
    def evaluate(pts, rng):
        H = gen_hessian(q_hessian(spec, pts), mats)
        return _min_forms(H, "product", rng)
    return evaluate


def _q_sampler(p):
    def sampler(rng, k):
        pts = sample_bellman_points(rng, k, p)
        spec_free = BellmanSpec(p, 0.5)
        far = distance_to_upsilon(spec_free, pts) > 1e-9
        # the branch indicator does not depend on delta
        return pts[far]
    return sampler


def certify_q(spec, A, B, n_samples=100_000, seed=0, tol=1e-9, threads=1):
    """Check H_Q[X,Y] / (|X||Y|) >= Delta_p lambda / (5 Lambda) on samples."""
    mats = [as_matrix(A), as_matrix(B)]
    bound = strict_bound(spec.p, A, B)
    pts, (vals, X, Y) = run_batches(_q_sampler(spec.p), _q_evaluator(spec, mats),
                                    n_samples, seed, threads)
    return _certificate(
        pts, vals, X, Y, bound, tol,
        {"kind": "off Upsilon", "zeta": "log-uniform [0.1, 10]",
         "ratio": "log-uniform [1e-6, 1e6]"},
        "product", seed, {"target": "Q", **spec.to_json()})


def calibrate_delta(p, A, B, n_samples=2000, seed=0, k_max=40, threads=1):
    """Largest delta = 2^-k whose sampled minimum meets the strict bound.

    Returns ``(delta, certificate)``.  Raises if Delta_p(A,B) <= 0 or no
    delta down to 2^-k_max works.
    """
    if joint_delta(p, A, B) <= 0:
        raise ValueError("Delta_p(A, B) must be positive")
    for k in range(1, k_max + 1):
        spec = BellmanSpec(p, 2.0 ** -k)
        cert = certify_q(spec, A, B, n_samples=n_samples, seed=seed,
                         tol=0.0, threads=threads)
        if cert.verdict == CERTIFIED:
            cert.parameters["calibration"] = {"k": k, "scan": "2^-k"}
            return spec.delta, cert
    raise RuntimeError(f"no delta >= 2^-{k_max} met the bound")


def reevaluate_q_witness(cert, A, B):
    """Normalized form at a Q certificate's witness, recomputed from scratch."""
    spec = BellmanSpec(cert.parameters["p"], cert.parameters["delta"])
    w = cert.witness
    H = gen_hessian(q_hessian(spec, w["omega"]), [A, B])
    return normalized_value(H, w["X"], w["Y"])


def certify_pn_outer(p, A, B, n, n_samples=10_000, seed=0, eps=None, tol=1e-9,
                     threads=1):
    """Check H_{P_n}[X, Y] >= (p + eps) n^{p-2} lambda (|X|^2 + |Y|^2) for |omega| > n.

    Points are drawn from the shell n < |omega| <= 10 n.
    """
    mats = [as_matrix(A), as_matrix(B)]
    if eps is None:
        eps = choose_epsilon(p, as_field(A), as_field(B))
    K = appx.big_k(p + eps, A, B)
    bound = (p + eps) * n ** (p - 2.0) * joint_ellipticity(A, B)

    def sampler(rng, k):
        pts = sample_shell(rng, k, n, 10.0 * n)
        return pts[np.linalg.norm(pts, axis=1) > n]

    def evaluate(pts, rng):
        _, _, h = appx.pn_eval(pts, n, p, eps, K)
        return _min_forms(gen_hessian(h, mats), "sphere")

    pts, (vals, X, Y) = run_batches(sampler, evaluate, n_samples, seed, threads)
    return _certificate(pts, vals, X, Y, bound, tol,
                        {"kind": "shell", "radius": [n, 10.0 * n]}, "sphere",
                        seed, {"p": p, "n": n, "epsilon": eps, "K": K,
                               "target": "P_n"})


# --------------------------------------------------------------------------
# R_{n, nu}


def build_approximant(bellman, A, B, n, nu, radius=8, eps=None):
    """ApproximantSpec with eps, kappa and K fixed by the pair (A, B)."""
    p = bellman.p
    if joint_delta(p, A, B) <= 0:
        raise ValueError("Delta_p(A, B) must be positive")
    if eps is None:
        eps = choose_epsilon(p, as_field(A), as_field(B))
    kap = appx.kappa(p + eps, A, B)
    K = appx.big_k(p + eps, A, B)
    return ApproximantSpec(n=n, nu=nu, epsilon=eps, kappa=kap, big_k=K,
                           radius=radius)


def _r_hessians(spec, bellman, mats, pts, q_parts=None):
    (av, ag, ah), (bv, bg, bh) = r_parts(spec, bellman, pts, q_parts)
    return gen_hessian(ah, mats), gen_hessian(bh, mats)


def calibrate_c1(bellman, A, B, nu, ns=(1, 2, 4), n_samples=10_000, seed=0,
                 eps=None, radius=8, max_power=64):
    """Smallest C1 = 2^k making R_{n,nu} convex on sampled annuli.

    Samples are split evenly over n in ``ns`` and drawn uniformly from the
    shells 3n <= |omega| <= 4n.  Since the generalized Hessian of R is
    affine in C1, the two parts are computed once and every candidate C1
    is checked with one batched eigenvalue computation.

    Returns a dict with ``c1`` (None when inconclusive), the per-candidate
    minima, and the fitted annulus constant of the mollified Q term.
    """
    A, B = as_field(A), as_field(B)
    if joint_delta(bellman.p, A, B) <= 0:
        raise ValueError("Delta_p(A, B) must be positive")
    mats = [A.matrices[0], B.matrices[0]]
    if A.ncells > 1 or B.ncells > 1:
        raise ValueError("C1 calibration expects constant matrices")
    rngs = _batch_seeds(seed, len(ns))
    per = -(-n_samples // len(ns))
    Ha, Hb, fitted = [], [], []
    eps_used = None
    for n, rng in zip(ns, rngs):
        spec = build_approximant(bellman, mats[0], mats[1], n, nu, radius, eps)
        eps_used = spec.epsilon
        pts = sample_shell(rng, per, 3.0 * n, 4.0 * n)
        (av, ag, ah), (bv, bg, bh) = r_parts(spec, bellman, pts)
        Ha.append(gen_hessian(ah, mats))
        Hb.append(gen_hessian(bh, mats))
        # annulus constant: |D^2 (psi_n Q*phi)| / (nu^{q-2} n^{p-2})
        fitted.append(np.max(np.linalg.norm(ah, ord=2, axis=(1, 2)))
                      / (nu ** (bellman.q - 2.0) * n ** (bellman.p - 2.0)))
    Ha = np.concatenate(Ha)
    Hb = np.concatenate(Hb)
    minima = {}
    c1 = None
    for k in range(0, max_power + 1):
        c = 2.0 ** k
        w = np.linalg.eigvalsh(0.5 * (Ha + c * Hb + np.swapaxes(Ha + c * Hb, 1, 2)))
        minima[k] = float(w[:, 0].min())
        if minima[k] >= 0:
            c1 = c
            break
    return {"c1": c1, "epsilon": eps_used, "minima": minima,
            "fitted_c0": float(max(fitted)), "n_values": list(ns),
            "sample_count": int(Ha.shape[0]),
            "verdict": CERTIFIED if c1 is not None else INCONCLUSIVE}


def certify_r(bellman, A, B, nu, c1, ns=(1, 2, 4), n_samples=10_000, seed=0,
              eps=None, radius=8, tol=0.0):
    """Certify R_{n,nu} on global samples for each n (sphere normalization).

    The same sample points are used for every n so that the mollified Q is
    computed once.  Returns a dict n -> certificate.
    """
    mats = [as_matrix(A), as_matrix(B)]
    rng = np.random.default_rng(seed)
    pts = sample_global(rng, n_samples, max(ns))
    moll = MollifierSpec(nu, radius)
    qp = mollified_q(bellman, moll, pts)
    out = {}
    for n in ns:
        spec = build_approximant(bellman, mats[0], mats[1], n, nu, radius, eps)
        spec.c1 = c1
        Ha, Hb = _r_hessians(spec, bellman, mats, pts, qp)
        vals, X = min_form_sphere(Ha + c1 * Hb)
        out[n] = _certificate(
            pts, vals, X, None, 0.0, tol,
            {"kind": "global", "radius": f"[0, {10 * max(ns)}]"},
            "sphere", seed, {"target": "R", "n": n, "nu": nu, "C1": c1,
                             "epsilon": spec.epsilon, **bellman.to_json()})
    return out


# largest |psi'| for the quintic cutoff profile, attained at u = 1/2
PSI_SLOPE = 30.0 / 16.0


def r_growth(bellman, A, B, nu, c1, ns=(1, 2, 4, 8), n_samples=2000, seed=0,
             eps=None, radius=8):
    """Fitted growth constants of R_{n,nu} and an n-independent majorant.

    For each n the fitted constant is the sampled maximum of
    |D R_{n,nu}| / (|omega|^{p-1} + |omega|^{q-1}).  The majorant bounds
    the three pieces of D R without reference to n:

    * |psi_n D(Q * phi)| <= |D(Q * phi)|;
    * |(Q * phi) D psi_n| <= |Q * phi| 4 max|psi'| / |omega| on |omega| >= 3,
      because D psi_n lives on 3n <= |omega| <= 4n with size max|psi'| / n;
    * C1 nu^{q-2} |D(P_n * phi)| <= C1 nu^{q-2} (C_P (|zeta|^{p-1} +
      |eta|^{p-1})) * phi, with C_P the n-independent constant of
      :func:`approximants.growth_constant`.

    Points are drawn by :func:`sample_global` at the largest n.
    """
    mats = [as_matrix(A), as_matrix(B)]
    p, q = bellman.p, bellman.q
    rng = np.random.default_rng(seed)
    pts = sample_global(rng, n_samples, max(ns))
    moll = MollifierSpec(nu, radius)
    qv, qg, qh = mollified_q(bellman, moll, pts)
    rad = np.linalg.norm(pts, axis=1)
    weight = rad ** (p - 1.0) + rad ** (q - 1.0)
    fitted = {}
    spec = None
    for n in ns:
        spec = build_approximant(bellman, mats[0], mats[1], n, nu, radius, eps)
        (av, ag, ah), (bv, bg, bh) = r_parts(spec, bellman, pts, (qv, qg, qh))
        fitted[n] = float(np.max(np.linalg.norm(ag + c1 * bg, axis=1) / weight))
    cp = appx.growth_constant(p, spec.epsilon, spec.big_k)
    nodes, w = quadrature(moll)
    smear = np.empty(len(pts))
    for i in range(0, len(pts), 256):
        y = pts[i:i + 256, None, :] - nodes[None]
        vals = (np.linalg.norm(y[..., :2], axis=-1) ** (p - 1.0)
                + np.linalg.norm(y[..., 2:], axis=-1) ** (p - 1.0))
        smear[i:i + 256] = vals @ w
    cut = np.where(rad >= 3.0, np.abs(qv) * 4.0 * PSI_SLOPE / np.maximum(rad, 3.0),
                   0.0)
    major = (np.linalg.norm(qg, axis=1) + cut
             + c1 * nu ** (q - 2.0) * cp * smear)
    return {"fitted": fitted, "majorant": float(np.max(major / weight)),
            "growth_constant_P": cp, "nu": nu, "C1": c1,
            "sample_count": int(n_samples)}


# --------------------------------------------------------------------------
# rigidity of radial functions


@dataclass(frozen=True)
class RadialProfile:
    """A scalar profile gamma with first and second derivatives."""

    name: str
    gamma: object
    d1: object
    d2: object
    params: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.name, **self.params}


def flat_then_quadratic(t0=1.0):
    """gamma(t) = max(0, t - t0)^2: flat on [0, t0], then quadratic."""
    return RadialProfile(
        "flat_quadratic",
        lambda t: np.maximum(0.0, t - t0) ** 2,
        lambda t: 2.0 * np.maximum(0.0, t - t0),
        lambda t: np.where(t > t0, 2.0, 0.0),
        {"t0": t0})


def power_profile(r):
    return RadialProfile(
        "power", lambda t: t ** r, lambda t: r * t ** (r - 1.0),
        lambda t: r * (r - 1.0) * t ** (r - 2.0), {"r": r})


def constant_profile(c=1.0):
    return RadialProfile(
        "constant", lambda t: c + 0.0 * t, lambda t: 0.0 * t,
        lambda t: 0.0 * t, {"c": c})


def profile_from_json(obj):
    kind = obj.get("kind")
    if kind == "flat_quadratic":
        return flat_then_quadratic(float(obj.get("t0", 1.0)))
    if kind == "power":
        return power_profile(float(obj["r"]))
    if kind == "constant":
        return constant_profile(float(obj.get("c", 1.0)))
    raise ValueError(f"unknown profile kind {kind!r}")


def _radial_forms(A, profile, zeta):
    rad = np.linalg.norm(zeta, axis=-1)
    h = radial_hessian(zeta, profile.d1(rad), profile.d2(rad))
    return min_form_sphere(gen_hessian(h, [A]))


def rigidity_probe(A, profile, n_samples=100_000, seed=0, r_max=3.0, tol=1e-12):
    """Search for a point and vector where H^A of gamma(|zeta|) is negative.

    zeta is sampled with |zeta| uniform on (0, r_max) and uniform angle;
    for each point the minimum over unit X is exact (an eigenvalue).  The
    best point is then refined by a bounded scalar search in |zeta| at
    fixed angle.
    """
    A = as_matrix(A)
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.0, r_max, n_samples)
    ang = rng.uniform(0.0, 2.0 * np.pi, n_samples)
    zeta = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    vals = np.empty(n_samples)
    vecs = np.empty((n_samples, 2 * A.shape[0]))
    for s in range(0, n_samples, 8192):
        vals[s:s + 8192], vecs[s:s + 8192] = _radial_forms(A, profile,
                                                           zeta[s:s + 8192])
    i = int(np.argmin(vals))
    best, bz, bx = vals[i], zeta[i], vecs[i]
    if best < 0:
        u = bz / np.linalg.norm(bz)

        def f(rad):
            return float(_radial_forms(A, profile, (rad * u)[None])[0][0])

        lo = max(1e-12, np.linalg.norm(bz) - r_max / 100.0)
        hi = min(r_max, np.linalg.norm(bz) + r_max / 100.0)
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < best:
            bz = res.x * u
            best, v = _radial_forms(A, profile, bz[None])
            best, bx = float(best[0]), v[0]
    wit = {"omega": bz, "X": bx, "Y": None}
    return ConvexityCertificate(
        region={"kind": "disc", "radius": r_max}, sample_count=n_samples,
        min_normalized_form=float(best), witness=wit,
        verdict=verdict_for(best, 0.0, tol), normalization="sphere",
        bound=0.0, tolerance=tol, seed=seed,
        parameters={"target": "radial", "profile": profile.to_json()})


def reevaluate_radial_witness(cert, A, profile):
    w = cert.witness
    zeta = np.asarray(w["omega"], dtype=float)
    rad = np.linalg.norm(zeta)
    h = radial_hessian(zeta, profile.d1(rad), profile.d2(rad))
    return normalized_value(gen_hessian(h, [A]), w["X"])
