"""Time stepping of u' + L u = 0 and the trace record.

Integrators:

* ``cn``: Crank-Nicolson with substep dt <= h^2 / (4 max(1, Lambda)) and a
  Richardson estimate from a second run at dt/2;
* ``dense``: scipy.linalg.expm of the dense matrix (N <= 2000), the oracle;
* ``eig``: eigendecomposition L = V diag(mu) V^-1, checked by residual and
  condition number; cheap for many output times;
* ``krylov``: scipy.sparse.linalg.expm_multiply, applied incrementally.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .operator import DiscreteOperator

DENSE_MAX = 2000
CSV_HEADER = ["t", "E", "norm_p", "norm_q", "bilinear"]


@dataclass
class FlowTrace:
    """Time-indexed states with norms, energy and the bilinear accumulator."""

    times: np.ndarray
    states: np.ndarray
    norms: dict = field(default_factory=dict)
    energy: np.ndarray = None
    bilinear: np.ndarray = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def rows(self, p=None, q=None):
        """Rows for the CSV contract t,E,norm_p,norm_q,bilinear."""
        nan = np.full(len(self.times), np.nan)
        cols = [self.times,
                nan if self.energy is None else self.energy,
                self.norms.get(p, nan) if p is not None else nan,
                self.norms.get(q, nan) if q is not None else nan,
                nan if self.bilinear is None else self.bilinear]
        return [[float(c[i]) for c in cols] for i in range(len(self.times))]

    def write_csv(self, path, p=None, q=None):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for row in self.rows(p, q):
                w.writerow([repr(x) for x in row])


def max_step(op: DiscreteOperator):
    return op.domain.h ** 2 / (4.0 * max(1.0, op.field.bound()))


def _check_times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1D list")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be increasing and nonnegative")
    return times


def _cn_run(L, u0, times, dt_max):
    n = L.shape[0]
    I = sp.identity(n, dtype=complex, format="csc")
    cache = {}
    out = np.empty((len(times),) + u0.shape, dtype=complex)
    u = u0.astype(complex)
    t = 0.0
    for k, tk in enumerate(times):
        span = tk - t
        if span > 0:
            m = int(np.ceil(span / dt_max - 1e-12))
            dt = span / m
            key = round(dt, 15)
            if key not in cache:
                lhs = spla.splu((I + 0.5 * dt * L).tocsc())
                cache[key] = (lhs, (I - 0.5 * dt * L).tocsr())
            lhs, rhs = cache[key]
            for _ in range(m):
                u = lhs.solve(np.asarray(rhs @ u))
        out[k] = u
        t = tk
    return out


def _mm(M, u):
    """M @ u without promoting a real M to complex."""
    if np.isrealobj(M) and np.iscomplexobj(u):
        return (M @ np.ascontiguousarray(u.real)
                + 1j * (M @ np.ascontiguousarray(u.imag)))
    return M @ np.ascontiguousarray(u)


class EigenPropagator:
    """exp(-tL) through a checked eigendecomposition of a dense L.

    Normal matrices (Hermitian, or a complex multiple of a Hermitian one)
    are diagonalized by ``eigh`` of the Hermitian part, which gives a
    unitary basis; other matrices use ``eig``.  Either way the residual
    |L V - V mu| and the condition number of V are checked.
    """

    def __init__(self, L, tol=1e-8):
        Ls = L if sp.issparse(L) else sp.csr_matrix(L)
        L = Ls.toarray()
        scale = max(1.0, float(abs(Ls).max()))
        comm = (Ls @ Ls.conj().T - Ls.conj().T @ Ls)
        self.normal = (comm.nnz == 0 or abs(comm).max() <= 1e-12 * scale ** 2)
        if self.normal:
            H = 0.5 * (L + L.conj().T)
            if np.all(H.imag == 0):
                H = H.real
            _, V = sla.eigh(H)
            LV = Ls @ V
            mu = np.einsum("ij,ij->j", np.conj(V), LV)
            Vinv = V.conj().T
            self.cond = 1.0
        else:
            mu, V = sla.eig(L)
            Vinv = sla.inv(V)
            self.cond = float(np.linalg.cond(V))
            LV = Ls @ V
        self.residual = float(np.abs(LV - V * mu).max() / max(1.0, np.abs(mu).max()))
        if self.residual > tol or self.cond > 1e10:
            raise np.linalg.LinAlgError(
                f"eigendecomposition unreliable (residual {self.residual:.2e}, "
                f"condition {self.cond:.2e})")
        self.mu = mu
        self.V = np.ascontiguousarray(V)
        self.Vinv = np.ascontiguousarray(Vinv)

    def coefficients(self, u0):
        return _mm(self.Vinv, u0)

    def apply(self, c, t):
        """States at times t (array) from eigen-coefficients c."""
        t = np.atleast_1d(t)
        decay = np.exp(-np.multiply.outer(t, self.mu))
        if c.ndim == 1:
            return _mm(self.V, (decay * c).T).T
        return np.stack([_mm(self.V, d[:, None] * c) for d in decay])

    def propagator(self, t):
        """Functions applying exp(-tL) and its adjoint exp(-tL)^H."""
        d = np.exp(-t * self.mu)
        V, Vinv = self.V, self.Vinv
        Vh = np.ascontiguousarray(V.conj().T)
        Winv = np.ascontiguousarray(Vinv.conj().T)

        def scale(x, w):
            return (w[:, None] if x.ndim > 1 else w) * x

        def forward(u):
            return _mm(V, scale(_mm(Vinv, u), d))

        def adjoint(u):
            return _mm(Winv, scale(_mm(Vh, u), np.conj(d)))

        return forward, adjoint


def propagate(op: DiscreteOperator, u0, times, method="cn", dt_max=None):
    """States exp(-t L) u0 at the given times; returns (states, info)."""
    times = _check_times(times)
    u0 = np.asarray(u0)
    L = op.matrix
    info = {"method": method}
    if method == "cn":
        dt_max = max_step(op) if dt_max is None else dt_max
        states = _cn_run(L, u0, times, dt_max)
        half = _cn_run(L, u0, times[-1:], 0.5 * dt_max)[0]
        scale = max(np.abs(half).max(), 1e-300)
        info.update(dt_max=dt_max,
                    richardson=float(4.0 * np.abs(states[-1] - half).max() / scale / 3.0))
    elif method == "dense":
        if op.n > DENSE_MAX:
            raise ValueError(f"dense path limited to N <= {DENSE_MAX}")
        Ld = L.toarray()
        states = np.empty((len(times),) + u0.shape, dtype=complex)
        for k, t in enumerate(times):
            states[k] = sla.expm(-t * Ld) @ u0
    elif method == "eig":
        prop = EigenPropagator(L)
        states = prop.apply(prop.coefficients(u0.astype(complex)), times)
        info.update(residual=prop.residual, condition=prop.cond)
    elif method == "krylov":
        A = (-L).tocsc()
        states = np.empty((len(times),) + u0.shape, dtype=complex)
        u = u0.astype(complex)
        t = 0.0
        for k, tk in enumerate(times):
            if tk > t:
                u = spla.expm_multiply(A * (tk - t), u)
            states[k] = u
            t = tk
    else:
        raise ValueError(f"unknown integrator {method!r}")
    return states, info


def step_semigroup(op: DiscreteOperator, u0, times, method="cn", norms=(),
                   dt_max=None) -> FlowTrace:
    """FlowTrace of exp(-tL) u0 with discrete L^r norms for each r in ``norms``."""
    states, info = propagate(op, u0, times, method, dt_max)
    trace = FlowTrace(times, states, extra=info)
    for r in norms:
        trace.norms[r] = np.array([op.norm(s, r) for s in states])
    return trace
