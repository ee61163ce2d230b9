"""Complex matrices, their real forms and the p-ellipticity constant.

A complex d x d matrix ``A`` acts on ``R^{2d}`` through its real form

    M(A) = [[Re A, -Im A],
            [Im A,  Re A]]

where a vector ``xi`` in ``C^d`` is identified with ``(Re xi, Im xi)``.
The p-ellipticity constant

    Delta_p(A) = min_{|xi| = 1} Re <A xi, xi + (1 - 2/p) conj(xi)>

is a quadratic form on the real sphere, so it is computed exactly as the
smallest eigenvalue of a symmetric 2d x 2d matrix.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

P_MAX = 1.0e6
P_TOL = 1.0e-9
THETA_TOL = 1.0e-8
ROUNDING = 1.0e-12


# --------------------------------------------------------------------------
# real forms


def real_form(A):
    """Real 2d x 2d block matrix of a complex d x d matrix (batched ok)."""
    A = np.asarray(A, dtype=complex)
    re, im = A.real, A.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def symplectic(d):
    """Real form ``J`` of multiplication by ``i`` on ``C^d``."""
    return real_form(1j * np.eye(d))


def conjugation(d):
    """Real form of complex conjugation, ``diag(I_d, -I_d)``."""
    return np.diag(np.concatenate([np.ones(d), -np.ones(d)]))


def realify(xi):
    """Map ``xi`` in ``C^d`` to ``(Re xi, Im xi)`` in ``R^{2d}``."""
    xi = np.asarray(xi, dtype=complex)
    return np.concatenate([xi.real, xi.imag], axis=-1)


def complexify(X):
    """Inverse of :func:`realify`."""
    X = np.asarray(X, dtype=float)
    d = X.shape[-1] // 2
    return X[..., :d] + 1j * X[..., d:]


def as_matrix(A):
    """Coerce to a square complex array, raising on bad shape."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def ellipticity(A):
    """lambda(A) = min over unit xi of Re<A xi, xi> (batched ok)."""
    A = np.asarray(A, dtype=complex)
    H = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    return np.linalg.eigvalsh(H)[..., 0]


def bound(A):
    """Lambda(A), the spectral norm (the smallest admissible bound)."""
    A = np.asarray(A, dtype=complex)
    return np.linalg.norm(A, ord=2, axis=(-2, -1))


def form_matrix(A, p):
    """Symmetric real matrix whose quadratic form is Re<A xi, I_p xi>."""
    A = np.asarray(A, dtype=complex)
    d = A.shape[-1]
    beta = 1.0 - 2.0 / p
    T = np.eye(2 * d) + beta * conjugation(d)
    return _sym(T @ real_form(A))


def form_value(A, p, X):
    """Evaluate Re<A xi, I_p xi> at real vectors ``X`` of shape (..., 2d)."""
    A = as_matrix(A)
    X = np.asarray(X, dtype=float)
    xi = complexify(X)
    d = A.shape[0]
    Axi = xi @ A.T
    Ipxi = xi + (1.0 - 2.0 / p) * np.conj(xi)
    return np.real(np.sum(Axi * np.conj(Ipxi), axis=-1)) if d else 0.0


def _check_p(p):
    if not np.isfinite(p) or p <= 1:
        raise ValueError(f"p must be a finite number > 1, got {p}")


def delta_p(A, p):
    """Delta_p(A) for a matrix or a stack of matrices (min over the stack)."""
    _check_p(p)
    A = np.asarray(A, dtype=complex)
    w = np.linalg.eigvalsh(form_matrix(A, p))[..., 0]
    return float(np.min(w))


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class ComplexMatrixField:
    """Piecewise constant matrix field, one d x d matrix per cell.

    ``matrices`` has shape ``(ncells, d, d)``; ``cell_shape`` records the
    lattice layout of the cells (row-major) when the field is tied to a grid.
    """

    matrices: np.ndarray
    cell_shape: Optional[tuple] = None

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim == 2:
            m = m[None]
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ValueError(f"bad matrix stack shape {m.shape}")
        if m.shape[0] == 0:
            raise ValueError("empty matrix field")
        object.__setattr__(self, "matrices", m)
        if self.cell_shape is not None:
            shape = tuple(int(s) for s in self.cell_shape)
            if int(np.prod(shape)) != m.shape[0]:
                raise ValueError(
                    f"cell_shape {shape} does not match {m.shape[0]} cells")
            object.__setattr__(self, "cell_shape", shape)

    @property
    def d(self):
        return self.matrices.shape[1]

    @property
    def ncells(self):
        return self.matrices.shape[0]

    @classmethod
    def constant(cls, A, cell_shape=(1,)):
        A = as_matrix(A)
        n = int(np.prod(cell_shape))
        return cls(np.broadcast_to(A, (n,) + A.shape).copy(), cell_shape)

    def adjoint(self):
        return ComplexMatrixField(
            np.conj(np.swapaxes(self.matrices, 1, 2)), self.cell_shape)

    def rotated(self, theta):
        return ComplexMatrixField(np.exp(1j * theta) * self.matrices,
                                  self.cell_shape)

    def ellipticity(self):
        return float(np.min(ellipticity(self.matrices)))

    def bound(self):
        return float(np.max(bound(self.matrices)))

    def is_real(self):
        return bool(np.all(self.matrices.imag == 0))


def as_field(A):
    if isinstance(A, ComplexMatrixField):
        return A
    return ComplexMatrixField(np.asarray(A, dtype=complex))


def joint_ellipticity(*fields):
    return min(as_field(F).ellipticity() for F in fields)


def joint_bound(*fields):
    return max(as_field(F).bound() for F in fields)


def joint_delta(p, *fields):
    """Delta_p(A, B, ...) = min of Delta_p over all fields."""
    return min(delta_p(as_field(F).matrices, p) for F in fields)


# --------------------------------------------------------------------------
# reports


@dataclass
class PEllipticityReport:
    """Value of Delta_p together with a minimizer and the p-range."""

    p: float
    delta: float
    minimizer: np.ndarray
    p_range: Optional[tuple] = None
    bounded: Optional[bool] = None
    cell: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {
            "p": float(self.p),
            "delta": float(self.delta),
            "minimizer": [float(x) for x in self.minimizer],
            "p_range": None if self.p_range is None
            else [float(self.p_range[0]), _json_float(self.p_range[1])],
            "bounded": self.bounded,
        }
        if self.cell is not None:
            out["cell"] = int(self.cell)
        return out


def _json_float(x):
    x = float(x)
    return "inf" if np.isinf(x) else x


def delta_p_report(A, p, with_range=True):
    """Delta_p of a matrix or field with minimizer, cell and p-range."""
    _check_p(p)
    F = as_field(A)
    S = form_matrix(F.matrices, p)
    w, V = np.linalg.eigh(S)
    cell = int(np.argmin(w[:, 0]))
    delta = float(w[cell, 0])
    x = V[cell, :, 0]
    # fix the sign of the eigenvector so output is deterministic
    k = int(np.argmax(np.abs(x)))
    if x[k] < 0:
        x = -x
    report = PEllipticityReport(p=float(p), delta=delta, minimizer=x,
                                cell=cell if F.ncells > 1 else None)
    if with_range and F.ellipticity() > 0:
        lo, hi, bounded = p_ellipticity_range(F)
        report.p_range = (lo, hi)
        report.bounded = bounded
    return report


def p_ellipticity_range(A, p_max=P_MAX, tol=P_TOL):
    """Open interval ``(p-, p+)`` on which Delta_p(A) > 0.

    Returns ``(p_minus, p_plus, bounded)``.  When Delta_p stays positive up to
    ``p_max`` the interval is reported as ``(1, inf)`` with ``bounded=False``.
    Delta_p is nonincreasing on [2, inf), so bisection is valid.
    """
    F = as_field(A)
    m = F.matrices
    # Delta_2 within rounding of zero (e.g. e^{i pi/2} I) counts as degenerate
    if delta_p(m, 2.0) <= ROUNDING * max(1.0, F.bound()):
        raise ValueError("field is not elliptic (Delta_2 <= 0)")
    if delta_p(m, p_max) > 0:
        return 1.0, np.inf, False
    lo, hi = 2.0, float(p_max)
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if delta_p(m, mid) > 0:
            lo = mid
        else:
            hi = mid
    p_plus = 0.5 * (lo + hi)
    return p_plus / (p_plus - 1.0), p_plus, True


def analyticity_angle(A, p, tol=THETA_TOL):
    """Supremum of theta with Delta_p(e^{+-i theta} A) > 0.

    For each xi the map theta -> Re<e^{i theta} A xi, I_p xi> is a sinusoid
    that is positive on an arc containing 0, so the admissible set is an
    interval and bisection applies.
    """
    F = as_field(A)
    m = F.matrices
    if delta_p(m, p) <= 0:
        raise ValueError("Delta_p(A) must be positive")

    def ok(theta):
        return min(delta_p(np.exp(1j * theta) * m, p),
                   delta_p(np.exp(-1j * theta) * m, p)) > 0

    lo, hi = 0.0, 0.5 * np.pi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def choose_epsilon(p, *fields, tol=1e-10):
    """Largest eps <= 1 with Delta_{p+eps} > Delta_p / 2 (bisection)."""
    target = 0.5 * joint_delta(p, *fields)
    if target <= 0:
        raise ValueError("Delta_p of the pair must be positive")
    if joint_delta(p + 1.0, *fields) > target:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if joint_delta(p + mid, *fields) > target:
            lo = mid
        else:
            hi = mid
    return lo


# --------------------------------------------------------------------------
# JSON


def matrix_from_json(obj, d=None):
    """Parse ``{"re": [[...]], "im": [[...]]}`` or ``{"d": d, "phase": phi}``."""
    if "phase" in obj:
        dd = int(obj.get("d", d or 1))
        scale = float(obj.get("scale", 1.0))
        return scale * np.exp(1j * float(obj["phase"])) * np.eye(dd)
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ValueError("re and im parts have different shapes")
    return as_matrix(re + 1j * im)


def matrix_to_json(A):
    A = as_matrix(A)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}


def field_from_json(obj, cell_shape=None):
    """Parse ``{"d": d, "cells": [...]}``, a single matrix, or a phase."""
    if "cells" in obj:
        d = int(obj["d"])
        cells = [matrix_from_json(c, d) for c in obj["cells"]]
        if any(c.shape != (d, d) for c in cells):
            raise ValueError("cell matrix does not match d")
        shape = obj.get("cell_shape", cell_shape)
        if shape is not None and len(cells) == 1 and np.prod(shape) > 1:
            return ComplexMatrixField.constant(cells[0], tuple(shape))
        return ComplexMatrixField(np.array(cells),
                                  None if shape is None else tuple(shape))
    A = matrix_from_json(obj)
    if cell_shape is not None:
        return ComplexMatrixField.constant(A, tuple(cell_shape))
    return ComplexMatrixField(A)


def field_to_json(F):
    F = as_field(F)
    out = {"d": F.d, "cells": [matrix_to_json(A) for A in F.matrices]}
    if F.cell_shape is not None:
        out["cell_shape"] = list(F.cell_shape)
    return out


def random_elliptic(rng, d, imag_scale=1.0, margin=0.1):
    """Random complex matrix with lambda(A) >= margin."""
    A = rng.standard_normal((d, d)) + imag_scale * 1j * rng.standard_normal((d, d))
    lam = ellipticity(A)
    return A + (margin - lam) * np.eye(d)


def random_p_elliptic(rng, d, p, imag_scale=0.5, margin=0.05):
    """Random complex matrix with Delta_p(A) >= margin.

    Uses Delta_p(A + sI) >= Delta_p(A) + s (1 - |1 - 2/p|) for s >= 0.
    """
    A = rng.standard_normal((d, d)) + imag_scale * 1j * rng.standard_normal((d, d))
    dp = delta_p(A, p)
    if dp < margin:
        A = A + (margin - dp) / (1.0 - abs(1.0 - 2.0 / p)) * np.eye(d)
    return A
