"""Masked lattice domains with a Dirichlet/Neumann split of the boundary.

A domain is a uniform lattice of square (or interval) cells of width h with
a boolean cell mask.  Nodes are the cell corners.  A node is active when it
touches a masked cell and lies on the discrete boundary when some of its
2^dim incident cells are missing.  Each boundary node is either Dirichlet
(value pinned to zero) or Neumann (natural condition of the form).
"""

from dataclasses import dataclass, field

import numpy as np

SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class GridDomain:
    """Lattice with ``shape`` cells per axis, mesh width ``h`` and a mask.

    Axis 0 is x and axis 1 (in 2D) is y.  ``dirichlet`` is a boolean array
    over nodes (shape ``shape + 1``) and is always a subset of the boundary.
    """

    h: float
    cell_mask: np.ndarray
    dirichlet: np.ndarray
    origin: tuple = (0.0, 0.0)
    label: str = "grid"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        mask = np.asarray(self.cell_mask, dtype=bool)
        if mask.ndim not in (1, 2):
            raise ValueError("only 1D and 2D domains are supported")
        if not mask.any():
            raise ValueError("empty cell mask")
        if not self.h > 0:
            raise ValueError("mesh width must be positive")
        object.__setattr__(self, "cell_mask", mask)
        dirichlet = np.asarray(self.dirichlet, dtype=bool)
        if dirichlet.shape != self.node_shape:
            raise ValueError("Dirichlet array must live on nodes")
        object.__setattr__(self, "dirichlet", dirichlet & self.boundary)

    @property
    def dim(self):
        return self.cell_mask.ndim

    @property
    def shape(self):
        return self.cell_mask.shape

    @property
    def node_shape(self):
        return tuple(s + 1 for s in self.shape)

    @property
    def incident(self):
        """Number of masked cells touching each node."""
        m = self.cell_mask.astype(int)
        if self.dim == 1:
            return np.pad(m, (1, 0)) + np.pad(m, (0, 1))
        out = np.zeros(self.node_shape, dtype=int)
        for di in (0, 1):
            for dj in (0, 1):
                out[di:di + m.shape[0], dj:dj + m.shape[1]] += m
        return out

    @property
    def active(self):
        return self.incident > 0

    @property
    def boundary(self):
        inc = self.incident
        return (inc > 0) & (inc < 2 ** self.dim)

    @property
    def neumann(self):
        return self.boundary & ~self.dirichlet

    @property
    def free(self):
        """Nodes carrying unknowns: active and not Dirichlet."""
        return self.active & ~self.dirichlet

    @property
    def n_free(self):
        return int(self.free.sum())

    @property
    def cell_volume(self):
        return self.h ** self.dim

    def node_coordinates(self):
        """Array of node coordinates with shape ``node_shape + (dim,)``."""
        axes = [self.origin[k] + self.h * np.arange(n)
                for k, n in enumerate(self.node_shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def free_coordinates(self):
        return self.node_coordinates()[self.free]

    def with_dirichlet(self, spec):
        """Same mask with a different Dirichlet set."""
        return GridDomain(self.h, self.cell_mask, _dirichlet_from(self, spec),
                          self.origin, self.label, dict(self.extra))

    def to_json(self):
        return {"label": self.label, "dim": self.dim, "shape": list(self.shape),
                "h": self.h, "cells": int(self.cell_mask.sum()),
                "free_nodes": self.n_free,
                "dirichlet_nodes": int(self.dirichlet.sum()),
                "neumann_nodes": int(self.neumann.sum()), **self.extra}


def _dirichlet_from(dom, spec):
    """Boolean node array from "all", "none", a list of sides, or a callable.

    Sides refer to the bounding box of the active nodes; a callable gets
    the node coordinates (``node_shape + (dim,)``) and returns a mask.
    """
    bnd = dom.boundary
    if spec is None or spec == "none":
        return np.zeros(dom.node_shape, dtype=bool)
    if spec == "all":
        return bnd.copy()
    X = dom.node_coordinates()
    if callable(spec):
        return np.asarray(spec(X), dtype=bool) & bnd
    if isinstance(spec, str):
        spec = [spec]
    act = dom.active
    out = np.zeros(dom.node_shape, dtype=bool)
    tol = 1e-9 * dom.h
    for side in spec:
        if side not in SIDES:
            raise ValueError(f"unknown side {side!r}")
        axis = 0 if side in ("left", "right") else 1
        if axis >= dom.dim:
            raise ValueError(f"side {side!r} needs a 2D domain")
        coord = X[..., axis]
        ext = coord[act].min() if side in ("left", "bottom") else coord[act].max()
        out |= np.abs(coord - ext) < tol
    return out & bnd


def _make(h, mask, dirichlet, origin=(0.0, 0.0), label="grid", extra=None):
    dom = GridDomain(h, mask, np.zeros(tuple(s + 1 for s in np.shape(mask)), bool),
                     origin, label, extra or {})
    return dom.with_dirichlet(dirichlet)


def interval(n, length=1.0, dirichlet="all"):
    """[0, length] split into n cells; ``dirichlet`` may name "left"/"right"."""
    return _make(length / n, np.ones(n, dtype=bool), dirichlet,
                 label="interval", extra={"length": length})


def rectangle(nx, ny, lx=1.0, ly=None, dirichlet="all"):
    """[0, lx] x [0, ly] with square cells (ly defaults to lx * ny / nx)."""
    h = lx / nx
    if ly is not None and not np.isclose(ly / ny, h):
        raise ValueError("cells must be square")
    return _make(h, np.ones((nx, ny), dtype=bool), dirichlet, label="rectangle")


def l_shape(n, length=1.0, dirichlet="all"):
    """Square of side ``length`` on an n x n lattice minus its upper right quarter."""
    if n % 2:
        raise ValueError("n must be even")
    mask = np.ones((n, n), dtype=bool)
    mask[n // 2:, n // 2:] = False
    return _make(length / n, mask, dirichlet, label="l_shape")


def from_bitmap(bitmap, h, dirichlet="all"):
    """Mask taken from a 1D or 2D 0/1 array (rows are x, columns are y)."""
    return _make(h, np.asarray(bitmap).astype(bool), dirichlet, label="bitmap")


def horn_truncation(alpha, c, omitted=1e-6):
    """Smallest X with omitted horn area c e^{-alpha X}/alpha below ``omitted``."""
    return max(0.0, np.log(c / (alpha * omitted)) / alpha)


def horn(alpha, c=1.0, h=1.0 / 32, x_max=None, dirichlet="none"):
    """Cells of width h lying entirely inside {0 < x < X, |y| < c e^{-alpha x}}.

    The cut at x = X is a Neumann boundary by default.  Columns narrower
    than one cell drop out, so the effective length is reported in
    ``extra``.
    """
    if x_max is None:
        x_max = horn_truncation(alpha, c)
    nx = int(np.ceil(x_max / h))
    half = int(np.ceil(c / h))
    x_hi = h * np.arange(1, nx + 1)
    y_lo = -half * h + h * np.arange(2 * half)
    y_hi = y_lo + h
    width = c * np.exp(-alpha * x_hi)
    mask = np.maximum(np.abs(y_lo)[None, :], np.abs(y_hi)[None, :]) <= width[:, None]
    cols = np.nonzero(mask.any(axis=1))[0]
    if cols.size == 0:
        raise ValueError("no cell fits inside the horn at this resolution")
    extra = {"alpha": alpha, "c": c, "x_max": float(x_max),
             "effective_length": float(h * (cols[-1] + 1)),
             "omitted_area": float(c * np.exp(-alpha * x_max) / alpha)}
    return _make(h, mask, dirichlet, origin=(0.0, -half * h), label="horn",
                 extra=extra)


def build_domain(cfg):
    """Domain from a JSON-style descriptor with a ``kind`` key."""
    cfg = dict(cfg)
    kind = cfg.pop("kind")
    bc = cfg.pop("dirichlet", "none" if kind == "horn" else "all")
    if kind == "interval":
        return interval(int(cfg["n"]), float(cfg.get("length", 1.0)), bc)
    if kind == "rectangle":
        nx = int(cfg["nx"])
        return rectangle(nx, int(cfg.get("ny", nx)), float(cfg.get("lx", 1.0)),
                         dirichlet=bc)
    if kind == "l_shape":
        return l_shape(int(cfg["n"]), float(cfg.get("length", 1.0)), bc)
    if kind == "bitmap":
        return from_bitmap(np.asarray(cfg["bitmap"]), float(cfg["h"]), bc)
    if kind == "horn":
        return horn(float(cfg["alpha"]), float(cfg.get("c", 1.0)),
                    float(cfg.get("h", 1.0 / 32)), cfg.get("x_max"), bc)
    raise ValueError(f"unknown domain kind {kind!r}")
