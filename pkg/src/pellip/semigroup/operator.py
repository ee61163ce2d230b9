"""Discrete divergence-form operators L = -div(A grad) on grid domains.

Each masked cell carries one coefficient matrix.  Gradients are the exact
gradients of continuous piecewise linear functions: in 1D on each cell, in
2D on the two right triangles of each cell.  The square is cut along the
diagonal that keeps the off-diagonal stiffness entries of a real symmetric
cell nonpositive (main diagonal when Re(a12 + a21) > 0).  The form is

    a_h(u, v) = sum_T |T| <A_T grad_T u, grad_T v>,

and with the lumped inner product <u, v>_h = sum_i u_i conj(v_i) h^d the
operator L = K / h^d satisfies <L u, v>_h = a_h(u, v) identically.
Dirichlet nodes are removed from the unknowns; Neumann nodes keep their
full (one-sided) element contributions.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..algebra import ComplexMatrixField, as_field
from .domain import GridDomain


def _cell_matrices(field: ComplexMatrixField, dom: GridDomain):
    """(ncells_total, d, d) matrices aligned with the lattice cells."""
    n = int(np.prod(dom.shape))
    if field.d != dom.dim:
        raise ValueError(f"{dom.dim}D domain needs {dom.dim}x{dom.dim} matrices")
    if field.ncells == 1:
        return np.broadcast_to(field.matrices, (n,) + field.matrices.shape[1:])
    if field.ncells != n or (field.cell_shape is not None
                             and tuple(field.cell_shape) != tuple(dom.shape)):
        raise ValueError(f"field with {field.ncells} cells does not align "
                         f"with a lattice of shape {dom.shape}")
    return field.matrices


def _elements(dom: GridDomain, mats):
    """Element gradient stencils.

    Returns ``(nodes, coef, cell, area)`` where each element has ``dim``
    gradient components; component k is sum_j coef[e, k, j] u[nodes[e, j]].
    """
    h = dom.h
    shape = dom.node_shape
    if dom.dim == 1:
        cells = np.nonzero(dom.cell_mask)[0]
        nodes = np.stack([cells, cells + 1], axis=1)
        coef = np.tile(np.array([[[-1.0, 1.0]]]) / h, (len(cells), 1, 1))
        return nodes, coef, cells, np.full(len(cells), h)
    ci, cj = np.nonzero(dom.cell_mask)
    flat = np.ravel_multi_index((ci, cj), dom.shape)
    n00 = np.ravel_multi_index((ci, cj), shape)
    n10 = np.ravel_multi_index((ci + 1, cj), shape)
    n01 = np.ravel_multi_index((ci, cj + 1), shape)
    n11 = np.ravel_multi_index((ci + 1, cj + 1), shape)
    main = np.real(mats[flat, 0, 1] + mats[flat, 1, 0]) > 0
    # gradients as (x-row, y-row) over the three vertices of each triangle
    # main diagonal: (00, 10, 11) and (00, 11, 01)
    # anti diagonal: (00, 10, 01) and (10, 11, 01)
    t1 = np.where(main[:, None], np.stack([n00, n10, n11], 1),
                  np.stack([n00, n10, n01], 1))
    t2 = np.where(main[:, None], np.stack([n00, n11, n01], 1),
                  np.stack([n10, n11, n01], 1))
    g1_main = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
    g2_main = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0]])
    g1_anti = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    g2_anti = np.array([[0.0, 1.0, -1.0], [-1.0, 1.0, 0.0]])
    c1 = np.where(main[:, None, None], g1_main, g1_anti) / h
    c2 = np.where(main[:, None, None], g2_main, g2_anti) / h
    nodes = np.concatenate([t1, t2])
    coef = np.concatenate([c1, c2])
    cell = np.concatenate([flat, flat])
    return nodes, coef, cell, np.full(len(cell), 0.5 * h * h)


@dataclass
class DiscreteOperator:
    """Assembled operator with its gradient and form.

    ``stiffness`` is the sparse matrix K on free nodes (so that L = K/h^d);
    ``grad`` maps full node vectors to element gradients stacked as
    (element, component).
    """

    domain: GridDomain
    field: ComplexMatrixField
    stiffness: sp.csr_matrix
    grad: sp.csr_matrix
    element_matrices: np.ndarray
    element_nodes: np.ndarray
    areas: np.ndarray
    element_cells: np.ndarray
    free_index: np.ndarray

    @property
    def n(self):
        return self.stiffness.shape[0]

    @property
    def weight(self):
        return self.domain.cell_volume

    @property
    def matrix(self):
        """L = K / h^d as a sparse matrix."""
        return (self.stiffness / self.weight).tocsr()

    def apply(self, u):
        return self.stiffness @ u / self.weight

    def extend(self, u):
        """Embed free-node values into the full node lattice (zeros elsewhere)."""
        u = np.asarray(u)
        out = np.zeros((int(np.prod(self.domain.node_shape)),) + u.shape[1:],
                       dtype=np.result_type(u, float))
        out[self.free_index] = u
        return out

    def gradient(self, u):
        """Element gradients, shape (elements, dim) (+ batch axes)."""
        g = self.grad @ self.extend(u)
        d = self.domain.dim
        return g.reshape((-1, d) + g.shape[1:])

    def gradient_of(self, other, v):
        """Gradient of a state of ``other`` on this operator's elements.

        Both operators live on the same lattice; only their Dirichlet sets
        and diagonal cuts may differ.
        """
        g = self.grad @ other.extend(v)
        return g.reshape((-1, self.domain.dim) + g.shape[1:])

    def gradient_magnitude(self, u):
        return np.sqrt(np.sum(np.abs(self.gradient(u)) ** 2, axis=1))

    def gradient_magnitude_of(self, other, v):
        return np.sqrt(np.sum(np.abs(self.gradient_of(other, v)) ** 2, axis=1))

    def matrices_on_elements(self, field):
        """Cell matrices of another field arranged on this operator's elements."""
        return np.ascontiguousarray(
            _cell_matrices(as_field(field), self.domain)[self.element_cells])

    def form(self, u, v):
        """a_h(u, v) = sum_T |T| <A_T grad u, grad v> from element gradients."""
        gu = self.gradient(u)
        gv = self.gradient(v)
        Agu = np.einsum("eij,ej...->ei...", self.element_matrices, gu)
        return np.sum(self.areas.reshape((-1,) + (1,) * (gu.ndim - 1))
                      * Agu * np.conj(gv), axis=(0, 1))

    def inner(self, u, v):
        return np.sum(u * np.conj(v), axis=0) * self.weight

    def norm(self, u, r):
        """Discrete L^r norm (sum |u_i|^r h^d)^(1/r)."""
        u = np.abs(np.asarray(u))
        if np.isinf(r):
            return u.max(axis=0)
        return (np.sum(u ** r, axis=0) * self.weight) ** (1.0 / r)

    def mass(self, u):
        return np.sum(u, axis=0) * self.weight

    def adjoint(self):
        return assemble_operator(self.field.adjoint(), self.domain)

    def is_hermitian(self, tol=0.0):
        diff = self.stiffness - self.stiffness.conj().T
        return abs(diff).max() <= tol if diff.nnz else True


def assemble_operator(A, domain: GridDomain) -> DiscreteOperator:
    """Assemble K = G^T diag(|T| A_T) G and remove Dirichlet nodes."""
    field = as_field(A)
    mats = _cell_matrices(field, domain)
    nodes, coef, cell, area = _elements(domain, mats)
    d = domain.dim
    ne, nv = nodes.shape
    n_all = int(np.prod(domain.node_shape))
    rows = np.repeat(np.arange(ne * d), nv)
    cols = np.repeat(nodes, d, axis=0).ravel()
    G = sp.csr_matrix((coef.reshape(-1), (rows, cols)), shape=(ne * d, n_all))
    emats = np.ascontiguousarray(mats[cell])
    W = _block_diag(area[:, None, None] * emats)
    K = (G.T @ W @ G).tocsr()
    free_index = np.nonzero(domain.free.ravel())[0]
    K = K[free_index][:, free_index].tocsr()
    K.eliminate_zeros()
    return DiscreteOperator(domain, field, K, G, emats, nodes, area, cell,
                            free_index)


def _block_diag(blocks):
    """Sparse block diagonal matrix from an (n, d, d) stack."""
    n, d, _ = blocks.shape
    base = d * np.arange(n)
    r = (base[:, None, None] + np.arange(d)[None, :, None]).repeat(d, axis=2)
    c = (base[:, None, None] + np.arange(d)[None, None, :]).repeat(d, axis=1)
    return sp.csr_matrix((blocks.ravel(), (r.ravel(), c.ravel())),
                         shape=(n * d, n * d))
