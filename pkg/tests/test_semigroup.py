import csv

import numpy as np
import pytest

from pellip.algebra import ComplexMatrixField, random_p_elliptic
from pellip.bellman.nazarov_treil import BellmanSpec
from pellip.semigroup.domain import (build_domain, horn, interval, l_shape,
                                     rectangle)
from pellip.semigroup.experiments import (INCONCLUSIVE, PASS, VIOLATION,
                                          bilinear_embedding, contractivity,
                                          heat_flow_trace, smooth_data)
from pellip.semigroup.flow import FlowTrace, max_step, propagate, step_semigroup
from pellip.semigroup.operator import assemble_operator


def complex_field(rng, shape, d=2):
    n = int(np.prod(shape))
    M = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    return ComplexMatrixField(M + 3 * np.eye(d), shape)


def cvec(rng, n, k=None):
    size = n if k is None else (n, k)
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


# --------------------------------------------------------------------------
# domains


def test_interval_nodes_and_boundary():
    dom = interval(8)
    assert dom.node_shape == (9,)
    assert dom.n_free == 7
    assert interval(8, dirichlet="left").n_free == 8
    assert interval(8, dirichlet="none").n_free == 9


def test_l_shape_and_sides():
    dom = l_shape(8)
    assert dom.cell_mask.sum() == 48
    # the reentrant corner node is a boundary node
    assert dom.boundary[4, 4]
    mixed = rectangle(4, 4, dirichlet=["left"])
    assert mixed.dirichlet[0].all() and not mixed.dirichlet[1:].any()


def test_horn_reports_effective_length():
    dom = horn(1.0, h=1.0 / 16)
    assert dom.extra["effective_length"] <= dom.extra["x_max"] + dom.h
    assert dom.extra["omitted_area"] == pytest.approx(1e-6, rel=1e-12)
    assert not dom.dirichlet.any()


def test_build_domain_rejects_unknown_kind():
    with pytest.raises(ValueError):
        build_domain({"kind": "disc"})


# --------------------------------------------------------------------------
# operator identities


@pytest.mark.parametrize("dom", [interval(32, dirichlet="left"),
                                 rectangle(8, 8, dirichlet=["left", "top"]),
                                 l_shape(8)])
def test_integration_by_parts(dom):
    rng = np.random.default_rng(0)
    op = assemble_operator(complex_field(rng, dom.shape, dom.dim), dom)
    u, v = cvec(rng, op.n), cvec(rng, op.n)
    lhs = op.inner(op.apply(u), v)
    rhs = op.form(u, v)
    scale = op.weight * np.sum(np.abs(op.apply(u)) * np.abs(v))
    assert abs(lhs - rhs) <= 1e-13 * scale


def test_adjoint_consistency():
    rng = np.random.default_rng(1)
    dom = rectangle(6, 6, dirichlet=["bottom"])
    op = assemble_operator(complex_field(rng, dom.shape), dom)
    adj = op.adjoint()
    # equal up to the summation order of the sparse products
    eps = np.finfo(float).eps
    K = op.stiffness
    assert abs(adj.stiffness - K.conj().T).max() <= 4 * eps * abs(K).max()
    u, v = cvec(rng, op.n), cvec(rng, op.n)
    assert op.inner(op.apply(u), v) == pytest.approx(op.inner(u, adj.apply(v)),
                                                     rel=1e-13)


@pytest.mark.parametrize("dom", [interval(16, dirichlet="none"),
                                 rectangle(6, 6, dirichlet="none"),
                                 l_shape(6, dirichlet="none")])
def test_neumann_constants_in_kernel(dom):
    rng = np.random.default_rng(2)
    op = assemble_operator(complex_field(rng, dom.shape, dom.dim), dom)
    scale = np.abs(op.matrix).max()
    assert np.abs(op.apply(np.ones(op.n))).max() <= 1e-12 * scale


def test_semigroup_property():
    rng = np.random.default_rng(3)
    dom = rectangle(8, 8)
    op = assemble_operator(complex_field(rng, dom.shape), dom)
    u0 = cvec(rng, op.n)
    s, t = 0.01, 0.02
    # Crank-Nicolson is a semigroup in its own step, so use one that divides s
    dt = s / np.ceil(s / max_step(op))
    for method, tol in (("dense", 1e-12), ("eig", 1e-8), ("cn", 1e-8)):
        kw = {"dt_max": dt} if method == "cn" else {}
        both, _ = propagate(op, u0, [s + t], method, **kw)
        first, _ = propagate(op, u0, [s], method, **kw)
        second, _ = propagate(op, first[0], [t], method, **kw)
        err = np.abs(both[0] - second[0]).max() / np.abs(both[0]).max()
        assert err <= tol, method


def test_integrators_agree():
    dom = interval(32)
    op = assemble_operator(np.exp(0.3j) * np.eye(1), dom)
    x = dom.free_coordinates()[:, 0]
    u0 = np.sin(np.pi * x) + 1j * np.sin(2 * np.pi * x)
    ref, _ = propagate(op, u0, [0.01, 0.05], "dense")
    for method in ("eig", "krylov"):
        got, _ = propagate(op, u0, [0.01, 0.05], method)
        assert np.allclose(got, ref, rtol=0, atol=1e-10 * np.abs(ref).max())
    got, info = propagate(op, u0, [0.01, 0.05], "cn")
    # the Richardson estimate covers the final time
    err = np.abs(got[-1] - ref[-1]).max() / np.abs(ref[-1]).max()
    assert err <= 2 * info["richardson"]


# --------------------------------------------------------------------------
# traces


def test_flow_csv(tmp_path):
    dom = interval(16)
    op = assemble_operator(np.eye(1), dom)
    u0 = np.sin(np.pi * dom.free_coordinates()[:, 0])
    times = np.linspace(0.0, 0.1, 100)
    trace = step_semigroup(op, u0, times, "eig", norms=(3.0, 1.5))
    path = tmp_path / "flow.csv"
    trace.write_csv(path, 3.0, 1.5)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "E", "norm_p", "norm_q", "bilinear"]
    assert len(rows) == 101
    assert float(rows[1][2]) == pytest.approx(op.norm(u0, 3.0))
    assert np.all(np.diff(trace.norms[3.0]) <= 1e-14)


def test_empty_trace_has_header_only(tmp_path):
    trace = FlowTrace(np.zeros(0), np.zeros((0, 3)))
    path = tmp_path / "empty.csv"
    trace.write_csv(path)
    assert open(path).read() == "t,E,norm_p,norm_q,bilinear\n"


def test_times_must_increase():
    op = assemble_operator(np.eye(1), interval(4))
    with pytest.raises(ValueError):
        propagate(op, np.ones(op.n), [0.2, 0.1])


# --------------------------------------------------------------------------
# experiments (small versions of the acceptance runs)


def test_contractivity_pass_and_not_pass():
    dom = interval(64)
    good = contractivity(assemble_operator(np.exp(0.4j) * np.eye(1), dom), 4.0,
                         n_states=12, seed=0)
    assert good["verdict"] == PASS
    assert good["max_ratio"] <= 1 + 1e-6
    bad = contractivity(assemble_operator(np.exp(1.3j) * np.eye(1), dom), 4.0,
                        n_states=12, seed=0)
    assert bad["delta_p"] < 0
    assert bad["verdict"] in (VIOLATION, INCONCLUSIVE)


def test_bilinear_scale_invariance():
    rng = np.random.default_rng(5)
    dom = rectangle(12, 12)
    op = assemble_operator(np.eye(2), dom)
    f, g = smooth_data(op, rng, 3), smooth_data(op, rng, 3)
    base = bilinear_embedding(op, op, 3.0, f, g)
    scaled = bilinear_embedding(op, op, 3.0, 7.0 * f, g / 7.0)
    assert np.all(np.isfinite(base["ratio"]))
    assert np.allclose(scaled["ratio"], base["ratio"], rtol=1e-10, atol=0)


def test_heat_flow_energy_decreases():
    rng = np.random.default_rng(6)
    p = 3.0
    A = random_p_elliptic(rng, 1, p)
    B = random_p_elliptic(rng, 1, p)
    dom = interval(48)
    opA, opB = assemble_operator(A, dom), assemble_operator(B, dom)
    f, g = smooth_data(opA, rng, 1)[:, 0], smooth_data(opB, rng, 1)[:, 0]
    trace = heat_flow_trace(BellmanSpec(p, 0.2), opA, opB, f, g,
                            np.geomspace(1e-4, 0.2, 25))
    E = trace.energy
    assert np.all(np.diff(E) <= 1e-12 * np.abs(E).max())
    ra, rfd = trace.extra["rate_a"], trace.extra["rate_fd"]
    assert np.all(np.abs(ra - rfd) <= 1e-4 * np.abs(ra))
