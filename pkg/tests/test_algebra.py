import numpy as np
import pytest
from scipy.optimize import minimize

from pellip.algebra import (ComplexMatrixField, analyticity_angle, as_field,
                            bound, delta_p, delta_p_report, ellipticity,
                            field_from_json, field_to_json, form_value,
                            matrix_from_json, p_ellipticity_range, random_elliptic,
                            real_form, realify, complexify)


def rot(phi, d=1):
    return np.exp(1j * phi) * np.eye(d)


def test_real_form_is_multiplicative():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(real_form(A @ B), real_form(A) @ real_form(B))
    xi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(realify(A @ xi), real_form(A) @ realify(xi))
    assert np.allclose(complexify(realify(xi)), xi)


def test_identity_and_rotation_values():
    assert delta_p(np.eye(2), 2.0) == pytest.approx(1.0, abs=1e-14)
    assert abs(delta_p(rot(np.pi / 3), 4.0)) < 1e-14


def test_real_triangular_example():
    A = np.array([[2.0, 1.0], [0.0, 1.0]])
    assert delta_p(A, 2.0) == pytest.approx((3 - np.sqrt(2)) / 2, abs=1e-14)


def test_report_attaining_cell():
    F = ComplexMatrixField(np.stack([np.eye(1), rot(np.pi / 3)]))
    rep = delta_p_report(F, 4.0, with_range=False)
    assert abs(rep.delta) < 1e-14
    assert rep.cell == 1
    assert form_value(F.matrices[1], 4.0, rep.minimizer) == pytest.approx(rep.delta,
                                                                         abs=1e-14)


def test_rejects_bad_p():
    for p in (1.0, 0.5, np.inf, np.nan):
        with pytest.raises(ValueError):
            delta_p(np.eye(1), p)


def test_ellipticity_and_bound():
    A = np.array([[1.0, 2.0j], [0.0, 3.0]])
    assert ellipticity(A) == pytest.approx(delta_p(A, 2.0), abs=1e-14)
    assert bound(A) == pytest.approx(np.linalg.svd(A, compute_uv=False)[0])


def test_sampled_oracle_agrees():
    rng = np.random.default_rng(1)
    for d in (1, 2, 3):
        A = random_elliptic(rng, d)
        for p in (1.5, 4.0):
            exact = delta_p(A, p)
            X = rng.standard_normal((100_000, 2 * d))
            X /= np.linalg.norm(X, axis=1, keepdims=True)
            vals = form_value(A, p, X)
            assert exact <= vals.min() + 1e-12
            # polish the best sample on the sphere
            x0 = X[np.argmin(vals)]
            res = minimize(lambda x: form_value(A, p, x / np.linalg.norm(x)), x0,
                           method="BFGS", options={"gtol": 1e-10})
            assert exact <= res.fun + 1e-12
            assert res.fun - exact <= 1e-3


def test_range_for_rotation():
    phi = 0.9
    lo, hi, bounded = p_ellipticity_range(rot(phi))
    assert bounded
    assert hi == pytest.approx(2 / (1 - np.cos(phi)), rel=1e-8)
    assert lo == pytest.approx(hi / (hi - 1), rel=1e-8)


def test_range_real_is_unbounded():
    lo, hi, bounded = p_ellipticity_range(np.array([[2.0, 1.0], [-0.5, 1.0]]))
    assert (lo, hi, bounded) == (1.0, np.inf, False)


def test_range_rejects_non_elliptic():
    with pytest.raises(ValueError):
        p_ellipticity_range(rot(np.pi / 2))


def test_analyticity_angle():
    assert analyticity_angle(np.eye(1), 4.0) == pytest.approx(np.pi / 3, abs=2e-8)
    assert analyticity_angle(np.eye(1), 2.0) == pytest.approx(np.pi / 2, abs=2e-8)
    angles = [analyticity_angle(np.diag([1.0, 5.0]), p) for p in (3.0, 6.0, 20.0)]
    assert angles[0] > angles[1] > angles[2] > 0


def test_lipschitz_in_rotation():
    rng = np.random.default_rng(2)
    A = random_elliptic(rng, 2)
    phis = np.linspace(-1.4, 1.4, 281)
    vals = np.array([delta_p(np.exp(1j * f) * A, 3.0) for f in phis])
    slope = np.max(np.abs(np.diff(vals)) / np.diff(phis))
    assert slope <= bound(A) * (1 + abs(1 - 2 / 3.0)) + 1e-9


def test_json_round_trip():
    F = ComplexMatrixField(np.stack([np.eye(2), rot(0.3, 2)]), (2,))
    G = field_from_json(field_to_json(F))
    assert np.array_equal(F.matrices, G.matrices)
    assert np.allclose(matrix_from_json({"phase": 0.3, "d": 2}), rot(0.3, 2))
    assert as_field(np.eye(1)).ncells == 1
