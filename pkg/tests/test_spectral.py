import numpy as np
import pytest

from pellip.algebra import delta_p
from pellip.spectral import (DegenerateRay, ParabolaSpec, critical_angle,
                             parabola_point, parabola_samples, sharpness_scan,
                             tangency_check, touching_height, vertex)


def test_vertex_values():
    assert vertex(ParabolaSpec(4.0, 1.0)) == pytest.approx(3 / 16, abs=1e-15)
    assert parabola_point(ParabolaSpec(4.0), 0.0) == pytest.approx(3 / 16)
    ray = parabola_point(ParabolaSpec(2.0, 1.0), 0.0)
    assert isinstance(ray, DegenerateRay) and ray.start == 0.25


def test_vertex_is_largest_at_two():
    ps = np.linspace(1.01, 40, 4000)
    vals = np.array([vertex(ParabolaSpec(p)) for p in ps])
    assert vals.max() <= 0.25
    assert vertex(ParabolaSpec(2.0 + 1e-6)) == pytest.approx(0.25, abs=1e-12)
    assert np.all(np.diff(vals[ps > 2]) < 0) and np.all(np.diff(vals[ps < 2]) > 0)


def test_scaling_in_alpha():
    ys = np.linspace(-3, 3, 13)
    for a in (0.5, 2.0):
        got = parabola_point(ParabolaSpec(3.0, a), ys)
        want = a ** 2 * parabola_point(ParabolaSpec(3.0, 1.0), ys / a ** 2)
        assert np.allclose(got, want, rtol=1e-14)


def test_critical_angles():
    assert critical_angle(2.0) == pytest.approx((0.0, np.pi / 2))
    assert critical_angle(4.0)[0] == pytest.approx(np.pi / 6, abs=1e-15)
    for p in (1.2, 1.5, 3.0, 7.0, 30.0):
        q = p / (p - 1)
        assert critical_angle(p)[0] == pytest.approx(critical_angle(q)[0], abs=1e-15)
    for p in np.linspace(1.05, 40, 60):
        phi = critical_angle(p)[1]
        assert abs(delta_p(np.exp(1j * phi) * np.eye(1), p)) <= 1e-12


def test_tangency_for_p_four():
    rep = tangency_check(4.0)
    assert rep["below_sector"]
    assert rep["running_sup_nondecreasing"]
    assert rep["gap_at_y_max"] < 1e-3
    assert rep["phi_star"] == pytest.approx(np.pi / 6)
    # the supremum is attained near the touching height
    assert rep["y_at_sup"] == pytest.approx(touching_height(ParabolaSpec(4.0)),
                                            rel=1e-2)


def test_tangency_is_alpha_independent():
    reps = [tangency_check(3.0, a) for a in (0.5, 1.0, 2.0)]
    for r in reps[1:]:
        assert abs(r["sup_arg"] - reps[0]["sup_arg"]) <= 1e-12
        assert abs(r["gap_at_y_max"] - reps[0]["gap_at_y_max"]) <= 1e-12


def test_degenerate_case_rejected():
    with pytest.raises(ValueError):
        tangency_check(2.0)
    with pytest.raises(ValueError):
        parabola_samples(ParabolaSpec(2.0), [0.0])
    with pytest.raises(ValueError):
        ParabolaSpec(1.0)


def test_sharpness_linkage():
    rows = sharpness_scan([1.1, 1.5, 3.0, 4.0, 10.0, 40.0])
    assert max(r["error"] for r in rows) <= 1e-8
