import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dswave.grid import (
    Boundary,
    BumpProfile,
    ConfigurationError,
    ContractError,
    Field,
    GridSpec,
    derivative,
    diff1,
    diff2,
    forward_differences,
    gradient,
    hessian,
    integrate,
    laplacian,
    make_initial_data,
    multi_indices,
    required_extent,
)


def test_spacing_conventions():
    assert GridSpec(1, 2.0, 5).h == pytest.approx(1.0)
    assert GridSpec(1, 2.0, 8, "Periodic").h == pytest.approx(0.5)
    g = GridSpec(2, 1.0, 9)
    assert g.shape == (9, 9)
    assert g.axis[0] == -1.0 and g.axis[-1] == pytest.approx(1.0)


def test_grid_rejects_bad_parameters_and_lists_all():
    with pytest.raises(ConfigurationError) as err:
        GridSpec(4, -1.0, 3)
    msg = str(err.value)
    assert "dims" in msg and "points_per_axis" in msg and "extent" in msg


def test_refined_keeps_coarse_points():
    g = GridSpec(1, 3.0, 17)
    f = g.refined(2)
    assert f.points == 33 and f.h == pytest.approx(g.h / 2)
    np.testing.assert_allclose(f.axis[::2], g.axis)
    p = GridSpec(1, 3.0, 16, Boundary.PERIODIC)
    np.testing.assert_allclose(p.refined(2).axis[::2], p.axis)


def test_field_shape_contract():
    g = GridSpec(1, 1.0, 9)
    with pytest.raises(ContractError):
        Field(g, np.zeros(8), np.zeros(9))


def test_bump_support_and_peak():
    b = BumpProfile(2.0, 3.0)
    r = np.array([0.0, 1.0, 1.9, 2.0, 5.0])
    v = b(r)
    assert v[0] == pytest.approx(3.0 / math.e)
    assert v[3] == 0.0 and v[4] == 0.0
    assert v[2] > 0
    with pytest.raises(ConfigurationError):
        BumpProfile(0.0)


def test_second_difference_exact_on_quadratics():
    g = GridSpec(1, 1.0, 21)
    x = g.axis
    inner = slice(1, -1)
    np.testing.assert_allclose(diff2(x**2, g, 0)[inner], 2.0, rtol=1e-12)
    np.testing.assert_allclose(diff1(x**2, g, 0)[inner], 2 * x[inner], atol=1e-12)


def test_periodic_laplacian_second_order():
    errs = []
    for n in (32, 64, 128):
        g = GridSpec(2, math.pi, n, "Periodic")
        x, y = g.coords
        v = np.sin(x) * np.cos(2 * y)
        errs.append(np.max(np.abs(laplacian(v, g) + 5 * v)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_hessian_mixed_derivative():
    g = GridSpec(2, math.pi, 64, "Periodic")
    x, y = g.coords
    H = hessian(np.sin(x) * np.sin(y), g)
    assert np.max(np.abs(H[0][1] - np.cos(x) * np.cos(y))) < 4e-3  # ~ h^2/3
    assert H[0][1] is H[1][0]


def test_derivative_multi_index():
    g = GridSpec(1, math.pi, 128, "Periodic")
    x = g.axis
    for order, exact in ((0, np.sin(x)), (1, np.cos(x)), (2, -np.sin(x)), (3, -np.cos(x))):
        assert np.max(np.abs(derivative(np.sin(x), g, (order,)) - exact)) < 1e-3
    with pytest.raises(ContractError):
        derivative(np.sin(x), g, (4,))
    with pytest.raises(ContractError):
        derivative(np.sin(x), g, (1, 0))


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (12,), elements=st.floats(-10, 10)),
    arrays(np.float64, (12,), elements=st.floats(-10, 10)),
    st.sampled_from(["ZeroPad", "Periodic"]),
)
def test_summation_by_parts(u, v, boundary):
    g = GridSpec(1, 1.0, 12, boundary)
    lhs = np.sum(u * laplacian(v, g))
    rhs = -sum(np.sum(a * b) for a, b in zip(forward_differences(u, g), forward_differences(v, g)))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_integrate_constant():
    assert integrate(np.ones(16), GridSpec(1, 2.0, 16, "Periodic")) == pytest.approx(4.0)
    assert integrate(np.ones((9, 9)), GridSpec(2, 2.0, 9)) == pytest.approx(16.0)


def test_multi_indices():
    assert multi_indices(2, 1) == [(1, 0), (0, 1)]
    assert multi_indices(3, 0) == [(0, 0, 0)]
    assert len(multi_indices(3, 2)) == 6


def test_initial_data_domain_rule():
    assert required_extent(1.0) == pytest.approx(3.5)
    with pytest.raises(ConfigurationError, match="R \\+ 2 \\+ margin"):
        make_initial_data(BumpProfile(3.0), None, 0.1, GridSpec(1, 4.0, 33))
    with pytest.raises(ConfigurationError):
        make_initial_data(BumpProfile(3.0), None, 0.1, GridSpec(1, 2.0, 32, "Periodic"))
    with pytest.raises(ConfigurationError):
        make_initial_data(BumpProfile(), None, -1.0, GridSpec(1, 3.5, 33))
    f = make_initial_data(BumpProfile(), None, 0.2, GridSpec(1, 3.5, 33))
    assert f.phi.max() == pytest.approx(0.2 / math.e)
    assert not f.phi_t.any()


def test_gradient_components():
    g = GridSpec(3, 1.0, 9)
    assert len(gradient(np.zeros(g.shape), g)) == 3
