"""Forward-mode dual arithmetic against finite differences."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlto import ad


def fd_gradient(fn, x, eps=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (fn(x + e) - fn(x - e)) / (2 * eps)
    return g


def test_scalar_chain():
    x = ad.seed(np.array([0.3, -1.2]), np.eye(2))
    y = ad.sin(x[0]) * ad.cos(x[1]) + x[1] ** 3 / (1.0 + x[0] * x[0])
    v, s = np.cos(0.3), np.sin(0.3)
    assert np.isclose(y.val, s * np.cos(-1.2) + (-1.2) ** 3 / (1 + 0.09))
    expect0 = v * np.cos(-1.2) + (-1.2) ** 3 * (-2 * 0.3) / (1 + 0.09) ** 2
    expect1 = -s * np.sin(-1.2) + 3 * 1.44 / (1 + 0.09)
    assert np.allclose(y.tan, [expect0, expect1])


def test_gradient_matches_fd():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(7)

    def fn(v):
        if isinstance(v, ad.Dual):
            return (ad.sqrt(v[0] ** 2 + 2.0) * ad.cos(v[1]) + (v[2:] ** 2).sum()).sum()
        return np.sqrt(v[0] ** 2 + 2.0) * np.cos(v[1]) + (v[2:] ** 2).sum()

    _, g = ad.gradient(fn, x)
    assert np.allclose(g, fd_gradient(fn, x), atol=1e-8)


def test_jacobian_matches_fd():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(5)

    def fn(v):
        sin = ad.sin if isinstance(v, ad.Dual) else np.sin
        return (v[1:] * sin(v[:-1])) - v[0]

    _, jac = ad.jacobian(fn, x)
    eps = 1e-6
    fd = np.zeros((4, 5))
    for i in range(5):
        e = np.zeros(5)
        e[i] = eps
        fd[:, i] = (fn(x + e) - fn(x - e)) / (2 * eps)
    assert np.allclose(jac, fd, atol=1e-8)


def test_division_and_rdiv():
    x = ad.seed(np.array([2.0]), np.ones((1, 1)))
    y = 3.0 / x[0]
    assert np.isclose(y.val, 1.5)
    assert np.isclose(y.tan[0], -0.75)
    z = x[0] / 4.0
    assert np.isclose(z.tan[0], 0.25)


def test_absolute_rejects_kink():
    x = ad.seed(np.array([0.0]), np.ones((1, 1)))
    with pytest.raises(ad.NonSmoothPoint):
        ad.absolute(x)


def test_stack_and_concatenate_mix_duals_and_constants():
    x = ad.seed(np.array([1.0, 2.0]), np.eye(2))
    stacked = ad.stack([x[0], 5.0, x[1] * x[0]])
    assert np.allclose(stacked.val, [1.0, 5.0, 2.0])
    assert np.allclose(stacked.tan[:, 1], 0.0)
    assert np.allclose(stacked.tan[0], [1.0, 0.0, 2.0])
    cat = ad.concatenate([x, x * 2.0])
    assert np.allclose(cat.val, [1, 2, 2, 4])
    assert np.allclose(cat.tan[1], [0, 1, 0, 2])


def test_sum_axis_tracks_tangent_axis():
    val = np.arange(6.0).reshape(2, 3)
    tan = np.stack([np.ones((2, 3)), np.zeros((2, 3))])
    d = ad.Dual(val, tan)
    s = d.sum(axis=1)
    assert s.val.shape == (2,)
    assert s.tan.shape == (2, 2)
    assert np.allclose(s.tan[0], [3.0, 3.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_polynomial_identity_property(coeffs):
    a, b, c = coeffs
    x = ad.seed(np.array([0.7]), np.ones((1, 1)))
    p = a * x[0] ** 2 + b * x[0] + c
    assert np.isclose(p.tan[0], 2 * a * 0.7 + b, atol=1e-12)
