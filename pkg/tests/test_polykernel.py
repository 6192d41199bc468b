import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as leg

from dgft.errors import DomainError
from dgft.polykernel import (
    ModalPoly,
    eval_poly,
    gauss_rule,
    integrate_poly,
    legendre_eval,
    legendre_table,
    project_function,
    project_merged,
    reexpand,
    reexpand_matrix,
)

coeff_lists = st.lists(st.floats(-5, 5), min_size=1, max_size=6)
intervals = st.tuples(st.floats(-10, 10), st.floats(0.05, 5)).map(lambda t: (t[0], t[0] + t[1]))


@pytest.mark.parametrize("r", [0, 1, 2, 3])
def test_legendre_table_matches_numpy(r):
    xi = np.linspace(-1, 1, 13)
    tab = legendre_table(5, xi, r)
    for k in range(6):
        ref = leg.legval(xi, leg.legder(np.eye(6)[k], r)) if r else leg.legval(xi, np.eye(6)[k])
        assert np.allclose(tab[k], ref, atol=1e-12)


def test_legendre_eval_domain():
    assert legendre_eval(2, 1.0) == pytest.approx(1.0)
    assert legendre_eval(3, -1.0, 1) == pytest.approx(6.0)
    with pytest.raises(DomainError):
        legendre_eval(2, 1.5)


@pytest.mark.parametrize("q", [1, 2, 4, 7])
def test_gauss_rule_exactness(q):
    rule = gauss_rule(q)
    for deg in range(2 * q):
        exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
        assert rule.weights @ rule.nodes**deg == pytest.approx(exact, abs=1e-13)
    with pytest.raises(ValueError):
        gauss_rule(0)


def test_orthogonality():
    rule = gauss_rule(8)
    tab = legendre_table(6, rule.nodes)
    gram = (tab * rule.weights) @ tab.T
    expected = np.diag(2.0 / (2 * np.arange(7) + 1))
    assert np.abs(gram - expected).max() <= 1e-13


def test_eval_chain_rule_and_domain():
    p = ModalPoly(2.0, 4.0, np.array([0.0, 1.0]))   # xi = x - 3
    assert eval_poly(p, 3.5) == pytest.approx(0.5)
    assert eval_poly(p, 3.5, 1) == pytest.approx(1.0)
    assert integrate_poly(ModalPoly(2.0, 4.0, np.array([1.5, 7.0]))) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        eval_poly(p, 4.5)


def test_project_reproduces_polynomials_of_degree_p():
    g = lambda x: 1 - 2 * x + 0.5 * x**3
    poly = project_function(g, (1.0, 2.5), 3)
    x = np.linspace(1.0, 2.5, 11)
    assert np.abs(poly(x) - g(x)).max() < 1e-12


def test_projection_error_is_fourth_order():
    errs = []
    for w in (0.5, 0.25, 0.125):
        poly = project_function(np.sin, (1.0, 1.0 + w), 3)
        x = np.linspace(1.0, 1.0 + w, 50)
        errs.append(np.abs(poly(x) - np.sin(x)).max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.7)


@settings(max_examples=60, deadline=None)
@given(coeffs=coeff_lists, iv=intervals)
def test_projection_idempotent(coeffs, iv):
    p0 = ModalPoly(*iv, np.array(coeffs))
    p1 = project_function(lambda x: eval_poly(p0, x), iv, p0.degree)
    assert np.abs(p1.coeffs - p0.coeffs).max() <= 1e-13 * max(1.0, np.abs(p0.coeffs).max())


@settings(max_examples=60, deadline=None)
@given(coeffs=coeff_lists, iv=intervals, a=st.floats(-0.5, 0.4), b=st.floats(0.1, 0.5))
def test_reexpand_identity_and_derivatives(coeffs, iv, a, b):
    p0 = ModalPoly(*iv, np.array(coeffs))
    w = p0.width
    new = (iv[0] + a * w, iv[1] + b * w)
    p1 = reexpand(p0, new)
    x = np.linspace(max(iv[0], new[0]), min(iv[1], new[1]), 11)
    scale = max(1.0, np.abs(p0.coeffs).sum())
    assert np.abs(p1(x) - p0(x)).max() <= 1e-12 * scale
    for r in (1, 2, 3):
        tol = 1e-11 * scale * (2.0 / min(w, p1.width)) ** r
        assert np.abs(p1(x, r) - p0(x, r)).max() <= tol
    R = reexpand_matrix(p0.degree, iv, new)
    assert np.allclose(R @ p0.coeffs, p1.coeffs, atol=1e-12 * scale)


def test_reexpand_example():
    rng = np.random.default_rng(3)
    p0 = ModalPoly(3.0, 4.0, rng.standard_normal(4))
    p1 = reexpand(p0, (3.2, 3.9))
    x = np.linspace(3.2, 3.9, 11)
    assert np.abs(p1(x) - p0(x)).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(cl=coeff_lists, cr=coeff_lists, x0=st.floats(-3, 3), wl=st.floats(0.1, 2), wr=st.floats(0.1, 2))
def test_merge_conserves_mass(cl, cr, x0, wl, wr):
    left = ModalPoly(x0 - wl, x0, np.array(cl))
    right = ModalPoly(x0, x0 + wr, np.array(cr))
    merged = project_merged(left, right)
    mass = integrate_poly(left) + integrate_poly(right)
    assert integrate_poly(merged) == pytest.approx(mass, abs=1e-12 * max(1.0, abs(mass), wl + wr))


def test_merge_of_one_polynomial_is_exact_and_checks_abutment():
    whole = ModalPoly(0.0, 2.0, np.array([1.0, -0.5, 0.25, 0.1]))
    left, right = reexpand(whole, (0.0, 0.7)), reexpand(whole, (0.7, 2.0))
    assert np.allclose(project_merged(left, right).coeffs, whole.coeffs, atol=1e-13)
    with pytest.raises(ValueError, match="abut"):
        project_merged(left, ModalPoly(0.8, 2.0, right.coeffs))


def test_merge_matches_brute_force_quadrature():
    left = ModalPoly(0.0, 0.6, np.array([1.0, 0.3, -0.2, 0.05]))
    right = ModalPoly(0.6, 1.5, np.array([0.4, -0.1, 0.2, 0.0]))
    merged = project_merged(left, right)
    # oracle: dense midpoint rule on the discontinuous function
    x = (np.arange(300000) + 0.5) / 300000 * 1.5
    g = np.where(x < 0.6, left(np.minimum(x, 0.6)), right(np.maximum(x, 0.6)))
    xi = 2 * x / 1.5 - 1
    k = np.arange(4)
    ref = (2 * k + 1) / 2 * (legendre_table(3, xi) @ g) * (2.0 / x.size)
    assert np.allclose(merged.coeffs, ref, atol=1e-8)
