import numpy as np
import pytest
from conftest import random_state

from dgft.config import RunConfig, build_problem, sec6_initial_condition
from dgft.errors import DegenerateShockError, StateBlowupError
from dgft.polykernel import ModalPoly, reexpand


def test_exact_initial_traces_and_speed():
    left, right = sec6_initial_condition()
    u_m, u_p = left(3.18), right(3.18)
    # direct evaluation of the one-sided formulas
    assert u_m == pytest.approx(1.2 + 0.4 * np.sin(3.18 / 1.4) ** 4, rel=1e-15)
    assert u_m == pytest.approx(1.3365909, abs=1e-7)
    assert u_p == pytest.approx(0.7718064, abs=1e-7)
    assert (u_m**2 / 2 - u_p**2 / 2) / (u_m - u_p) == pytest.approx(1.054165, abs=1e-4)
    assert u_m - u_p == pytest.approx(0.56471, abs=1e-4)


def test_burgers_rh_speed_is_mean_of_traces():
    u_m, u_p = 1.33652, 0.77181
    assert (u_m**2 / 2 - u_p**2 / 2) / (u_m - u_p) == pytest.approx(1.054165, abs=1e-12)


def test_projected_traces_converge_to_exact():
    left, right = sec6_initial_condition()
    errs = []
    for m in (20, 320):
        scheme, st = build_problem(RunConfig(m=m))
        u_m, u_p = st.traces()
        errs.append(max(abs(u_m - left(3.18)), abs(u_p - right(3.18))))
    # 16x refinement of a fourth-order projection
    assert errs[1] < errs[0] / 16**3 and errs[1] < 1e-7
    scheme, st = build_problem(RunConfig(m=20))
    assert scheme.rhs(st).dx_s == pytest.approx(1.054165, abs=1e-3)


def test_shock_speed_is_rankine_hugoniot(sec6_problem):
    scheme, st = sec6_problem
    u_m, u_p = st.traces()
    assert scheme.rhs(st).dx_s == pytest.approx((u_m + u_p) / 2, rel=1e-14)


def _brute_regular_rates(scheme, st, idx, t=0.0):
    """Weak form of one regular cell by 40-point quadrature in physical space."""
    e = st.edges()
    poly = st.cell_poly(idx)
    xg, wg = np.polynomial.legendre.leggauss(40)
    x = e[idx] + (xg + 1) / 2 * poly.width
    f = scheme.flux
    out = np.empty(poly.degree + 1)
    u_in = scheme.inflow.value(t) if idx == 0 else st.cell_poly(idx - 1)(e[idx])
    u_out = poly(e[idx + 1])
    for k in range(poly.degree + 1):
        v = ModalPoly(e[idx], e[idx + 1], np.eye(poly.degree + 1)[k])
        vol = (wg * f(poly(x)) * v(x, 1)).sum() * poly.width / 2
        out[k] = (2 * k + 1) / poly.width * (vol + f(u_in) * v(e[idx]) - f(u_out) * v(e[idx + 1]))
    return out


def test_regular_rates_match_brute_force(sec6_problem):
    scheme, base = sec6_problem
    st = random_state(scheme, base, np.random.default_rng(5))
    d = scheme.rhs(st)
    for j in (0, 1, 3, base.mesh.i + 2, base.mesh.m - 1):
        idx = base.mesh.storage_index(j)
        assert np.allclose(d.dcoeffs[idx], _brute_regular_rates(scheme, st, idx, st.t), atol=1e-12)
        assert np.allclose(scheme.rhs_regular(st, j), d.dcoeffs[idx])


def test_special_cell_rates_match_moving_projection(sec6_problem):
    """Frame term oracle: evolve u Eulerian-ly, re-expand on the moving cell, differentiate in t."""
    scheme, base = sec6_problem
    st = random_state(scheme, base, np.random.default_rng(6))
    d = scheme.rhs(st)
    e = st.edges()
    eps = 1e-6
    for idx, side in ((st.mesh.idx_L, "L"), (st.mesh.idx_R, "R")):
        def coeffs_at(s):
            u = ModalPoly(e[idx], e[idx + 1], st.coeffs[idx] + s * d.eulerian[idx])
            x_s = st.x_s + s * d.dx_s
            iv = (e[idx], x_s) if side == "L" else (x_s, e[idx + 1])
            return reexpand(u, iv).coeffs
        fd = (coeffs_at(eps) - coeffs_at(-eps)) / (2 * eps)
        assert np.allclose(d.dcoeffs[idx], fd, atol=1e-7)
        assert np.array_equal(scheme.rhs_special(st, side), d.dcoeffs[idx])


def test_mass_identity_on_random_states(sec6_problem):
    scheme, base = sec6_problem
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        st = random_state(scheme, base, rng, amplitude=rng.uniform(0, 0.05))
        d = scheme.rhs(st)
        worst = max(worst, abs(scheme.mass_rate(st, d) - scheme.boundary_flux_balance(st)))
    assert worst <= 1e-11


def test_mean_rate_of_regular_cell_is_flux_difference(sec6_problem):
    scheme, st = sec6_problem
    d = scheme.rhs(st)
    f = scheme.flux
    idx = st.mesh.storage_index(3)
    w = st.widths()[idx]
    u_in, u_out = st.coeffs[idx - 1].sum(), st.coeffs[idx].sum()
    assert d.dcoeffs[idx, 0] * w == pytest.approx(f(u_in) - f(u_out), abs=1e-14)


def test_degenerate_and_blowup_errors(sec6_problem):
    scheme, st = sec6_problem
    flat = st.coeffs.copy()
    flat[st.mesh.idx_R] = flat[st.mesh.idx_L]
    flat[st.mesh.idx_R, 1::2] *= -1      # mirror so both traces agree
    with pytest.raises(DegenerateShockError):
        scheme.rhs(st.replace(coeffs=flat))
    bad = st.coeffs.copy()
    bad[3, 0] = 5.0
    with pytest.raises(StateBlowupError) as info:
        scheme.rhs(st.replace(coeffs=bad))
    assert info.value.cell == 3


def _nested_fd(scheme, st):
    W, P = st.to_vector(), scheme.rhs(st).to_vector()
    eps = 1e-6 * max(1.0, np.abs(W).max()) / max(1.0, np.abs(P).max())
    return (scheme.psi(W + eps * P, st, st.t + eps) - scheme.psi(W - eps * P, st, st.t - eps)) / (2 * eps)


def test_second_derivative_matches_nested_fd(sec6_problem):
    scheme, base = sec6_problem
    rng = np.random.default_rng(21)
    for _ in range(20):
        st = random_state(scheme, base, rng)
        fd = _nested_fd(scheme, st)
        an = scheme.second_time_derivative(st).to_vector()
        rel = np.abs(an - fd) / np.maximum(np.abs(fd), 1e-6 * np.abs(fd).max())
        assert rel.max() <= 1e-4


def test_neglecting_shock_correction_only_touches_special_cells(sec6_problem):
    scheme, st = sec6_problem
    full = scheme.second_time_derivative(st)
    cut = scheme.second_time_derivative(st, neglect_shock_correction=True)
    assert cut.ddx_s == full.ddx_s
    diff = np.abs(full.ddcoeffs - cut.ddcoeffs).max(axis=1)
    special = {st.mesh.idx_L, st.mesh.idx_R}
    assert all(diff[k] == 0 for k in range(diff.size) if k not in special)
    assert all(diff[k] > 0 for k in special)


def _rk4_flow(scheme, st, s_values, dt=2e-4):
    """Fine RK4 integration of W' = Psi(W) from st to each s (same mesh layout)."""
    out = []
    for s in s_values:
        n = max(1, int(round(abs(s) / dt)))
        h = s / n if n else 0.0
        W, t = st.to_vector(), st.t
        for _ in range(n):
            k1 = scheme.psi(W, st, t)
            k2 = scheme.psi(W + h / 2 * k1, st, t + h / 2)
            k3 = scheme.psi(W + h / 2 * k2, st, t + h / 2)
            k4 = scheme.psi(W + h * k3, st, t + h)
            W, t = W + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), t + h
        out.append(W)
    return np.array(out)


def test_higher_time_derivatives_match_integrated_flow(sec6_problem):
    scheme, st = sec6_problem
    rows = scheme.coefficient_derivatives(st, 4)
    # oracle: Taylor coefficients of a degree-8 fit to the integrated flow
    s = np.linspace(-0.02, 0.02, 11)
    Ws = _rk4_flow(scheme, st, s)
    fit = np.polynomial.polynomial.polyfit(s, Ws, 8)
    second, third, fourth = 2 * fit[2], 6 * fit[3], 24 * fit[4]
    assert rows[2][0] == pytest.approx(second[0], rel=1e-6)
    assert rows[3][0] == pytest.approx(third[0], rel=1e-3)
    assert rows[4][0] == pytest.approx(fourth[0], rel=1e-2)
    assert np.abs(rows[3] - third).max() <= 1e-3 * np.abs(third).max()
    assert np.abs(rows[4] - fourth).max() <= 1e-2 * np.abs(fourth).max()


def test_temporal_derivatives_low_orders(sec6_problem):
    scheme, st = sec6_problem
    td = scheme.temporal_derivatives(st, 4)
    assert td.max_order == 4
    assert td.shock[0] == st.x_s
    assert td.shock[1] == pytest.approx(scheme.rhs(st).dx_s)
    xi = np.linspace(-1, 1, 4 * (st.p + 1) + 1)
    from dgft.polykernel import legendre_table
    tab = legendre_table(st.p, xi)
    assert np.allclose(td.cell_maxnorm[0], np.abs(st.coeffs @ tab).max(axis=1))
    # order 1 and 2 at fixed x equal the Eulerian rates, also in the moving cells
    eul1 = scheme.rhs(st).eulerian
    eul2 = scheme.second_time_derivative(st).eulerian
    assert np.allclose(td.cell_maxnorm[1], np.abs(eul1 @ tab).max(axis=1), rtol=1e-10)
    assert np.allclose(td.cell_maxnorm[2], np.abs(eul2 @ tab).max(axis=1), rtol=1e-10)
    assert np.all(np.isfinite(td.u_maxnorm))


def test_anchored_psi_is_a_change_of_coordinates(sec6_problem):
    scheme, base = sec6_problem
    st = random_state(scheme, base, np.random.default_rng(2))
    W = st.to_vector()
    moved = W.copy()
    moved[0] += 0.05
    a = scheme.anchored_psi(moved, st, st.t)
    back = scheme.from_anchored(moved, st, st.t)
    d = scheme.rhs(back)
    assert a[0] == pytest.approx(d.dx_s)
    # regular cells agree exactly
    assert np.allclose(a[1:].reshape(st.coeffs.shape)[:st.mesh.idx_L], d.dcoeffs[:st.mesh.idx_L])
