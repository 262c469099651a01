"""Energy function, derived coordinates, and the analytic vector field."""

import math

import numpy as np
import pytest

from conftest import draw_states
from vdtoda import (
    CoordinateOverflowError,
    ModelParams,
    State,
    hamiltonian,
    integrate,
    nonrel_hamiltonian,
    random_state,
    shift,
    time_reversal,
)
from vdtoda.hamiltonian import (
    _s_jacobian,
    derived_coords,
    eom,
    f_mu,
    from_canonical,
    hamiltonian_xw,
    to_canonical,
    xh_p,
    xh_q,
    xh_w,
)

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------- f_mu


def test_interaction_factor_spot_values():
    assert f_mu(0.0, -3.7) == 1.0
    assert f_mu(0.0, 12.0) == 1.0
    assert abs(f_mu(1.0, 0.0) - SQRT2) < 1e-15
    assert abs(f_mu(2.0, math.log(4.0)) - SQRT2) < 1e-15


def test_interaction_factor_limits():
    assert f_mu(1.0, 800.0) == 1.0  # underflow side is exact
    assert f_mu(0.5, 30.0) > 1.0  # ~1 + 1.2e-14, still above 1
    with pytest.raises(CoordinateOverflowError):
        f_mu(1.0, -1500.0)


# ------------------------------------------------- frozen reference point


def test_energy_at_origin_kappa_zero(zero3):
    params = ModelParams(3, 1.0, 0.0)
    assert abs(hamiltonian(zero3, params) - (4.0 + SQRT2)) < 1e-14


def test_energy_at_origin_kappa_one(zero3):
    params = ModelParams(3, 1.0, 1.0)
    assert abs(hamiltonian(zero3, params) - (3.5 + 3.0 * SQRT2)) < 1e-14


def test_derived_coordinates_at_origin(zero3):
    c0 = derived_coords(zero3, ModelParams(3, 1.0, 0.0))
    assert np.allclose(c0.s, [0.5 * math.log(2.0), 0.0, 0.0], atol=1e-15)
    assert np.allclose(c0.x, [SQRT2, 1.0, 1.0], atol=1e-15)
    assert np.allclose(c0.w, [1.0, 1.0, 1.0], atol=0)
    assert c0.delta == 1.0

    c1 = derived_coords(zero3, ModelParams(3, 1.0, 1.0))
    assert abs(c1.s[-1] - 0.5 * math.log(2.0)) < 1e-15
    assert abs(c1.x[-1] - SQRT2) < 1e-15
    assert c1.delta == 2.0
    assert abs(c1.gamma - 2.0 * SQRT2) < 1e-14
    assert abs(c1.upsilon) < 1e-15  # boundary terms balance at the origin


def test_vector_field_at_origin(zero3):
    p0 = ModelParams(3, 1.0, 0.0)
    p1 = ModelParams(3, 1.0, 1.0)
    assert np.array_equal(xh_q(zero3, p0), np.zeros(3))
    expected0 = [0.5 * (1.0 + 1.0 / SQRT2), 1.0 - 0.5 * (1.0 + 1.0 / SQRT2), 0.0]
    assert np.allclose(xh_p(zero3, p0), expected0, atol=1e-14)
    expected1 = [0.5 * (1.0 + 1.0 / SQRT2), 0.5 * (1.0 + 1.0 / SQRT2), 2.0 + 3.0 / SQRT2]
    assert np.allclose(xh_p(zero3, p1), expected1, atol=1e-14)


# ------------------------------------------------------------- invariants


def test_energy_exceeds_particle_count():
    # strict lower bound H > n, swept over 10^4 random states
    kappas = (0.0, 0.3, 1.0, 2.5)
    worst = np.inf
    for i in range(10_000):
        n = 3 + (i % 5)
        params = ModelParams(n, 0.25 + 0.25 * (i % 4), kappas[i % 4])
        st = random_state(n, np.random.default_rng(i), box=2.0)
        worst = min(worst, hamiltonian(st, params) - n)
    assert worst > 0.0


def test_energy_is_time_reversal_invariant():
    params = ModelParams(5, 0.7, 1.3)
    for st in draw_states(5, 100, seed=21):
        assert hamiltonian(st, params) == hamiltonian(time_reversal(st), params)


def test_boundary_duality():
    # inverting the boundary coupling is a uniform position shift
    for kappa in (0.3, 2.5):
        for st in draw_states(4, 250, seed=5):
            h_inv = hamiltonian(st, ModelParams(4, 0.7, 1.0 / kappa))
            h_shift = hamiltonian(
                shift(st, np.full(4, kappa)), ModelParams(4, 0.7, kappa)
            )
            assert abs(h_inv - h_shift) <= 1e-12 * abs(h_inv)


def _shifted_energy_explicit(st: State, params: ModelParams, chi: np.ndarray) -> float:
    """Closed form for the energy after the position shift q -> q + ln chi."""
    n, beta, kappa = params.n, params.beta, params.kappa
    q, th = st.xi, st.eta
    total = math.cosh(beta * th[0]) * f_mu(
        beta * math.sqrt(chi[1] / chi[0]), q[0] - q[1]
    )
    for c in range(1, n - 1):
        total += (
            math.cosh(beta * th[c])
            * f_mu(beta * math.sqrt(chi[c] / chi[c - 1]), q[c - 1] - q[c])
            * f_mu(beta * math.sqrt(chi[c + 1] / chi[c]), q[c] - q[c + 1])
        )
    total += (
        math.cosh(beta * th[n - 1])
        * f_mu(beta * math.sqrt(chi[n - 1] / chi[n - 2]), q[n - 2] - q[n - 1])
        * f_mu(beta / chi[n - 1], 2.0 * q[n - 1])
        * f_mu(kappa * beta / chi[n - 1], 2.0 * q[n - 1])
    )
    total += kappa * beta**2 * chi[n - 1] ** -2 * math.exp(-2.0 * q[n - 1])
    total += (
        0.5
        * kappa
        * beta**4
        / (chi[n - 2] * chi[n - 1])
        * math.exp(-(q[n - 2] + q[n - 1]))
    )
    return total


def test_shifted_energy_matches_explicit_expression():
    params = ModelParams(5, 0.8, 1.7)
    rng = np.random.default_rng(99)
    for st in draw_states(5, 100, seed=17):
        chi = np.exp(rng.uniform(-1.0, 1.0, size=5))
        lhs = hamiltonian(shift(st, chi), params)
        rhs = _shifted_energy_explicit(st, params, chi)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_two_energy_expressions_agree():
    # theta-form versus the (x, w) trace-side form
    for kappa in (0.0, 0.4, 2.0):
        params = ModelParams(6, 0.9, kappa)
        for st in draw_states(6, 50, seed=3):
            h = hamiltonian(st, params)
            hxw = hamiltonian_xw(derived_coords(st, params), params)
            assert abs(h - hxw) <= 1e-12 * abs(h)


# ---------------------------------------------------- nonrelativistic limit


def test_nonrel_energy_at_origin(zero3):
    assert nonrel_hamiltonian(zero3, ModelParams(3, 1.0, 0.0)) == 2.5
    assert nonrel_hamiltonian(zero3, ModelParams(3, 1.0, 1.0)) == 4.0


def test_nonrel_limit_is_second_order():
    st = random_state(4, np.random.default_rng(9), box=1.0)
    errs = []
    for beta in (0.2, 0.1, 0.05):
        p = ModelParams(4, beta, 0.7)
        errs.append((hamiltonian(st, p) - 4.0) / beta**2 - nonrel_hamiltonian(st, p))
    order_a = math.log2(abs(errs[0] / errs[1]))
    order_b = math.log2(abs(errs[1] / errs[2]))
    assert 1.8 < order_a < 2.2
    assert 1.8 < order_b < 2.2


# ------------------------------------------------------------ derivatives


def test_gradients_match_finite_differences():
    params = ModelParams(4, 0.8, 1.2)
    st = random_state(4, np.random.default_rng(31), box=1.0)
    qdot, thdot = eom(st, params)
    h = 1e-6
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        fd_q = (
            hamiltonian(State(st.xi, st.eta + e), params)
            - hamiltonian(State(st.xi, st.eta - e), params)
        ) / (2 * h)
        fd_p = -(
            hamiltonian(State(st.xi + e, st.eta), params)
            - hamiltonian(State(st.xi - e, st.eta), params)
        ) / (2 * h)
        assert abs(fd_q - qdot[a]) < 1e-6
        assert abs(fd_p - thdot[a]) < 1e-6


def test_flow_finite_difference_matches_field():
    # central difference along the actual flow; the backward leg comes
    # from integrating the time-reversed point forward
    params = ModelParams(4, 0.6, 0.9)
    st = random_state(4, np.random.default_rng(12), box=1.0)
    h = 1e-4
    fwd = integrate(st, params, h, sample_dt=h, rtol=1e-12, atol=1e-14).states[-1]
    bwd_raw = integrate(
        time_reversal(st), params, h, sample_dt=h, rtol=1e-12, atol=1e-14
    ).states[-1]
    bwd = time_reversal(bwd_raw)
    qdot, thdot = eom(st, params)
    assert np.max(np.abs((fwd.xi - bwd.xi) / (2 * h) - qdot)) < 1e-6
    assert np.max(np.abs((fwd.eta - bwd.eta) / (2 * h) - thdot)) < 1e-6
    # the exponential weights follow the same flow
    w_f = derived_coords(fwd, params).w
    w_b = derived_coords(bwd, params).w
    assert np.max(np.abs((w_f - w_b) / (2 * h) - xh_w(st, params))) < 1e-6


def test_rapidity_flow_reduces_at_zero_rapidity():
    # eta = 0 kills the Jacobian correction, so both momentum rates agree
    params = ModelParams(5, 0.7, 1.4)
    rng = np.random.default_rng(44)
    for _ in range(25):
        st = State(rng.uniform(-1.5, 1.5, 5), np.zeros(5))
        _, thdot = eom(st, params)
        assert np.allclose(thdot, xh_p(st, params), rtol=0, atol=1e-14)


def test_shift_jacobian_is_symmetric_and_matches_fd():
    params = ModelParams(5, 0.8, 1.1)
    q = np.random.default_rng(2).uniform(-1.0, 1.0, 5)
    J = _s_jacobian(q, params)
    assert np.array_equal(J, J.T)
    c = derived_coords(State(q, np.zeros(5)), params)
    h = 1e-6
    for b in range(5):
        e = np.zeros(5)
        e[b] = h
        sp = derived_coords(State(q + e, np.zeros(5)), params).s
        sm = derived_coords(State(q - e, np.zeros(5)), params).s
        assert np.max(np.abs((sp - sm) / (2 * h) - J[:, b])) < 1e-8
    assert np.allclose(np.exp(params.beta * c.s), c.x, rtol=1e-14, atol=0)


# --------------------------------------------------------- canonical maps


def test_canonical_round_trip():
    params = ModelParams(6, 0.5, 2.0)
    for st in draw_states(6, 40, seed=8):
        q, p = to_canonical(st, params)
        back = from_canonical(q, p, params)
        assert np.array_equal(back.xi, st.xi)
        assert np.max(np.abs(back.eta - st.eta)) < 1e-13


def test_extreme_positions_raise_instead_of_overflowing():
    params = ModelParams(3, 1.0, 1.0)
    st = State(np.array([0.0, 0.0, -400.0]), np.zeros(3))
    with pytest.raises(CoordinateOverflowError):
        hamiltonian(st, params)
