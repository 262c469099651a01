"""Phase-space points: construction, accessors, involutions."""

import numpy as np
import pytest

from vdtoda import (
    ModelParams,
    State,
    position,
    random_state,
    rapidity,
    reflect,
    shift,
    time_reversal,
)


def test_params_accepts_valid_ranges():
    p = ModelParams(3, 0.5, 0.0)
    assert (p.n, p.beta, p.kappa) == (3, 0.5, 0.0)
    ModelParams(12, 1e-3, 7.5)


@pytest.mark.parametrize(
    "n, beta, kappa",
    [(2, 1.0, 1.0), (0, 1.0, 1.0), (3, 0.0, 1.0), (3, -0.5, 1.0), (3, 1.0, -0.1)],
)
def test_params_rejects_out_of_range(n, beta, kappa):
    with pytest.raises(ValueError):
        ModelParams(n, beta, kappa)


def test_params_is_frozen():
    p = ModelParams(3, 1.0, 1.0)
    with pytest.raises(AttributeError):
        p.beta = 2.0


def test_state_copies_input_and_is_readonly():
    xi = np.zeros(3)
    st = State(xi, np.zeros(3))
    xi[0] = 99.0
    assert st.xi[0] == 0.0  # detached from the caller's buffer
    with pytest.raises(ValueError):
        st.xi[0] = 1.0
    with pytest.raises(ValueError):
        st.eta[1] = 1.0


def test_state_shape_and_finiteness_validation():
    with pytest.raises(ValueError):
        State(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        State(np.zeros((3, 1)), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        State(np.array([0.0, np.nan, 0.0]), np.zeros(3))
    with pytest.raises(ValueError):
        State(np.zeros(3), np.array([0.0, np.inf, 0.0]))


def test_accessors_are_one_based():
    st = State(np.array([10.0, 20.0, 30.0]), np.array([-1.0, -2.0, -3.0]))
    assert st.n == 3
    assert position(st, 1) == 10.0
    assert position(st, 3) == 30.0
    assert rapidity(st, 2) == -2.0
    for bad in (0, 4, -1):
        with pytest.raises(IndexError):
            position(st, bad)
        with pytest.raises(IndexError):
            rapidity(st, bad)


def test_time_reversal_flips_rapidities_only():
    st = State(np.array([1.0, 2.0, 3.0]), np.array([0.5, -0.5, 1.5]))
    rev = time_reversal(st)
    assert np.array_equal(rev.xi, st.xi)
    assert np.array_equal(rev.eta, -st.eta)
    twice = time_reversal(rev)
    assert np.array_equal(twice.xi, st.xi)
    assert np.array_equal(twice.eta, st.eta)


def test_reflect_negates_both_coordinates():
    st = State(np.array([1.0, -2.0, 3.0]), np.array([0.5, 0.0, -1.5]))
    ref = reflect(st)
    assert np.array_equal(ref.xi, -st.xi)
    assert np.array_equal(ref.eta, -st.eta)


def test_shift_adds_logarithms_to_positions():
    st = State(np.array([0.0, 1.0, -1.0]), np.array([0.2, 0.0, -0.2]))
    chi = np.array([2.0, 0.5, np.e])
    out = shift(st, chi)
    assert np.allclose(out.xi, st.xi + np.log(chi), rtol=0, atol=0)
    assert np.array_equal(out.eta, st.eta)


def test_shift_rejects_bad_multipliers():
    st = State(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        shift(st, np.array([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError):
        shift(st, np.array([1.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        shift(st, np.array([1.0, 1.0]))  # wrong length
    with pytest.raises(ValueError):
        shift(st, np.array([1.0, np.inf, 1.0]))


def test_random_state_is_reproducible_and_box_bounded():
    a = random_state(5, np.random.default_rng(7), box=1.5)
    b = random_state(5, np.random.default_rng(7), box=1.5)
    c = random_state(5, np.random.default_rng(8), box=1.5)
    assert np.array_equal(a.xi, b.xi) and np.array_equal(a.eta, b.eta)
    assert not np.array_equal(a.xi, c.xi)
    for _ in range(50):
        st = random_state(4, np.random.default_rng(_), box=0.75)
        assert np.max(np.abs(st.xi)) <= 0.75
        assert np.max(np.abs(st.eta)) <= 0.75
