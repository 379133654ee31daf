import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from twopoint.quadrature import simpson, simpson_rows

# several integrands below are singular at a graded endpoint on purpose
pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


@settings(max_examples=50)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(-5, 5), st.floats(0.1, 5))
def test_cubics_are_exact(c, a, width):
    b = a + width
    p = np.polynomial.Polynomial(c)
    q = simpson(p, [a, b], min_panels=2)
    exact = p.integ()(b) - p.integ()(a)
    assert float(q.value) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_kink_at_breakpoint():
    f = lambda x: np.abs(x - 0.3)
    q = simpson(f, [0.0, 0.3, 1.0])
    assert float(q.value) == pytest.approx(0.5 * 0.3**2 + 0.5 * 0.7**2, rel=1e-13)
    assert q.converged


@pytest.mark.parametrize("k", [0.25, 0.5, 0.75])
def test_graded_endpoint_singularities(k):
    # x**(k-1) is integrable but unbounded at 0; (1-x)**k has an infinite slope at 1
    f = lambda x: k * np.power(x, k - 1) + np.power(1 - x, k)
    q = simpson(f, [0.0, 1.0], graded=[0.0, 1.0], rtol=1e-11)
    assert float(q.value) == pytest.approx(1.0 + 1.0 / (k + 1), rel=1e-8)


def test_vector_valued_integrand():
    f = lambda x: np.stack([np.sin(x), np.cos(x), np.exp(-x)])
    q = simpson(f, [0.0, 1.0, 2.0], rtol=1e-12)
    np.testing.assert_allclose(q.value, [1 - np.cos(2), np.sin(2), 1 - np.exp(-2)], rtol=1e-11)


def test_fixed_panels_skip_refinement():
    q = simpson(np.exp, [0.0, 1.0], fixed=10)
    assert q.per_piece == 10 and q.panels == 10
    assert float(q.value) == pytest.approx(np.e - 1, rel=1e-5)


def test_error_estimate_tracks_truth():
    q = simpson(lambda x: np.exp(np.sin(5 * x)), [0.0, 2.0], rtol=1e-10)
    ref, _ = integrate.quad(lambda x: np.exp(np.sin(5 * x)), 0, 2, epsabs=1e-13, epsrel=1e-13)
    assert abs(float(q.value) - ref) < 1e-9 * ref


def test_empty_range():
    assert float(simpson(np.exp, [1.0, 1.0]).value) == 0.0


def test_rows_match_scalar_calls():
    rng = np.random.default_rng(0)
    lo = rng.uniform(0, 1, 20)
    mid = lo + rng.uniform(0, 1, 20)
    hi = mid + rng.uniform(0, 1, 20)
    f = lambda x: np.exp(-x) * np.cos(3 * x)
    rows = simpson_rows(lambda x, r: f(x), np.column_stack([lo, mid, hi]), rtol=1e-12, atol=1e-15)
    one = [float(simpson(f, [a, b, c], rtol=1e-12).value) for a, b, c in zip(lo, mid, hi)]
    np.testing.assert_allclose(rows, one, rtol=1e-10, atol=1e-13)


def test_rows_graded_and_empty_pieces():
    f = lambda x, r: 0.5 / np.sqrt(x)
    breaks = np.array([[0.0, 1.0, 1.0], [0.0, 0.25, 4.0]])
    np.testing.assert_allclose(simpson_rows(f, breaks, graded=[0.0], rtol=1e-12), [1.0, 2.0], rtol=1e-9)


def test_rows_converge_independently_and_in_chunks():
    # per-row parameters reach the integrand through the row indices, also across chunks
    k = np.linspace(0.5, 3.0, 50)
    breaks = np.column_stack([np.zeros(50), np.ones(50)])
    f = lambda x, r: k[r, None] * np.power(x, k[r, None] - 1)
    whole = simpson_rows(f, breaks, graded=[0.0], rtol=1e-12, max_per_piece=4096)
    np.testing.assert_allclose(whole, 1.0, rtol=1e-9)
    chunked = simpson_rows(f, breaks, graded=[0.0], rtol=1e-12, max_per_piece=4096, chunk=7)
    np.testing.assert_array_equal(chunked, whole)
