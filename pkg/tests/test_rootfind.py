import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctev.exceptions import ContourZeroError, ConvergenceError, InvalidArgumentError
from ctev.rootfind import SearchRect, count_zeros, find_zeros, newton_refine

UNIT = SearchRect(-2.0, 2.0, -2.0, 2.0)


def test_quadratic():
    f = lambda z: z**2 + 1
    assert count_zeros(f, UNIT) == 2
    assert count_zeros(f, SearchRect(-1, 1, 0.5, 1.5)) == 1
    zs = sorted((z.z for z in find_zeros(f, UNIT)), key=lambda z: z.imag)
    assert np.allclose(zs, [-1j, 1j], atol=1e-12)


def test_entire_function_without_zeros():
    assert count_zeros(np.exp, SearchRect(-3, 3, -3, 3)) == 0
    assert find_zeros(np.exp, SearchRect(-3, 3, -3, 3)) == []


def test_sine_zeros():
    zs = [z.z for z in find_zeros(np.sin, SearchRect(0.5, 10.0, -0.3, 0.4))]
    assert np.allclose(zs, np.pi * np.arange(1, 4), atol=1e-12)


def test_multiplicity_is_reported():
    f = lambda z: (z - 0.3 - 0.2j) ** 3 * (z + 1)
    assert count_zeros(f, UNIT) == 4
    found = find_zeros(f, UNIT, tol=1e-10)
    assert sum(z.winding_count for z in found) == 4
    triple = [z for z in found if z.winding_count == 3]
    assert len(triple) == 1 and abs(triple[0].z - (0.3 + 0.2j)) < 1e-4


def test_scalar_callable_is_accepted():
    import cmath

    f = lambda z: cmath.exp(z) - 2.0  # rejects ndarrays
    found = find_zeros(f, SearchRect(0.2, 2, -0.5, 0.5))
    assert len(found) == 1 and abs(found[0].z - np.log(2.0)) < 1e-12


def test_zero_on_contour():
    with pytest.raises(ContourZeroError):
        count_zeros(lambda z: z - 1.0, SearchRect(1.0, 2.0, -1.0, 1.0))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_unsettled_quadrature():
    f = lambda z: np.exp(40j * z**2) * (z - 0.1)
    with pytest.raises((ConvergenceError, ContourZeroError)):
        count_zeros(f, SearchRect(-3, 3, -3, 3), max_pts=512)


def test_rect_validation():
    with pytest.raises(InvalidArgumentError):
        SearchRect(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        SearchRect(0.0, 1.0, 2.0, 1.0)


def test_newton_refine():
    z = newton_refine(lambda z: z**3 - 8, 2.1 + 0.1j)
    assert abs(z - 2) < 1e-13
    z = newton_refine(lambda z: (z - 1) ** 2, 1.2, tol=1e-20, multiplicity=2)
    assert abs(z - 1) < 1e-9
    with pytest.raises(ConvergenceError):
        newton_refine(lambda z: z**2 + 1 + 0 * z, 0.0 + 0j, max_iter=3)


roots_strategy = st.lists(
    st.tuples(st.floats(-1.7, 1.7), st.floats(-1.7, 1.7)), min_size=1, max_size=5, unique=True
)


@settings(max_examples=25, deadline=None)
@given(roots_strategy)
def test_polynomial_roots_are_all_found(pairs):
    roots = np.array([complex(a, b) for a, b in pairs])
    if len(roots) > 1 and np.min(np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots))) < 1e-2:
        return
    f = lambda z: np.prod([z - r for r in roots], axis=0)
    found = find_zeros(f, UNIT, tol=1e-9)
    assert sum(z.winding_count for z in found) == len(roots)
    for r in roots:
        assert min(abs(z.z - r) for z in found) < 1e-6


@settings(max_examples=25, deadline=None)
@given(roots_strategy, st.sampled_from([0.5, 0.37, 0.61]))
def test_counts_are_conserved_under_subdivision(pairs, frac):
    roots = [complex(a, b) for a, b in pairs]
    f = lambda z: np.prod([z - r for r in roots], axis=0)
    children = UNIT.quadrisect(frac)
    try:
        parts = [count_zeros(f, c) for c in children]
    except (ContourZeroError, ConvergenceError):
        return  # a root sits on (or within a node gap of) an internal edge
    assert sum(parts) == count_zeros(f, UNIT) == len(roots)


def test_results_are_deterministic():
    f = lambda z: np.sin(z) * (z - 2 - 1j)
    a = find_zeros(f, SearchRect(0.5, 7, -0.5, 2))
    b = find_zeros(f, SearchRect(0.5, 7, -0.5, 2))
    assert [z.z for z in a] == [z.z for z in b]
    assert [z.z.real for z in a] == sorted(z.z.real for z in a)
