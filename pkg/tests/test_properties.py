"""Property-based checks on random inputs drawn by hypothesis."""
import json

import numpy as np
from hypothesis import given, settings, strategies as st

from brakeindex.iteration import bott_check, brake_square_endpoint, decomposition_check
from brakeindex.maslov import i_lagrangian, nu_lagrangian, theorem21_check
from brakeindex.normalforms import splitting_numbers
from brakeindex.paths import path_from_json, random_generator_path
from brakeindex.sympcore import (diamond, inertia, is_symplectic, matrix_from_json, matrix_to_json,
                                 random_symplectic, standard_n, symplectic_inverse)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=1, max_value=3)
FAST = settings(max_examples=40, deadline=None)


@FAST
@given(seeds, dims, dims)
def test_products_stay_symplectic(seed, k, m):
    rng = np.random.default_rng(seed)
    A, B = random_symplectic(k, rng), random_symplectic(k, rng)
    C = random_symplectic(m, rng)
    assert is_symplectic(A @ B)[0]
    assert is_symplectic(diamond(A, C))[0]
    assert np.allclose(symplectic_inverse(A) @ A, np.eye(2 * k), atol=1e-8 * np.abs(A).max() ** 2)


@FAST
@given(seeds, st.integers(min_value=1, max_value=6))
def test_inertia_counts_sum_to_dimension(seed, d):
    rng = np.random.default_rng(seed)
    S = rng.normal(size=(d, d))
    F = S + S.T
    I = inertia(F)
    assert I.dim == d
    vals = np.linalg.eigvalsh(F)
    assert I.signature == int(np.sum(vals > 1e-9) - np.sum(vals < -1e-9))


@FAST
@given(seeds, st.integers(min_value=1, max_value=2))
def test_index_identities_on_random_paths(seed, k):
    path = random_generator_path(k, np.random.default_rng(seed))
    assert theorem21_check(path).passed
    assert bott_check(path).passed
    assert decomposition_check(path).passed


@FAST
@given(seeds, st.integers(min_value=1, max_value=2))
def test_l0_nullity_matches_endpoint(seed, k):
    path = random_generator_path(k, np.random.default_rng(seed))
    assert i_lagrangian(path, 0).nullity == nu_lagrangian(path.endpoint, 0)


@FAST
@given(seeds, st.sampled_from([1.0, -1.0, np.exp(0.9j)]))
def test_splitting_additive(seed, w):
    rng = np.random.default_rng(seed)
    a, b = random_symplectic(1, rng, scale=0.5), random_symplectic(1, rng, scale=0.5)
    assert splitting_numbers(diamond(a, b), w) == splitting_numbers(a, w) + splitting_numbers(b, w)


@FAST
@given(seeds, dims)
def test_brake_square_is_conjugation_invariant(seed, k):
    # N P^{-1} N P is symplectic and its trace is preserved under P -> N P N
    rng = np.random.default_rng(seed)
    P = random_symplectic(k, rng, scale=0.5)
    N = standard_n(k)
    Q = brake_square_endpoint(P)
    assert is_symplectic(Q, tol=1e-7)[0]
    assert np.isclose(np.trace(Q), np.trace(brake_square_endpoint(N @ P @ N)), rtol=1e-9)


@FAST
@given(seeds, dims)
def test_matrix_json_round_trip(seed, k):
    M = random_symplectic(k, np.random.default_rng(seed))
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(M))))
    assert np.array_equal(back, M)


@FAST
@given(seeds, st.integers(min_value=1, max_value=2))
def test_path_json_round_trip(seed, k):
    path = random_generator_path(k, np.random.default_rng(seed))
    back = path_from_json(json.loads(json.dumps(path.to_json())))
    ts = np.linspace(0, path.tau, 7)
    assert np.allclose(back.evaluate(ts), path.evaluate(ts), atol=1e-12)
    assert tuple(i_lagrangian(back, 0)) == tuple(i_lagrangian(path, 0))
