import json

import numpy as np
import pytest

from brakeindex.errors import InstabilityError, RefinementNeeded
from brakeindex.paths import (GeneratorPath, SampledPath, brake_iterate, constant_generator_path,
                              diamond_paths, identity_path, path_from_json, periodic_iterate,
                              periodic_square, random_generator_path, rotation_path, xi_special_path)
from brakeindex.sympcore import diamond, is_symplectic, rotation, standard_n, symplectic_inverse


def test_rotation_path_values():
    p = rotation_path(np.pi)
    assert np.allclose(p(np.pi / 2), rotation(np.pi / 2))
    assert np.allclose(p.endpoint, -np.eye(2))


def test_generator_path_matches_expm():
    B = np.array([[2.0, 0.3], [0.3, 1.0]])
    a = GeneratorPath(1, 1.3, lambda t: B)
    b = constant_generator_path(B, 1.3)
    assert np.allclose(a.endpoint, b.endpoint, atol=1e-10)


def test_random_path_is_symplectic(rng):
    p = random_generator_path(2, rng)
    for M in p.evaluate(np.linspace(0, 1, 7)):
        assert is_symplectic(M, tol=1e-9)[0]
    assert np.allclose(p(0.0), np.eye(4))


def test_evaluate_domain():
    with pytest.raises(ValueError):
        rotation_path(1.0)(1.5)


def test_xi_path():
    xi = xi_special_path(1, 2.0)
    assert np.allclose(xi(0.0), np.diag([2, 0.5]))
    assert np.allclose(xi(2.0), np.eye(2))
    xi2 = xi_special_path(2, 2.0)
    half = np.diag([1.5, 1 / 1.5])
    assert np.allclose(xi2(1.0), diamond(half, half))


def test_sampled_path_needs_refinement():
    ts = np.linspace(0, 1, 5)
    p = SampledPath(ts, [rotation(t) for t in ts])
    assert np.allclose(p(0.5), rotation(0.5))
    with pytest.raises(RefinementNeeded):
        p(0.3)


def test_json_roundtrip(rng):
    p = random_generator_path(1, rng)
    q = path_from_json(json.loads(json.dumps(p.to_json())))
    assert np.allclose(p.endpoint, q.endpoint)
    with pytest.raises(ValueError):
        path_from_json({"k": 1, "tau": 1.0, "kind": "generator", "nodes": []})


def test_brake_iterate_rotation():
    th = 0.8
    p = rotation_path(th)
    it = brake_iterate(p, 2)
    assert np.allclose(it.endpoint, rotation(2 * th))
    assert np.allclose(brake_iterate(identity_path(2), 2).endpoint, np.eye(4))


def test_brake_iterate_identity_random(rng):
    p = random_generator_path(2, rng)
    P = p.endpoint
    N = standard_n(2)
    it = brake_iterate(p, 2)
    assert np.abs(it.endpoint - N @ symplectic_inverse(P) @ N @ P).max() <= 1e-10 * max(1, np.abs(P).max() ** 2)
    # continuity across the joint
    assert np.allclose(it(p.tau - 1e-9), it(p.tau + 1e-9), atol=1e-6)


def test_periodic_iterate():
    p = rotation_path(np.pi)
    assert np.allclose(periodic_square(p).endpoint, np.eye(2))
    q = periodic_iterate(p, 3)
    assert q.tau == pytest.approx(3 * np.pi)
    assert np.allclose(q.endpoint, np.linalg.matrix_power(p.endpoint, 3))


def test_brake_and_periodic_square_agree_under_symmetry():
    # R(t) satisfies P^2 = N P^{-1} N P, so both doubles end at the same point
    p = rotation_path(1.1)
    assert np.allclose(brake_iterate(p, 2).endpoint, periodic_square(p).endpoint)


def test_diamond_paths():
    p = diamond_paths(rotation_path(1.0), rotation_path(1.0, rate=2.0))
    assert np.allclose(p.endpoint, diamond(rotation(1.0), rotation(2.0)))
