import numpy as np
import pytest

from brakeindex.brakeorbit import EllipsoidSpec, ellipsoid_analytic_orbits
from brakeindex.errors import HypothesisError
from brakeindex.iteration import (HorizonError, bott_check, brake_square_endpoint,
                                  brake_square_structure_check, build_profile, decomposition_check,
                                  index_jump_search, minus_identity_structure, monotonicity_audit,
                                  symplectic_fixed_plane, theorem31_gap)
from brakeindex.paths import (constant_generator_path, identity_path, random_generator_path,
                              rotation_path)
from brakeindex.sympcore import diamond, random_symplectic, rotation


def test_brake_square_endpoint_rotation():
    assert np.allclose(brake_square_endpoint(rotation(0.7)), rotation(1.4))
    assert np.allclose(brake_square_endpoint(np.eye(4)), np.eye(4))


def test_bott_rotation():
    r = bott_check(rotation_path(2.0))
    assert r.passed
    hyp = constant_generator_path(np.array([[0.0, -1.0], [-1.0, 0.0]]), 1.0)
    r = bott_check(hyp)
    assert r.passed and r.i_double.index == r.i_one.index == r.i_minus_one.index == 0


def test_bott_random(rng):
    for k in (1, 2):
        for _ in range(25):
            assert bott_check(random_generator_path(k, rng)).passed


def test_decomposition_rotation():
    r = decomposition_check(rotation_path(np.pi))
    assert r.passed and r.i_L0.index == 0 and r.i_L1.index == 0


def test_decomposition_random(rng):
    for k in (1, 2):
        for _ in range(25):
            assert decomposition_check(random_generator_path(k, rng)).passed


def test_minus_identity_structure():
    assert minus_identity_structure(diamond(-np.eye(2), rotation(1.0)))
    assert not minus_identity_structure(diamond(rotation(2.0), rotation(1.0)))
    # -I_2 on the second coordinate pair still qualifies
    assert minus_identity_structure(diamond(rotation(1.0), -np.eye(2)))


def test_brake_square_structure(rng):
    for _ in range(10):
        Q = random_symplectic(2, rng)
        r = brake_square_structure_check(diamond(-np.eye(2), Q))
        assert r["applicable"] and r["match"]


def test_fixed_plane():
    assert symplectic_fixed_plane(diamond(np.eye(2), rotation(1.0)))
    assert not symplectic_fixed_plane(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_gap_n3_ellipsoid():
    orbit = ellipsoid_analytic_orbits(EllipsoidSpec((1.0, 2 ** 0.25, 3 ** 0.25)))[0]
    g = theorem31_gap(orbit.path())
    assert g.hypotheses_hold and g.gap > 0 and (2 * g.gap).denominator == 1


def test_gap_gate_reports_failed_hypothesis():
    I3 = np.eye(3)
    hyp = constant_generator_path(-np.block([[0 * I3, I3], [I3, 0 * I3]]), 1.0)
    g = theorem31_gap(hyp)
    assert not g.hypotheses["i_ge_n"] and not g.hypotheses_hold


def test_profile_rotation():
    p = build_profile(rotation_path(1.0), k_max=16)
    assert [p.i_L0(k) for k in range(1, 8)] == [0, 0, 0, 1, 1, 1, 2]
    assert p.convex_generator


def test_jump_search_rotation():
    p = build_profile(rotation_path(1.0), k_max=16)
    r = index_jump_search([p], 200)
    assert r.tuples and r.tuples[0] == (1, 2)
    assert all(v == 0 for res in r.residuals for d in res for v in d.values())
    with pytest.raises(HorizonError):
        index_jump_search([p], 200, strict=True)


def test_jump_search_two_rotations():
    a = build_profile(rotation_path(1.0), k_max=16)
    b = build_profile(rotation_path(0.5, rate=2.0), k_max=16)   # same endpoint data
    r = index_jump_search([a, b], 50)
    assert r.tuples
    for t in r.tuples:
        assert len(t) == 3


def test_jump_search_empty_and_gate():
    r = index_jump_search([], 5)
    assert r.tuples == [(1,), (2,), (3,), (4,), (5,)]
    with pytest.raises(HypothesisError):
        index_jump_search([build_profile(identity_path(1), k_max=8)], 5)


def test_monotonicity_ellipsoid():
    for radii in ((1.0, 2 ** 0.25), (1.0, 2 ** 0.25, 3 ** 0.25)):
        for o in ellipsoid_analytic_orbits(EllipsoidSpec(radii)):
            a = monotonicity_audit(build_profile(o.path(), k_max=8))
            assert a["hypothesis"]["holds"] and a["all_hold"] and a["passed"]


def test_monotonicity_gates():
    a = monotonicity_audit(build_profile(rotation_path(1.0), k_max=8))
    assert not a["hypothesis"]["holds"] and not a["all_hold"] and a["passed"]
    a = monotonicity_audit(build_profile(identity_path(1), k_max=8))
    assert not a["hypothesis"]["convex_generator"] and not a["hypothesis"]["holds"]
