import numpy as np
import pytest

from brakeindex.errors import HypothesisError, RefinementNeeded
from brakeindex.maslov import (i_lagrangian, i_lagrangian_convex_oracle, i_omega,
                               i_omega_perturbation_audit, index_at_ends, lemma25_audit,
                               m_eps_matrix, m_eps_signature_stable, mean_index_L0, nu_lagrangian,
                               nu_omega, theorem21_check)
from brakeindex.normalforms import n2_matrix
from brakeindex.paths import (SampledPath, constant_generator_path, diamond_paths, function_path,
                              identity_path, random_generator_path, rotation_path)
from brakeindex.sympcore import blocks, diamond, random_symplectic, rotation


def test_nu_omega():
    assert nu_omega(np.eye(2), 1) == 2
    th = 1.1
    assert nu_omega(rotation(th), np.exp(1j * th)) == 1
    assert nu_omega(np.array([[1.0, 1.0], [0.0, 1.0]]), 1) == 1


def test_nu_lagrangian():
    assert nu_lagrangian(np.eye(4), 0) == 2
    assert nu_lagrangian(rotation(np.pi / 2), 0) == 0
    assert nu_lagrangian(np.array([[1.0, 0.0], [5.0, 1.0]]), 0) == 1


def test_i_omega_rotation_examples():
    assert tuple(i_omega(rotation_path(1.0, rate=np.pi / 2), 1)) == (1, 0)
    assert tuple(i_omega(rotation_path(1.0, rate=2 * np.pi), 1)) == (1, 2)
    hyp = constant_generator_path(np.array([[0.0, -1.0], [-1.0, 0.0]]), 1.0)   # exp(t diag(1,-1))
    assert np.allclose(hyp.endpoint, np.diag([np.e, 1 / np.e]))
    assert tuple(i_omega(hyp, 1)) == (0, 0)


def test_crossing_rule_equals_perturbation_inf():
    p = rotation_path(1.0, rate=2 * np.pi)
    audit = i_omega_perturbation_audit(p)
    assert audit["inf"] == audit["crossing_rule"] == 1


@pytest.mark.parametrize("phi", [0.5, 1.5, 3.0, 2 * np.pi - 1.5, 5.5])
def test_i_omega_off_one(phi):
    theta = 1.5
    p = rotation_path(1.0, rate=theta)
    expect = 1 if (phi < theta or phi > 2 * np.pi - theta) else 0
    assert i_omega(p, np.exp(1j * phi)).index == expect


@pytest.mark.parametrize("T, index, nu", [(np.pi / 2, 0, 0), (np.pi, 0, 1), (2 * np.pi, 1, 1),
                                          (3 * np.pi, 2, 1)])
def test_i_L0_rotation(T, index, nu):
    assert tuple(i_lagrangian(rotation_path(T), 0)) == (index, nu)


@pytest.mark.parametrize("T", [np.pi / 2, 2 * np.pi, 3 * np.pi, 4.0])
def test_convex_oracle_matches(T):
    p = rotation_path(T)
    assert i_lagrangian_convex_oracle(p, 0) == i_lagrangian(p, 0).index
    assert i_lagrangian_convex_oracle(p, 1) == i_lagrangian(p, 1).index


def test_convex_oracle_needs_definite_block():
    with pytest.raises(HypothesisError):
        i_lagrangian_convex_oracle(identity_path(1), 0)


def test_constant_path_L0():
    # the mu - n normalisation puts the constant path at -n (see README)
    for k in (1, 2):
        assert tuple(i_lagrangian(identity_path(k), 0)) == (-k, k)


def test_index_at_ends_consistent():
    p = rotation_path(3 * np.pi)
    sweep = index_at_ends(p, "L0", [np.pi / 2, np.pi, 2 * np.pi, 3 * np.pi])
    single = [i_lagrangian(rotation_path(t), 0) for t in (np.pi / 2, np.pi, 2 * np.pi, 3 * np.pi)]
    assert [tuple(a) for a in sweep] == [tuple(b) for b in single]


def test_sampled_path_coarse_raises():
    ts = np.linspace(0, 6 * np.pi, 5)
    p = SampledPath(ts, [rotation(t) for t in ts])
    with pytest.raises(RefinementNeeded):
        i_omega(p, 1)


def test_m_eps_block_identity(rng):
    P = random_symplectic(2, rng)
    A, B, C, D = blocks(P)
    M0 = m_eps_matrix(P, 0.0).matrix
    expect = -2 * np.block([[A.T @ C, C.T @ B], [B.T @ C, B.T @ D]])
    assert np.allclose(M0, expect, atol=1e-10)


@pytest.mark.parametrize("th", [0.5, np.pi / 2, 3.0])
@pytest.mark.parametrize("b", [0.1, 1.0, 10.0])
def test_m_eps_rotation_and_shear_values(th, b):
    assert m_eps_signature_stable(rotation(th), "+") == 0
    assert m_eps_signature_stable(rotation(th), "-") == 0
    assert m_eps_signature_stable(np.array([[1.0, -b], [0.0, 1.0]]), "+") == 2
    assert m_eps_signature_stable(np.array([[1.0, 0.0], [b, 1.0]]), "+") == -2


def test_m_eps_examples():
    assert m_eps_signature_stable(np.eye(4), "+") == 0
    P = diamond(rotation(0.7), np.array([[1.0, -1.0], [0.0, 1.0]]))
    assert m_eps_signature_stable(P, "+") == 2


def test_m_eps_invertible_b_c(rng):
    for _ in range(20):
        P = random_symplectic(2, rng)
        _, B, C, _ = blocks(P)
        if min(abs(np.linalg.det(B)), abs(np.linalg.det(C))) < 1e-3:
            continue
        assert m_eps_signature_stable(P, "+") == m_eps_matrix(P, 0.0).signature


def test_index_difference_rotation():
    r = theorem21_check(rotation_path(np.pi))
    assert r.lhs_plus == 0 and r.sgn_plus == 0 and r.passed


def test_index_difference_random(rng):
    for k in (1, 2):
        for _ in range(40):
            assert theorem21_check(random_generator_path(k, rng)).passed


def test_index_difference_diamond_of_sp2_paths(rng):
    p = diamond_paths(random_generator_path(1, rng), random_generator_path(1, rng))
    assert theorem21_check(p).passed


def test_m_eps_bounds_examples(rng):
    a = lemma25_audit(np.array([[1.0, 0.0], [2.0, 1.0]]))
    assert a["half_sgn_plus"] == -1 and a["passed"]
    assert a["margins"]["i_nu_L0"] == 1 and a["margins"]["iii_ker_C"] == 0
    # the B = 0 bound read with eps < 0 fails here
    assert a["as_stated"]["ii_B_zero_negative_eps"] < 0
    a = lemma25_audit(np.eye(2))
    assert a["half_sgn_plus"] == 0 and a["passed"]
    for _ in range(100):
        assert lemma25_audit(random_symplectic(2, rng))["passed"]


def test_mean_index():
    m, seq = mean_index_L0(rotation_path(1.0), 16)
    assert abs(m - 1 / np.pi) < 1 / 16
    _, seq = mean_index_L0(identity_path(1), 16)
    assert abs(seq[-1]) == pytest.approx(1 / 16)           # -n / k -> 0
    hyp = constant_generator_path(np.array([[0.0, -np.log(2)], [-np.log(2), 0.0]]), 1.0)
    assert np.allclose(hyp.endpoint, np.diag([2, 0.5]))
    _, seq = mean_index_L0(hyp, 8)
    assert seq == [-1 / k for k in range(1, 9)]            # B = 0 along the path, so no crossings
