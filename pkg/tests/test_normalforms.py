import numpy as np
import pytest

from brakeindex.errors import DomainError, UnsupportedInputError
from brakeindex.maslov import m_eps_signature_stable
from brakeindex.normalforms import (NormalFormBlock, NormalFormDecomposition, SplittingPair,
                                    circle_spectrum, classify_unipotent, n2_matrix, n2_triviality,
                                    normal_form_decomposition, realize_block, same_homotopy_data,
                                    splitting_numbers, unipotent_matrix, verify_special_homotopy)
from brakeindex.maslov import nu_omega
from brakeindex.sympcore import diamond, random_symplectic, rotation


def n1(lam, b):
    return realize_block(NormalFormBlock("N1", lam=lam, b=b))


def test_realize_blocks():
    assert np.array_equal(n1(1, 1), [[1, 1], [0, 1]])
    assert np.allclose(realize_block(NormalFormBlock("R", theta=np.pi / 3)),
                       [[0.5, -np.sqrt(3) / 2], [np.sqrt(3) / 2, 0.5]])
    assert np.allclose(realize_block(NormalFormBlock("D", lam=2)), np.diag([2, 0.5]))
    with pytest.raises(DomainError):
        NormalFormBlock("N1", lam=1, b=2)
    with pytest.raises(DomainError):
        NormalFormBlock("R", theta=np.pi)


def test_block_json_roundtrip():
    blocks = [NormalFormBlock("D", lam=-2), NormalFormBlock("N1", lam=-1, b=-1),
              NormalFormBlock("R", theta=2.0)]
    d = NormalFormDecomposition(blocks)
    assert NormalFormDecomposition.from_json(d.to_json()).blocks == blocks


def test_circle_spectrum():
    th = 0.9
    sp = circle_spectrum(rotation(th))
    assert len(sp) == 2 and all(e.multiplicity == 1 and e.nu == 1 for e in sp)
    assert sorted(e.angle for e in sp) == pytest.approx([th, 2 * np.pi - th])
    assert circle_spectrum(np.diag([2.0, 0.5])) == []
    sp = circle_spectrum(n1(1, 1))
    assert len(sp) == 1 and sp[0].omega == 1 and sp[0].multiplicity == 2 and sp[0].nu == 1


@pytest.mark.parametrize("method", ["table", "numeric"])
def test_splitting_entries(method):
    for sign in (1, -1):
        for b in (1, 0):
            assert tuple(splitting_numbers(sign * n1(1, b), sign, method)) == (1, 1)
        assert tuple(splitting_numbers(sign * n1(1, -1), sign, method)) == (0, 0)
    for th in (0.4, 2.0, 4.0, 5.9):
        assert tuple(splitting_numbers(rotation(th), np.exp(1j * th), method)) == (0, 1)
    D = np.diag([2.0, 0.5])
    for w in (1, -1, np.exp(0.3j)):
        assert tuple(splitting_numbers(D, w, method)) == (0, 0)


def test_splitting_table_rejects_unknown(rng):
    M = random_symplectic(2, rng)
    while not circle_spectrum(M) or len(
            __import__("brakeindex").sympcore.diamond_components(M)) == 2:
        M = random_symplectic(2, rng, scale=0.3)
    with pytest.raises(UnsupportedInputError):
        splitting_numbers(M, 1, "table")


def test_splitting_additivity(rng):
    for _ in range(10):
        a, b = random_symplectic(1, rng, scale=0.5), random_symplectic(1, rng, scale=0.5)
        for w in (1, -1, np.exp(0.7j)):
            s = splitting_numbers(diamond(a, b), w)
            assert s == splitting_numbers(a, w) + splitting_numbers(b, w)


def test_n2_rejects_non_symplectic_b():
    # R(pi/2)^T b must be symmetric; b = [[1, 1], [0, 1]] fails that at pi/2
    with pytest.raises(DomainError):
        n2_matrix(np.pi / 2, [[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(DomainError):
        n2_triviality(np.pi / 2, np.eye(2))


@pytest.mark.parametrize("theta, b", [
    (np.pi / 2, [[0.0, -1.0], [1.0, 0.0]]),          # R S with S = I
    (np.pi / 2, [[0.0, 1.0], [-1.0, 0.0]]),          # R S with S = -I
    (1.0, None), (4.0, None)])
def test_n2_classification_matches_numeric(theta, b, rng):
    while b is None or abs(b[0][1] - b[1][0]) < 0.1:
        S = rng.normal(size=(2, 2))
        b = rotation(theta) @ (S + S.T)             # R^T b symmetric keeps N2 symplectic
    M = n2_matrix(theta, b)
    w = np.exp(1j * theta)
    kind = n2_triviality(theta, b)
    expect = (0, 0) if kind == "trivial" else (1, 1)
    assert tuple(splitting_numbers(M, w, "table")) == expect
    assert tuple(splitting_numbers(M, w, "numeric")) == expect


def test_classify_unipotent_examples():
    (p, q, r), dec = classify_unipotent(np.diag([0.0, -1.0, 1.0]))
    assert (p, q, r) == (1, 1, 1)
    (p, q, r), dec = classify_unipotent(np.zeros((2, 2)))
    assert (p, q, r) == (2, 0, 0) and np.array_equal(dec.realize(), np.eye(4))
    assert classify_unipotent(np.array([[2.0, 1.0], [1.0, 2.0]]))[0] == (0, 0, 2)


def test_unipotent_identities(rng):
    for _ in range(20):
        k = rng.integers(1, 5)
        S = rng.integers(-2, 3, size=(k, k)).astype(float)
        C = S + S.T
        (p, q, r), _ = classify_unipotent(C)
        P = unipotent_matrix(C)
        assert p + q + r == k
        assert nu_omega(P, 1) == 2 * p + q + r
        assert splitting_numbers(P, 1).s_plus == p + q


def test_normal_form_decomposition_homotopy():
    M = diamond(rotation(1.0), n1(-1, 1), np.diag([2.0, 0.5]))
    dec = normal_form_decomposition(M)
    assert same_homotopy_data(dec.realize(), M)


def test_special_homotopy():
    M2 = n1(1, 1)
    r = verify_special_homotopy(M2, M2, np.eye(1), np.eye(1))
    assert r.passed
    M1 = np.array([[2.0, 2.0], [0.0, 0.5]])
    r = verify_special_homotopy(M1, M2, np.array([[2.0]]), np.eye(1))
    assert r.passed and r.sgn_plus == (0, 0)
    assert m_eps_signature_stable(M1, "+") == 0
    with pytest.raises(DomainError):
        verify_special_homotopy(M1, M2, np.array([[-1.0]]), np.eye(1))
