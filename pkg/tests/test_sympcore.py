import numpy as np
import pytest

from brakeindex.errors import DimensionError, FrameError, SymmetryError
from brakeindex.sympcore import (blocks, diamond, diamond_components, diamond_factor, graph_lagrangian,
                                 inertia, is_symplectic, isotropy_defect, doubled_form,
                                 lagrangian_intersection_dim, lagrangian_l0, lagrangian_l1,
                                 LagrangianFrame, matrix_from_json, matrix_to_json, nullity,
                                 random_symplectic, rotation, standard_j, standard_n,
                                 symplectic_inverse)


def test_standard_j():
    assert np.array_equal(standard_j(1), [[0, -1], [1, 0]])
    J2 = standard_j(2)
    assert np.array_equal(J2[:2, 2:], -np.eye(2)) and np.array_equal(J2[2:, :2], np.eye(2))
    assert np.array_equal(standard_j(1) @ standard_j(1), -np.eye(2))


def test_standard_n():
    assert np.array_equal(standard_n(1), np.diag([-1, 1]))
    J, N = standard_j(1), standard_n(1)
    assert np.array_equal(N @ J + J @ N, np.zeros((2, 2)))
    assert np.array_equal(standard_n(2) @ standard_n(2), np.eye(4))


def test_is_symplectic():
    ok, d = is_symplectic(np.eye(4))
    assert ok and d == 0
    assert is_symplectic(rotation(0.7))[0]
    ok, d = is_symplectic(np.diag([2.0, 1.0]))
    assert not ok and d == pytest.approx(1.0)


def test_symplectic_inverse(rng):
    M = random_symplectic(3, rng)
    assert np.allclose(symplectic_inverse(M) @ M, np.eye(6), atol=1e-10)


def test_diamond_examples(rng):
    assert np.array_equal(diamond(np.eye(2), np.eye(2)), np.eye(4))
    M = diamond(rotation(np.pi / 2), rotation(np.pi / 2))
    A, B, C, D = blocks(M)
    assert np.allclose(A, 0) and np.allclose(D, 0)
    assert np.allclose(B, -np.eye(2)) and np.allclose(C, np.eye(2))
    Ms = [random_symplectic(1, rng) for _ in range(3)]
    assert np.allclose(diamond(diamond(Ms[0], Ms[1]), Ms[2]), diamond(Ms[0], diamond(Ms[1], Ms[2])))
    assert is_symplectic(diamond(*Ms))[0]


def test_diamond_components_roundtrip(rng):
    A, B = random_symplectic(1, rng), random_symplectic(2, rng)
    M = diamond(A, B)
    comps = diamond_components(M)
    assert sorted(len(c) for c in comps) == [1, 2]
    facs = [diamond_factor(M, c) for c in comps]
    assert any(f.shape == A.shape and np.allclose(f, A) for f in facs)
    assert any(f.shape == B.shape and np.allclose(f, B) for f in facs)


def test_inertia_examples():
    i = inertia(np.diag([1.0, -1.0, 0.0]))
    assert (i.plus, i.zero, i.minus) == (1, 1, 1)
    i = inertia(np.zeros((2, 2)))
    assert (i.plus, i.zero, i.minus) == (0, 2, 0)
    i = inertia(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert (i.plus, i.zero, i.minus) == (2, 0, 0) and i.signature == 2
    with pytest.raises(SymmetryError):
        inertia(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_nullity():
    assert nullity(np.zeros((3, 3))) == 3
    assert nullity(np.diag([1.0, 1e-14, 2.0])) == 1


def test_lagrangian_intersections():
    assert lagrangian_intersection_dim(lagrangian_l0(2), lagrangian_l0(2)) == 2
    assert lagrangian_intersection_dim(lagrangian_l0(2), lagrangian_l1(2)) == 0
    L = LagrangianFrame(rotation(np.pi) @ lagrangian_l0(1).basis)
    assert lagrangian_intersection_dim(L, lagrangian_l0(1)) == 1


def test_frame_rejects_non_isotropic():
    with pytest.raises(FrameError):
        LagrangianFrame(np.eye(4)[:, [0, 2]])     # span{p1, q1} is a symplectic plane


def test_graph_lagrangian():
    G = graph_lagrangian(np.eye(2))
    assert G.isotropy_defect == 0 or G.isotropy_defect < 1e-15
    G = graph_lagrangian(rotation(0.3))
    assert G.isotropy_defect <= 1e-12
    bad = np.vstack([np.eye(2), np.diag([2.0, 1.0])])
    assert isotropy_defect(bad, doubled_form(1)) > 0
    with pytest.raises(Exception):
        graph_lagrangian(np.diag([2.0, 1.0]))


def test_matrix_json_roundtrip(rng):
    M = random_symplectic(2, rng)
    doc = matrix_to_json(M)
    assert doc["rows"] == 4 and doc["cols"] == 4 and len(doc["data"]) == 16
    assert np.array_equal(matrix_from_json(doc), M)
    with pytest.raises((ValueError, DimensionError)):
        matrix_from_json({"rows": 2, "cols": 2, "data": [1, 2, 3]})
