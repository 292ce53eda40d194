"""Symplectic linear algebra on plain numpy arrays.

Conventions: a vector of R^{2k} is ordered ``(p_1..p_k, q_1..q_k)``, so that

    J_k = [[0, -I], [I, 0]],     N_k = [[-I, 0], [0, I]],

``L0 = {0} x R^k`` (the q-plane) and ``L1 = R^k x {0}`` (the p-plane).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import DimensionError, FrameError, SymmetryError

SYMPLECTIC_TOL = 1e-10
RANK_TOL = 1e-9


def standard_j(k: int) -> np.ndarray:
    if k < 1:
        raise DimensionError("k must be positive")
    I = np.eye(k)
    Z = np.zeros((k, k))
    return np.block([[Z, -I], [I, Z]])


def standard_n(k: int) -> np.ndarray:
    if k < 1:
        raise DimensionError("k must be positive")
    return np.diag(np.r_[-np.ones(k), np.ones(k)])


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def half_dim(M: np.ndarray) -> int:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise DimensionError(f"expected a square matrix of even size, got {M.shape}")
    return M.shape[0] // 2


def blocks(M: np.ndarray):
    """Return the k x k blocks ``A, B, C, D`` of ``M = [[A, B], [C, D]]``."""
    k = half_dim(M)
    return M[:k, :k], M[:k, k:], M[k:, :k], M[k:, k:]


def symplectic_defect(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=float)
    Jk = standard_j(half_dim(M))
    return float(np.abs(M.T @ Jk @ M - Jk).max())


def is_symplectic(M: np.ndarray, tol: float = SYMPLECTIC_TOL) -> tuple[bool, float]:
    """Check ``M^T J M = J``; returns ``(passed, max-norm defect)``."""
    d = symplectic_defect(M)
    return d <= tol, d


def symplectic_inverse(M: np.ndarray) -> np.ndarray:
    """``M^{-1} = -J M^T J``, exact for symplectic ``M``."""
    Jk = standard_j(half_dim(M))
    return -Jk @ M.T @ Jk


def diamond(*Ms: np.ndarray) -> np.ndarray:
    """Diamond product: interleave the blocks of each factor.

    For ``M_i = [[A_i, B_i], [C_i, D_i]]`` the result is
    ``[[diag(A_i), diag(B_i)], [diag(C_i), diag(D_i)]]``.
    """
    if not Ms:
        raise DimensionError("diamond needs at least one factor")
    return reduce(_diamond2, [np.asarray(M, dtype=float) for M in Ms])


def _diamond2(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    m1, m2 = half_dim(M1), half_dim(M2)
    m = m1 + m2
    out = np.zeros((2 * m, 2 * m), dtype=np.result_type(M1, M2))
    i1 = np.r_[0:m1, m:m + m1]
    i2 = np.r_[m1:m, m + m1:2 * m]
    out[np.ix_(i1, i1)] = M1
    out[np.ix_(i2, i2)] = M2
    return out


def diamond_power(M: np.ndarray, count: int) -> np.ndarray:
    return diamond(*([M] * count))


def diamond_components(M: np.ndarray, tol: float = 1e-9) -> list[list[int]]:
    """Finest splitting of ``M`` into diamond factors, as lists of coordinate indices.

    Two indices ``i, j < k`` are coupled when any block entry ``(i, j)`` or
    ``(j, i)`` exceeds ``tol * max|M|``; the factors are the connected
    components of that coupling graph.
    """
    k = half_dim(M)
    scale = max(1.0, float(np.abs(M).max()))
    coupled = np.zeros((k, k), dtype=bool)
    for X in blocks(M):
        big = np.abs(X) > tol * scale
        coupled |= big | big.T
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(coupled)):
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def diamond_factor(M: np.ndarray, idx: list[int]) -> np.ndarray:
    """Extract the diamond factor living on coordinates ``idx`` (see `diamond_components`)."""
    k = half_dim(M)
    full = np.r_[idx, np.asarray(idx) + k]
    return M[np.ix_(full, full)]


@dataclass(frozen=True)
class Inertia:
    plus: int
    zero: int
    minus: int

    @property
    def signature(self) -> int:
        return self.plus - self.minus

    @property
    def dim(self) -> int:
        return self.plus + self.zero + self.minus


def inertia(F: np.ndarray, zero_tol: float | None = None, sym_tol: float = 1e-8) -> Inertia:
    """Inertia ``(m+, m0, m-)`` of a symmetric matrix.

    Eigenvalues with ``|lambda| <= zero_tol`` count as zero; the default
    tolerance is ``1e-10 * max(1, spectral radius)``.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise DimensionError(f"expected a square matrix, got {F.shape}")
    if F.size == 0:
        return Inertia(0, 0, 0)
    scale = max(1.0, float(np.abs(F).max()))
    if np.abs(F - F.T).max() > sym_tol * scale:
        raise SymmetryError("inertia requires a symmetric matrix")
    w = np.linalg.eigvalsh(0.5 * (F + F.T))
    if zero_tol is None:
        zero_tol = 1e-10 * max(1.0, float(np.abs(w).max()))
    plus = int(np.sum(w > zero_tol))
    minus = int(np.sum(w < -zero_tol))
    return Inertia(plus, len(w) - plus - minus, minus)


def nullity(M: np.ndarray, rank_tol: float = RANK_TOL, scale: float | None = None) -> int:
    """Kernel dimension of a (real or complex) matrix via singular values.

    Singular values at or below ``rank_tol * scale`` count as zero, where
    ``scale`` defaults to ``max(1, largest singular value)``.
    """
    M = np.asarray(M)
    if M.size == 0:
        return M.shape[1] if M.ndim == 2 else 0
    s = np.linalg.svd(M, compute_uv=False)
    if scale is None:
        scale = max(1.0, float(s[0]))
    return int(M.shape[1] - np.sum(s > rank_tol * scale))


@dataclass(frozen=True)
class LagrangianFrame:
    """Orthonormal basis of a Lagrangian subspace for the form ``<form x, y>``.

    ``form`` defaults to ``J_k`` on R^{2k}; pass ``(-J) (+) J`` for the
    doubled space used with graphs.
    """

    basis: np.ndarray
    form: np.ndarray = field(repr=False)
    tol: float = SYMPLECTIC_TOL

    def __init__(self, basis, form=None, tol: float = SYMPLECTIC_TOL, check: bool = True):
        basis = np.asarray(basis)
        dim, k = basis.shape
        if dim != 2 * k:
            raise DimensionError(f"Lagrangian frame must be 2k x k, got {basis.shape}")
        if form is None:
            form = standard_j(k)
        u, s, _ = np.linalg.svd(basis, full_matrices=False)
        if s[-1] <= RANK_TOL * max(1.0, s[0]):
            raise FrameError("frame is rank deficient")
        object.__setattr__(self, "basis", u)
        object.__setattr__(self, "form", np.asarray(form))
        object.__setattr__(self, "tol", tol)
        if check and self.isotropy_defect > tol:
            raise FrameError(f"subspace is not isotropic (defect {self.isotropy_defect:.3g})")

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    @property
    def isotropy_defect(self) -> float:
        return isotropy_defect(self.basis, self.form)


def isotropy_defect(basis: np.ndarray, form: np.ndarray) -> float:
    """``max|B^H form B|`` for an orthonormalised copy of ``basis``."""
    u, _, _ = np.linalg.svd(np.asarray(basis), full_matrices=False)
    return float(np.abs(u.conj().T @ form @ u).max())


def lagrangian_l0(k: int) -> LagrangianFrame:
    return LagrangianFrame(np.vstack([np.zeros((k, k)), np.eye(k)]))


def lagrangian_l1(k: int) -> LagrangianFrame:
    return LagrangianFrame(np.vstack([np.eye(k), np.zeros((k, k))]))


def lagrangian_intersection_dim(A: LagrangianFrame, B: LagrangianFrame,
                                rank_tol: float = RANK_TOL) -> int:
    """``dim(span A  cap  span B)`` from the rank deficiency of ``[A | B]``."""
    if A.basis.shape[0] != B.basis.shape[0]:
        raise DimensionError("frames live in different spaces")
    stacked = np.hstack([A.basis, B.basis])
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > rank_tol * s[0]))
    return A.k + B.k - rank


def doubled_form(k: int) -> np.ndarray:
    """``(-J_k) (+) J_k`` on ``F = R^{2k} (+) R^{2k}``."""
    Jk = standard_j(k)
    Z = np.zeros_like(Jk)
    return np.block([[-Jk, Z], [Z, Jk]])


def graph_lagrangian(M: np.ndarray, tol: float = SYMPLECTIC_TOL) -> LagrangianFrame:
    """Frame ``[I; M]`` of ``Gr(M)`` inside ``F`` with the doubled form.

    Raises `FrameError` when ``M`` is not symplectic (the graph is then not
    isotropic).
    """
    k = half_dim(M)
    return LagrangianFrame(np.vstack([np.eye(2 * k), M]), form=doubled_form(k), tol=tol)


def random_symplectic(k: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Product of exponentials of random Hamiltonian matrices."""
    from scipy.linalg import expm

    Jk = standard_j(k)
    M = np.eye(2 * k)
    for _ in range(2):
        S = rng.normal(scale=scale, size=(2 * k, 2 * k))
        M = expm(Jk @ (S + S.T) / 2) @ M
    return M


def matrix_to_json(M: np.ndarray) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "data": [float(v) for v in M.ravel()]}


def matrix_from_json(doc: dict) -> np.ndarray:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    data = np.asarray(doc["data"], dtype=float)
    if rows < 1 or cols < 1 or data.size != rows * cols:
        raise DimensionError(f"matrix document has {data.size} entries for shape {rows}x{cols}")
    if not np.all(np.isfinite(data)):
        raise ValueError("matrix document contains non-finite entries")
    return data.reshape(rows, cols)


# names used throughout the documentation
diamond_product = diamond
inertia_of_symmetric = inertia
