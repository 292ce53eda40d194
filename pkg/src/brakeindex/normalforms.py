"""Basic normal forms, unit-circle spectrum and splitting numbers.

Splitting numbers ``S^+-_M(w)`` are read off a table when ``M`` is a
diamond product of recognisable 2x2 factors or N2 blocks, and otherwise
computed as one-sided jumps ``i_{w e^{+-i eps}} - i_w`` along a path ending
at ``M`` (by default the polar path ``P^t O^t``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SymmetryError, UnsupportedInputError
from .sympcore import (diamond, diamond_components, diamond_factor, half_dim, inertia,
                       is_symplectic, matrix_from_json, matrix_to_json, rotation,
                       standard_n, symplectic_inverse)

CLUSTER_TOL = 1e-6
CIRCLE_TOL = 1e-6
TRACE_TOL = 1e-9


# ----------------------------------------------------------------- blocks

@dataclass(frozen=True)
class NormalFormBlock:
    """One basic normal form.

    ``kind`` is ``"D"`` (``lam = +-2``), ``"N1"`` (``lam = +-1``, ``b`` in
    ``{-1, 0, 1}``), ``"R"`` (``theta`` in ``(0, pi) U (pi, 2 pi)``) or ``"N2"``
    (``theta`` and a 2x2 ``bmat`` with ``b2 != b3``).
    """

    kind: str
    lam: float | None = None
    b: int | None = None
    theta: float | None = None
    bmat: tuple | None = None
    trivial: bool | None = None

    def __post_init__(self):
        k = self.kind
        if k == "D":
            if self.lam not in (2, -2):
                raise DomainError("D(lambda) needs lambda = +-2")
        elif k == "N1":
            if self.lam not in (1, -1) or self.b not in (-1, 0, 1):
                raise DomainError("N1(lambda, b) needs lambda = +-1 and b in {-1, 0, 1}")
        elif k in ("R", "N2"):
            th = self.theta
            if th is None or not (0 < th < 2 * np.pi) or abs(th - np.pi) < 1e-14:
                raise DomainError("theta must lie in (0, pi) U (pi, 2 pi)")
            if k == "N2":
                bm = np.asarray(self.bmat, dtype=float)
                if bm.shape != (2, 2):
                    raise DomainError("N2 needs a 2x2 b")
                if bm[0, 1] == bm[1, 0]:
                    raise DomainError("N2 needs b2 != b3")
        else:
            raise DomainError(f"unknown normal form {k!r}")

    def to_json(self) -> dict:
        if self.kind in ("D", "N1"):
            d = {"kind": self.kind, "lambda": int(self.lam)}
            if self.kind == "N1":
                d["b"] = int(self.b)
            return d
        d = {"kind": self.kind, "theta": float(self.theta)}
        if self.kind == "N2":
            d["b"] = [list(map(float, r)) for r in self.bmat]
            d["trivial"] = self.trivial
        return d

    @classmethod
    def from_json(cls, d: dict) -> "NormalFormBlock":
        kind = d["kind"]
        if kind == "D":
            return cls("D", lam=d["lambda"])
        if kind == "N1":
            return cls("N1", lam=d["lambda"], b=d["b"])
        if kind == "R":
            return cls("R", theta=float(d["theta"]))
        if kind == "N2":
            return cls("N2", theta=float(d["theta"]), bmat=tuple(map(tuple, d["b"])),
                       trivial=d.get("trivial"))
        raise DomainError(f"unknown normal form {kind!r}")


def realize_block(blk: NormalFormBlock) -> np.ndarray:
    if blk.kind == "D":
        return np.diag([blk.lam, 1.0 / blk.lam])
    if blk.kind == "N1":
        return np.array([[blk.lam, blk.b], [0.0, blk.lam]], dtype=float)
    if blk.kind == "R":
        return rotation(blk.theta)
    R = rotation(blk.theta)
    M = np.block([[R, np.asarray(blk.bmat, dtype=float)], [np.zeros((2, 2)), R]])
    ok, d = is_symplectic(M)
    if not ok:
        raise DomainError(f"N2 with this b is not symplectic (defect {d:.3g}); "
                          "R(theta)^T b must be symmetric")
    return M


def n2_matrix(theta: float, b) -> np.ndarray:
    return realize_block(NormalFormBlock("N2", theta=theta, bmat=tuple(map(tuple, np.asarray(b)))))


@dataclass
class NormalFormDecomposition:
    blocks: list
    residual: Optional[np.ndarray] = None

    def realize(self) -> np.ndarray:
        mats = [realize_block(b) for b in self.blocks]
        if self.residual is not None:
            mats.append(self.residual)
        return diamond(*mats)

    def to_json(self) -> dict:
        return {"blocks": [b.to_json() for b in self.blocks],
                "residual": None if self.residual is None else matrix_to_json(self.residual)}

    @classmethod
    def from_json(cls, d: dict) -> "NormalFormDecomposition":
        res = d.get("residual")
        return cls([NormalFormBlock.from_json(b) for b in d["blocks"]],
                   None if res is None else matrix_from_json(res))


# ----------------------------------------------------------------- spectrum

@dataclass(frozen=True)
class CircleEigen:
    omega: complex
    multiplicity: int
    nu: int

    @property
    def angle(self) -> float:
        a = float(np.angle(self.omega))
        return a + 2 * np.pi if a < 0 else a


def _snap(w: complex) -> complex:
    if abs(w - 1) < 1e-12:
        return 1.0 + 0j
    if abs(w + 1) < 1e-12:
        return -1.0 + 0j
    return w / abs(w)


def circle_spectrum(M: np.ndarray, cluster_tol: float = CLUSTER_TOL) -> list[CircleEigen]:
    """Unit-circle eigenvalues of ``M`` as ``(omega, algebraic multiplicity, nu_omega)``.

    Eigenvalues within ``cluster_tol`` of the circle are kept and merged when
    their angles differ by less than ``cluster_tol``; both members of each
    conjugate pair are listed, sorted by angle in ``[0, 2 pi)``.
    """
    from .maslov import nu_omega

    lam = np.linalg.eigvals(np.asarray(M, dtype=float))
    on = lam[np.abs(np.abs(lam) - 1) < cluster_tol]
    if on.size == 0:
        return []
    ang = np.mod(np.angle(on), 2 * np.pi)
    ang = np.where(ang > 2 * np.pi - cluster_tol, 0.0, ang)
    order = np.argsort(ang)
    ang, on = ang[order], on[order]
    groups = [[0]]
    for i in range(1, len(ang)):
        if ang[i] - ang[groups[-1][-1]] < cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        w = _snap(np.exp(1j * np.angle(np.mean(on[g]))) if len(g) else on[g[0]])
        if abs(np.angle(w)) < cluster_tol:
            w = 1.0 + 0j
        elif abs(abs(np.angle(w)) - np.pi) < cluster_tol:
            w = -1.0 + 0j
        out.append(CircleEigen(complex(w), len(g), nu_omega(M, w, rank_tol=1e-7)))
    return out


def homotopy_data(M: np.ndarray, digits: int = 6) -> list[tuple]:
    """Comparable summary of the unit-circle spectrum with multiplicities and nullities."""
    return [(round(e.angle, digits), e.multiplicity, e.nu) for e in circle_spectrum(M)]


def same_homotopy_data(M1: np.ndarray, M2: np.ndarray, tol: float = 1e-6) -> bool:
    a, b = circle_spectrum(M1), circle_spectrum(M2)
    if len(a) != len(b):
        return False
    return all(abs(x.omega - y.omega) < tol and x.multiplicity == y.multiplicity and x.nu == y.nu
               for x, y in zip(a, b))


# ----------------------------------------------------------------- splitting numbers

@dataclass(frozen=True)
class SplittingPair:
    s_plus: int
    s_minus: int

    def __add__(self, other: "SplittingPair") -> "SplittingPair":
        return SplittingPair(self.s_plus + other.s_plus, self.s_minus + other.s_minus)

    def __iter__(self):
        return iter((self.s_plus, self.s_minus))


ZERO = SplittingPair(0, 0)


def _close(a: complex, b: complex, tol: float = 1e-9) -> bool:
    return abs(complex(a) - complex(b)) < tol


def _table_2x2(F: np.ndarray, omega: complex) -> SplittingPair:
    tr = float(np.trace(F))
    if abs(tr) > 2 + TRACE_TOL:
        return ZERO
    if abs(tr) < 2 - TRACE_TOL:
        theta = float(np.arccos(np.clip(tr / 2, -1, 1)))        # in (0, pi)
        if F[1, 0] < 0:
            theta = 2 * np.pi - theta
        # F is conjugate (by a rotation-preserving change of basis) to R(theta)
        if _close(omega, np.exp(1j * theta)):
            return SplittingPair(0, 1)
        if _close(omega, np.exp(-1j * theta)):
            return SplittingPair(1, 0)
        return ZERO
    lam = 1.0 if tr > 0 else -1.0
    if not _close(omega, lam):
        return ZERO
    K = lam * F - np.eye(2)
    if np.abs(K).max() < 1e-9:
        return SplittingPair(1, 1)                      # I_2 = N1(1, 0)
    return SplittingPair(1, 1) if K[0, 1] - K[1, 0] > 0 else ZERO


def _n2_parts(F: np.ndarray, tol: float = 1e-9):
    """``(theta, b)`` if ``F = [[R(theta), b], [0, R(theta)]]``, else ``None``."""
    if F.shape != (4, 4):
        return None
    R, b, Z, R2 = F[:2, :2], F[:2, 2:], F[2:, :2], F[2:, 2:]
    if np.abs(Z).max() > tol or np.abs(R - R2).max() > tol:
        return None
    if abs(R[0, 0] - R[1, 1]) > tol or abs(R[0, 1] + R[1, 0]) > tol:
        return None
    if abs(R[0, 0] ** 2 + R[1, 0] ** 2 - 1) > tol:
        return None
    theta = float(np.mod(np.arctan2(R[1, 0], R[0, 0]), 2 * np.pi))
    if min(theta, abs(theta - np.pi), 2 * np.pi - theta) < 1e-8:
        return None
    if abs(b[0, 1] - b[1, 0]) < tol:
        return None
    return theta, b


def n2_triviality(theta: float, b, alpha: float | None = None, samples: int = 400,
                  tol: float = 1e-7) -> str:
    """``"trivial"`` when ``N2(w, b) R((t-1) alpha)^{diamond 2}`` has no unit-circle
    eigenvalue for every sampled ``t`` in ``[0, 1)``, else ``"nontrivial"``."""
    bm = np.asarray(b, dtype=float)
    if bm.shape != (2, 2):
        raise DomainError("b must be 2x2")
    if bm[0, 1] == bm[1, 0]:
        raise DomainError("N2 needs b2 != b3")
    M = n2_matrix(theta, bm)
    if alpha is None:
        alpha = 1e-2 * min(theta, abs(np.pi - theta), 2 * np.pi - theta)
    for t in np.linspace(0.0, 1.0, samples, endpoint=False):
        Rt = diamond(rotation((t - 1) * alpha), rotation((t - 1) * alpha))
        lam = np.linalg.eigvals(M @ Rt)
        if np.any(np.abs(np.abs(lam) - 1) < tol):
            return "nontrivial"
    return "trivial"


def _table_factor(F: np.ndarray, omega: complex) -> Optional[SplittingPair]:
    if F.shape == (2, 2):
        return _table_2x2(F, omega)
    parts = _n2_parts(F)
    if parts is not None:
        theta, b = parts
        if not (_close(omega, np.exp(1j * theta)) or _close(omega, np.exp(-1j * theta))):
            return ZERO
        return ZERO if n2_triviality(theta, b) == "trivial" else SplittingPair(1, 1)
    if not circle_spectrum(F):
        return ZERO
    return None


def splitting_table(M: np.ndarray, omega) -> Optional[SplittingPair]:
    """Table value via diamond factors, or ``None`` if a factor is not recognised."""
    M = np.asarray(M, dtype=float)
    total = ZERO
    for idx in diamond_components(M):
        val = _table_factor(diamond_factor(M, idx), complex(omega))
        if val is None:
            return None
        total = total + val
    return total


def polar_path(M: np.ndarray):
    """``gamma(t) = P^t O^t`` from the polar decomposition ``M = P O``.

    ``P = (M M^T)^{1/2}`` is symmetric positive definite symplectic and
    ``O`` is orthogonal symplectic, i.e. a unitary ``X + iY``; fractional
    powers use the eigendecompositions of ``P`` and of that unitary.
    """
    from .paths import FunctionPath

    M = np.asarray(M, dtype=float)
    n = half_dim(M)
    w, V = np.linalg.eigh(M @ M.T)
    logP = 0.5 * np.log(w)
    P = (V * np.exp(logP)) @ V.T
    O = np.linalg.solve(P, M)
    U = O[:n, :n] + 1j * O[n:, :n]
    lam, W = np.linalg.eig(U)
    # U is normal; re-orthonormalise within degenerate eigenspaces
    W, _ = np.linalg.qr(W)
    phi = np.angle(lam)

    def f(ts):
        Pt = np.einsum("ij,tj,kj->tik", V, np.exp(np.outer(ts, logP)), V)
        Ut = np.einsum("ij,tj,kj->tik", W, np.exp(1j * np.outer(ts, phi)), W.conj())
        X, Y = Ut.real, Ut.imag
        Ot = np.block([[X, -Y], [Y, X]])
        return Pt @ Ot

    return FunctionPath(n, 1.0, f)


def _numeric_pair(path, omega: complex, eps: float) -> SplittingPair:
    from .maslov import index_at_ends

    base = index_at_ends(path, omega)[0].index
    up = index_at_ends(path, omega * np.exp(1j * eps))[0].index
    dn = index_at_ends(path, omega * np.exp(-1j * eps))[0].index
    return SplittingPair(up - base, dn - base)


def splitting_numeric(M: np.ndarray, omega, path=None, max_halvings: int = 12) -> SplittingPair:
    """One-sided index jumps along ``path`` (default: the polar path) ending at ``M``."""
    from .maslov import nu_omega

    omega = complex(omega)
    M = np.asarray(M, dtype=float)
    if nu_omega(M, omega, rank_tol=1e-7) == 0:
        return ZERO
    if path is None:
        path = polar_path(M)
    elif np.abs(path.endpoint - M).max() > 1e-8 * max(1.0, np.abs(M).max()):
        raise ValueError("path does not end at M")
    spec = circle_spectrum(M)
    others = [abs(np.angle(e.omega / omega)) for e in spec if abs(e.omega - omega) > 1e-6]
    gap = min(others) if others else np.pi
    eps = 1e-3 * gap
    prev = _numeric_pair(path, omega, eps)
    for _ in range(max_halvings):
        eps /= 2
        cur = _numeric_pair(path, omega, eps)
        if cur == prev:
            return cur
        prev = cur
    from .errors import InstabilityError
    raise InstabilityError("splitting numbers did not stabilise under shrinking eps")


def splitting_numbers(M: np.ndarray, omega, method: str = "auto", path=None) -> SplittingPair:
    """``(S^+_M(w), S^-_M(w))``.

    ``method`` is ``"table"`` (raise `UnsupportedInputError` when some factor
    is not a recognised normal form), ``"numeric"`` or ``"auto"`` (table
    first, numeric fallback).
    """
    omega = complex(omega)
    if abs(abs(omega) - 1) > 1e-12:
        raise ValueError("omega must lie on the unit circle")
    if method not in ("auto", "table", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    M = np.asarray(M, dtype=float)
    if method in ("auto", "table"):
        val = splitting_table(M, omega)
        if val is not None:
            return val
        if method == "table":
            raise UnsupportedInputError("matrix is not a diamond product of recognised normal forms")
    return splitting_numeric(M, omega, path=path)


# ----------------------------------------------------------------- decompositions

def _block_for_2x2(F: np.ndarray) -> NormalFormBlock:
    tr = float(np.trace(F))
    if tr > 2 + TRACE_TOL:
        return NormalFormBlock("D", lam=2)
    if tr < -2 - TRACE_TOL:
        return NormalFormBlock("D", lam=-2)
    if abs(tr) < 2 - TRACE_TOL:
        theta = float(np.arccos(np.clip(tr / 2, -1, 1)))
        if F[1, 0] < 0:
            theta = 2 * np.pi - theta
        return NormalFormBlock("R", theta=theta)
    lam = 1 if tr > 0 else -1
    K = lam * F - np.eye(2)
    if np.abs(K).max() < 1e-9:
        return NormalFormBlock("N1", lam=lam, b=0)
    return NormalFormBlock("N1", lam=lam, b=1 if K[0, 1] - K[1, 0] > 0 else -1)


def normal_form_decomposition(M: np.ndarray) -> NormalFormDecomposition:
    """Blocks ``B_i`` with ``M`` in the same homotopy component as
    ``B_1 diamond ... diamond residual``, up to reordering of diamond factors.

    Factors without unit-circle spectrum that are not 2x2 are collected into
    the residual. Raises `UnsupportedInputError` for other factors.
    """
    M = np.asarray(M, dtype=float)
    blocks, residual = [], []
    for idx in diamond_components(M):
        F = diamond_factor(M, idx)
        if F.shape == (2, 2):
            blocks.append(_block_for_2x2(F))
            continue
        parts = _n2_parts(F)
        if parts is not None:
            theta, b = parts
            triv = n2_triviality(theta, b) == "trivial"
            blocks.append(NormalFormBlock("N2", theta=theta, bmat=tuple(map(tuple, b)), trivial=triv))
            continue
        if not circle_spectrum(F):
            residual.append(F)
            continue
        raise UnsupportedInputError(f"factor on coordinates {idx} is not a recognised normal form")
    return NormalFormDecomposition(blocks, diamond(*residual) if residual else None)


def classify_unipotent(C: np.ndarray):
    """``(p, q, r) = (m^0(C), m^-(C), m^+(C))`` for ``P = [[I, 0], [C, I]]``, with the
    decomposition ``I_2^p diamond N1(1,1)^q diamond N1(1,-1)^r``."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise SymmetryError("C must be square")
    ine = inertia(C)
    p, q, r = ine.zero, ine.minus, ine.plus
    blocks = ([NormalFormBlock("N1", lam=1, b=0)] * p + [NormalFormBlock("N1", lam=1, b=1)] * q
              + [NormalFormBlock("N1", lam=1, b=-1)] * r)
    return (p, q, r), NormalFormDecomposition(blocks)


def unipotent_matrix(C: np.ndarray) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    k = len(C)
    return np.block([[np.eye(k), np.zeros((k, k))], [C, np.eye(k)]])


# ----------------------------------------------------------------- special homotopy

@dataclass
class SpecialHomotopyReport:
    relation_holds: bool
    relation_defect: float
    sgn_plus: tuple
    sgn_minus: tuple
    brake_square_match: bool

    @property
    def passed(self) -> bool:
        return (self.relation_holds and self.sgn_plus[0] == self.sgn_plus[1]
                and self.sgn_minus[0] == self.sgn_minus[1] and self.brake_square_match)

    def __bool__(self):
        return self.passed


def verify_special_homotopy(M1, M2, Q1, Q2, tol: float = 1e-9) -> SpecialHomotopyReport:
    """Check ``M1 = P1 M2 P2`` with ``P_j = diag(Q_j, Q_j^{-T})`` and, on success,
    that both matrices share ``sgn M_eps`` (either side) and the homotopy data of
    ``N M^{-1} N M``."""
    from .maslov import m_eps_signature_stable

    M1, M2 = np.asarray(M1, float), np.asarray(M2, float)
    Q1, Q2 = np.atleast_2d(np.asarray(Q1, float)), np.atleast_2d(np.asarray(Q2, float))
    for Q in (Q1, Q2):
        if np.linalg.det(Q) <= 0:
            raise DomainError("witness rejected: det Q must be positive")
    k = half_dim(M1)
    if M2.shape != M1.shape or Q1.shape != (k, k) or Q2.shape != (k, k):
        raise DomainError("shapes are inconsistent")

    def P(Q):
        Z = np.zeros((k, k))
        return np.block([[Q, Z], [Z, np.linalg.inv(Q).T]])

    defect = float(np.abs(M1 - P(Q1) @ M2 @ P(Q2)).max())
    holds = defect <= tol * max(1.0, np.abs(M1).max())
    sp = (m_eps_signature_stable(M1, "+"), m_eps_signature_stable(M2, "+"))
    sm = (m_eps_signature_stable(M1, "-"), m_eps_signature_stable(M2, "-"))
    N = standard_n(k)
    sq1 = N @ symplectic_inverse(M1) @ N @ M1
    sq2 = N @ symplectic_inverse(M2) @ N @ M2
    return SpecialHomotopyReport(holds, defect, sp, sm, same_homotopy_data(sq1, sq2))
