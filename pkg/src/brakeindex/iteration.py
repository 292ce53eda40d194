"""Iterates of symplectic paths and the identities that tie their indices together.

Brake iterates ``gamma^k`` live on ``[0, k tau]``; the periodic double is
``gamma(t - tau) gamma(tau)`` on ``[tau, 2 tau]``. Index profiles are built
from a single sweep of the brake iterate, which also serves the periodic
data since ``gamma^{2m}`` is the m-fold periodic iterate of ``gamma^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import HypothesisError
from .maslov import IndexPair, i_lagrangian, i_omega, index_at_ends
from .normalforms import SplittingPair, same_homotopy_data, splitting_numbers
from .paths import SymplecticPath, brake_iterate, periodic_iterate, periodic_square
from .sympcore import diamond, standard_j, standard_n, symplectic_inverse

__all__ = ["brake_iterate", "periodic_iterate", "periodic_square", "brake_square_endpoint",
           "bott_check", "decomposition_check", "minus_identity_structure",
           "symplectic_fixed_plane", "theorem31_gap", "IterationProfile", "build_profile",
           "index_jump_search", "monotonicity_audit", "brake_square_structure_check"]


def brake_square_endpoint(P: np.ndarray) -> np.ndarray:
    """``N P^{-1} N P``: endpoint of the second brake iterate."""
    N = standard_n(len(P) // 2)
    return N @ symplectic_inverse(P) @ N @ P


# ----------------------------------------------------------------- identities

@dataclass
class BottReport:
    i_double: IndexPair
    i_one: IndexPair
    i_minus_one: IndexPair
    s_square: SplittingPair
    s_one: SplittingPair
    s_minus_one: SplittingPair

    @property
    def index_ok(self) -> bool:
        return self.i_double.index == self.i_one.index + self.i_minus_one.index

    @property
    def nullity_ok(self) -> bool:
        return self.i_double.nullity == self.i_one.nullity + self.i_minus_one.nullity

    @property
    def splitting_ok(self) -> bool:
        return self.s_square.s_plus == self.s_one.s_plus + self.s_minus_one.s_plus

    @property
    def passed(self) -> bool:
        return self.index_ok and self.nullity_ok and self.splitting_ok

    def to_dict(self) -> dict:
        return {"i_double": list(self.i_double), "i_1": list(self.i_one),
                "i_-1": list(self.i_minus_one), "S+_P2(1)": self.s_square.s_plus,
                "S+_P(1)": self.s_one.s_plus, "S+_P(-1)": self.s_minus_one.s_plus,
                "passed": self.passed}


def bott_check(path: SymplecticPath, splitting: bool = True) -> BottReport:
    """``i(gamma^2) = i_1 + i_{-1}``, same for nullities, and
    ``S^+_{P^2}(1) = S^+_P(1) + S^+_P(-1)``, with ``gamma^2`` the periodic double."""
    dbl = periodic_square(path)
    P = path.endpoint
    if splitting:
        s2 = splitting_numbers(P @ P, 1.0, path=dbl)
        s1 = splitting_numbers(P, 1.0, path=path)
        sm = splitting_numbers(P, -1.0, path=path)
    else:
        s2 = s1 = sm = SplittingPair(0, 0)
    return BottReport(i_omega(dbl, 1.0), i_omega(path, 1.0), i_omega(path, -1.0), s2, s1, sm)


@dataclass
class DecompositionReport:
    n: int
    i_L0: IndexPair
    i_L1: IndexPair
    i_brake_double: IndexPair

    @property
    def index_ok(self) -> bool:
        return self.i_L0.index + self.i_L1.index == self.i_brake_double.index - self.n

    @property
    def nullity_ok(self) -> bool:
        return self.i_L0.nullity + self.i_L1.nullity == self.i_brake_double.nullity

    @property
    def passed(self) -> bool:
        return self.index_ok and self.nullity_ok

    def to_dict(self) -> dict:
        return {"i_L0": list(self.i_L0), "i_L1": list(self.i_L1),
                "i_brake_double": list(self.i_brake_double), "passed": self.passed}


def decomposition_check(path: SymplecticPath) -> DecompositionReport:
    """``i_L0 + i_L1 = i(gamma^2) - n`` and ``nu_L0 + nu_L1 = nu(gamma^2)`` with the
    brake iterate ``gamma^2``."""
    it = brake_iterate(path, 2)
    return DecompositionReport(path.k, i_lagrangian(path, 0), i_lagrangian(path, 1),
                               i_omega(it, 1.0))


# ----------------------------------------------------------------- structure tests

def _null_basis(A: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    u, s, vh = np.linalg.svd(A)
    scale = max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].T


def minus_identity_structure(P: np.ndarray, tol: float = 1e-8) -> bool:
    """Whether ``P`` is conjugate, by some ``diag(psi^{-1}, psi^T)`` with
    ``det psi > 0``, to ``(-I_2) diamond Q``.

    Equivalent test: there are ``-1``-eigenvectors ``u`` in ``L1`` and ``v`` in
    ``L0`` with ``omega(u, v) != 0``.
    """
    P = np.asarray(P, dtype=float)
    n = len(P) // 2
    A = P + np.eye(2 * n)
    X = _null_basis(A[:, :n], tol)     # p-coordinates of eigenvectors in L1
    Y = _null_basis(A[:, n:], tol)     # q-coordinates of eigenvectors in L0
    if X.shape[1] == 0 or Y.shape[1] == 0:
        return False
    # omega((x, 0), (0, y)) = <J (x,0), (0,y)> = x . y
    return bool(np.abs(X.T @ Y).max() > 1e-6)


def symplectic_fixed_plane(M: np.ndarray, tol: float = 1e-8) -> bool:
    """Whether ``ker(M - I)`` contains a symplectic plane, i.e. ``M`` is
    symplectically conjugate to ``I_2 diamond M'``."""
    M = np.asarray(M, dtype=float)
    K = _null_basis(M - np.eye(len(M)), tol)
    if K.shape[1] < 2:
        return False
    G = K.T @ standard_j(len(M) // 2) @ K
    return bool(np.linalg.matrix_rank(G, tol=1e-6) >= 2)


def brake_square_structure_check(P: np.ndarray) -> dict:
    """For ``P ~ (-I_2) diamond Q`` compare the homotopy data of ``N P^{-1} N P``
    with ``I_2 diamond N Q^{-1} N Q``, with ``Q`` read off after normalising."""
    P = np.asarray(P, dtype=float)
    n = len(P) // 2
    if not minus_identity_structure(P):
        return {"applicable": False}
    Q = _reduced_q(P)
    Nq = standard_n(n - 1)
    target = diamond(np.eye(2), Nq @ symplectic_inverse(Q) @ Nq @ Q)
    M = brake_square_endpoint(P)
    return {"applicable": True, "match": same_homotopy_data(M, target)}


def _reduced_q(P: np.ndarray) -> np.ndarray:
    """``Q`` with ``psi P psi^{-1} = (-I_2) diamond Q`` for a block-diagonal ``psi``."""
    n = len(P) // 2
    A = P + np.eye(2 * n)
    X = _null_basis(A[:, :n])
    Y = _null_basis(A[:, n:])
    G = X.T @ Y
    i, j = np.unravel_index(np.argmax(np.abs(G)), G.shape)
    x, y = X[:, i], Y[:, j]
    y = y / (x @ y)
    # basis of L1: x then the complement orthogonal (under pairing) to y
    Wp = _null_basis(y[None, :])                 # p-vectors with y . p = 0
    Wq = _null_basis(x[None, :])                 # q-vectors with x . q = 0
    Wq = Wq @ np.linalg.inv(Wp.T @ Wq).T         # dual basis: Wp^T Wq = I
    Sp = np.column_stack([x, Wp])                # columns: new p basis
    Sq = np.column_stack([y, Wq])                # dual: Sp^T Sq = I
    if np.linalg.det(Sp) < 0:
        Sp[:, -1] *= -1
        Sq[:, -1] *= -1
    Z = np.zeros((n, n))
    S = np.block([[Sp, Z], [Z, Sq]])             # symplectic since Sp^T Sq = I
    T = np.linalg.solve(S, P @ S)
    idx = np.r_[1:n, n + 1:2 * n]
    return T[np.ix_(idx, idx)]


# ----------------------------------------------------------------- index gap

@dataclass
class GapReport:
    n: int
    i_L0: IndexPair
    i_L1: IndexPair
    i_one: IndexPair
    s_square: int
    structure: bool
    gap: Fraction
    hypotheses: dict

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def passed(self) -> bool:
        """Positive gap whenever the hypotheses hold; vacuous otherwise."""
        return (not self.hypotheses_hold) or self.gap > 0

    def to_dict(self) -> dict:
        return {"n": self.n, "i_L0": list(self.i_L0), "i_L1": list(self.i_L1),
                "i_1": list(self.i_one), "S+_P2(1)": self.s_square,
                "minus_identity_structure": self.structure,
                "gap": str(self.gap), "hypotheses": self.hypotheses,
                "hypotheses_hold": self.hypotheses_hold, "passed": self.passed}


def theorem31_gap(path: SymplecticPath, structure: Optional[bool] = None) -> GapReport:
    """``i_L1 + S^+_{P^2}(1) - nu_L0 - (1 - n)/2`` with every hypothesis evaluated.

    Hypotheses: ``n`` odd and ``>= 3``, ``i_L0 >= 0``, ``i_L1 >= 0``,
    ``i_1(gamma) >= n`` and ``P ~ (-I_2) diamond Q``; the periodic extension is
    built here so that hypothesis holds by construction.
    """
    n = path.k
    P = path.endpoint
    iL0, iL1 = i_lagrangian(path, 0), i_lagrangian(path, 1)
    i1 = i_omega(path, 1.0)
    s2 = splitting_numbers(P @ P, 1.0, path=periodic_square(path)).s_plus
    if structure is None:
        structure = minus_identity_structure(P)
    gap = Fraction(iL1.index + s2 - iL0.nullity) - Fraction(1 - n, 2)
    hyp = {"n_odd_ge_3": n >= 3 and n % 2 == 1, "i_L0_nonneg": iL0.index >= 0,
           "i_L1_nonneg": iL1.index >= 0, "i_ge_n": i1.index >= n,
           "endpoint_structure": bool(structure)}
    return GapReport(n, iL0, iL1, i1, s2, bool(structure), gap, hyp)


# ----------------------------------------------------------------- profiles

@dataclass
class IterationProfile:
    """Index data of the brake iterates ``gamma^k``, ``k = 1..k_max``, and of the
    periodic iterates ``gamma^{2m}`` on ``[0, 2 m tau]``."""

    n: int
    k_max: int
    L0: list            # IndexPair of gamma^k for k = 1..k_max
    L1: list
    periodic: list      # IndexPair (omega = 1) of gamma^{2m}, m = 1..k_max; may be empty
    periodic_minus: list
    s_brake: SplittingPair          # S at 1 of N P^{-1} N P
    s_brake_square: SplittingPair   # S at 1 of (N P^{-1} N P)^2
    convex_generator: Optional[bool] = None
    fixed_plane: Optional[bool] = None      # ker(N P^{-1} N P - I) holds a symplectic plane

    def i_L0(self, k: int) -> int:
        return self.L0[k - 1].index

    def nu_L0(self, k: int) -> int:
        return self.L0[k - 1].nullity

    def i_per(self, m: int) -> int:
        return self.periodic[m - 1].index

    def nu_per(self, m: int) -> int:
        return self.periodic[m - 1].nullity

    @property
    def mean_index(self) -> float:
        return self.L0[-1].index / self.k_max

    def to_dict(self) -> dict:
        return {"n": self.n, "k_max": self.k_max,
                "L0": [list(p) for p in self.L0], "L1": [list(p) for p in self.L1],
                "periodic": [list(p) for p in self.periodic],
                "periodic_minus": [list(p) for p in self.periodic_minus],
                "S_brake": list(self.s_brake), "S_brake_square": list(self.s_brake_square),
                "convex_generator": self.convex_generator, "fixed_plane": self.fixed_plane}


def _generator_convex(path: SymplecticPath) -> Optional[bool]:
    gen = getattr(path, "generator", None)
    if gen is None:
        return None
    for t in np.linspace(0, path.tau, 33):
        B = gen(t)
        if np.linalg.eigvalsh(0.5 * (B + B.T)).min() <= 0:
            return False
    return True


def build_profile(path: SymplecticPath, k_max: int = 16, periodic: bool = True) -> IterationProfile:
    """Profile from one brake-iterate sweep to ``k_max`` (``2 k_max`` when
    ``periodic``)."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    tau = path.tau
    span = 2 * k_max if periodic else k_max
    it = brake_iterate(path, span)
    ks = tau * np.arange(1, k_max + 1)
    L0 = index_at_ends(it, "L0", ks)
    L1 = index_at_ends(it, "L1", ks)
    per, per_m = [], []
    if periodic:
        ms = 2 * tau * np.arange(1, k_max + 1)
        per = index_at_ends(it, 1.0, ms)
        per_m = index_at_ends(it, -1.0, ms)
    M = brake_square_endpoint(path.endpoint)
    two = brake_iterate(path, 2)
    s_b = splitting_numbers(M, 1.0, path=two)
    s_bb = splitting_numbers(M @ M, 1.0, path=brake_iterate(path, 4))
    return IterationProfile(path.k, k_max, L0, L1, per, per_m, s_b, s_bb,
                            convex_generator=_generator_convex(path),
                            fixed_plane=symplectic_fixed_plane(M))


# ----------------------------------------------------------------- index jumps

class HorizonError(HypothesisError):
    """The profiles are too short for the requested R."""


@dataclass
class JumpSearchResult:
    tuples: list
    residuals: list
    status: str
    horizon_R: Optional[int]
    needed_k: Optional[int]
    periodic_checked: bool

    def to_dict(self) -> dict:
        return {"status": self.status, "tuples": [list(t) for t in self.tuples],
                "residuals": self.residuals, "horizon_R": self.horizon_R,
                "needed_k": self.needed_k, "periodic_checked": self.periodic_checked}


def _residuals(p: IterationProfile, R: int, m: int, periodic: bool) -> dict:
    n = p.n
    iL1, nuL0, iL0 = p.L1[0].index, p.nu_L0(1), p.i_L0(1)
    s = p.s_brake.s_plus
    r = {
        "i": abs(p.nu_L0(2 * m - 1) - nuL0) + abs(p.nu_L0(2 * m + 1) - nuL0),
        "ii": p.i_L0(2 * m - 1) + p.nu_L0(2 * m - 1) - (R - (iL1 + n + s - nuL0)),
        "iii": p.i_L0(2 * m + 1) - (R + iL0),
    }
    if periodic:
        i1, nu1 = p.i_per(1), p.nu_per(1)
        r["iv"] = abs(p.nu_per(2 * m - 1) - nu1) + abs(p.nu_per(2 * m + 1) - nu1)
        r["v"] = p.i_per(2 * m - 1) + p.nu_per(2 * m - 1) - (2 * R - (i1 + 2 * s - nu1))
        r["vi"] = p.i_per(2 * m + 1) - (2 * R + i1)
    return r


def index_jump_search(profiles: Sequence[IterationProfile], R_max: int,
                      strict: bool = False) -> JumpSearchResult:
    """All ``(R, m_1..m_q)`` with ``R <= R_max`` meeting the index-jump equalities
    within the computed horizon.

    Every ``m_j`` must satisfy ``2 m_j + 1 <= k_max``. Periodic equalities are
    added when all profiles carry periodic data. A finite search can confirm
    tuples but never refute their existence; ``R`` values whose equalities would
    need iterates beyond the horizon are reported (or raise `HorizonError` when
    ``strict``).
    """
    if R_max < 1:
        raise ValueError("R_max must be positive")
    if not profiles:
        return JumpSearchResult([(R,) for R in range(1, R_max + 1)], [{} for _ in range(R_max)],
                                "confirmed at horizon", None, None, False)
    for p in profiles:
        if not p.mean_index > 0:
            raise HypothesisError("every profile needs a positive mean L0 index")
    periodic = all(p.periodic for p in profiles)
    # R reachable iff R + i_L0(1) <= i_L0 at the largest odd iterate in range
    horizon_R = None
    for p in profiles:
        top = p.k_max if p.k_max % 2 == 1 else p.k_max - 1
        limit = p.i_L0(top) - p.i_L0(1)
        horizon_R = limit if horizon_R is None else min(horizon_R, limit)
    needed_k = None
    if strict and R_max > horizon_R:
        rate = min(p.mean_index for p in profiles)
        needed_k = int(np.ceil((R_max + max(p.i_L0(1) for p in profiles)) / rate)) + 1
        raise HorizonError(f"R_max={R_max} needs iterates up to about k={needed_k}")
    tuples, residuals = [], []
    for R in range(1, min(R_max, horizon_R) + 1):
        choices = []
        for p in profiles:
            ok = []
            for m in range(1, (p.k_max - 1) // 2 + 1):
                res = _residuals(p, R, m, periodic)
                if all(v == 0 for v in res.values()):
                    ok.append((m, res))
            if not ok:
                break
            choices.append(ok)
        else:
            import itertools
            for combo in itertools.product(*choices):
                tuples.append((R, *[m for m, _ in combo]))
                residuals.append([res for _, res in combo])
    if R_max > horizon_R:
        rate = min(p.mean_index for p in profiles)
        needed_k = int(np.ceil((R_max + max(p.i_L0(1) for p in profiles)) / rate)) + 1
    if tuples:
        status = "confirmed at horizon"
    elif R_max > horizon_R:
        status = "horizon insufficient"
    else:
        status = "none below R_max"
    return JumpSearchResult(tuples, residuals, status,
                            horizon_R if R_max > horizon_R else None, needed_k, periodic)


# ----------------------------------------------------------------- monotonicity

def monotonicity_audit(profile: IterationProfile) -> dict:
    """Consecutive-iterate inequalities for the L0 index, and the fixed-plane bound
    on the doubled periodic path, each with its hypothesis status."""
    p = profile
    rows = []
    for m in range(1, p.k_max):
        a, b = p.i_L0(m), p.i_L0(m + 1)
        na, nb = p.nu_L0(m), p.nu_L0(m + 1)
        rows.append({"m": m, "step": b - a, "step_ok": b - a >= 1,
                     "chain_ok": (b + nb - 1 >= b) and (b > a + na - 1)})
    # stated for half-period paths of brake orbits: convex generator, and the
    # orbit direction makes the endpoint L0-degenerate
    convex = bool(p.convex_generator) and p.nu_L0(1) >= 1
    out = {"hypothesis": {"convex_generator": p.convex_generator,
                          "endpoint_L0_degenerate": p.nu_L0(1) >= 1, "holds": convex},
           "steps": rows, "all_hold": all(r["step_ok"] and r["chain_ok"] for r in rows)}
    out["passed"] = out["all_hold"] or not convex
    if p.periodic and len(p.periodic) >= 2:
        value = p.i_per(2) + 2 * p.s_brake_square.s_plus - p.nu_per(2)
        applicable = bool(p.fixed_plane) and p.i_per(1) >= p.n
        out["fixed_plane_bound"] = {"value": value, "bound": p.n + 2,
                                    "hypothesis": {"fixed_plane": p.fixed_plane,
                                                   "i_ge_n": p.i_per(1) >= p.n},
                                    "applicable": applicable, "holds": value >= p.n + 2}
        if applicable and value < p.n + 2:
            out["passed"] = False
    return out
