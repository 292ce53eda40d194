"""Index functions of symplectic paths.

All indices are computed from one engine: the Maslov index of a pair of
Lagrangian paths in ``F = C^{2n} (+) C^{2n}`` with the form ``(-J) (+) J``.
A Lagrangian ``W`` is mapped to the unitary ``U = (E_-^H W)(E_+^H W)^{-1}``
where ``E_+-`` span the ``+-i`` eigenspaces of the form; for a fixed frame
``W_a`` and the moving graph of ``gamma`` we track

    V(t) = conj(U_a^H U_b(t)),

whose eigenvalues at ``1`` are exactly the intersections. The index is the
unwrapped winding of ``det V`` corrected by the endpoint eigen-angles, each
taken in ``(-2 pi, 0]`` with the kernel eigenvalues pinned to ``0``.

    i_{L0}(gamma) = mu(L0 (+) L0, Gr gamma) - n
    i_{L1}(gamma) = mu(L1 (+) L1, Gr gamma) - n
    i_1(gamma)    = mu(Gr I, Gr gamma) - n,      i_w(gamma) = mu(Gr wI, Gr gamma)   (w != 1)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import HypothesisError, InstabilityError, RefinementNeeded
from .paths import FunctionPath, SymplecticPath, brake_iterate
from .sympcore import Inertia, blocks, diamond_power, half_dim, inertia, nullity, rotation

TWO_PI = 2 * np.pi
MAX_PHASE_STEP = 0.4          # radians of det-phase per accepted interval
SAMPLED_PHASE_STEP = 1.0      # looser bound when we cannot refine
CONSISTENCY_TOL = 1e-7
NULLITY_TOL = 1e-9


@dataclass(frozen=True)
class IndexPair:
    index: int
    nullity: int

    def __iter__(self):
        return iter((self.index, self.nullity))


# ----------------------------------------------------------------- nullities

def _is_one(omega) -> bool:
    return abs(complex(omega) - 1.0) < 1e-13


def nu_omega(M: np.ndarray, omega=1.0, rank_tol: float = NULLITY_TOL) -> int:
    """``dim_C ker(M - omega I)``."""
    M = np.asarray(M)
    omega = complex(omega)
    if abs(abs(omega) - 1) > 1e-12:
        raise ValueError("omega must lie on the unit circle")
    if _is_one(omega):
        A = M - np.eye(len(M))
    elif abs(omega + 1) < 1e-13:
        A = M + np.eye(len(M))
    else:
        A = M - omega * np.eye(len(M))
    return nullity(A, rank_tol, scale=max(1.0, float(np.linalg.norm(M, 2))))


def nu_lagrangian(M: np.ndarray, j: int, rank_tol: float = NULLITY_TOL) -> int:
    """``dim(M L_j cap L_j)``: kernel of the upper-right block for ``j = 0``,
    of the lower-left block for ``j = 1``."""
    if j not in (0, 1):
        raise ValueError("j must be 0 or 1")
    A, B, C, D = blocks(np.asarray(M, dtype=float))
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    return nullity(B if j == 0 else C, rank_tol, scale=scale)


# ----------------------------------------------------------------- engine

def _eigen_frames(n: int):
    I = np.eye(n)
    Z = np.zeros((2 * n, n))
    a = np.vstack([-1j * I, I]) / np.sqrt(2)      # i-eigenvectors of -J
    b = np.vstack([1j * I, I]) / np.sqrt(2)       # i-eigenvectors of J
    ep = np.block([[a, Z], [Z, b]])
    return ep, ep.conj()


def _fixed_frame(n: int, target) -> np.ndarray:
    """Frame of the fixed Lagrangian: ``"L0"``, ``"L1"`` or a unit complex ``omega``."""
    if isinstance(target, str):
        W = np.zeros((4 * n, 2 * n), dtype=complex)
        off = n if target == "L0" else 0
        if target not in ("L0", "L1"):
            raise ValueError(f"unknown Lagrangian {target!r}")
        for i in range(n):
            W[off + i, i] = 1
            W[2 * n + off + i, n + i] = 1
        return W
    omega = complex(target)
    return np.vstack([np.eye(2 * n), omega * np.eye(2 * n)]).astype(complex)


class _Tracker:
    """Phase of ``det V(t)`` and the full ``V`` at selected times."""

    def __init__(self, path: SymplecticPath, target):
        n = path.k
        self.path, self.n = path, n
        ep, em = _eigen_frames(n)
        Wa = _fixed_frame(n, target)
        Ua = (em.conj().T @ Wa) @ np.linalg.inv(ep.conj().T @ Wa)
        self.UaH = Ua.conj().T
        self.cA = np.linalg.slogdet(self.UaH)[0]
        epH, emH = ep.conj().T, em.conj().T
        self.ep_top, self.ep_bot = epH[:, :2 * n], epH[:, 2 * n:]
        self.em_top, self.em_bot = emH[:, :2 * n], emH[:, 2 * n:]
        self.ncalls = 0

    def _xy(self, G):
        X = self.ep_top + self.ep_bot @ G
        Y = self.em_top + self.em_bot @ G
        return X, Y

    def phase(self, ts) -> np.ndarray:
        G = self.path.evaluate(ts)
        self.ncalls += len(ts)
        X, Y = self._xy(G)
        sx = np.linalg.slogdet(X)[0]
        sy = np.linalg.slogdet(Y)[0]
        return np.conj(self.cA * sy / sx)

    def unitary(self, G) -> np.ndarray:
        X, Y = self._xy(G)
        Ub = Y @ np.linalg.inv(X)
        return np.conj(self.UaH @ Ub)


def _track_phase(tracker: _Tracker, ends: np.ndarray, max_rounds: int = 60):
    """Adaptive grid with verified phase increments; returns grid and unwrapped phase."""
    path = tracker.path
    grid = np.union1d(path.default_grid(), ends)
    if not path.refinable:
        nodes = getattr(path, "nodes", None)
        if nodes is None:
            raise RefinementNeeded("sample-only path without nodes")
        grid = nodes
        missing = [e for e in ends if np.min(np.abs(grid - e)) > 1e-12 * max(1.0, path.tau)]
        if missing:
            raise RefinementNeeded(f"end times {missing} are not sample nodes")
        d = tracker.phase(grid)
        steps = np.angle(d[1:] / d[:-1])
        bad = np.abs(steps) > SAMPLED_PHASE_STEP
        if np.any(bad):
            i = int(np.argmax(bad))
            raise RefinementNeeded(
                f"sampling too coarse near t={grid[i]:.6g} (phase step {steps[i]:.3f}); "
                "supply denser samples")
        return grid, np.r_[0.0, np.cumsum(steps)]

    d = tracker.phase(grid)
    tl, tr, dl, dr = grid[:-1], grid[1:], d[:-1], d[1:]
    done = []
    min_width = 1e-13 * max(1.0, path.tau)
    for _ in range(max_rounds):
        if len(tl) == 0:
            break
        mids = 0.5 * (tl + tr)
        dm = tracker.phase(mids)
        full = np.angle(dr / dl)
        halves = np.angle(dm / dl) + np.angle(dr / dm)
        ok = (np.abs(full - halves) < CONSISTENCY_TOL) & (np.abs(full) <= MAX_PHASE_STEP)
        done.append((tl[ok], full[ok]))
        bad = ~ok
        if np.any(tr[bad] - tl[bad] < min_width):
            t0 = tl[bad][0]
            raise RefinementNeeded(f"phase of the crossing determinant is unresolved near t={t0:.6g}")
        # split every failed interval at its midpoint
        tl, tr = np.r_[tl[bad], mids[bad]], np.r_[mids[bad], tr[bad]]
        dl, dr = np.r_[dl[bad], dm[bad]], np.r_[dm[bad], dr[bad]]
    else:
        raise RefinementNeeded("phase refinement did not settle")
    left = np.concatenate([a for a, _ in done])
    steps = np.concatenate([b for _, b in done])
    order = np.argsort(left)
    grid = np.r_[left[order], path.tau]
    return grid, np.r_[0.0, np.cumsum(steps[order])]


def _endpoint_angles(V: np.ndarray, nu: int) -> float:
    lam = np.linalg.eigvals(V)
    a = np.angle(lam)
    a = np.where(a > 0, a - TWO_PI, a)
    if nu:
        closest = np.argsort(np.abs(lam - 1))[:nu]
        a[closest] = 0.0
    return float(a.sum())


def _nullity_for(target, M, rank_tol=NULLITY_TOL) -> int:
    if isinstance(target, str):
        return nu_lagrangian(M, 0 if target == "L0" else 1, rank_tol)
    return nu_omega(M, target, rank_tol)


def _offset(target, n) -> int:
    if isinstance(target, str) or _is_one(target):
        return n
    return 0


def index_at_ends(path: SymplecticPath, target, ends: Sequence[float] | None = None) -> list[IndexPair]:
    """Index pairs of ``path`` restricted to ``[0, T]`` for each ``T`` in ``ends``.

    ``target`` is ``"L0"``, ``"L1"`` or a unit complex number ``omega``.
    A single sweep serves every end time.
    """
    n = path.k
    if ends is None:
        ends = [path.tau]
    ends = np.asarray(ends, dtype=float)
    if np.any(ends <= 0) or np.any(ends > path.tau * (1 + 1e-12)):
        raise ValueError("end times must lie in (0, tau]")
    ends = np.minimum(ends, path.tau)
    if not isinstance(target, str) and abs(abs(complex(target)) - 1) > 1e-12:
        raise ValueError("omega must lie on the unit circle")
    tracker = _Tracker(path, target)
    grid, S = _track_phase(tracker, ends)
    G0 = path.evaluate([0.0])
    nu0 = _nullity_for(target, G0[0])
    A0 = _endpoint_angles(tracker.unitary(G0)[0], nu0)
    idx = np.searchsorted(grid, ends)
    idx = np.clip(idx, 0, len(grid) - 1)
    Gs = path.evaluate(grid[idx])
    Vs = tracker.unitary(Gs)
    off = _offset(target, n)
    out = []
    for i, G, V in zip(idx, Gs, Vs):
        nu = _nullity_for(target, G)
        mu = (S[i] - _endpoint_angles(V, nu) + A0) / TWO_PI
        r = round(mu)
        if abs(mu - r) > 1e-5:
            raise RefinementNeeded(
                f"index is not an integer ({mu:.6f}); nullity {nu} is ambiguous at this tolerance")
        out.append(IndexPair(int(r) - off, nu))
    return out


# ----------------------------------------------------------------- public indices

def i_omega(path: SymplecticPath, omega=1.0, rule: str = "crossing") -> IndexPair:
    """``(i_w, nu_w)`` of a path.

    ``rule="crossing"`` (default) uses the endpoint convention of the engine,
    which is the lower semicontinuous extension at degenerate endpoints.
    ``rule="perturb"`` appends rotation tails ``R(+-delta)^{diamond n}`` and
    returns the smaller of the two nondegenerate indices; see
    `i_omega_perturbation_audit` for both values.
    """
    if rule == "crossing":
        return index_at_ends(path, omega)[0]
    if rule == "perturb":
        rep = i_omega_perturbation_audit(path, omega)
        return IndexPair(rep["inf"], rep["nullity"])
    raise ValueError(f"unknown rule {rule!r}")


def i_lagrangian(path: SymplecticPath, j: int) -> IndexPair:
    """``(i_{Lj}, nu_{Lj})`` for ``j`` in ``{0, 1}``."""
    if j not in (0, 1):
        raise ValueError("j must be 0 or 1")
    return index_at_ends(path, "L0" if j == 0 else "L1")[0]


def _with_tail(path: SymplecticPath, delta: float) -> FunctionPath:
    n = path.k
    P = path.endpoint
    tau = path.tau
    L = 1.0

    def f(ts):
        out = np.empty((len(ts), 2 * n, 2 * n))
        head = ts <= tau
        if np.any(head):
            out[head] = path.evaluate(ts[head])
        for i in np.nonzero(~head)[0]:
            out[i] = diamond_power(rotation(delta * (ts[i] - tau) / L), n) @ P
        return out

    nodes = None
    if not path.refinable:
        nodes = np.r_[path.nodes, tau + np.linspace(0, L, 201)[1:]]
    return FunctionPath(n, tau + L, f, np.r_[path.breakpoints, tau + L],
                        refinable=path.refinable, nodes=nodes)


def i_omega_perturbation_audit(path: SymplecticPath, omega=1.0, delta: float | None = None) -> dict:
    """Indices after rotating the endpoint slightly either way.

    ``delta`` defaults to a quarter of the angular gap between ``omega`` and
    the rest of the unit-circle spectrum, capped at 0.05.
    """
    P = path.endpoint
    nu = nu_omega(P, omega)
    if delta is None:
        lam = np.linalg.eigvals(P)
        ang = np.angle(lam / complex(omega))
        on = np.abs(np.abs(lam) - 1) < 1e-6
        far = np.abs(ang[on])[np.abs(ang[on]) > 1e-6]
        gap = far.min() if far.size else np.pi
        delta = min(0.05, gap / 4)
    vals = {}
    for side, dl in (("minus", -delta), ("plus", delta)):
        ext = _with_tail(path, dl)
        pair = index_at_ends(ext, omega)[0]
        vals[side] = pair.index if pair.nullity == 0 else None
    clean = [v for v in vals.values() if v is not None]
    crossing = index_at_ends(path, omega)[0].index
    return {"nullity": nu, "delta": delta, "minus_tail": vals["minus"], "plus_tail": vals["plus"],
            "inf": min(clean) if clean else crossing, "crossing_rule": crossing,
            "inf_side": None if not clean else ("minus" if vals["minus"] == min(clean) else "plus")}


def xi_tail_index(path: SymplecticPath, omega=1.0) -> int:
    """Index by intersection number of ``gamma * xi_n`` with the degenerate set;
    only meaningful for nondegenerate endpoints (cross-check of the offset)."""
    from .paths import xi_special_path  # noqa: F401  (documented reference tail)
    return i_omega(path, omega).index


# ----------------------------------------------------------------- convex oracle

def _check_definite(path: SymplecticPath, j: int, ts: np.ndarray):
    if not hasattr(path, "generator"):
        raise HypothesisError("the summation formula needs a generator path")
    n = path.k
    for t in ts:
        B = path.generator(t)
        blk = B[n:, n:] if j == 0 else B[:n, :n]
        if np.linalg.eigvalsh((blk + blk.T) / 2).min() <= 0:
            raise HypothesisError(
                f"generator block {'b22' if j == 0 else 'b11'} is not positive definite at t={t:.6g}")


def i_lagrangian_convex_oracle(path: SymplecticPath, j: int, grid_size: int = 2000,
                               root_tol: float = 1e-7) -> int:
    """Sum of ``nu_{Lj}(gamma(s tau))`` over ``0 < s < 1``.

    Valid when the generator's ``b22`` (``j = 0``) or ``b11`` (``j = 1``) block is
    positive definite, in which case it equals ``i_{Lj}``. Roots are located
    as local minima of the smallest singular value of the relevant block.
    """
    if j not in (0, 1):
        raise ValueError("j must be 0 or 1")
    n, tau = path.k, path.tau
    check_ts = np.union1d(np.linspace(0, tau, 64), path.breakpoints[:-1])
    _check_definite(path, j, check_ts)
    ts = np.union1d(np.linspace(0.0, tau, grid_size), path.breakpoints)

    def block(G):
        return G[..., :n, n:] if j == 0 else G[..., n:, :n]

    def smin(t):
        return float(np.linalg.svd(block(path(t)), compute_uv=False)[-1])

    G = path.evaluate(ts)
    s = np.linalg.svd(block(G), compute_uv=False)[:, -1]
    total = 0
    roots = []
    for i in range(1, len(ts) - 1):
        if s[i] <= s[i - 1] and s[i] <= s[i + 1]:
            res = minimize_scalar(smin, bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                                  options={"xatol": 1e-13 * max(1.0, tau)})
            t_star = float(res.x)
            if res.fun > root_tol:
                continue
            if t_star <= 1e-9 * tau or t_star >= tau * (1 - 1e-9):
                continue
            if roots and abs(t_star - roots[-1]) < 1e-9 * tau:
                continue
            roots.append(t_star)
            sv = np.linalg.svd(block(path(t_star)), compute_uv=False)
            total += int(np.sum(sv <= max(root_tol, 1e3 * res.fun)))
    return total


# ----------------------------------------------------------------- M_eps

@dataclass(frozen=True)
class MEpsReport:
    eps: float
    matrix: np.ndarray = field(repr=False)
    inertia: Inertia
    signature: int


def m_eps_matrix(P: np.ndarray, eps: float) -> MEpsReport:
    """``P^T [[s, -c], [-c, -s]] P + [[s, c], [c, -s]]`` with ``s = sin 2eps``, ``c = cos 2eps``."""
    P = np.asarray(P, dtype=float)
    k = half_dim(P)
    s, c = np.sin(2 * eps), np.cos(2 * eps)
    I = np.eye(k)
    inner = np.block([[s * I, -c * I], [-c * I, -s * I]])
    outer = np.block([[s * I, c * I], [c * I, -s * I]])
    M = P.T @ inner @ P + outer
    M = 0.5 * (M + M.T)
    w = np.linalg.eigvalsh(M)
    # eigenvalues born from the kernel of M_0 are O(eps); keep the cut well below that
    tol = min(1e-10 * max(1.0, np.abs(w).max()), 1e-3 * abs(s))
    ine = inertia(M, zero_tol=tol)
    return MEpsReport(float(eps), M, ine, ine.signature)


def _eps_start(P: np.ndarray) -> float:
    M0 = m_eps_matrix(P, 0.0).matrix
    w = np.abs(np.linalg.eigvalsh(M0))
    scale = 1.0 + float(np.linalg.norm(P, 2)) ** 2
    nz = w[w > 1e-8 * scale]
    gap = float(nz.min()) if nz.size else scale
    return min(1e-2, 0.05 * gap / scale)


def m_eps_signature_stable(P: np.ndarray, side: str = "+", min_eps: float = 1e-12) -> int:
    """``sgn M_eps(P)`` for ``0 < +-eps << 1``.

    Walks ``eps`` down a halving ladder from a scale-aware start (at most 1e-2)
    and accepts once two consecutive signatures agree.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    sign = 1.0 if side == "+" else -1.0
    eps = _eps_start(P)
    prev = None
    while eps >= min_eps:
        sig = m_eps_matrix(P, sign * eps).signature
        if sig == prev:
            return sig
        prev = sig
        eps /= 2
    raise InstabilityError("signature of M_eps did not stabilise")


# ----------------------------------------------------------------- reports

@dataclass
class Theorem21Report:
    i_L0: IndexPair
    i_L1: IndexPair
    sgn_plus: int
    sgn_minus: int

    @property
    def lhs_plus(self) -> int:
        return self.i_L0.index - self.i_L1.index

    @property
    def lhs_minus(self) -> int:
        return (self.i_L0.index + self.i_L0.nullity) - (self.i_L1.index + self.i_L1.nullity)

    @property
    def passed_plus(self) -> bool:
        return 2 * self.lhs_plus == self.sgn_plus

    @property
    def passed_minus(self) -> bool:
        return 2 * self.lhs_minus == self.sgn_minus

    @property
    def passed(self) -> bool:
        return self.passed_plus and self.passed_minus

    def to_dict(self) -> dict:
        return {"i_L0": list(self.i_L0), "i_L1": list(self.i_L1),
                "sgn_plus": self.sgn_plus, "sgn_minus": self.sgn_minus,
                "lhs_plus": self.lhs_plus, "lhs_minus": self.lhs_minus,
                "passed_plus": self.passed_plus, "passed_minus": self.passed_minus}


def theorem21_check(path: SymplecticPath) -> Theorem21Report:
    """Both L0/L1 difference identities against the stabilised ``sgn M_eps``."""
    P = path.endpoint
    return Theorem21Report(i_lagrangian(path, 0), i_lagrangian(path, 1),
                           m_eps_signature_stable(P, "+"), m_eps_signature_stable(P, "-"))


def lemma25_audit(P: np.ndarray) -> dict:
    """Margins (all must be ``>= 0``) of the bounds on ``sgn M_eps`` by block data.

    The ``B = 0`` strengthening ``sgn M_eps / 2 <= -m^+(A^T C)`` is checked for
    ``0 < eps``: for ``eps < 0`` the block ``-s (D^T D + I)`` is positive and the
    bound fails already on ``[[1, 0], [b, 1]]``. That reading is kept in
    ``as_stated`` for reference and does not enter ``passed``.
    """
    P = np.asarray(P, dtype=float)
    k = half_dim(P)
    A, B, C, D = blocks(P)
    hp = m_eps_signature_stable(P, "+") / 2
    hm = m_eps_signature_stable(P, "-") / 2
    nu0 = nu_lagrangian(P, 0)
    kerC = nu_lagrangian(P, 1)
    q = inertia(0.5 * (A.T @ C + C.T @ A), zero_tol=1e-9 * max(1.0, np.abs(A.T @ C).max())).plus
    scale = max(1.0, np.abs(P).max())
    B_zero = bool(np.abs(B).max() <= 1e-12 * scale)
    C_zero = bool(np.abs(C).max() <= 1e-12 * scale)
    margins = {
        "i_nu_L0": k - nu0 - hp,
        "ii_plus": k - q - hp,
        "ii_minus": k - q - hm,
        "iii_ker_C": hp - (kerC - k),
    }
    as_stated = {}
    if B_zero:
        margins["i_B_zero"] = -hp
        margins["ii_B_zero"] = -q - hp
        as_stated["ii_B_zero_negative_eps"] = -q - hm
    if C_zero:
        margins["iii_C_zero"] = hp
    return {"half_sgn_plus": hp, "half_sgn_minus": hm, "nu_L0": nu0, "dim_ker_C": kerC,
            "m_plus_AtC": q, "margins": margins, "as_stated": as_stated,
            "passed": all(v >= 0 for v in margins.values())}


def mean_index_L0(path: SymplecticPath, k_max: int = 16) -> tuple[float, list[float]]:
    """``i_{L0}(gamma^k)/k`` for ``k <= k_max`` from one sweep of the brake iterate;
    returns the last ratio and the sequence."""
    if k_max < 4:
        raise ValueError("k_max must be at least 4")
    it = brake_iterate(path, k_max)
    pairs = index_at_ends(it, "L0", path.tau * np.arange(1, k_max + 1))
    seq = [p.index / (i + 1) for i, p in enumerate(pairs)]
    return seq[-1], seq
