"""Symplectic paths gamma: [0, tau] -> Sp(2k) with gamma(0) = I.

Every path exposes a vectorised ``evaluate(ts)`` returning an ``(m, 2k, 2k)``
stack, plus a list of ``breakpoints`` where the path may fail to be smooth.
Paths built from a generator ``B(t)`` solve ``gamma' = J B gamma``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import DimensionError, RefinementNeeded
from .sympcore import (half_dim, is_symplectic, matrix_from_json, matrix_to_json,
                       standard_j, diamond, symplectic_inverse, standard_n)

SAMPLE_TOL = 1e-8


class SymplecticPath:
    """Base class. Subclasses implement ``_evaluate``."""

    kind = "function"
    refinable = True

    def __init__(self, k: int, tau: float, breakpoints: Sequence[float] = ()):
        if k < 1:
            raise DimensionError("k must be positive")
        if not tau > 0:
            raise ValueError("path duration must be positive")
        self.k = int(k)
        self.tau = float(tau)
        bp = sorted({0.0, self.tau, *[float(b) for b in breakpoints if 0 <= b <= tau]})
        self.breakpoints = np.asarray(bp)

    def evaluate(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if ts.size and (ts.min() < -1e-12 * self.tau or ts.max() > self.tau * (1 + 1e-12)):
            raise ValueError("time outside the path domain")
        return self._evaluate(np.clip(ts, 0.0, self.tau))

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate([t])[0]

    @property
    def endpoint(self) -> np.ndarray:
        return self(self.tau)

    def _evaluate(self, ts: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def default_grid(self, per_unit: int = 24, minimum: int = 33) -> np.ndarray:
        """Starting grid for refinement: breakpoints plus a uniform mesh."""
        m = max(minimum, int(per_unit * self.tau) + 1)
        return np.union1d(np.linspace(0.0, self.tau, m), self.breakpoints)

    def restrict(self, t_end: float) -> "SymplecticPath":
        """The path on ``[0, t_end]``."""
        if not 0 < t_end <= self.tau * (1 + 1e-12):
            raise ValueError("restriction end must lie in (0, tau]")
        return FunctionPath(self.k, min(t_end, self.tau), self._evaluate,
                            breakpoints=self.breakpoints[self.breakpoints <= t_end],
                            refinable=self.refinable, nodes=getattr(self, "nodes", None))

    def to_json(self, n_nodes: int = 65) -> dict:
        ts = np.linspace(0.0, self.tau, n_nodes)
        mats = self.evaluate(ts)
        return {"k": self.k, "tau": self.tau, "kind": "samples",
                "nodes": [{"t": float(t), "matrix": matrix_to_json(M)} for t, M in zip(ts, mats)]}


class FunctionPath(SymplecticPath):
    """Path given by a vectorised callable ``f(ts) -> (m, 2k, 2k)``."""

    def __init__(self, k, tau, func: Callable[[np.ndarray], np.ndarray], breakpoints=(),
                 refinable: bool = True, nodes=None):
        super().__init__(k, tau, breakpoints)
        self._func = func
        self.refinable = refinable
        if nodes is not None:
            self.nodes = nodes[nodes <= self.tau * (1 + 1e-12)]

    def _evaluate(self, ts):
        return self._func(ts)


class PiecewiseConstantPath(SymplecticPath):
    """Fundamental solution of ``gamma' = J B_i gamma`` with ``B_i`` constant on
    ``[t_i, t_{i+1})``; evaluated exactly with matrix exponentials."""

    kind = "generator"

    def __init__(self, times: Sequence[float], generators: Sequence[np.ndarray], tau: float):
        generators = [np.asarray(B, dtype=float) for B in generators]
        if not generators:
            raise ValueError("need at least one generator segment")
        k = half_dim(generators[0])
        times = np.asarray(times, dtype=float)
        if len(times) != len(generators) or times[0] != 0.0 or np.any(np.diff(times) <= 0) \
                or times[-1] >= tau:
            raise ValueError("segment start times must increase from 0 and stay below tau")
        for B in generators:
            if B.shape != (2 * k, 2 * k):
                raise DimensionError("generator blocks must share one shape")
            if np.abs(B - B.T).max() > 1e-12 * max(1.0, np.abs(B).max()):
                from .errors import SymmetryError
                raise SymmetryError("generators must be symmetric")
        super().__init__(k, tau, breakpoints=list(times))
        self.times = times
        self.generators = [(B + B.T) / 2 for B in generators]
        Jk = standard_j(k)
        self._H = [Jk @ B for B in self.generators]
        ends = np.r_[times[1:], tau]
        starts = [np.eye(2 * k)]
        for H, t0, t1 in zip(self._H, times, ends):
            starts.append(expm(H * (t1 - t0)) @ starts[-1])
        self._starts = starts

    def generator(self, t: float) -> np.ndarray:
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        return self.generators[max(i, 0)]

    def _evaluate(self, ts):
        seg = np.clip(np.searchsorted(self.times, ts, side="right") - 1, 0, len(self.times) - 1)
        out = np.empty((len(ts), 2 * self.k, 2 * self.k))
        for i in np.unique(seg):
            mask = seg == i
            dt = ts[mask] - self.times[i]
            out[mask] = expm(dt[:, None, None] * self._H[i]) @ self._starts[i]
        return out

    def to_json(self, n_nodes: int | None = None) -> dict:
        return {"k": self.k, "tau": self.tau, "kind": "generator",
                "nodes": [{"t": float(t), "matrix": matrix_to_json(B)}
                          for t, B in zip(self.times, self.generators)]}


class GeneratorPath(SymplecticPath):
    """Fundamental solution for a smooth generator field ``B(t)``; integrated once
    with DOP853 and a dense interpolant."""

    kind = "generator"

    def __init__(self, k: int, tau: float, B: Callable[[float], np.ndarray],
                 rtol: float = 1e-12, atol: float = 1e-13, breakpoints=()):
        super().__init__(k, tau, breakpoints)
        self.B = B
        Jk = standard_j(k)
        d = 2 * k

        def rhs(t, y):
            return (Jk @ B(t) @ y.reshape(d, d)).ravel()

        sol = solve_ivp(rhs, (0.0, tau), np.eye(d).ravel(), method="DOP853",
                        rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            from .errors import IntegrationError
            raise IntegrationError(sol.message)
        self._sol = sol

    def generator(self, t: float) -> np.ndarray:
        return np.asarray(self.B(t), dtype=float)

    def _evaluate(self, ts):
        d = 2 * self.k
        return self._sol.sol(ts).T.reshape(len(ts), d, d)


class SampledPath(SymplecticPath):
    """Dense samples only; index computations cannot refine between nodes."""

    kind = "samples"
    refinable = False

    def __init__(self, ts: Sequence[float], mats: Sequence[np.ndarray], tol: float = SAMPLE_TOL):
        ts = np.asarray(ts, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3 or len(ts) != len(mats) or len(ts) < 2:
            raise DimensionError("need at least two samples of square matrices")
        if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
            raise ValueError("sample times must increase from 0")
        k = half_dim(mats[0])
        if np.abs(mats[0] - np.eye(2 * k)).max() > tol:
            raise ValueError("sampled path must start at the identity")
        for M in mats:
            ok, d = is_symplectic(M, tol)
            if not ok:
                raise ValueError(f"sample is not symplectic (defect {d:.2e})")
        super().__init__(k, ts[-1])
        self.nodes = ts
        self._mats = mats

    def _evaluate(self, ts):
        idx = np.searchsorted(self.nodes, ts)
        idx = np.clip(idx, 0, len(self.nodes) - 1)
        # snap to the nearest node; anything off-grid is not available
        left = np.clip(idx - 1, 0, len(self.nodes) - 1)
        pick = np.where(np.abs(self.nodes[left] - ts) < np.abs(self.nodes[idx] - ts), left, idx)
        if np.any(np.abs(self.nodes[pick] - ts) > 1e-12 * max(1.0, self.tau)):
            raise RefinementNeeded("sampled path evaluated between nodes")
        return self._mats[pick]

    def default_grid(self, per_unit=0, minimum=0):
        return self.nodes.copy()


# ---------------------------------------------------------------- constructors

def constant_generator_path(B: np.ndarray, tau: float) -> PiecewiseConstantPath:
    return PiecewiseConstantPath([0.0], [B], tau)


def rotation_path(tau: float, rate: float = 1.0, k: int = 1) -> PiecewiseConstantPath:
    """``R(rate t)^{diamond k}``: generated by ``B = rate I``."""
    return constant_generator_path(rate * np.eye(2 * k), tau)


def identity_path(k: int, tau: float = 1.0) -> PiecewiseConstantPath:
    return constant_generator_path(np.zeros((2 * k, 2 * k)), tau)


def xi_special_path(n: int, tau: float) -> FunctionPath:
    """Reference tail ``diag(2 - t/tau, 1/(2 - t/tau))^{diamond n}``.

    Note it starts at ``diag(2, 1/2)`` and ends at the identity; it is not a
    member of the based path space.
    """
    if n < 1 or not tau > 0:
        raise ValueError("need n >= 1 and tau > 0")

    def f(ts):
        a = 2.0 - ts / tau
        d = np.concatenate([np.repeat(a[:, None], n, 1), np.repeat(1 / a[:, None], n, 1)], 1)
        out = np.zeros((len(ts), 2 * n, 2 * n))
        out[:, np.arange(2 * n), np.arange(2 * n)] = d
        return out

    p = FunctionPath(n, tau, f)
    return p


def function_path(k: int, tau: float, func: Callable[[float], np.ndarray], breakpoints=()) -> FunctionPath:
    """Wrap a scalar callable ``t -> matrix``."""
    def f(ts):
        return np.stack([np.asarray(func(t), dtype=float) for t in ts])
    return FunctionPath(k, tau, f, breakpoints)


def diamond_paths(*paths: SymplecticPath) -> FunctionPath:
    """Pointwise diamond product of paths sharing one duration."""
    tau = paths[0].tau
    if any(abs(p.tau - tau) > 1e-12 * tau for p in paths):
        raise ValueError("diamond of paths needs equal durations")
    k = sum(p.k for p in paths)
    bps = np.unique(np.concatenate([p.breakpoints for p in paths]))

    def f(ts):
        stacks = [p.evaluate(ts) for p in paths]
        return np.stack([diamond(*ms) for ms in zip(*stacks)])

    return FunctionPath(k, tau, f, bps, refinable=all(p.refinable for p in paths))


def random_generator_path(k: int, rng: np.random.Generator, segments: int = 3,
                          tau: float = 1.0, scale: float = 3.0) -> PiecewiseConstantPath:
    """Piecewise-constant random symmetric generator; the test workhorse."""
    cuts = np.sort(rng.uniform(0, tau, segments - 1))
    times = np.r_[0.0, cuts]
    gens = []
    for _ in range(segments):
        S = rng.normal(scale=scale, size=(2 * k, 2 * k))
        gens.append((S + S.T) / 2)
    return PiecewiseConstantPath(times, gens, tau)


def path_from_json(doc: dict) -> SymplecticPath:
    """Inverse of ``to_json``.

    ``kind == "generator"``: node ``i`` holds ``B`` on ``[t_i, t_{i+1})``.
    ``kind == "samples"``: nodes are matrix samples starting at the identity.
    """
    try:
        k, tau, kind, nodes = int(doc["k"]), float(doc["tau"]), doc["kind"], doc["nodes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed path document: {exc}") from None
    if not nodes:
        raise ValueError("path document has no nodes")
    ts = [float(nd["t"]) for nd in nodes]
    mats = [matrix_from_json(nd["matrix"]) for nd in nodes]
    if any(M.shape != (2 * k, 2 * k) for M in mats):
        raise DimensionError("node matrices do not match k")
    if kind == "generator":
        return PiecewiseConstantPath(ts, mats, tau)
    if kind == "samples":
        if abs(ts[-1] - tau) > 1e-12 * max(1.0, tau):
            raise ValueError("last sample must sit at tau")
        return SampledPath(ts, mats)
    raise ValueError(f"unknown path kind {kind!r}")


# ---------------------------------------------------------------- iterations

def brake_iterate(path: SymplecticPath, k: int, joint_tol: float = 1e-9) -> SymplecticPath:
    """k-fold iteration in the brake boundary sense, on ``[0, k tau]``.

    On ``[2j tau, (2j+1) tau]`` it is ``gamma(t - 2j tau) Q^j`` and on
    ``[(2j+1) tau, (2j+2) tau]`` it is ``N gamma(2j tau + 2 tau - t) N Q^{j+1}``,
    where ``Q = N gamma(tau)^{-1} N gamma(tau)``.
    """
    if k < 1:
        raise ValueError("iteration count must be positive")
    tau, n = path.tau, path.k
    N = standard_n(n)
    P = path.endpoint
    Q = N @ symplectic_inverse(P) @ N @ P
    jmax = (k + 1) // 2 + 1
    Qpow = [np.eye(2 * n)]
    for _ in range(jmax):
        Qpow.append(Qpow[-1] @ Q)
    Qpow = np.asarray(Qpow)

    def f(ts):
        j = np.floor(ts / (2 * tau) + 1e-15).astype(int)
        r = ts - 2 * j * tau
        # time 2 j tau exactly at the end of the domain belongs to the previous leg
        fwd = r <= tau
        local = np.where(fwd, r, 2 * tau - r)
        local = np.clip(local, 0.0, tau)
        G = path.evaluate(local)
        out = np.empty_like(G)
        out[fwd] = G[fwd] @ Qpow[j[fwd]]
        bwd = ~fwd
        out[bwd] = N @ G[bwd] @ N @ Qpow[j[bwd] + 1]
        return out

    nodes = None
    if not path.refinable:
        base = path.nodes
        legs = [base + i * tau if i % 2 == 0 else (i + 1) * tau - base[::-1] for i in range(k)]
        nodes = np.unique(np.concatenate(legs))
    bps = np.unique(np.concatenate([
        (path.breakpoints + i * tau) if i % 2 == 0 else ((i + 1) * tau - path.breakpoints)
        for i in range(k)]))
    it = FunctionPath(n, k * tau, f, bps, refinable=path.refinable, nodes=nodes)
    # joints: at odd multiples of tau the legs meet as gamma(tau) Q^j = N gamma(tau) N Q^{j+1};
    # at even multiples both legs reduce to gamma(0) Q^{j+1}
    scale = max(1.0, float(np.abs(P).max()))
    err = float(np.abs(path(0.0) - np.eye(2 * n)).max())
    for j in range((k - 1 + 1) // 2):
        err = max(err, float(np.abs(P @ Qpow[j] - N @ P @ N @ Qpow[j + 1]).max()) / float(
            max(1.0, np.abs(Qpow[j + 1]).max())))
    if err > joint_tol * scale:
        from .errors import InstabilityError
        raise InstabilityError(f"brake iterate joints disagree by {err:.2e}")
    it.base = path
    it.iteration = k
    return it


def periodic_iterate(path: SymplecticPath, m: int) -> SymplecticPath:
    """``gamma(t - j tau) gamma(tau)^j`` on ``[0, m tau]``."""
    if m < 1:
        raise ValueError("iteration count must be positive")
    tau, n = path.tau, path.k
    P = path.endpoint
    Ppow = [np.eye(2 * n)]
    for _ in range(m):
        Ppow.append(Ppow[-1] @ P)
    Ppow = np.asarray(Ppow)

    def f(ts):
        j = np.minimum(np.floor(ts / tau + 1e-15).astype(int), m - 1)
        j = np.where(ts - j * tau < 0, j - 1, j)
        return path.evaluate(np.clip(ts - j * tau, 0, tau)) @ Ppow[j]

    nodes = None
    if not path.refinable:
        nodes = np.unique(np.concatenate([path.nodes + i * tau for i in range(m)]))
    bps = np.unique(np.concatenate([path.breakpoints + i * tau for i in range(m)]))
    return FunctionPath(n, m * tau, f, bps, refinable=path.refinable, nodes=nodes)


def periodic_square(path: SymplecticPath) -> SymplecticPath:
    return periodic_iterate(path, 2)
