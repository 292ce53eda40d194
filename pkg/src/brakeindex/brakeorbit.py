"""Brake orbits on convex, reversible energy surfaces.

A brake orbit satisfies ``x(-t) = N x(t)``: it starts with ``p = 0`` and its
momentum vanishes again after half a period. Orbits are found by Newton
shooting on ``(q, T)`` with ``q`` on the level set ``{p = 0, H(0, q) = h}``
and the equations ``p(T; (0, q)) = 0``; the Jacobian comes from the
monodromy blocks of the variational equation ``gamma' = J H''(x) gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import cKDTree
from scipy.stats import qmc, norm

from .errors import DomainError, HypothesisError, IntegrationError
from .paths import FunctionPath
from .sympcore import standard_j, standard_n

ENERGY_TOL = 1e-10
MONODROMY_TOL = 1e-8
SHOOT_TOL = 1e-10
MIN_RADIUS = 0.1

# run-time overridable defaults (the CLI --tol flag writes here)
TOLERANCES = {"energy_tol": ENERGY_TOL, "monodromy_tol": MONODROMY_TOL, "shoot_tol": SHOOT_TOL,
              "max_newton": 30}


# ----------------------------------------------------------------- Hamiltonians

@dataclass
class HamiltonianSpec:
    """``H``, its gradient and Hessian on ``R^{2n}`` with symmetry/convexity flags.

    Declared flags are checked on random samples when ``verify`` is true;
    a declared property that fails raises `HypothesisError`.
    """

    n: int
    H: Callable
    grad: Callable
    hess: Callable
    reversible: bool = True
    even: bool = True
    convex: bool = True
    level: float = 1.0
    name: str = "hamiltonian"
    checks: dict = field(default_factory=dict)
    verify: bool = True
    sample_radius: float = 1.0

    def __post_init__(self):
        if self.verify:
            self.checks = verify_hamiltonian(self)


def verify_hamiltonian(h: HamiltonianSpec, samples: int = 12, seed: int = 7) -> dict:
    rng = np.random.default_rng(seed)
    N = standard_n(h.n)
    d = 2 * h.n
    out = {"gradient_fd": 0.0, "hessian_fd": 0.0, "reversible": True, "even": True, "convex": True}
    for _ in range(samples):
        x = rng.normal(size=d)
        x *= h.sample_radius * rng.uniform(0.5, 1.5) / np.linalg.norm(x)
        g, He = np.asarray(h.grad(x)), np.asarray(h.hess(x))
        step = 1e-5 * max(1.0, np.linalg.norm(x))
        fd_g = np.array([(h.H(x + step * e) - h.H(x - step * e)) / (2 * step) for e in np.eye(d)])
        fd_h = np.array([(np.asarray(h.grad(x + step * e)) - np.asarray(h.grad(x - step * e))) / (2 * step)
                         for e in np.eye(d)])
        out["gradient_fd"] = max(out["gradient_fd"],
                                 float(np.abs(fd_g - g).max() / max(1.0, np.abs(g).max())))
        out["hessian_fd"] = max(out["hessian_fd"],
                                float(np.abs(fd_h - He).max() / max(1.0, np.abs(He).max())))
        hx = h.H(x)
        if abs(h.H(N @ x) - hx) > 1e-10 * max(1.0, abs(hx)):
            out["reversible"] = False
        if abs(h.H(-x) - hx) > 1e-10 * max(1.0, abs(hx)):
            out["even"] = False
        if np.linalg.eigvalsh(0.5 * (He + He.T)).min() <= 0:
            out["convex"] = False
    if out["gradient_fd"] > 1e-6 or out["hessian_fd"] > 1e-6:
        raise HypothesisError(f"derivatives inconsistent with H (gradient {out['gradient_fd']:.2e}, "
                              f"Hessian {out['hessian_fd']:.2e})")
    for flag in ("reversible", "even", "convex"):
        if getattr(h, flag) and not out[flag]:
            raise HypothesisError(f"declared {flag} but a sample violates it")
    return out


def _squared_ratio_flags(radii, max_den: int = 60, tol: float = 1e-9) -> list[tuple]:
    pairs = []
    r2 = np.asarray(radii, float) ** 2
    for i in range(len(r2)):
        for j in range(i + 1, len(r2)):
            x = r2[j] / r2[i]
            f = Fraction(x).limit_denominator(max_den)
            if abs(float(f) - x) < tol * max(1.0, x):
                pairs.append((i, j, f"{f.numerator}/{f.denominator}"))
    return pairs


@dataclass
class EllipsoidSpec:
    """Ellipsoid ``sum_k (p_k^2 + q_k^2) / r_k^2 = 1``.

    ``resonances`` lists index pairs whose squared-radius ratio looks rational
    (continued-fraction test with bounded denominator); such pairs produce
    continua of brake orbits and degenerate orbits.
    """

    radii: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or r.size < 1 or np.any(~np.isfinite(r)) or np.any(r <= 0):
            raise DomainError("radii must be positive and finite")
        self.radii = tuple(float(v) for v in r)

    @property
    def n(self) -> int:
        return len(self.radii)

    @property
    def frequencies(self) -> np.ndarray:
        return 2.0 / np.asarray(self.radii) ** 2

    @property
    def periods(self) -> np.ndarray:
        return np.pi * np.asarray(self.radii) ** 2

    @property
    def resonances(self) -> list[tuple]:
        return _squared_ratio_flags(self.radii)

    @property
    def nonresonant(self) -> bool:
        return not self.resonances

    @property
    def radius_ratios_irrational(self) -> bool:
        """Ratio test on the radii themselves; weaker than `nonresonant`,
        e.g. radii (1, sqrt 2) pass it but resonate."""
        r = np.asarray(self.radii)
        for i in range(len(r)):
            for j in range(i + 1, len(r)):
                f = Fraction(r[j] / r[i]).limit_denominator(60)
                if abs(float(f) - r[j] / r[i]) < 1e-9 * max(1.0, r[j] / r[i]):
                    return False
        return True

    @property
    def diameter(self) -> float:
        return 2 * max(self.radii)


class ConvexBody:
    """Body ``{g <= 1}`` for a convex ``g`` with ``g(0) < 1`` and ``g(-x) = g(x)``."""

    def __init__(self, n: int, g: Callable, grad_g: Callable | None = None, scale: float = 1.0):
        self.n, self.g, self.scale = n, g, scale
        self._grad_g = grad_g

    def grad_g(self, y):
        if self._grad_g is not None:
            return np.asarray(self._grad_g(y), float)
        h = 1e-6
        return np.array([(self.g(y + h * e) - self.g(y - h * e)) / (2 * h) for e in np.eye(2 * self.n)])

    def gauge(self, x) -> float:
        """``j(x) = inf{lam > 0 : x / lam in body}`` by bracketing along the ray."""
        x = np.asarray(x, float)
        r = np.linalg.norm(x)
        if r == 0:
            return 0.0
        u = x / r
        hi = self.scale
        while self.g(hi * u) < 1:
            hi *= 2
            if hi > 1e8:
                raise DomainError("body is unbounded along a ray")
        s = brentq(lambda t: self.g(t * u) - 1, 0.0, hi, xtol=1e-15, rtol=1e-15)
        return r / s


def gauge_hamiltonian(body) -> HamiltonianSpec:
    """``H = j^2`` for an ellipsoid (closed form) or a `ConvexBody` (ray root finding,
    gradient from the boundary normal, Hessian by differencing the gradient)."""
    if isinstance(body, EllipsoidSpec):
        w = np.r_[1 / np.asarray(body.radii) ** 2, 1 / np.asarray(body.radii) ** 2]

        def H(x):
            x = np.asarray(x)
            return float(np.sum(w * x * x))

        h = HamiltonianSpec(body.n, H, lambda x: 2 * w * np.asarray(x), lambda x: np.diag(2 * w),
                            name=f"ellipsoid{tuple(round(r, 6) for r in body.radii)}",
                            sample_radius=float(np.mean(body.radii)))
        h.body = body
        _check_homogeneous(h)
        return h
    if isinstance(body, ConvexBody):
        def H(x):
            return body.gauge(x) ** 2

        def grad(x):
            x = np.asarray(x, float)
            j = body.gauge(x)
            if j == 0:
                return np.zeros_like(x)
            y = x / j
            nrm = body.grad_g(y)
            return 2 * j * nrm / float(nrm @ y)

        def hess(x):
            x = np.asarray(x, float)
            step = 1e-5 * max(1.0, np.linalg.norm(x))
            Hm = np.array([(grad(x + step * e) - grad(x - step * e)) / (2 * step)
                           for e in np.eye(len(x))])
            return 0.5 * (Hm + Hm.T)

        h = HamiltonianSpec(body.n, H, grad, hess, name="gauge", verify=False,
                            sample_radius=body.scale)
        rng = np.random.default_rng(11)
        for _ in range(8):
            x = rng.normal(size=2 * body.n)
            x *= body.scale / np.linalg.norm(x)
            if np.linalg.eigvalsh(hess(x)).min() <= 0:
                raise HypothesisError("non-convex sample detected")
        h.checks = {"convex": True}
        h.body = body
        _check_homogeneous(h)
        return h
    raise TypeError("expected an EllipsoidSpec or ConvexBody")


def _check_homogeneous(h: HamiltonianSpec, samples: int = 6):
    rng = np.random.default_rng(5)
    for _ in range(samples):
        x = rng.normal(size=2 * h.n)
        if abs(h.H(2 * x) - 4 * h.H(x)) > 1e-8 * max(1.0, h.H(2 * x)):
            raise HypothesisError("gauge Hamiltonian is not 2-homogeneous")


def mechanical_lift(V: Callable, grad_V: Callable, hess_V: Callable, n: int, h: float = 1.0,
                    name: str = "mechanical") -> HamiltonianSpec:
    """``H(p, q) = |p|^2 / 2 + V(q)`` on the level ``H = h``."""
    def H(x):
        x = np.asarray(x)
        return float(0.5 * x[:n] @ x[:n] + V(x[n:]))

    def grad(x):
        x = np.asarray(x)
        return np.r_[x[:n], grad_V(x[n:])]

    def hess(x):
        x = np.asarray(x)
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = np.eye(n)
        out[n:, n:] = hess_V(x[n:])
        return out

    spec = HamiltonianSpec(n, H, grad, hess, reversible=True, even=True, convex=False, level=h,
                           name=name)
    spec.flags = {"V_even": spec.checks.get("even"), "V_zero_at_origin": abs(V(np.zeros(n))) < 1e-12}
    return spec


def perturbed_ellipsoid(radii, eps: float = 0.01) -> HamiltonianSpec:
    """``H_E + eps (q_1^2 + p_2^2)^2``: even, reversible and convex; not homogeneous."""
    body = EllipsoidSpec(tuple(radii))
    n = body.n
    w = np.r_[1 / np.asarray(body.radii) ** 2, 1 / np.asarray(body.radii) ** 2]
    a = np.zeros(2 * n)
    a[n] = 1.0          # q_1
    if n > 1:
        a[1] = 1.0      # p_2

    def H(x):
        x = np.asarray(x)
        s = np.sum(a * x * x)
        return float(np.sum(w * x * x) + eps * s * s)

    def grad(x):
        x = np.asarray(x)
        s = np.sum(a * x * x)
        return 2 * w * x + eps * 4 * s * a * x

    def hess(x):
        x = np.asarray(x)
        s = np.sum(a * x * x)
        ax = a * x
        return np.diag(2 * w) + eps * (8 * np.outer(ax, ax) + 4 * s * np.diag(a))

    spec = HamiltonianSpec(n, H, grad, hess, name=f"perturbed-ellipsoid(eps={eps})",
                           sample_radius=float(np.mean(body.radii)))
    spec.body = body
    return spec


def hypersurface_from_json(doc: dict) -> HamiltonianSpec:
    """``{"type": "ellipsoid", "radii": [...]}`` or a tabulated even potential
    ``{"type": "potential", "expr-table": {"axes": [[...], ...], "values": [...], "level": h}}``
    (cubic interpolation; derivatives by central differences)."""
    kind = doc.get("type")
    if kind == "ellipsoid":
        return gauge_hamiltonian(EllipsoidSpec(tuple(doc["radii"])))
    if kind == "potential":
        from scipy.interpolate import RegularGridInterpolator

        tab = doc["expr-table"]
        axes = [np.asarray(a, float) for a in tab["axes"]]
        vals = np.asarray(tab["values"], float).reshape([len(a) for a in axes])
        n = len(axes)
        interp = RegularGridInterpolator(axes, vals, method="cubic")

        def V(q):
            return float(interp(np.asarray(q, float)[None, :])[0])

        def gV(q, h=1e-4):
            return np.array([(V(q + h * e) - V(q - h * e)) / (2 * h) for e in np.eye(n)])

        def hV(q, h=1e-3):
            Hm = np.array([(gV(q + h * e) - gV(q - h * e)) / (2 * h) for e in np.eye(n)])
            return 0.5 * (Hm + Hm.T)

        spec = HamiltonianSpec(n, lambda x: 0.5 * np.dot(x[:n], x[:n]) + V(x[n:]),
                               lambda x: np.r_[x[:n], gV(x[n:])],
                               lambda x: _block_hess(n, hV(x[n:])),
                               convex=False, even=False, level=float(tab.get("level", 1.0)),
                               name="tabulated-potential", verify=False)
        return spec
    raise ValueError(f"unknown hypersurface type {kind!r}")


def _block_hess(n, HV):
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = np.eye(n)
    out[n:, n:] = HV
    return out


# ----------------------------------------------------------------- flow

@dataclass
class Trajectory:
    """Flow samples with a dense interpolant for states and monodromy."""

    ts: np.ndarray
    xs: np.ndarray
    gammas: np.ndarray
    energy_drift: float
    symplectic_drift: float
    dense: Callable = field(repr=False)
    T: float = 0.0

    def state(self, t) -> np.ndarray:
        return self.dense(np.atleast_1d(np.asarray(t, float)))[0]

    def gamma(self, t) -> np.ndarray:
        return self.dense(np.atleast_1d(np.asarray(t, float)))[1]

    @property
    def monodromy(self) -> np.ndarray:
        return self.gammas[-1]


def _flow_rhs(H: HamiltonianSpec):
    n = H.n
    d = 2 * n
    J = standard_j(n)

    def rhs(t, y):
        x = y[:d]
        G = y[d:].reshape(d, d)
        return np.r_[J @ H.grad(x), (J @ H.hess(x) @ G).ravel()]

    return rhs


def flow_with_monodromy(H: HamiltonianSpec, x0, T: float, method: str = "DOP853",
                        steps: int | None = None, rtol: float = 1e-12, atol: float = 1e-12,
                        energy_tol: float | None = None, monodromy_tol: float | None = None) -> Trajectory:
    """Integrate ``x' = J H'(x)`` and ``gamma' = J H''(x) gamma`` jointly on ``[0, T]``.

    ``method="DOP853"`` is adaptive (order 8); ``method="midpoint"`` is the
    fixed-step implicit midpoint rule, symplectic for the monodromy, used as a
    drift cross-check. Raises `IntegrationError` when energy or symplecticity
    drift exceeds its tolerance.
    """
    energy_tol = TOLERANCES["energy_tol"] if energy_tol is None else energy_tol
    monodromy_tol = TOLERANCES["monodromy_tol"] if monodromy_tol is None else monodromy_tol
    x0 = np.asarray(x0, float)
    n = H.n
    d = 2 * n
    if x0.shape != (d,) or not np.all(np.isfinite(x0)):
        raise ValueError("initial state has the wrong shape or is not finite")
    if np.linalg.norm(x0) < MIN_RADIUS:
        raise DomainError("initial state too close to the origin")
    if not T > 0:
        raise ValueError("duration must be positive")
    if method == "DOP853":
        sol = solve_ivp(_flow_rhs(H), (0.0, T), np.r_[x0, np.eye(d).ravel()], method="DOP853",
                        rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            raise IntegrationError(sol.message)
        ts = sol.t
        Y = sol.y.T

        def dense(tq):
            Yq = sol.sol(np.clip(tq, 0, T)).T
            return Yq[:, :d], Yq[:, d:].reshape(len(tq), d, d)
    elif method == "midpoint":
        steps = steps or max(200, int(400 * T))
        ts, Y = _implicit_midpoint(H, x0, T, steps)

        def dense(tq):
            idx = np.clip(np.searchsorted(ts, tq), 0, len(ts) - 1)
            return Y[idx, :d], Y[idx, d:].reshape(len(tq), d, d)
    else:
        raise ValueError(f"unknown method {method!r}")
    xs = Y[:, :d]
    gs = Y[:, d:].reshape(len(ts), d, d)
    e0 = H.H(x0)
    e_drift = max(abs(H.H(x) - e0) for x in xs) / max(1.0, abs(e0))
    J = standard_j(n)
    s_drift = float(max(np.abs(g.T @ J @ g - J).max() for g in gs[:: max(1, len(gs) // 50)]))
    s_drift = max(s_drift, float(np.abs(gs[-1].T @ J @ gs[-1] - J).max()))
    if e_drift > energy_tol:
        raise IntegrationError(f"energy drift {e_drift:.2e} exceeds {energy_tol:.1e}")
    if s_drift > monodromy_tol:
        raise IntegrationError(f"symplecticity drift {s_drift:.2e} exceeds {monodromy_tol:.1e}")
    return Trajectory(ts, xs, gs, float(e_drift), s_drift, dense, T)


def _implicit_midpoint(H, x0, T, steps):
    n = H.n
    d = 2 * n
    J = standard_j(n)
    h = T / steps
    x = x0.copy()
    G = np.eye(d)
    out = [np.r_[x, G.ravel()]]
    for _ in range(steps):
        y = x + h * J @ H.grad(x)
        for _ in range(50):
            m = 0.5 * (x + y)
            F = y - x - h * J @ H.grad(m)
            Jac = np.eye(d) - 0.5 * h * J @ H.hess(m)
            dy = np.linalg.solve(Jac, -F)
            y = y + dy
            if np.abs(dy).max() < 1e-15 * max(1.0, np.abs(y).max()):
                break
        A = 0.5 * h * J @ H.hess(0.5 * (x + y))
        G = np.linalg.solve(np.eye(d) - A, (np.eye(d) + A) @ G)
        x = y
        out.append(np.r_[x, G.ravel()])
    return np.linspace(0, T, steps + 1), np.asarray(out)


# ----------------------------------------------------------------- orbits

class OrbitPath(FunctionPath):
    """Fundamental solution along an orbit, with generator ``H''(x(t))``."""

    def __init__(self, n, tau, gamma_fn, hess_fn):
        super().__init__(n, tau, gamma_fn)
        self._hess_fn = hess_fn

    def generator(self, t: float) -> np.ndarray:
        return self._hess_fn(t)


@dataclass
class BrakeOrbit:
    """Brake orbit of minimal period ``tau``; ``trajectory`` covers ``[0, tau/2]``."""

    tau: float
    x0: np.ndarray
    trajectory: Trajectory
    residual: float
    H: HamiltonianSpec = field(repr=False)
    symmetric: Optional[bool] = None
    dual: Optional[bool] = None
    label: str = ""
    iterate_of: int = 1

    @property
    def n(self) -> int:
        return self.H.n

    @property
    def half(self) -> float:
        return self.tau / 2

    def state(self, t) -> np.ndarray:
        """``x(t)`` for any real ``t`` via ``x(-t) = N x(t)`` and periodicity."""
        t = np.mod(np.atleast_1d(np.asarray(t, float)), self.tau)
        N = standard_n(self.n)
        first = t <= self.half
        s = np.where(first, t, self.tau - t)
        X = self.trajectory.state(s)
        X[~first] = X[~first] @ N.T
        return X

    def velocity(self, t) -> np.ndarray:
        J = standard_j(self.n)
        return np.array([J @ self.H.grad(x) for x in self.state(t)])

    def trace(self, samples: int = 1024) -> np.ndarray:
        return self.state(np.linspace(0, self.tau, samples, endpoint=False))

    def path(self) -> OrbitPath:
        """``gamma_x`` on ``[0, tau/2]`` as a symplectic path."""
        traj = self.trajectory
        return OrbitPath(self.n, self.half, lambda ts: traj.gamma(ts),
                         lambda t: self.H.hess(traj.state(t)[0]))

    @property
    def monodromy_half(self) -> np.ndarray:
        return self.trajectory.gamma(self.half)[0]

    def to_json(self, indices: dict | None = None) -> dict:
        return {"tau": float(self.tau), "x0": [float(v) for v in self.x0],
                "residual": float(self.residual), "symmetric": self.symmetric,
                "dual": self.dual, "indices": indices or {}}


def _analytic_trajectory(spec: EllipsoidSpec, k: int, T: float) -> Trajectory:
    n = spec.n
    r, w = spec.radii[k], spec.frequencies

    def dense(tq):
        tq = np.asarray(tq, float)
        X = np.zeros((len(tq), 2 * n))
        X[:, k] = -r * np.sin(w[k] * tq)
        X[:, n + k] = r * np.cos(w[k] * tq)
        G = np.zeros((len(tq), 2 * n, 2 * n))
        c, s = np.cos(np.outer(tq, w)), np.sin(np.outer(tq, w))
        idx = np.arange(n)
        G[:, idx, idx] = c
        G[:, idx, n + idx] = -s
        G[:, n + idx, idx] = s
        G[:, n + idx, n + idx] = c
        return X, G

    ts = np.linspace(0, T, 65)
    X, G = dense(ts)
    return Trajectory(ts, X, G, 0.0, 0.0, dense, T)


def ellipsoid_analytic_orbits(spec: EllipsoidSpec, check_tol: float = 1e-12) -> list[BrakeOrbit]:
    """The planar orbits ``x_k(t) = -r_k sin(w_k t) e_k + r_k cos(w_k t) e_{n+k}``,
    ``w_k = 2 / r_k^2``, with period ``pi r_k^2``; each checked against the
    flow and the level set."""
    H = gauge_hamiltonian(spec)
    n = spec.n
    J = standard_j(n)
    out = []
    for k in range(n):
        tau = spec.periods[k]
        traj = _analytic_trajectory(spec, k, tau / 2)
        o = BrakeOrbit(tau, traj.state(0.0)[0], traj, 0.0, H, label=f"plane-{k + 1}")
        ts = np.linspace(0, tau, 41)
        X = o.state(ts)
        w = spec.frequencies[k]
        Xdot = np.zeros_like(X)
        Xdot[:, k] = -spec.radii[k] * w * np.cos(w * ts)
        Xdot[:, n + k] = -spec.radii[k] * w * np.sin(w * ts)
        err = max(float(np.abs(Xdot - np.array([J @ H.grad(x) for x in X])).max()),
                  float(np.abs(np.array([H.H(x) for x in X]) - 1).max()),
                  float(np.abs(X[0, :n]).max()), float(np.abs(o.state(tau / 2)[0, :n]).max()))
        if err > check_tol * max(1.0, max(spec.radii)) * 10:
            raise IntegrationError(f"analytic orbit {k} fails its own equations ({err:.2e})")
        o.residual = err
        classify_orbit(o)
        out.append(o)
    return out


# ----------------------------------------------------------------- shooting

@dataclass
class ShootResult:
    status: str                    # "converged" | "degenerate" | "no-convergence"
    orbit: Optional[BrakeOrbit]
    residual: float
    iterations: int
    T: float
    q: np.ndarray
    degenerate_direction: Optional[np.ndarray] = None
    history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.orbit is not None


def _project_level(H: HamiltonianSpec, q: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Move ``q`` along ``grad_q H(0, q)`` until ``H(0, q) = level``."""
    n = H.n
    for _ in range(60):
        x = np.r_[np.zeros(n), q]
        f = H.H(x) - H.level
        if abs(f) <= tol * max(1.0, H.level):
            return q
        g = H.grad(x)[n:]
        q = q - f / float(g @ g) * g
    raise IntegrationError("could not project onto the level set")


def _chart(H: HamiltonianSpec, q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space of the level set inside ``{p = 0}``."""
    n = H.n
    g = H.grad(np.r_[np.zeros(n), q])[n:]
    u, _, _ = np.linalg.svd(g[:, None])
    return u[:, 1:]


def _shoot_eval(H, q, T, symmetric=False):
    """Residual and Jacobian pieces; ``symmetric`` targets ``q(T) = 0`` (quarter period)."""
    n = H.n
    x0 = np.r_[np.zeros(n), q]
    traj = flow_with_monodromy(H, x0, T)
    xT = traj.xs[-1]
    G = traj.monodromy
    J = standard_j(n)
    vT = J @ H.grad(xT)
    rows = slice(n, 2 * n) if symmetric else slice(0, n)
    return traj, xT[rows].copy(), G[rows, n:], vT[rows]


def shoot_brake_orbit(H: HamiltonianSpec, q_guess, T_guess: float, max_iter: int | None = None,
                      shoot_tol: float | None = None, singular_ratio: float = 1e-10,
                      detect_minimal: bool = True, symmetric: bool = False) -> ShootResult:
    """Newton iteration for ``p(T; (0, q)) = 0`` with ``q`` on the level set.

    ``T`` is the half period. With ``symmetric=True`` the target is instead
    ``q(T) = 0`` with ``T`` a quarter period, which singles out symmetric
    brake orbits (``x(t + tau/2) = -x(t)``); the guess is still a half period. The unknowns are ``n - 1`` chart coordinates of
    ``q`` and ``T``; after each update ``q`` is projected back to the level set.
    Steps are halved while the residual grows. A Jacobian with singular-value
    ratio below ``singular_ratio`` yields a degenerate-direction report.
    """
    if not H.reversible:
        raise HypothesisError("brake orbits need a reversible Hamiltonian")
    max_iter = int(TOLERANCES["max_newton"]) if max_iter is None else max_iter
    shoot_tol = TOLERANCES["shoot_tol"] if shoot_tol is None else shoot_tol
    q = _project_level(H, np.asarray(q_guess, float).copy())
    T = float(T_guess) / (2 if symmetric else 1)
    traj, F, Bq, pdot = _shoot_eval(H, q, T, symmetric)
    res = float(np.linalg.norm(F))
    history = [res]
    degenerate_dir = None
    it = 0
    for it in range(1, max_iter + 1):
        if res <= shoot_tol:
            it -= 1
            break
        E = _chart(H, q)
        Jac = np.column_stack([Bq @ E, pdot])
        s = np.linalg.svd(Jac, compute_uv=False)
        if s[-1] < singular_ratio * s[0]:
            _, _, vh = np.linalg.svd(Jac)
            degenerate_dir = np.r_[E @ vh[-1][:-1], vh[-1][-1]]
        step = np.linalg.lstsq(Jac, -F, rcond=None)[0]
        lam = 1.0
        for _ in range(12):
            q_new = _project_level(H, q + lam * (E @ step[:-1]))
            T_new = T + lam * step[-1]
            if T_new > 0:
                try:
                    cand = _shoot_eval(H, q_new, T_new, symmetric)
                except (IntegrationError, DomainError):
                    cand = None
                if cand is not None and np.linalg.norm(cand[1]) < res * (1 - 1e-4 * lam) + 1e-14:
                    break
            lam /= 2
        else:
            return ShootResult("no-convergence", None, res, it, T, q, degenerate_dir, history)
        q, T = q_new, T_new
        traj, F, Bq, pdot = cand
        res = float(np.linalg.norm(F))
        history.append(res)
    if res > shoot_tol:
        return ShootResult("no-convergence", None, res, it, T, q, degenerate_dir, history)
    # degeneracy at the solution itself
    E = _chart(H, q)
    s = np.linalg.svd(np.column_stack([Bq @ E, pdot]), compute_uv=False)
    degenerate = s[-1] < singular_ratio * s[0]
    if degenerate and degenerate_dir is None:
        _, _, vh = np.linalg.svd(np.column_stack([Bq @ E, pdot]))
        degenerate_dir = np.r_[E @ vh[-1][:-1], vh[-1][-1]]
    if symmetric:
        T = 2 * T
        traj = flow_with_monodromy(H, np.r_[np.zeros(H.n), q], T)
        res = max(res, float(np.linalg.norm(traj.xs[-1][:H.n])))
    m = 1
    if detect_minimal:
        T, m = _minimal_half_period(traj, H.n, T)
        if m > 1:
            traj = flow_with_monodromy(H, np.r_[np.zeros(H.n), q], T)
            res = float(np.linalg.norm(traj.xs[-1][:H.n]))
    orbit = BrakeOrbit(2 * T, np.r_[np.zeros(H.n), q], traj, res, H, iterate_of=m)
    classify_orbit(orbit)
    status = "degenerate" if degenerate else "converged"
    return ShootResult(status, orbit, res, it, T, q, degenerate_dir if degenerate else None, history)


def _minimal_half_period(traj: Trajectory, n: int, T: float, grid: int = 800,
                         tol: float = 1e-7) -> tuple[float, int]:
    """Smallest ``t`` in ``(0, T]`` with ``p(t) = 0`` of the form ``T / m``."""
    ts = np.linspace(0, T, grid + 1)[1:-1]
    P = np.linalg.norm(traj.state(ts)[:, :n], axis=1)
    for i in range(1, len(ts) - 1):
        if P[i] <= P[i - 1] and P[i] <= P[i + 1]:
            f = lambda t: float(np.linalg.norm(traj.state(t)[0, :n]))
            r = minimize_scalar(f, bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                                options={"xatol": 1e-12})
            if r.fun < tol:
                m = T / r.x
                if abs(m - round(m)) < 1e-5 and round(m) > 1:
                    return T / round(m), int(round(m))
    return T, 1


# ----------------------------------------------------------------- classification

def _project_onto(o: BrakeOrbit, Y: np.ndarray, samples: int = 512, iters: int = 6) -> np.ndarray:
    """Distances from points ``Y`` to the trace of ``o``, refined by Gauss-Newton in time."""
    ts = np.linspace(0, o.tau, samples, endpoint=False)
    X = o.state(ts)
    _, idx = cKDTree(X).query(Y)
    s = ts[idx]
    for _ in range(iters):
        Xs = o.state(s)
        V = o.velocity(s)
        s = s - np.einsum("ij,ij->i", Xs - Y, V) / np.einsum("ij,ij->i", V, V)
    return np.linalg.norm(o.state(s) - Y, axis=1)


def trace_distance(a: BrakeOrbit, b: BrakeOrbit, samples: int = 256, transform=None) -> float:
    """Hausdorff distance between the traces (optionally of ``transform(b)``)."""
    Ya = a.trace(samples)
    Yb = b.trace(samples)
    if transform is None:
        return float(max(_project_onto(b, Ya).max(), _project_onto(a, Yb).max()))
    # distance between trace(a) and transform(trace(b)), transform linear and invertible
    Tinv = np.linalg.inv(transform)
    d1 = _project_onto(b, Ya @ Tinv.T) * np.linalg.norm(transform, 2)
    d2 = _project_onto(a, Yb @ transform.T)
    return float(max(d1.max(), d2.max()))


def geom_tol(o: BrakeOrbit) -> float:
    body = getattr(o.H, "body", None)
    diam = body.diameter if body is not None and hasattr(body, "diameter") else \
        2 * float(np.abs(o.trace(64)).max())
    return 1e-6 * diam


def classify_orbit(o: BrakeOrbit) -> dict:
    """Set the ``symmetric`` (trace equals its negative) and ``dual`` (trace equals
    ``-N`` trace) flags; also report the half-period shift residual."""
    n = o.n
    tol = geom_tol(o)
    dsym = trace_distance(o, o, transform=-np.eye(2 * n))
    ddual = trace_distance(o, o, transform=-standard_n(n))
    ts = np.linspace(0, o.tau, 64, endpoint=False)
    shift = float(np.abs(o.state(ts + o.half) + o.state(ts)).max())
    o.symmetric = bool(dsym <= tol)
    o.dual = bool(ddual <= tol)
    return {"symmetric": o.symmetric, "dual": o.dual, "symmetric_distance": dsym,
            "dual_distance": ddual, "half_period_shift_residual": shift}


def geometrically_equal(a: BrakeOrbit, b: BrakeOrbit) -> bool:
    if abs(a.tau - b.tau) > 1e-6 * max(a.tau, b.tau):
        # equal traces force equal minimal periods on the same energy surface
        return False
    return trace_distance(a, b) <= max(geom_tol(a), geom_tol(b))


# ----------------------------------------------------------------- index report

def orbit_index_report(o: BrakeOrbit, k_max: int = 8, profile: bool = True) -> dict:
    """Index data of ``gamma_x`` on ``[0, tau/2]`` and of its iterates."""
    from .iteration import (build_profile, decomposition_check, minus_identity_structure,
                            theorem31_gap)
    from .maslov import i_lagrangian, i_lagrangian_convex_oracle, i_omega
    from .normalforms import splitting_numbers
    from .paths import periodic_square

    path = o.path()
    L0, L1 = i_lagrangian(path, 0), i_lagrangian(path, 1)
    P = path.endpoint
    rep = {"tau": o.tau, "i_L0": list(L0), "i_L1": list(L1),
           "nondegenerate": L0.nullity == 1}
    if o.H.convex:
        try:
            rep["i_L0_oracle"] = i_lagrangian_convex_oracle(path, 0)
            rep["i_L1_oracle"] = i_lagrangian_convex_oracle(path, 1)
        except HypothesisError as exc:
            rep["oracle"] = f"not applicable: {exc}"
    dbl = periodic_square(path)
    rep["i_periodic_double"] = list(i_omega(dbl, 1.0))
    rep["S+_P2(1)"] = splitting_numbers(P @ P, 1.0, path=dbl).s_plus
    rep["decomposition"] = decomposition_check(path).to_dict()
    rep["minus_identity_structure"] = minus_identity_structure(P)
    rep["theorem_gap"] = theorem31_gap(path, structure=rep["minus_identity_structure"]).to_dict()
    if profile:
        rep["profile"] = build_profile(path, k_max=k_max).to_dict()
    return rep


# ----------------------------------------------------------------- multistart

def _level_starts(H: HamiltonianSpec, count: int, seed: int) -> np.ndarray:
    n = H.n
    if n == 1:
        return np.array([_project_level(H, np.array([1.0]))])
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    u = sob.random_base2(max(1, int(np.ceil(np.log2(count)))))[:count]
    z = norm.ppf(np.clip(u, 1e-9, 1 - 1e-9))
    out = []
    for v in z:
        v = v / np.linalg.norm(v)
        out.append(_project_level(H, v * np.sqrt(H.level)))
    return np.asarray(out)


def _half_period_guesses(H: HamiltonianSpec, q: np.ndarray, horizon: float, count: int = 3):
    n = H.n
    traj = flow_with_monodromy(H, np.r_[np.zeros(n), q], horizon)
    ts = np.linspace(0, horizon, 2000)[1:]
    P = np.linalg.norm(traj.state(ts)[:, :n], axis=1)
    mins = [i for i in range(1, len(ts) - 1) if P[i] <= P[i - 1] and P[i] <= P[i + 1]]
    mins.sort(key=lambda i: P[i])
    return [float(ts[i]) for i in mins[:count]]


def multiplicity_audit(H: HamiltonianSpec, starts: int = 16, seed: int = 0,
                       horizon: float | None = None, guesses_per_start: int = 2,
                       max_iter: int | None = None, symmetric: bool = False) -> dict:
    """Multistart shooting, deduplication by trace, and comparison with the
    lower bound ``[(n + 1) / 2] + 1`` on the number of distinct brake orbits.

    A count below the bound is reported as an incomplete search.
    ``symmetric=True`` restricts the search to symmetric brake orbits.
    """
    if not (H.reversible and H.even):
        raise HypothesisError("the audit needs a reversible, even Hamiltonian")
    n = H.n
    if horizon is None:
        body = getattr(H, "body", None)
        horizon = float(np.max(body.periods)) if body is not None else 2 * np.pi
    found: list[BrakeOrbit] = []
    attempts = []
    for q in _level_starts(H, starts, seed):
        for T0 in _half_period_guesses(H, q, horizon, guesses_per_start):
            r = shoot_brake_orbit(H, q, T0, max_iter=max_iter, symmetric=symmetric)
            attempts.append({"status": r.status, "residual": r.residual, "iterations": r.iterations})
            if r.orbit is None:
                continue
            if not any(geometrically_equal(r.orbit, f) for f in found):
                found.append(r.orbit)
    # canonical order: by period, then by initial point
    found.sort(key=lambda o: (round(o.tau, 8), tuple(np.round(np.abs(o.x0), 6))))
    bound = (n + 1) // 2 + 1
    return {"n": n, "count": len(found), "bound": bound,
            "status": "bound reached" if len(found) >= bound else "search incomplete",
            "symmetric_count": sum(bool(o.symmetric) for o in found),
            "orbits": found, "attempts": attempts,
            "degenerate_shots": sum(a["status"] == "degenerate" for a in attempts)}
