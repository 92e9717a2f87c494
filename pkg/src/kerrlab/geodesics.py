"""Geodesic integration on Kerr with complete-integrability diagnostics.

The equations of motion are integrated directly in Christoffel form with an
adaptive embedded Runge-Kutta scheme; integrability is exercised by checking
constancy of the four integrals (norm, energy e, axial angular momentum l_z,
and the quadratic Carter invariant k) rather than by quadratures.

Sign conventions: e = -g(u, d/dt) (positive for future-directed orbits at
infinity), l_z = +g(u, d/dphi).  The Carter invariant uses K_ab = Y_ac Y^c_b,
under which k = -l_z^2 for equatorial Schwarzschild orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError
from .kerr import BLPoint, KerrParams, _eval, carter_tensor, kerr_metric
from .tensors import UP, TensorValue

# Trajectories stop at r_plus + PLUNGE_GUARD * m.  Boyer-Lindquist components
# degenerate at the horizon: at r - r_plus = delta the 4-velocity components
# grow like 1/delta and quadratic invariants lose ~delta^-2 digits to
# cancellation, so the guard stays at a coordinate-healthy distance.
PLUNGE_GUARD = 1e-2


@dataclass(frozen=True)
class GeodesicState:
    """Phase-space point: chart position plus contravariant 4-velocity."""

    x: BLPoint
    u: TensorValue
    causal_type: str  # "timelike" | "null"

    def __post_init__(self):
        if self.causal_type not in ("timelike", "null"):
            raise ValueError(f"unknown causal type {self.causal_type!r}")
        if self.u.variance != (UP,):
            raise ValueError("4-velocity must be a rank-1 up tensor")
        uc = self.u.real_part()
        if uc[0] <= 0:
            raise ValueError("4-velocity must be future-directed (u^t > 0)")
        g = _eval("g", self.x.params, self.x).real
        norm = uc @ g @ uc
        target = -1.0 if self.causal_type == "timelike" else 0.0
        if abs(norm - target) > 1e-10:
            raise ValueError(
                f"4-velocity norm {norm} does not match {self.causal_type} target {target}"
            )

    @property
    def params(self):
        return self.x.params


@dataclass(frozen=True)
class ConservedSet:
    """The (e, l_z, k) integrals of Kerr geodesic motion."""

    e: float
    lz: float
    k: float

    def __post_init__(self):
        for v in (self.e, self.lz, self.k):
            if not math.isfinite(v):
                raise ValueError("non-finite conserved quantity")


def conserved_quantities(params: KerrParams, s: GeodesicState) -> ConservedSet:
    """e = -g(u, d/dt), l_z = g(u, d/dphi), k = K_ab u^a u^b."""
    g = _eval("g", params, s.x).real
    u = s.u.real_part()
    K = carter_tensor(params, s.x).real_part()
    return ConservedSet(
        e=float(-(g @ u)[0]),
        lz=float((g @ u)[3]),
        k=float(u @ K @ u),
    )


def _geodesic_rhs(params):
    from .kerr import _forms

    gamma_f = _forms()["gamma"]
    m, a = params.m, params.a

    def rhs(tau, y):
        r, th = y[1], y[2]
        gamma = np.array(gamma_f(m, a, r, th), dtype=float)
        u = y[4:]
        du = -np.einsum("cab,a,b->c", gamma, u, u)
        return np.concatenate([u, du])

    return rhs


@dataclass(frozen=True)
class Trajectory:
    """Sampled geodesic: affine parameter, chart coordinates, velocities, and flags."""

    tau: np.ndarray
    x: np.ndarray  # shape (n, 4): t, r, theta, phi
    u: np.ndarray  # shape (n, 4)
    plunged: bool
    params: KerrParams

    def state(self, i, causal_type) -> GeodesicState:
        p = BLPoint(*self.x[i], self.params)
        return GeodesicState(p, TensorValue((UP,), self.u[i]), causal_type)


def integrate_geodesic(
    params: KerrParams,
    s0: GeodesicState,
    t_max: float,
    tol: float = 1e-10,
    max_tau: float = None,
    n_samples: int = 200,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate until coordinate time t_max (or affine parameter max_tau).

    Plunging trajectories stop at r = r_plus + 1e-2 m and the partial
    trajectory is returned with plunged=True.

    max_step caps the solver step: the trajectory is sampled through the
    dense-output interpolant, whose error on large steps can exceed the
    integration error at tight tolerances.
    """
    if t_max <= 0:
        raise DomainError("t_max must be positive")
    y0 = np.concatenate([s0.x.coords, s0.u.real_part()])
    r_stop = params.r_plus + PLUNGE_GUARD * params.m
    if max_tau is None:
        # u^t >= 1 outside the ergoregion for the states of interest; the
        # coordinate-time event below is what actually ends the run.
        max_tau = 10.0 * t_max

    def hit_time(tau, y):
        return y[0] - t_max

    hit_time.terminal = True
    hit_time.direction = 1

    def hit_horizon(tau, y):
        return y[1] - r_stop

    hit_horizon.terminal = True
    hit_horizon.direction = -1

    sol = solve_ivp(
        _geodesic_rhs(params),
        (0.0, max_tau),
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol,
        max_step=max_step,
        dense_output=True,
        events=(hit_time, hit_horizon),
    )
    if not sol.success:
        raise RuntimeError(f"geodesic integration failed: {sol.message}")
    plunged = len(sol.t_events[1]) > 0
    tau_end = sol.t[-1]
    taus = np.linspace(0.0, tau_end, n_samples)
    ys = sol.sol(taus)
    return Trajectory(tau=taus, x=ys[:4].T.copy(), u=ys[4:].T.copy(), plunged=plunged, params=params)


def conserved_drift(params: KerrParams, traj: Trajectory, causal_type: str):
    """Max relative drift of (e, l_z, k, norm) along a sampled trajectory."""
    from .kerr import _forms

    g_f = _forms()["g"]
    K_f = _forms()["K"]
    m, a = params.m, params.a
    vals = []
    for x, u in zip(traj.x, traj.u):
        g = np.array(g_f(m, a, x[1], x[2]), dtype=float)
        K = np.array(K_f(m, a, x[1], x[2]), dtype=float)
        gu = g @ u
        vals.append([-gu[0], gu[3], u @ K @ u, u @ gu])
    vals = np.array(vals)
    ref = vals[0]
    scale = np.maximum(np.abs(ref), 1.0)
    return np.max(np.abs(vals - ref) / scale, axis=0)


def circular_orbit_state(params: KerrParams, r: float, prograde=True) -> GeodesicState:
    """Equatorial circular timelike orbit at Boyer-Lindquist radius r.

    The angular velocity solves the radial geodesic equation
    Gamma^r_tt + 2 Omega Gamma^r_tphi + Omega^2 Gamma^r_phiphi = 0 and the
    4-velocity is normalized to g(u,u) = -1.
    """
    p = BLPoint(0.0, r, math.pi / 2, 0.0, params)
    gamma = _eval("gamma", params, p).real
    A = gamma[1, 3, 3]
    B = 2.0 * gamma[1, 0, 3]
    C = gamma[1, 0, 0]
    disc = B * B - 4 * A * C
    if disc < 0:
        raise DomainError(f"no circular orbit at r={r}")
    roots = sorted(((-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)))
    omega = roots[1] if prograde else roots[0]
    g = _eval("g", params, p).real
    quad = g[0, 0] + 2 * omega * g[0, 3] + omega**2 * g[3, 3]
    if quad >= 0:
        raise DomainError(f"circular orbit at r={r} is not timelike")
    ut = 1.0 / math.sqrt(-quad)
    u = np.array([ut, 0.0, 0.0, omega * ut])
    return GeodesicState(p, TensorValue((UP,), u), "timelike")


def null_circular_state(params: KerrParams, r: float, prograde=True) -> GeodesicState:
    """Tangential null ray at radius r in the equatorial plane."""
    p = BLPoint(0.0, r, math.pi / 2, 0.0, params)
    g = _eval("g", params, p).real
    # g_tt + 2 Omega g_tphi + Omega^2 g_phiphi = 0
    A, B, C = g[3, 3], 2 * g[0, 3], g[0, 0]
    disc = B * B - 4 * A * C
    if disc < 0:
        raise DomainError(f"no null directions at r={r}")
    roots = sorted(((-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)))
    omega = roots[1] if prograde else roots[0]
    u = np.array([1.0, 0.0, 0.0, omega])
    return GeodesicState(p, TensorValue((UP,), u), "null")


def photon_orbit_radius(params: KerrParams, bracket, prograde=True, tol=1e-14) -> float:
    """Equatorial circular-photon-orbit radius inside the given bracket.

    Root of the radial geodesic equation evaluated on the tangential null
    direction: Gamma^r_tt + 2 Omega Gamma^r_tphi + Omega^2 Gamma^r_phiphi = 0
    with Omega the prograde/retrograde null angular velocity.
    """
    lo, hi = bracket
    if lo <= params.r_plus:
        raise DomainError("bracket must lie inside the exterior")

    def residual(r):
        p = BLPoint(0.0, r, math.pi / 2, 0.0, params)
        g = _eval("g", params, p).real
        A, B, C = g[3, 3], 2 * g[0, 3], g[0, 0]
        disc = B * B - 4 * A * C
        roots = sorted(((-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)))
        omega = roots[1] if prograde else roots[0]
        gamma = _eval("gamma", params, p).real
        return gamma[1, 0, 0] + 2 * omega * gamma[1, 0, 3] + omega**2 * gamma[1, 3, 3]

    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo * f_hi > 0:
        raise DomainError(f"no photon-orbit root in bracket {bracket}")
    return float(brentq(residual, lo, hi, xtol=tol))


def normalize_velocity(params: KerrParams, p: BLPoint, u_spatial, causal_type="timelike"):
    """Complete (u^r, u^theta, u^phi) to a future-directed 4-velocity.

    Solves the quadratic normalization condition for u^t > 0.
    """
    g = _eval("g", params, p).real
    ur, uth, uph = u_spatial
    A = g[0, 0]
    B = 2 * g[0, 3] * uph
    target = -1.0 if causal_type == "timelike" else 0.0
    C = g[1, 1] * ur**2 + g[2, 2] * uth**2 + g[3, 3] * uph**2 - target
    disc = B * B - 4 * A * C
    if disc < 0:
        raise DomainError("no real future-directed completion exists")
    # A = g_tt < 0 outside the ergoregion; take the root with u^t > 0
    ut = (-B - math.sqrt(disc)) / (2 * A)
    if ut <= 0:
        ut = (-B + math.sqrt(disc)) / (2 * A)
    if ut <= 0:
        raise DomainError("no future-directed completion exists")
    return GeodesicState(p, TensorValue((UP,), np.array([ut, ur, uth, uph])), causal_type)
