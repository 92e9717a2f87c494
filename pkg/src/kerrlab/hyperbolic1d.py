"""1+1-dimensional solution theory on the flat cylinder R x S^1.

Solvers for the wave operator P = (d_t + i a(t))^2 - d_x^2 + V(x) on the
periodic strip [0, T] x S^1 (circumference 2 pi):

* Cauchy problem (leapfrog, second order),
* Goursat (characteristic) problem in double-null coordinates,
* Dirac equation, both by squaring (solve D^2 v = f and set u = D v) and by
  a direct first-order characteristic evolution used as an oracle,
* advanced/retarded Green's operators with support diagnostics and the
  causal propagator G = G_+ - G_-,
* the formal-dual pairing residual <phi, P f> - <P phi, f>.

Clifford representation (fixed choice; any unitarily equivalent one works):
gamma^0 = i sigma_1, gamma^1 = sigma_2, so (gamma^0)^2 = -1, (gamma^1)^2 = +1
and the Dirac operator is D = gamma^0 (d_t + i a(t)) + gamma^1 d_x, with
D^2 = -[(d_t + i a)^2 - d_x^2].  Along a t = const slice D = -sigma (d_t + ia)
+ gamma^1 d_x where sigma = -gamma^0 is Clifford multiplication by the unit
normal; sigma^{-1} = gamma^0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StabilityError

GAMMA0 = np.array([[0.0, 1j], [1j, 0.0]])
GAMMA1 = np.array([[0.0, -1j], [1j, 0.0]])
SIGMA = -GAMMA0  # Clifford multiplication by the t = 0 unit normal
SIGMA_INV = GAMMA0


@dataclass(frozen=True)
class Grid1p1:
    """Uniform lattice on [0, T] x S^1 with N_x points on the circle."""

    T: float
    n_x: int
    n_t: int

    def __post_init__(self):
        if self.T <= 0:
            raise DomainError("time extent must be positive")
        if self.n_x < 16:
            raise DomainError("need at least 16 spatial points")
        if self.n_t < 2:
            raise DomainError("need at least 2 time steps")
        if self.cfl > 0.9:
            raise DomainError(f"cfl = {self.cfl:.3f} exceeds 0.9")

    @property
    def h_x(self):
        return 2.0 * math.pi / self.n_x

    @property
    def h_t(self):
        return self.T / self.n_t

    @property
    def cfl(self):
        return self.h_t / self.h_x

    @property
    def x(self):
        return np.arange(self.n_x) * self.h_x

    @property
    def t(self):
        return np.arange(self.n_t + 1) * self.h_t


def sample(grid: Grid1p1, func):
    """Sample func(t, x) on the full space-time lattice, shape (n_t+1, n_x)."""
    T, X = np.meshgrid(grid.t, grid.x, indexing="ij")
    return np.asarray(func(T, X), dtype=complex)


def _dxx(u, h):
    return (np.roll(u, -1, axis=-1) - 2.0 * u + np.roll(u, 1, axis=-1)) / h**2


def _dx(u, h):
    return (np.roll(u, -1, axis=-1) - np.roll(u, 1, axis=-1)) / (2.0 * h)


def _dx4(u, h):
    return (
        -np.roll(u, -2, axis=-1)
        + 8.0 * np.roll(u, -1, axis=-1)
        - 8.0 * np.roll(u, 1, axis=-1)
        + np.roll(u, 2, axis=-1)
    ) / (12.0 * h)


def _dxx4(u, h):
    return (
        -np.roll(u, -2, axis=-1)
        + 16.0 * np.roll(u, -1, axis=-1)
        - 30.0 * u
        + 16.0 * np.roll(u, 1, axis=-1)
        - np.roll(u, 2, axis=-1)
    ) / (12.0 * h**2)


def _twist_value(twist, t):
    return 0.0 if twist is None else float(twist(t))


def _twist_rate(twist, t, h):
    if twist is None:
        return 0.0
    return (float(twist(t + h)) - float(twist(t - h))) / (2.0 * h)


def cauchy_solve(grid: Grid1p1, f=None, u0=None, u1=None, potential=None, twist=None):
    """Solve (d_t + i a(t))^2 u - d_x^2 u + V(x) u = f with u(0) = u0, d_t u(0) = u1.

    f: None or array (n_t+1, n_x) sampled at the time levels; u0, u1: arrays on
    the circle (default zero).  Returns the field on the full lattice,
    shape (n_t+1, n_x).  Leapfrog with the first-order twist term handled by a
    centered implicit average (scalar solve); second-order accurate.
    """
    n_x, n_t, h_x, h_t = grid.n_x, grid.n_t, grid.h_x, grid.h_t
    u0 = np.zeros(n_x, dtype=complex) if u0 is None else np.asarray(u0, dtype=complex)
    u1 = np.zeros(n_x, dtype=complex) if u1 is None else np.asarray(u1, dtype=complex)
    if u0.shape != (n_x,) or u1.shape != (n_x,):
        raise DomainError(f"initial data must have shape ({n_x},)")
    if f is not None:
        f = np.asarray(f, dtype=complex)
        if f.shape != (n_t + 1, n_x):
            raise DomainError(f"source must have shape ({n_t + 1}, {n_x})")
    V = np.zeros(n_x) if potential is None else np.asarray(potential(grid.x), dtype=float)

    out = np.empty((n_t + 1, n_x), dtype=complex)
    out[0] = u0

    # Taylor start: u_tt(0) = f - V u0 + u_xx(0) - 2 i a u1 - (i a' - a^2) u0
    a0 = _twist_value(twist, 0.0)
    ap0 = _twist_rate(twist, 0.0, h_t)
    f0 = f[0] if f is not None else 0.0
    utt = f0 - V * u0 + _dxx(u0, h_x) - 2j * a0 * u1 - (1j * ap0 - a0**2) * u0
    out[1] = u0 + h_t * u1 + 0.5 * h_t**2 * utt

    for n in range(1, n_t):
        a = _twist_value(twist, n * h_t)
        ap = _twist_rate(twist, n * h_t, h_t)
        fn = f[n] if f is not None else 0.0
        u, up = out[n], out[n - 1]
        rhs = fn - V * u + _dxx(u, h_x) - (1j * ap - a**2) * u
        # centered implicit treatment of the 2 i a d_t term
        denom = 1.0 + 1j * a * h_t
        out[n + 1] = (2.0 * u - up + h_t**2 * rhs + 1j * a * h_t * up) / denom
    if not np.all(np.isfinite(out)):
        raise StabilityError("non-finite values in the Cauchy solution")
    return out


def apply_wave_operator(grid: Grid1p1, u, potential=None, twist=None):
    """Discrete P u at the interior time levels 1..n_t-1, shape (n_t-1, n_x)."""
    u = np.asarray(u, dtype=complex)
    h_t, h_x = grid.h_t, grid.h_x
    V = np.zeros(grid.n_x) if potential is None else np.asarray(potential(grid.x), dtype=float)
    utt = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h_t**2
    ut = (u[2:] - u[:-2]) / (2.0 * h_t)
    out = np.empty((grid.n_t - 1, grid.n_x), dtype=complex)
    for n in range(1, grid.n_t):
        a = _twist_value(twist, n * h_t)
        ap = _twist_rate(twist, n * h_t, h_t)
        out[n - 1] = (
            utt[n - 1]
            + 2j * a * ut[n - 1]
            + (1j * ap - a**2) * u[n]
            - _dxx(u[n], h_x)
            + V * u[n]
        )
    return out


def support_radius(u_slice, x, center, threshold):
    """Largest circle distance from `center` at which |u| exceeds the threshold."""
    mask = np.abs(u_slice) > threshold
    if not np.any(mask):
        return 0.0
    d = np.abs((x[mask] - center + math.pi) % (2.0 * math.pi) - math.pi)
    return float(np.max(d))


def cone_containment(grid: Grid1p1, u, center, radius0, collar_cells=2, rel_threshold=1e-3):
    """Check supp u(t) stays inside the light cone of the initial support.

    Returns the worst excess (in cells) of the numerical support radius over
    radius0 + t + collar_cells * h_x, using a relative amplitude threshold.
    The default threshold 1e-3 defines numerical support as the region holding
    all but one part in 10^3 of the peak amplitude: the leapfrog scheme has a
    dispersive (Airy-type) front of width ~ (t/h)^(1/3) cells straddling the
    exact cone whose amplitude decays super-exponentially with distance, and
    below roughly that level the front, not the causal propagation, sets the
    support radius.  Everything beyond one cell per time step is exactly zero
    (the hard discrete domain of dependence).
    """
    u = np.asarray(u)
    thresh = rel_threshold * np.max(np.abs(u))
    worst = -np.inf
    for n in range(u.shape[0]):
        rad = support_radius(u[n], grid.x, center, thresh)
        allowed = min(radius0 + n * grid.h_t + collar_cells * grid.h_x, math.pi)
        worst = max(worst, (rad - allowed) / grid.h_x)
    return worst


# ---------------------------------------------------------------------------
# Goursat problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoursatField:
    """Solution of the double-null problem on the rectangle [0,U] x [0,V]."""

    uu: np.ndarray  # null coordinate u = t - x values
    vv: np.ndarray  # null coordinate v = t + x values
    phi: np.ndarray  # shape (len(uu), len(vv))

    def on_tx(self, i, j):
        """(t, x) of grid node (i, j)."""
        return 0.5 * (self.uu[i] + self.vv[j]), 0.5 * (self.vv[j] - self.uu[i])


def goursat_solve(p, q, extent, n, f=None, initial_fill=0.0) -> GoursatField:
    """Solve d_u d_v phi = f/4 on [0,extent]^2 with phi(u,0) = p(u), phi(0,v) = q(v).

    p, q are callables on the two null rays from the vertex and must agree at
    the vertex.  f, when given, is a callable f(t, x) (the wave-operator
    source; the double-null right-hand side is f/4).  No derivative data is
    accepted along the rays.  `initial_fill` seeds the interior array and is
    irrelevant to the result (the scheme is explicit); it exists to document
    uniqueness on the future of the rays.
    """
    if extent <= 0:
        raise DomainError("extent must be positive")
    if n < 8:
        raise DomainError("need at least 8 null cells")
    h = extent / n
    uu = np.arange(n + 1) * h
    vv = np.arange(n + 1) * h
    pv = np.asarray([p(u) for u in uu], dtype=complex)
    qv = np.asarray([q(v) for v in vv], dtype=complex)
    if abs(pv[0] - qv[0]) > 1e-12 * max(1.0, abs(pv[0])):
        raise DomainError("null data disagree at the vertex")
    phi = np.full((n + 1, n + 1), complex(initial_fill))
    phi[:, 0] = pv
    phi[0, :] = qv
    for i in range(n):
        for j in range(n):
            if f is None:
                mid = 0.0
            else:
                um, vm = uu[i] + 0.5 * h, vv[j] + 0.5 * h
                t, x = 0.5 * (um + vm), 0.5 * (vm - um)
                mid = f(t, x) / 4.0
            phi[i + 1, j + 1] = phi[i + 1, j] + phi[i, j + 1] - phi[i, j] + h * h * mid
    return GoursatField(uu=uu, vv=vv, phi=phi)


# ---------------------------------------------------------------------------
# Dirac equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiracData1p1:
    """Initial spinor u0 (shape (2, n_x)), optional source f(t, x) -> (2,) or
    sampled (n_t+1, 2, n_x), optional connection coefficient a(t)."""

    u0: np.ndarray
    f: object = None
    connection: object = None

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=complex)
        if u0.ndim != 2 or u0.shape[0] != 2:
            raise DomainError("initial spinor must have shape (2, n_x)")
        if not np.all(np.isfinite(u0)):
            raise DomainError("non-finite initial spinor")
        object.__setattr__(self, "u0", u0)

    def source_samples(self, grid: Grid1p1):
        if self.f is None:
            return None
        f = np.asarray(self.f, dtype=complex) if not callable(self.f) else None
        if f is None:
            out = np.empty((grid.n_t + 1, 2, grid.n_x), dtype=complex)
            for n, t in enumerate(grid.t):
                out[n] = np.asarray(self.f(t, grid.x), dtype=complex)
            return out
        if f.shape != (grid.n_t + 1, 2, grid.n_x):
            raise DomainError("sampled Dirac source has the wrong shape")
        return f


def dirac_solve_direct(data: DiracData1p1, grid: Grid1p1):
    """First-order evolution of D u = f (oracle route).

    d_t u = -i a u - sigma_3 d_x u - gamma^0 f componentwise: the two spinor
    components are advected at speeds +1 and -1.  Classical RK4 in time with
    fourth-order central x-derivatives, so the time-stepping error dominates.
    """
    if data.u0.shape[1] != grid.n_x:
        raise DomainError("initial spinor does not match the grid")
    fs = data.source_samples(grid)
    a_of = data.connection
    h_t, h_x = grid.h_t, grid.h_x

    def f_at(time):
        if fs is None:
            return None
        # linear interpolation between sampled levels (sufficient: RK4 stage
        # times are midpoints and the scheme order is limited by the data)
        s = time / h_t
        n = min(int(s), grid.n_t - 1)
        w = s - n
        return (1.0 - w) * fs[n] + w * fs[n + 1]

    def rhs(time, u):
        a = _twist_value(a_of, time)
        du = np.empty_like(u)
        du[0] = -1j * a * u[0] - _dx4(u[0], h_x)
        du[1] = -1j * a * u[1] + _dx4(u[1], h_x)
        fv = f_at(time)
        if fv is not None:
            g0f = np.einsum("ab,bx->ax", GAMMA0, fv)
            du -= g0f
        return du

    out = np.empty((grid.n_t + 1, 2, grid.n_x), dtype=complex)
    out[0] = data.u0
    for n in range(grid.n_t):
        t0 = n * h_t
        u = out[n]
        k1 = rhs(t0, u)
        k2 = rhs(t0 + 0.5 * h_t, u + 0.5 * h_t * k1)
        k3 = rhs(t0 + 0.5 * h_t, u + 0.5 * h_t * k2)
        k4 = rhs(t0 + h_t, u + h_t * k3)
        out[n + 1] = u + (h_t / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise StabilityError("non-finite values in the direct Dirac solution")
    return out


def dirac_solve_by_squaring(data: DiracData1p1, grid: Grid1p1):
    """Solve D u = f via the squaring construction.

    Solve D^2 v = f, i.e. (d_t + ia)^2 v - d_x^2 v = -f componentwise, with
    v(0) = 0 and (d_t + ia) v(0) = -sigma^{-1} u0; then u = D v.  Along t = 0
    this gives u = u0 and D u = D^2 v = f everywhere.
    """
    if data.u0.shape[1] != grid.n_x:
        raise DomainError("initial spinor does not match the grid")
    fs = data.source_samples(grid)
    a_of = data.connection

    v1 = -np.einsum("ab,bx->ax", SIGMA_INV, data.u0)  # (d_t + ia) v at t=0; v=0 there
    v = np.empty((grid.n_t + 1, 2, grid.n_x), dtype=complex)
    for c in range(2):
        src = None if fs is None else -fs[:, c]
        v[:, c] = cauchy_solve(grid, f=src, u0=None, u1=v1[c], twist=a_of)

    # u = D v = gamma^0 (d_t + ia) v + gamma^1 d_x v, centered interior time
    # stencil, one-sided second order at the temporal ends
    h_t, h_x = grid.h_t, grid.h_x
    vt = np.empty_like(v)
    vt[1:-1] = (v[2:] - v[:-2]) / (2.0 * h_t)
    vt[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h_t)
    vt[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h_t)
    a_vals = np.array([_twist_value(a_of, t) for t in grid.t])
    dt_twist = vt + 1j * a_vals[:, None, None] * v
    u = np.einsum("ab,nbx->nax", GAMMA0, dt_twist) + np.einsum(
        "ab,nbx->nax", GAMMA1, _dx(v, h_x)
    )
    return u


def apply_dirac(data_connection, grid: Grid1p1, u):
    """Discrete D u at interior time levels 1..n_t-1 (second-order stencils)."""
    u = np.asarray(u, dtype=complex)
    h_t, h_x = grid.h_t, grid.h_x
    ut = (u[2:] - u[:-2]) / (2.0 * h_t)
    a_vals = np.array([_twist_value(data_connection, t) for t in grid.t[1:-1]])
    dt_twist = ut + 1j * a_vals[:, None, None] * u[1:-1]
    return np.einsum("ab,nbx->nax", GAMMA0, dt_twist) + np.einsum(
        "ab,nbx->nax", GAMMA1, _dx(u[1:-1], h_x)
    )


# ---------------------------------------------------------------------------
# Green's operators
# ---------------------------------------------------------------------------


def _source_time_support(f):
    nz = np.where(np.max(np.abs(f), axis=1) > 0.0)[0]
    return (int(nz[0]), int(nz[-1])) if nz.size else None


def green(grid: Grid1p1, direction: str, f, potential=None):
    """Retarded (G_+) or advanced (G_-) Green's operator applied to f.

    G_+ f solves P u = f with u = 0 to the past of supp f; G_- f mirrors to
    the future.  The source must vanish on a collar at both temporal ends so
    that the zero-data region exists on the grid.
    """
    if direction not in ("retarded", "advanced"):
        raise DomainError(f"unknown direction {direction!r}")
    f = np.asarray(f, dtype=complex)
    if f.shape != (grid.n_t + 1, grid.n_x):
        raise DomainError("source shape does not match the grid")
    supp = _source_time_support(f)
    if supp is not None and (supp[0] < 2 or supp[1] > grid.n_t - 2):
        raise DomainError("source support touches the temporal boundary")
    if direction == "retarded":
        return cauchy_solve(grid, f=f, potential=potential)
    # advanced: time-reflect, solve retarded, reflect back (the operator has
    # no first-order time term when twist is absent, so P is reflection-even)
    rev = cauchy_solve(grid, f=f[::-1], potential=potential)
    return rev[::-1]


def causal_propagator(grid: Grid1p1, f, potential=None):
    """G f = G_+ f - G_- f."""
    return green(grid, "retarded", f, potential) - green(grid, "advanced", f, potential)


def green_clause_residuals(grid: Grid1p1, f, potential=None):
    """Max-norm residuals of the three defining clauses for both directions.

    Returns a dict with keys 'GP_retarded', 'PG_retarded', 'support_retarded'
    (and the advanced mirrors) plus 'propagator_kernel' for P(Gf).
    Support excesses are in cells beyond the causal collar.
    """
    f = np.asarray(f, dtype=complex)
    scale = float(np.max(np.abs(f)))
    if scale == 0.0:
        raise DomainError("empty source")
    out = {}
    supp = _source_time_support(f)
    nz_x = np.where(np.max(np.abs(f), axis=0) > 0)[0]
    xs = grid.x[nz_x]
    center = float(np.angle(np.mean(np.exp(1j * xs))) % (2.0 * math.pi))
    radius0 = max(
        support_radius(np.max(np.abs(f), axis=0), grid.x, center, 0.0), grid.h_x
    )

    for direction, sgn in (("retarded", 1), ("advanced", -1)):
        u = green(grid, direction, f, potential)
        # clause (ii): P G f = f at interior times
        Pu = apply_wave_operator(grid, u, potential=potential)
        out[f"PG_{direction}"] = float(np.max(np.abs(Pu - f[1:-1])) / scale)
        # clause (i): G P f = f for compactly supported f; P f computed
        # discretely (padding by zero rows matches the compact support)
        Pf = apply_wave_operator(grid, f, potential=potential)
        Pf_full = np.zeros_like(f)
        Pf_full[1:-1] = Pf
        gpf = green(grid, direction, Pf_full, potential)
        out[f"GP_{direction}"] = float(np.max(np.abs(gpf - f)) / scale)
        # clause (iii): support containment in J^{+/-}(supp f) with a collar
        # (same numerical-support threshold as cone_containment)
        thr = 1e-3 * max(float(np.max(np.abs(u))), scale)
        worst = -np.inf
        for n in range(grid.n_t + 1):
            if direction == "retarded":
                gap = (n - supp[0]) * grid.h_t
            else:
                gap = (supp[1] - n) * grid.h_t
            allowed = min(radius0 + max(gap, 0.0) + 2 * grid.h_x, math.pi)
            if gap < 0:
                allowed = 0.0 if np.max(np.abs(u[n])) > thr else math.pi
            rad = support_radius(u[n], grid.x, center, thr)
            worst = max(worst, (rad - allowed) / grid.h_x)
        out[f"support_{direction}"] = float(worst)

    g = causal_propagator(grid, f, potential)
    Pg = apply_wave_operator(grid, g, potential=potential)
    out["propagator_kernel"] = float(np.max(np.abs(Pg)) / scale)
    return out


# ---------------------------------------------------------------------------
# formal dual
# ---------------------------------------------------------------------------


def formal_dual_residual(grid: Grid1p1, f, phi, potential=None):
    """|<phi, P f> - <P phi, f>| on the cylinder.

    Both fields must vanish on a 2-level collar at the temporal ends (compact
    support inside the strip).  P is applied with symmetric fourth-order
    stencils; because the stencils are self-adjoint with respect to the
    uniform lattice inner product, the discrete identity mirrors the
    continuum integration by parts and the residual is at rounding level.
    """
    f = np.asarray(f, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    if f.shape != phi.shape or f.shape != (grid.n_t + 1, grid.n_x):
        raise DomainError("fields must be sampled on the full lattice")
    for name, arr in (("f", f), ("phi", phi)):
        if np.max(np.abs(arr[:2])) > 0 or np.max(np.abs(arr[-2:])) > 0:
            raise DomainError(f"{name} must vanish on the temporal collar")
    V = np.zeros(grid.n_x) if potential is None else np.asarray(potential(grid.x), dtype=float)

    def apply4(u):
        out = np.zeros_like(u)
        out[2:-2] = (
            -u[4:] + 16.0 * u[3:-1] - 30.0 * u[2:-2] + 16.0 * u[1:-3] - u[:-4]
        ) / (12.0 * grid.h_t**2)
        return out - _dxx4(u, grid.h_x) + V[None, :] * u

    w = grid.h_t * grid.h_x
    pair_a = w * np.sum(phi * apply4(f))
    pair_b = w * np.sum(apply4(phi) * f)
    return float(abs(pair_a - pair_b))
