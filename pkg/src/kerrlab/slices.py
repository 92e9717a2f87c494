"""Vacuum constraint residuals for 3D initial-data slices.

A slice is given by samplers for the Riemannian 3-metric h and the second
fundamental form k.  The Hamiltonian residual scal_h + (tr_h k)^2 - |k|^2
and the momentum residual div(k) - d(tr_h k) are evaluated with nested
central finite differences of the samplers (no closed-form curvature is
assumed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_D3 = 3

_FD4 = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))


@dataclass(frozen=True)
class SliceData:
    """3-metric and extrinsic-curvature samplers on a 3D chart.

    h_sampler: point (length-3 array) -> symmetric positive 3x3 array.
    k_sampler: point -> symmetric 3x3 array.
    """

    h_sampler: object
    k_sampler: object
    chart: str = "cartesian"


def _sym_check(M, name, tol=1e-12):
    if np.max(np.abs(M - M.T)) > tol * max(1.0, np.max(np.abs(M))):
        raise DomainError(f"{name} sampler returned a non-symmetric matrix")


def _h_at(data, p):
    h = np.asarray(data.h_sampler(np.asarray(p, dtype=float)), dtype=float)
    _sym_check(h, "h")
    if np.min(np.linalg.eigvalsh(h)) <= 0:
        raise DomainError("3-metric is not positive definite at a sample point")
    return h


def _k_at(data, p):
    k = np.asarray(data.k_sampler(np.asarray(p, dtype=float)), dtype=float)
    _sym_check(k, "k")
    return k


def _fd_grad(f, p, step):
    """4th-order central gradient of an array-valued function; prepends the axis."""
    p = np.asarray(p, dtype=float)
    f0 = f(p)
    out = np.zeros((_D3,) + np.shape(f0))
    for c in range(_D3):
        acc = np.zeros_like(np.asarray(f0, dtype=float))
        for off, w in _FD4:
            q = p.copy()
            q[c] += off * step
            acc += w * np.asarray(f(q), dtype=float)
        out[c] = acc / step
    return out


def _christoffel(data, p, step):
    """Gamma^c_{ab} of the 3-metric at p via finite differences of h."""
    h = _h_at(data, p)
    hinv = np.linalg.inv(h)
    dh = _fd_grad(lambda q: _h_at(data, q), p, step)  # dh[c, a, b] = partial_c h_ab
    gamma = 0.5 * (
        np.einsum("cd,adb->cab", hinv, dh)
        + np.einsum("cd,bda->cab", hinv, dh)
        - np.einsum("cd,dab->cab", hinv, dh)
    )
    return gamma


def scalar_curvature(data: SliceData, p, step=1e-3) -> float:
    """Ricci scalar of h at p by nested finite differences."""
    h = _h_at(data, p)
    hinv = np.linalg.inv(h)
    gamma = _christoffel(data, p, step)
    dgamma = _fd_grad(lambda q: _christoffel(data, q, step), p, step)
    # R_ab = partial_c Gamma^c_ab - partial_a Gamma^c_cb + Gamma^c_cd Gamma^d_ab
    #        - Gamma^c_ad Gamma^d_cb
    ricci = np.zeros((_D3, _D3))
    for a in range(_D3):
        for b in range(_D3):
            s = 0.0
            for c in range(_D3):
                s += dgamma[c, c, a, b] - dgamma[a, c, c, b]
                for d in range(_D3):
                    s += gamma[c, c, d] * gamma[d, a, b] - gamma[c, a, d] * gamma[d, c, b]
            ricci[a, b] = s
    return float(np.einsum("ab,ab->", hinv, ricci))


def constraint_residual(data: SliceData, points, step=1e-3):
    """Hamiltonian and momentum constraint residuals at each sample point.

    Returns (hamiltonian: array of scalars, momentum: array of covectors).
    """
    hams, moms = [], []
    for p in points:
        p = np.asarray(p, dtype=float)
        h = _h_at(data, p)
        hinv = np.linalg.inv(h)
        k = _k_at(data, p)
        scal = scalar_curvature(data, p, step)
        trk = float(np.einsum("ab,ab->", hinv, k))
        ksq = float(np.einsum("ab,cd,ac,bd->", k, k, hinv, hinv))
        hams.append(scal + trk**2 - ksq)

        gamma = _christoffel(data, p, step)
        dk = _fd_grad(lambda q: _k_at(data, q), p, step)  # dk[c, a, b]
        # (div k)_a = h^{bc} nabla_b k_{ca} with
        # nabla_b k_{ca} = partial_b k_ca - Gamma^d_bc k_da - Gamma^d_ba k_cd
        nk = dk.copy()
        nk -= np.einsum("dbc,da->bca", gamma, k)
        nk -= np.einsum("dba,cd->bca", gamma, k)
        div_k = np.einsum("bc,bca->a", hinv, nk)
        dtrk = _fd_grad(lambda q: float(np.einsum("ab,ab->", np.linalg.inv(_h_at(data, q)), _k_at(data, q))), p, step)
        moms.append(div_k - dtrk)
    return np.array(hams), np.array(moms)


def flat_slice() -> SliceData:
    """Euclidean 3-space with vanishing extrinsic curvature."""
    return SliceData(
        h_sampler=lambda p: np.eye(3),
        k_sampler=lambda p: np.zeros((3, 3)),
        chart="cartesian",
    )


def schwarzschild_slice(m: float) -> SliceData:
    """Time-symmetric Schwarzschild slice h = f^-1 dr^2 + r^2 dOmega^2, k = 0.

    Chart order (r, theta, phi); scalar-flat, so the Hamiltonian residual
    vanishes in the continuum.
    """
    def h(p):
        r, th = p[0], p[1]
        if r <= 2 * m:
            raise DomainError("Schwarzschild slice sampler needs r > 2m")
        f = 1.0 - 2.0 * m / r
        return np.diag([1.0 / f, r**2, r**2 * np.sin(th) ** 2])

    return SliceData(h_sampler=h, k_sampler=lambda p: np.zeros((3, 3)), chart="schwarzschild-polar")


def round_sphere_slice(radius: float = 1.0) -> SliceData:
    """Round 3-sphere of the given radius with k = 0 (non-vacuum: scal = 6/radius^2).

    Chart order (chi, theta, phi) hyperspherical.
    """
    def h(p):
        chi, th = p[0], p[1]
        s = radius**2
        return np.diag([s, s * np.sin(chi) ** 2, s * np.sin(chi) ** 2 * np.sin(th) ** 2])

    return SliceData(h_sampler=h, k_sampler=lambda p: np.zeros((3, 3)), chart="hyperspherical")
