"""Dense point-value tensor algebra in a four dimensional chart.

Tensors are small dense arrays of complex components together with an
explicit up/down flag per slot.  The orientation convention used by the
Hodge dual is eps_{t r theta phi} = +sqrt|g| (coordinate order of the
chart is positively oriented).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartMismatchError

DIM = 4

UP = "u"
DOWN = "d"

# Levi-Civita symbol, eps[0,1,2,3] = +1.
_LEVI_CIVITA = np.zeros((DIM,) * 4)
for _perm in itertools.permutations(range(DIM)):
    _sign = 1.0
    _p = list(_perm)
    for _i in range(DIM):
        for _j in range(_i + 1, DIM):
            if _p[_i] > _p[_j]:
                _sign = -_sign
    _LEVI_CIVITA[_perm] = _sign


@dataclass(frozen=True)
class TensorValue:
    """Dense tensor at a single chart point.

    components has shape (4,)*rank and complex dtype; variance is a tuple
    of 'u'/'d' flags, one per slot.
    """

    variance: tuple
    components: np.ndarray
    basis: str = "bl"

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=complex)
        if comp.shape != (DIM,) * len(self.variance):
            raise ValueError(
                f"components shape {comp.shape} does not match rank {len(self.variance)}"
            )
        if not np.all(np.isfinite(comp)):
            raise ValueError("non-finite tensor components")
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "variance", tuple(self.variance))

    @property
    def rank(self):
        return len(self.variance)

    def real_part(self, tol=1e-12):
        """Return the real components, asserting the imaginary part is below tol."""
        scale = max(1.0, np.max(np.abs(self.components)))
        if np.max(np.abs(self.components.imag)) > tol * scale:
            raise ValueError("tensor has a non-negligible imaginary part")
        return self.components.real


@dataclass(frozen=True)
class MetricData:
    """Metric, inverse, volume density and Christoffel symbols at a point.

    christoffel[c, a, b] = Gamma^c_{ab}.
    """

    g: TensorValue
    g_inv: TensorValue
    sqrt_abs_det: float
    christoffel: np.ndarray
    basis: str = "bl"
    point: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.sqrt_abs_det <= 0:
            raise ValueError("sqrt_abs_det must be positive")


def _check_chart(t: TensorValue, metric: MetricData):
    if t.basis != metric.basis:
        raise ChartMismatchError(f"tensor chart {t.basis!r} != metric chart {metric.basis!r}")


def _check_slots(t: TensorValue, slots):
    for s in slots:
        if not (0 <= s < t.rank):
            raise IndexError(f"slot {s} out of range for rank {t.rank}")


def _contract_slot(comp, matrix, slot):
    # result[..., i, ...] = matrix[i, j] comp[..., j, ...]
    moved = np.moveaxis(comp, slot, 0)
    out = np.tensordot(matrix, moved, axes=(1, 0))
    return np.moveaxis(out, 0, slot)


def _permutation_sign(perm):
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def _projector(comp, slots, antisym):
    slots = list(slots)
    out = np.zeros_like(comp)
    axes_base = list(range(comp.ndim))
    for perm in itertools.permutations(range(len(slots))):
        axes = axes_base.copy()
        for pos, p in enumerate(perm):
            axes[slots[pos]] = slots[p]
        term = np.transpose(comp, axes)
        if antisym:
            out += _permutation_sign(perm) * term
        else:
            out += term
    out /= float(math.factorial(len(slots)))
    return out


def index_ops(t: TensorValue, metric: MetricData, action: str, slots) -> TensorValue:
    """Raise/lower or (anti)symmetrize the given slots of a tensor.

    action is one of 'raise', 'lower', 'symmetrize', 'antisymmetrize'.
    (Anti)symmetrization is the exact idempotent projector over the slots.
    """
    _check_chart(t, metric)
    slots = list(slots)
    _check_slots(t, slots)
    comp = t.components.copy()
    variance = list(t.variance)

    if action == "raise":
        ginv = metric.g_inv.components.real
        for s in slots:
            if variance[s] == UP:
                raise ValueError(f"slot {s} is already up")
            comp = _contract_slot(comp, ginv, s)
            variance[s] = UP
    elif action == "lower":
        g = metric.g.components.real
        for s in slots:
            if variance[s] == DOWN:
                raise ValueError(f"slot {s} is already down")
            comp = _contract_slot(comp, g, s)
            variance[s] = DOWN
    elif action in ("symmetrize", "antisymmetrize"):
        if len(set(variance[s] for s in slots)) > 1:
            raise ValueError("cannot (anti)symmetrize slots of mixed variance")
        comp = _projector(comp, slots, antisym=(action == "antisymmetrize"))
    else:
        raise ValueError(f"unknown action {action!r}")

    return TensorValue(tuple(variance), comp, t.basis)


def hodge_dual2(F: TensorValue, metric: MetricData, antisym_tol=1e-10) -> TensorValue:
    """Hodge dual of an antisymmetric rank-2 down-down tensor.

    (*F)_ab = 1/2 eps_{ab}{}^{cd} F_cd with eps_{0123} = +sqrt|g| in the
    chart coordinate order.
    """
    _check_chart(F, metric)
    if F.variance != (DOWN, DOWN):
        raise ValueError("hodge_dual2 expects a down-down rank-2 tensor")
    comp = F.components
    scale = max(1.0, np.max(np.abs(comp)))
    if np.max(np.abs(comp + comp.T)) > antisym_tol * scale:
        raise ValueError("input 2-form is not antisymmetric within tolerance")
    ginv = metric.g_inv.components.real
    eps = _LEVI_CIVITA * metric.sqrt_abs_det
    # eps_{ab}{}^{ef} = eps_{abcd} g^{ce} g^{df}
    eps_mixed = np.einsum("abcd,ce,df->abef", eps, ginv, ginv)
    dual = 0.5 * np.einsum("abcd,cd->ab", eps_mixed, comp)
    return TensorValue((DOWN, DOWN), dual, F.basis)


_FD4_OFFSETS = (-2, -1, 1, 2)
_FD4_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
_FD2_OFFSETS = (-1, 1)
_FD2_WEIGHTS = (-0.5, 0.5)


def cov_deriv_fd(field, p, metric_provider, step, order=4) -> TensorValue:
    """Covariant derivative of a point-sampled tensor field by finite differences.

    field: point -> TensorValue; p: length-4 chart point; metric_provider:
    point -> MetricData (christoffel must be populated).  The derivative
    slot (down) is prepended: result_{c a...} = (nabla_c T)_{a...}.
    Central differences of the stated order plus analytic Christoffel terms.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if order == 4:
        offsets, weights = _FD4_OFFSETS, _FD4_WEIGHTS
    elif order == 2:
        offsets, weights = _FD2_OFFSETS, _FD2_WEIGHTS
    else:
        raise ValueError("order must be 2 or 4")

    p = np.asarray(p, dtype=float)
    t0 = field(p)
    metric = metric_provider(p)
    _check_chart(t0, metric)
    gamma = metric.christoffel
    rank = t0.rank

    partial = np.zeros((DIM,) + (DIM,) * rank, dtype=complex)
    for c in range(DIM):
        acc = np.zeros((DIM,) * rank, dtype=complex)
        for off, w in zip(offsets, weights):
            q = p.copy()
            q[c] += off * step
            acc += w * field(q).components
        partial[c] = acc / step

    result = partial.copy()
    for slot, var in enumerate(t0.variance):
        # contract Gamma with the tensor's slot, broadcast over the new c slot
        moved = np.moveaxis(t0.components, slot, 0)
        if var == UP:
            corr = np.tensordot(gamma, moved, axes=(2, 0))  # [a, c, rest]
            corr = np.moveaxis(corr, 0, 1)  # [c, a, rest]
            corr = np.moveaxis(corr, 1, slot + 1)
            result += corr
        else:
            corr = np.tensordot(gamma, moved, axes=(0, 0))  # [c, b, rest]
            corr = np.moveaxis(corr, 1, slot + 1)
            result -= corr

    return TensorValue((DOWN,) + t0.variance, result, t0.basis)
