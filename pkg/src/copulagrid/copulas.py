"""Checkerboard copula measures on the unit cube.

A checkerboard copula of order ``n`` over a d-element index subset stores one
mass per cell of the uniform n^d grid; cell ``(k_1, ..., k_d)`` (zero-based)
covers the half-open box ``prod_j (k_j/n, (k_j+1)/n]``.  Mass is uniform
within each cell, which makes every operation here exact at grid nodes.

Construction enforces shape, nonnegativity, and total mass; the uniform-margin
requirement is checked by :func:`validate_copula`, which reports instead of
raising so that broken inputs can be diagnosed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CompatibilityError, DomainError, InternalError, ValidationError
from .measures import MASS_TOL, TensorMeasure, canonical_labels

#: margin deviation accepted by validate_copula
MARGIN_TOL = 1e-12


class CheckerboardCopula:
    """Order-``n`` checkerboard measure over an ordered index subset."""

    __slots__ = ("labels", "order", "mass")

    def __init__(self, labels, order: int, mass):
        labels = canonical_labels(labels)
        order = int(order)
        if order < 1:
            raise ValidationError(f"order must be >= 1, got {order}")
        arr = np.asarray(mass, dtype=float)
        expected = (order,) * len(labels)
        if arr.shape != expected:
            raise ValidationError(f"mass shape {arr.shape} does not match {expected}")
        if np.any(arr < 0) or np.any(~np.isfinite(arr)):
            raise ValidationError("cell masses must be finite and nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"total mass is {total!r}, expected 1")
        arr = arr.copy()
        arr.setflags(write=False)
        self.labels = labels
        self.order = order
        self.mass = arr

    @property
    def ndim(self) -> int:
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, CheckerboardCopula):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.order == other.order
            and np.array_equal(self.mass, other.mass)
        )

    __hash__ = None

    def __repr__(self):
        return f"CheckerboardCopula(labels={self.labels!r}, order={self.order})"


def make_independence(labels: Iterable, order: int) -> CheckerboardCopula:
    """Product copula: every cell carries ``n**(-d)``."""
    labels = canonical_labels(labels)
    n, d = int(order), len(labels)
    mass = np.full((n,) * d, float(n) ** (-d))
    return CheckerboardCopula(labels, n, mass)


def make_comonotone(labels: Iterable, order: int) -> CheckerboardCopula:
    """Diagonal copula: cells ``(k, ..., k)`` carry ``1/n`` each."""
    labels = canonical_labels(labels)
    n, d = int(order), len(labels)
    mass = np.zeros((n,) * d)
    for k in range(n):
        mass[(k,) * d] = 1.0 / n
    return CheckerboardCopula(labels, n, mass)


def make_countermonotone(labels: Iterable, order: int) -> CheckerboardCopula:
    """Antidiagonal copula; only defined for two-element index subsets."""
    labels = canonical_labels(labels)
    if len(labels) != 2:
        raise CompatibilityError(
            f"countermonotone copula needs exactly 2 labels, got {len(labels)}"
        )
    n = int(order)
    mass = np.zeros((n, n))
    for k in range(n):
        mass[k, n - 1 - k] = 1.0 / n
    return CheckerboardCopula(labels, n, mass)


@dataclass(frozen=True)
class ValidationIssue:
    where: str
    deviation: float
    message: str


@dataclass(frozen=True)
class CopulaValidationReport:
    passed: bool
    issues: tuple
    max_deviation: float

    def __bool__(self):
        return self.passed


def validate_copula(c: CheckerboardCopula) -> CopulaValidationReport:
    """Check nonnegativity, total mass, and uniform margins; never raises.

    Each failed check is reported with the offending axis or cell and the
    numeric deviation.
    """
    issues = []
    max_dev = 0.0
    neg = np.argwhere(c.mass < 0)
    for cell in neg[:8]:
        val = float(c.mass[tuple(cell)])
        issues.append(
            ValidationIssue(f"cell {tuple(int(i) for i in cell)}", -val, "negative mass")
        )
        max_dev = max(max_dev, -val)
    total = float(c.mass.sum())
    if abs(total - 1.0) > MASS_TOL:
        issues.append(ValidationIssue("total", abs(total - 1.0), f"total mass {total!r}"))
        max_dev = max(max_dev, abs(total - 1.0))
    n = c.order
    target = 1.0 / n
    for axis, label in enumerate(c.labels):
        others = tuple(i for i in range(c.ndim) if i != axis)
        margin = c.mass.sum(axis=others) if others else c.mass
        dev = float(np.max(np.abs(margin - target)))
        if dev > MARGIN_TOL:
            k = int(np.argmax(np.abs(margin - target)))
            issues.append(
                ValidationIssue(
                    f"axis {label!r}",
                    dev,
                    f"margin cell {k} has mass {float(margin[k])!r}, expected {target!r}",
                )
            )
        max_dev = max(max_dev, dev)
    return CopulaValidationReport(passed=not issues, issues=tuple(issues), max_deviation=max_dev)


def marginalize_copula(c: CheckerboardCopula, labels: Iterable) -> CheckerboardCopula:
    """Sum out the axes not in ``labels``; the result is again a copula.

    Axes are dropped one at a time from the highest label down, matching the
    reduction order of tensor marginalization.
    """
    target = canonical_labels(labels)
    if not set(target) <= set(c.labels):
        raise CompatibilityError(f"{target!r} is not a subset of {c.labels!r}")
    mass = c.mass
    for i in reversed(range(len(c.labels))):
        if c.labels[i] not in target:
            mass = mass.sum(axis=i)
    return CheckerboardCopula(target, c.order, mass)


def cdf_eval_copula(c: CheckerboardCopula, u: Sequence[float]) -> float:
    """CDF of the copula at ``u``: full cells plus multilinear boundary parts.

    Exact at grid nodes ``k/n`` (the value is then a plain partial sum of cell
    masses); continuous and 1-Lipschitz in each coordinate in between.
    """
    if len(u) != c.ndim:
        raise CompatibilityError(f"point has {len(u)} coordinates, copula has {c.ndim}")
    n = c.order
    bounds = np.arange(n + 1) / n
    val = c.mass
    for uj in u:
        uj = float(uj)
        if math.isnan(uj) or uj < 0.0 or uj > 1.0:
            raise DomainError(f"copula CDF argument {uj!r} outside [0, 1]")
        w = np.zeros(n)
        if uj == 1.0:
            w[:] = 1.0
        else:
            cell = int(np.searchsorted(bounds, uj, side="right")) - 1
            w[:cell] = 1.0
            frac = (uj - bounds[cell]) * n
            w[cell] = min(max(frac, 0.0), 1.0)
        val = np.tensordot(val, w, axes=([0], [0]))
    return float(min(max(float(val), 0.0), 1.0))


def to_tensor_measure(c: CheckerboardCopula) -> TensorMeasure:
    """Atomize at cell upper corners ``(k+1)/n``; CDFs agree at grid nodes."""
    n = c.order
    axis = np.arange(1, n + 1) / n
    return TensorMeasure(c.labels, (axis,) * c.ndim, c.mass)


def fit_uniform_margins(mass, max_dev: float = 5e-15, max_iter: int = 20000) -> np.ndarray:
    """Rescale axis slices until every margin is uniform (proportional fitting).

    Requires a nonnegative tensor whose support admits uniform margins; a
    strictly positive tensor always does.  Convergence is geometric, so the
    returned margins deviate from ``1/n`` by far less than the validation
    tolerance.
    """
    arr = np.array(mass, dtype=float)
    if arr.ndim < 1 or len(set(arr.shape)) != 1:
        raise ValidationError(f"tensor must be hypercubic, got shape {arr.shape}")
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ValidationError("tensor entries must be finite and nonnegative")
    if arr.sum() <= 0:
        raise ValidationError("tensor must carry positive mass")
    n = arr.shape[0]
    target = 1.0 / n
    for _ in range(max_iter):
        worst = 0.0
        for axis in range(arr.ndim):
            others = tuple(i for i in range(arr.ndim) if i != axis)
            margin = arr.sum(axis=others) if others else arr
            if np.any(margin <= 0):
                raise ValidationError("a zero margin slice cannot be rescaled")
            shape = [1] * arr.ndim
            shape[axis] = n
            arr = arr * (target / margin).reshape(shape)
        for axis in range(arr.ndim):
            others = tuple(i for i in range(arr.ndim) if i != axis)
            margin = arr.sum(axis=others) if others else arr
            worst = max(worst, float(np.max(np.abs(margin - target))))
        if worst <= max_dev:
            return arr
    if worst <= MARGIN_TOL / 10:
        return arr
    raise InternalError(f"margin fitting stalled at deviation {worst!r}")


def random_copula(labels: Iterable, order: int, rng: np.random.Generator) -> CheckerboardCopula:
    """Draw a generic copula by fitting uniform margins to a positive tensor."""
    labels = canonical_labels(labels)
    n, d = int(order), len(labels)
    raw = rng.uniform(0.5, 1.5, size=(n,) * d)
    return CheckerboardCopula(labels, n, fit_uniform_margins(raw))
