"""Quantile composition of copula families with marginals, and its inverse.

A joint law is represented lazily as a pair (copula family, marginals): its
finite-dimensional CDFs are evaluated by feeding marginal CDF values into the
copula CDF.  The eager counterpart, :func:`discretize_joint`, pushes copula
cell mass through the per-axis quantile maps and yields a tensor measure on
the marginal supports.  The two paths are computed independently, so
:func:`verify_sklar` is a genuine cross-check and not a tautology.

Decomposition goes the other way: a tensor measure with strictly increasing
continuous marginals is pushed through the coordinatewise CDF maps into the
unit cube and binned onto a checkerboard of a caller-chosen order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .copulas import CheckerboardCopula, cdf_eval_copula, validate_copula
from .errors import (
    CompatibilityError,
    ConfigurationError,
    UnsupportedError,
    ValidationError,
)
from .measures import (
    ATOMIC,
    CONTINUOUS,
    Marginal,
    TensorMeasure,
    cdf_eval,
    cdf_eval_tensor,
    marginalize_tensor,
)
from .projective import COPULA, ProjectiveFamily, family_member


class JointMeasure:
    """Lazily evaluated joint law given by a copula family and marginals."""

    __slots__ = ("family", "marginals")

    def __init__(self, family: ProjectiveFamily, marginals: Mapping):
        if family.kind != COPULA:
            raise CompatibilityError("joint measures need a copula-kind family")
        self.family = family
        self.marginals = dict(marginals)

    def marginal(self, label) -> Marginal:
        try:
            return self.marginals[label]
        except KeyError:
            raise ConfigurationError(f"no marginal supplied for label {label!r}") from None


def compose(family: ProjectiveFamily, marginals: Mapping) -> JointMeasure:
    """Pair a copula family with marginals into a joint law.

    For a finite universe every universe label must be covered; for a
    countable universe coverage is checked per request.
    """
    jm = JointMeasure(family, marginals)
    if family.universe.kind == "finite":
        missing = [lab for lab in family.universe.labels if lab not in jm.marginals]
        if missing:
            raise ConfigurationError(f"marginals missing for labels {missing!r}")
    for lab, m in jm.marginals.items():
        if not isinstance(m, Marginal):
            raise ConfigurationError(f"marginal for {lab!r} is not a Marginal")
    return jm


def joint_cdf(jm: JointMeasure, labels: Iterable, point: Sequence[float]) -> float:
    """Joint CDF over ``labels``: copula CDF of the marginal CDF values.

    Coordinates in ``point`` follow the order of ``labels`` as given, which
    need not be sorted.
    """
    given = tuple(labels)
    subset = jm.family.universe.validate_subset(given)
    if len(point) != len(given):
        raise CompatibilityError(
            f"point has {len(point)} coordinates for subset of size {len(given)}"
        )
    coords = dict(zip(given, point))
    u = [cdf_eval(jm.marginal(lab), coords[lab]) for lab in subset]
    return cdf_eval_copula(family_member(jm.family, subset), u)


def _axis_transfer(m: Marginal, order: int, grid):
    """Transfer matrix from copula cells to target points along one axis.

    The unit interval is cut at every cell boundary ``k/n`` and at every
    reachable CDF level of the marginal.  Each refined piece lies inside a
    single cell and maps to a single target point (an atom, or the smallest
    grid point whose CDF level covers the piece), so pushing mass through the
    quantile map reduces to one matrix per axis.

    Returns ``(targets, T)`` where ``T[a, k]`` is the fraction of cell ``k``
    sent to ``targets[a]``.
    """
    n = order
    bounds = np.arange(n + 1) / n
    if m.kind == ATOMIC:
        targets = np.asarray(m.xs, dtype=float)
        levels = np.asarray(m.cum, dtype=float)
    else:
        if grid is None:
            raise ConfigurationError(
                "a discretization grid is required for continuous marginals"
            )
        targets = np.asarray([float(g) for g in grid])
        if targets.size < 1 or np.any(np.diff(targets) <= 0):
            raise ConfigurationError("discretization grid must be strictly increasing")
        levels = np.asarray([cdf_eval(m, g) for g in targets])
        if levels[-1] != 1.0:
            raise ConfigurationError(
                "discretization grid must cover the marginal support "
                f"(CDF at last grid point is {levels[-1]!r}, expected 1.0)"
            )
    breaks = np.union1d(bounds, levels)
    breaks = np.concatenate(([0.0], breaks[(breaks > 0.0) & (breaks <= 1.0)]))
    T = np.zeros((targets.size, n))
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        cell = int(np.searchsorted(bounds, hi, side="left")) - 1
        tgt = int(np.searchsorted(levels, hi, side="left"))
        T[tgt, cell] += (hi - lo) * n
    return targets, T


def discretize_joint(
    jm: JointMeasure, labels: Iterable, grids: Mapping | None = None
) -> TensorMeasure:
    """Eager pushforward of the copula member through per-axis quantile maps.

    Atomic marginals are handled exactly; continuous marginals need a covering
    per-axis grid in ``grids`` (keyed by label) onto which mass is binned by
    rounding quantile values up to the next grid point.  The output agrees
    with :func:`joint_cdf` at every grid node.
    """
    subset = jm.family.universe.validate_subset(labels)
    member = family_member(jm.family, subset)
    target_grid = []
    mass = member.mass
    for lab in subset:
        m = jm.marginal(lab)
        axis_grid = None if grids is None else grids.get(lab)
        targets, T = _axis_transfer(m, member.order, axis_grid)
        target_grid.append(targets)
        mass = np.tensordot(mass, T, axes=([0], [1]))
    return TensorMeasure(subset, tuple(target_grid), mass)


@dataclass(frozen=True)
class SklarCheck:
    max_deviation: float
    probes_checked: int
    worst_probe: tuple | None

    def __bool__(self):
        return self.probes_checked > 0


def verify_sklar(
    jm: JointMeasure,
    labels: Iterable,
    probes: Iterable[Sequence[float]],
    grids: Mapping | None = None,
) -> SklarCheck:
    """Compare the lazy CDF path against the eager pushforward at each probe."""
    subset = jm.family.universe.validate_subset(labels)
    eager = discretize_joint(jm, subset, grids=grids)
    worst = 0.0
    worst_probe = None
    count = 0
    for probe in probes:
        a = joint_cdf(jm, subset, probe)
        b = cdf_eval_tensor(eager, probe)
        dev = abs(a - b)
        if dev > worst:
            worst, worst_probe = dev, tuple(float(x) for x in probe)
        count += 1
    return SklarCheck(worst, count, worst_probe)


#: agreement required between a tensor's own margins and supplied marginals
DECOMPOSE_CONSISTENCY_TOL = 1e-9

#: CDF images this close to a cell boundary are snapped onto it
_BOUNDARY_SNAP = 1e-9


def decompose(t: TensorMeasure, marginals: Mapping, order: int) -> CheckerboardCopula:
    """Recover the checkerboard copula of a joint with continuous marginals.

    Pushes the measure through the coordinatewise CDF maps into the unit cube
    and bins onto an order-``n`` checkerboard.  Every supplied marginal must
    be continuous (atomic marginals make the copula non-unique and are
    rejected) and must match the tensor's own margins at the grid points.

    The order must be compatible with the CDF images of the grid points: mass
    cut by a cell boundary that no image level hits cannot produce uniform
    margins, in which case the error names the smallest compatible order.
    """
    n = int(order)
    if n < 1:
        raise ValidationError(f"order must be >= 1, got {n}")
    image_axes = []
    for lab, axis in zip(t.labels, t.grid):
        try:
            m = marginals[lab]
        except KeyError:
            raise ConfigurationError(f"no marginal supplied for label {lab!r}") from None
        if m.kind != CONTINUOUS:
            raise UnsupportedError(
                f"marginal for {lab!r} is atomic; the copula of a joint with "
                "atomic marginals is not unique, so no canonical decomposition exists"
            )
        margin = marginalize_tensor(t, (lab,))
        own_cdf = np.cumsum(margin.mass)
        stated = np.asarray([cdf_eval(m, x) for x in axis])
        dev = float(np.max(np.abs(own_cdf - stated)))
        if dev > DECOMPOSE_CONSISTENCY_TOL:
            raise CompatibilityError(
                f"marginal for {lab!r} deviates from the tensor margin by {dev!r}"
            )
        snapped = stated.copy()
        scaled = snapped * n
        near = np.abs(scaled - np.rint(scaled)) <= _BOUNDARY_SNAP * n
        snapped[near] = np.rint(scaled[near]) / n
        image_axes.append(snapped)
    bounds = np.arange(n + 1) / n
    index_arrays = []
    for img in image_axes:
        idx = np.searchsorted(bounds, img, side="left") - 1
        idx = np.clip(idx, 0, n - 1)
        index_arrays.append(idx)
    out = np.zeros((n,) * t.ndim)
    mesh = np.meshgrid(*index_arrays, indexing="ij")
    np.add.at(out, tuple(mesh), t.mass)
    copula = CheckerboardCopula(t.labels, n, out)
    report = validate_copula(copula)
    if not report.passed:
        hint = _minimal_compatible_order(image_axes)
        detail = f"; smallest compatible order is {hint}" if hint else ""
        raise ValidationError(
            f"order {n} is incompatible with the CDF images "
            f"(margin deviation {report.max_deviation!r}){detail}"
        )
    return copula


def _minimal_compatible_order(image_axes, limit: int = 4096):
    """Smallest order >= 2 whose interior cell boundaries are all hit by CDF images."""
    for cand in range(2, limit + 1):
        ok = True
        for img in image_axes:
            scaled = img * cand
            hits = np.abs(scaled - np.rint(scaled)) <= _BOUNDARY_SNAP * cand
            achieved = set(np.rint(scaled[hits]).astype(int))
            if not all(k in achieved for k in range(1, cand)):
                ok = False
                break
        if ok:
            return cand
    return None
