"""One-dimensional marginal laws and finite-dimensional tensor measures.

Marginals live on the extended real line: atomic laws may place mass at
``-inf`` or ``+inf``, continuous laws are piecewise-linear CDFs on a finite
interval.  Tensor measures are discrete probability measures on a product
grid, with one axis per index label.  Everything is immutable after
construction and all operations are pure functions.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CompatibilityError, DomainError, UnsupportedError, ValidationError

NEG_INF = float("-inf")
POS_INF = float("inf")

#: absolute slack allowed when total mass is compared against one
MASS_TOL = 1e-12

ATOMIC = "atomic"
CONTINUOUS = "continuous"


def _readonly(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


def canonical_labels(labels: Iterable) -> tuple:
    """Return labels as a sorted tuple, rejecting duplicates and unsortable mixes."""
    seq = list(labels)
    if not seq:
        raise CompatibilityError("index subset must be nonempty")
    if len(set(seq)) != len(seq):
        raise CompatibilityError(f"duplicate labels in {seq!r}")
    try:
        return tuple(sorted(seq))
    except TypeError as exc:
        raise CompatibilityError(f"labels are not mutually orderable: {seq!r}") from exc


class Marginal:
    """A one-dimensional probability law with CDF and quantile evaluation.

    Use :meth:`atomic` for a purely discrete law given by weighted atoms, or
    :meth:`continuous` for a strictly increasing piecewise-linear CDF given by
    knots ``(x, F(x))`` with ``F = 0`` at the first knot and ``F = 1`` at the
    last.  Atom positions may be ``-inf`` or ``+inf``; knots must be finite.
    """

    __slots__ = ("kind", "xs", "ws", "fs", "cum")

    def __init__(self, kind, xs, ws=None, fs=None, cum=None, _token=None):
        if _token is not _CTOR:
            raise TypeError("use Marginal.atomic(...) or Marginal.continuous(...)")
        self.kind = kind
        self.xs = xs
        self.ws = ws
        self.fs = fs
        self.cum = cum

    @classmethod
    def atomic(cls, atoms: Sequence[tuple]) -> "Marginal":
        """Build an atomic marginal from ``(position, weight)`` pairs.

        Positions must be strictly increasing (``-inf``/``+inf`` allowed),
        weights nonnegative with total one up to :data:`MASS_TOL`.
        """
        if not atoms:
            raise ValidationError("atomic marginal needs at least one atom")
        xs = _readonly([float(x) for x, _ in atoms])
        ws = _readonly([float(w) for _, w in atoms])
        if np.any(np.isnan(xs)):
            raise ValidationError("atom positions must not be NaN")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("atom positions must be strictly increasing")
        if np.any(ws < 0) or np.any(~np.isfinite(ws)):
            raise ValidationError("atom weights must be finite and nonnegative")
        total = float(ws.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"atom weights sum to {total!r}, expected 1")
        # The clipped cumulative with a forced endpoint of exactly 1.0 is what
        # makes quantile/cdf an exact adjoint pair in float arithmetic.
        cum = np.minimum(np.cumsum(ws), 1.0)
        cum[-1] = 1.0
        cum.setflags(write=False)
        return cls(ATOMIC, xs, ws=ws, cum=cum, _token=_CTOR)

    @classmethod
    def continuous(cls, knots: Sequence[tuple]) -> "Marginal":
        """Build a continuous marginal from CDF knots ``(x, F)``."""
        if len(knots) < 2:
            raise ValidationError("continuous marginal needs at least two knots")
        xs = _readonly([float(x) for x, _ in knots])
        fs = _readonly([float(f) for _, f in knots])
        if np.any(~np.isfinite(xs)):
            raise ValidationError("knot positions must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("knot positions must be strictly increasing")
        if np.any(np.diff(fs) <= 0):
            raise ValidationError("CDF values must be strictly increasing")
        if fs[0] != 0.0 or fs[-1] != 1.0:
            raise ValidationError("CDF must start at exactly 0 and end at exactly 1")
        return cls(CONTINUOUS, xs, fs=fs, _token=_CTOR)

    def support_points(self) -> np.ndarray:
        """Atom positions, or knot positions for a continuous law."""
        return self.xs

    def __eq__(self, other):
        if not isinstance(other, Marginal):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if not np.array_equal(self.xs, other.xs):
            return False
        if self.kind == ATOMIC:
            return np.array_equal(self.ws, other.ws)
        return np.array_equal(self.fs, other.fs)

    __hash__ = None

    def __repr__(self):
        return f"Marginal({self.kind}, {len(self.xs)} points)"


_CTOR = object()


def cdf_eval(m: Marginal, x: float) -> float:
    """Evaluate ``F(x)``, the mass of the closed lower ray up to ``x``.

    Right-continuous in ``x``; ``F(+inf) = 1`` exactly.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("cdf argument must not be NaN")
    if m.kind == ATOMIC:
        i = int(np.searchsorted(m.xs, x, side="right"))
        return 0.0 if i == 0 else float(m.cum[i - 1])
    xs, fs = m.xs, m.fs
    if x < xs[0]:
        return 0.0
    if x >= xs[-1]:
        return 1.0
    k = int(np.searchsorted(xs, x, side="right")) - 1
    raw = fs[k] + (x - xs[k]) * (fs[k + 1] - fs[k]) / (xs[k + 1] - xs[k])
    # clamping keeps the float CDF monotone across knot boundaries
    return float(min(max(raw, fs[k]), fs[k + 1]))


def quantile(m: Marginal, u: float) -> float:
    """Generalized inverse ``inf { x : F(x) >= u }`` on the extended line.

    ``quantile(m, 0)`` returns the smallest support point (first atom or first
    knot) rather than ``-inf``.  For continuous marginals the result is the
    smallest float whose CDF reaches ``u``, so ``quantile(u) <= x`` holds if
    and only if ``u <= cdf_eval(x)`` for every ``u`` in ``(0, 1]``, with no
    floating-point exceptions.
    """
    u = float(u)
    if math.isnan(u) or u < 0.0 or u > 1.0:
        raise DomainError(f"quantile level {u!r} outside [0, 1]")
    if u == 0.0:
        return float(m.xs[0])
    if m.kind == ATOMIC:
        i = int(np.searchsorted(m.cum, u, side="left"))
        return float(m.xs[i])
    xs, fs = m.xs, m.fs
    k = int(np.searchsorted(fs, u, side="left"))
    if k == 0:
        return float(xs[0])
    lo, hi = float(xs[k - 1]), float(xs[k])
    f_lo, f_hi = float(fs[k - 1]), float(fs[k])
    y = lo + (u - f_lo) * (hi - lo) / (f_hi - f_lo)
    y = min(max(y, lo), hi)
    return _smallest_reaching(m, u, lo, y, hi)


def _smallest_reaching(m: Marginal, u: float, lo: float, y: float, hi: float) -> float:
    # Invariant: F(lo) < u <= F(hi); walk from the interpolated candidate,
    # falling back to bisection when the local walk does not settle.
    if cdf_eval(m, y) >= u:
        for _ in range(64):
            y2 = math.nextafter(y, lo)
            if y2 < lo or cdf_eval(m, y2) < u:
                return y
            y = y2
        lo_b, hi_b = lo, y
    else:
        for _ in range(64):
            y = math.nextafter(y, hi)
            if cdf_eval(m, y) >= u:
                return y
        lo_b, hi_b = y, hi
    while True:
        mid = 0.5 * (lo_b + hi_b)
        if not (lo_b < mid < hi_b):
            return hi_b
        if cdf_eval(m, mid) >= u:
            hi_b = mid
        else:
            lo_b = mid


class TensorMeasure:
    """A discrete probability measure on a product grid.

    ``labels`` is the ordered index subset (strictly increasing), ``grid`` a
    per-axis tuple of strictly increasing cut points on the extended line, and
    ``mass`` a nonnegative tensor with one entry per grid node whose total is
    one up to :data:`MASS_TOL`.
    """

    __slots__ = ("labels", "grid", "mass")

    def __init__(self, labels, grid, mass):
        labels = tuple(labels)
        if not labels:
            raise CompatibilityError("tensor measure needs at least one axis")
        try:
            ordered = all(labels[i] < labels[i + 1] for i in range(len(labels) - 1))
        except TypeError as exc:
            raise ValidationError(f"labels are not mutually orderable: {labels!r}") from exc
        if not ordered:
            raise ValidationError(f"labels must be strictly increasing, got {labels!r}")
        grid = tuple(grid)
        if len(grid) != len(labels):
            raise CompatibilityError("grid must provide one axis per label")
        axes = []
        for lab, pts in zip(labels, grid):
            arr = _readonly(pts)
            if arr.size < 1:
                raise ValidationError(f"axis {lab!r} has an empty grid")
            if np.any(np.isnan(arr)):
                raise ValidationError(f"axis {lab!r} grid contains NaN")
            if np.any(np.diff(arr) <= 0):
                raise ValidationError(f"axis {lab!r} grid must be strictly increasing")
            axes.append(arr)
        arr = np.asarray(mass, dtype=float)
        expected = tuple(a.size for a in axes)
        if arr.shape != expected:
            raise ValidationError(f"mass shape {arr.shape} does not match grid {expected}")
        if np.any(arr < 0) or np.any(~np.isfinite(arr)):
            raise ValidationError("masses must be finite and nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"total mass is {total!r}, expected 1")
        arr = arr.copy()
        arr.setflags(write=False)
        self.labels = labels
        self.grid = tuple(axes)
        self.mass = arr

    @property
    def ndim(self) -> int:
        return len(self.labels)

    def axis_of(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise CompatibilityError(f"label {label!r} not in {self.labels!r}") from None

    def __eq__(self, other):
        if not isinstance(other, TensorMeasure):
            return NotImplemented
        return (
            self.labels == other.labels
            and all(np.array_equal(a, b) for a, b in zip(self.grid, other.grid))
            and np.array_equal(self.mass, other.mass)
        )

    __hash__ = None

    def __repr__(self):
        return f"TensorMeasure(labels={self.labels!r}, shape={self.mass.shape})"


def marginalize_tensor(t: TensorMeasure, labels: Iterable) -> TensorMeasure:
    """Project onto the axes in ``labels`` by summing out everything else.

    Dropped axes are summed one at a time from the highest label down, so
    projecting in one step or through any label-descending chain of
    intermediate subsets produces bitwise-identical tensors.
    """
    target = canonical_labels(labels)
    if not set(target) <= set(t.labels):
        raise CompatibilityError(f"{target!r} is not a subset of {t.labels!r}")
    mass = t.mass
    for i in reversed(range(len(t.labels))):
        if t.labels[i] not in target:
            mass = mass.sum(axis=i)
    grid = tuple(t.grid[t.labels.index(lab)] for lab in target)
    return TensorMeasure(target, grid, mass)


def pushforward_tensor(t: TensorMeasure, maps: Mapping) -> TensorMeasure:
    """Push the measure through per-axis maps given as value tables.

    ``maps`` assigns to each label a mapping defined on every grid point of
    that axis.  Mass of a node moves to the node of coordinatewise images;
    coinciding images accumulate.  Total mass is preserved.
    """
    images = []
    for lab, axis in zip(t.labels, t.grid):
        try:
            table = maps[lab]
        except (KeyError, TypeError, IndexError):
            raise DomainError(f"no map supplied for axis {lab!r}") from None
        img = []
        for x in axis:
            x = float(x)
            try:
                img.append(float(table[x]))
            except (KeyError, TypeError, IndexError):
                raise DomainError(f"map for axis {lab!r} missing grid point {x!r}") from None
        images.append(np.asarray(img))
    new_grid = [np.unique(img) for img in images]
    index_arrays = [
        np.searchsorted(new_axis, img) for new_axis, img in zip(new_grid, images)
    ]
    out = np.zeros(tuple(a.size for a in new_grid))
    mesh = np.meshgrid(*index_arrays, indexing="ij")
    np.add.at(out, tuple(mesh), t.mass)
    return TensorMeasure(t.labels, tuple(new_grid), out)


def cdf_eval_tensor(t: TensorMeasure, point: Sequence[float]) -> float:
    """Mass of the product of closed lower rays up to ``point``."""
    if len(point) != t.ndim:
        raise CompatibilityError(
            f"point has {len(point)} coordinates, measure has {t.ndim} axes"
        )
    slicer = []
    for x, axis in zip(point, t.grid):
        x = float(x)
        if math.isnan(x):
            raise DomainError("cdf argument must not be NaN")
        i = int(np.searchsorted(axis, x, side="right"))
        if i == 0:
            return 0.0
        slicer.append(slice(0, i))
    return float(t.mass[tuple(slicer)].sum())


def atomize(m: Marginal, label) -> TensorMeasure:
    """Represent an atomic marginal as a one-axis tensor measure."""
    if m.kind != ATOMIC:
        raise UnsupportedError("only atomic marginals have an exact atomization")
    return TensorMeasure((label,), (m.xs,), m.ws)
