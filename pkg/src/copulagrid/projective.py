"""Projective families of finite-dimensional measures over a poset of subsets.

A family assigns to every finite, nonempty index subset a measure over
exactly that subset.  Families are consistent when marginalizing the member
over a larger subset reproduces the member over a smaller one; this module
provides the consistency spot-check, the canonical enumeration of finite
subsets, and constructors that are consistent by construction.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .copulas import CheckerboardCopula, marginalize_copula, validate_copula
from .errors import CompatibilityError, DomainError, ValidationError
from .measures import TensorMeasure, canonical_labels, marginalize_tensor

COPULA = "copula"
GENERAL = "general"


class IndexUniverse:
    """Either an explicit finite label set or the nonnegative integers."""

    __slots__ = ("kind", "labels")

    FINITE = "finite"
    COUNTABLE = "countable"

    def __init__(self, kind, labels=None, _token=None):
        if _token is not _CTOR:
            raise TypeError("use IndexUniverse.finite(...) or IndexUniverse.countable()")
        self.kind = kind
        self.labels = labels

    @classmethod
    def finite(cls, labels: Iterable) -> "IndexUniverse":
        return cls(cls.FINITE, canonical_labels(labels), _token=_CTOR)

    @classmethod
    def countable(cls) -> "IndexUniverse":
        return cls(cls.COUNTABLE, None, _token=_CTOR)

    def __contains__(self, label) -> bool:
        if self.kind == self.FINITE:
            return label in self.labels
        return isinstance(label, (int, np.integer)) and not isinstance(label, bool) and label >= 0

    def validate_subset(self, labels: Iterable) -> tuple:
        subset = canonical_labels(labels)
        for lab in subset:
            if lab not in self:
                raise CompatibilityError(f"label {lab!r} outside the index universe")
        return subset

    def __eq__(self, other):
        if not isinstance(other, IndexUniverse):
            return NotImplemented
        return self.kind == other.kind and self.labels == other.labels

    __hash__ = None

    def __repr__(self):
        if self.kind == self.FINITE:
            return f"IndexUniverse.finite({list(self.labels)!r})"
        return "IndexUniverse.countable()"


_CTOR = object()


def subset_sort_key(subset: tuple, ordered_labels: tuple) -> tuple:
    """Canonical order of finite subsets: by max label, then size, then lex."""
    pos = {lab: i for i, lab in enumerate(ordered_labels)}
    ranks = tuple(pos[lab] for lab in subset)
    return (max(ranks), len(ranks), ranks)


def canonical_subsets(universe: IndexUniverse) -> Iterator[tuple]:
    """Enumerate nonempty finite subsets in the canonical order.

    For a countable universe the enumeration never ends; take what you need.
    """
    if universe.kind == IndexUniverse.FINITE:
        ordered = universe.labels
        limit = len(ordered)
    else:
        ordered = None
        limit = None
    max_idx = 0
    while limit is None or max_idx < limit:
        label_of = (lambda i: ordered[i]) if ordered is not None else (lambda i: i)
        for size in range(1, max_idx + 2):
            for combo in itertools.combinations(range(max_idx), size - 1):
                yield tuple(label_of(i) for i in combo) + (label_of(max_idx),)
        max_idx += 1


class ProjectiveFamily:
    """A rule from finite subsets to measures, cached with evaluate-once semantics.

    ``kind`` is ``"copula"`` (members are :class:`CheckerboardCopula`, required
    to pass validation) or ``"general"`` (members are :class:`TensorMeasure`).
    The cache is the only mutable state and is guarded by a lock, so concurrent
    callers observe a single evaluation per subset.
    """

    __slots__ = ("universe", "kind", "rule", "_cache", "_lock")

    def __init__(self, universe: IndexUniverse, kind: str, rule: Callable):
        if kind not in (COPULA, GENERAL):
            raise DomainError(f"unknown family kind {kind!r}")
        self.universe = universe
        self.kind = kind
        self.rule = rule
        self._cache = {}
        self._lock = threading.Lock()

    def evaluated_subsets(self) -> tuple:
        with self._lock:
            return tuple(self._cache)


def _check_member(f: ProjectiveFamily, subset: tuple, value):
    if f.kind == COPULA:
        if not isinstance(value, CheckerboardCopula):
            raise ValidationError(f"copula family rule returned {type(value).__name__}")
        if value.labels != subset:
            raise CompatibilityError(
                f"rule returned labels {value.labels!r} for subset {subset!r}"
            )
        report = validate_copula(value)
        if not report.passed:
            raise ValidationError(
                f"family member over {subset!r} is not a copula: {report.issues[0].message}"
            )
    else:
        if not isinstance(value, TensorMeasure):
            raise ValidationError(f"general family rule returned {type(value).__name__}")
        if value.labels != subset:
            raise CompatibilityError(
                f"rule returned labels {value.labels!r} for subset {subset!r}"
            )
    return value


def family_member(f: ProjectiveFamily, labels: Iterable):
    """Evaluate the family at a subset, caching the validated member."""
    subset = f.universe.validate_subset(labels)
    with f._lock:
        if subset in f._cache:
            return f._cache[subset]
        value = _check_member(f, subset, f.rule(subset))
        f._cache[subset] = value
        return value


@dataclass(frozen=True)
class PairCheck:
    inner: tuple
    outer: tuple
    deviation: float
    ok: bool
    message: str = ""


@dataclass(frozen=True)
class ConsistencyReport:
    passed: bool
    checks: tuple
    max_deviation: float

    def __bool__(self):
        return self.passed


def _members_match(a, b, tol: float):
    """Entrywise comparison of two members over the same subset."""
    if isinstance(a, CheckerboardCopula) and isinstance(b, CheckerboardCopula):
        if a.order != b.order:
            return float("inf"), f"orders differ: {a.order} vs {b.order}"
        dev = float(np.max(np.abs(a.mass - b.mass)))
        return dev, "" if dev <= tol else f"mass deviation {dev!r}"
    if isinstance(a, TensorMeasure) and isinstance(b, TensorMeasure):
        for ga, gb in zip(a.grid, b.grid):
            if ga.shape != gb.shape or not np.array_equal(ga, gb):
                return float("inf"), "grids differ"
        dev = float(np.max(np.abs(a.mass - b.mass)))
        return dev, "" if dev <= tol else f"mass deviation {dev!r}"
    return float("inf"), "member kinds differ"


def _marginalize_member(value, subset: tuple):
    if isinstance(value, CheckerboardCopula):
        return marginalize_copula(value, subset)
    return marginalize_tensor(value, subset)


def check_consistency(
    f: ProjectiveFamily, subsets: Iterable[Iterable], tol: float = 1e-12
) -> ConsistencyReport:
    """Verify the projection equations on every nested pair among ``subsets``.

    For each pair ``J1 <= J2`` the member over ``J2`` is marginalized onto
    ``J1`` and compared entrywise with the member over ``J1``.  Each subset's
    rule is also re-evaluated once and compared against the cached member, so
    a nondeterministic rule is reported as a violation rather than silently
    cached.  Violations are collected, never raised.
    """
    canon = [f.universe.validate_subset(s) for s in subsets]
    if not canon:
        raise DomainError("check_consistency needs at least one subset")
    checks = []
    for subset in canon:
        first = family_member(f, subset)
        again = _check_member(f, subset, f.rule(subset))
        dev, msg = _members_match(first, again, tol=0.0)
        if dev != 0.0:
            checks.append(
                PairCheck(subset, subset, dev, False, f"rule is nondeterministic: {msg}")
            )
    for j1 in canon:
        for j2 in canon:
            if not set(j1) <= set(j2):
                continue
            projected = _marginalize_member(family_member(f, j2), j1)
            dev, msg = _members_match(family_member(f, j1), projected, tol)
            checks.append(PairCheck(j1, j2, dev, dev <= tol, msg))
    passed = all(c.ok for c in checks)
    dev_overall = max((c.deviation for c in checks if np.isfinite(c.deviation)), default=0.0)
    return ConsistencyReport(passed, tuple(checks), dev_overall)


def family_from_joint(t: TensorMeasure) -> ProjectiveFamily:
    """The family of all marginals of a fixed joint measure; always consistent."""
    universe = IndexUniverse.finite(t.labels)
    return ProjectiveFamily(universe, GENERAL, lambda subset: marginalize_tensor(t, subset))


def family_from_copula(c: CheckerboardCopula) -> ProjectiveFamily:
    """The family of all marginals of a fixed checkerboard copula."""
    universe = IndexUniverse.finite(c.labels)
    return ProjectiveFamily(universe, COPULA, lambda subset: marginalize_copula(c, subset))


def independence_family(universe: IndexUniverse, order: int) -> ProjectiveFamily:
    """Product copula of a given order over every finite subset."""
    from .copulas import make_independence

    return ProjectiveFamily(universe, COPULA, lambda subset: make_independence(subset, order))


def comonotone_family(universe: IndexUniverse, order: int) -> ProjectiveFamily:
    """Diagonal copula of a given order over every finite subset."""
    from .copulas import make_comonotone

    return ProjectiveFamily(universe, COPULA, lambda subset: make_comonotone(subset, order))
