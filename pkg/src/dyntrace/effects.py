"""Exceptional monads: Maybe, List+1 and Dist+1.

An :class:`Effect` is an immutable value of one of the three monads.
Every kind has a distinguished exception; binding anything that produces
an exception on any branch collapses the whole result to the exception.
The empty list of ``LIST`` is a zero but is *not* exceptional.

Random draws use numpy's PCG64 generator.  The generator state is passed
in and returned explicitly (see :func:`rng_state` and :func:`sample`).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

TOL = 1e-9


class EffectKind(enum.Enum):
    MAYBE = "maybe"
    LIST = "list"
    DIST = "dist"

    @classmethod
    def parse(cls, text) -> "EffectKind":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueError(f"unknown effect kind {text!r} (use maybe, list or dist)") from None


MAYBE, LIST, DIST = EffectKind.MAYBE, EffectKind.LIST, EffectKind.DIST


class _Raised:
    __slots__ = ()

    def __repr__(self):
        return "RAISED"

    def __reduce__(self):
        return "RAISED"


RAISED = _Raised()
"""What :func:`sample` returns for an exceptional outcome."""


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True)
class Effect:
    """A monadic value.

    ``values`` holds the outcomes (one for ``MAYBE``); ``weights`` is only
    set for ``DIST``.  ``raised`` marks the exception, in which case
    ``values`` is empty.
    """

    kind: EffectKind
    values: Tuple[Any, ...] = ()
    weights: Optional[Tuple[float, ...]] = None
    raised: bool = False

    def __repr__(self):
        if self.raised:
            return f"{self.kind.value}:Exception"
        if self.kind is DIST:
            inner = ", ".join(f"{w:.4g}:{v!r}" for w, v in zip(self.weights, self.values))
            return f"dist[{inner}]"
        if self.kind is MAYBE:
            return f"Just({self.values[0]!r})"
        return f"list{list(self.values)!r}"

    def branches(self) -> List[Tuple[float, Any]]:
        """``(weight, value)`` pairs; list branches all get weight 1."""
        if self.raised:
            return []
        if self.kind is DIST:
            return list(zip(self.weights, self.values))
        return [(1.0, v) for v in self.values]


def pure(kind: EffectKind, x) -> Effect:
    if kind is DIST:
        return Effect(kind, (x,), (1.0,))
    return Effect(kind, (x,))


def throw(kind: EffectKind) -> Effect:
    return Effect(kind, (), (() if kind is DIST else None), True)


def empty(kind: EffectKind) -> Effect:
    """The zero of ``LIST``; the other kinds have none."""
    if kind is not LIST:
        raise ValueError(f"{kind.value} has no empty value; use throw()")
    return Effect(kind, ())


def from_list(values: Iterable[Any]) -> Effect:
    return Effect(LIST, tuple(values))


def dist(pairs: Iterable[Tuple[float, Any]], normalize: bool = False) -> Effect:
    """A distribution from ``(weight, value)`` pairs.

    Equal values are merged (first occurrence keeps its position) and
    zero-weight outcomes dropped.  Without ``normalize`` the weights must
    already sum to 1 within 1e-9.
    """
    pairs = list(pairs)
    for w, _ in pairs:
        if not (w >= 0 and math.isfinite(w)):
            raise NormalizationError(f"invalid weight {w!r}")
    total = math.fsum(w for w, _ in pairs)
    if normalize:
        if total <= 0:
            raise NormalizationError("weights sum to zero")
        pairs = [(w / total, v) for w, v in pairs]
    elif abs(total - 1.0) > TOL:
        raise NormalizationError(f"weights sum to {total!r}, not 1")
    vals, ws = _merge(pairs)
    return Effect(DIST, tuple(vals), tuple(ws))


def _merge(pairs):
    vals: List[Any] = []
    ws: List[float] = []
    index = {}
    for w, v in pairs:
        if w == 0:
            continue
        try:
            key = ("h", v)
            i = index.get(key)
        except TypeError:
            key = None
            i = next((j for j, u in enumerate(vals) if u == v), None)
        if i is None:
            if key is not None:
                index[key] = len(vals)
            vals.append(v)
            ws.append(w)
        else:
            ws[i] += w
    return vals, ws


def bind(e: Effect, f: Callable[[Any], Effect]) -> Effect:
    """Kleisli extension of ``f`` applied to ``e``."""
    kind = e.kind
    if e.raised:
        return e
    if kind is MAYBE:
        r = f(e.values[0])
        _same_kind(r, kind)
        return r
    if kind is LIST:
        out: List[Any] = []
        for x in e.values:
            r = f(x)
            _same_kind(r, kind)
            if r.raised:
                return r
            out.extend(r.values)
        return Effect(LIST, tuple(out))
    pairs = []
    for w, x in zip(e.weights, e.values):
        r = f(x)
        _same_kind(r, kind)
        if r.raised:
            return r
        pairs.extend((w * w2, y) for w2, y in zip(r.weights, r.values))
    if len(pairs) == 1 and pairs[0][0] == 1.0:
        return Effect(DIST, (pairs[0][1],), (1.0,))
    total = math.fsum(w for w, _ in pairs)
    if abs(total - 1.0) > TOL:
        raise NormalizationError(f"bind produced total weight {total!r}")
    vals, ws = _merge(pairs)
    return Effect(DIST, tuple(vals), tuple(ws))


def _same_kind(r, kind):
    if not isinstance(r, Effect) or r.kind is not kind:
        raise TypeError(f"continuation returned {r!r}, expected a {kind.value} effect")


def fmap(e: Effect, f: Callable[[Any], Any]) -> Effect:
    if e.raised:
        return e
    if e.kind is DIST:
        vals, ws = _merge([(w, f(x)) for w, x in zip(e.weights, e.values)])
        return Effect(DIST, tuple(vals), tuple(ws))
    return Effect(e.kind, tuple(f(x) for x in e.values))


def choice(kind: EffectKind, options: Sequence[Any], weights: Optional[Sequence[float]] = None
           ) -> Effect:
    """All of ``options`` as branches (``DIST`` uses normalized ``weights``)."""
    if kind is DIST:
        ws = list(weights) if weights is not None else [1.0] * len(options)
        return dist(zip(ws, options), normalize=True)
    if kind is LIST:
        return from_list(options)
    if len(options) != 1:
        raise ValueError("a maybe value has exactly one outcome")
    return pure(kind, options[0])


def is_normalized(e: Effect, tol: float = TOL) -> bool:
    if e.kind is not DIST or e.raised:
        return True
    return all(0 <= w <= 1 + tol for w in e.weights) and abs(math.fsum(e.weights) - 1) <= tol


def effects_equal(a: Effect, b: Effect, eq: Callable[[Any, Any], bool] = None,
                  tol: float = TOL) -> bool:
    """Equality of effects; ``DIST`` compares merged weights within ``tol``."""
    eq = eq or (lambda x, y: x == y)
    if a.kind is not b.kind or a.raised != b.raised:
        return False
    if a.raised:
        return True
    if a.kind is not DIST:
        return len(a.values) == len(b.values) and all(eq(x, y) for x, y in zip(a.values, b.values))
    classes: List[List[Any]] = []  # [representative, weight in a, weight in b]
    for side, e in ((1, a), (2, b)):
        for w, x in zip(e.weights, e.values):
            for c in classes:
                if eq(c[0], x):
                    c[side] += w
                    break
            else:
                row = [x, 0.0, 0.0]
                row[side] = w
                classes.append(row)
    return all(abs(c[1] - c[2]) <= tol for c in classes)


# ---------------------------------------------------------------------------
# sampling

def rng_state(seed: int) -> dict:
    """Initial PCG64 state for ``seed``."""
    return np.random.PCG64(np.random.SeedSequence(seed)).state


def spawn_states(seed: int, n: int) -> List[dict]:
    """``n`` independent PCG64 states derived from ``seed``."""
    return [np.random.PCG64(s).state for s in np.random.SeedSequence(seed).spawn(n)]


def uniform(state: dict) -> Tuple[float, dict]:
    bg = np.random.PCG64()
    bg.state = state
    u = np.random.Generator(bg).random()
    return float(u), bg.state


def sample(e: Effect, state: dict) -> Tuple[Any, dict]:
    """Draw one outcome by cumulative weight; exceptions pass through.

    A point mass consumes no randomness.
    """
    if e.raised:
        return RAISED, state
    if e.kind is not DIST:
        if e.kind is MAYBE:
            return e.values[0], state
        raise ValueError("list effects carry no distribution to sample from")
    if len(e.values) == 1:
        return e.values[0], state
    u, state = uniform(state)
    acc = 0.0
    for w, v in zip(e.weights, e.values):
        acc += w
        if u < acc:
            return v, state
    return e.values[-1], state
