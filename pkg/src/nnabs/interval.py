"""Box (interval) abstract domain."""

from __future__ import annotations

import math
from typing import Iterable, Mapping

from .errors import BottomError, DomainMismatchError, UnknownVariableError
from .linexpr import LinearExpr

Bounds = tuple[float, float]

# coefficients this small relative to the largest one are not used to tighten
_TIGHTEN_RTOL = 1e-12


class IntervalElement:
    """One closed interval per variable, or bottom.

    Elements are immutable; every transfer function returns a new element.
    A bottom element still remembers its variable set so joins can check it.
    """

    __slots__ = ("_bounds", "bottom")

    def __init__(self, bounds: Mapping[str, Bounds], bottom: bool = False):
        self._bounds = {v: (float(lo), float(hi)) for v, (lo, hi) in bounds.items()}
        self.bottom = bottom
        if not bottom:
            for v, (lo, hi) in self._bounds.items():
                if not lo <= hi:
                    raise ValueError(f"empty interval for {v!r}: [{lo}, {hi}]")

    @classmethod
    def from_box(cls, names: Iterable[str], lo: Iterable[float], hi: Iterable[float]) -> IntervalElement:
        return cls(dict(zip(names, zip(lo, hi))))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self._bounds)

    def __contains__(self, var: str) -> bool:
        return var in self._bounds

    def bounds(self, var: str) -> Bounds:
        if self.bottom:
            raise BottomError("bounds of a bottom element")
        try:
            return self._bounds[var]
        except KeyError:
            raise UnknownVariableError(var) from None

    def _check_vars(self, expr: LinearExpr) -> None:
        for v in expr.variables:
            if v not in self._bounds:
                raise UnknownVariableError(v)

    def eval_bounds(self, expr: LinearExpr) -> Bounds:
        """Interval evaluation of ``expr``."""
        self._check_vars(expr)
        lo = hi = expr.const
        for v, c in expr.terms:
            l, u = self._bounds[v]
            a, b = c * l, c * u
            if a <= b:
                lo += a
                hi += b
            else:
                lo += b
                hi += a
        return lo, hi

    def assign_linear(self, target: str, expr: LinearExpr, eps_out: float = 0.0,
                      counter=None) -> IntervalElement:
        self._check_vars(expr)
        if self.bottom:
            out = dict(self._bounds)
            out.setdefault(target, (0.0, 0.0))
            return IntervalElement(out, bottom=True)
        lo, hi = self.eval_bounds(expr)
        if eps_out:
            slack = eps_out * (hi - lo)
            lo, hi = lo - slack, hi + slack
        out = dict(self._bounds)
        out[target] = (lo, hi)
        return IntervalElement(out)

    def test_leq(self, expr: LinearExpr) -> IntervalElement:
        """Refine under ``expr <= 0`` by one forward-backward pass."""
        self._check_vars(expr)
        if self.bottom or expr.is_constant():
            if not self.bottom and expr.const > 0:
                return IntervalElement(self._bounds, bottom=True)
            return self
        scale = max(abs(c) for _, c in expr.terms)
        mins = []
        for v, c in expr.terms:
            l, u = self._bounds[v]
            mins.append(min(c * l, c * u))
        if math.fsum(mins) + expr.const > 0:
            return IntervalElement(self._bounds, bottom=True)
        out = dict(self._bounds)
        for i, (v, c) in enumerate(expr.terms):
            if abs(c) <= _TIGHTEN_RTOL * scale:
                continue
            # c * v <= -(const + sum of the other terms' minima)
            rest = math.fsum(mins[:i] + mins[i + 1:]) + expr.const
            limit = -rest / c
            l, u = out[v]
            if c > 0:
                u = min(u, limit)
            else:
                l = max(l, limit)
            if l > u:
                return IntervalElement(self._bounds, bottom=True)
            out[v] = (l, u)
        return IntervalElement(out)

    def join(self, other: IntervalElement, counter=None) -> IntervalElement:
        if set(self._bounds) != set(other._bounds):
            raise DomainMismatchError("interval join over different variable sets")
        if self.bottom:
            return other
        if other.bottom:
            return self
        out = {}
        for v, (l1, u1) in self._bounds.items():
            l2, u2 = other._bounds[v]
            out[v] = (min(l1, l2), max(u1, u2))
        return IntervalElement(out)

    def concretize(self) -> dict[str, Bounds]:
        if self.bottom:
            raise BottomError("concretization of bottom")
        return dict(self._bounds)

    def compact(self) -> IntervalElement:
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalElement):
            return NotImplemented
        return self.bottom == other.bottom and self._bounds == other._bounds

    def __repr__(self) -> str:
        if self.bottom:
            return "IntervalElement(bottom)"
        inner = ", ".join(f"{v}: [{l:g}, {u:g}]" for v, (l, u) in self._bounds.items())
        return f"IntervalElement({inner})"


def itv_assign_linear(e: IntervalElement, target: str, expr: LinearExpr, eps_out: float = 0.0) -> IntervalElement:
    return e.assign_linear(target, expr, eps_out)


def itv_test_leq(e: IntervalElement, expr: LinearExpr) -> IntervalElement:
    return e.test_leq(expr)


def itv_join(a: IntervalElement, b: IntervalElement) -> IntervalElement:
    return a.join(b)


def itv_concretize(e: IntervalElement) -> dict[str, Bounds]:
    return e.concretize()
