"""Symbolic propagation on top of a numeric abstract domain.

A :class:`SymbolicState` pairs a numeric element (interval or zonotope) with a
map ``xi`` from *constrained* variables to linear expressions over *free*
variables.  Linear assignments substitute through ``xi`` so chains of affine
layers are composed exactly instead of being re-abstracted at every step.

With ``symbolic=False`` the same transfer functions run on the bare numeric
domain, which gives the plain Box / Zono baselines.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence, Union

from .errors import DomainMismatchError, UnknownVariableError
from .interval import IntervalElement
from .linexpr import LinearExpr
from .zonotope import ZonotopeElement

NumericElement = Union[IntervalElement, ZonotopeElement]


class NeuronPhase(enum.Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"
    UNCERTAIN = "uncertain"

    @classmethod
    def classify(cls, lo: float, hi: float) -> NeuronPhase:
        # upper == 0 wins over lower == 0, so [0, 0] is inactive
        if hi <= 0.0:
            return cls.INACTIVE
        if lo >= 0.0:
            return cls.ACTIVE
        return cls.UNCERTAIN


@dataclass(frozen=True)
class SymbolicState:
    n: NumericElement
    free: frozenset
    xi: Mapping[str, LinearExpr] = field(default_factory=dict)
    symbolic: bool = True

    @classmethod
    def initial(cls, n: NumericElement, symbolic: bool = True) -> SymbolicState:
        return cls(n, frozenset(n.variables), {}, symbolic)

    @property
    def constrained(self) -> frozenset:
        return frozenset(self.xi)

    @property
    def is_bottom(self) -> bool:
        return self.n.bottom

    def bounds(self, var: str) -> tuple[float, float]:
        return self.n.bounds(var)

    def expr_of(self, var: str) -> LinearExpr:
        """``xi(var)`` for a constrained variable, ``var`` itself otherwise."""
        self._check(LinearExpr.var(var))
        return self.xi.get(var, LinearExpr.var(var))

    def _check(self, expr: LinearExpr) -> None:
        for v in expr.variables:
            if v not in self.free and v not in self.xi:
                raise UnknownVariableError(v)

    def check_invariants(self) -> None:
        assert not (self.free & self.constrained), "free and constrained overlap"
        for y, e in self.xi.items():
            for v in e.variables:
                assert v in self.free, f"xi({y}) mentions non-free {v}"
        for v in self.free | self.constrained:
            assert v in self.n, f"{v} has no numeric value"


def sym_assign_linear(st: SymbolicState, y: str, expr: LinearExpr, eps_out: float = 0.0,
                      counter: Iterator[int] | None = None) -> SymbolicState:
    """Transfer function for ``y := expr``."""
    st._check(expr)
    if y in st.free and any(y in e.variables for e in st.xi.values()):
        raise ValueError(f"cannot reassign {y!r}: other symbolic expressions depend on it")
    xi = dict(st.xi)
    if st.symbolic and not expr.is_constant():
        expr = expr.substitute(st.xi)
        xi[y] = expr
        free = st.free - {y}
    else:
        xi.pop(y, None)
        free = st.free | {y}
    n = st.n.assign_linear(y, expr, eps_out, counter)
    return SymbolicState(n, free, xi, st.symbolic)


def sym_test_leq(st: SymbolicState, expr: LinearExpr) -> SymbolicState:
    """Condition test ``expr <= 0``; only the numeric element changes.

    ``expr`` is handed to the numeric domain as written, not substituted
    through ``xi``: a ReLU guard ``y >= 0`` must clip ``y`` itself.
    """
    st._check(expr)
    return replace(st, n=st.n.test_leq(expr))


def sym_join(a: SymbolicState, b: SymbolicState, counter: Iterator[int] | None = None) -> SymbolicState:
    if (a.free | a.constrained) != (b.free | b.constrained):
        raise DomainMismatchError("symbolic join over different variable universes")
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    n = a.n.join(b.n, counter)
    xi = {v: e for v, e in a.xi.items() if b.xi.get(v) == e}
    free = a.free | (a.constrained - set(xi))
    return SymbolicState(n, free, xi, a.symbolic and b.symbolic)


def meet_equality(st: SymbolicState, y: str) -> SymbolicState:
    """Feed ``y == xi(y)`` back into the numeric element as two tests."""
    if y not in st.xi:
        raise ValueError(f"{y!r} is not a constrained variable")
    e = st.xi[y]
    yv = LinearExpr.var(y)
    n = st.n.test_leq(e - yv)
    n = n.test_leq(yv - e)
    return replace(st, n=n)


def _introduce_fresh(st: SymbolicState, y: str, counter: Iterator[int]) -> SymbolicState:
    """Bind ``y`` to a new free variable carrying y's current numeric value."""
    s = f"{y}~{next(counter)}"
    n = st.n.assign_linear(s, LinearExpr.var(y), 0.0, counter)
    xi = dict(st.xi)
    xi[y] = LinearExpr.var(s)
    return SymbolicState(n, (st.free - {y}) | {s}, xi, st.symbolic)


def relu_after_assign(psi: SymbolicState, y: str, counter: Iterator[int]) -> tuple[SymbolicState, NeuronPhase]:
    """ReLU transfer on a state where ``y`` already holds the pre-activation."""
    lo, hi = psi.bounds(y)
    phase = NeuronPhase.classify(lo, hi)
    yv = LinearExpr.var(y)
    if phase is NeuronPhase.ACTIVE:
        if psi.symbolic and y in psi.xi:
            psi = meet_equality(psi, y)
        return psi, phase
    if phase is NeuronPhase.INACTIVE:
        return sym_assign_linear(psi, y, LinearExpr.constant(0.0)), phase
    pos = sym_test_leq(psi, -yv)
    neg = sym_assign_linear(sym_test_leq(psi, yv), y, LinearExpr.constant(0.0))
    st = sym_join(pos, neg, counter)
    # the zonotope join may hull below zero; relu output never is
    st = sym_test_leq(st, -yv)
    if st.symbolic and y not in st.xi:
        st = _introduce_fresh(st, y, counter)
    return st, phase


def sym_relu(st: SymbolicState, y: str, expr: LinearExpr, counter: Iterator[int],
             eps_out: float = 0.0) -> tuple[SymbolicState, NeuronPhase]:
    """Transfer function for ``y := ReLU(expr)``."""
    psi = sym_assign_linear(st, y, expr, eps_out, counter)
    return relu_after_assign(psi, y, counter)


def sym_maxpool(st: SymbolicState, d: str, inputs: Sequence[str], counter: Iterator[int]) -> SymbolicState:
    """Transfer function for ``d := max(inputs)``."""
    if not inputs:
        raise ValueError("max-pool over an empty window")
    bounds = [st.bounds(c) for c in inputs]
    for j, (lo_j, _) in enumerate(bounds):
        if all(lo_j >= hi for i, (_, hi) in enumerate(bounds) if i != j):
            return sym_assign_linear(st, d, LinearExpr.var(inputs[j]))

    branches = []
    for i, ci in enumerate(inputs):
        b = st
        for k, ck in enumerate(inputs):
            if k != i:
                b = sym_test_leq(b, LinearExpr.var(ck) - LinearExpr.var(ci))
        branches.append(sym_assign_linear(b, d, LinearExpr.var(ci)))
    acc = branches[-1]
    for b in reversed(branches[:-1]):
        acc = sym_join(b, acc, counter)

    dv = LinearExpr.var(d)
    acc = sym_test_leq(acc, dv - max(hi for _, hi in bounds))
    acc = sym_test_leq(acc, max(lo for lo, _ in bounds) - dv)
    if acc.symbolic and d not in acc.xi:
        acc = _introduce_fresh(acc, d, counter)
    return acc
