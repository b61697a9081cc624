"""Affine expressions over named variables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping


@dataclass(frozen=True)
class LinearExpr:
    """``sum(coef * var) + const`` with normalized, hashable terms.

    Terms are kept sorted by variable name with zero coefficients dropped, so
    two expressions compare equal exactly when they are syntactically equal.
    """

    terms: tuple[tuple[str, float], ...] = ()
    const: float = 0.0

    def __post_init__(self):
        merged: dict[str, float] = {}
        for var, coef in self.terms:
            merged[var] = merged.get(var, 0.0) + float(coef)
        norm = tuple(sorted((v, c) for v, c in merged.items() if c != 0.0))
        object.__setattr__(self, "terms", norm)
        object.__setattr__(self, "const", float(self.const))

    @classmethod
    def of(cls, coeffs: Mapping[str, float] | Iterable[tuple[str, float]] = (),
           const: float = 0.0) -> LinearExpr:
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        return cls(tuple(items), const)

    @classmethod
    def var(cls, name: str, coef: float = 1.0) -> LinearExpr:
        return cls(((name, coef),), 0.0)

    @classmethod
    def constant(cls, value: float) -> LinearExpr:
        return cls((), value)

    @property
    def coeffs(self) -> dict[str, float]:
        return dict(self.terms)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def is_constant(self) -> bool:
        return not self.terms

    def __add__(self, other: LinearExpr | float) -> LinearExpr:
        if not isinstance(other, LinearExpr):
            return LinearExpr(self.terms, self.const + other)
        return LinearExpr(self.terms + other.terms, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> LinearExpr:
        return self * -1.0

    def __sub__(self, other: LinearExpr | float) -> LinearExpr:
        return self + (-other)

    def __rsub__(self, other: float) -> LinearExpr:
        return (-self) + other

    def __mul__(self, k: float) -> LinearExpr:
        k = float(k)
        return LinearExpr(tuple((v, c * k) for v, c in self.terms), self.const * k)

    __rmul__ = __mul__

    def substitute(self, mapping: Mapping[str, LinearExpr]) -> LinearExpr:
        """Replace every variable found in ``mapping`` by its expression."""
        if not any(v in mapping for v, _ in self.terms):
            return self
        acc: dict[str, float] = {}
        const = self.const
        for var, coef in self.terms:
            sub = mapping.get(var)
            if sub is None:
                acc[var] = acc.get(var, 0.0) + coef
                continue
            const += coef * sub.const
            for v2, c2 in sub.terms:
                acc[v2] = acc.get(v2, 0.0) + coef * c2
        return LinearExpr(tuple(acc.items()), const)

    def evaluate(self, point: Mapping[str, float]) -> float:
        return self.const + sum(c * point[v] for v, c in self.terms)

    def __str__(self) -> str:
        parts = [f"{c:+g}*{v}" for v, c in self.terms]
        if self.const != 0.0 or not parts:
            parts.append(f"{self.const:+g}")
        return " ".join(parts)
