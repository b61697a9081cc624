"""Zonotope abstract domain.

Each variable is an affine form ``a_i + sum_j b_ij * eps_j`` over shared noise
symbols, and each symbol carries its own interval ``eps_j in [l_j, u_j]``.
Noise symbols are identified by integer ids; fresh ids come from a counter
owned by the caller (any iterator of ints, usually ``itertools.count``).
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import BottomError, DomainMismatchError, UnknownVariableError
from .linexpr import LinearExpr

Bounds = tuple[float, float]

# coefficients this small relative to the largest one are not used to tighten
_TIGHTEN_RTOL = 1e-12


class ZonotopeElement:
    __slots__ = ("_index", "center", "gens", "noise_ids", "noise_lo", "noise_hi", "bottom")

    def __init__(self, index: Mapping[str, int], center, gens, noise_ids, noise_lo, noise_hi,
                 bottom: bool = False):
        self._index = dict(index)
        self.center = np.asarray(center, dtype=float)
        self.gens = np.asarray(gens, dtype=float).reshape(len(self._index), len(noise_ids))
        self.noise_ids = tuple(int(i) for i in noise_ids)
        self.noise_lo = np.asarray(noise_lo, dtype=float)
        self.noise_hi = np.asarray(noise_hi, dtype=float)
        self.bottom = bottom
        if not bottom and np.any(self.noise_lo > self.noise_hi):
            raise ValueError("noise symbol with empty range")

    @classmethod
    def from_box(cls, names: Iterable[str], lo: Iterable[float], hi: Iterable[float],
                 first_id: int = 0) -> ZonotopeElement:
        """One noise symbol per variable, ranging exactly over the box side."""
        names = list(names)
        lo = np.asarray(list(lo), dtype=float)
        hi = np.asarray(list(hi), dtype=float)
        n = len(names)
        return cls({v: i for i, v in enumerate(names)}, np.zeros(n), np.eye(n),
                   range(first_id, first_id + n), lo, hi)

    @classmethod
    def from_forms(cls, forms: Mapping[str, tuple[float, Mapping[int, float]]],
                   noise: Mapping[int, Bounds]) -> ZonotopeElement:
        """Build from ``{var: (center, {noise_id: coef})}`` and ``{noise_id: (l, u)}``."""
        ids = sorted(noise)
        col = {j: k for k, j in enumerate(ids)}
        names = list(forms)
        center = np.zeros(len(names))
        gens = np.zeros((len(names), len(ids)))
        for i, v in enumerate(names):
            a, coefs = forms[v]
            center[i] = a
            for j, c in coefs.items():
                if j not in col:
                    raise ValueError(f"form of {v!r} references undeclared noise symbol {j}")
                gens[i, col[j]] = c
        return cls({v: i for i, v in enumerate(names)}, center, gens, ids,
                   [noise[j][0] for j in ids], [noise[j][1] for j in ids])

    def _replace(self, **kw) -> ZonotopeElement:
        args = dict(index=self._index, center=self.center, gens=self.gens, noise_ids=self.noise_ids,
                    noise_lo=self.noise_lo, noise_hi=self.noise_hi, bottom=self.bottom)
        args.update(kw)
        return ZonotopeElement(**args)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self._index)

    def __contains__(self, var: str) -> bool:
        return var in self._index

    def affine_form(self, var: str) -> tuple[float, dict[int, float]]:
        """``(center, {noise_id: coef})`` for ``var``, zero coefficients omitted."""
        try:
            row = self._index[var]
        except KeyError:
            raise UnknownVariableError(var) from None
        coefs = {j: float(c) for j, c in zip(self.noise_ids, self.gens[row]) if c != 0.0}
        return float(self.center[row]), coefs

    def noise_bounds(self, noise_id: int) -> Bounds:
        k = self.noise_ids.index(noise_id)
        return float(self.noise_lo[k]), float(self.noise_hi[k])

    def _combine(self, expr: LinearExpr) -> tuple[float, np.ndarray]:
        c0 = expr.const
        coef = np.zeros(len(self.noise_ids))
        for v, a in expr.terms:
            try:
                row = self._index[v]
            except KeyError:
                raise UnknownVariableError(v) from None
            c0 += a * self.center[row]
            coef += a * self.gens[row]
        return float(c0), coef

    def _range(self, c0: float, coef: np.ndarray) -> Bounds:
        a = coef * self.noise_lo
        b = coef * self.noise_hi
        return float(c0 + np.minimum(a, b).sum()), float(c0 + np.maximum(a, b).sum())

    def eval_bounds(self, expr: LinearExpr) -> Bounds:
        """Concretized range of ``expr`` evaluated on the affine forms."""
        return self._range(*self._combine(expr))

    def bounds(self, var: str) -> Bounds:
        if self.bottom:
            raise BottomError("bounds of a bottom element")
        return self.eval_bounds(LinearExpr.var(var))

    def assign_linear(self, target: str, expr: LinearExpr, eps_out: float = 0.0,
                      counter: Iterator[int] | None = None) -> ZonotopeElement:
        c0, coef = self._combine(expr)
        index = dict(self._index)
        center = self.center.copy()
        gens = self.gens
        if target in index:
            gens = gens.copy()
        else:
            index[target] = len(center)
            center = np.append(center, 0.0)
            gens = np.vstack([gens, np.zeros((1, gens.shape[1]))])
        row = index[target]
        center[row] = c0
        gens[row] = coef
        z = self._replace(index=index, center=center, gens=gens)
        if eps_out and not self.bottom:
            lo, hi = z._range(c0, coef)
            r = eps_out * (hi - lo)
            if r > 0:
                if counter is None:
                    raise ValueError("eps_out on a zonotope needs a fresh-symbol counter")
                z = z._with_fresh_symbol(row, next(counter), -r, r)
        return z

    def _with_fresh_symbol(self, row: int, noise_id: int, lo: float, hi: float) -> ZonotopeElement:
        col = np.zeros((self.gens.shape[0], 1))
        col[row, 0] = 1.0
        return self._replace(gens=np.hstack([self.gens, col]),
                             noise_ids=self.noise_ids + (noise_id,),
                             noise_lo=np.append(self.noise_lo, lo),
                             noise_hi=np.append(self.noise_hi, hi))

    def test_leq(self, expr: LinearExpr) -> ZonotopeElement:
        """Refine under ``expr <= 0`` by tightening noise-symbol ranges.

        The constraint becomes ``c0 + sum_j c_j eps_j <= 0``; each symbol is
        projected once with every other symbol at its minimizing extreme.
        """
        c0, coef = self._combine(expr)
        if self.bottom:
            return self
        a = coef * self.noise_lo
        b = coef * self.noise_hi
        mins = np.minimum(a, b)
        total = c0 + mins.sum()
        if total > 0:
            return self._replace(bottom=True)
        scale = np.max(np.abs(coef)) if coef.size else 0.0
        active = np.abs(coef) > _TIGHTEN_RTOL * scale
        if not np.any(active):
            return self
        lo = self.noise_lo.copy()
        hi = self.noise_hi.copy()
        rest = total - mins
        with np.errstate(divide="ignore", invalid="ignore"):
            limit = -rest / coef
        pos = active & (coef > 0)
        neg = active & (coef < 0)
        hi[pos] = np.minimum(hi[pos], limit[pos])
        lo[neg] = np.maximum(lo[neg], limit[neg])
        if np.any(lo > hi):
            return self._replace(bottom=True)
        return self._replace(noise_lo=lo, noise_hi=hi)

    def _aligned(self, ids: list[int], order: list[str]):
        col = {j: k for k, j in enumerate(self.noise_ids)}
        take = [col.get(j, -1) for j in ids]
        rows = [self._index[v] for v in order]
        gens = np.zeros((len(rows), len(ids)))
        lo = np.full(len(ids), np.inf)
        hi = np.full(len(ids), -np.inf)
        for k, c in enumerate(take):
            if c >= 0:
                gens[:, k] = self.gens[rows, c]
                lo[k] = self.noise_lo[c]
                hi[k] = self.noise_hi[c]
        return self.center[rows], gens, lo, hi

    def join(self, other: ZonotopeElement, counter: Iterator[int] | None = None) -> ZonotopeElement:
        """Keep syntactically identical forms, give every other variable a fresh symbol.

        Kept forms are evaluated over the hull of both operands' symbol
        ranges; a differing variable gets a new symbol spanning the hull of
        its two concretizations, independent of everything else.
        """
        if set(self._index) != set(other._index):
            raise DomainMismatchError("zonotope join over different variable sets")
        if self.bottom:
            return other
        if other.bottom:
            return self
        order = list(self._index)
        ids = sorted(set(self.noise_ids) | set(other.noise_ids))
        c1, g1, l1, h1 = self._aligned(ids, order)
        c2, g2, l2, h2 = other._aligned(ids, order)
        lo = np.minimum(l1, l2)
        hi = np.maximum(h1, h2)
        same = (c1 == c2) & np.all(g1 == g2, axis=1)
        out = ZonotopeElement({v: i for i, v in enumerate(order)}, c1.copy(), g1.copy(), ids, lo, hi)
        differing = [i for i in range(len(order)) if not same[i]]
        if not differing:
            return out
        if counter is None:
            raise ValueError("zonotope join needs a fresh-symbol counter")
        new_cols = np.zeros((len(order), len(differing)))
        new_ids, new_lo, new_hi = [], [], []
        for k, i in enumerate(differing):
            v = order[i]
            lo_a, hi_a = self.bounds(v)
            lo_b, hi_b = other.bounds(v)
            out.center[i] = 0.0
            out.gens[i] = 0.0
            new_cols[i, k] = 1.0
            new_ids.append(next(counter))
            new_lo.append(min(lo_a, lo_b))
            new_hi.append(max(hi_a, hi_b))
        return out._replace(gens=np.hstack([out.gens, new_cols]),
                            noise_ids=out.noise_ids + tuple(new_ids),
                            noise_lo=np.concatenate([out.noise_lo, new_lo]),
                            noise_hi=np.concatenate([out.noise_hi, new_hi]))

    def concretize(self) -> dict[str, Bounds]:
        if self.bottom:
            raise BottomError("concretization of bottom")
        a = self.gens * self.noise_lo
        b = self.gens * self.noise_hi
        lo = self.center + np.minimum(a, b).sum(axis=1)
        hi = self.center + np.maximum(a, b).sum(axis=1)
        return {v: (float(lo[i]), float(hi[i])) for v, i in self._index.items()}

    def compact(self) -> ZonotopeElement:
        """Drop noise symbols no variable refers to."""
        keep = np.any(self.gens != 0.0, axis=0)
        if keep.all():
            return self
        return self._replace(gens=self.gens[:, keep],
                             noise_ids=tuple(j for j, k in zip(self.noise_ids, keep) if k),
                             noise_lo=self.noise_lo[keep], noise_hi=self.noise_hi[keep])

    def __repr__(self) -> str:
        if self.bottom:
            return "ZonotopeElement(bottom)"
        return f"ZonotopeElement({len(self._index)} vars, {len(self.noise_ids)} symbols)"


def zono_assign_linear(e: ZonotopeElement, target: str, expr: LinearExpr, eps_out: float = 0.0,
                       counter: Iterator[int] | None = None) -> ZonotopeElement:
    return e.assign_linear(target, expr, eps_out, counter)


def zono_test_leq(e: ZonotopeElement, expr: LinearExpr) -> ZonotopeElement:
    return e.test_leq(expr)


def zono_join(a: ZonotopeElement, b: ZonotopeElement, counter: Iterator[int] | None = None) -> ZonotopeElement:
    return a.join(b, counter)


def zono_concretize(e: ZonotopeElement) -> dict[str, Bounds]:
    return e.concretize()
