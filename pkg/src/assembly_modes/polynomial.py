"""Sparse multivariate polynomials with exact rational coefficients."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


class Polynomial:
    """A polynomial over named variables.

    ``terms`` maps exponent vectors (one entry per variable, in the order of
    ``variables``) to non-zero :class:`~fractions.Fraction` coefficients.
    Arithmetic between polynomials over different variable lists works on the
    union of the variables (first operand's order, then new names).
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, object] | None = None):
        self.variables: tuple[str, ...] = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        clean: dict[Exponent, Fraction] = {}
        nv = len(self.variables)
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nv:
                raise ValueError(f"exponent {exp} does not match {nv} variables")
            if any(e < 0 for e in exp):
                raise ValueError("negative exponent")
            c = _as_fraction(coeff)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self.terms: dict[Exponent, Fraction] = clean

    # construction helpers

    @classmethod
    def constant(cls, value, variables: Sequence[str] = ()) -> "Polynomial":
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, name: str, variables: Sequence[str] | None = None) -> "Polynomial":
        variables = tuple(variables) if variables is not None else (name,)
        exp = tuple(1 if v == name else 0 for v in variables)
        if sum(exp) != 1:
            raise ValueError(f"{name!r} not among {variables}")
        return cls(variables, {exp: 1})

    # structure

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        if not self.terms:
            raise ValueError("zero polynomial has no degree")
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        k = self.variables.index(name)
        return max((e[k] for e in self.terms), default=0)

    def involved(self) -> set[str]:
        """Names of variables that actually occur."""
        return {v for k, v in enumerate(self.variables) if any(e[k] for e in self.terms)}

    def reorder(self, variables: Sequence[str]) -> "Polynomial":
        """Same polynomial over a new variable list, which must cover every occurring variable."""
        variables = tuple(variables)
        missing = self.involved() - set(variables)
        if missing:
            raise ValueError(f"variables {sorted(missing)} would be dropped")
        pos = {v: k for k, v in enumerate(self.variables)}
        out = {}
        for exp, c in self.terms.items():
            out[tuple(exp[pos[v]] if v in pos else 0 for v in variables)] = c
        return Polynomial(variables, out)

    def support(self, variables: Sequence[str] | None = None) -> frozenset[Exponent]:
        """Exponents of the non-zero terms in ``variables``.

        Variables not listed are treated as generic coefficients: two terms
        differing only in them map to the same exponent and cannot cancel.
        """
        if variables is None:
            return frozenset(self.terms)
        pos = [self.variables.index(v) if v in self.variables else None for v in variables]
        return frozenset(tuple(exp[p] if p is not None else 0 for p in pos) for exp in self.terms)

    # arithmetic

    def _aligned(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.variables == self.variables:
            return self, other
        names = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return self.reorder(names), other.reorder(names)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other, self.variables)

    def __add__(self, other) -> "Polynomial":
        a, b = self._aligned(self._coerce(other))
        out = dict(a.terms)
        for exp, c in b.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + c
        return Polynomial(a.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        a, b = self._aligned(self._coerce(other))
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Polynomial(a.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(1, self.variables)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.variables) if isinstance(other, (int, Fraction)) else None
            if other is None:
                return NotImplemented
        names = tuple(sorted(set(self.involved()) | set(other.involved())))
        return self.reorder(names).terms == other.reorder(names).terms

    def __hash__(self):
        names = tuple(sorted(self.involved()))
        return hash((names, frozenset(self.reorder(names).terms.items())))

    # evaluation

    def substitute(self, values: Mapping[str, object]) -> "Polynomial":
        """Replace some variables by exact numbers; they disappear from the variable list."""
        keep = [k for k, v in enumerate(self.variables) if v not in values]
        subs = [(k, _as_fraction(values[v])) for k, v in enumerate(self.variables) if v in values]
        out: dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            val = c
            for k, x in subs:
                if exp[k]:
                    val *= x ** exp[k]
            key = tuple(exp[k] for k in keep)
            out[key] = out.get(key, Fraction(0)) + val
        return Polynomial([self.variables[k] for k in keep], out)

    def evaluate(self, values: Mapping[str, object] | Sequence):
        """Evaluate at a point given by name or in variable order.

        Exact when every value is rational; otherwise numeric (float/complex).
        """
        if isinstance(values, Mapping):
            point = [values[v] for v in self.variables]
        else:
            point = list(values)
        exact = all(isinstance(x, (int, Fraction)) for x in point)
        total = Fraction(0) if exact else 0.0
        for exp, c in self.terms.items():
            term = c if exact else float(c)
            for x, e in zip(point, exp):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def derivative(self, name: str) -> "Polynomial":
        k = self.variables.index(name)
        out = {}
        for exp, c in self.terms.items():
            if exp[k]:
                e = list(exp)
                e[k] -= 1
                out[tuple(e)] = c * exp[k]
        return Polynomial(self.variables, out)

    def max_abs_coefficient(self) -> Fraction:
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    # serialization

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "terms": [
                {"exponents": list(exp), "coeff": f"{c.numerator}/{c.denominator}"}
                for exp, c in sorted(self.terms.items(), reverse=True)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        return cls(data["variables"], {tuple(t["exponents"]): Fraction(t["coeff"]) for t in data["terms"]})

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exp) if e
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def determinant(matrix: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Laplace expansion along rows, memoised on the set of remaining columns.

    ``2**k * k`` products for a k x k matrix; fine for the k <= 8 matrices
    used here.
    """
    k = len(matrix)
    if any(len(row) != k for row in matrix):
        raise ValueError("matrix must be square")
    cache: dict[int, Polynomial] = {}

    def minor(row: int, cols: int) -> Polynomial:
        # cols: bitmask of columns still available for rows row..k-1
        if row == k:
            return Polynomial.constant(1, matrix[0][0].variables)
        if cols in cache:
            return cache[cols]
        total = None
        sign = 1
        for c in range(k):
            if not cols >> c & 1:
                continue
            entry = matrix[row][c]
            if not entry.is_zero():
                term = entry * minor(row + 1, cols & ~(1 << c))
                term = term if sign > 0 else -term
                total = term if total is None else total + term
            sign = -sign
        if total is None:
            total = Polynomial.constant(0, matrix[0][0].variables)
        cache[cols] = total
        return total

    return minor(0, (1 << k) - 1)


def fraction_determinant(matrix: Sequence[Sequence[object]]) -> Fraction:
    """Exact determinant of a numeric matrix by Gaussian elimination over the rationals."""
    a = [[_as_fraction(x) for x in row] for row in matrix]
    k = len(a)
    det = Fraction(1)
    for col in range(k):
        pivot = next((r for r in range(col, k) if a[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, k):
            f = a[r][col] / p
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def polys_from_names(names: Iterable[str]) -> dict[str, Polynomial]:
    names = tuple(names)
    return {v: Polynomial.variable(v, names) for v in names}
