"""Exact arithmetic: typed model variables, sparse polynomials, rational
functions with factored denominators, and exact matrix algebra."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence, Union

Number = Union[int, Fraction]

DEFAULT_SIZE_GUARD = 8


class AlgebraError(ValueError):
    """Invalid algebraic operation (missing assignment, bad input)."""


class SizeGuardError(AlgebraError):
    """A symbolic computation exceeded its configured size guard."""


# -- variables ---------------------------------------------------------------

_KIND_NAMES = ("lambda", "omega", "sigma")
_KIND_PREFIX = ("l", "w", "s")


class Var(NamedTuple):
    """Model variable.  ``rank`` is 0 for lambda, 1 for omega, 2 for sigma.

    Indices are 0-based node positions.  Omega and sigma are symmetric and
    stored with ``i <= j``; lambda is ``(tail, head)``.
    """

    rank: int
    i: int
    j: int

    @property
    def kind(self) -> str:
        return _KIND_NAMES[self.rank]

    def name(self, n_nodes: int | None = None) -> str:
        sep = "_" if (n_nodes if n_nodes is not None else max(self.i, self.j) + 1) > 9 else ""
        return f"{_KIND_PREFIX[self.rank]}{self.i + 1}{sep}{self.j + 1}"


def lam(i: int, j: int) -> Var:
    return Var(0, i, j)


def omega(i: int, j: int) -> Var:
    return Var(1, min(i, j), max(i, j))


def sigma(i: int, j: int) -> Var:
    return Var(2, min(i, j), max(i, j))


# -- polynomials -------------------------------------------------------------

Monomial = tuple  # tuple[tuple[Var, int], ...] sorted by Var


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_div(a: Monomial, b: Monomial) -> Monomial | None:
    d = dict(a)
    for v, e in b:
        r = d.get(v, 0) - e
        if r < 0:
            return None
        if r:
            d[v] = r
        else:
            del d[v]
    return tuple(sorted(d.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def grlex_key(m: Monomial):
    """Sort key: larger key means larger monomial.

    Total degree first, then lexicographic with variables earlier in the
    Var order (lambda before omega before sigma, then by index pair)
    counting as larger.
    """
    return (_mono_degree(m), tuple((-v.rank, -v.i, -v.j, e) for v, e in m))


def _coerce_coeff(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient {c!r}")


class Polynomial:
    """Sparse multivariate polynomial with rational coefficients.

    Immutable; zero coefficients are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = _coerce_coeff(c)
                if c:
                    clean[m] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: Number) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def var(cls, v: Var) -> "Polynomial":
        return cls._raw({((v, 1),): Fraction(1)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self._terms), default=-1)

    def variables(self) -> set[Var]:
        return {v for m in self._terms for v, _ in m}

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in decreasing grlex order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading_term(self) -> tuple[Monomial, Fraction]:
        if not self._terms:
            raise AlgebraError("zero polynomial has no leading term")
        return max(self._terms.items(), key=lambda t: grlex_key(t[0]))

    # arithmetic

    @staticmethod
    def _wrap(x) -> "Polynomial":
        if isinstance(x, Polynomial):
            return x
        if isinstance(x, (int, Fraction)):
            return Polynomial.const(x)
        return NotImplemented

    def __add__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial()
            return Polynomial._raw({m: c * other for m, c in self._terms.items()})
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise AlgebraError("negative power of a polynomial")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("polynomial division by zero")
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, Polynomial):
            return RationalFunction(self) / RationalFunction(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def eval(self, assignment: Mapping[Var, Number]) -> Fraction:
        """Exact evaluation; every variable present must be assigned."""
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                try:
                    x = assignment[v]
                except KeyError:
                    raise AlgebraError(f"no value assigned to {v.name()}") from None
                t *= x**e
            total += t
        return total

    def eval_float(self, assignment: Mapping[Var, float]) -> float:
        total = 0.0
        for m, c in self._terms.items():
            t = float(c)
            for v, e in m:
                try:
                    t *= assignment[v] ** e
                except KeyError:
                    raise AlgebraError(f"no value assigned to {v.name()}") from None
            total += t
        return total

    def abs_term_sum(self, assignment: Mapping[Var, float]) -> float:
        """Sum of absolute term values, a scale for relative vanishing tests."""
        total = 0.0
        for m, c in self._terms.items():
            t = abs(float(c))
            for v, e in m:
                t *= abs(assignment[v]) ** e
            total += t
        return total

    def content(self) -> Fraction:
        """Positive rational content: gcd of numerators over lcm of denominators."""
        if not self._terms:
            return Fraction(0)
        nums = [c.numerator for c in self._terms.values()]
        dens = [c.denominator for c in self._terms.values()]
        g = reduce(math.gcd, nums)
        l = reduce(lambda a, b: a * b // math.gcd(a, b), dens)
        return Fraction(abs(g), l)

    def normalized(self) -> tuple[Fraction, "Polynomial"]:
        """Split into ``(unit, primitive)`` with a positive leading coefficient."""
        if not self._terms:
            return Fraction(0), self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        return c, self * (1 / c)

    def divide_exact(self, q: "Polynomial") -> "Polynomial | None":
        """Quotient ``self / q`` if ``q`` divides ``self`` exactly, else None."""
        if q.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lm_q, lc_q = q.leading_term()
        rem = self
        quot: dict = {}
        while not rem.is_zero():
            lm, lc = rem.leading_term()
            m = _mono_div(lm, lm_q)
            if m is None:
                return None
            c = lc / lc_q
            quot[m] = quot.get(m, 0) + c
            rem = rem - Polynomial._raw({m: c}) * q
        return Polynomial(quot)

    def to_str(self, n_nodes: int | None = None) -> str:
        return format_polynomial(self, n_nodes)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Polynomial({self.to_str()!r})"


def format_polynomial(p: Polynomial, n_nodes: int | None = None) -> str:
    """Render ``p`` as e.g. ``l12*l13*l34*w11 + w24``; terms in decreasing grlex."""
    if p.is_zero():
        return "0"
    if n_nodes is None:
        n_nodes = max((max(v.i, v.j) + 1 for v in p.variables()), default=0)
    parts = []
    for k, (m, c) in enumerate(p.sorted_terms()):
        factors = [v.name(n_nodes) + (f"^{e}" if e > 1 else "") for v, e in m]
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if k == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[lws]\d+(?:_\d+)?)|(?P<op>[-+*^()]))")


def _parse_var(tok: str) -> Var:
    kind = "lws".index(tok[0])
    body = tok[1:]
    if "_" in body:
        a, b = body.split("_")
    else:
        if len(body) != 2:
            raise AlgebraError(f"ambiguous variable {tok!r}; use l<i>_<j> for multi-digit indices")
        a, b = body[0], body[1]
    i, j = int(a) - 1, int(b) - 1
    if i < 0 or j < 0:
        raise AlgebraError(f"variable index must be positive in {tok!r}")
    return (lam, omega, sigma)[kind](i, j)


def parse_polynomial(text: str) -> Polynomial:
    """Parse the textual polynomial format (with parentheses and ``^``)."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise AlgebraError(f"cannot parse polynomial near {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("num"):
            tokens.append(("num", Fraction(m.group("num"))))
        elif m.group("var"):
            tokens.append(("var", _parse_var(m.group("var"))))
        elif m.group("op"):
            tokens.append(("op", m.group("op")))
    k = 0

    def peek():
        return tokens[k] if k < len(tokens) else (None, None)

    def expr():
        nonlocal k
        sign = 1
        if peek() == ("op", "-"):
            k += 1
            sign = -1
        elif peek() == ("op", "+"):
            k += 1
        acc = term() * sign
        while peek()[0] == "op" and peek()[1] in "+-":
            op = tokens[k][1]
            k += 1
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term():
        nonlocal k
        acc = power()
        while peek() == ("op", "*"):
            k += 1
            acc = acc * power()
        return acc

    def power():
        nonlocal k
        base = atom()
        if peek() == ("op", "^"):
            k += 1
            kind, val = peek()
            if kind != "num" or val.denominator != 1:
                raise AlgebraError("exponent must be a non-negative integer")
            k += 1
            return base ** int(val)
        return base

    def atom():
        nonlocal k
        kind, val = peek()
        if kind == "num":
            k += 1
            return Polynomial.const(val)
        if kind == "var":
            k += 1
            return Polynomial.var(val)
        if (kind, val) == ("op", "("):
            k += 1
            e = expr()
            if peek() != ("op", ")"):
                raise AlgebraError("unbalanced parenthesis")
            k += 1
            return e
        if (kind, val) == ("op", "-"):
            k += 1
            return -atom()
        raise AlgebraError(f"unexpected token {val!r}")

    result = expr()
    if k != len(tokens):
        raise AlgebraError(f"trailing input in polynomial: {tokens[k][1]!r}")
    return result


# -- rational functions ------------------------------------------------------


class RationalFunction:
    """Quotient of polynomials with a factored denominator.

    The denominator is a product of primitive factors (positive leading
    coefficient) with multiplicities; scalars live in the numerator.
    Reduction is lazy: only content and exact division of the numerator by
    known denominator factors are performed.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial | Number, den: Mapping[Polynomial, int] | Polynomial | None = None):
        if not isinstance(num, Polynomial):
            num = Polynomial.const(num)
        factors: dict[Polynomial, int] = {}
        scale = Fraction(1)
        if isinstance(den, Polynomial):
            den = {den: 1}
        for f, e in (den or {}).items():
            if e == 0:
                continue
            if f.is_zero():
                raise ZeroDivisionError("denominator is identically zero")
            unit, prim = f.normalized()
            scale *= unit**e
            if prim.is_constant():
                continue
            factors[prim] = factors.get(prim, 0) + e
        self.num = num * (1 / scale) if scale != 1 else num
        self.den = factors

    @classmethod
    def _make(cls, num: Polynomial, den: dict) -> "RationalFunction":
        r = cls.__new__(cls)
        r.num = num
        r.den = {f: e for f, e in den.items() if e}
        return r

    def denominator(self) -> Polynomial:
        out = Polynomial.const(1)
        for f, e in self.den.items():
            out = out * f**e
        return out

    def numerator(self) -> Polynomial:
        return self.num

    def reduced(self) -> "RationalFunction":
        """Cancel denominator factors that divide the numerator exactly."""
        num = self.num
        den = dict(self.den)
        if num.is_zero():
            return RationalFunction._make(num, {})
        for f in list(den):
            while den[f] > 0:
                q = num.divide_exact(f)
                if q is None:
                    break
                num = q
                den[f] -= 1
        return RationalFunction._make(num, den)

    @staticmethod
    def _wrap(x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, (Polynomial, int, Fraction)):
            return RationalFunction(x)
        return NotImplemented

    def __add__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        lcm = dict(self.den)
        for f, e in other.den.items():
            lcm[f] = max(lcm.get(f, 0), e)
        a = self.num
        for f, e in lcm.items():
            if e > self.den.get(f, 0):
                a = a * f ** (e - self.den.get(f, 0))
        b = other.num
        for f, e in lcm.items():
            if e > other.den.get(f, 0):
                b = b * f ** (e - other.den.get(f, 0))
        return RationalFunction._make(a + b, lcm).reduced()

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._make(-self.num, self.den)

    def __sub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return RationalFunction(Polynomial())
        den = dict(self.den)
        for f, e in other.den.items():
            den[f] = den.get(f, 0) + e
        return RationalFunction._make(self.num * other.num, den).reduced()

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        return RationalFunction(self.denominator(), self.num)

    def __truediv__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._wrap(other) * self.inverse()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def eval(self, assignment: Mapping[Var, Number]) -> Fraction:
        d = self.denominator().eval(assignment)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the given point")
        return self.num.eval(assignment) / d

    def equals(self, other: "RationalFunction") -> bool:
        """Exact identity test by cross multiplication."""
        other = self._wrap(other)
        return self.num * other.denominator() == other.num * self.denominator()

    def __eq__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def to_str(self, n_nodes: int | None = None) -> str:
        num = format_polynomial(self.num, n_nodes)
        if not self.den:
            return num
        parts = []
        for f, e in sorted(self.den.items(), key=lambda t: grlex_key(t[0].leading_term()[0])):
            s = f"({format_polynomial(f, n_nodes)})"
            parts.append(s + (f"^{e}" if e > 1 else ""))
        return f"({num}) / " + "*".join(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"RationalFunction({self.to_str()!r})"


# -- matrices ----------------------------------------------------------------


def _check_square(M: Sequence[Sequence]) -> int:
    n = len(M)
    if any(len(row) != n for row in M):
        raise AlgebraError("matrix is not square")
    return n


def det(M: Sequence[Sequence], size_guard: int | None = DEFAULT_SIZE_GUARD):
    """Determinant by Laplace expansion memoized on column subsets.

    Division free, so it works over any commutative ring whose elements
    support ``+``, ``-`` and ``*``.
    """
    n = _check_square(M)
    if size_guard is not None and n > size_guard:
        raise SizeGuardError(f"determinant of size {n} exceeds guard {size_guard}")
    if n == 0:
        return Polynomial.const(1)
    memo: dict[int, object] = {}
    full = (1 << n) - 1

    def rec(row: int, cols: int):
        # determinant of rows row..n-1 restricted to column mask ``cols``
        if row == n - 1:
            c = cols.bit_length() - 1
            return M[row][c]
        key = cols
        if key in memo:
            return memo[key]
        total = None
        sign_pos = 0
        for c in range(n):
            if not cols >> c & 1:
                continue
            a = M[row][c]
            if not _is_zero(a):
                sub = rec(row + 1, cols & ~(1 << c))
                term = a * sub
                if sign_pos & 1:
                    term = -term
                total = term if total is None else total + term
            sign_pos += 1
        if total is None:
            total = M[row][0] * 0
        memo[key] = total
        return total

    return rec(0, full)


def _is_zero(a) -> bool:
    if isinstance(a, (Polynomial, RationalFunction)):
        return a.is_zero()
    return a == 0


def adjugate(M: Sequence[Sequence], size_guard: int | None = DEFAULT_SIZE_GUARD) -> list[list]:
    """Adjugate (transpose of the cofactor matrix); ``M adj(M) = det(M) I``."""
    n = _check_square(M)
    if size_guard is not None and n > size_guard:
        raise SizeGuardError(f"adjugate of size {n} exceeds guard {size_guard}")
    if n == 1:
        return [[Polynomial.const(1) if isinstance(M[0][0], Polynomial) else 1]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            d = det(minor, size_guard=None)
            adj[i][j] = -d if (i + j) % 2 else d
    return adj


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for t in range(k):
                if _is_zero(A[i][t]) or _is_zero(B[t][j]):
                    continue
                term = A[i][t] * B[t][j]
                acc = term if acc is None else acc + term
            row.append(acc if acc is not None else A[i][0] * 0)
        out.append(row)
    return out


def transpose(A: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*A)]


def exact_rank(M: Sequence[Sequence[Number]]) -> int:
    """Rank of a rational matrix by fraction-free elimination.

    Rows are scaled to integers and kept primitive (divided by their
    content) after every elimination step, so no fractions appear.
    """
    rows = []
    for row in M:
        row = [Fraction(x) for x in row]
        lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for x in row), 1)
        irow = [int(x * lcm) for x in row]
        if any(irow):
            rows.append(irow)
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for r in range(rank + 1, len(rows)):
            a = rows[r][col]
            if a == 0:
                continue
            new = [p[col] * x - a * y for x, y in zip(rows[r], p)]
            g = reduce(math.gcd, new, 0)
            rows[r] = [x // g for x in new] if g > 1 else new
        rank += 1
        if rank == len(rows):
            break
    return rank


def fraction_inverse(M: Sequence[Sequence[Number]]) -> list[list[Fraction]]:
    """Exact inverse of a rational matrix by Gauss-Jordan elimination."""
    n = _check_square(M)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise AlgebraError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def fraction_det(M: Sequence[Sequence[Number]]) -> Fraction:
    """Exact determinant of a rational matrix by elimination."""
    n = _check_square(M)
    a = [[Fraction(x) for x in row] for row in M]
    d = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            d = -d
        p = a[col][col]
        d *= p
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / p
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return d


def symbolic_sigma(n: int) -> list[list[Polynomial]]:
    """Symmetric matrix of sigma variables."""
    return [[Polynomial.var(sigma(i, j)) for j in range(n)] for i in range(n)]


def sigma_assignment(S: Sequence[Sequence]) -> dict[Var, object]:
    n = len(S)
    return {sigma(i, j): S[i][j] for i in range(n) for j in range(i, n)}


def random_fraction(rng, lo: int = -9, hi: int = 9, den: int = 7, nonzero: bool = True) -> Fraction:
    """Random small rational from a ``random.Random``-like generator."""
    while True:
        x = Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))
        if x or not nonzero:
            return x


def proportional(p: Polynomial | RationalFunction, q: Polynomial | RationalFunction,
                 points: Iterable[Mapping[Var, Number]]) -> bool:
    """Decide ``p = c q`` for a nonzero scalar ``c`` by cross-multiplied
    evaluation at the given points."""
    ref = None
    for a in points:
        x, y = p.eval(a), q.eval(a)
        if (x == 0) != (y == 0):
            return False
        if x == 0:
            continue
        r = x / y
        if ref is None:
            ref = r
        elif r != ref:
            return False
    return ref is not None


def map_entries(M: Sequence[Sequence], f: Callable) -> list[list]:
    return [[f(x) for x in row] for row in M]


def identity_poly(n: int) -> list[list[Polynomial]]:
    return [[Polynomial.const(int(i == j)) for j in range(n)] for i in range(n)]


__all__ = [
    "AlgebraError", "SizeGuardError", "Var", "lam", "omega", "sigma", "Polynomial",
    "RationalFunction", "format_polynomial", "parse_polynomial", "det", "adjugate",
    "matmul", "transpose", "exact_rank", "fraction_inverse", "fraction_det",
    "symbolic_sigma", "sigma_assignment", "random_fraction", "proportional",
    "grlex_key", "identity_poly", "map_entries", "DEFAULT_SIZE_GUARD",
]
