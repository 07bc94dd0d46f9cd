"""Exact sparse multivariate polynomials over the Gaussian rationals.

A polynomial in ``nvars`` variables is a map from exponent tuples to
:class:`GaussianRational` coefficients; zero coefficients are never stored,
so equal polynomials have identical term maps.  Evaluation has an exact
path (all coordinates Gaussian rational) and a vectorised float path.

Univariate helpers (GCD, square-free decomposition, roots on the unit
circle) work on ``nvars == 1`` polynomials through dense coefficient lists.
"""

from __future__ import annotations

import cmath
import math
import warnings
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import RootToleranceWarning

Exponent = tuple[int, ...]


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("imaginary part given twice")
            re, im = re.re, re.im
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> GaussianRational:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Rational)):
            return cls(x)
        if isinstance(x, str):
            return cls(Fraction(x))
        raise TypeError(f"cannot convert {type(x).__name__} exactly to GaussianRational")

    @classmethod
    def from_complex(cls, z: complex) -> GaussianRational:
        """Exact binary value of a double-precision complex number."""
        z = complex(z)
        return cls(Fraction(z.real), Fraction(z.imag))

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_unimodular(self) -> bool:
        return self.abs2() == 1

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if o.im == 0:
            return GaussianRational(self.re * o.re, self.im * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> GaussianRational:
        n = self.abs2()
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_coefficient(self)


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)

# Exact unimodular values tried before any numerical root classification.
EXACT_UNIT_CANDIDATES = (ONE, -ONE, I, -I)


def format_coefficient(c: GaussianRational) -> str:
    """Text form that the polynomial parser reads back exactly."""
    if c.im == 0:
        return str(c.re)
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{c.im}*i"
    sign = "-" if c.im < 0 else "+"
    mag = abs(c.im)
    imag = "i" if mag == 1 else f"{mag}*i"
    return f"({c.re} {sign} {imag})"


def _is_exact_scalar(x) -> bool:
    return isinstance(x, (GaussianRational, int, Rational)) and not isinstance(x, bool)


class MultiPoly:
    """Sparse polynomial in ``nvars`` variables with Gaussian-rational coefficients.

    Instances are immutable by convention: no method mutates ``self``.
    """

    __slots__ = ("nvars", "_terms", "_hash", "_compiled")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        clean: dict[Exponent, GaussianRational] = {}
        for idx, coeff in (terms or {}).items():
            idx = tuple(int(e) for e in idx)
            if len(idx) != nvars:
                raise ValueError(f"exponent {idx} has length {len(idx)}, expected {nvars}")
            if any(e < 0 for e in idx):
                raise ValueError(f"negative exponent in {idx}")
            c = GaussianRational.coerce(coeff)
            if c:
                clean[idx] = clean[idx] + c if idx in clean else c
                if not clean[idx]:
                    del clean[idx]
        self._terms = clean
        self._hash = None
        self._compiled = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> MultiPoly:
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value) -> MultiPoly:
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, j: int) -> MultiPoly:
        if not 0 <= j < nvars:
            raise ValueError(f"variable index {j} out of range for {nvars} variables")
        idx = [0] * nvars
        idx[j] = 1
        return cls(nvars, {tuple(idx): 1})

    @classmethod
    def from_dense(cls, coeffs: Sequence) -> MultiPoly:
        """Univariate polynomial from coefficients ordered low to high."""
        return cls(1, {(k,): c for k, c in enumerate(coeffs)})

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, GaussianRational]) -> MultiPoly:
        # trusted constructor: terms already canonical
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = terms
        obj._hash = None
        obj._compiled = None
        return obj

    # -- inspection ---------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, GaussianRational]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, idx: Sequence[int]) -> GaussianRational:
        return self._terms.get(tuple(idx), ZERO)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(idx) for idx in self._terms)

    def constant_term(self) -> GaussianRational:
        return self._terms.get((0,) * self.nvars, ZERO)

    def degree(self, j: int) -> int:
        """Degree in variable ``j``; the zero polynomial has degree -1."""
        if not self._terms:
            return -1
        return max(idx[j] for idx in self._terms)

    @property
    def polydegree(self) -> tuple[int, ...]:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(max(idx[j] for idx in self._terms) for j in range(self.nvars))

    def total_degree(self) -> int:
        return max((sum(idx) for idx in self._terms), default=-1)

    def coefficient_scale(self) -> float:
        """Sum of coefficient moduli; bounds |p| on the closed polydisk."""
        return sum(math.sqrt(float(c.abs2())) for c in self._terms.values())

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> MultiPoly | None:
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        if _is_exact_scalar(other):
            return MultiPoly.constant(self.nvars, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for idx, c in o._terms.items():
            v = out.get(idx, ZERO) + c
            if v:
                out[idx] = v
            else:
                out.pop(idx, None)
        return MultiPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.nvars, {idx: -c for idx, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if _is_exact_scalar(other):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[Exponent, GaussianRational] = {}
        for ia, ca in self._terms.items():
            for ib, cb in o._terms.items():
                idx = tuple(x + y for x, y in zip(ia, ib))
                out[idx] = out.get(idx, ZERO) + ca * cb
        return MultiPoly._raw(self.nvars, {k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def scale(self, c) -> MultiPoly:
        c = GaussianRational.coerce(c)
        if not c:
            return MultiPoly.zero(self.nvars)
        return MultiPoly._raw(self.nvars, {idx: v * c for idx, v in self._terms.items()})

    def __truediv__(self, other):
        if _is_exact_scalar(other):
            return self.scale(GaussianRational.coerce(other).inverse())
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self._terms == other._terms
        if _is_exact_scalar(other):
            return self == MultiPoly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # -- structural operations ---------------------------------------

    def conj_coeffs(self) -> MultiPoly:
        return MultiPoly._raw(self.nvars, {idx: c.conjugate() for idx, c in self._terms.items()})

    def diff(self, j: int) -> MultiPoly:
        out = {}
        for idx, c in self._terms.items():
            if idx[j]:
                new = list(idx)
                new[j] -= 1
                out[tuple(new)] = c * idx[j]
        return MultiPoly._raw(self.nvars, out)

    def split_var(self, j: int) -> dict[int, MultiPoly]:
        """Coefficients in powers of variable ``j``, as polys in the other variables."""
        parts: dict[int, dict[Exponent, GaussianRational]] = {}
        for idx, c in self._terms.items():
            rest = idx[:j] + idx[j + 1:]
            parts.setdefault(idx[j], {})[rest] = c
        return {k: MultiPoly._raw(self.nvars - 1, v) for k, v in parts.items()}

    def extend(self, nvars: int, position: int | None = None) -> MultiPoly:
        """Embed into more variables; new variables are inserted at ``position``."""
        extra = nvars - self.nvars
        if extra < 0:
            raise ValueError("cannot shrink variable count")
        pos = self.nvars if position is None else position
        pad = (0,) * extra
        return MultiPoly._raw(nvars, {idx[:pos] + pad + idx[pos:]: c for idx, c in self._terms.items()})

    def times_var_power(self, j: int, k: int) -> MultiPoly:
        out = {}
        for idx, c in self._terms.items():
            new = list(idx)
            new[j] += k
            out[tuple(new)] = c
        return MultiPoly._raw(self.nvars, out)

    def rotate(self, factors: Sequence) -> MultiPoly:
        """Substitute ``z_j -> factors[j] * z_j`` exactly."""
        factors = [GaussianRational.coerce(f) for f in factors]
        if len(factors) != self.nvars:
            raise ValueError("one factor per variable required")
        out = {}
        for idx, c in self._terms.items():
            v = c
            for f, e in zip(factors, idx):
                if e:
                    v = v * f ** e
            out[idx] = v
        return MultiPoly(self.nvars, out)

    def local_expansion(self, center: Sequence) -> MultiPoly:
        """Exact polynomial ``Q(w) = P(c_1(1+w_1), ..., c_n(1+w_n))``.

        Evaluating ``Q`` at small ``w`` avoids the cancellation that plagues
        direct float evaluation of ``P`` next to one of its zeros.
        """
        c = [GaussianRational.coerce(x) for x in center]
        if len(c) != self.nvars:
            raise ValueError("center length must equal nvars")
        out: dict[Exponent, GaussianRational] = {}
        for idx, coeff in self._terms.items():
            scale = coeff
            for cj, e in zip(c, idx):
                if e:
                    scale = scale * cj ** e
            expansions = [[(k, comb(e, k)) for k in range(e + 1)] for e in idx]
            _accumulate_products(out, scale, expansions, (), 0)
        return MultiPoly(self.nvars, out)

    # -- evaluation ---------------------------------------------------

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = tuple(point[0])
        return self.eval(point)

    def eval(self, point: Sequence):
        """Evaluate at one point: exact when every coordinate is exact, else complex."""
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        if all(_is_exact_scalar(x) for x in point):
            pts = [GaussianRational.coerce(x) for x in point]
            pows = [_power_table(x, self.degree(j), ONE) for j, x in enumerate(pts)]
            total = ZERO
            for idx, c in self._terms.items():
                v = c
                for j, e in enumerate(idx):
                    if e:
                        v = v * pows[j][e]
                total = total + v
            return total
        return complex(self.eval_many(np.asarray([point], dtype=complex))[0])

    def _compile(self):
        if self._compiled is None:
            items = list(self._terms.items())
            exps = np.array([idx for idx, _ in items], dtype=int).reshape(len(items), self.nvars)
            coeffs = np.array([complex(c) for _, c in items], dtype=complex)
            self._compiled = (exps, coeffs)
        return self._compiled

    def eval_many(self, points) -> np.ndarray:
        """Vectorised float evaluation; ``points`` has shape ``(M, nvars)``."""
        z = np.asarray(points, dtype=complex)
        if z.ndim == 1:
            z = z.reshape(-1, self.nvars) if self.nvars else z.reshape(-1, 0)
        if z.shape[1] != self.nvars:
            raise ValueError(f"points have {z.shape[1]} coordinates, expected {self.nvars}")
        exps, coeffs = self._compile()
        out = np.zeros(z.shape[0], dtype=complex)
        if not len(coeffs):
            return out
        pows = []
        for j in range(self.nvars):
            table = [np.ones(z.shape[0], dtype=complex)]
            for _ in range(int(exps[:, j].max())):
                table.append(table[-1] * z[:, j])
            pows.append(table)
        for t in range(len(coeffs)):
            term = np.full(z.shape[0], coeffs[t])
            for j in range(self.nvars):
                e = exps[t, j]
                if e:
                    term = term * pows[j][e]
            out += term
        return out

    # -- univariate views ----------------------------------------------

    def to_dense(self) -> list[GaussianRational]:
        if self.nvars != 1:
            raise ValueError("dense form needs a univariate polynomial")
        if not self._terms:
            return []
        out = [ZERO] * (self.degree(0) + 1)
        for (k,), c in self._terms.items():
            out[k] = c
        return out

    # -- printing -----------------------------------------------------

    def to_text(self, names: Sequence[str] | None = None) -> str:
        """Human/parseable text; terms in descending graded-lex order."""
        if names is None:
            names = [f"z{j + 1}" for j in range(self.nvars)]
        if not self._terms:
            return "0"
        order = sorted(self._terms, key=lambda idx: (sum(idx), idx), reverse=True)
        pieces = []
        for n, idx in enumerate(order):
            c = self._terms[idx]
            mono = "*".join(
                names[j] if e == 1 else f"{names[j]}^{e}" for j, e in enumerate(idx) if e
            )
            negative = c.im == 0 and c.re < 0 or c.re == 0 and c.im < 0
            mag = -c if negative else c
            ctext = format_coefficient(mag)
            if not mono:
                body = ctext
            elif mag == ONE:
                body = mono
            else:
                body = f"{ctext}*{mono}"
            if n == 0:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f" - {body}" if negative else f" + {body}")
        return "".join(pieces)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {self.to_text()!r})"


def _power_table(x, degree: int, one):
    table = [one]
    for _ in range(max(degree, 0)):
        table.append(table[-1] * x)
    return table


def _accumulate_products(out, scale, expansions, prefix, j):
    if j == len(expansions):
        out[prefix] = out.get(prefix, ZERO) + scale
        return
    for k, b in expansions[j]:
        _accumulate_products(out, scale * b, expansions, prefix + (k,), j + 1)


def poly_from_terms(nvars: int, terms: Iterable[tuple[Sequence[int], object]]) -> MultiPoly:
    out: dict = {}
    for idx, c in terms:
        idx = tuple(idx)
        out[idx] = GaussianRational.coerce(out.get(idx, 0)) + GaussianRational.coerce(c)
    return MultiPoly(nvars, out)


def reflect(p: MultiPoly, n: Sequence[int]) -> MultiPoly:
    """Reflection ``z^n * conj(p)(1/conj(z))``: coefficient at ``a`` is conj of coefficient at ``n - a``."""
    n = tuple(int(x) for x in n)
    if len(n) != p.nvars:
        raise ValueError(f"degree vector has length {len(n)}, expected {p.nvars}")
    deg = p.polydegree
    if not p.is_zero() and any(d > m for d, m in zip(deg, n)):
        raise ValueError(f"polynomial degree {deg} exceeds reflection degree {n}")
    return MultiPoly._raw(
        p.nvars,
        {tuple(m - e for m, e in zip(n, idx)): c.conjugate() for idx, c in p.items()},
    )


# ---------------------------------------------------------------------
# Univariate algebra on dense coefficient lists (low to high).

def _trim(a: list) -> list:
    while a and not a[-1]:
        a.pop()
    return a


def _divmod_dense(a: list, b: list) -> tuple[list, list]:
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    inv = b[-1].inverse()
    q = [ZERO] * (len(a) - len(b) + 1)
    r = list(a)
    for k in range(len(q) - 1, -1, -1):
        c = r[k + len(b) - 1] * inv
        q[k] = c
        if c:
            for j, bj in enumerate(b):
                r[k + j] = r[k + j] - c * bj
    return _trim(q), _trim(r[: len(b) - 1])


def _monic(a: list) -> list:
    a = _trim(list(a))
    if not a:
        return a
    inv = a[-1].inverse()
    return [c * inv for c in a]


def _derivative_dense(a: list) -> list:
    return _trim([a[k] * k for k in range(1, len(a))])


def _require_univariate(*polys: MultiPoly):
    for p in polys:
        if p.nvars != 1:
            raise ValueError("univariate polynomial required (nvars = 1)")


def _gcd_dense(a: list, b: list) -> list:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        _, r = _divmod_dense(a, b)
        a, b = b, r
    return _monic(a)


def gcd_univariate(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Monic greatest common divisor over the Gaussian rationals."""
    _require_univariate(a, b)
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd of two zero polynomials is undefined")
    return MultiPoly.from_dense(_gcd_dense(a.to_dense(), b.to_dense()))


def divmod_univariate(a: MultiPoly, b: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    _require_univariate(a, b)
    q, r = _divmod_dense(a.to_dense(), b.to_dense())
    return MultiPoly.from_dense(q), MultiPoly.from_dense(r)


def squarefree_decompose(a: MultiPoly) -> list[tuple[MultiPoly, int]]:
    """Yun's algorithm: monic square-free factors with their multiplicities.

    The product of ``factor**multiplicity`` equals ``a`` up to a constant.
    """
    _require_univariate(a)
    if a.is_zero():
        raise ValueError("square-free decomposition of the zero polynomial")
    f = _monic(a.to_dense())
    out: list[tuple[MultiPoly, int]] = []
    if len(f) <= 1:
        return out
    df = _derivative_dense(f)
    g = _gcd_dense(f, df)
    b, _ = _divmod_dense(f, g)
    c, _ = _divmod_dense(df, g)
    k = 1
    while len(b) > 1:
        d = [x - y for x, y in _zip_pad(c, _derivative_dense(b))]
        d = _trim(d)
        h = _gcd_dense(b, d) if d else _monic(b)
        if len(h) > 1:
            out.append((MultiPoly.from_dense(h), k))
        b, _ = _divmod_dense(b, h)
        c, _ = _divmod_dense(d, h) if d else ([], [])
        k += 1
    return out


def _zip_pad(a: list, b: list):
    n = max(len(a), len(b))
    a = a + [ZERO] * (n - len(a))
    b = b + [ZERO] * (n - len(b))
    return zip(a, b)


class UnimodularPoint:
    """Point on a torus; each coordinate is an exact unimodular GaussianRational or a float angle."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable):
        out = []
        for c in coords:
            if isinstance(c, GaussianRational):
                if not c.is_unimodular():
                    raise ValueError(f"{c} is not unimodular")
                out.append(c)
            elif _is_exact_scalar(c):
                g = GaussianRational.coerce(c)
                if not g.is_unimodular():
                    raise ValueError(f"{c} is not unimodular")
                out.append(g)
            else:
                out.append(float(c))
        self.coords = tuple(out)

    @classmethod
    def from_angles(cls, angles: Iterable[float]) -> UnimodularPoint:
        return cls(float(a) for a in angles)

    @classmethod
    def from_complex(cls, values: Iterable[complex], tol: float = 1e-12) -> UnimodularPoint:
        out = []
        for v in values:
            v = complex(v)
            if abs(abs(v) - 1) > tol:
                raise ValueError(f"{v} is not unimodular within {tol}")
            out.append(cmath.phase(v))
        return cls(out)

    def __len__(self):
        return len(self.coords)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, GaussianRational) for c in self.coords)

    def exact_values(self) -> tuple[GaussianRational, ...]:
        if not self.is_exact:
            raise ValueError("point has float coordinates")
        return self.coords

    def to_complex(self) -> np.ndarray:
        return np.array(
            [complex(c) if isinstance(c, GaussianRational) else cmath.exp(1j * c) for c in self.coords],
            dtype=complex,
        )

    def angles(self) -> np.ndarray:
        return np.angle(self.to_complex())

    def values(self) -> tuple:
        """Coordinates suitable for :meth:`MultiPoly.eval` (exact where possible)."""
        return tuple(c if isinstance(c, GaussianRational) else cmath.exp(1j * c) for c in self.coords)

    def distance(self, other: UnimodularPoint) -> float:
        """Max angular distance between coordinates."""
        diff = np.angle(self.to_complex() * np.conj(other.to_complex()))
        return float(np.max(np.abs(diff))) if len(diff) else 0.0

    def __eq__(self, other):
        if not isinstance(other, UnimodularPoint):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def describe(self) -> list:
        out = []
        for c in self.coords:
            if isinstance(c, GaussianRational):
                out.append(str(c))
            else:
                out.append({"angle": c, "re": math.cos(c), "im": math.sin(c)})
        return out

    def __repr__(self):
        parts = [str(c) if isinstance(c, GaussianRational) else f"exp({c:.12g}i)" for c in self.coords]
        return f"UnimodularPoint({', '.join(parts)})"


def _newton_polish(coeffs: np.ndarray, z: complex, steps: int = 50) -> complex:
    """Complex Newton on a square-free polynomial (coefficients high to low)."""
    dcoeffs = np.polyder(coeffs)
    for _ in range(steps):
        f = np.polyval(coeffs, z)
        df = np.polyval(dcoeffs, z)
        if df == 0:
            break
        step = f / df
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _circle_polish(coeffs: np.ndarray, theta: float, steps: int = 50) -> float:
    """Gauss-Newton on the angle so the iterate stays on the circle."""
    dcoeffs = np.polyder(coeffs)
    for _ in range(steps):
        z = cmath.exp(1j * theta)
        f = np.polyval(coeffs, z)
        dtheta = 1j * z * np.polyval(dcoeffs, z)
        denom = abs(dtheta) ** 2
        if denom == 0:
            break
        step = (np.conj(dtheta) * f).real / denom
        theta -= step
        if abs(step) < 1e-17:
            break
    return theta


def roots_on_unit_circle(
    a: MultiPoly, tol: float = 1e-10, tie_band: float = 1e-6
) -> list[tuple[UnimodularPoint, int]]:
    """Roots of modulus one with exact multiplicities, sorted by angle in (-pi, pi].

    Multiplicities come from the square-free decomposition.  Candidates of
    each square-free factor ``f`` are the roots of ``gcd(f, reflect(f))``,
    i.e. the roots symmetric about the circle.  Roots at +-1, +-i and roots of
    linear factors are certified exactly; the rest are located numerically and
    kept when their modulus is within ``tol`` of one.  A candidate between
    ``tol`` and ``tie_band`` triggers :class:`RootToleranceWarning`.
    """
    _require_univariate(a)
    if a.is_zero():
        raise ValueError("roots of the zero polynomial")
    found: list[tuple[UnimodularPoint, int, float]] = []
    for factor, mult in squarefree_decompose(a):
        dense = factor.to_dense()
        sym = _gcd_dense(dense, reflect(factor, (len(dense) - 1,)).to_dense())
        if len(sym) <= 1:
            continue
        remaining = sym
        # exact certification first
        for cand in EXACT_UNIT_CANDIDATES:
            while len(remaining) > 1 and not MultiPoly.from_dense(remaining).eval((cand,)):
                found.append((UnimodularPoint([cand]), mult, math.atan2(float(cand.im), float(cand.re))))
                remaining, _ = _divmod_dense(remaining, [-cand, ONE])
        if len(remaining) == 2:
            root = -remaining[0] / remaining[1]
            if root.is_unimodular():
                found.append((UnimodularPoint([root]), mult, math.atan2(float(root.im), float(root.re))))
                continue
        if len(remaining) <= 1:
            continue
        coeffs = np.array([complex(c) for c in reversed(remaining)], dtype=complex)
        for z in np.roots(coeffs):
            z = _newton_polish(coeffs, complex(z))
            dev = abs(abs(z) - 1.0)
            if dev <= tol:
                theta = _circle_polish(coeffs, cmath.phase(z))
                theta = math.atan2(math.sin(theta), math.cos(theta))
                found.append((UnimodularPoint([theta]), mult, theta))
            elif dev <= tie_band:
                warnings.warn(
                    f"root {z} has | |z|-1 | = {dev:.3g}, between tolerance {tol:g} and {tie_band:g}",
                    RootToleranceWarning,
                    stacklevel=2,
                )
    found.sort(key=lambda t: (t[2] if t[2] > -math.pi + 1e-15 else math.pi))
    return [(pt, m) for pt, m, _ in found]


# ---------------------------------------------------------------------
# Multivariate GCD, delegated to sympy over QQ(i).

def _to_sympy(p: MultiPoly, gens):
    from sympy import Poly, QQ_I

    rep = {idx: QQ_I(_mpq(c.re), _mpq(c.im)) for idx, c in p.items()}
    return Poly.from_dict(rep or {(0,) * p.nvars: QQ_I(0, 0)}, *gens, domain=QQ_I)


def _mpq(x: Fraction):
    from sympy import QQ

    return QQ(x.numerator, x.denominator)


def _from_sympy(poly, nvars: int) -> MultiPoly:
    out = {}
    for idx, c in poly.rep.to_dict().items():
        out[tuple(idx)] = GaussianRational(
            Fraction(int(c.x.numerator), int(c.x.denominator)),
            Fraction(int(c.y.numerator), int(c.y.denominator)),
        )
    return MultiPoly(nvars, out)


def _specialize(p: MultiPoly, k: int, point: Sequence[Fraction]) -> MultiPoly:
    """Univariate polynomial in ``z_k`` after fixing the other variables at ``point``."""
    out: dict[tuple[int], GaussianRational] = {}
    for idx, c in p.items():
        for j, e in enumerate(idx):
            if j != k and e:
                c = c * point[j] ** e
        out[(idx[k],)] = out.get((idx[k],), GaussianRational(0)) + c
    return MultiPoly(1, out)


def _certified_coprime(polys: Sequence[MultiPoly]) -> bool:
    """True only if the polynomials provably have no common non-constant factor.

    A common factor ``g`` of positive degree in ``z_k`` keeps that degree
    after the other variables are fixed at a point where the leading
    coefficient (in ``z_k``) of one input is nonzero, because ``lc(g)``
    divides it.  So constant specialised gcds in every variable certify
    coprimality.  ``False`` means undecided.
    """
    nvars = polys[0].nvars
    for k in range(nvars):
        if any(p.degree(k) == 0 for p in polys):
            continue
        ref = min(polys, key=len)
        top = ref.degree(k)
        lead = MultiPoly(nvars, {idx: c for idx, c in ref.items() if idx[k] == top})
        for t in range(2, 12):
            point = [Fraction(t + 3 * j, 1 + j) for j in range(nvars)]
            if _specialize(lead, k, point).coeff((top,)):
                break
        else:
            return False
        g = _specialize(polys[0], k, point)
        for q in polys[1:]:
            g = gcd_univariate(g, _specialize(q, k, point))
            if g.is_constant():
                break
        if not g.is_constant():
            return False
    return True


def gcd_multivariate(*polys: MultiPoly) -> MultiPoly:
    """Exact GCD of several polynomials in the same variables, normalised monic
    in the leading term of sympy's lexicographic order."""
    nonzero = [p for p in polys if not p.is_zero()]
    if not nonzero:
        raise ValueError("gcd of zero polynomials is undefined")
    nvars = nonzero[0].nvars
    if nvars == 1:
        g = nonzero[0]
        for q in nonzero[1:]:
            g = gcd_univariate(g, q)
        return gcd_univariate(g, MultiPoly.zero(1))
    if nvars == 0:
        return MultiPoly.constant(0, 1)
    if any(p.is_constant() for p in nonzero) or _certified_coprime(nonzero):
        return MultiPoly.constant(nvars, 1)
    import sympy

    gens = sympy.symbols(f"x0:{nvars}")
    g = _to_sympy(nonzero[0], gens)
    for q in nonzero[1:]:
        if g.is_ground:
            break
        g = g.gcd(_to_sympy(q, gens))
    out = _from_sympy(g, nvars)
    if out.is_constant():
        return MultiPoly.constant(nvars, 1)
    lead = max(out.items(), key=lambda kv: kv[0])[1]
    return out.scale(lead.inverse())


def exact_divide(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Quotient ``a / b``; raises ``ValueError`` when ``b`` does not divide ``a``."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if b.is_constant():
        return a.scale(b.constant_term().inverse())
    if a.nvars == 1:
        q, r = divmod_univariate(a, b)
        if not r.is_zero():
            raise ValueError("inexact division")
        return q
    import sympy

    gens = sympy.symbols(f"x0:{a.nvars}")
    q, r = _to_sympy(a, gens).div(_to_sympy(b, gens))
    if not r.is_zero:
        raise ValueError("inexact division")
    return _from_sympy(q, a.nvars)
