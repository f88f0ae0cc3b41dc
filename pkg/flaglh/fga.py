"""
The formal group algebra S = R[[Lambda]]_F in its power-series model.

S is the series ring on x_{omega_1}..x_{omega_n}; x_lambda for any weight is
the formal sum of m-series of the fundamental generators. Elements carry a
precision measured in parameter weight (see flaglh.formal).
"""

from __future__ import annotations

import logging
import math

from sympy import sympify
from sympy.polys.polyerrors import ExactQuotientFailed

from flaglh.exceptions import NotInSError, NotInvertibleError, PrecisionExhaustedError
from flaglh.formal import (
    nary_sum,
    serialize_series,
    substitute,
    truncate,
    truncated_mul,
    weight_parts,
)

logger = logging.getLogger(__name__)

EXACT = math.inf


class SElem:
    """A truncated element of S: a polynomial in the series ring plus its precision."""

    __slots__ = ("algebra", "poly", "prec")

    def __init__(self, algebra, poly, prec=None):
        self.algebra = algebra
        self.prec = algebra.prec if prec is None else prec
        self.poly = truncate(poly, algebra.nvars, algebra.weights, self.prec)

    def _coerce(self, other):
        if isinstance(other, SElem):
            return other
        return self.algebra.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        return SElem(self.algebra, self.poly + other.poly, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return SElem(self.algebra, -self.poly, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        A = self.algebra
        prec = min(self.prec, other.prec)
        return SElem(A, truncated_mul(self.poly, other.poly, A.nvars, A.weights, prec), prec)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = self.algebra.one
        for _ in range(int(k)):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, SElem):
            try:
                other = self.algebra.const(other)
            except (TypeError, ValueError):
                return NotImplemented
        A = self.algebra
        prec = min(self.prec, other.prec)
        return truncate(self.poly - other.poly, A.nvars, A.weights, prec) == 0

    def __hash__(self):
        return hash((self.algebra.nvars, self.poly))

    def is_zero(self):
        return not self.poly

    def __bool__(self):
        return bool(self.poly)

    def __repr__(self):
        return f"SElem({self.algebra.render(self)}, prec={self.prec})"


class FormalGroupAlgebra:
    """S attached to a root system and a formal group law."""

    def __init__(self, rs, fgl, floor=None):
        self.rs = rs
        self.fgl = fgl
        self.coeff = fgl.coeff
        self.nvars = rs.rank
        self.names = tuple(f"x{i + 1}" for i in range(rs.rank))
        self.ring = self.coeff.series_ring(self.names)
        self.weights = self.coeff.weights
        self.prec = fgl.trunc if self.weights else EXACT
        self.floor = (fgl.trunc if floor is None else floor) if self.weights else EXACT
        self._gens = self.ring.gens[: self.nvars]
        self._params = self.ring.gens[self.nvars:]
        self._weight_cache = {}
        self._kappa = {}
        self._u = {}
        self._images = {}
        self._act_memo = {}
        self._G = None
        logger.debug(f"Formal group algebra on {self.names} with {fgl}")

    # -- constructors --------------------------------------------------------

    def elem(self, poly, prec=None):
        return SElem(self, poly, prec)

    def const(self, value):
        return SElem(self, self.ring.ground_new(self.coeff.convert(value)) if value else self.ring.zero)

    @property
    def zero(self):
        return SElem(self, self.ring.zero)

    @property
    def one(self):
        return SElem(self, self.ring.one)

    def gen(self, i):
        return SElem(self, self._gens[i])

    def param(self, name):
        return SElem(self, self._params[self.coeff.params.index(name)])

    # -- generators x_lambda, kappa_beta, u_beta -----------------------------

    def x_of_weight(self, weight):
        """x_lambda as the formal sum of [c_i](x_{omega_i})."""
        weight = tuple(int(c) for c in weight)
        cached = self._weight_cache.get(weight)
        if cached is not None:
            return cached
        fgl = self.fgl
        terms = []
        for i, c in enumerate(weight):
            if c:
                series = fgl.m_series(c)
                terms.append(
                    substitute(series, [self._gens[i]], 1, self.ring, self.nvars, self.weights, fgl.trunc)
                )
        poly = nary_sum(fgl, terms, self.ring, self.nvars) if terms else self.ring.zero
        result = SElem(self, poly)
        self._weight_cache[weight] = result
        return result

    def x_root(self, root):
        return self.x_of_weight(root)

    def fgl_add(self, a, b):
        prec = min(a.prec, b.prec, self.prec)
        return SElem(self, self.fgl.add(a.poly, b.poly, self.nvars, self.fgl.trunc), prec)

    def kappa(self, root):
        """kappa_beta = G(x_beta, x_{-beta})."""
        root = tuple(root)
        if root not in self._kappa:
            xb = self.x_root(root).poly
            xm = self.x_root(self.rs.negate(root)).poly
            poly = substitute(self.fgl.G, [xb, xm], 2, self.ring, self.nvars, self.weights, self.fgl.trunc)
            self._kappa[root] = SElem(self, poly)
        return self._kappa[root]

    def u(self, root):
        """u_beta = x_beta / x_{-beta} = -1 + kappa_beta x_beta."""
        root = tuple(root)
        if root not in self._u:
            self._u[root] = -1 + self.kappa(root) * self.x_root(root)
        return self._u[root]

    def x_parabolic(self):
        """x_L: product of x_{-beta} over the positive Levi roots."""
        result = self.one
        for b in self.rs.levi_positive_roots:
            result = result * self.x_root(self.rs.negate(b))
        return result

    def x_full(self):
        """x_G: product of x_{-beta} over all positive roots."""
        result = self.one
        for b in self.rs.positive_roots:
            result = result * self.x_root(self.rs.negate(b))
        return result

    # -- Weyl action ---------------------------------------------------------

    def weyl_act(self, w, s):
        """w(s): substitute x_{omega_i} -> x_{w(omega_i)}."""
        if w == self.rs.identity or not s.poly:
            return s
        key = (w.index, s.poly, s.prec)
        hit = self._act_memo.get(key)
        if hit is not None:
            return hit
        entry = self._images.get(w.index)
        if entry is None:
            images = []
            for i in range(self.nvars):
                omega = tuple(1 if k == i else 0 for k in range(self.nvars))
                images.append(self.x_of_weight(self.rs.act_on_weight(w, omega)).poly)
            entry = self._images[w.index] = (images, {})
        images, caches = entry
        prec = s.prec
        work = self.fgl.trunc if prec == EXACT else prec
        # monomial images are truncated at work, so each precision keeps its own cache
        cache = caches.setdefault(work, {})
        poly = substitute(s.poly, images, self.nvars, self.ring, self.nvars, self.weights, work, cache)
        result = SElem(self, poly, prec)
        self._act_memo[key] = result
        return result

    # -- augmentation --------------------------------------------------------

    def augment(self, s):
        """Constant term, as a sympy number or expression in the parameters."""
        value = 0
        for m, c in s.poly.items():
            if not any(m[: self.nvars]):
                value += self.coeff.param_value(m[self.nvars:], c)
        return value.expand() if hasattr(value, "expand") else value

    def in_splus(self, s):
        return self.augment(s) == 0

    def in_one_plus_splus(self, s):
        return self.augment(s) == 1

    # -- division ------------------------------------------------------------

    def try_divide(self, n, d):
        """The exact quotient n/d, solved weight by weight; NotInSError if none."""
        if not d.poly:
            raise NotInSError("Division by zero in S")
        if not n.poly:
            return SElem(self, self.ring.zero, min(n.prec, d.prec))
        if not self.weights:
            try:
                return SElem(self, n.poly.exquo(d.poly), EXACT)
            except ExactQuotientFailed:
                raise NotInSError("Exact quotient does not exist in S")

        d_parts = weight_parts(d.poly, self.nvars, self.weights)
        n_parts = weight_parts(n.poly, self.nvars, self.weights)
        j0 = min(d_parts)
        lead = d_parts[j0]
        if any(w < j0 for w in n_parts):
            raise NotInSError("Numerator has terms below the valuation of the divisor")
        prec = min(n.prec, d.prec) - j0
        if prec < self.floor:
            raise PrecisionExhaustedError(
                f"Division by an element of valuation {j0} leaves precision {prec} < {self.floor}"
            )
        zero = self.ring.zero
        q_parts = []
        for w in range(int(prec) + 1):
            r = n_parts.get(w + j0, zero)
            for i in range(1, w + 1):
                di = d_parts.get(j0 + i)
                if di is not None and q_parts[w - i]:
                    r = r - q_parts[w - i] * di
            try:
                q_parts.append(r.exquo(lead) if r else zero)
            except ExactQuotientFailed:
                raise NotInSError(f"No exact quotient at parameter weight {w}")
        q = zero
        for part in q_parts:
            q = q + part
        return SElem(self, q, prec)

    def weight_zero_unit(self, s):
        """True when the weight-0 part of s is a unit constant."""
        lowest = [m for m in s.poly if not self.weights or not any(m[self.nvars:])]
        if not lowest or any(any(m[: self.nvars]) for m in lowest):
            return False
        c = s.poly[lowest[0]]
        return self.coeff.domain.is_unit(c)

    def invert(self, s):
        if not self.weight_zero_unit(s):
            raise NotInvertibleError(f"{self.render(s)} is not a unit of S")
        return self.try_divide(SElem(self, self.ring.one, s.prec), s)

    def invert_matrix(self, rows):
        """Inverse of a square matrix over S by Gauss-Jordan with unit pivots."""
        n = len(rows)
        M = [list(r) + [self.one if i == j else self.zero for j in range(n)] for i, r in enumerate(rows)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if self.weight_zero_unit(M[r][col])), None)
            if pivot is None:
                raise NotInvertibleError(f"No unit pivot in column {col}")
            M[col], M[pivot] = M[pivot], M[col]
            inv = self.invert(M[col][col])
            M[col] = [inv * e if e else e for e in M[col]]
            for r in range(n):
                factor = M[r][col]
                if r != col and factor:
                    M[r] = [a - factor * b if b else a for a, b in zip(M[r], M[col])]
        return [row[n:] for row in M]

    # -- output --------------------------------------------------------------

    def serialize(self, s, specialize=True):
        return serialize_series(s.poly, self.nvars, self.coeff, specialize)

    def specialized_equal(self, a, b):
        """Equality once the numeric parameter values are substituted."""
        return not self.serialize(a - b)

    def render(self, s):
        """Plain string with the parameter specialization applied."""
        if not s.poly:
            return "0"
        expr = 0
        symbols = [self.ring.symbols[i] for i in range(self.nvars)]
        for m, c in s.poly.items():
            term = self.coeff.param_value(m[self.nvars:], c)
            for sym, e in zip(symbols, m[: self.nvars]):
                if e:
                    term *= sym ** e
            expr += term
        return str(expr.expand()) if hasattr(expr, "expand") else str(expr)

    def deserialize(self, data, prec=None):
        """Inverse of serialize for unspecialized coefficients."""
        symbols = {str(sym): sym for sym in self.ring.symbols}
        gens = self.ring.gens[: self.nvars]
        poly = self.ring.zero
        for exps, text in data:
            term = self.ring.from_expr(sympify(text, locals=symbols))
            for g, e in zip(gens, exps):
                if e:
                    term = term * g ** e
            poly = poly + term
        return self.elem(poly, prec)
