"""
The localization Q of S at the root elements x_beta.

A QElem is num / prod(x_beta ** den[k]) with the product over the positive
roots in their fixed order; a denominator x_{-beta} is always rewritten as
u_beta / x_beta first.
"""

from __future__ import annotations

import logging

from flaglh.exceptions import NotInSError, NotInvertibleError

logger = logging.getLogger(__name__)


class QElem:
    """num / x^den; den is a tuple of exponents indexed by the positive roots."""

    __slots__ = ("loc", "num", "den")

    def __init__(self, loc, num, den=None):
        self.loc = loc
        self.num = num
        self.den = den if den is not None else loc.no_den

    @property
    def prec(self):
        return self.num.prec

    def __add__(self, other):
        return self.loc.add(self, self.loc.coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return QElem(self.loc, -self.num, self.den)

    def __sub__(self, other):
        return self + (-self.loc.coerce(other))

    def __rsub__(self, other):
        return self.loc.coerce(other) - self

    def __mul__(self, other):
        return self.loc.mul(self, self.loc.coerce(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = self.loc.coerce(other)
        except TypeError:
            return NotImplemented
        return self.loc.equal(self, other)

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def __repr__(self):
        return f"QElem({self.loc.render(self)})"


class Localization:
    """Field-of-fractions arithmetic for S with root-monomial denominators."""

    def __init__(self, algebra):
        self.algebra = algebra
        self.rs = algebra.rs
        self.roots = self.rs.positive_roots
        self.no_den = (0,) * len(self.roots)
        self._den_poly = {}
        self._inv_root = {}

    def coerce(self, value):
        if isinstance(value, QElem):
            return value
        if hasattr(value, "poly"):
            return QElem(self, value)
        if isinstance(value, (int,)) or hasattr(value, "is_Number"):
            return QElem(self, self.algebra.const(value))
        raise TypeError(f"Cannot coerce {value!r} into Q")

    def from_S(self, s):
        return QElem(self, s)

    @property
    def zero(self):
        return QElem(self, self.algebra.zero)

    @property
    def one(self):
        return QElem(self, self.algebra.one)

    def den_poly(self, den):
        """prod(x_beta ** den_k) as an SElem."""
        hit = self._den_poly.get(den)
        if hit is None:
            hit = self.algebra.one
            for k, e in enumerate(den):
                if e:
                    hit = hit * self.algebra.x_root(self.roots[k]) ** e
            self._den_poly[den] = hit
        return hit

    # -- arithmetic ------------------------------------------------------------

    def add(self, a, b):
        if a.num.is_zero():
            return b
        if b.num.is_zero():
            return a
        if a.den == b.den:
            return QElem(self, a.num + b.num, a.den)
        den = tuple(max(p, q) for p, q in zip(a.den, b.den))
        na = a.num * self.den_poly(tuple(d - p for d, p in zip(den, a.den)))
        nb = b.num * self.den_poly(tuple(d - q for d, q in zip(den, b.den)))
        return QElem(self, na + nb, den)

    def mul(self, a, b):
        if a.num.is_zero() or b.num.is_zero():
            return QElem(self, self.algebra.zero, self.no_den)
        return QElem(self, a.num * b.num, tuple(p + q for p, q in zip(a.den, b.den)))

    def neg(self, a):
        return -a

    def equal(self, a, b):
        if a.den == b.den:
            return a.num == b.num
        return a.num * self.den_poly(b.den) == b.num * self.den_poly(a.den)

    def inv_root_monomial(self, roots):
        """1 / prod(x_beta) over a multiset of roots; negatives become u_beta / x_beta."""
        num = self.algebra.one
        den = list(self.no_den)
        for root in roots:
            positive, sign = self.rs.normalize_root(root)
            den[self.rs.positive_index(positive)] += 1
            if sign < 0:
                num = num * self.algebra.u(positive)
        return QElem(self, num, tuple(den))

    def inv_root(self, root):
        root = tuple(root)
        hit = self._inv_root.get(root)
        if hit is None:
            hit = self._inv_root[root] = self.inv_root_monomial([root])
        return hit

    def weyl_act_q(self, w, a):
        """w(num) / prod x_{w beta}, renormalized to positive denominators."""
        if w == self.rs.identity or a.num.is_zero():
            return a
        num = self.algebra.weyl_act(w, a.num)
        den = list(self.no_den)
        for k, e in enumerate(a.den):
            if not e:
                continue
            positive, sign = self.rs.normalize_root(self.rs.act_on_weight(w, self.roots[k]))
            den[self.rs.positive_index(positive)] += e
            if sign < 0:
                num = num * self.algebra.u(positive) ** e
        return QElem(self, num, tuple(den))

    # -- reduction to S --------------------------------------------------------

    def normalize(self, a):
        """Cancel every root factor of the denominator that divides the numerator."""
        if a.num.is_zero():
            return QElem(self, a.num, self.no_den)
        num, den = a.num, list(a.den)
        for k in range(len(den)):
            while den[k]:
                try:
                    num = self.algebra.try_divide(num, self.algebra.x_root(self.roots[k]))
                except NotInSError:
                    break
                den[k] -= 1
        return QElem(self, num, tuple(den))

    def to_S(self, a):
        if not any(a.den):
            return a.num
        if a.num.is_zero():
            return a.num
        try:
            return self.algebra.try_divide(a.num, self.den_poly(a.den))
        except NotInSError:
            raise NotInSError(f"{self.render(a)} does not lie in S")

    def in_S(self, a):
        try:
            self.to_S(a)
        except NotInSError:
            return False
        return True

    def inverse(self, a):
        """x^den / num; the numerator must be a unit of S."""
        try:
            inv = self.algebra.invert(a.num)
        except NotInvertibleError:
            a = self.normalize(a)
            inv = self.algebra.invert(a.num)
        return QElem(self, inv * self.den_poly(a.den), self.no_den)

    # -- output ------------------------------------------------------------------

    def serialize(self, a):
        a = self.normalize(a)
        den = {
            ",".join(str(c) for c in self.rs.root_coords(self.roots[k])): e
            for k, e in enumerate(a.den) if e
        }
        return {"num": self.algebra.serialize(a.num), "den": den}

    def render(self, a):
        text = self.algebra.render(a.num)
        parts = [
            f"x[{self.rs.root_name(self.roots[k])}]" + (f"^{e}" if e > 1 else "")
            for k, e in enumerate(a.den) if e
        ]
        return text if not parts else f"({text})/({'*'.join(parts)})"
