"""
The twisted group algebra Q_W and the formal affine Demazure algebra inside it.

Elements are stored in delta-coordinates: a QWElem maps a Weyl group element
z to the coefficient q_z of delta_z, with the product
(q delta_z)(q' delta_y) = q z(q') delta_{zy}.
"""

from __future__ import annotations

import logging
import time

from flaglh.exceptions import NotInSError

logger = logging.getLogger(__name__)


class QWElem:
    """A finite sum of q_z delta_z; absent keys are zero."""

    __slots__ = ("tga", "coeffs")

    def __init__(self, tga, coeffs=None):
        self.tga = tga
        self.coeffs = {z: q for z, q in (coeffs or {}).items() if not q.is_zero()}

    def __getitem__(self, z):
        return self.coeffs.get(z, self.tga.loc.zero)

    def support(self):
        return sorted(self.coeffs)

    def items(self):
        return sorted(self.coeffs.items())

    def __add__(self, other):
        out = dict(self.coeffs)
        for z, q in other.coeffs.items():
            out[z] = out[z] + q if z in out else q
        return QWElem(self.tga, out)

    def __neg__(self):
        return QWElem(self.tga, {z: -q for z, q in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, QWElem):
            return self.tga.mul_qw(self, other)
        return self.tga.rmul_scalar(self, self.tga.loc.coerce(other))

    def __rmul__(self, other):
        q = self.tga.loc.coerce(other)
        return QWElem(self.tga, {z: q * c for z, c in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, QWElem):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self[z] == other[z] for z in keys)

    __hash__ = None

    def __repr__(self):
        rs = self.tga.rs
        terms = ", ".join(f"{rs.name(z)}: {q!r}" for z, q in self.items())
        return f"QWElem({{{terms}}})"


class BaseChange:
    """Transition matrices between the delta basis and the Y (or X) basis."""

    def __init__(self, tga, family="Y"):
        self.tga = tga
        self.family = family
        self.rs = tga.rs
        self.words = tga.words
        start = time.perf_counter()
        loc = tga.loc
        elements = self.rs.elements

        # a[z][y]: coefficient of delta_y in Y_z (or X_z)
        self.a = {}
        for z in elements:
            h = tga.seq(self.words[z], family)
            self.a[z] = {y: q for y, q in h.coeffs.items()}

        # b[z][y]: coefficient of Y_y in delta_z, filled for y in decreasing order
        self.b = {}
        for z in elements:
            row = {z: _into_S(loc, loc.inverse(self.a[z][z]), (z, z), self.rs)}
            for y in reversed(elements[: z.index]):
                acc = None
                for x, bzx in row.items():
                    axy = self.a[x].get(y)
                    if axy is not None:
                        term = bzx * axy
                        acc = term if acc is None else acc + term
                if acc is None or acc.is_zero():
                    continue
                entry = _into_S(loc, -(acc * self.b[y][y]), (z, y), self.rs)
                if not entry.is_zero():
                    row[y] = entry
            self.b[z] = row
        logger.info(
            f"Base change {family} for {self.rs.family}{self.rs.rank} built in "
            f"{time.perf_counter() - start:.2f}s"
        )

    def a_entry(self, z, y):
        return self.a[z].get(y, self.tga.loc.zero)

    def b_entry(self, z, y):
        return self.b[z].get(y, self.tga.loc.zero)

    def b_S(self, z, y):
        """b_{z,y} as an element of S."""
        return self.b_entry(z, y).num

    def check(self):
        """B.A = identity and lower triangularity of A in the Bruhat order."""
        rs = self.rs
        loc = self.tga.loc
        bad = []
        for z in rs.elements:
            for y in rs.elements:
                total = loc.zero
                for x, bzx in self.b[z].items():
                    axy = self.a[x].get(y)
                    if axy is not None:
                        total = total + bzx * axy
                if total != (1 if z == y else 0):
                    bad.append((rs.name(z), rs.name(y)))
        results = [(not bad, f"{self.family}: B.A = identity: bad={bad}")]
        bad = [
            (rs.name(z), rs.name(y))
            for z in rs.elements for y in self.a[z] if not rs.bruhat_leq(y, z)
        ]
        results.append((not bad, f"{self.family}: a_(z,y) = 0 unless y <= z: bad={bad}"))
        return results


def _into_S(loc, q, indices, rs):
    """Reduce q to a denominator-free QElem, reporting indices on failure."""
    try:
        return loc.from_S(loc.to_S(q))
    except NotInSError:
        z, y = indices
        raise NotInSError(f"b[{rs.name(z)},{rs.name(y)}] is not in S", indices=(z, y))


class TwistedGroupAlgebra:
    """Q_W with its Demazure and push-pull elements."""

    def __init__(self, loc, words=None):
        self.loc = loc
        self.algebra = loc.algebra
        self.rs = loc.rs
        self.words = words if words is not None else self.rs.words
        self._seq = {"Y": {(): self.delta(self.rs.identity)}, "X": {(): self.delta(self.rs.identity)}}
        self._twist = {}
        self._base = {}
        self._cache = {}

    # -- basic elements --------------------------------------------------------

    def delta(self, z):
        return QWElem(self, {z: self.loc.one})

    def scalar(self, q):
        return QWElem(self, {self.rs.identity: self.loc.coerce(q)})

    def twist(self, z, q):
        """z(q) for q in Q, memoized."""
        key = (z.index, q, q.prec)
        hit = self._twist.get(key)
        if hit is None:
            hit = self._twist[key] = self.loc.weyl_act_q(z, q)
        return hit

    def mul_qw(self, h, k):
        out = {}
        for z, q in h.coeffs.items():
            for y, r in k.coeffs.items():
                zy = self.rs.mul(z, y)
                term = q * self.twist(z, r)
                out[zy] = out[zy] + term if zy in out else term
        return QWElem(self, out)

    def rmul_scalar(self, h, q):
        """h * q = sum q_y y(q) delta_y."""
        return QWElem(self, {y: c * self.twist(y, q) for y, c in h.coeffs.items()})

    def x_of(self, i):
        """
        Demazure element X_s = x_alpha^{-1} (delta_s - delta_e).

        This sign makes X_s = Y_s - kappa_alpha and delta_s = 1 + x_alpha X_s,
        and is the one under which the algebraic A2 table has the entries
        x_alpha and -kappa_alpha.
        """
        key = ("X", i)
        if key not in self._cache:
            inv = self.loc.inv_root(self.rs.simple_root(i))
            self._cache[key] = QWElem(self, {self.rs.identity: -inv, self.rs.simple[i]: inv})
        return self._cache[key]

    def y_of(self, i):
        """Y_s = x_{-alpha}^{-1} delta_e + x_alpha^{-1} delta_s."""
        key = ("Y", i)
        if key not in self._cache:
            alpha = self.rs.simple_root(i)
            self._cache[key] = QWElem(self, {
                self.rs.identity: self.loc.inv_root(self.rs.negate(alpha)),
                self.rs.simple[i]: self.loc.inv_root(alpha),
            })
        return self._cache[key]

    def generator(self, i, family="Y"):
        return self.y_of(i) if family == "Y" else self.x_of(i)

    def _sum_over(self, elements, inverse_roots):
        q = self.loc.inv_root_monomial(inverse_roots)
        return QWElem(self, {v: self.twist(v, q) for v in elements})

    def y_parab(self):
        """Y_P = sum over W_L of delta_v x_L^{-1}, stored as v(x_L^{-1}) delta_v."""
        if "YP" not in self._cache:
            rs = self.rs
            self._cache["YP"] = self._sum_over(rs.levi, [rs.negate(b) for b in rs.levi_positive_roots])
        return self._cache["YP"]

    def y_gl(self):
        """Y_{G,L} = sum over W^L of delta_w x_G^{-1} x_L."""
        if "YGL" not in self._cache:
            rs = self.rs
            levi = set(rs.levi_positive_roots)
            roots = [rs.negate(b) for b in rs.positive_roots if b not in levi]
            self._cache["YGL"] = self._sum_over(rs.min_reps, roots)
        return self._cache["YGL"]

    def y_full(self):
        """Y_G = sum over W of delta_v x_G^{-1}."""
        if "YG" not in self._cache:
            rs = self.rs
            self._cache["YG"] = self._sum_over(rs.elements, [rs.negate(b) for b in rs.positive_roots])
        return self._cache["YG"]

    # -- products along words ----------------------------------------------------

    def seq(self, word, family="Y"):
        """Y_I (or X_I) as the left-to-right product, memoized by prefix."""
        word = tuple(word)
        memo = self._seq[family]
        hit = memo.get(word)
        if hit is None:
            hit = self.seq(word[:-1], family) * self.generator(word[-1], family)
            memo[word] = hit
        return hit

    def y_seq(self, word):
        return self.seq(word, "Y")

    def x_seq(self, word):
        return self.seq(word, "X")

    def y_elem(self, z):
        return self.y_seq(self.words[z])

    def x_elem(self, z):
        return self.x_seq(self.words[z])

    # -- action on S and Q ----------------------------------------------------------

    def act(self, h, q):
        """h . q = sum q_y y(q)."""
        q = self.loc.coerce(q)
        total = self.loc.zero
        for y, c in h.coeffs.items():
            total = total + c * self.twist(y, q)
        return total

    act_on_S = act

    def delta_op(self, i, q):
        """Delta_s(q) = (q - s(q)) / x_{-alpha}; q Y_s = Y_s s(q) + Delta_s(q)."""
        q = self.loc.coerce(q)
        alpha = self.rs.simple_root(i)
        diff = q - self.twist(self.rs.simple[i], q)
        return diff * self.loc.inv_root(self.rs.negate(alpha))

    # -- base change ------------------------------------------------------------------

    def base_change(self, family="Y"):
        if family not in ("Y", "X"):
            raise ValueError(f"Unknown basis family '{family}'")
        if family not in self._base:
            self._base[family] = BaseChange(self, family)
        return self._base[family]

    def sequence_coeffs(self, word, family="Y"):
        """Coefficients of Y_I in the Y basis, each verified to lie in S."""
        word = tuple(word)
        key = ("coeffs", family, word)
        if key in self._cache:
            return self._cache[key]
        bc = self.base_change(family)
        h = self.seq(word, family)
        out = {}
        for x in self.rs.elements:
            total = self.loc.zero
            for y, c in h.coeffs.items():
                bxy = bc.b[y].get(x)
                if bxy is not None:
                    total = total + c * bxy
            if total:
                try:
                    out[x] = self.loc.to_S(total)
                except NotInSError:
                    raise NotInSError(
                        f"b[{self.rs.letters(word)},{self.rs.name(x)}] is not in S", indices=(word, x)
                    )
        self._cache[key] = out
        return out

    def b_of_sequence(self, word, z, family="Y"):
        return self.sequence_coeffs(word, family).get(z, self.algebra.zero)
