"""
The dual D* in the fixed-point model: functions W -> Q with pointwise
operations, the bullet action (h . f)(h') = f(h'h), the classes Y_z^x,
the dual bases, scalar pairings and the Levi-side maps.
"""

from __future__ import annotations

import logging
from itertools import combinations_with_replacement

from sympy import QQ as SYMPY_QQ
from sympy import Rational
from sympy.polys.matrices import DomainMatrix

from flaglh.exceptions import NotInDualError, NotInSError, VerificationError
from flaglh.formal import truncate

logger = logging.getLogger(__name__)


class DualElem:
    """A function on the group (or on W_L for the Levi model); absent keys are zero."""

    __slots__ = ("model", "values")

    def __init__(self, model, values=None):
        self.model = model
        self.values = {z: q for z, q in (values or {}).items() if not q.is_zero()}

    def __getitem__(self, z):
        return self.values.get(z, self.model.loc.zero)

    def __add__(self, other):
        out = dict(self.values)
        for z, q in other.values.items():
            out[z] = out[z] + q if z in out else q
        return DualElem(self.model, out)

    def __neg__(self):
        return DualElem(self.model, {z: -q for z, q in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, DualElem):
            return DualElem(self.model, {
                z: q * other.values[z] for z, q in self.values.items() if z in other.values
            })
        q = self.model.loc.coerce(other)
        return DualElem(self.model, {z: q * c for z, c in self.values.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DualElem):
            return NotImplemented
        keys = set(self.values) | set(other.values)
        return all(self[z] == other[z] for z in keys)

    __hash__ = None

    def is_constant(self):
        """True when the function takes one value on the whole domain."""
        first = self[self.model.domain[0]]
        return all(self[z] == first for z in self.model.domain)

    def serialize(self):
        rs = self.model.rs
        return [[rs.letters(rs.words[z]), self.model.loc.serialize(q)] for z, q in sorted(self.values.items())]

    def __repr__(self):
        rs = self.model.rs
        terms = ", ".join(f"{rs.name(z)}: {q!r}" for z, q in sorted(self.values.items()))
        return f"DualElem({{{terms}}})"


class DualModel:
    """D* (or D_L^* when levi is set) in the fixed-point model."""

    def __init__(self, tga, levi=False):
        self.tga = tga
        self.loc = tga.loc
        self.algebra = tga.algebra
        self.rs = tga.rs
        self.levi = levi
        self.domain = list(self.rs.levi) if levi else list(self.rs.elements)
        self._domain_set = set(self.domain)
        self.x_top = self.algebra.x_parabolic() if levi else self.algebra.x_full()
        self._duals = {}
        self._times = {}
        self._projected = {}
        self._zstar = None
        self._memo = {}
        self._levi_model = None

    @property
    def y_top(self):
        """Y_G for the full model; Y_P, the Levi top element, otherwise."""
        return self.tga.y_parab() if self.levi else self.tga.y_full()

    @property
    def levi_model(self):
        if self.levi:
            return self
        if self._levi_model is None:
            self._levi_model = DualModel(self.tga, levi=True)
        return self._levi_model

    # -- pointwise structure ------------------------------------------------------

    def f_point(self, z):
        return DualElem(self, {z: self.loc.one})

    def one(self):
        return DualElem(self, {z: self.loc.one for z in self.domain})

    def const(self, q):
        q = self.loc.coerce(q)
        return DualElem(self, {z: q for z in self.domain})

    def from_values(self, values):
        return DualElem(self, {z: self.loc.coerce(q) for z, q in values.items()})

    # -- bullet action ---------------------------------------------------------------

    def bullet(self, h, f):
        """(h . f)(z) = sum_y z(q_y) f(zy)."""
        rs = self.rs
        out = {}
        for z in self.domain:
            total = None
            for y, q in h.coeffs.items():
                zy = rs.mul(z, y)
                value = f.values.get(zy)
                if value is None:
                    continue
                term = self.tga.twist(z, q) * value
                total = term if total is None else total + term
            if total is not None:
                out[z] = total
        return DualElem(self, out)

    def evaluate(self, g, h):
        """g(h) = sum_y q_y g(y)."""
        total = self.loc.zero
        for y, q in h.coeffs.items():
            value = g.values.get(y)
            if value is not None:
                total = total + q * value
        return total

    def is_WL_invariant(self, f):
        """delta_v . f = f for the simple reflections of the Levi subgroup."""
        for i in self.rs.parabolic:
            if self.bullet(self.tga.delta(self.rs.simple[i]), f) != f:
                return False
        return True

    def project_parab(self, f):
        return self.bullet(self.tga.y_parab(), f)

    def projected_times(self, z):
        """Y_P . Y_z^x, memoized; shared by the Z^* Gram system and the e-coefficients."""
        if z not in self._projected:
            self._projected[z] = self.project_parab(self.y_times(z))
        return self._projected[z]

    def memo(self, key, build):
        """Value of build() stored under key for the life of the model."""
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    # -- classes and dual bases ------------------------------------------------------

    def times(self, z, family="Y"):
        """Y_z^x (or X_z^x) from the closed form a_{z,y} y(x_top) f_y."""
        key = (family, z)
        if key not in self._times:
            bc = self.tga.base_change(family)
            x_top = self.loc.from_S(self.x_top)
            self._times[key] = DualElem(self, {
                y: a * self.tga.twist(y, x_top)
                for y, a in bc.a[z].items() if y in self._domain_set
            })
        return self._times[key]

    def times_by_bullet(self, z, family="Y"):
        """Y_{I_z rev} . x_top f_e, applying the first letter of I_z first."""
        word = tuple(reversed(self.rs.words[z]))
        h = self.tga.seq(word, family)
        start = DualElem(self, {self.rs.identity: self.loc.from_S(self.x_top)})
        return self.bullet(h, start)

    def y_times(self, z, check=False):
        return self._checked_times(z, "Y", check)

    def x_times(self, z, check=False):
        return self._checked_times(z, "X", check)

    def _checked_times(self, z, family, check):
        closed = self.times(z, family)
        if check and closed != self.times_by_bullet(z, family):
            raise VerificationError(
                f"{family}_{self.rs.name(z)}^x differs between the closed form and the bullet route"
            )
        return closed

    def dual_basis(self, family="Y"):
        """family_x^*(z) = b_{z,x} for every x in the domain."""
        if family not in self._duals:
            bc = self.tga.base_change(family)
            cols = {x: {} for x in self.domain}
            for z in self.domain:
                for x, bzx in bc.b[z].items():
                    if x in cols:
                        cols[x][z] = bzx
            self._duals[family] = {x: DualElem(self, cols[x]) for x in self.domain}
            logger.debug(f"Dual basis {family}^* over {len(self.domain)} points")
        return self._duals[family]

    def expand_in(self, f, family="Y"):
        """Coefficients c with f = sum c_x family_x^*; each verified to lie in S."""
        bc = self.tga.base_change(family)
        out = {}
        for x in self.domain:
            total = None
            for y, a in bc.a[x].items():
                value = f.values.get(y)
                if value is not None:
                    term = a * value
                    total = term if total is None else total + term
            if total is None or total.is_zero():
                continue
            try:
                c = self.loc.to_S(total)
            except NotInSError:
                raise NotInDualError(f"Coefficient at {self.rs.name(x)} does not lie in S")
            if not c.is_zero():
                out[x] = c
        return out

    def rebuild(self, coeffs, family="Y"):
        duals = self.dual_basis(family)
        out = DualElem(self)
        for x, c in coeffs.items():
            out = out + duals[x] * c
        return out

    # -- pairings -----------------------------------------------------------------

    def _constant_pairing(self, top, f, g, check):
        product = f * g
        value = self.evaluate(product, top)
        if check:
            image = self.bullet(top, product)
            if not image.is_constant():
                raise VerificationError("Pairing image is not a constant function")
        return self.loc.to_S(value)

    def pairing(self, f, g, check=True):
        """<f, g> = Y_top . (fg), a constant function; returns its value."""
        return self._constant_pairing(self.y_top, f, g, check)

    def pairing_parab(self, f, g, check=True):
        """<f, g> on the W_L-invariants: Y_{G,L} . (fg)."""
        if check and not (self.is_WL_invariant(f) and self.is_WL_invariant(g)):
            raise VerificationError("Parabolic pairing of non-invariant functions")
        return self._constant_pairing(self.tga.y_gl(), f, g, check)

    def pairing_L(self, g, h, check=True):
        """Pairing on D_L^*, with x_L in place of x_G."""
        return self.levi_model.pairing(g, h, check)

    def check_dual_bases(self, family="Y"):
        """<family_z^x, family_y^*> = delta_{z,y} over the whole domain."""
        duals = self.dual_basis(family)
        bad = []
        for z in self.domain:
            cls = self.times(z, family)
            for y in self.domain:
                value = self.pairing(cls, duals[y], check=False)
                if value != (1 if z == y else 0):
                    bad.append((self.rs.name(z), self.rs.name(y)))
        return not bad, f"<{family}_z^x, {family}_y^*> = delta: bad={bad}"

    # -- Z_w^* ---------------------------------------------------------------------

    def z_star(self, w):
        """The element of span{X_w''^*} dual to {Y_P . Y_w'^x} under the parabolic pairing."""
        if self._zstar is None:
            reps = self.rs.min_reps
            xs = self.dual_basis("X")
            projected = [self.projected_times(w2) for w2 in reps]
            gram = [[self.pairing_parab(xs[w1], p, check=False) for p in projected] for w1 in reps]
            # c^T G = e_w^T, so the coefficients of Z_w^* form row w of G^{-1}
            inverse = self.algebra.invert_matrix(gram)
            self._zstar = {}
            for k, w0 in enumerate(reps):
                out = DualElem(self)
                for j, w1 in enumerate(reps):
                    if inverse[k][j]:
                        out = out + xs[w1] * inverse[k][j]
                self._zstar[w0] = out
            logger.debug(f"Solved the Z^* Gram system of size {len(reps)}")
        return self._zstar[w]

    # -- Levi side --------------------------------------------------------------------

    def restrict_L(self, f):
        """i_a^*: keep the values on W_L."""
        levi = self.levi_model
        return DualElem(levi, {z: q for z, q in f.values.items() if z in levi._domain_set})

    def levi_duals(self, family="Y"):
        return self.levi_model.dual_basis(family)

    def section_j_a(self, g, family="Y"):
        """j_a: family_{v,L}^* -> family_v^*, extended S-linearly."""
        coeffs = self.levi_model.expand_in(g, family)
        return self.rebuild(coeffs, family)

    # -- characteristic and Borel maps ------------------------------------------------

    def char_map(self, p):
        """ch_a(p) = sum_w w(p) f_w."""
        p = self.loc.coerce(p)
        return DualElem(self, {z: self.tga.twist(z, p) for z in self.domain})

    def char_map_L(self, p):
        return self.levi_model.char_map(p)

    def char_map_by_bullet(self, p):
        """p . 1, the same map through the bullet action."""
        return self.bullet(self.tga.scalar(p), self.one())

    def borel_rho(self, p, q):
        """rho(p (x) q) = p ch_a(q)."""
        return self.char_map(q) * self.loc.coerce(p)

    def rho_surjectivity_check(self, max_degree):
        """
        Rank of the span of x^a ch_a(x^b), |a| + |b| = k, against dim D*_k.

        The check runs on the parameter-free part of every value, which is
        the associated graded of the law; surjectivity there gives
        surjectivity of rho.
        """
        A = self.algebra
        n = A.nvars
        gens = [A.gen(i) for i in range(n)]
        results = []
        for k in range(max_degree + 1):
            monos = {d: list(combinations_with_replacement(range(n), d)) for d in range(k + 1)}
            columns = list(combinations_with_replacement(range(n), k))
            col_index = {}
            for c in columns:
                expv = [0] * len(A.ring.gens)
                for i in c:
                    expv[i] += 1
                col_index[tuple(expv)] = len(col_index)
            rows = []
            for d in range(k + 1):
                for a in monos[d]:
                    left = _prod(A, [gens[i] for i in a])
                    for b in monos[k - d]:
                        image = self.borel_rho(left, _prod(A, [gens[i] for i in b]))
                        rows.append(self._graded_vector(image, col_index, k))
            expected = sum(_count_monomials(n, k - z.length) for z in self.domain)
            if rows:
                matrix = DomainMatrix.from_list_sympy(len(rows), len(rows[0]), rows)
                rank = matrix.convert_to(SYMPY_QQ).rank()
            else:
                rank = 0
            results.append((k, rank, expected, rank == expected))
            logger.debug(f"rho in degree {k}: rank {rank} of {expected}")
        first_bad = next((k for k, _, _, ok in results if not ok), None)
        return {"degrees": results, "first_failing_degree": first_bad, "passed": first_bad is None}

    def _graded_vector(self, f, col_index, k):
        A = self.algebra
        width = len(col_index)
        vec = [Rational(0)] * (width * len(self.domain))
        for pos, z in enumerate(self.domain):
            value = self.loc.to_S(f[z])
            part = truncate(value.poly, A.nvars, A.weights, 0)
            for m, c in part.items():
                if sum(m[: A.nvars]) == k:
                    vec[pos * width + col_index[m]] = A.coeff.domain.to_sympy(c)
        return vec

    # -- characters --------------------------------------------------------------------

    def trace_of_delta(self, v, family="Y"):
        """Trace of f -> delta_v . f in the family^* basis."""
        duals = self.dual_basis(family)
        h = self.tga.delta(v)
        total = self.algebra.zero
        for x in self.domain:
            coeffs = self.expand_in(self.bullet(h, duals[x]), family)
            if x in coeffs:
                total = total + coeffs[x]
        return total

    def character_trace(self, v, family="Y"):
        """(chi_L(v) on D*, chi(v) on D_L^*)."""
        return self.trace_of_delta(v, family), self.levi_model.trace_of_delta(v, family)


def _prod(algebra, factors):
    result = algebra.one
    for f in factors:
        result = result * f
    return result


def _count_monomials(n, d):
    if d < 0:
        return 0
    return len(list(combinations_with_replacement(range(n), d)))
