"""
Leray-Hirsch matrices: e-coefficients, Z^* expansions, structure constants,
assembly of C for the geometric (Y-based) and algebraic (X-based) maps and
the certification report.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import pandas as pd
from sympy import Matrix, cancel

from flaglh.exceptions import NotInvertibleError, VerificationError
from flaglh.dual import DualElem
from flaglh.rootdata import all_subsequences
from flaglh.twisted import QWElem

logger = logging.getLogger(__name__)

TAGS = {"geometric": "Y", "algebraic": "X"}


# -- e-coefficients and Z^* -------------------------------------------------------


def e_coeffs(model):
    """e_{z,w'} with Y_P . Y_z^x = sum_{w'} e_{z,w'} (Y_P . Y_w'^x), memoized on the model."""
    return model.memo("e_coeffs", lambda: _e_coeffs(model))


def _e_coeffs(model):
    rs = model.rs
    zstars = {w: model.z_star(w) for w in rs.min_reps}
    out = {}
    for z in rs.elements:
        projected = model.projected_times(z)
        for w in rs.min_reps:
            value = model.pairing_parab(projected, zstars[w], check=False)
            if not value.is_zero():
                out[(z, w)] = value
    return out


def y_dot_one(tga, v):
    """Y_v . 1 as an element of Q."""
    return tga.act(tga.y_elem(v), tga.loc.one)


def check_e_coeffs(model, e=None):
    """e_{wv,w} = w(Y_v . 1) and e_{wv,w'} = 0 unless w' <= w."""
    rs, tga, loc = model.rs, model.tga, model.loc
    e = e_coeffs(model) if e is None else e
    bad_diag, bad_zero = [], []
    for z in rs.elements:
        w, v = rs.coset_decompose(z)
        expected = loc.to_S(tga.twist(w, y_dot_one(tga, v)))
        if e.get((z, w), model.algebra.zero) != expected:
            bad_diag.append(rs.name(z))
        for w2 in rs.min_reps:
            if (z, w2) in e and not rs.bruhat_leq(w2, w):
                bad_zero.append((rs.name(z), rs.name(w2)))
    return [
        (not bad_diag, f"e_(wv,w) = w(Y_v.1): bad={bad_diag}"),
        (not bad_zero, f"e_(wv,w') = 0 unless w' <= w: bad={bad_zero}"),
    ]


def multqs_expand(model, q, z, check=True):
    """Coefficients of (q delta_e) . Y_z^x in the Y^x basis: sum y(q) a_{z,y} b_{y,w}."""
    tga, loc = model.tga, model.loc
    bc = tga.base_change("Y")
    q = loc.coerce(q)
    formula = {}
    for w in model.domain:
        total = None
        for y, a in bc.a[z].items():
            b = bc.b[y].get(w)
            if b is not None:
                term = tga.twist(y, q) * a * b
                total = term if total is None else total + term
        if total is not None and not total.is_zero():
            formula[w] = loc.to_S(total)
    if check:
        g = model.bullet(tga.scalar(q), model.y_times(z))
        duals = model.dual_basis("Y")
        for w in model.domain:
            direct = model.pairing(g, duals[w], check=False)
            if direct != formula.get(w, model.algebra.zero):
                raise VerificationError(
                    f"Coefficient of q * Y*_{model.rs.name(z)} at {model.rs.name(w)} "
                    f"disagrees with the bullet computation"
                )
    return formula


def z_star_expansion(model, w):
    """Z_w^* in the Y^* basis, checked against its leading block and support."""
    rs, tga, loc = model.rs, model.tga, model.loc
    coeffs = model.expand_in(model.z_star(w), "Y")
    for v in rs.levi:
        z = rs.mul(w, v)
        expected = loc.to_S(tga.twist(w, y_dot_one(tga, v)))
        if coeffs.get(z, model.algebra.zero) != expected:
            raise VerificationError(
                f"Z_{rs.name(w)}^* has the wrong coefficient at Y_{rs.name(z)}^*"
            )
    for x in coeffs:
        w2, _ = rs.coset_decompose(x)
        if w2 != w and not rs.bruhat_leq(w, w2):
            raise VerificationError(
                f"Z_{rs.name(w)}^* has a coefficient at Y_{rs.name(x)}^* outside w' >= w"
            )
    return coeffs


# -- structure constants ------------------------------------------------------------


def gz_B_factor(tga, j, E, F, family="Y"):
    """The factor at position j of the product formula for the pair (E, F)."""
    rs, loc, A = tga.rs, tga.loc, tga.algebra
    i = E.seq[j]
    alpha = rs.simple_root(i)
    s = rs.simple[i]
    in_e, in_f = j in E, j in F
    x_alpha = loc.from_S(A.x_root(alpha))
    if family == "Y":
        if in_e and in_f:
            return QWElem(tga, {s: x_alpha})
        if in_e or in_f:
            return QWElem(tga, {s: -loc.from_S(A.u(alpha))})
        inv_neg = loc.inv_root(rs.negate(alpha))
        return QWElem(tga, {rs.identity: inv_neg, s: x_alpha * inv_neg * inv_neg})
    if in_e and in_f:
        return QWElem(tga, {s: x_alpha})
    if in_e or in_f:
        return QWElem(tga, {s: loc.one})
    return tga.x_of(i)


class StructureConstants:
    """p_{u,v}^w for one basis family, memoized by w."""

    def __init__(self, tga, family="Y"):
        self.tga = tga
        self.family = family
        self.rs = tga.rs
        self._gz = {}
        self._oracle = {}

    def gz_table(self, w):
        """Every p_{u,v}^w from the product formula over pairs of subsequences of I_w."""
        if w in self._gz:
            return self._gz[w]
        tga, loc = self.tga, self.tga.loc
        word = self.rs.words[w]
        subseqs = list(all_subsequences(word))
        coeffs = {E: tga.sequence_coeffs(E.letters, self.family) for E in subseqs}
        sums = {}
        for E in subseqs:
            for F in subseqs:
                value = loc.one
                for j in reversed(range(len(word))):
                    value = tga.act(gz_B_factor(tga, j, E, F, self.family), value)
                    if value.is_zero():
                        break
                if value.is_zero():
                    continue
                for u, bu in coeffs[E].items():
                    for v, bv in coeffs[F].items():
                        term = value * loc.from_S(bu * bv)
                        sums[(u, v)] = sums[(u, v)] + term if (u, v) in sums else term
        table = {}
        for key, total in sums.items():
            value = loc.to_S(total)
            if not value.is_zero():
                table[key] = value
        self._gz[w] = table
        logger.debug(f"Product-formula table for w={self.rs.name(w)}: {len(table)} nonzero")
        return table

    def gz(self, u, v, w):
        return self.gz_table(w).get((u, v), self.tga.algebra.zero)

    def oracle(self, u, v, w):
        """sum_y a_{w,y} b_{y,u} b_{y,v}: the coefficient of family_w^* in family_u^* family_v^*."""
        key = (u, v, w)
        if key not in self._oracle:
            bc = self.tga.base_change(self.family)
            total = self.tga.loc.zero
            for y, a in bc.a[w].items():
                bu, bv = bc.b[y].get(u), bc.b[y].get(v)
                if bu is not None and bv is not None:
                    total = total + a * bu * bv
            self._oracle[key] = self.tga.loc.to_S(total)
        return self._oracle[key]

    def check_against_oracle(self):
        bad = []
        for w in self.rs.elements:
            for u in self.rs.elements:
                for v in self.rs.elements:
                    if self.gz(u, v, w) != self.oracle(u, v, w):
                        bad.append((self.rs.name(u), self.rs.name(v), self.rs.name(w)))
        return not bad, f"{self.family}: product formula = pointwise oracle: bad={bad}"

    def check_support(self):
        """p_{u,v}^w = 0 unless u <= w and v <= w."""
        rs = self.rs
        bad = []
        for w in rs.elements:
            for (u, v) in self.gz_table(w):
                if not (rs.bruhat_leq(u, w) and rs.bruhat_leq(v, w)):
                    bad.append((rs.name(u), rs.name(v), rs.name(w)))
        return not bad, f"{self.family}: p_(u,v)^w = 0 unless u,v <= w: bad={bad}"


def structure_constants(tga, family="Y"):
    key = ("SC", family)
    if key not in tga._cache:
        tga._cache[key] = StructureConstants(tga, family)
    return tga._cache[key]


def gz_structure_const(tga, u, v, w, family="Y"):
    return structure_constants(tga, family).gz(u, v, w)


def oracle_structure_const(tga, u, v, w, family="Y"):
    return structure_constants(tga, family).oracle(u, v, w)


# -- the matrix C ------------------------------------------------------------------------


@dataclass
class CMatrix:
    """C indexed by W in the fixed order; row k is (w, v) with wv the k-th element."""

    tag: str
    rows: list
    cols: list
    entries: list
    provenance: dict = field(default_factory=dict)
    inverse: list = None

    @property
    def family(self):
        return TAGS[self.tag]

    def entry(self, r, c):
        return self.entries[r][c]

    def block(self, w, w2, rs):
        """C^{w,w''}: rows (w, v), columns w''v''."""
        rows = [k for k, (a, _) in enumerate(self.rows) if a == w]
        cols = [k for k, z in enumerate(self.cols) if rs.coset_decompose(z)[0] == w2]
        return [[self.entries[r][c] for c in cols] for r in rows]


def row_product(model, tag, w, v):
    """Z_w^* Y_v^* (geometric) or X_w^* X_v^* (algebraic)."""
    if tag == "geometric":
        return model.z_star(w) * model.dual_basis("Y")[v]
    xs = model.dual_basis("X")
    return xs[w] * xs[v]


def assemble_C(model, tag="geometric", check=True, provenance=None):
    if tag not in TAGS:
        raise ValueError(f"Unknown tag '{tag}'")
    rs = model.rs
    family = TAGS[tag]
    start = time.perf_counter()
    rows = [rs.coset_decompose(z) for z in rs.elements]
    cols = list(rs.elements)
    zero = model.algebra.zero
    entries = []
    for w, v in rows:
        coeffs = model.expand_in(row_product(model, tag, w, v), family)
        entries.append([coeffs.get(z, zero) for z in cols])

    if check and tag == "geometric":
        # second route: Z_w^* rebuilt from the e-coefficients, then the sum of
        # e_{w'v',w} p^{w''v''}_{w'v',v} taken through the pointwise product
        e = e_coeffs(model)
        ys = model.dual_basis("Y")
        zws = {w: model.rebuild({z: c for (z, w2), c in e.items() if w2 == w}, "Y") for w in rs.min_reps}
        for r, (w, v) in enumerate(rows):
            coeffs = model.expand_in(zws[w] * ys[v], "Y")
            for c, z in enumerate(cols):
                if coeffs.get(z, zero) != entries[r][c]:
                    raise VerificationError(
                        f"C entry ({rs.name(w)},{rs.name(v)}; {rs.name(z)}) differs between routes"
                    )
    logger.info(
        f"Assembled {tag} C of size {len(rows)} in {time.perf_counter() - start:.2f}s"
    )
    return CMatrix(tag, rows, cols, entries, dict(provenance or {}))


# -- certification -------------------------------------------------------------------------


@dataclass
class LHReport:
    """Certificates that C is invertible over the truncated ring."""

    tag: str
    block_triangular: bool
    diagonal_blocks_triangular: bool
    diagonal_ok: bool
    det_augmented: object
    diagonal: list
    messages: list = field(default_factory=list)
    trunc: int = None

    @property
    def verdict(self):
        return (
            self.block_triangular
            and self.diagonal_blocks_triangular
            and self.diagonal_ok
            and self.det_augmented == 1
        )

    def to_frame(self):
        return pd.DataFrame(
            self.diagonal, columns=["row", "length", "diagonal_augmented", "expected_augmented"]
        )


def expected_diagonal(model, z):
    """(-1)^{l(z)} prod u_{gamma_j} along I_z."""
    A = model.algebra
    value = A.one if z.length % 2 == 0 else -A.one
    for gamma in model.rs.gamma_sequence(model.rs.words[z]):
        value = value * A.u(gamma)
    return value


def nonequivariant_specialize(C, algebra):
    """Entrywise augmentation S -> R."""
    return Matrix([[algebra.augment(e) for e in row] for row in C.entries])


def nonequivariant_duals(model, family="Y"):
    """Augmented transition matrix (b_{z,x}) of a dual basis."""
    duals = model.dual_basis(family)
    A = model.algebra
    return Matrix([[A.augment(model.loc.to_S(duals[x][z])) for x in model.domain] for z in model.domain])


def verify_report(C, model):
    rs, A = model.rs, model.algebra
    messages = []

    bad = []
    for r, (w, v) in enumerate(C.rows):
        for c, z in enumerate(C.cols):
            w2, _ = rs.coset_decompose(z)
            if w2.index < w.index and not C.entries[r][c].is_zero():
                bad.append((rs.name(rs.mul(w, v)), rs.name(z)))
    block_triangular = not bad
    messages.append(f"block upper triangular: bad={bad}")

    bad = []
    for r, (w, v) in enumerate(C.rows):
        for c, z in enumerate(C.cols):
            w2, v2 = rs.coset_decompose(z)
            if w2 == w and v2.index < v.index and not A.in_splus(C.entries[r][c]):
                bad.append((rs.name(rs.mul(w, v)), rs.name(z)))
    diag_blocks = not bad
    messages.append(f"diagonal blocks upper triangular mod S_+: bad={bad}")

    diagonal, bad = [], []
    for k, z in enumerate(C.cols):
        value = A.augment(C.entries[k][k])
        expected = A.augment(expected_diagonal(model, z))
        diagonal.append([rs.name(z), z.length, str(value), str(expected)])
        if value != expected or value != 1:
            bad.append(rs.name(z))
    diagonal_ok = not bad
    messages.append(f"diagonal = (-1)^l prod u_gamma mod S_+ and in 1+S_+: bad={bad}")

    det = cancel(nonequivariant_specialize(C, A).det())
    messages.append(f"det of the augmented matrix = {det}")

    report = LHReport(
        C.tag, block_triangular, diag_blocks, diagonal_ok, det, diagonal, messages,
        C.provenance.get("trunc"),
    )
    logger.info(f"{C.tag} report for {rs.family}{rs.rank} P={rs.parabolic}: verdict {report.verdict}")
    return report


def free_module_check(C, model):
    """Invert C over S; the rows then form an S-basis of D*."""
    A = model.algebra
    try:
        inverse = A.invert_matrix(C.entries)
    except NotInvertibleError as exc:
        return False, f"C is not invertible over S: {exc}"
    n = len(C.entries)
    for i in range(n):
        for j in range(n):
            total = A.zero
            for k in range(n):
                if C.entries[i][k] and inverse[k][j]:
                    total = total + C.entries[i][k] * inverse[k][j]
            if total != (1 if i == j else 0):
                return False, f"C.C^-1 differs from the identity at ({i},{j})"
    C.inverse = inverse
    return True, f"{C.tag}: rows form an S-basis of D* ({n} elements)"


def lh_expand(C, model, f, report=None):
    """Coefficients c_{w,v} with f = sum c_{w,v} (row product of (w, v))."""
    if report is not None and not report.verdict:
        raise VerificationError("Refusing to expand against an uncertified C")
    if C.inverse is None:
        passed, message = free_module_check(C, model)
        if not passed:
            raise VerificationError(message)
    y = model.expand_in(f, C.family)
    out = {}
    for r, row in enumerate(C.rows):
        total = model.algebra.zero
        for c, z in enumerate(C.cols):
            if z in y and C.inverse[c][r]:
                total = total + y[z] * C.inverse[c][r]
        if not total.is_zero():
            out[row] = total
    return out


def rebuild(C, model, coeffs):
    out = DualElem(model)
    for (w, v), c in coeffs.items():
        out = out + row_product(model, C.tag, w, v) * c
    return out


# -- symbolic names and export -------------------------------------------------------------


def root_label(rs, root, latex=False):
    positive, sign = rs.normalize_root(root)
    coords = rs.root_coords(positive)
    if latex:
        names = [r"\alpha", r"\beta"] if rs.rank <= 2 else [rf"\alpha_{{{k + 1}}}" for k in range(rs.rank)]
    else:
        names = ["a", "b"] if rs.rank <= 2 else [f"a{k + 1}" for k in range(rs.rank)]
    parts = [("" if c == 1 else str(c)) + names[k] for k, c in enumerate(coords) if c]
    return ("-" if sign < 0 else "") + "+".join(parts)


class SymbolicNamer:
    """Recognize 0, +-1, +-x_beta, +-u_beta, +-kappa_beta and products of two of these."""

    def __init__(self, algebra, latex=False):
        self.algebra = algebra
        self.latex = latex
        rs = algebra.rs
        atoms = []
        for b in rs.roots:
            atoms.append((self._sym("x", rs, b), algebra.x_root(b)))
        for b in rs.positive_roots:
            atoms.append((self._sym("u", rs, b), algebra.u(b)))
        for b in rs.positive_roots:
            atoms.append((self._sym("k", rs, b), algebra.kappa(b)))
        self._names = {}
        self._add("0", algebra.zero)
        self._add("1", algebra.one)
        self._add("-1", -algebra.one)
        for name, value in atoms:
            self._add(name, value)
            self._add("-" + name, -value)
        joiner = " " if latex else "*"
        for k, (n1, v1) in enumerate(atoms):
            for n2, v2 in atoms[k:]:
                product = v1 * v2
                self._add(n1 + joiner + n2, product)
                self._add("-" + n1 + joiner + n2, -product)

    def _sym(self, kind, rs, root):
        label = root_label(rs, root, self.latex)
        if self.latex:
            head = {"x": "x", "u": "u", "k": r"\kappa"}[kind]
            return f"{head}_{{{label}}}"
        return f"{kind}[{label}]"

    def _key(self, value):
        return frozenset(value.poly.items())

    def _add(self, name, value):
        self._names.setdefault(self._key(value), name)

    def name(self, value):
        """Symbolic name when recognized, otherwise the raw series."""
        hit = self._names.get(self._key(value))
        return hit if hit is not None else self.algebra.render(value)


def provenance(rs, fgl_label, trunc, workdeg=0, ring="rational"):
    return {
        "type": rs.family,
        "rank": rs.rank,
        "parabolic": [i + 1 for i in rs.parabolic],
        "fgl": fgl_label,
        "ring": ring,
        "trunc": trunc,
        "workdeg": workdeg,
        "words": rs.words.as_strings(),
    }


def matrix_to_json(C, model):
    rs, A = model.rs, model.algebra
    return {
        "provenance": C.provenance,
        "tag": C.tag,
        "order": [rs.name(z) for z in C.cols],
        "rows": [[rs.name(w), rs.name(v)] for w, v in C.rows],
        "specialization": {p: str(v) for p, v in A.coeff.specialization.items()},
        "matrix": [[A.serialize(e, specialize=False) for e in row] for row in C.entries],
    }


def matrix_to_frame(C, model, namer=None):
    rs = model.rs
    namer = namer or SymbolicNamer(model.algebra)
    family = C.family
    left = "Z" if C.tag == "geometric" else "X"
    index = [f"{left}*_{rs.name(w)} {family}*_{rs.name(v)}" for w, v in C.rows]
    columns = [f"{family}*_{rs.name(z)}" for z in C.cols]
    data = [[namer.name(e) for e in row] for row in C.entries]
    return pd.DataFrame(data, index=index, columns=columns)


def matrix_to_latex(C, model, namer=None):
    rs = model.rs
    namer = namer or SymbolicNamer(model.algebra, latex=True)
    family = C.family
    left = "Z" if C.tag == "geometric" else "X"

    def sub(z):
        return "{" + rs.name(z) + "}"

    header = " & ".join(f"${family}^*_{sub(z)}$" for z in C.cols)
    lines = [
        r"\begin{tabular}{l|" + "c" * len(C.cols) + "}",
        r"\hline",
        f" & {header} \\\\",
        r"\hline",
    ]
    for (w, v), row in zip(C.rows, C.entries):
        cells = " & ".join(f"${namer.name(e)}$" for e in row)
        lines.append(f"${left}^*_{sub(w)} {family}^*_{sub(v)}$ & {cells} \\\\")
    lines += [r"\hline", r"\end{tabular}"]
    return "\n".join(lines) + "\n"


def matrix_from_json(data, model):
    """Rebuild a CMatrix from matrix_to_json output."""
    rs, A = model.rs, model.algebra
    rows = [(rs.parse(w), rs.parse(v)) for w, v in data["rows"]]
    cols = [rs.parse(z) for z in data["order"]]
    entries = [[A.deserialize(e) for e in row] for row in data["matrix"]]
    return CMatrix(data["tag"], rows, cols, entries, dict(data.get("provenance", {})))
