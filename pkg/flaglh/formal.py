"""
Coefficient rings and formal group laws.

Series are sympy sparse polynomials whose trailing generators are the
formal parameters of the coefficient ring (kappa, or m_1..m_d). Each
parameter has a positive weight and series are truncated by the total
parameter weight of a monomial; every law here is homogeneous of degree 1,
so this is truncation by total degree shifted by one.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from sympy import Rational, Symbol
from sympy.polys.domains import QQ, ZZ
from sympy.polys.orderings import grevlex
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import ring

from flaglh.exceptions import FormalGroupLawError

logger = logging.getLogger(__name__)

DOMAINS = {"rational": QQ, "integer": ZZ}


class CoeffRing:
    """The ring R: QQ or ZZ, optionally with weighted formal parameters."""

    def __init__(self, domain="rational", params=(), weights=(), specialization=None):
        if domain not in DOMAINS:
            raise FormalGroupLawError(f"Unknown coefficient domain '{domain}'")
        if len(params) != len(weights) or any(w < 1 for w in weights):
            raise FormalGroupLawError("Every parameter needs a positive weight")
        self.domain_name = domain
        self.domain = DOMAINS[domain]
        self.params = tuple(params)
        self.weights = tuple(int(w) for w in weights)
        self.specialization = dict(specialization or {})
        self._rings = {}

    @property
    def has_rationals(self):
        return self.domain == QQ

    @property
    def is_field(self):
        """True when every parameter is specialized to a number over QQ."""
        return self.has_rationals and all(p in self.specialization for p in self.params)

    def series_ring(self, names):
        """Polynomial ring on names followed by the parameters, grevlex ordered."""
        names = tuple(names)
        if names not in self._rings:
            gens = ",".join(names + self.params)
            self._rings[names] = ring(gens, self.domain, grevlex)[0]
        return self._rings[names]

    def convert(self, value):
        if isinstance(value, Fraction):
            value = Rational(value.numerator, value.denominator)
        return self.domain.convert(value)

    def param_value(self, param_exponents, coeff, specialize=True):
        """Value of coeff * prod(param**e), with the specialization applied unless told not to."""
        value = self.domain.to_sympy(coeff)
        for name, e in zip(self.params, param_exponents):
            if e:
                base = self.specialization.get(name, Symbol(name)) if specialize else Symbol(name)
                value *= base ** e
        return value

    def is_unit(self, value):
        if value.free_symbols or value == 0:
            return False
        return self.has_rationals or value in (1, -1)

    def describe(self):
        parts = [self.domain_name]
        for p in self.params:
            parts.append(f"{p}={self.specialization[p]}" if p in self.specialization else p)
        return ",".join(parts)


def param_weight(monom, nvars, weights):
    return sum(e * w for e, w in zip(monom[nvars:], weights))


def truncate(p, nvars, weights, prec):
    if not weights:
        return p
    q = p.ring.zero
    for m, c in p.items():
        if param_weight(m, nvars, weights) <= prec:
            q[m] = c
    return q


def truncated_mul(p1, p2, nvars, weights, prec):
    """Product of two series modulo parameter weight > prec."""
    if not weights:
        return p1 * p2
    R = p1.ring
    p = R.zero
    get = p.get
    items2 = sorted(
        ((m, c, param_weight(m, nvars, weights)) for m, c in p2.items()), key=lambda t: t[2]
    )
    monomial_mul = R.monomial_mul
    for exp1, v1 in p1.items():
        w1 = param_weight(exp1, nvars, weights)
        if w1 > prec:
            continue
        for exp2, v2, w2 in items2:
            if w1 + w2 > prec:
                break
            exp = monomial_mul(exp1, exp2)
            p[exp] = get(exp, 0) + v1 * v2
    p.strip_zero()
    return p


def weight_parts(p, nvars, weights):
    """Split p into its homogeneous parameter-weight components."""
    parts = {}
    for m, c in p.items():
        w = param_weight(m, nvars, weights)
        part = parts.get(w)
        if part is None:
            part = parts[w] = p.ring.zero
        part[m] = c
    return parts


def has_constant_term(p, nvars):
    return any(not any(m[:nvars]) for m in p)


def substitute(p, images, nvars_src, target, nvars_tgt, weights, prec, cache=None):
    """
    Replace the first nvars_src generators of p by the series in images.

    Parameters pass through unchanged; images live in target, whose trailing
    generators are the same parameters. cache maps variable exponent tuples
    to image monomials and may be shared between calls with equal images.
    """
    if cache is None:
        cache = {}
    zero_pad = (0,) * nvars_tgt

    def monomial_image(var_part):
        hit = cache.get(var_part)
        if hit is not None:
            return hit
        if not any(var_part):
            img = target.one
        else:
            i = next(k for k, e in enumerate(var_part) if e)
            lower = var_part[:i] + (var_part[i] - 1,) + var_part[i + 1:]
            img = truncated_mul(monomial_image(lower), images[i], nvars_tgt, weights, prec)
        cache[var_part] = img
        return img

    groups = {}
    for m, c in p.items():
        groups.setdefault(m[:nvars_src], []).append((m[nvars_src:], c))

    out = target.zero
    for var_part in sorted(groups):
        coeff = target.zero
        for params, c in groups[var_part]:
            coeff[zero_pad + params] = c
        if not any(var_part):
            out += truncate(coeff, nvars_tgt, weights, prec)
            continue
        out += truncated_mul(coeff, monomial_image(var_part), nvars_tgt, weights, prec)
    return out


def serialize_series(p, nvars, coeff, specialize=True):
    """Sorted [exponents, coefficient-string] pairs; parameters fold into coefficients."""
    collected = {}
    for m, c in p.items():
        value = coeff.param_value(m[nvars:], c, specialize)
        collected[m[:nvars]] = collected.get(m[:nvars], 0) + value
    out = []
    for var_part in sorted(collected, key=grevlex):
        value = collected[var_part].expand()
        if value != 0:
            out.append([list(var_part), str(value)])
    return out


class FormalGroupLaw:
    """A truncated one-dimensional commutative formal group law."""

    def __init__(self, kind, coeff, trunc, F, label=None):
        self.kind = kind
        self.coeff = coeff
        self.trunc = int(trunc)
        self.label = label or kind
        self.weights = coeff.weights
        self.ring1 = coeff.series_ring(("t",))
        self.ring2 = coeff.series_ring(("t", "u"))
        self.F = truncate(F, 2, self.weights, self.trunc)
        self.G = g_series(self)
        self.inverse = formal_inverse(self)
        self._m_series = {0: self.ring1.zero, 1: self.ring1.gens[0]}

    def __repr__(self):
        return f"FormalGroupLaw({self.label}, trunc={self.trunc}, R={self.coeff.describe()})"

    def add(self, a, b, nvars, prec=None):
        """F(a, b) for series a, b in a common ring with nvars leading variables."""
        prec = self.trunc if prec is None else prec
        return substitute(self.F, [a, b], 2, a.ring, nvars, self.weights, prec)

    def check_axioms(self):
        """List of (passed, message) for unit, commutativity, associativity, inverse."""
        t, u = self.ring2.gens[:2]
        results = []
        unit = substitute(self.F, [t, self.ring2.zero], 2, self.ring2, 2, self.weights, self.trunc)
        results.append((unit == t, "F(t,0) = t"))
        swapped = substitute(self.F, [u, t], 2, self.ring2, 2, self.weights, self.trunc)
        results.append((swapped == self.F, "F(t,u) = F(u,t)"))

        R3 = self.coeff.series_ring(("t", "u", "v"))
        a, b, c = R3.gens[:3]
        F3 = substitute(self.F, [a, b], 2, R3, 3, self.weights, self.trunc)
        left = substitute(self.F, [F3, c], 2, R3, 3, self.weights, self.trunc)
        Fbc = substitute(self.F, [b, c], 2, R3, 3, self.weights, self.trunc)
        right = substitute(self.F, [a, Fbc], 2, R3, 3, self.weights, self.trunc)
        results.append((left == right, "F(F(t,u),v) = F(t,F(u,v))"))

        t1 = self.ring1.gens[0]
        zero = substitute(self.F, [t1, self.inverse], 2, self.ring1, 1, self.weights, self.trunc)
        results.append((zero == 0, "F(t, i(t)) = 0"))
        return results

    def m_series(self, m):
        return m_series(self, m)

    def compose1(self, p, q):
        """p(q(t)) for univariate series."""
        return substitute(p, [q], 1, self.ring1, 1, self.weights, self.trunc)


def g_series(fgl):
    """G = (t + u - F)/(tu)."""
    t, u = fgl.ring2.gens[:2]
    try:
        return (t + u - fgl.F).exquo(t * u)
    except ExactQuotientFailed:
        raise FormalGroupLawError(f"F of {fgl.label} is not of the form t+u-tu*G")


def formal_inverse(fgl):
    """The series i(t) with F(t, i(t)) = 0, solved by successive correction."""
    t = fgl.ring1.gens[0]
    inv = -t
    for _ in range(fgl.trunc + 1):
        err = substitute(fgl.F, [t, inv], 2, fgl.ring1, 1, fgl.weights, fgl.trunc)
        if err == 0:
            break
        inv = inv - err
    return inv


def m_series(fgl, m):
    """[m](t): [m+1] = F(t, [m]) and [-m] = i([m])."""
    m = int(m)
    cache = fgl._m_series
    if m in cache:
        return cache[m]
    if m < 0:
        result = fgl.compose1(fgl.inverse, m_series(fgl, -m))
    else:
        t = fgl.ring1.gens[0]
        result = fgl.add(t, m_series(fgl, m - 1), 1)
    cache[m] = result
    return result


def nary_sum(fgl, series, target, nvars, prec=None):
    """Left fold of F over series living in target (no constant terms allowed)."""
    prec = fgl.trunc if prec is None else prec
    acc = target.zero
    for k, s in enumerate(series):
        if has_constant_term(s, nvars):
            raise FormalGroupLawError(f"Argument {k} of the formal sum has a constant term")
        acc = s if k == 0 else fgl.add(acc, s, nvars, prec)
    return acc


def _parse_kind(kind):
    name, _, arg = str(kind).partition(":")
    return name.strip().lower(), arg.strip()


def law_coeff_ring(kind, domain="rational"):
    """Coefficient ring carrying the parameters a law of this kind needs."""
    name, arg = _parse_kind(kind)
    if name == "additive":
        return CoeffRing(domain)
    if name == "multiplicative":
        spec = {}
        if arg and arg != "formal":
            try:
                spec["kappa"] = Rational(arg)
            except (TypeError, ValueError):
                raise FormalGroupLawError(f"Bad multiplicative parameter '{arg}'")
            if domain == "integer" and not spec["kappa"].is_integer:
                raise FormalGroupLawError("Integer ring needs an integral kappa")
        return CoeffRing(domain, ("kappa",), (1,), spec)
    if name == "generic":
        depth = int(arg or 1)
        if depth < 1:
            raise FormalGroupLawError("Generic law depth must be at least 1")
        return CoeffRing(domain, tuple(f"m{k}" for k in range(1, depth + 1)), tuple(range(1, depth + 1)))
    raise FormalGroupLawError(f"Unknown formal group law '{kind}'")


def make_fgl(kind, coeff="rational", trunc=6):
    """
    Build and check a formal group law.

    kind is 'additive', 'multiplicative:<value|formal>' or 'generic:<depth>'.
    coeff is a CoeffRing carrying the needed parameters or a domain name.
    """
    if trunc < 1:
        raise FormalGroupLawError("Truncation degree must be at least 1")
    if isinstance(coeff, str):
        coeff = law_coeff_ring(kind, coeff)
    name, arg = _parse_kind(kind)
    R = coeff.series_ring(("t", "u"))
    t, u = R.gens[:2]

    if name == "additive":
        F = t + u
    elif name == "multiplicative":
        if "kappa" not in coeff.params:
            raise FormalGroupLawError("Multiplicative law needs a kappa parameter")
        kappa = R.gens[2 + coeff.params.index("kappa")]
        F = t + u - kappa * t * u
    elif name == "generic":
        if not coeff.has_rationals:
            raise FormalGroupLawError("The generic law needs rational scalars")
        F = _generic_law(coeff, trunc)
    else:
        raise FormalGroupLawError(f"Unknown formal group law '{kind}'")

    fgl = FormalGroupLaw(name, coeff, trunc, F, label=str(kind))
    for passed, message in fgl.check_axioms():
        if not passed:
            raise FormalGroupLawError(f"{fgl.label}: axiom failed: {message}")
    logger.info(f"Built {fgl}")
    return fgl


def _generic_law(coeff, trunc):
    """exp(log t + log u) for log t = t + m_1 t^2 + ... + m_d t^(d+1)."""
    weights = coeff.weights
    R1 = coeff.series_ring(("t",))
    t = R1.gens[0]
    ms = R1.gens[1:]
    log = t + sum(m * t ** (k + 2) for k, m in enumerate(ms))

    # exp is the compositional inverse: exp(y) = y - sum m_k exp(y)^(k+1)
    exp = t
    for _ in range(trunc + 1):
        exp = t - (substitute(log, [exp], 1, R1, 1, weights, trunc) - exp)

    R2 = coeff.series_ring(("t", "u"))
    logs = substitute(log, [R2.gens[0]], 1, R2, 2, weights, trunc) + substitute(
        log, [R2.gens[1]], 1, R2, 2, weights, trunc
    )
    return substitute(exp, [logs], 1, R2, 2, weights, trunc)
