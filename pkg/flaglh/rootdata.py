"""
Root systems, Weyl groups and the word combinatorics that index every matrix.

Weights are integer vectors in fundamental-weight coordinates; the simple
root alpha_i is column i of the Cartan matrix. Weyl group elements are
canonicalized by their integer matrix on the weight lattice.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from flaglh.exceptions import ConfigError, UnsupportedRootSystemError

logger = logging.getLogger(__name__)

SUPPORTED_RANKS = {
    "A": (1, 2, 3, 4),
    "B": (2, 3, 4),
    "C": (2, 3, 4),
    "D": (4,),
    "G": (2,),
}


def cartan_matrix(family, rank):
    """Cartan matrix with a_ij = <alpha_i^vee, alpha_j> (Bourbaki numbering)."""
    family = str(family).upper()
    if family not in SUPPORTED_RANKS or rank not in SUPPORTED_RANKS[family]:
        raise UnsupportedRootSystemError(f"Unsupported root system {family}{rank}")

    a = 2 * np.eye(rank, dtype=np.int64)
    if family == "G":
        return np.array([[2, -3], [-1, 2]], dtype=np.int64)
    if family == "D":
        for i, j in ((0, 1), (1, 2), (1, 3)):
            a[i, j] = a[j, i] = -1
        return a
    for i in range(rank - 1):
        a[i, i + 1] = a[i + 1, i] = -1
    if family == "B":
        a[rank - 1, rank - 2] = -2
    elif family == "C":
        a[rank - 2, rank - 1] = -2
    return a


@dataclass(frozen=True)
class WeylElem:
    """A Weyl group element; equality is equality of the lattice matrix."""

    key: bytes
    index: int
    length: int
    word: tuple
    matrix: np.ndarray

    def __eq__(self, other):
        return isinstance(other, WeylElem) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.index < other.index

    def __repr__(self):
        return f"WeylElem({self.index}, word={self.word})"


@dataclass(frozen=True)
class PositionedSubseq:
    """A subsequence of a reference sequence, remembered by its positions."""

    seq: tuple
    positions: frozenset

    @classmethod
    def of(cls, seq, positions=()):
        return cls(tuple(seq), frozenset(positions))

    @property
    def letters(self):
        return tuple(self.seq[j] for j in sorted(self.positions))

    def __contains__(self, j):
        return j in self.positions

    def _check(self, other):
        if self.seq != other.seq:
            raise ValueError("Subsequences of different reference sequences")

    def __or__(self, other):
        self._check(other)
        return PositionedSubseq(self.seq, self.positions | other.positions)

    def __and__(self, other):
        self._check(other)
        return PositionedSubseq(self.seq, self.positions & other.positions)

    def __sub__(self, other):
        self._check(other)
        return PositionedSubseq(self.seq, self.positions - other.positions)

    def is_sub(self, other):
        """I is contained in J (as position sets of the same sequence)."""
        self._check(other)
        return self.positions <= other.positions


def all_subsequences(seq):
    """Every positioned subsequence of seq, smallest position sets first."""
    seq = tuple(seq)
    for k in range(len(seq) + 1):
        for positions in combinations(range(len(seq)), k):
            yield PositionedSubseq(seq, frozenset(positions))


class RootSystem:
    """Root data, Weyl group, Bruhat order and parabolic bookkeeping."""

    def __init__(self, family, rank, parabolic=(), two_zero_divisor=False):
        self.family = str(family).upper()
        self.rank = int(rank)
        self.cartan = cartan_matrix(self.family, self.rank)
        if self.family == "C" and two_zero_divisor:
            raise UnsupportedRootSystemError(
                "Type C needs 2 to be a non-zero-divisor in the coefficient ring"
            )
        parabolic = tuple(sorted(set(int(i) for i in parabolic)))
        if any(i < 0 or i >= self.rank for i in parabolic):
            raise UnsupportedRootSystemError(
                f"Parabolic subset {parabolic} not inside the simple reflections"
            )
        self.parabolic = parabolic
        self.labels = ("s", "t") if self.rank <= 2 else tuple(
            f"s{i + 1}" for i in range(self.rank)
        )

        self._build_roots()
        self._build_group()
        self._bruhat = {}
        self.words = ReducedWordTable(self)
        logger.info(
            f"Built {self.family}{self.rank} with parabolic {self.parabolic}: "
            f"|W|={len(self.elements)}, |Phi+|={len(self.positive_roots)}"
        )

    # -- roots -------------------------------------------------------------

    def simple_root(self, i):
        return tuple(int(c) for c in self.cartan[:, i])

    def _build_roots(self):
        n = self.rank
        simple = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
        seen = set(simple)
        frontier = list(simple)
        while frontier:
            nxt = []
            for c in frontier:
                for i in range(n):
                    # s_i(alpha_j) = alpha_j - a_ij alpha_i, in simple-root coordinates
                    pairing = sum(self.cartan[i, j] * c[j] for j in range(n))
                    image = tuple(c[k] - (pairing if k == i else 0) for k in range(n))
                    if image not in seen:
                        seen.add(image)
                        nxt.append(image)
            frontier = nxt

        coords = sorted(seen, key=lambda c: (sum(c), tuple(-x for x in c)))
        positive = [c for c in coords if all(x >= 0 for x in c)]
        if len(positive) * 2 != len(coords) or any(
            all(x <= 0 for x in c) == all(x >= 0 for x in c) for c in coords
        ):
            raise UnsupportedRootSystemError("Root closure produced non-signed roots")

        self._root_coords = {}
        for c in coords:
            self._root_coords[self.root_from_coords(c)] = c
        self.positive_roots = [self.root_from_coords(c) for c in positive]
        self.roots = self.positive_roots + [self.negate(b) for b in self.positive_roots]
        self._positive_index = {b: k for k, b in enumerate(self.positive_roots)}
        self.levi_positive_roots = [
            b for b in self.positive_roots
            if all(self._root_coords[b][k] == 0 for k in range(n) if k not in self.parabolic)
        ]

    def root_from_coords(self, coords):
        return tuple(int(x) for x in self.cartan @ np.asarray(coords, dtype=np.int64))

    def root_coords(self, root):
        """Simple-root coordinates of a root."""
        return self._root_coords[tuple(root)]

    @staticmethod
    def negate(weight):
        return tuple(-x for x in weight)

    def is_root(self, weight):
        return tuple(weight) in self._root_coords

    def is_positive(self, root):
        return tuple(root) in self._positive_index

    def positive_index(self, root):
        return self._positive_index[tuple(root)]

    def normalize_root(self, root):
        """(positive root, sign) with root = sign * positive root."""
        root = tuple(root)
        if root in self._positive_index:
            return root, 1
        return self.negate(root), -1

    def root_name(self, root):
        """Readable name in simple-root coordinates, e.g. 'a1+a2'."""
        positive, sign = self.normalize_root(root)
        coords = self._root_coords[positive]
        parts = []
        for k, c in enumerate(coords):
            if c:
                parts.append(f"{'' if c == 1 else c}a{k + 1}")
        return ("-" if sign < 0 else "") + "+".join(parts)

    # -- Weyl group --------------------------------------------------------

    def reflection_matrix(self, i):
        """s_i(lambda) = lambda - lambda_i alpha_i on weight coordinates."""
        m = np.eye(self.rank, dtype=np.int64)
        m[:, i] -= self.cartan[:, i]
        return m

    def _build_group(self):
        n = self.rank
        gens = [self.reflection_matrix(i) for i in range(n)]
        identity = np.eye(n, dtype=np.int64)
        found = {identity.tobytes(): ((), identity)}
        layer = [((), identity)]
        while layer:
            nxt = {}
            for word, mat in layer:
                for i in range(n):
                    m = mat @ gens[i]
                    key = m.tobytes()
                    if key not in found and key not in nxt:
                        nxt[key] = (word + (i,), m)
            found.update(nxt)
            layer = sorted(nxt.values(), key=lambda t: t[0])

        lexleast = {key: word for key, (word, _) in found.items()}
        mats = {key: m for key, (_, m) in found.items()}

        def from_word(word):
            m = identity
            for i in word:
                m = m @ gens[i]
            return m.tobytes()

        levi_keys = [k for k, w in lexleast.items() if all(i in self.parabolic for i in w)]
        levi_set = set(levi_keys)

        def coset_min(key):
            m = mats[key]
            changed = True
            while changed:
                changed = False
                for i in self.parabolic:
                    cand = (m @ gens[i]).tobytes()
                    if len(lexleast[cand]) < len(lexleast[m.tobytes()]):
                        m = mats[cand]
                        changed = True
            return m.tobytes()

        def order_key(key):
            return (len(lexleast[key]), lexleast[key])

        factor = {}
        for key in lexleast:
            w = coset_min(key)
            winv = mats[from_word(tuple(reversed(lexleast[w])))]
            v = (winv @ mats[key]).tobytes()
            if v not in levi_set:
                raise UnsupportedRootSystemError("Coset factorization left W_L")
            factor[key] = (w, v)

        ordered = sorted(lexleast, key=lambda k: (order_key(factor[k][0]), order_key(factor[k][1])))
        self.elements = []
        self._by_key = {}
        for idx, key in enumerate(ordered):
            m = mats[key].copy()
            m.setflags(write=False)
            elem = WeylElem(key, idx, len(lexleast[key]), lexleast[key], m)
            self.elements.append(elem)
            self._by_key[key] = elem

        self.identity = self._by_key[identity.tobytes()]
        self.simple = [self._by_key[g.tobytes()] for g in gens]
        self._factor = {
            self._by_key[k]: (self._by_key[w], self._by_key[v]) for k, (w, v) in factor.items()
        }
        self.levi = [e for e in self.elements if e.key in levi_set]
        self.min_reps = sorted({w for (w, _) in self._factor.values()})
        self.longest = max(self.elements, key=lambda e: e.length)
        self._rmul = [[self._by_key[(e.matrix @ gens[i]).tobytes()] for i in range(n)] for e in self.elements]
        self._mul = {}
        self._from_word = from_word

    def element(self, key_or_index):
        if isinstance(key_or_index, (int, np.integer)):
            return self.elements[int(key_or_index)]
        return self._by_key[key_or_index]

    def rmul_simple(self, w, i):
        return self._rmul[w.index][i]

    def mul(self, a, b):
        key = (a.index, b.index)
        cached = self._mul.get(key)
        if cached is None:
            cached = self._by_key[(a.matrix @ b.matrix).tobytes()]
            self._mul[key] = cached
        return cached

    def inverse(self, w):
        return self.from_word(reversed(w.word))

    def from_word(self, word):
        w = self.identity
        for i in word:
            w = self._rmul[w.index][i]
        return w

    def length(self, w):
        return w.length

    def inversion_count(self, w):
        """Number of positive roots sent to negative roots."""
        return sum(1 for b in self.positive_roots if not self.is_positive(self.act_on_weight(w, b)))

    def act_on_weight(self, w, weight):
        return tuple(int(x) for x in w.matrix @ np.asarray(weight, dtype=np.int64))

    def is_right_descent(self, w, i):
        return self._rmul[w.index][i].length < w.length

    def bruhat_leq(self, u, w):
        """Bruhat order via the lifting property on a right descent of w."""
        key = (u.index, w.index)
        cached = self._bruhat.get(key)
        if cached is not None:
            return cached
        if u == w:
            result = True
        elif u.length >= w.length:
            result = False
        else:
            i = next(k for k in range(self.rank) if self.is_right_descent(w, k))
            ws = self._rmul[w.index][i]
            us = self._rmul[u.index][i]
            result = self.bruhat_leq(us if us.length < u.length else u, ws)
        self._bruhat[key] = result
        return result

    def coset_decompose(self, z):
        """(w, v) with z = wv, w in W^L minimal, v in W_L."""
        return self._factor[z]

    def in_levi(self, z):
        return self._factor[z][0] == self.identity

    def demazure_product(self, seq):
        """Fold of seq in the 0-Hecke monoid (s*s = s)."""
        w = self.identity
        for i in seq:
            ws = self._rmul[w.index][i]
            if ws.length > w.length:
                w = ws
        return w

    def gamma_sequence(self, seq):
        """gamma_j = s_1 ... s_{j-1}(alpha_j)."""
        out = []
        prefix = self.identity
        for i in seq:
            out.append(self.act_on_weight(prefix, self.simple_root(i)))
            prefix = self._rmul[prefix.index][i]
        return out

    # -- names ---------------------------------------------------------------

    def name(self, w):
        if w == self.identity:
            return "e"
        return "".join(self.labels[i] for i in self.words[w])

    def letters(self, seq):
        return "".join(self.labels[i] for i in seq) or "e"

    def parse_word(self, text):
        """Resolve 'e', 'w0', 'sts', 's1s2s1' or '1,2,1' to a sequence of indices."""
        text = str(text).strip().replace(" ", "")
        if text in ("", "e"):
            return ()
        if text == "w0":
            return self.words[self.longest]
        if re.fullmatch(r"[0-9,]+", text):
            seq = tuple(int(c) - 1 for c in text.replace(",", "") if c)
        elif self.rank <= 2 and re.fullmatch(r"[st]+", text):
            seq = tuple("st".index(c) for c in text)
        elif re.fullmatch(r"(s[0-9])+", text):
            seq = tuple(int(c) - 1 for c in re.findall(r"s([0-9])", text))
        else:
            raise ConfigError(f"Cannot parse group element '{text}'")
        if any(i < 0 or i >= self.rank for i in seq):
            raise ConfigError(f"Element '{text}' uses a letter outside rank {self.rank}")
        return seq

    def parse(self, text):
        return self.from_word(self.parse_word(text))


class ReducedWordTable:
    """Fixed reduced words I_z, L-compatible: I_wv = I_w followed by I_v."""

    def __init__(self, rs, overrides=None):
        self.rs = rs
        self._words = {}
        for z in rs.elements:
            w, v = rs.coset_decompose(z)
            self._words[z] = w.word + v.word
        for z, word in (overrides or {}).items():
            self._words[z] = tuple(word)
        self.overridden = bool(overrides)

    def __getitem__(self, z):
        return self._words[z]

    def rev(self, z):
        return tuple(reversed(self._words[z]))

    def with_overrides(self, overrides):
        return ReducedWordTable(self.rs, overrides)

    def items(self):
        return [(z, self._words[z]) for z in self.rs.elements]

    def check(self):
        """Validate the table; returns a list of (passed, message)."""
        rs = self.rs
        results = []
        bad = [rs.letters(self[z]) for z in rs.elements
               if rs.from_word(self[z]) != z or len(self[z]) != z.length]
        results.append((not bad, f"words reduced and evaluating to z: bad={bad}"))
        bad = []
        for z in rs.elements:
            w, v = rs.coset_decompose(z)
            if self[z] != self[w] + self[v] or z.length != w.length + v.length:
                bad.append(rs.letters(self[z]))
        results.append((not bad, f"L-compatibility I_wv = I_w + I_v: bad={bad}"))
        bad = [rs.letters(self[z]) for z in rs.elements if rs.demazure_product(self[z]) != z]
        results.append((not bad, f"Demazure product of I_z is z: bad={bad}"))
        return results

    def as_strings(self):
        return {self.rs.name(z): self.rs.letters(self[z]) for z in self.rs.elements}


def build_root_system(family, rank, parabolic=(), two_zero_divisor=False):
    """Build root data with a parabolic subset of 0-based simple-reflection indices."""
    return RootSystem(family, rank, parabolic, two_zero_divisor)


def enumerate_weyl(rs):
    return list(rs.elements)


def reduced_words_table(rs, overrides=None):
    return rs.words if not overrides else rs.words.with_overrides(overrides)
