"""Homogeneous polynomial arithmetic in E = wedge(V) and S = Sym(W).

Conventions, fixed once for the whole package:

* v variables; x_0..x_{v-1} span W in degree +1, e_0..e_{v-1} span V in
  degree -1.  E lives in degrees -v..0, S in degrees >= 0.
* Exterior monomials are bitmasks over {0..v-1}; e_mask denotes the wedge of
  the variables in the mask in increasing index order.
* e_A * e_B = 0 when the masks overlap, otherwise sign * e_{A|B} where the
  sign counts the transpositions needed to sort the concatenation A then B.
* contract(w, eta) is the iterated interior product: for a single index,
  e_i -| x_{j_1}^..^x_{j_a} = sum_t (-1)^(t-1) delta_{i,j_t} (omit slot t);
  for eta = e_{i_1}^..^e_{i_b} with i_1 < .. < i_b the factor e_{i_b} is
  applied first.  Elements of wedge(W) reuse the bitmask representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .linalg import DEFAULT_PRIME, inv_mod


@dataclass(frozen=True)
class RingSig:
    """A session ring: kind 'E' (exterior) or 'S' (symmetric), v variables,
    coefficients in F_p."""

    kind: str
    v: int
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if self.kind not in ("E", "S"):
            raise ValueError(f"ring kind must be 'E' or 'S', got {self.kind!r}")
        if not (1 <= self.v <= 62):
            raise ValueError("v out of supported range")
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError("p must be an odd prime")

    @property
    def varname(self) -> str:
        return "e" if self.kind == "E" else "x"

    def dual(self) -> "RingSig":
        return RingSig("S" if self.kind == "E" else "E", self.v, self.p)

    def variable(self, i: int) -> "Poly":
        if not 0 <= i < self.v:
            raise ValueError(f"variable index {i} out of range")
        if self.kind == "E":
            return Poly(self, {1 << i: 1})
        exp = [0] * self.v
        exp[i] = 1
        return Poly(self, {tuple(exp): 1})

    def one(self) -> "Poly":
        key = 0 if self.kind == "E" else (0,) * self.v
        return Poly(self, {key: 1})

    def zero(self) -> "Poly":
        return Poly(self, {})

    def piece_dim(self, j: int) -> int:
        """Dimension of the degree-j graded piece of the ring itself."""
        from math import comb
        if self.kind == "E":
            return comb(self.v, -j) if -self.v <= j <= 0 else 0
        return comb(self.v - 1 + j, self.v - 1) if j >= 0 else 0


def mask_degree(mask: int) -> int:
    return -bin(mask).count("1")


def mask_word(mask: int) -> int:
    return bin(mask).count("1")


def merge_sign(a: int, b: int) -> int:
    """Sign of e_a ^ e_b for disjoint masks a, b (0 if they overlap)."""
    if a & b:
        return 0
    sign = 1
    bb = b
    while bb:
        i = (bb & -bb).bit_length() - 1
        if bin(a >> (i + 1)).count("1") % 2:
            sign = -sign
        bb &= bb - 1
    return sign


def alpha_sign(mask: int) -> int:
    """Sign of the reversal anti-automorphism on a word of this length."""
    k = mask_word(mask)
    return -1 if (k * (k - 1) // 2) % 2 else 1


@lru_cache(maxsize=None)
def masks_of_size(v: int, k: int) -> tuple[int, ...]:
    """All k-subsets of {0..v-1} as bitmasks, in lexicographic order of the
    sorted index tuples."""
    if k < 0 or k > v:
        return ()
    out = []
    for combo in combinations(range(v), k):
        m = 0
        for i in combo:
            m |= 1 << i
        out.append(m)
    return tuple(out)


@lru_cache(maxsize=None)
def exponents_of_degree(v: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All exponent vectors of total degree d, lexicographically sorted."""
    if d < 0:
        return ()
    if v == 1:
        return ((d,),)
    out = []
    for first in range(d + 1):
        for rest in exponents_of_degree(v - 1, d - first):
            out.append((first,) + rest)
    return tuple(sorted(out))


def mono_degree(ring: RingSig, mono) -> int:
    if ring.kind == "E":
        return mask_degree(mono)
    return sum(mono)


class Poly:
    """A polynomial over the session ring: finite map monomial -> residue.

    Zero coefficients are never stored.  Most arithmetic in this package
    works on homogeneous values; degree() returns None for 0 and raises on
    inhomogeneous input.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: RingSig, terms: dict | None = None):
        self.ring = ring
        p = ring.p
        self.terms = {}
        if terms:
            for m, c in terms.items():
                c %= p
                if c:
                    self.terms[m] = c

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self):
        if not self.terms:
            return None
        degs = {mono_degree(self.ring, m) for m in self.terms}
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous element {self}")
        return degs.pop()

    def constant_term(self) -> int:
        key = 0 if self.ring.kind == "E" else (0,) * self.ring.v
        return self.terms.get(key, 0)

    def graded_component(self, d: int) -> "Poly":
        keep = {m: c for m, c in self.terms.items()
                if mono_degree(self.ring, m) == d}
        return Poly(self.ring, keep)

    def linear_component(self) -> "Poly":
        """The component of absolute degree 1 (word length 1 over E)."""
        d = -1 if self.ring.kind == "E" else 1
        return self.graded_component(d)

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(self.ring, t)

    def __sub__(self, other: "Poly") -> "Poly":
        self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) - c
        return Poly(self.ring, t)

    def __neg__(self) -> "Poly":
        return Poly(self.ring, {m: -c for m, c in self.terms.items()})

    def scale(self, c: int) -> "Poly":
        return Poly(self.ring, {m: c * cc for m, cc in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        if self.ring.kind == "E":
            return ext_mul(self, other)
        return sym_mul(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.ring == other.ring \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items()))))

    def alpha(self) -> "Poly":
        """Reversal anti-automorphism of E (identity on S); alpha(ab) =
        alpha(b) alpha(a), used to transpose matrices over E."""
        if self.ring.kind == "S":
            return self
        return Poly(self.ring,
                    {m: alpha_sign(m) * c for m, c in self.terms.items()})

    def _check(self, other: "Poly"):
        if self.ring != other.ring:
            raise ValueError("mixed ring signatures")

    def render(self) -> str:
        """Canonical text form, e.g. '3*x0^2*x1 + 32002*e0*e2' style terms."""
        if not self.terms:
            return "0"
        ring = self.ring
        parts = []
        for m in sorted(self.terms, key=_mono_sort_key(ring)):
            c = self.terms[m]
            factors = []
            if ring.kind == "E":
                mm = m
                while mm:
                    i = (mm & -mm).bit_length() - 1
                    factors.append(f"e{i}")
                    mm &= mm - 1
            else:
                for i, e in enumerate(m):
                    if e == 1:
                        factors.append(f"x{i}")
                    elif e > 1:
                        factors.append(f"x{i}^{e}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(str(c) + "*" + "*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"<{self.ring.kind}:{self.render()}>"


def _mono_sort_key(ring: RingSig):
    if ring.kind == "E":
        return lambda m: (mask_word(m), masks_of_size(ring.v, mask_word(m)).index(m))
    return lambda m: (sum(m), m)


def ext_mul(a: Poly, b: Poly) -> Poly:
    if a.ring != b.ring:
        raise ValueError("mixed ring signatures")
    out: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            s = merge_sign(ma, mb)
            if s == 0:
                continue
            key = ma | mb
            out[key] = out.get(key, 0) + s * ca * cb
    return Poly(a.ring, out)


def sym_mul(a: Poly, b: Poly) -> Poly:
    if a.ring != b.ring:
        raise ValueError("mixed ring signatures")
    out: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            key = tuple(x + y for x, y in zip(ma, mb))
            out[key] = out.get(key, 0) + ca * cb
    return Poly(a.ring, out)


def mul(a: Poly, b: Poly) -> Poly:
    return a * b


def contract_mask(w_mask: int, eta_mask: int) -> tuple[int, int]:
    """Interior product e_{eta} -| x_{w}; returns (sign, result_mask).

    sign = 0 when eta is not contained in w.  Factors of eta apply from the
    largest index down, each removing one slot of w with the sign of its
    position.
    """
    if eta_mask & ~w_mask:
        return 0, 0
    sign = 1
    w = w_mask
    ee = eta_mask
    while ee:
        i = ee.bit_length() - 1  # largest remaining index, applied first
        below = bin(w & ((1 << i) - 1)).count("1")
        if below % 2:
            sign = -sign
        w &= ~(1 << i)
        ee &= ~(1 << i)
    return sign, w


def contract(w: Poly, eta: Poly) -> Poly:
    """eta -| w for w in wedge(W) (an 'E'-signature value with masks read as
    x-variables) and eta in wedge(V).  Requires word(eta) <= word(w)."""
    if w.ring.v != eta.ring.v or w.ring.p != eta.ring.p:
        raise ValueError("mixed ring signatures")
    wd = max((mask_word(m) for m in w.terms), default=0)
    ed = max((mask_word(m) for m in eta.terms), default=0)
    if ed > wd and not w.is_zero() and not eta.is_zero():
        raise ValueError("contraction degree exceeds form degree")
    out: dict = {}
    for me, ce in eta.terms.items():
        for mw, cw in w.terms.items():
            s, res = contract_mask(mw, me)
            if s == 0:
                continue
            out[res] = out.get(res, 0) + s * ce * cw
    return Poly(w.ring, out)


def poly_from_terms(ring: RingSig, pairs) -> Poly:
    """Build a Poly from (monomial, coefficient) pairs."""
    out: dict = {}
    for m, c in pairs:
        out[m] = out.get(m, 0) + c
    return Poly(ring, out)


def scalar(ring: RingSig, c: int) -> Poly:
    key = 0 if ring.kind == "E" else (0,) * ring.v
    return Poly(ring, {key: c})


def unit_inverse(ring: RingSig, c: int) -> int:
    return inv_mod(c, ring.p)
