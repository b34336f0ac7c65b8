"""Exact sparse multivariate polynomials over the rationals.

Polynomials live in a :class:`Ring` (an ordered table of variable names).
A monomial is a tuple of exponents aligned with the ring's variables and a
polynomial is a dict ``{monomial: Fraction}`` without zero coefficients.

Groebner bases are computed with Buchberger's algorithm using the coprime
and chain criteria; pairs are processed by smallest lcm degree, ties broken
by generator index, so the output is reproducible.
"""

from __future__ import annotations

import ast
import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from operator import add, sub
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Ring",
    "Poly",
    "MonomialOrder",
    "Ideal",
    "GroebnerBasis",
    "RingMismatch",
    "NotSumOfSquares",
    "BuchbergerAbort",
    "normal_form",
    "buchberger",
    "elimination_ideal",
    "sos_decompose",
    "sos_split",
    "ideal_dimension",
    "spoly",
    "divide",
]

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class RingMismatch(ValueError):
    pass


class NotSumOfSquares(ValueError):
    pass


class BuchbergerAbort(RuntimeError):
    """Raised when the pair budget is exhausted."""

    def __init__(self, processed, queued):
        super().__init__(
            f"Buchberger aborted after {processed} pairs; {queued} pairs still queued"
        )
        self.processed = processed
        self.queued = queued


def _rat(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


class Ring:
    """Ordered table of variable names; the order is the default variable order."""

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for n in names:
            if not _NAME.match(n):
                raise ValueError(f"bad variable name {n!r}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}
        self.nvars = len(names)
        self._zero_mono = (0,) * self.nvars

    def __eq__(self, other):
        return isinstance(other, Ring) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Ring({', '.join(self.names)})"

    def __contains__(self, name):
        return name in self.index

    def __getitem__(self, name) -> Poly:
        return self.gen(name)

    def gen(self, name: str) -> Poly:
        e = [0] * self.nvars
        e[self.index[name]] = 1
        return Poly(self, {tuple(e): Fraction(1)}, _clean=False)

    def gens(self) -> list[Poly]:
        return [self.gen(n) for n in self.names]

    def const(self, c) -> Poly:
        c = _rat(c)
        return Poly(self, {self._zero_mono: c} if c else {}, _clean=False)

    def zero(self) -> Poly:
        return Poly(self, {}, _clean=False)

    def one(self) -> Poly:
        return self.const(1)

    def monomial(self, powers: Mapping[str, int], coeff=1) -> Poly:
        e = [0] * self.nvars
        for n, k in powers.items():
            if k < 0:
                raise ValueError("negative exponent")
            e[self.index[n]] = k
        return Poly(self, {tuple(e): _rat(coeff)})

    def extend(self, names: Iterable[str]) -> Ring:
        extra = [n for n in names if n not in self.index]
        return Ring(self.names + tuple(extra))

    def parse(self, text: str) -> Poly:
        """Parse ``3/2*x^2*y - y + 1`` style text (``**`` is also accepted)."""
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse polynomial {text!r}") from exc
        return self._from_ast(tree.body)

    def _from_ast(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return self.const(node.value)
        if isinstance(node, ast.Name):
            if node.id not in self.index:
                raise ValueError(f"unknown variable {node.id!r}")
            return self.gen(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            p = self._from_ast(node.operand)
            return -p if isinstance(node.op, ast.USub) else p
        if isinstance(node, ast.BinOp):
            left = self._from_ast(node.left)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ValueError("exponents must be non-negative integers")
                return left ** node.right.value
            right = self._from_ast(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not right.is_constant() or right.is_zero():
                    raise ValueError("division only by nonzero rational constants")
                return left * (1 / right.constant_term())
        raise ValueError(f"unsupported syntax in polynomial: {ast.dump(node)}")


class Poly:
    """Immutable sparse polynomial with :class:`Fraction` coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms=None, _clean=True):
        self.ring = ring
        if terms is None:
            terms = {}
        elif _clean:
            terms = {tuple(m): _rat(c) for m, c in terms.items() if c}
            for m in terms:
                if len(m) != ring.nvars or min(m, default=0) < 0:
                    raise ValueError(f"bad monomial {m} for {ring}")
        self.terms = terms
        self._hash = None

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return Poly(self.ring, t, _clean=False)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {m: -c for m, c in self.terms.items()}, _clean=False)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.ring.zero()
            return Poly(self.ring, {m: c * other for m, c in self.terms.items()}, _clean=False)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(map(add, m1, m2))
                v = t.get(m, 0) + c1 * c2
                if v:
                    t[m] = v
                else:
                    t.pop(m, None)
        return Poly(self.ring, t, _clean=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and other:
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(self.ring._zero_mono, Fraction(0))

    def variables(self) -> set[str]:
        used = set()
        for m in self.terms:
            used.update(i for i, e in enumerate(m) if e)
        return {self.ring.names[i] for i in used}

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ring.index[name]
        return max((m[i] for m in self.terms), default=-1)

    def __len__(self):
        return len(self.terms)

    def lead(self, order: MonomialOrder):
        """Leading ``(monomial, coefficient)`` under ``order``."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = order.key(self.ring)
        m = max(self.terms, key=key)
        return m, self.terms[m]

    def monic(self, order: MonomialOrder) -> Poly:
        if not self.terms:
            return self
        _, c = self.lead(order)
        return self * (1 / c)

    def sorted_terms(self, order: MonomialOrder):
        key = order.key(self.ring)
        return sorted(self.terms.items(), key=lambda mc: key(mc[0]), reverse=True)

    def proportional_to(self, other: Poly) -> bool:
        """True when ``self == c * other`` for a nonzero rational ``c``."""
        if self.ring != other.ring or self.terms.keys() != other.terms.keys():
            return False
        if not self.terms:
            return True
        m0 = next(iter(self.terms))
        r = self.terms[m0] / other.terms[m0]
        return all(self.terms[m] == r * other.terms[m] for m in self.terms)

    # -- transformations ----------------------------------------------------
    def to_ring(self, ring: Ring) -> Poly:
        """Re-express in ``ring``; every used variable must exist there."""
        if ring == self.ring:
            return self
        idx = []
        for i, n in enumerate(self.ring.names):
            idx.append(ring.index.get(n))
        t = {}
        for m, c in self.terms.items():
            e = [0] * ring.nvars
            for i, k in enumerate(m):
                if k:
                    j = idx[i]
                    if j is None:
                        raise RingMismatch(f"variable {self.ring.names[i]} missing from {ring}")
                    e[j] = k
            t[tuple(e)] = c
        return Poly(ring, t, _clean=False)

    def subs(self, mapping: Mapping[str, object]) -> Poly:
        """Substitute polynomials or rationals for variables."""
        ring = self.ring
        repl = {}
        for n, v in mapping.items():
            i = ring.index[n]
            repl[i] = v.to_ring(ring) if isinstance(v, Poly) else ring.const(v)
        result = ring.zero()
        cache: dict = {}
        for m, c in self.terms.items():
            keep = list(m)
            term = ring.const(c)
            for i, v in repl.items():
                k = m[i]
                if k:
                    keep[i] = 0
                    if (i, k) not in cache:
                        cache[(i, k)] = v ** k
                    term = term * cache[(i, k)]
            term = term * Poly(ring, {tuple(keep): Fraction(1)}, _clean=False)
            result = result + term
        return result

    def diff(self, name: str) -> Poly:
        i = self.ring.index[name]
        t = {}
        for m, c in self.terms.items():
            k = m[i]
            if k:
                e = list(m)
                e[i] = k - 1
                t[tuple(e)] = c * k
        return Poly(self.ring, t, _clean=False)

    def evaluate(self, values: Mapping[str, object], exact: bool = False):
        """Evaluate at numbers or numpy arrays.

        With ``exact=True`` the values must be rationals and the result is a
        :class:`Fraction`; otherwise coefficients are converted to float.
        """
        names = self.ring.names
        missing = [names[i] for i in self._used_indices() if names[i] not in values]
        if missing:
            raise KeyError(f"no value for {missing}")
        total = Fraction(0) if exact else 0.0
        for m, c in self.terms.items():
            term = c if exact else float(c)
            for i, k in enumerate(m):
                if k:
                    x = values[names[i]]
                    term = term * (x if k == 1 else x ** k)
            total = total + term
        return total

    def _used_indices(self):
        used = set()
        for m in self.terms:
            used.update(i for i, e in enumerate(m) if e)
        return sorted(used)

    def collect(self, names: Sequence[str]) -> dict[tuple, Poly]:
        """Split into ``{exponents in names: coefficient polynomial}``."""
        idx = [self.ring.index[n] for n in names]
        out: dict = {}
        for m, c in self.terms.items():
            key = tuple(m[i] for i in idx)
            e = list(m)
            for i in idx:
                e[i] = 0
            d = out.setdefault(key, {})
            d[tuple(e)] = c
        return {k: Poly(self.ring, v, _clean=False) for k, v in out.items()}

    # -- text ---------------------------------------------------------------
    def format(self, order: MonomialOrder | None = None) -> str:
        if not self.terms:
            return "0"
        order = order or MonomialOrder("degrevlex")
        parts = []
        for m, c in self.sorted_terms(order):
            factors = [
                self.ring.names[i] if k == 1 else f"{self.ring.names[i]}^{k}"
                for i, k in enumerate(m)
                if k
            ]
            mono = "*".join(factors)
            a = abs(c)
            cs = str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
            if not mono:
                body = cs
            elif a == 1:
                body = mono
            else:
                body = f"{cs}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"Poly({self.format()!r})"


# -----------------------------------------------------------------------------
# monomial orders


class MonomialOrder:
    """``lex``, ``degrevlex`` or a two-block product order.

    For ``block`` give ``high`` (names eliminated first) and optionally
    ``low``; by default the low block is every other ring variable.  Both
    blocks use ``sub`` (``degrevlex`` or ``lex``) with variables ranked in
    the order they are listed (ring order for the default low block).
    """

    KINDS = ("lex", "degrevlex", "block")

    def __init__(self, kind: str = "degrevlex", high: Sequence[str] | None = None,
                 low: Sequence[str] | None = None, sub: str = "degrevlex"):
        if kind not in self.KINDS:
            raise ValueError(f"unknown order {kind!r}")
        if kind == "block" and not high:
            raise ValueError("block order needs a high block")
        if sub not in ("lex", "degrevlex"):
            raise ValueError("block sub-order must be lex or degrevlex")
        self.kind = kind
        self.high = tuple(high) if high else ()
        self.low = tuple(low) if low is not None else None
        self.sub = sub
        self._keys: dict = {}

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and self.kind == other.kind
                and self.high == other.high and self.low == other.low and self.sub == other.sub)

    def __hash__(self):
        return hash((self.kind, self.high, self.low, self.sub))

    def __repr__(self):
        if self.kind == "block":
            return f"MonomialOrder(block, high={list(self.high)}, sub={self.sub})"
        return f"MonomialOrder({self.kind})"

    def key(self, ring: Ring):
        """Sort key on exponent tuples of ``ring``: larger key, larger monomial."""
        fn = self._keys.get(ring)
        if fn is None:
            fn = self._build(ring)
            self._keys[ring] = fn
        return fn

    def _build(self, ring):
        if self.kind == "lex":
            return lambda m: m
        if self.kind == "degrevlex":
            @lru_cache(maxsize=None)
            def k(m):
                return (sum(m), tuple(-e for e in reversed(m)))
            return k
        hi = [ring.index[n] for n in self.high if n in ring.index]
        his = set(hi)
        if self.low is None:
            lo = [i for i in range(ring.nvars) if i not in his]
        else:
            lo = [ring.index[n] for n in self.low if n in ring.index]
            missing = set(range(ring.nvars)) - his - set(lo)
            if missing:
                raise ValueError(f"block order does not cover {[ring.names[i] for i in missing]}")
        sub = self.sub

        def part(m, idx):
            e = tuple(m[i] for i in idx)
            if sub == "lex":
                return e
            return (sum(e), tuple(-x for x in reversed(e)))

        @lru_cache(maxsize=None)
        def k(m):
            return (part(m, hi), part(m, lo))
        return k

    def sub_order(self) -> MonomialOrder:
        return MonomialOrder(self.sub)


# -----------------------------------------------------------------------------
# Groebner machinery


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(map(max, a, b))


def _reduce_terms(p: dict, basis, key) -> dict:
    """Full reduction of term dict ``p`` by monic ``basis`` [(lm, terms)]."""
    p = dict(p)
    r = {}
    while p:
        m = max(p, key=key)
        c = p[m]
        for lm, g in basis:
            if _divides(lm, m):
                q = tuple(map(sub, m, lm))
                for gm, gc in g.items():
                    mm = tuple(map(add, gm, q))
                    v = p.get(mm, 0) - c * gc
                    if v:
                        p[mm] = v
                    else:
                        p.pop(mm, None)
                break
        else:
            r[m] = c
            del p[m]
    return r


def _monic_terms(t: dict, key):
    m = max(t, key=key)
    c = t[m]
    if c == 1:
        return m, t
    inv = 1 / c
    return m, {mm: cc * inv for mm, cc in t.items()}


@dataclass(frozen=True)
class GroebnerBasis:
    """Reduced Groebner basis: monic elements sorted by leading monomial."""

    elements: tuple
    order: MonomialOrder
    ring: Ring

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def leading_monomials(self):
        return [g.lead(self.order)[0] for g in self.elements]

    def normal_form(self, f: Poly) -> Poly:
        return normal_form(f, self)

    def contains(self, f: Poly) -> bool:
        return normal_form(f, self).is_zero()

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.elements)


class Ideal:
    def __init__(self, generators: Iterable[Poly], ring: Ring | None = None):
        gens = [g for g in generators if not g.is_zero()]
        if ring is None:
            if not gens:
                raise ValueError("ring needed for the zero ideal")
            ring = gens[0].ring
        for g in gens:
            if g.ring != ring:
                raise RingMismatch("generators over different rings")
        self.generators = gens
        self.ring = ring

    def __add__(self, other):
        gens = other.generators if isinstance(other, Ideal) else list(other)
        return Ideal(self.generators + [g.to_ring(self.ring) for g in gens], self.ring)

    def groebner(self, order: MonomialOrder | None = None) -> GroebnerBasis:
        return buchberger(self.generators, order or MonomialOrder("degrevlex"), ring=self.ring)

    def __repr__(self):
        return f"Ideal<{', '.join(map(str, self.generators))}>"


def normal_form(f: Poly, G: GroebnerBasis) -> Poly:
    if f.ring != G.ring:
        raise RingMismatch(f"polynomial over {f.ring}, basis over {G.ring}")
    if not G.elements:
        return f
    key = G.order.key(G.ring)
    basis = [(g.lead(G.order)[0], g.terms) for g in G.elements]
    return Poly(f.ring, _reduce_terms(f.terms, basis, key), _clean=False)


def divide(f: Poly, divisors: Sequence[Poly], order: MonomialOrder):
    """Multivariate division: ``f = sum q_i d_i + r``; returns ``(quotients, r)``."""
    ring = f.ring
    key = order.key(ring)
    leads = []
    for d in divisors:
        if d.ring != ring:
            raise RingMismatch("divisor over a different ring")
        if d.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        leads.append(d.lead(order))
    quots = [dict() for _ in divisors]
    p = dict(f.terms)
    r = {}
    while p:
        m = max(p, key=key)
        c = p[m]
        for k, (lm, lc) in enumerate(leads):
            if _divides(lm, m):
                q = tuple(map(sub, m, lm))
                a = c / lc
                quots[k][q] = quots[k].get(q, 0) + a
                for gm, gc in divisors[k].terms.items():
                    mm = tuple(map(add, gm, q))
                    v = p.get(mm, 0) - a * gc
                    if v:
                        p[mm] = v
                    else:
                        p.pop(mm, None)
                break
        else:
            r[m] = c
            del p[m]
    return [Poly(ring, q) for q in quots], Poly(ring, r, _clean=False)


def spoly(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    mf, cf = f.lead(order)
    mg, cg = g.lead(order)
    L = _lcm(mf, mg)
    ring = f.ring
    a = Poly(ring, {tuple(map(sub, L, mf)): 1 / cf}, _clean=False)
    b = Poly(ring, {tuple(map(sub, L, mg)): 1 / cg}, _clean=False)
    return a * f - b * g


def buchberger(gens: Sequence[Poly], order: MonomialOrder, ring: Ring | None = None,
               max_pairs: int | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of ``<gens>`` under ``order``."""
    gens = [g for g in gens if not g.is_zero()]
    if ring is None:
        if not gens:
            raise ValueError("ring needed for an empty generator list")
        ring = gens[0].ring
    for g in gens:
        if g.ring != ring:
            raise RingMismatch("generators over different rings")
    key = order.key(ring)

    G: list = []  # (lm, terms)
    seen = set()
    for g in gens:
        lm, t = _monic_terms(g.terms, key)
        fz = frozenset(t.items())
        if fz not in seen:
            seen.add(fz)
            G.append((lm, t))

    heap: list = []
    queued = set()

    def push(i, j):
        L = _lcm(G[i][0], G[j][0])
        heapq.heappush(heap, (sum(L), i, j))
        queued.add((i, j))

    for j in range(len(G)):
        for i in range(j):
            push(i, j)

    processed = 0
    while heap:
        _, i, j = heapq.heappop(heap)
        queued.discard((i, j))
        lmi, lmj = G[i][0], G[j][0]
        if all(not (a and b) for a, b in zip(lmi, lmj)):
            continue  # coprime leading monomials
        L = _lcm(lmi, lmj)
        chain = False
        for k in range(len(G)):
            if k == i or k == j:
                continue
            if _divides(G[k][0], L):
                if (min(i, k), max(i, k)) not in queued and (min(j, k), max(j, k)) not in queued:
                    chain = True
                    break
        if chain:
            continue
        processed += 1
        if max_pairs is not None and processed > max_pairs:
            raise BuchbergerAbort(processed - 1, len(heap) + 1)
        qi = tuple(map(sub, L, lmi))
        qj = tuple(map(sub, L, lmj))
        s: dict = {}
        for m, c in G[i][1].items():
            s[tuple(map(add, m, qi))] = c
        for m, c in G[j][1].items():
            mm = tuple(map(add, m, qj))
            v = s.get(mm, 0) - c
            if v:
                s[mm] = v
            else:
                s.pop(mm, None)
        h = _reduce_terms(s, G, key)
        if h:
            G.append(_monic_terms(h, key))
            n = len(G) - 1
            for k in range(n):
                push(k, n)

    return _reduce_basis(G, order, ring, key)


def _reduce_basis(G, order, ring, key) -> GroebnerBasis:
    # minimal basis: drop elements whose lm is divisible by another lm
    items = sorted(G, key=lambda lt: key(lt[0]))
    minimal = []
    for lm, t in items:
        if not any(_divides(other, lm) for other, _ in minimal):
            minimal.append((lm, t))
    reduced = []
    for idx, (lm, t) in enumerate(minimal):
        others = [x for k, x in enumerate(minimal) if k != idx]
        tail = {m: c for m, c in t.items() if m != lm}
        tail = _reduce_terms(tail, others, key)
        tail[lm] = Fraction(1)
        reduced.append(Poly(ring, tail, _clean=False))
    reduced.sort(key=lambda p: key(p.lead(order)[0]))
    return GroebnerBasis(tuple(reduced), order, ring)


def elimination_ideal(I: Ideal | Sequence[Poly], keep: Iterable[str],
                      order_hint: MonomialOrder | None = None) -> list[Poly]:
    """Generators of ``I ∩ Q[keep]`` via a block order eliminating the rest.

    The returned list is the reduced Groebner basis of the elimination ideal
    for the sub-order of ``order_hint`` restricted to ``keep``.
    """
    if not isinstance(I, Ideal):
        I = Ideal(I)
    ring = I.ring
    keep = [n for n in ring.names if n in set(keep)]
    missing = set(keep) - set(ring.names)
    if missing:
        raise ValueError(f"unknown variables {missing}")
    sub_kind = "degrevlex"
    if order_hint is not None:
        sub_kind = order_hint.sub if order_hint.kind == "block" else order_hint.kind
    drop = [n for n in ring.names if n not in set(keep)]
    if not drop:
        return list(buchberger(I.generators, MonomialOrder(sub_kind), ring=ring))
    order = MonomialOrder("block", high=drop, low=keep, sub=sub_kind)
    G = buchberger(I.generators, order, ring=ring)
    keep_set = set(keep)
    return [g for g in G if g.variables() <= keep_set]


def sos_decompose(f: Poly) -> list[tuple[Fraction, Poly]]:
    """Write ``f = sum c_i m_i^2`` with ``c_i > 0`` and monomials ``m_i``."""
    if f.is_zero():
        raise NotSumOfSquares("zero polynomial")
    out = []
    for m, c in sorted(f.terms.items()):
        if c <= 0 or any(e % 2 for e in m):
            raise NotSumOfSquares(f"term {c}*{m} is not a positive square")
        root = tuple(e // 2 for e in m)
        out.append((c, Poly(f.ring, {root: Fraction(1)}, _clean=False)))
    return out


def sos_split(f: Poly) -> list[Poly]:
    """Monomials whose weighted squares sum to ``f`` (real-radical members)."""
    return [m for _, m in sos_decompose(f)]


def ideal_dimension(G: GroebnerBasis) -> int:
    """Krull dimension of ``<LM(G)>``; -1 for the unit ideal."""
    n = G.ring.nvars
    supports = []
    for lm in G.leading_monomials():
        s = frozenset(i for i, e in enumerate(lm) if e)
        if not s:
            return -1
        supports.append(s)
    # dimension = n - minimum hitting set of the supports
    supports = sorted(set(supports), key=len)
    best = [n]

    def search(chosen: frozenset):
        if len(chosen) >= best[0]:
            return
        for s in supports:
            if not (s & chosen):
                for v in sorted(s):
                    search(chosen | {v})
                return
        best[0] = len(chosen)

    search(frozenset())
    return n - best[0]


def random_combination(G: Sequence[Poly], rng, max_degree: int = 2, max_terms: int = 3,
                       coeff_range: int = 5) -> Poly:
    """``sum h_i g_i`` with random small multipliers; used by property checks."""
    ring = G[0].ring
    total = ring.zero()
    for g in G:
        h = ring.zero()
        for _ in range(rng.integers(0, max_terms + 1)):
            e = [0] * ring.nvars
            for _ in range(rng.integers(0, max_degree + 1)):
                e[rng.integers(0, ring.nvars)] += 1
            h = h + Poly(ring, {tuple(e): Fraction(int(rng.integers(-coeff_range, coeff_range + 1)))})
        total = total + h * g
    return total

