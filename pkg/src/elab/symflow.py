"""Symbolic identities behind the two-block solution families.

The flow map is ``phi(t, a) = A(t) u(a)`` with ``A`` a 2x4 matrix and
``u = (v | w)`` a map into R^4.  With ``B = A^T A''`` and
``y = dphi^T phi''`` everything reduces to 2x2 minors of ``du``:

* ``det(dphi) = sum_i p_i g_i`` (Cauchy-Binet, ``p_i`` minors of ``A``),
* ``N12 = d1 y2 - d2 y1 = sum_{l<k} (B_kl - B_lk) g_lk``.

Minors are numbered ``g1..g6 = (3,4), (2,4), (1,4), (2,3), (1,3), (1,2)``
(row pairs of ``du``, one-based).  Jet variables are ``u{j}_10`` and
``u{j}_01``; components 1, 2 belong to ``v`` and 3, 4 to ``w``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ratpoly import (
    GroebnerBasis,
    Ideal,
    MonomialOrder,
    Poly,
    Ring,
    buchberger,
    divide,
    normal_form,
)

__all__ = [
    "IdentityFailure",
    "SymbolicBlockMatrix",
    "MinorExpansion",
    "DerivedSystem",
    "Thm56Report",
    "U_JETS",
    "MINOR_PAIRS",
    "rotation_block_matrix",
    "general_block_matrix",
    "cauchy_binet_expand",
    "n12_expand",
    "derive_system",
    "derive_rotation_system",
    "verify_rotation_identity",
    "verify_thm56",
    "printed_rotation_system",
    "jet_values",
]

U_JETS = tuple(f"u{j}_{d}" for j in range(1, 5) for d in ("10", "01"))
MINOR_PAIRS = ((2, 3), (1, 3), (0, 3), (1, 2), (0, 2), (0, 1))
TRIG = ("c1", "s1", "c2", "s2")
RATES = ("mu", "theta")
ORDER = MonomialOrder("degrevlex")


class IdentityFailure(AssertionError):
    """A symbolic identity did not hold; ``poly`` is the offending difference."""

    def __init__(self, what, poly):
        super().__init__(f"{what}: nonzero remainder {poly}")
        self.what = what
        self.poly = poly


def _u(ring, j, d):
    return ring.gen(f"u{j}_{d}")


def minors_of_du(ring: Ring) -> list[Poly]:
    g = []
    for l, k in MINOR_PAIRS:
        g.append(_u(ring, l + 1, "10") * _u(ring, k + 1, "01")
                 - _u(ring, l + 1, "01") * _u(ring, k + 1, "10"))
    return g


@dataclass(frozen=True)
class SymbolicBlockMatrix:
    """2x4 matrix ``A`` with optional ``A''`` and a reduction ideal."""

    entries: tuple
    second: tuple | None
    ring: Ring
    relations: GroebnerBasis | None = None
    label: str = ""

    def reduce(self, f: Poly) -> Poly:
        return normal_form(f, self.relations) if self.relations is not None else f


def _block(c, s, reflect):
    # rotation [[c, -s], [s, c]]; reflection [[c, s], [s, -c]]
    if reflect:
        return ((c, s), (s, -c))
    return ((c, -s), (s, c))


def rotation_block_matrix(reflect1: bool = False, reflect2: bool = False,
                          swap: bool = False) -> SymbolicBlockMatrix:
    """``A = (M1 | M2)`` with ``M1, M2`` rotations (or reflections) at rates mu, theta.

    ``M1'' = -mu^2 M1`` and ``M2'' = -theta^2 M2``.  With ``swap`` the blocks
    trade places, which is how the relabeling symmetry is checked.
    """
    ring = Ring(TRIG + RATES + U_JETS)
    c1, s1, c2, s2, mu, th = (ring.gen(n) for n in TRIG + RATES)
    M1 = _block(c1, s1, reflect1)
    M2 = _block(c2, s2, reflect2)
    r1, r2 = mu * mu, th * th
    L, R, rl, rr = (M2, M1, r2, r1) if swap else (M1, M2, r1, r2)
    entries = tuple(tuple(L[i]) + tuple(R[i]) for i in range(2))
    second = tuple(tuple(-rl * x for x in L[i]) + tuple(-rr * x for x in R[i]) for i in range(2))
    trig = buchberger([c1 * c1 + s1 * s1 - 1, c2 * c2 + s2 * s2 - 1], ORDER, ring=ring)
    label = f"rotation(reflect1={reflect1}, reflect2={reflect2}, swap={swap})"
    return SymbolicBlockMatrix(entries, second, ring, trig, label)


A_NAMES = tuple(f"a{i}{j}" for i in (1, 2) for j in range(1, 5))
THM56_ORDER_NAMES = ("a14", "a24", "a14pp", "a24pp", "a13", "a23", "a13pp", "a23pp",
                     "a11", "a12", "a21", "a22", "a11pp", "a12pp", "a21pp", "a22pp")


def general_block_matrix() -> SymbolicBlockMatrix:
    """Generic ``A = (a_ij)`` with ``A'' = (a_ijpp)``, no relations."""
    ring = Ring(THM56_ORDER_NAMES + U_JETS)
    entries = tuple(tuple(ring.gen(f"a{i}{j}") for j in range(1, 5)) for i in (1, 2))
    second = tuple(tuple(ring.gen(f"a{i}{j}pp") for j in range(1, 5)) for i in (1, 2))
    return SymbolicBlockMatrix(entries, second, ring, None, "general")


@dataclass(frozen=True)
class MinorExpansion:
    """``target = sum coeffs[i] * g[i]``, verified by full expansion."""

    coeffs: tuple
    g: tuple
    target: Poly

    def total(self) -> Poly:
        out = self.target.ring.zero()
        for c, g in zip(self.coeffs, self.g):
            out = out + c * g
        return out


def _du_column(ring, d):
    return [_u(ring, j, d) for j in range(1, 5)]


def cauchy_binet_expand(A: SymbolicBlockMatrix) -> MinorExpansion:
    """Minors of ``A`` paired with minors of ``du``; checked against det(A du)."""
    ring = A.ring
    E = A.entries
    p = [E[0][l] * E[1][k] - E[0][k] * E[1][l] for l, k in MINOR_PAIRS]
    g = minors_of_du(ring)
    # direct product A du (2x2) and its determinant
    c10, c01 = _du_column(ring, "10"), _du_column(ring, "01")
    J = [[sum((E[i][j] * col[j] for j in range(4)), ring.zero()) for col in (c10, c01)]
         for i in range(2)]
    target = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    exp = MinorExpansion(tuple(p), tuple(g), target)
    diff = exp.total() - target
    if not diff.is_zero():
        raise IdentityFailure("Cauchy-Binet expansion", diff)
    return exp


def n12_expand(A: SymbolicBlockMatrix) -> MinorExpansion:
    """``N12 = d1 y2 - d2 y1`` expanded over the minors of ``du``."""
    if A.second is None:
        raise ValueError("matrix carries no second-derivative data")
    ring = A.ring
    E, S = A.entries, A.second
    B = [[sum((E[i][l] * S[i][k] for i in range(2)), ring.zero()) for k in range(4)]
         for l in range(4)]
    f = [B[k][l] - B[l][k] for l, k in MINOR_PAIRS]
    g = minors_of_du(ring)
    # index form: B_lk (u^l_2 u^k_1 - u^l_1 u^k_2)
    c10, c01 = _du_column(ring, "10"), _du_column(ring, "01")
    target = ring.zero()
    for l in range(4):
        for k in range(4):
            target = target + B[l][k] * (c01[l] * c10[k] - c10[l] * c01[k])
    exp = MinorExpansion(tuple(f), tuple(g), target)
    diff = exp.total() - target
    if not diff.is_zero():
        raise IdentityFailure("N12 minor expansion", diff)
    return exp


# -----------------------------------------------------------------------------
# rotation pairs


def _express(C: Poly, basis, what: str):
    """Write ``C = sum alpha_i basis_i`` with ``alpha_i`` free of jet variables."""
    ring = C.ring
    jets = list(U_JETS)
    supports = [set(b.collect(jets)) for b in basis]
    coll = C.collect(jets)
    alphas = []
    for i, b in enumerate(basis):
        others = set().union(*(s for j, s in enumerate(supports) if j != i))
        pivots = sorted(supports[i] - others)
        if not pivots:
            raise IdentityFailure(f"{what}: no pivot monomial", b)
        bc = b.collect(jets)[pivots[0]]
        assert bc.is_constant()
        alphas.append(coll.get(pivots[0], ring.zero()) * (1 / bc.constant_term()))
    rest = C - sum((a * b for a, b in zip(alphas, basis)), ring.zero())
    if not rest.is_zero():
        raise IdentityFailure(what, rest)
    return alphas


@dataclass
class DerivedSystem:
    """The jet equations ``q1 = q2 = 0`` for a pair of rotation/reflection blocks.

    ``det(dphi) = static + T1 q1 + T2 q2`` and ``N12 = K1 q1 + K2 q2`` hold
    exactly modulo ``c_i^2 + s_i^2 - 1``; ``K_i = (mu^2 - theta^2) L_i``.
    """

    q1: Poly
    q2: Poly
    static: Poly
    T: tuple
    K: tuple
    L: tuple
    reflect: tuple

    @property
    def ring(self):
        return self.q1.ring

    def jets(self, p: Poly) -> Ring:
        return p.ring

    def evaluate(self, dv, dw):
        """``(q1, q2)`` from Jacobians ``dv``, ``dw`` of shape ``(2, 2, ...)``."""
        vals = jet_values(np.concatenate([np.asarray(dv), np.asarray(dw)], axis=0))
        return self.q1.evaluate(vals), self.q2.evaluate(vals)

    def evaluate_static(self, dv, dw):
        vals = jet_values(np.concatenate([np.asarray(dv), np.asarray(dw)], axis=0))
        return self.static.evaluate(vals)

    def linear_in_v(self):
        """Coefficient polynomials (in w-jets) of each v-jet in q1 and q2."""
        vj = U_JETS[:4]
        return [[q.diff(n) for n in vj] for q in (self.q1, self.q2)]

    def to_dict(self):
        return {
            "q1": str(self.q1),
            "q2": str(self.q2),
            "static": str(self.static),
            "time_factors": [str(t) for t in self.T],
            "n12_factors": [str(k) for k in self.K],
            "n12_factors_reduced": [str(x) for x in self.L],
            "reflect": list(self.reflect),
            "variables": list(U_JETS),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> DerivedSystem:
        d = json.loads(text)
        ring = Ring(TRIG + RATES + U_JETS)
        return cls(
            q1=ring.parse(d["q1"]),
            q2=ring.parse(d["q2"]),
            static=ring.parse(d["static"]),
            T=tuple(ring.parse(x) for x in d["time_factors"]),
            K=tuple(ring.parse(x) for x in d["n12_factors"]),
            L=tuple(ring.parse(x) for x in d["n12_factors_reduced"]),
            reflect=tuple(d["reflect"]),
        )


def jet_values(du) -> dict:
    """Map a ``(4, 2, ...)`` Jacobian ``du[j, i] = d_i u^j`` to jet names."""
    du = np.asarray(du)
    out = {}
    for j in range(4):
        out[f"u{j + 1}_10"] = du[j, 0]
        out[f"u{j + 1}_01"] = du[j, 1]
    return out


def derive_system(A: SymbolicBlockMatrix, reflect=(False, False)) -> DerivedSystem:
    """Derive ``(q1, q2)`` from the det and N12 expansions of a two-block matrix."""
    ring = A.ring
    det = A.reduce(cauchy_binet_expand(A).total())
    parts = det.collect(TRIG)
    zero = (0, 0, 0, 0)
    static = parts.pop(zero, ring.zero())
    for e in parts:
        if not (e[0] + e[1] == 1 and e[2] + e[3] == 1):
            raise IdentityFailure("det(dphi) time dependence is not bilinear in the blocks",
                                  parts[e])
    q1 = parts.get((1, 0, 1, 0), ring.zero())
    q2 = parts.get((0, 1, 1, 0), ring.zero())
    if q1.is_zero() or q2.is_zero():
        raise IdentityFailure("missing time-dependent coefficient", det)
    basis = [q1, q2]
    T = [ring.zero(), ring.zero()]
    for e, C in parts.items():
        mono = ring.monomial(dict(zip(TRIG, e)))
        for i, a in enumerate(_express(C, basis, "det(dphi) coefficient")):
            T[i] = T[i] + a * mono
    check = static + T[0] * q1 + T[1] * q2 - det
    if not check.is_zero():
        raise IdentityFailure("det(dphi) = static + T1 q1 + T2 q2", check)

    n12 = A.reduce(n12_expand(A).total())
    K = [ring.zero(), ring.zero()]
    for e, C in n12.collect(TRIG).items():
        mono = ring.monomial(dict(zip(TRIG, e)))
        for i, a in enumerate(_express(C, basis, "N12 coefficient")):
            K[i] = K[i] + a * mono
    check = K[0] * q1 + K[1] * q2 - n12
    if not check.is_zero():
        raise IdentityFailure("N12 = K1 q1 + K2 q2", check)
    gap = ring.gen("mu") ** 2 - ring.gen("theta") ** 2
    L = []
    for k in K:
        (quot,), rem = divide(k, [gap], ORDER)
        if not rem.is_zero():
            raise IdentityFailure("N12 factor not divisible by mu^2 - theta^2", rem)
        L.append(quot)
    return DerivedSystem(q1, q2, static, tuple(T), tuple(K), tuple(L), tuple(reflect))


@lru_cache(maxsize=None)
def derive_rotation_system(reflect1: bool = False, reflect2: bool = False) -> DerivedSystem:
    return derive_system(rotation_block_matrix(reflect1, reflect2), (reflect1, reflect2))


def verify_rotation_identity() -> dict:
    """The rotation-pair certificate written out in closed form.

    Checks ``det(dphi) = det(dv) + det(dw) + (c1c2+s1s2) q1 + (s1c2-s2c1) q2``
    and ``N12 = (mu^2-theta^2)((s2c1-c2s1) q1 + (c1c2+s1s2) q2)`` as exact
    identities modulo the trigonometric ideal.
    """
    A = rotation_block_matrix()
    ring = A.ring
    c1, s1, c2, s2, mu, th = (ring.gen(n) for n in TRIG + RATES)
    u = lambda j, d: _u(ring, j, d)  # noqa: E731
    q1 = u(3, "10") * u(2, "01") - u(3, "01") * u(2, "10") - u(4, "10") * u(1, "01") + u(4, "01") * u(1, "10")
    q2 = u(4, "10") * u(2, "01") - u(4, "01") * u(2, "10") + u(3, "10") * u(1, "01") - u(3, "01") * u(1, "10")
    detv = u(1, "10") * u(2, "01") - u(1, "01") * u(2, "10")
    detw = u(3, "10") * u(4, "01") - u(3, "01") * u(4, "10")
    det_claim = detv + detw + (c1 * c2 + s1 * s2) * q1 + (s1 * c2 - s2 * c1) * q2
    n12_claim = (mu**2 - th**2) * ((s2 * c1 - c2 * s1) * q1 + (c1 * c2 + s1 * s2) * q2)
    d_det = A.reduce(cauchy_binet_expand(A).total() - det_claim)
    if not d_det.is_zero():
        raise IdentityFailure("det(dphi) rotation identity", d_det)
    d_n12 = A.reduce(n12_expand(A).total() - n12_claim)
    if not d_n12.is_zero():
        raise IdentityFailure("N12 rotation identity", d_n12)
    derived = derive_rotation_system()
    if derived.q1 != q1 or derived.q2 != q2:
        raise IdentityFailure("derived (q1, q2) differ from closed form", derived.q2 - q2)
    return {"det": str(det_claim), "n12": str(n12_claim), "q1": str(q1), "q2": str(q2)}


def printed_rotation_system() -> tuple[Poly, Poly]:
    """The two-equation system exactly as typeset, second equation included.

    Kept for regression: the second equation's last pair reads
    ``w1_10 v1_10 - w1_01 v1_10``, which Gerstner's flow does not satisfy.
    """
    ring = Ring(TRIG + RATES + U_JETS)
    v1_10, v1_01, v2_10, v2_01, w1_10, w1_01, w2_10, w2_01 = (ring.gen(n) for n in U_JETS)
    e1 = w1_10 * v2_01 - w1_01 * v2_10 - w2_10 * v1_01 + w2_01 * v1_10
    e2 = w2_10 * v2_01 - w2_01 * v2_10 + w1_10 * v1_10 - w1_01 * v1_10
    return e1, e2


def cr_reduction(system: DerivedSystem):
    """Substitute de Rham CR jets for ``v`` (``v1_01 = v2_10``, ``v1_10 = -v2_01``).

    Returns ``(r1, r2, M)`` with ``(r1, r2) = M (X, Y)`` where
    ``X = w1_10 - w2_01`` and ``Y = w1_01 + w2_10`` measure the failure of
    ``w`` to be CR in the complex-analysis convention.
    """
    ring = system.ring
    g = ring.gen
    sub = {"u1_01": g("u2_10"), "u1_10": -g("u2_01")}
    r = [system.q1.subs(sub), system.q2.subs(sub)]
    X = g("u3_10") - g("u4_01")
    Y = g("u3_01") + g("u4_10")
    M = [_express_xy(ri, X, Y) for ri in r]
    return r[0], r[1], M


def _express_xy(r, X, Y):
    ring = r.ring
    # r is bilinear: coefficients of X, Y are linear in v2 jets
    a = r.diff("u3_10")
    b = r.diff("u3_01")
    rest = r - a * X - b * Y
    if not rest.is_zero():
        raise IdentityFailure("CR reduction is not a combination of X and Y", rest)
    return [a, b]


# -----------------------------------------------------------------------------
# the general 2x4 construction


@dataclass
class Thm56Report:
    nf_f2: str
    nf_f3: str
    nf_f6: str
    fifth_equation: str
    det_expansion: str
    p5: str
    f_hat: dict
    f_hat_relation: str
    n12_reduced: str
    equations: list
    printed_equations: list
    discrepancies: list
    ok: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def thm56_ideals():
    """Rings and ideals ``I``, ``I1``, ``I2`` of the constrained 2x4 construction."""
    A = general_block_matrix()
    ring = A.ring
    a = {n: ring.gen(n) for n in THM56_ORDER_NAMES}
    I = [
        a["a11"] * a["a22"] - a["a12"] * a["a21"] - 1,
        a["a13"] * a["a24"] - a["a14"] * a["a23"] - 1,
        a["a14"] - a["a12"] + a["a11"],
        a["a24"] - a["a22"] + a["a21"],
    ]
    I1 = I + [a["a14pp"] - a["a12pp"] + a["a11pp"], a["a24pp"] - a["a22pp"] + a["a21pp"]]
    E = (a["a21pp"] * a["a22"] - a["a22pp"] * a["a21"]
         + a["a11pp"] * a["a12"] - a["a12pp"] * a["a11"])
    return A, I, I1, E


def verify_thm56() -> Thm56Report:
    """Normal-form chain for the constrained 2x4 construction.

    Raises :class:`IdentityFailure` with the offending polynomial if any
    step fails.
    """
    A, I, I1, E = thm56_ideals()
    ring = A.ring
    # Groebner bases live in the a-variables only
    aring = Ring(THM56_ORDER_NAMES)
    G = buchberger([p.to_ring(aring) for p in I], ORDER, ring=aring)
    G1 = buchberger([p.to_ring(aring) for p in I1], ORDER, ring=aring)
    G2 = buchberger([p.to_ring(aring) for p in I1 + [E]], ORDER, ring=aring)
    Ea = E.to_ring(aring)

    def nf(p, basis):
        return normal_form(p.to_ring(aring), basis).to_ring(ring)

    cb = cauchy_binet_expand(A)
    p_nf = [nf(p, G) for p in cb.coeffs]
    g = cb.g
    det_claim = g[0] + g[1] + g[2] - g[3] + p_nf[4] * (g[3] + g[4]) + g[5]
    got = sum((p * gi for p, gi in zip(p_nf, g)), ring.zero())
    if got != det_claim:
        raise IdentityFailure("det(dphi) = g1+g2+g3-g4+p5(g4+g5)+g6", got - det_claim)

    ne = n12_expand(A)
    f = ne.coeffs
    nf1 = [nf(fi, G1) for fi in f]
    for idx in (1, 2, 5):
        if nf1[idx] != E:
            raise IdentityFailure(f"NF(f{idx + 1}, I1) = fifth equation", nf1[idx] - E)
    fh = [nf(fi, G2) for fi in f]
    for idx in (1, 2, 5):
        if not fh[idx].is_zero():
            raise IdentityFailure(f"NF(f{idx + 1}, I2) = 0", fh[idx])
    rel = fh[0] + fh[3] - fh[4]
    if not rel.is_zero():
        raise IdentityFailure("f^1 + f^4 - f^5 = 0", rel)
    n12_red = sum((fi * gi for fi, gi in zip(fh, g)), ring.zero())
    e1 = g[3] + g[4]
    e2 = g[0] - g[3]
    if n12_red != fh[0] * e2 + fh[4] * e1:
        raise IdentityFailure("N12 = f^1 (g1 - g4) modulo g4 + g5", n12_red - fh[0] * e2 - fh[4] * e1)
    # the full N12, not only its reduction, must lie in I2 + <g4+g5, g1-g4>
    diff = ne.total() - n12_red
    for k, fi in enumerate(f):
        if not normal_form((fi - fh[k]).to_ring(aring), G2).is_zero():
            raise IdentityFailure("f_i - f^_i in I2", diff)
    if not normal_form(Ea, G1).to_ring(ring) == E:
        raise IdentityFailure("fifth equation independent of I1", E)

    u = lambda j, d: _u(ring, j, d)  # noqa: E731
    printed1 = (-u(3, "10") * u(2, "01") + u(3, "01") * u(2, "10")
                - u(3, "10") * u(1, "01") + u(3, "01") * u(1, "10"))
    printed2 = (-u(4, "10") * u(3, "01") + u(4, "01") * u(3, "10")
                - u(3, "10") * u(1, "01") + u(3, "01") * u(1, "10"))
    discrepancies = []
    for name, ours, printed in (("g4+g5", e1, printed1), ("g1-g4", e2, printed2)):
        d = printed - ours
        if not d.is_zero():
            entry = {"equation": name, "printed_minus_derived": str(d)}
            if d == e1:
                entry["note"] = "difference equals g4+g5, so both systems define the same solutions"
            discrepancies.append(entry)
    return Thm56Report(
        nf_f2=str(nf1[1]),
        nf_f3=str(nf1[2]),
        nf_f6=str(nf1[5]),
        fifth_equation=str(E),
        det_expansion=str(det_claim),
        p5=str(p_nf[4]),
        f_hat={f"f{i + 1}": str(fh[i]) for i in range(6)},
        f_hat_relation=str(rel),
        n12_reduced=f"({fh[0]})*({e2})",
        equations=[str(e1), str(e2)],
        printed_equations=[str(printed1), str(printed2)],
        discrepancies=discrepancies,
    )
