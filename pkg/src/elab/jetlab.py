"""Jet variables, prolongation and the affine-rigidity computation.

Jets are for two independent variables.  The variable ``u{k}_{a}{b}``
stands for the derivative of component ``k`` taken ``a`` times in the first
variable and ``b`` times in the second one.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .ratpoly import (
    Ideal,
    MonomialOrder,
    NotSumOfSquares,
    Poly,
    Ring,
    buchberger,
    elimination_ideal,
    ideal_dimension,
    normal_form,
    sos_decompose,
)

log = logging.getLogger(__name__)

__all__ = [
    "JetSpace",
    "JetSystem",
    "RigidityError",
    "RigidityReport",
    "total_derivative",
    "prolong",
    "prove_affine_rigidity",
    "killing_system",
    "killing_solution_dimension",
]


class RigidityError(RuntimeError):
    """A stage of the rigidity pipeline produced an unexpected shape."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class JetSpace:
    """Jet coordinates of ``nfunc`` functions of two variables up to ``order``.

    Ring variables are listed from the highest order down; inside one order
    the components come in turn and the multi-indices run ``0q, 1(q-1), ...``.
    """

    def __init__(self, nfunc: int = 2, order: int = 3, prefix: str = "u"):
        if nfunc < 1 or order < 0:
            raise ValueError("need nfunc >= 1 and order >= 0")
        self.nfunc = nfunc
        self.order = order
        self.prefix = prefix
        names = []
        self._info = {}
        for q in range(order, -1, -1):
            for k in range(1, nfunc + 1):
                for a in range(q + 1):
                    nu = (a, q - a)
                    n = self.name(k, nu)
                    names.append(n)
                    self._info[n] = (k, nu)
        self.ring = Ring(names)

    def name(self, k: int, nu) -> str:
        return f"{self.prefix}{k}_{nu[0]}{nu[1]}"

    def var(self, k: int, nu) -> Poly:
        return self.ring.gen(self.name(k, nu))

    def __call__(self, k, nu):
        return self.var(k, nu)

    def info(self, name: str):
        """``(component, multi-index)`` of a jet variable name."""
        return self._info[name]

    def names_of_order(self, q: int) -> list[str]:
        return [n for n in self.ring.names if sum(self._info[n][1]) == q]

    def names_up_to(self, q: int) -> list[str]:
        return [n for n in self.ring.names if sum(self._info[n][1]) <= q]

    def order_of(self, f: Poly) -> int:
        return max((sum(self._info[n][1]) for n in f.variables()), default=0)


def total_derivative(f: Poly, direction: int, space: JetSpace) -> Poly:
    """Formal total derivative ``D_direction f`` (direction 1 or 2)."""
    if direction not in (1, 2):
        raise ValueError("direction must be 1 or 2")
    if f.ring != space.ring:
        raise ValueError("polynomial is not over this jet space")
    out = space.ring.zero()
    for n in sorted(f.variables()):
        k, nu = space.info(n)
        up = (nu[0] + 1, nu[1]) if direction == 1 else (nu[0], nu[1] + 1)
        if sum(up) > space.order:
            raise ValueError(f"jet space of order {space.order} cannot hold D{direction} {n}")
        out = out + f.diff(n) * space.var(k, up)
    return out


@dataclass
class JetSystem:
    equations: list
    space: JetSpace

    @property
    def order(self) -> int:
        return max((self.space.order_of(e) for e in self.equations), default=0)

    def __len__(self):
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)


_DEDUP_ORDER = MonomialOrder("degrevlex")


def _dedup(polys):
    out, seen = [], set()
    for p in polys:
        if p.is_zero():
            continue
        key = p.monic(_DEDUP_ORDER)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def prolong(S: JetSystem, times: int = 1) -> JetSystem:
    """Original equations plus all total derivatives up to ``times``.

    Derivatives that coincide (up to a constant factor) with an equation
    already present are dropped, so prolonging ``{f1,...,f5}`` of the
    area-preserving harmonic system once gives 12 equations.
    """
    if times < 1:
        raise ValueError("times must be >= 1")
    eqs = _dedup(S.equations)
    level = list(eqs)
    for _ in range(times):
        new = []
        for e in level:
            for j in (1, 2):
                new.append(total_derivative(e, j, S.space))
        before = len(eqs)
        eqs = _dedup(eqs + new)
        level = eqs[before:]
    return JetSystem(eqs, S.space)


# -----------------------------------------------------------------------------
# area-preserving harmonic maps are affine


def area_harmonic_system(space: JetSpace) -> list[Poly]:
    """``f1..f5``: unit Jacobian determinant, its two prolongations, harmonicity."""
    y = space
    f1 = y(1, (1, 0)) * y(2, (0, 1)) - y(1, (0, 1)) * y(2, (1, 0)) - 1
    f2 = total_derivative(f1, 1, space)
    f3 = total_derivative(f1, 2, space)
    f4 = y(1, (2, 0)) + y(1, (0, 2))
    f5 = y(2, (2, 0)) + y(2, (0, 2))
    return [f1, f2, f3, f4, f5]


def expected_g(space: JetSpace) -> list[Poly]:
    y = space
    a, b = y(1, (1, 1)), y(1, (2, 0))
    c, d = y(2, (1, 1)), y(2, (2, 0))
    return [a * d - c * b, a**2 + b**2, c * a + d * b, c**2 + d**2]


@dataclass
class RigidityReport:
    eliminated_basis: list
    sos_generators: list
    vanishing_jets: list
    remaining_equations: list
    dimensions: dict
    equation_count: int
    third_order_equations: int
    g_found: dict
    order: str
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "eliminated_basis": self.eliminated_basis,
            "sos_generators": self.sos_generators,
            "dimensions": self.dimensions,
            "vanishing_jets": self.vanishing_jets,
            "remaining_equations": self.remaining_equations,
            "equation_count": self.equation_count,
            "third_order_equations": self.third_order_equations,
            "g_found": self.g_found,
            "order": self.order,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def prove_affine_rigidity(sub_order: str = "degrevlex") -> RigidityReport:
    """Run the prolong / eliminate / sum-of-squares pipeline.

    Every stage checks the shape it expects and raises :class:`RigidityError`
    naming the stage otherwise.
    """
    space = JetSpace(2, 3, prefix="y")
    order = MonomialOrder(sub_order)
    R2 = JetSystem(area_harmonic_system(space), space)
    notes = ["f2, f3 are the first prolongation of f1 and are included in the initial system"]

    R3 = prolong(R2, 1)
    n_new = sum(1 for e in R3 if space.order_of(e) == 3)
    if len(R3) != 12 or n_new != 7:
        raise RigidityError("prolong", f"expected 12 equations (7 of order 3), got {len(R3)} ({n_new})")
    log.info("prolonged system: %d equations", len(R3))

    keep = space.names_up_to(2)
    keep = [n for n in keep if n not in space.names_of_order(0)]
    basis = elimination_ideal(Ideal(R3.equations), keep, order)
    log.info("eliminated basis: %d elements", len(basis))

    # compare with <f1..f5, g1..g4> in the ring of first and second order jets
    low = Ring(keep)
    basis_low = [b.to_ring(low) for b in basis]
    fs = [f.to_ring(low) for f in R2.equations]
    gs = [g.to_ring(low) for g in expected_g(space)]
    G_low = buchberger(basis_low, order, ring=low)
    if G_low.elements != buchberger(fs + gs, order, ring=low).elements:
        raise RigidityError("eliminate", "elimination ideal differs from <f1..f5, g1..g4>")
    g_found = {}
    for i, g in enumerate(gs, start=1):
        hit = [str(b) for b in basis_low if b.proportional_to(g)]
        g_found[f"g{i}"] = hit[0] if hit else None

    full = Ring(space.names_up_to(2))
    I38 = [b.to_ring(full) for b in basis_low]
    G_complex = buchberger(I38, order, ring=full)

    # sum-of-squares members: basis elements first, then the g's certified by normal form
    candidates = [(b, "basis") for b in basis_low]
    for i, g in enumerate(gs, start=1):
        if not G_low.contains(g):
            raise RigidityError("eliminate", f"g{i} is not in the elimination ideal")
        if not any(g.proportional_to(b) for b in basis_low):
            candidates.append((g, "member"))
    sos_gens: list = []
    sources = set()
    for cand, src in candidates:
        try:
            parts = sos_decompose(cand)
        except NotSumOfSquares:
            continue
        sources.add(src)
        sos_gens.extend(m for _, m in parts if m not in sos_gens)
    if not sos_gens:
        raise RigidityError("sos", "no sum-of-squares member in the eliminated ideal")
    if "member" in sources:
        notes.append(f"under {sub_order} some sum-of-squares members are not reduced basis elements; "
                     "used normal-form certified g's")
    G_real = buchberger(I38 + [m.to_ring(full) for m in sos_gens], order, ring=full)
    sos_gens = [m.to_ring(low) for m in sos_gens]
    second = [n for n in keep if sum(space.info(n)[1]) == 2]
    dims = {"complex": ideal_dimension(G_complex), "real": ideal_dimension(G_real)}

    vanishing = sorted(n for n in second if G_real.contains(full.gen(n)))
    if set(vanishing) != set(second):
        raise RigidityError("sos", f"only {vanishing} vanish among the second order jets")
    remaining = [g for g in G_real if len(g.variables()) > 1 or len(g) > 1]
    f1 = R2.equations[0].to_ring(full)
    if len(remaining) != 1 or not remaining[0].proportional_to(f1):
        raise RigidityError("project", f"unexpected remaining equations {list(map(str, remaining))}")

    return RigidityReport(
        eliminated_basis=[str(b) for b in basis_low],
        sos_generators=[str(m) for m in sos_gens],
        vanishing_jets=vanishing,
        remaining_equations=[str(r) for r in remaining],
        dimensions=dims,
        equation_count=len(R3),
        third_order_equations=n_new,
        g_found=g_found,
        order=sub_order,
        notes=notes,
    )


# -----------------------------------------------------------------------------
# Killing equations


def killing_system(space: JetSpace) -> JetSystem:
    """``d_j u^i + d_i u^j = 0`` for ``i <= j`` in two dimensions."""
    e = {1: (1, 0), 2: (0, 1)}
    eqs = []
    for i in (1, 2):
        for j in range(i, 3):
            eqs.append(space(i, e[j]) + space(j, e[i]))
    return JetSystem(eqs, space)


def killing_solution_dimension(n: int = 2) -> int:
    """Free jet parameters of the Killing system after one prolongation."""
    if n != 2:
        raise ValueError("only n = 2 is implemented")
    space = JetSpace(2, 2, prefix="u")
    R2 = prolong(killing_system(space), 1)
    G = buchberger(R2.equations, MonomialOrder("degrevlex"), ring=space.ring)
    for name in space.names_of_order(2):
        if not normal_form(space.ring.gen(name), G).is_zero():
            raise RigidityError("killing", f"{name} is not forced to vanish")
    return ideal_dimension(G)
