"""Coordinate computations on weighted projective planes.

Weighted monomial bases, multiplicity and tangent data of curves at the
torus point [1:...:1], order-constrained section spaces, weighted
intersection pairings, a small search for low-alpha curves, and the full
audited report for the plane with weights (4, 7, 13).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Optional, Sequence

import sympy

from toricapprox.approx import (
    INFINITY,
    ApproxError,
    ArithmeticContext,
    BranchData,
    alpha_rational_curve,
    theorem16_driver,
)
from toricapprox.divisor import TorusDivisor
from toricapprox.fan import wps_fan
from toricapprox.linalg import clear_denominators, nullspace


class CaseStudyError(ValueError):
    pass


class NonVanishing(CaseStudyError):
    pass


class UnsupportedBranchType(CaseStudyError):
    pass


class DimensionError(CaseStudyError):
    pass


@dataclass(frozen=True)
class WeightedForm:
    """A weighted-homogeneous form: exponent vectors with exact coefficients.

    Every monomial e satisfies sum(q_i e_i) = degree; coefficients nonzero.
    """

    weights: tuple
    degree: int
    monomials: tuple  # tuple of (exponent tuple, Fraction)

    @staticmethod
    def of(weights: Sequence[int], entries) -> "WeightedForm":
        weights = tuple(int(q) for q in weights)
        monos = []
        degree = None
        items = entries.items() if isinstance(entries, dict) else entries
        for e, c in items:
            c = Fraction(c)
            if c == 0:
                continue
            e = tuple(int(x) for x in e)
            d = sum(q * x for q, x in zip(weights, e))
            if degree is None:
                degree = d
            elif d != degree:
                raise CaseStudyError(
                    f"monomial {e} has weighted degree {d}, expected {degree}"
                )
            monos.append((e, c))
        if degree is None:
            raise CaseStudyError("a form needs at least one monomial")
        return WeightedForm(weights, degree, tuple(monos))

    def value_at_one(self) -> Fraction:
        return sum(c for _, c in self.monomials)

    def to_sympy(self, symbols):
        return sympy.Add(
            *(
                sympy.Rational(c.numerator, c.denominator)
                * sympy.Mul(*(s**k for s, k in zip(symbols, e)))
                for e, c in self.monomials
            )
        )


@dataclass(frozen=True)
class TangentReport:
    """Multiplicity and tangent data of a curve at [1:...:1].

    tangent_form: coefficients (degree m down to 0 in the first slice
    variable) of the binary tangent form on the slice transverse to the
    Euler direction; splitting: squarefree integer d for the field
    Q(sqrt(d)) when m = 2 with irrational tangents, None otherwise;
    rational_tangents: all tangent directions rational; distinct: the
    tangent form is squarefree.
    """

    multiplicity: int
    tangent_form: tuple
    splitting: Optional[int]
    rational_tangents: bool
    distinct: bool


def monomial_basis(q: Sequence[int], d: int) -> tuple:
    """Exponent vectors of the weighted-degree-d monomials.

    Ordered by total degree descending, then lexicographically descending —
    the order in which degree-56 sections on weights (4,7,13) are
    conventionally written (x^14, x^9yz, x^7y^4, ...).
    """
    q = tuple(int(x) for x in q)
    out = []

    def rec(i, rem, prefix):
        if i == len(q) - 1:
            if rem % q[i] == 0:
                out.append(prefix + (rem // q[i],))
            return
        for e in range(rem // q[i] + 1):
            rec(i + 1, rem - e * q[i], prefix + (e,))

    if d >= 0:
        rec(0, d, ())
    out.sort(key=lambda e: (-sum(e),) + tuple(-x for x in e))
    return tuple(out)


def _squarefree_part(n: int) -> int:
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    for p, k in sympy.factorint(n).items():
        if k % 2:
            out *= p
    return sign * out


def mult_and_tangent_at_one(f: WeightedForm) -> TangentReport:
    """Multiplicity and tangent form of {f = 0} at the point [1:...:1].

    Computed on the affine cone: shift to (1,...,1) and restrict to the
    slice transverse to the Euler direction (q_0,...,q_n) — the cone's
    one-parameter-orbit direction, tangent to the hypersurface — by
    eliminating the first shifted variable.  The lowest-degree form of the
    restriction is the tangent cone of the curve germ.
    """
    if f.value_at_one() != 0:
        raise NonVanishing("the form does not vanish at [1:...:1]")
    n = len(f.weights)
    us = sympy.symbols(f"u0:{n}")
    xs = [1 + u for u in us]
    shifted = sympy.expand(
        sympy.Add(
            *(
                sympy.Rational(c.numerator, c.denominator)
                * sympy.Mul(*(x**k for x, k in zip(xs, e)))
                for e, c in f.monomials
            )
        )
    )
    # Eliminate u0 along the Euler direction: u0 = -(q_1 u_1 + ...)/q_0.
    sub = -sympy.Add(
        *(sympy.Rational(f.weights[i], f.weights[0]) * us[i] for i in range(1, n))
    )
    g = sympy.expand(shifted.subs(us[0], sub))
    gp = sympy.Poly(g, *us[1:])
    if gp.is_zero:
        raise UnsupportedBranchType(
            "the form vanishes identically on the transverse slice"
        )
    m = min(sum(mon) for mon in gp.monoms())
    lowest = sympy.Add(
        *(
            coef * sympy.Mul(*(s**k for s, k in zip(us[1:], mon)))
            for mon, coef in zip(gp.monoms(), gp.coeffs())
            if sum(mon) == m
        )
    )
    if n != 3:
        return TangentReport(m, (), None, m == 1, True)
    s, t = us[1], us[2]
    low = sympy.Poly(lowest, s, t)
    coeffs = tuple(
        Fraction(int(sympy.numer(low.coeff_monomial(s ** (m - i) * t**i))),
                 int(sympy.denom(low.coeff_monomial(s ** (m - i) * t**i))))
        for i in range(m + 1)
    )
    if m == 1:
        return TangentReport(1, coeffs, None, True, True)
    grad_gcd = sympy.gcd(sympy.gcd(lowest, sympy.diff(lowest, s)),
                         sympy.diff(lowest, t))
    distinct = sympy.total_degree(grad_gcd) == 0
    if not distinct:
        raise UnsupportedBranchType(
            "repeated tangent directions: not an ordinary multiple point"
        )
    if m == 2:
        a, b, c = coeffs
        disc = b * b - 4 * a * c
        num = disc.numerator * disc.denominator  # same squarefree part
        root = sympy.sqrt(num)
        if root.is_integer:
            return TangentReport(2, coeffs, None, True, True)
        return TangentReport(2, coeffs, _squarefree_part(num), False, True)
    # m >= 3 with distinct tangents: rationality decided by rational roots.
    poly1 = sympy.Poly(lowest.subs(t, 1), s)
    nroots = len(poly1.ground_roots())
    all_rational = nroots + (1 if coeffs[0] == 0 else 0) == m
    return TangentReport(m, coeffs, None, all_rational, True)


def sections_vanishing_to_order(q: Sequence[int], d: int, s: int) -> tuple:
    """Basis of weighted-degree-d forms vanishing to order >= s at [1:...:1].

    Exact kernel of the jet map: all partial derivatives of order < s
    evaluated at (1,...,1).  Vectors are integral, primitive, with the
    first nonzero entry positive, in the monomial_basis order.
    """
    basis = monomial_basis(q, d)
    if not basis:
        return ()
    n = len(q)
    conds = []
    from itertools import product

    for beta in product(range(s), repeat=n):
        if sum(beta) >= s:
            continue
        row = []
        for e in basis:
            val = 1
            for ei, bi in zip(e, beta):
                for j in range(bi):
                    val *= ei - j
            row.append(Fraction(val))
        conds.append(tuple(row))
    if not conds:
        kern = tuple(
            tuple(Fraction(1 if i == j else 0) for i in range(len(basis)))
            for j in range(len(basis))
        )
    else:
        kern = nullspace(conds)
    out = []
    for v in kern:
        w = clear_denominators(v)
        lead = next(x for x in w if x != 0)
        if lead < 0:
            w = tuple(-x for x in w)
        out.append(w)
    return tuple(out)


def weighted_pairing(q: Sequence[int], a, b) -> Fraction:
    """Intersection of O(a) and O(b) on the weighted projective plane."""
    if len(q) != 3:
        raise DimensionError("the pairing is defined on planes only")
    if a < 0 or b < 0:
        raise CaseStudyError("degrees must be non-negative")
    return Fraction(a) * Fraction(b) / prod(q)


def blowup_selfintersection(q: Sequence[int], a, b) -> Fraction:
    """Self-intersection of a·pi*O(1) - b·E after blowing up a smooth point."""
    if len(q) != 3:
        raise DimensionError("defined on planes only")
    return Fraction(a) ** 2 / prod(q) - Fraction(b) ** 2


def _branches_for(report: TangentReport, context: ArithmeticContext):
    """Branch data of an ordinary multiple point from its tangent splitting.

    Returns (BranchData, note).  None when the arithmetic cannot be decided
    from the declared context.
    """
    m = report.multiplicity
    if m == 1:
        return BranchData.of([(1, 1)]), "unibranch rational point"
    if report.rational_tangents:
        return (
            BranchData.of([(1, 1)] * m),
            f"{m} rational branches",
        )
    if m == 2 and report.splitting is not None:
        try:
            in_k, in_kv = context.lookup(report.splitting)
        except ApproxError:
            return None, f"field Q(sqrt({report.splitting})) not declared"
        if in_k:
            return BranchData.of([(1, 1), (1, 1)]), "branch points rational in k"
        if in_kv:
            return (
                BranchData.of([(1, 2), (1, 2)]),
                f"conjugate branches over Q(sqrt({report.splitting})) in k_v",
            )
        return (
            BranchData.of([(1, 0), (1, 0)]),
            f"branch field Q(sqrt({report.splitting})) outside k_v",
        )
    return None, "branch fields beyond declared quadratics"


@dataclass(frozen=True)
class Candidate:
    form: WeightedForm
    degree: int
    multiplicity: int
    splitting: Optional[int]
    alpha: object  # Fraction, INFINITY, or None when undecidable
    conditional: bool
    note: str


def _is_irreducible(f: WeightedForm) -> bool:
    xs = sympy.symbols("x y z")[: len(f.weights)]
    poly = f.to_sympy(xs)
    _, factors = sympy.factor_list(poly)
    nontrivial = [p for p, k in factors for _ in range(k)]
    return len(nontrivial) == 1 and not any(
        sympy.simplify(nontrivial[0] - v) == 0 for v in xs
    )


def curve_alpha_search(
    q: Sequence[int], degree_cap: int, context: ArithmeticContext
) -> tuple:
    """Ranked candidates for low-alpha curves through [1:1:1].

    For every degree up to the cap: curves with multiplicity >= 2 at the
    point come from the exact kernel of the order-2 jet map; multiplicity-1
    curves contribute alpha = degree, represented by the simplest
    irreducible form through the point.  alpha is measured against
    O(q_0 q_1 q_2), so a degree-d curve has D-degree d.  Candidates whose
    tangent fields are not declared in the context are ranked by the
    optimistic value d/2 and flagged conditional.
    """
    if len(q) != 3:
        raise DimensionError("the search runs on planes only")
    q = tuple(int(x) for x in q)
    big = prod(q)
    cands = []
    for d in range(1, degree_cap + 1):
        basis = monomial_basis(q, d)
        if len(basis) < 2:
            continue
        seen_singular = False
        for vec in sections_vanishing_to_order(q, d, 2):
            form = WeightedForm.of(q, list(zip(basis, vec)))
            if not _is_irreducible(form):
                continue
            try:
                rep = mult_and_tangent_at_one(form)
            except UnsupportedBranchType:
                continue
            branches, note = _branches_for(rep, context)
            deg = weighted_pairing(q, d, big)
            if branches is None:
                alpha, cond = deg / 2, True
            else:
                alpha, cond = alpha_rational_curve(deg, branches), False
            cands.append(
                Candidate(form, d, rep.multiplicity, rep.splitting, alpha, cond, note)
            )
            seen_singular = True
        if not seen_singular:
            # A smooth-at-P representative: the simplest irreducible binomial.
            rep_form = None
            for i in range(len(basis)):
                for j in range(i + 1, len(basis)):
                    form = WeightedForm.of(
                        q, [(basis[i], 1), (basis[j], -1)]
                    )
                    if _is_irreducible(form):
                        rep_form = form
                        break
                if rep_form:
                    break
            if rep_form is None:
                continue
            rep = mult_and_tangent_at_one(rep_form)
            if rep.multiplicity != 1:
                continue
            deg = weighted_pairing(q, d, big)
            cands.append(
                Candidate(
                    rep_form, d, 1, None, alpha_rational_curve(deg, BranchData.of([(1, 1)])),
                    False, "unibranch rational point",
                )
            )

    def key(c: Candidate):
        val = c.alpha
        rank = (2,) if val is INFINITY else (0 if not c.conditional else 1, val)
        return rank + (c.degree,)

    return tuple(sorted(cands, key=key))


@dataclass(frozen=True)
class CaseStudyReport:
    """The audited chain of results on the plane with weights (4, 7, 13)."""

    driver_degree: Fraction
    driver_alpha: object
    x5_eq_yz_alpha: Fraction
    cprime_degree: int
    cprime_multiplicity: int
    cprime_splitting: int
    cprime_alpha: object
    cprime_alpha_note: str
    h0_dimension: int
    order3_section: tuple
    order3_unique: bool
    order3_multiplicity: int
    blowup_square: Fraction
    cdoubleprime_alpha_lower: Fraction
    lower_bound: Fraction
    lower_bound_note: str
    verdict: str
    assumptions: tuple


CPRIME = WeightedForm.of(
    (4, 7, 13),
    {(8, 1, 0): 1, (1, 5, 0): 1, (3, 2, 1): -3, (0, 0, 3): 1},
)

X5_EQ_YZ = WeightedForm.of((4, 7, 13), {(5, 0, 0): 1, (0, 1, 1): -1})


def casestudy_p4713(context: ArithmeticContext) -> CaseStudyReport:
    """The full audited report for P(4,7,13), D ~ O(364), P = [1:1:1]."""
    q = (4, 7, 13)
    fan = wps_fan(q)
    d364 = TorusDivisor.of([91, 0, 0])  # O(364): 364/4 on the weight-4 ray
    driver = theorem16_driver(
        fan, d364, (), context, assume_canonically_bounded=True
    )
    # The smooth curve x^5 = yz.
    rep20 = mult_and_tangent_at_one(X5_EQ_YZ)
    assert rep20.multiplicity == 1
    alpha20 = alpha_rational_curve(
        weighted_pairing(q, 20, 364), BranchData.of([(1, 1)])
    )
    # The double point curve of degree 39.
    rep39 = mult_and_tangent_at_one(CPRIME)
    assert rep39.multiplicity == 2 and rep39.distinct
    branches, note = _branches_for(rep39, context)
    deg39 = weighted_pairing(q, 39, 364)
    alpha39 = None if branches is None else alpha_rational_curve(deg39, branches)
    # Sections of O(56) and the unique order-3 section.
    basis56 = monomial_basis(q, 56)
    sections = sections_vanishing_to_order(q, 56, 3)
    unique = len(sections) == 1
    g = WeightedForm.of(q, list(zip(basis56, sections[0])))
    rep_g = mult_and_tangent_at_one(g)
    # alpha(C'') >= 56/2: every branch has r·m <= 2 for the declared data.
    alpha_g_lower = weighted_pairing(q, 56, 364) / 2
    square = blowup_selfintersection(q, 2 * 364, 39)
    in_k, in_kv = context.lookup(-3)
    if in_kv and not in_k:
        verdict = (
            "best approximation: the degree-39 double-point curve achieves "
            "alpha = 39/2, matched by the lower bound off its base locus"
        )
    elif in_k:
        verdict = (
            "verdict withheld: sqrt(-3) in k gives the curve alpha = 39; "
            "outside the stated hypothesis"
        )
    else:
        verdict = (
            "the degree-39 curve contributes alpha = infinity at this "
            "place; remaining candidates are the degree-20 and driver curves"
        )
    return CaseStudyReport(
        driver_degree=driver.degree,
        driver_alpha=driver.alpha,
        x5_eq_yz_alpha=alpha20,
        cprime_degree=39,
        cprime_multiplicity=rep39.multiplicity,
        cprime_splitting=rep39.splitting,
        cprime_alpha=alpha39 if alpha39 is not None else INFINITY,
        cprime_alpha_note=note,
        h0_dimension=len(basis56),
        order3_section=sections[0] if sections else (),
        order3_unique=unique,
        order3_multiplicity=rep_g.multiplicity,
        blowup_square=square,
        cdoubleprime_alpha_lower=alpha_g_lower,
        lower_bound=Fraction(39, 2),
        lower_bound_note=(
            "off the base locus, contained in 13 times the order-3 "
            "section's curve, approximation is bounded below by 39/2; the "
            "order-3 curve itself has alpha >= 28"
        ),
        verdict=verdict,
        assumptions=driver.assumptions
        + (
            "canonical boundedness assumed for the dense-sequence comparison",
            "branch bound r·m <= 2 for the order-3 section's curve",
        ),
    )
