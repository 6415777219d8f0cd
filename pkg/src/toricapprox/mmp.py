"""Toric minimal model program.

K-negative extremal rays of the Mori cone, contraction classification,
divisorial contractions, Mori fiber quotients, flips (validated by the
pullback identity on a common star subdivision), the a-value step, and the
full chain runner tracking a point's orbit cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from toricapprox.fan import (
    Cone,
    ConeNotInFan,
    Fan,
    build_fan,
    star_subdivision,
)
from toricapprox.lattice import primitive_part, _quotient_by_span
from toricapprox.linalg import nonneg_combination, solve_general, vec_dot
from toricapprox.divisor import (
    TorusDivisor,
    WallCurve,
    _off_ray_index_in_quotient,
    canonical_divisor,
    intersect,
    is_nef,
    ray_divisor,
    support_function,
    wall_curves,
)


class MmpError(ValueError):
    pass


class NotExtremal(MmpError):
    pass


class FlipRequired(MmpError):
    pass


class NotFlip(MmpError):
    pass


class IdentityFailure(MmpError):
    pass


class NoKNegativeRay(MmpError):
    pass


class NonTermination(MmpError):
    pass


class OrbitInExc(MmpError):
    pass


MORI_FIBER = "MoriFiber"
DIVISORIAL = "Divisorial"
FLIP = "Flip"


@dataclass(frozen=True)
class ExtremalRay:
    """An extreme ray of the Mori cone, represented by a wall curve.

    j_minus: ray indices with negative relation coefficient; k_degree: K·C.
    """

    curve: WallCurve
    j_minus: tuple
    k_degree: Fraction

    @property
    def is_k_negative(self) -> bool:
        return self.k_degree < 0


def _normalized_class(rel: tuple) -> tuple:
    return primitive_part(rel)


def mori_extremal_rays(fan: Fan) -> tuple:
    """Extreme rays of the cone spanned by all wall curve classes.

    The numerical class of a wall curve is its ray relation.  A class is
    extremal iff it is not a non-negative combination of the other classes
    (exact rational feasibility test).
    """
    curves = wall_curves(fan)
    k = canonical_divisor(fan)
    by_class = {}
    for c in curves:
        by_class.setdefault(_normalized_class(c.relation), c)
    classes = list(by_class)
    out = []
    for cls in classes:
        others = [c for c in classes if c != cls]
        if others and nonneg_combination(others, cls) is not None:
            continue
        c = by_class[cls]
        out.append(
            ExtremalRay(c, c.negative_rays, intersect(fan, k, c))
        )
    return tuple(out)


def classify_contraction(fan: Fan, ray: ExtremalRay):
    """(kind, exc_cone) of the elementary contraction of a K-negative ray.

    MoriFiber when no relation coefficient is negative (the contraction
    drops dimension and the exceptional locus is all of X, exc_cone = 0);
    Divisorial when exactly one is; Flip otherwise.  exc_cone is spanned by
    the rays with negative coefficient.
    """
    if not ray.is_k_negative:
        raise NotExtremal("contraction classification needs a K-negative ray")
    rays = mori_extremal_rays(fan)
    if _normalized_class(ray.curve.relation) not in {
        _normalized_class(r.curve.relation) for r in rays
    }:
        raise NotExtremal(f"{ray.curve.relation} is not an extremal class")
    exc = tuple(sorted(ray.j_minus))
    if len(exc) == 0:
        return MORI_FIBER, exc
    if len(exc) == 1:
        return DIVISORIAL, exc
    return FLIP, exc


@dataclass(frozen=True)
class ContractionResult:
    """A divisorial or Mori-fiber contraction psi: X -> Y.

    ray_map: X ray index -> Y ray index (None for collapsed rays);
    fiber_fan / fiber_ray_basis are set for Mori fiber steps: the fan of
    the (fake weighted projective space) general fiber on the sublattice
    spanned by the contracted rays, and that sublattice's basis as columns.
    """

    kind: str
    source: Fan
    target: Fan
    ray_map: tuple
    exc_cone: Cone
    fiber_fan: Optional[Fan] = None
    fiber_ray_basis: Optional[tuple] = None
    fiber_rays: Optional[tuple] = None
    quotient_projection: Optional[tuple] = None


def _contract_divisorial(fan: Fan, ray: ExtremalRay) -> ContractionResult:
    e = ray.j_minus[0]
    cls = _normalized_class(ray.curve.relation)
    collapsed_walls = [
        c for c in wall_curves(fan) if _normalized_class(c.relation) == cls
    ]
    # Union-find over maximal cones across walls whose curve is contracted.
    parent = {c: c for c in fan.max_cones}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for w in collapsed_walls:
        a, b = find(w.cone_a), find(w.cone_b)
        if a != b:
            parent[a] = b
    groups = {}
    for c in fan.max_cones:
        groups.setdefault(find(c), set()).update(c)
    new_rays = [v for i, v in enumerate(fan.rays) if i != e]
    ray_map = []
    j = 0
    for i in range(len(fan.rays)):
        ray_map.append(None if i == e else j)
        j += 0 if i == e else 1
    new_cones = set()
    for members in groups.values():
        members.discard(e)
        new_cones.add(tuple(sorted(ray_map[i] for i in members)))
    target = build_fan(fan.rank, new_rays, sorted(new_cones))
    return ContractionResult(
        DIVISORIAL, fan, target, tuple(ray_map), (e,)
    )


def _contract_mori_fiber(fan: Fan, ray: ExtremalRay) -> ContractionResult:
    j_plus = [i for i, b in enumerate(ray.curve.relation) if b > 0]
    gens = [fan.rays[i] for i in j_plus]
    quot = _quotient_by_span(gens, fan.rank)
    ray_map = [None] * len(fan.rays)
    new_rays = []
    seen = {}
    for i, v in enumerate(fan.rays):
        img = quot.apply(v)
        if all(x == 0 for x in img):
            continue
        p = primitive_part(img)
        if p not in seen:
            seen[p] = len(new_rays)
            new_rays.append(p)
        ray_map[i] = seen[p]
    if quot.rank == 0:
        target = build_fan(0, (), ((),))
    else:
        new_cones = set()
        for c in fan.max_cones:
            imgs = tuple(
                sorted({ray_map[i] for i in c if ray_map[i] is not None})
            )
            if len(imgs) == quot.rank:
                new_cones.add(imgs)
        target = build_fan(quot.rank, new_rays, sorted(new_cones))
    # General fiber: the complete fan cut out on the sublattice spanned by
    # the contracted rays; for an extremal contraction it has dim+1 rays.
    fdim = fan.rank - quot.rank
    basis_cols = tuple(zip(*quot.kernel_basis)) if fdim else ()
    fib_rays = []
    for i in j_plus:
        coords = solve_general(basis_cols, fan.rays[i])
        fib_rays.append(tuple(int(x) for x in coords))
    from itertools import combinations

    fiber = build_fan(
        fdim, fib_rays, list(combinations(range(len(j_plus)), fdim))
    )
    return ContractionResult(
        MORI_FIBER,
        fan,
        target,
        tuple(ray_map),
        (),
        fiber_fan=fiber,
        fiber_ray_basis=basis_cols,
        fiber_rays=tuple(j_plus),
        quotient_projection=quot.projection,
    )


def contract(fan: Fan, ray: ExtremalRay) -> ContractionResult:
    kind, _ = classify_contraction(fan, ray)
    if kind == FLIP:
        raise FlipRequired("small contraction: use flip()")
    if kind == DIVISORIAL:
        return _contract_divisorial(fan, ray)
    return _contract_mori_fiber(fan, ray)


def push_divisor(res: ContractionResult, d: TorusDivisor) -> TorusDivisor:
    """Pushforward of a divisor trivial on the contracted ray.

    Defined exactly when d is a pullback, i.e. d·C = 0 on the contracted
    class; the result pulls back to d (asserted).
    """
    fan, target = res.source, res.target
    if res.kind == DIVISORIAL:
        coeffs = [None] * len(target.rays)
        for i, j in enumerate(res.ray_map):
            if j is not None:
                coeffs[j] = d.coeffs[i]
        out = TorusDivisor(tuple(coeffs))
        # Exactness: the target support function must reproduce the
        # collapsed ray's coefficient.
        sf = support_function(target, out)
        e = res.exc_cone[0]
        assert sf(fan.rays[e]) == d.coeffs[e], "divisor is not a pullback"
        return out
    # Mori fiber: coefficients descend along the quotient with the index of
    # each ray image; rays collapsing to 0 must carry coefficient 0.
    coeffs = [None] * len(target.rays)
    for i, v in enumerate(fan.rays):
        img = tuple(vec_dot(row, v) for row in res.quotient_projection)
        j = res.ray_map[i]
        if j is None:
            assert d.coeffs[i] == 0, "divisor is not a pullback"
            continue
        p = primitive_part(img)
        k = next(a for a, x in enumerate(p) if x != 0)
        b = img[k] // p[k]
        val = Fraction(d.coeffs[i]) / b
        assert coeffs[j] is None or coeffs[j] == val, "divisor is not a pullback"
        coeffs[j] = val
    return TorusDivisor(tuple(coeffs))


@dataclass(frozen=True)
class FlipResult:
    """A flip X -> X' with the common star subdivision X*.

    Rays of X' are identical (same table) to X; X* appends the new ray w*.
    """

    source: Fan
    target: Fan
    star: Fan
    new_ray: tuple
    exc_cone: Cone
    flipped_exc_cone: Cone
    contracted_class: tuple
    dstar_multiple: Fraction


def flip(fan: Fan, ray: ExtremalRay) -> FlipResult:
    """The flip of a small K-negative extremal contraction.

    Exchanges the two triangulations of the circuit spanned by the rays of
    the wall relation, subdividing at w* = primitive(sum over negative rays
    of -b_i v_i).  The construction is validated by the pullback identity
    Phi* F = Phi'* F' - (F·C0) D* on the common star subdivision X*, for
    every ray divisor F.
    """
    kind, exc = classify_contraction(fan, ray)
    if kind != FLIP:
        raise NotFlip(f"contraction kind is {kind}")
    rel = ray.curve.relation
    j_minus = list(exc)
    j_plus = [i for i, b in enumerate(rel) if b > 0]
    wsum = tuple(
        sum(-rel[i] * fan.rays[i][r] for i in j_minus) for r in range(fan.rank)
    )
    wstar = primitive_part(wsum)
    k = next(r for r, x in enumerate(wstar) if x != 0)
    g = wsum[k] // wstar[k]
    # D* = (kappa/g)·D_{w*}: the unique rational multiple of the new ray's
    # divisor making the pullback identity exact, where kappa normalizes
    # the wall relation against the actual curve class of the wall.
    kappa = rel[ray.curve.off_a] * _off_ray_index_in_quotient(
        fan, ray.curve.wall, ray.curve.off_a
    )
    # Replace each maximal cone containing the exceptional cone: such a cone
    # is (circuit minus one positive ray) plus link rays; the flipped fan
    # uses (circuit minus one negative ray) plus the same link.
    circuit = set(j_minus) | set(j_plus)
    region = [c for c in fan.max_cones if set(j_minus) <= set(c)]
    if not region:
        raise NotFlip("exceptional cone is not in the fan")
    links = {}
    for c in region:
        link = tuple(sorted(set(c) - circuit))
        links.setdefault(link, []).append(c)
    new_cones = [c for c in fan.max_cones if c not in region]
    for link, cones in links.items():
        expected = {
            tuple(sorted((circuit - {i}) | set(link))) for i in j_plus
        }
        if set(cones) != expected:
            raise NotFlip(
                "circuit is not fully triangulated around the exceptional cone"
            )
        for j in j_minus:
            new_cones.append(tuple(sorted((circuit - {j}) | set(link))))
    target = build_fan(fan.rank, fan.rays, new_cones)
    star_src, _ = star_subdivision(fan, wstar)
    star_tgt, _ = star_subdivision(target, wstar)
    if set(star_src.max_cones) != set(star_tgt.max_cones):
        raise IdentityFailure("X* is not a common star subdivision")
    res = FlipResult(
        source=fan,
        target=target,
        star=star_src,
        new_ray=wstar,
        exc_cone=tuple(exc),
        flipped_exc_cone=tuple(sorted(j_plus)),
        contracted_class=rel,
        dstar_multiple=Fraction(kappa, g),
    )
    _check_flip_identity(res, ray)
    return res


def _check_flip_identity(res: FlipResult, ray: ExtremalRay):
    """Phi* F = Phi'* F' - (F·C0) D* for every ray divisor F.

    Both pullbacks agree on the old rays, so the identity reduces to the
    coefficient at w*: phi_F(w*) = phi'_F(w*) - (F·C0)·dstar_multiple.
    """
    for i in range(len(res.source.rays)):
        f = ray_divisor(res.source, i)
        phi_src = support_function(res.source, f)(res.new_ray)
        phi_tgt = support_function(res.target, f)(res.new_ray)
        deg = intersect(res.source, f, ray.curve)
        if phi_src != phi_tgt - deg * res.dstar_multiple:
            raise IdentityFailure(
                f"pullback identity fails for ray divisor {i}: "
                f"{phi_src} != {phi_tgt} - {deg}·{res.dstar_multiple}"
            )


def step_a(fan: Fan, d: TorusDivisor):
    """The a-value: a = min over K-negative extremal rays of D·C / (-K·C).

    Returns (a, chosen ExtremalRay); D + aK is nef and kills the chosen
    ray.  Ties broken by the deterministic extremal-ray order.
    """
    rays = [r for r in mori_extremal_rays(fan) if r.is_k_negative]
    if not rays:
        raise NoKNegativeRay("no K-negative extremal ray")
    best = None
    chosen = None
    for r in rays:
        val = intersect(fan, d, r.curve) / (-r.k_degree)
        if best is None or val < best:
            best, chosen = val, r
    k = canonical_divisor(fan)
    shifted = d + best * k
    assert intersect(fan, shifted, chosen.curve) == 0
    assert is_nef(fan, shifted)
    return best, chosen


@dataclass(frozen=True)
class MmpStepRecord:
    """One elementary MMP step.

    kind in {MoriFiber, Divisorial, Flip}; a: the a-value; ray: the
    contracted extremal ray; divisor: D on the source; shifted = D + aK;
    result: ContractionResult or FlipResult (None when the step is terminal
    because P lies in the exceptional locus and the chain stops here);
    p_orbit: P's orbit cone on the source; p_in_exc: whether the chain
    terminates at this step.
    """

    kind: str
    a: Fraction
    ray: ExtremalRay
    fan: Fan
    divisor: TorusDivisor
    shifted: TorusDivisor
    exc_cone: Cone
    p_orbit: Cone
    p_in_exc: bool
    result: object = None


@dataclass(frozen=True)
class MmpChain:
    """The sequence of elementary MMP steps of the a-value runner.

    canonically_bounded is propagated metadata: carried across every step
    where P avoids the exceptional locus; never verified arithmetically.
    """

    steps: tuple
    canonically_bounded: bool

    @property
    def terminal_step(self) -> MmpStepRecord:
        return self.steps[-1]


def orbit_in_exc(p_orbit: Cone, exc_cone: Cone) -> bool:
    """P in exc(psi) iff the orbit closure of P lies in V(exc cone),
    i.e. the exceptional cone is a face of P's orbit cone.  The zero
    exceptional cone (Mori fiber step) contains every P."""
    return set(exc_cone) <= set(p_orbit)


def run_mmp_chain(
    fan: Fan,
    d: TorusDivisor,
    p_orbit: Sequence = (),
    canonically_bounded: bool = False,
    max_steps: Optional[int] = None,
) -> MmpChain:
    """Iterate a-value steps until P enters an exceptional locus.

    Each step computes a = min D·C/(-K·C), classifies the chosen ray, and
    either stops (P in exc) or performs the contraction/flip, pushing
    D + aK forward and transporting P's orbit cone (the identity on ray
    sets away from exc).
    """
    p_orbit = tuple(sorted(p_orbit))
    if not fan.has_cone(p_orbit):
        raise ConeNotInFan(f"{p_orbit} is not a cone of the fan")
    assert is_nef(fan, d), "the MMP runner needs a nef divisor"
    budget = max_steps if max_steps is not None else 10 * len(fan.rays)
    steps = []
    cur_fan, cur_d, cur_p = fan, d, p_orbit
    for _ in range(budget):
        a, ray = step_a(cur_fan, cur_d)
        kind, exc = classify_contraction(cur_fan, ray)
        shifted = cur_d + a * canonical_divisor(cur_fan)
        if orbit_in_exc(cur_p, exc):
            steps.append(
                MmpStepRecord(
                    kind, a, ray, cur_fan, cur_d, shifted, exc, cur_p, True
                )
            )
            return MmpChain(tuple(steps), canonically_bounded)
        if kind == FLIP:
            res = flip(cur_fan, ray)
            new_p = cur_p
            if not res.target.has_cone(new_p):
                raise OrbitInExc(
                    f"orbit cone {cur_p} does not survive the flip"
                )
            steps.append(
                MmpStepRecord(
                    kind, a, ray, cur_fan, cur_d, shifted, exc, cur_p, False, res
                )
            )
            cur_fan, cur_d, cur_p = res.target, shifted, new_p
        else:
            res = contract(cur_fan, ray)
            new_p = tuple(sorted(res.ray_map[i] for i in cur_p))
            steps.append(
                MmpStepRecord(
                    kind, a, ray, cur_fan, cur_d, shifted, exc, cur_p, False, res
                )
            )
            cur_fan = res.target
            cur_d = push_divisor(res, shifted)
            cur_p = new_p
    raise NonTermination(f"no terminal step within {budget} steps")


def picard_rank(fan: Fan) -> int:
    return len(fan.rays) - fan.rank
