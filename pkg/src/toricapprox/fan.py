"""Complete simplicial rational fans.

Validation, cone multiplicities, terminality, star fans (orbit closures),
star subdivisions, and recognition of fake weighted projective spaces.

A cone is a sorted tuple of ray indices into the fan's ray table.  Fans are
immutable after construction; every query is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import gcd, prod
from typing import Optional, Sequence

from toricapprox.lattice import (
    QuotientMap,
    is_primitive,
    primitive_part,
    quotient_lattice,
    smith_normal_form,
    sublattice_index,
)
from toricapprox.linalg import (
    clear_denominators,
    cone_extreme_rays,
    det,
    mat_vec,
    nullspace,
    solve_general,
    solve_square,
)

Cone = tuple


class FanError(ValueError):
    pass


class NotSimplicial(FanError):
    pass


class NotComplete(FanError):
    pass


class NotAFan(FanError):
    pass


class BadWeights(FanError):
    pass


class ConeNotInFan(FanError):
    pass


class RayNotInSupport(FanError):
    pass


class RayAlreadyPresent(FanError):
    pass


class NotFwps(FanError):
    pass


@dataclass(frozen=True)
class Fan:
    """A complete simplicial rational fan on Z^rank.

    rays: tuple of primitive integer vectors; max_cones: tuple of sorted
    ray-index tuples, each of length rank; walls: tuple of
    (wall_rays, cone_a, cone_b) with cone_a < cone_b, lexicographic order.
    """

    rank: int
    rays: tuple
    max_cones: tuple
    walls: tuple

    def ray_matrix(self, cone: Cone) -> tuple:
        """Matrix whose columns are the cone's ray generators."""
        return tuple(
            tuple(self.rays[i][r] for i in cone) for r in range(self.rank)
        )

    def cone_coefficients(self, cone: Cone, point: Sequence) -> Optional[tuple]:
        """Barycentric coefficients of point in the cone, or None.

        Returns the unique rationals lam with point = sum lam_i v_i when the
        point lies in the rational span of the cone's rays (all lam_i >= 0
        iff the point is in the cone); None if the point is off the span.
        """
        if not cone:
            return () if all(x == 0 for x in point) else None
        a = self.ray_matrix(cone)
        return solve_general(a, point)

    def contains(self, cone: Cone, point: Sequence) -> bool:
        lam = self.cone_coefficients(cone, point)
        return lam is not None and all(x >= 0 for x in lam)

    def cone_containing(self, point: Sequence) -> Optional[Cone]:
        """Some maximal cone containing the point (first in stored order)."""
        for c in self.max_cones:
            if self.contains(c, point):
                return c
        return None

    def has_cone(self, cone: Cone) -> bool:
        """Whether the sorted index tuple is a face of some maximal cone."""
        s = set(cone)
        return any(s <= set(c) for c in self.max_cones)

    def ray_index(self, v: Sequence) -> Optional[int]:
        v = tuple(v)
        for i, r in enumerate(self.rays):
            if r == v:
                return i
        return None


def _validate_pairwise_faces(rank, rays, max_cones):
    """Any two maximal cones must intersect in the cone of their common rays."""

    def ineq_rows(cone):
        # x in cone  <=>  M^{-1} x >= 0 where M has the rays as columns.
        m = tuple(tuple(rays[i][r] for i in cone) for r in range(rank))
        rows = []
        for k in range(rank):
            e = [Fraction(0)] * rank
            e[k] = Fraction(1)
            # row k of M^{-1}: solve M^T y = e_k
            y = solve_square(tuple(zip(*m)), e)
            rows.append(clear_denominators(y))
        return rows

    cached = {c: ineq_rows(c) for c in max_cones}
    for a, b in combinations(max_cones, 2):
        common = sorted(set(a) & set(b))
        extreme = cone_extreme_rays(cached[a] + cached[b], [], rank)
        expected = {primitive_part(rays[i]) for i in common}
        if {tuple(v) for v in extreme} != expected:
            raise NotAFan(
                f"cones {a} and {b} do not intersect in a common face"
            )


def build_fan(rank: int, rays: Sequence, max_cones: Sequence) -> Fan:
    """Validate and construct a complete simplicial fan.

    Ray vectors are replaced by their primitive parts.  Rejects
    non-simplicial cones (NotSimplicial), missing support (NotComplete),
    and overlapping or face-incompatible cones (NotAFan).
    """
    if rank == 0:
        return Fan(0, (), ((),), ())
    prim = tuple(primitive_part(v) for v in rays)
    if len(set(prim)) != len(prim):
        raise NotAFan("duplicate rays")
    cones = tuple(tuple(sorted(c)) for c in max_cones)
    if len(set(cones)) != len(cones):
        raise NotAFan("duplicate maximal cones")
    for c in cones:
        if len(c) != rank:
            raise NotSimplicial(
                f"maximal cone {c} does not have {rank} rays"
            )
        if any(i < 0 or i >= len(prim) for i in c):
            raise NotAFan(f"cone {c} references a missing ray")
        m = tuple(tuple(prim[i][r] for i in c) for r in range(rank))
        if det(m) == 0:
            raise NotSimplicial(f"rays of cone {c} are dependent")
    used = {i for c in cones for i in c}
    if used != set(range(len(prim))):
        raise NotAFan("unused rays in ray table")

    # Wall regularity: every (rank-1)-face of a maximal cone must be shared
    # by exactly two maximal cones — the combinatorial shadow of completeness.
    incidence = {}
    for c in cones:
        for w in combinations(c, rank - 1):
            incidence.setdefault(w, []).append(c)
    walls = []
    for w in sorted(incidence):
        owners = incidence[w]
        if len(owners) == 1:
            raise NotComplete(f"wall {w} lies on only one maximal cone")
        if len(owners) > 2:
            raise NotAFan(f"wall {w} lies on {len(owners)} maximal cones")
        a, b = sorted(owners)
        walls.append((w, a, b))

    _validate_pairwise_faces(rank, prim, cones)

    fan = Fan(rank, prim, cones, tuple(walls))
    # Probe completeness directly on a deterministic grid of directions.
    for probe in product((-1, 0, 1), repeat=rank):
        if any(probe) and fan.cone_containing(probe) is None:
            raise NotComplete(f"direction {probe} is not covered")
    return fan


def wps_fan(weights: Sequence[int]) -> Fan:
    """Fan of the weighted projective space P(q_0, ..., q_n).

    Built as the image of the standard basis of Z^(n+1) under the quotient
    by Z·q, canonicalized via Smith normal form so identical weights always
    give the identical fan.  Requires positive well-formed weights: every
    n-subset coprime (otherwise some ray image fails to be primitive and
    the defining relation breaks).
    """
    q = tuple(int(w) for w in weights)
    n = len(q) - 1
    if n < 1 or any(w <= 0 for w in q):
        raise BadWeights(f"weights must be positive, got {q}")
    g = 0
    for w in q:
        g = gcd(g, w)
    if g != 1:
        raise BadWeights(f"weights {q} are not coprime")
    for i in range(n + 1):
        rest = q[:i] + q[i + 1:]
        gg = 0
        for w in rest:
            gg = gcd(gg, w)
        if gg != 1:
            raise BadWeights(
                f"weights {q} are not well-formed (subset {rest} shares a factor)"
            )
    quot = quotient_lattice([q], n + 1)
    rays = []
    for i in range(n + 1):
        e = [0] * (n + 1)
        e[i] = 1
        rays.append(quot.apply(e))
    cones = list(combinations(range(n + 1), n))
    fan = build_fan(n, rays, cones)
    assert all(
        sum(q[i] * fan.rays[i][r] for i in range(n + 1)) == 0 for r in range(n)
    )
    return fan


@lru_cache(maxsize=None)
def cone_multiplicity(fan: Fan, cone: Cone) -> int:
    """Index of the cone's ray lattice inside the saturation of its span.

    Equals 1 exactly when the corresponding chart is smooth.
    """
    cone = tuple(sorted(cone))
    if not fan.has_cone(cone):
        raise ConeNotInFan(f"{cone} is not a cone of the fan")
    if not cone:
        return 1
    diag, _, _ = smith_normal_form([fan.rays[i] for i in cone])
    return prod(d for d in diag if d != 0)


def _cone_interior_points(fan: Fan, cone: Cone):
    """Nonzero lattice points of conv({0} union rays) besides the rays.

    Enumerates the finite group N / (ray lattice) via Smith normal form and
    tests each nonzero class through its fractional barycentric coordinates:
    a class with coordinate sum <= 1 is such a point.
    """
    n = fan.rank
    cols = fan.ray_matrix(cone)
    diag, u, _ = smith_normal_form(cols)
    m = prod(diag)
    found = []
    if m == 1:
        return found
    # Solve u·x = y for each group representative y with y_i in [0, d_i).
    uinv_cols = [solve_square(u, [1 if r == j else 0 for r in range(n)])
                 for j in range(n)]
    for y in product(*(range(d) for d in diag)):
        if not any(y):
            continue
        x = tuple(
            int(sum(uinv_cols[j][r] * y[j] for j in range(n))) for r in range(n)
        )
        lam = solve_square(cols, x)
        t = tuple(c - (c.numerator // c.denominator) for c in lam)  # frac part
        if any(t) and sum(t) <= 1:
            lifted = tuple(
                sum(t[j] * cols[r][j] for j in range(n)) for r in range(n)
            )
            found.append(tuple(int(c) for c in lifted))
    return found


@lru_cache(maxsize=None)
def is_terminal(fan: Fan):
    """Terminality of the toric variety: no lattice points in any maximal
    cone's simplex conv({0} union rays) beyond 0 and the rays.

    Returns (bool, tuple of offending maximal cones).
    """
    bad = []
    for c in fan.max_cones:
        if _cone_interior_points(fan, c):
            bad.append(c)
    return (not bad, tuple(bad))


@dataclass(frozen=True)
class StarFanResult:
    """The fan of a torus-orbit closure V(tau) with transport bookkeeping.

    fan: the quotient fan; tau: the cone quotiented out; quotient: the
    lattice projection; ray_map: original ray index -> quotient ray index;
    b: original index -> positive integer with image(v_i) = b_i * new ray;
    mult: original index -> multiplicity of the cone tau + <v_i>.
    """

    fan: Fan
    tau: Cone
    quotient: QuotientMap
    ray_map: dict
    b: dict
    mult: dict


def star_fan(fan: Fan, tau: Cone) -> StarFanResult:
    """Fan of the orbit closure V(tau): quotient the star of tau by span(tau)."""
    return _star_fan_cached(fan, tuple(sorted(tau)))


@lru_cache(maxsize=None)
def _star_fan_cached(fan: Fan, tau: Cone) -> StarFanResult:
    if not fan.has_cone(tau):
        raise ConeNotInFan(f"{tau} is not a cone of the fan")
    if not tau:
        quot = quotient_lattice([], fan.rank)
        ray_map = {i: i for i in range(len(fan.rays))}
        ones = {i: 1 for i in range(len(fan.rays))}
        return StarFanResult(fan, (), quot, ray_map, ones, dict(ones))
    quot = quotient_lattice([fan.rays[i] for i in tau], fan.rank)
    star_cones = [c for c in fan.max_cones if set(tau) <= set(c)]
    star_rays = sorted({i for c in star_cones for i in c} - set(tau))
    ray_map = {}
    b = {}
    mult = {}
    new_rays = []
    for i in star_rays:
        img = quot.apply(fan.rays[i])
        p = primitive_part(img)
        # img = b_i * p with b_i a positive integer
        k = next(j for j, x in enumerate(p) if x != 0)
        b[i] = img[k] // p[k]
        ray_map[i] = len(new_rays)
        new_rays.append(p)
        mult[i] = cone_multiplicity(fan, tuple(sorted(tau + (i,))))
    new_cones = [
        tuple(sorted(ray_map[i] for i in c if i not in tau)) for c in star_cones
    ]
    qfan = build_fan(fan.rank - len(tau), new_rays, new_cones)
    return StarFanResult(qfan, tau, quot, ray_map, b, mult)


def star_subdivision(fan: Fan, new_ray: Sequence[int]):
    """Subdivide every cone containing new_ray at that ray.

    Returns (Fan, replaced) where replaced maps each subdivided maximal cone
    to the tuple of cones replacing it (indices in the new fan's ray table,
    which is the old table with new_ray appended).
    """
    v = primitive_part(new_ray)
    if v in fan.rays:
        raise RayAlreadyPresent(f"{v} is already a ray of the fan")
    new_index = len(fan.rays)
    replaced = {}
    new_cones = []
    for c in fan.max_cones:
        lam = fan.cone_coefficients(c, v)
        if lam is None or any(x < 0 for x in lam):
            new_cones.append(c)
            continue
        pieces = []
        for pos, i in enumerate(c):
            if lam[pos] > 0:
                pieces.append(
                    tuple(sorted([j for j in c if j != i] + [new_index]))
                )
        replaced[c] = tuple(pieces)
        new_cones.extend(pieces)
    if not replaced:
        raise RayNotInSupport(f"{v} lies outside the fan's support")
    out = build_fan(fan.rank, fan.rays + (v,), new_cones)
    return out, replaced


@dataclass(frozen=True)
class FwpsData:
    """A fake weighted projective space: fan with rank+1 rays.

    weights: the unique positive coprime relation sum a_i v_i = 0, in ray
    order; cover_index: index of the ray-generated sublattice N' in N;
    cover_fan: the same rays in coordinates on N' (a genuine weighted
    projective space fan); cover_to_ambient / ambient_to_cover: the lattice
    maps (integer, resp. rational, matrices acting on column vectors);
    group_factors: invariant factors of N/N' (the covering group).
    """

    fan: Fan
    weights: tuple
    cover_index: int
    cover_fan: Fan
    cover_to_ambient: tuple
    ambient_to_cover: tuple
    group_factors: tuple


@lru_cache(maxsize=None)
def recognize_fwps(fan: Fan) -> FwpsData:
    """Decide whether the fan is a fake weighted projective space.

    Succeeds iff the fan is complete simplicial (guaranteed at build) with
    exactly rank+1 rays; returns the weights, the covering index, and the
    universal cover fan on the sublattice generated by the rays.
    """
    n = fan.rank
    if len(fan.rays) != n + 1:
        raise NotFwps(
            f"fan has {len(fan.rays)} rays, a rank-{n} fwps needs {n + 1}"
        )
    cols = tuple(tuple(fan.rays[i][r] for i in range(n + 1)) for r in range(n))
    kern = nullspace(cols)
    if len(kern) != 1:
        raise NotFwps("rays admit more than one relation")
    rel = clear_denominators(kern[0])
    if all(x < 0 for x in rel):
        rel = tuple(-x for x in rel)
    if not all(x > 0 for x in rel):
        raise NotFwps(f"ray relation {rel} is not positive")
    diag, u, _ = smith_normal_form(cols)
    index = prod(diag)
    # Basis of the ray-generated sublattice N' as columns: B = u^{-1}·diag(d).
    uinv_cols = [solve_square(u, [1 if r == j else 0 for r in range(n)])
                 for j in range(n)]
    basis_cols = [
        tuple(int(uinv_cols[j][r] * diag[j]) for r in range(n)) for j in range(n)
    ]
    cover_to_ambient = tuple(
        tuple(basis_cols[j][r] for j in range(n)) for r in range(n)
    )
    ambient_to_cover = tuple(
        tuple(Fraction(u[j][r], diag[j]) for r in range(n)) for j in range(n)
    )
    cover_rays = [
        tuple(int(x) for x in mat_vec(ambient_to_cover, v)) for v in fan.rays
    ]
    cover = build_fan(n, cover_rays, fan.max_cones)
    assert cover.rays == tuple(tuple(r) for r in cover_rays), (
        "cover rays must already be primitive"
    )
    assert sublattice_index(cover.rays, n) == 1
    return FwpsData(
        fan=fan,
        weights=rel,
        cover_index=index,
        cover_fan=cover,
        cover_to_ambient=cover_to_ambient,
        ambient_to_cover=ambient_to_cover,
        group_factors=tuple(d for d in diag if d > 1),
    )


def projective_space_fan(n: int) -> Fan:
    """The fan of P^n: standard basis rays plus their negative sum."""
    rays = [tuple(1 if r == i else 0 for r in range(n)) for i in range(n)]
    rays.append(tuple(-1 for _ in range(n)))
    return build_fan(n, rays, list(combinations(range(n + 1), n)))


def is_projective_space(fan: Fan) -> bool:
    """Lattice-isomorphic to P^n: n+1 rays, all charts smooth, index 1."""
    if len(fan.rays) != fan.rank + 1:
        return False
    try:
        data = recognize_fwps(fan)
    except NotFwps:
        return False
    return (
        data.cover_index == 1
        and all(w == 1 for w in data.weights)
        and all(cone_multiplicity(fan, c) == 1 for c in fan.max_cones)
    )


def fans_isomorphic_p1(fan: Fan) -> bool:
    """Rank-1 completeness check helper: the unique complete rank-1 fan."""
    return fan.rank == 1 and set(fan.rays) == {(1,), (-1,)}
