"""Exact rational linear algebra helpers.

Everything here works on plain tuples/lists of ints or Fractions.  Matrices
are sequences of rows.  These routines back the lattice and fan modules; they
are deliberately small-scale (ranks up to ~6, a few dozen constraints) and
favour clarity over asymptotics.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Sequence

Vec = tuple
Mat = tuple


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(c, a):
    return tuple(c * x for x in a)


def vec_dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def mat_vec(m: Sequence, v: Sequence):
    return tuple(vec_dot(row, v) for row in m)


def mat_mul(a: Sequence, b: Sequence):
    bt = list(zip(*b))
    return tuple(tuple(vec_dot(row, col) for col in bt) for row in a)


def mat_transpose(m: Sequence):
    return tuple(zip(*m))


def identity(n: int):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def det(m: Sequence) -> Fraction:
    """Determinant by fraction-free-ish Gaussian elimination, exact."""
    n = len(m)
    if n == 0:
        return Fraction(1)
    a = [[Fraction(x) for x in row] for row in m]
    sign = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    d = Fraction(sign)
    for i in range(n):
        d *= a[i][i]
    return d


def rank(m: Sequence) -> int:
    rows = [[Fraction(x) for x in row] for row in m]
    cols = len(rows[0]) if rows else 0
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / rows[r][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def solve_square(a: Sequence, b: Sequence):
    """Solve a·x = b for square nonsingular a; returns None if singular."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def solve_general(a: Sequence, b: Sequence):
    """One rational solution of a·x = b (possibly under/overdetermined).

    Returns None when inconsistent.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    aug = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    pivots = []
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    for i in range(r, rows):
        if aug[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, col in enumerate(pivots):
        x[col] = aug[i][cols]
    return tuple(x)


def nullspace(a: Sequence):
    """Basis of the rational kernel of a (list of Fraction tuples)."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    m = [[Fraction(x) for x in row] for row in a]
    pivots = []
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(tuple(v))
    return basis


def clear_denominators(v: Sequence[Fraction]) -> tuple:
    """Scale a rational vector to a primitive integer vector (same direction)."""
    from math import lcm

    denoms = [Fraction(x).denominator for x in v]
    mult = 1
    for d in denoms:
        mult = lcm(mult, d)
    ints = [int(Fraction(x) * mult) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def nonneg_combination(columns: Sequence, target: Sequence):
    """Exact feasibility of  sum_j x_j col_j = target,  x_j >= 0.

    Phase-1 simplex with Bland's rule over Fractions.  Returns a tuple of
    coefficients if feasible, else None.
    """
    m = len(target)
    n = len(columns)
    # Orient rows so all right-hand sides are >= 0.
    a = [[Fraction(columns[j][i]) for j in range(n)] for i in range(m)]
    b = [Fraction(t) for t in target]
    for i in range(m):
        if b[i] < 0:
            a[i] = [-x for x in a[i]]
            b[i] = -b[i]
    # Tableau with artificial variables; minimize their sum.
    # Columns: n structural + m artificial.
    tab = [a[i] + [Fraction(1) if k == i else Fraction(0) for k in range(m)] + [b[i]]
           for i in range(m)]
    basis = [n + i for i in range(m)]
    # Objective row for sum of artificials (reduced costs).
    obj = [Fraction(0)] * (n + m) + [Fraction(0)]
    for i in range(m):
        for j in range(n + m + 1):
            obj[j] -= tab[i][j]
    for j in range(n, n + m):
        obj[j] += Fraction(1)
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return None  # unbounded; cannot happen for a feasibility phase
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, tab[leave] + [])]
        basis[leave] = enter
    total = sum(tab[i][-1] for i in range(m) if basis[i] >= n)
    if total != 0:
        return None
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i][-1]
    return tuple(x)


def cone_extreme_rays(inequalities: Sequence, equalities: Sequence, dim: int):
    """Extreme rays of {x : A_ineq x >= 0, A_eq x = 0} for a pointed cone.

    Enumerates candidate rays as kernels of (dim-1)-subsets of the active
    constraint set; adequate for the handful of constraints fan validation
    needs.  Returns primitive integer generators, deduplicated.
    """
    cons = [tuple(row) for row in inequalities]
    eqs = [tuple(row) for row in equalities]
    found = {}
    n_eq = len(eqs)
    need = dim - 1 - rank(eqs) if eqs else dim - 1
    if need < 0:
        need = 0
    for subset in combinations(range(len(cons)), need):
        system = eqs + [cons[i] for i in subset]
        kern = nullspace(system) if system else [tuple(Fraction(1) if i == j else Fraction(0) for j in range(dim)) for i in range(dim)]
        if len(kern) != 1:
            continue
        v = clear_denominators(kern[0])
        for cand in (v, tuple(-x for x in v)):
            if all(vec_dot(row, cand) >= 0 for row in cons) and all(
                vec_dot(row, cand) == 0 for row in eqs
            ):
                found[cand] = True
    return list(found.keys())
