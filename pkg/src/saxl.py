"""
The Saxl graph of PSU(3,q) on Baer subplanes.

Vertices are the members of Omega, edges the base pairs. This module finds the
M-orbits (suborbits) on Omega, classifies their point stabilizers against the
known subgroup catalogue, and certifies that any two vertices have a common
neighbour, both by search and by the tau_y(w0) construction.
"""
import logging
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CensusError, CheckFailure, GeometryError, GroupError
from .geometry import (
    GRAM_ANTIDIAG, SHAPE_A4_PROFILE, SHAPE_EMPTY, SHAPE_ONE_ISOTROPIC, SHAPE_THREE_NONISOTROPIC,
    BaerSubplane, IntersectionProfile, intersect_subplanes, mat_mul, orthogonal_frames, vec_mat,
)
from .group import (
    ActionCtx, GroupElement, IDENTITY9, batch_normalize, closure, orbit_size,
    stabilizer_order, transport_pair,
)
from .involutions import frame_commutation_check, tau_matrices
from .models import CheckResult
from .parallel import ordered_map

logger = logging.getLogger('baersaxl.saxl')

# Point-stabilizer classes, in table order
K_DIHEDRAL_PLUS = 'D2(q+1)'
K_DIHEDRAL_MINUS = 'D2(q-1)'
K_KLEIN_A = 'D4A'
K_KLEIN_B = 'D4B'
K_BOREL = 'Zp^m:Z2'
K_INVOLUTION_A = 'Z2A'
K_INVOLUTION_B = 'Z2B'
K_ALTERNATING = 'A4'
REGULAR = 'regular'

CLASS_TAGS = (K_DIHEDRAL_PLUS, K_DIHEDRAL_MINUS, K_KLEIN_A, K_KLEIN_B,
              K_BOREL, K_INVOLUTION_A, K_INVOLUTION_B, K_ALTERNATING)

# Classes fused under conjugation in the whole group
FUSED_CLASSES = ((0,), (1,), (2, 3), (4,), (5, 6), (7,))

# Rows of Omega handled per numpy batch in adjacency scans
SCAN_CHUNK = 8192


# -- base pairs ---------------------------------------------------------------------

def is_base_pair(w1: BaerSubplane, w2: BaerSubplane) -> bool:
    """True when the intersection is empty or a single isotropic point."""
    profile = intersect_subplanes(w1, w2)
    return profile.shape in (SHAPE_EMPTY, SHAPE_ONE_ISOTROPIC)


def _base_rows(geom, mask: np.ndarray, rows: np.ndarray) -> np.ndarray:
    shared = mask[rows]
    noniso = (shared & geom.nonisotropic[rows]).any(axis=1)
    iso = (shared & geom.isotropic[rows]).sum(axis=1)
    return ~noniso & (iso <= 1)


def base_pair_mask(action: ActionCtx, i: int, candidates: Optional[np.ndarray] = None) -> np.ndarray:
    """For each candidate index j, whether {Omega[i], Omega[j]} is a base pair."""
    geom = action.geom
    cand = np.arange(action.size) if candidates is None else np.asarray(candidates, dtype=np.int64)
    mask = np.zeros(geom.num_points, dtype=bool)
    mask[action.points[i]] = True
    out = np.empty(len(cand), dtype=bool)
    for start in range(0, len(cand), SCAN_CHUNK):
        sel = cand[start:start + SCAN_CHUNK]
        out[start:start + len(sel)] = _base_rows(geom, mask, action.points[sel])
    out[cand == i] = False
    return out


def shared_nonisotropic(action: ActionCtx, i: int, j: int) -> int:
    geom = action.geom
    common = np.intersect1d(action.points[i], action.points[j], assume_unique=True)
    return int(geom.nonisotropic[common].sum())


def stabilizer_oracle(action: ActionCtx, i: int, j: int) -> bool:
    """
    True when G_{Omega[i]} and G_{Omega[j]} meet trivially, found by moving
    Omega[i] to w0 and filtering M for elements that also fix the image of Omega[j].
    """
    if i == j:
        raise GeometryError("the oracle needs two distinct subplanes")
    t_inv = action.element(i).inverse()
    image = action.geom.transform(action.points[j], t_inv.matrix)
    k = int(action.lookup(np.sort(image)))
    return len(action.stabilizer_within(k)) == 1


def oracle_agreement(action: ActionCtx, trials: int, seed: int) -> CheckResult:
    """Compare the geometric base-pair test with the stabilizer oracle on random pairs."""
    check = CheckResult('base-pair-oracle')
    rng = np.random.default_rng(seed)
    base_pairs = 0
    for _ in range(trials):
        i, j = (int(x) for x in rng.integers(action.size, size=2))
        while j == i:
            j = int(rng.integers(action.size))
        geometric = bool(base_pair_mask(action, i, np.array([j]))[0])
        oracle = stabilizer_oracle(action, i, j)
        base_pairs += geometric
        check.record(geometric == oracle, i=i, j=j, geometric=geometric, oracle=oracle)
    check.note = f"{base_pairs} base pairs among {trials} random pairs"
    logger.info("oracle agreement: %d/%d", check.checked - check.violation_count, check.checked)
    return check


# -- M-orbits -----------------------------------------------------------------------

class MOrbits:
    """The partition of Omega into orbits of M, each labelled by its least index."""

    def __init__(self, labels: np.ndarray):
        self.labels = labels
        self.reps, self.sizes = np.unique(labels, return_counts=True)
        self._size = dict(zip(self.reps.tolist(), self.sizes.tolist()))

    def size_of(self, rep: int) -> int:
        return self._size[rep]

    def members(self, rep: int) -> np.ndarray:
        return np.flatnonzero(self.labels == rep)

    def __len__(self):
        return len(self.reps)


def m_orbits(action: ActionCtx) -> MOrbits:
    """Weakly connected components of the graph i -> i.g over the generators of M."""
    n = action.size
    base = np.arange(n)
    rows, cols = [], []
    for perm in action.stab_gen_perms:
        rows.append(base)
        cols.append(action.image_indices(base, perm))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)).tocsr()
    count, comp = connected_components(graph, directed=True, connection='weak')
    least = np.full(count, n, dtype=np.int64)
    np.minimum.at(least, comp, base)
    orbits = MOrbits(least[comp])
    logger.info("M has %d orbits on Omega", count)
    return orbits


# -- subgroups of M ---------------------------------------------------------------------

def normalizer_positions(action: ActionCtx, positions: np.ndarray) -> np.ndarray:
    """Positions in stab of N_M(K) for K given by its positions in stab."""
    F = action.field
    positions = np.asarray(positions)
    K = action.stab[positions]
    conj = mat_mul(F, mat_mul(F, action.stab_inverse[:, None], K[None]), action.stab[:, None])
    pos = action.stab_position(batch_normalize(F, conj)).reshape(len(action.stab), len(positions))
    return np.flatnonzero(np.isin(pos, positions).all(axis=1))


def generators_of(elements: Sequence[GroupElement]) -> List[GroupElement]:
    """A small generating set of the subgroup generated by the given elements."""
    chosen: List[GroupElement] = []
    members = {IDENTITY9}
    for el in elements:
        if el.mat in members:
            continue
        chosen.append(el)
        members = {e.mat for e in closure(chosen)}
    return chosen


def fixed_count(action: ActionCtx, elements: Sequence[GroupElement]) -> int:
    """Fix(K) on Omega for the subgroup K formed by the given elements."""
    remaining = np.arange(action.size)
    for g in generators_of(elements):
        perm = action.geom.point_perm(g.matrix)
        remaining = remaining[action.fixed_mask(perm, remaining)]
    return len(remaining)


def _elements(action: ActionCtx, positions) -> List[GroupElement]:
    return [action.stab_element(int(k)) for k in positions]


def classify_stabilizer(q: int, order: int, involutions: int, normalizer: int) -> str:
    """Class tag of a point stabilizer from its order, involution count and |N_M(K)|."""
    eps = 1 if q % 4 == 1 else -1
    if order == 1:
        return REGULAR
    if order == 2 and involutions == 1:
        if normalizer == 2 * (q - eps):
            return K_INVOLUTION_A
        if normalizer == 2 * (q + eps):
            return K_INVOLUTION_B
    if order == 4 and involutions == 3:
        if normalizer == 24:
            return K_KLEIN_A
        if normalizer == 8:
            return K_KLEIN_B
    if order == 2 * (q + 1) and involutions == q + 2:
        return K_DIHEDRAL_PLUS
    if order == 2 * (q - 1) and involutions == q:
        return K_DIHEDRAL_MINUS
    if order == 2 * q and involutions == q:
        return K_BOREL
    if order == 12 and involutions == 3 and normalizer == 24:
        return K_ALTERNATING
    raise CensusError(f"unclassified stabilizer: order {order}, {involutions} involutions, "
                      f"normalizer order {normalizer}")


# -- closed forms -------------------------------------------------------------------------

def _d(q: int) -> int:
    return 3 if (q + 1) % 3 == 0 else 1


def _int(value: Fraction, what: str) -> int:
    if value.denominator != 1:
        raise CensusError(f"{what} is not an integer: {value}")
    return int(value)


class TableRow:
    """One row of the suborbit table for a given q."""

    def __init__(self, index: int, tag: str, normalizer_m: int, normalizer_t: int, k: int, x: int,
                 x_listed: Optional[int] = None):
        self.index = index
        self.tag = tag
        self.normalizer_m = normalizer_m
        self.normalizer_t = normalizer_t
        self.k = k
        self.x = x
        # closed form as published, differs from x in the Z2A/Z2B rows when 4 | q-1
        self.x_listed = x if x_listed is None else x_listed

    def to_dict(self) -> Dict:
        return {'i': self.index, 'class': self.tag, 'normalizer_m': self.normalizer_m,
                'normalizer_t': self.normalizer_t, 'k': self.k, 'x': self.x,
                'x_listed': self.x_listed}

    def __repr__(self):
        return f"TableRow({self.index}, {self.tag}, k={self.k}, x={self.x})"


def table_one(q: int) -> List[TableRow]:
    """Nonregular suborbits predicted for q, from the block matching (d, q mod 4)."""
    d = _d(q)
    eps = 1 if q % 4 == 1 else -1
    Q = Fraction(q)
    x12 = (Q + 1) / d - 1
    if d == 1:
        x3, x4, x8 = (Q * Q - Q) / 6, (Q * Q - Q) / 2, Fraction(0)
    else:
        x3, x4, x8 = (Q + 1) * (Q - 2) / 18, (Q * Q - Q + 4) / 6, Fraction(1)
    if (d, eps) == (1, 1):
        x6 = (Q ** 3 + 6 * Q ** 2 - 3 * Q - 4) / (4 * (Q - 1))
        x7 = (3 * Q ** 3 - 15 * Q - 12) / (4 * (Q + 1))
    elif (d, eps) == (3, 1):
        x6 = (Q ** 3 + 6 * Q ** 2 - 7 * Q) / (12 * (Q - 1))
        x7 = (Q ** 3 - 9 * Q - 8) / (4 * (Q + 1))
    elif (d, eps) == (1, -1):
        x6 = (Q ** 3 - 3 * Q - 2) / (2 * (Q + 1))
        x7 = (Q ** 3 + 2 * Q ** 2 - 5 * Q + 2) / (2 * (Q - 1))
    else:
        x6 = (Q ** 3 - 3 * Q - 2) / (6 * (Q + 1))
        x7 = (Q ** 3 + 2 * Q ** 2 - 13 * Q + 10) / (6 * (Q - 1))
    listed = [x12, x12, x3, x4, Fraction(2), x6, x7, x8]
    ks = [(Q + 1) / d, (Q + 1) / d, (Q + 1) ** 2 / d, (Q + 1) ** 2 / d, Q,
          Q * Q * (Q + 1) / d, Q * Q * (Q + 1) / d, Fraction(d)]
    xs = list(listed)
    if eps == 1:
        xs[5] = involution_a_count(q, ks[5], xs)
        xs[6] = x6 + x7 - xs[5]
    nm = [2 * (q + 1), 2 * (q - 1), 24, 8, q * (q - 1), 2 * (q - eps), 2 * (q + eps), 24]
    nt = [2 * (Q + 1) ** 2 / d, 2 * (Q * Q - 1) / d, 6 * (Q + 1) ** 2 / d, 6 * (Q + 1) ** 2 / d,
          Q * Q * (Q - 1), Q * (Q * Q - 1) * (Q + 1) / d, Q * (Q * Q - 1) * (Q + 1) / d,
          Fraction(24 * d)]
    return [TableRow(i + 1, tag, nm[i], _int(nt[i], f"|N_T(K{i + 1})|"),
                     _int(ks[i], f"k{i + 1}"), _int(xs[i], f"x{i + 1}"),
                     _int(listed[i], f"listed x{i + 1}"))
            for i, tag in enumerate(CLASS_TAGS)]


def involution_a_count(q: int, k6: Fraction, xs: Sequence[Fraction]) -> Fraction:
    """
    x6 when 4 | q-1, from counting the k6 fixed points of a Z2A involution by suborbit.

    A suborbit with stabilizer K holds |t^M cap K| |C_M(t)| / |K| fixed points
    of t, with |C_M(t)| = 2(q-1). Every involution of D2(q-1), D4A, Zp^m:Z2 and
    A4 is of type A, none of D2(q+1) and one of the three in D4B. Each Z2A
    suborbit holds q-1 and w0 holds one.
    """
    h = Fraction(q - 1, 2)
    fixed_elsewhere = (1 + q * xs[1] + 3 * h * xs[2] + h * xs[3]
                       + (q - 1) * xs[4] + h * xs[7])
    return (k6 - fixed_elsewhere) / (q - 1)


def class_orders(q: int) -> Dict[str, int]:
    """|K_i| for every class."""
    sizes = (2 * (q + 1), 2 * (q - 1), 4, 4, 2 * q, 2, 2, 12)
    return dict(zip(CLASS_TAGS, sizes))


def manning_prediction(q: int) -> Dict[str, Fraction]:
    """Fix(K_i) as the sum of |N_T(K_j)| / |N_M(K_j)| over the classes fused with K_i."""
    rows = table_one(q)
    out = {}
    for fused in FUSED_CLASSES:
        value = sum((Fraction(rows[j].normalizer_t, rows[j].normalizer_m) for j in fused), Fraction(0))
        for j in fused:
            out[rows[j].tag] = value
    return out


def gamma_r_closed_form(q: int) -> int:
    d = _d(q)
    Q = Fraction(q)
    value = (Q ** 5 / (3 * d) - Q ** 4 / (3 * d) + Fraction(2, 3) * Q ** 3
             + Q ** 2 / (3 * d) - Fraction(10 - d, 9) * Q)
    return _int(value, "|Gamma_r|")


def gamma_r_lower_bound(q: int) -> Fraction:
    return Fraction(q ** 5 - q ** 4, 3 * _d(q))


# -- census ---------------------------------------------------------------------------------

class SuborbitRecord:
    """One nontrivial M-orbit with its point stabilizer K = M cap M_beta."""

    def __init__(self, rep: int, stabilizer: np.ndarray, tag: str, length: int,
                 involutions: int, normalizer_order: int, profile: IntersectionProfile):
        self.rep = rep
        self.stabilizer = stabilizer
        self.stabilizer_order = len(stabilizer)
        self.tag = tag
        self.length = length
        self.involutions = involutions
        self.normalizer_order = normalizer_order
        self.profile = profile
        self.shared_nonisotropic = profile.nonisotropic_count
        self.fix: Optional[int] = None

    @property
    def regular(self) -> bool:
        return self.tag == REGULAR

    def to_dict(self) -> Dict:
        return {'rep': self.rep, 'class': self.tag, 'order': self.stabilizer_order,
                'length': self.length, 'involutions': self.involutions,
                'normalizer': self.normalizer_order, 'fix': self.fix,
                'intersection': self.profile.to_dict()}

    def __repr__(self):
        return f"SuborbitRecord(rep={self.rep}, {self.tag}, length={self.length})"


class Census:
    """The suborbit census of (PSU(3,q), M) with its comparison against the table."""

    def __init__(self, action: ActionCtx, orbits: MOrbits, records: List[SuborbitRecord]):
        self.action = action
        self.orbits = orbits
        self.records = records
        self.q = action.q
        self.d = action.d
        self.table = table_one(self.q)
        self.by_rep = {r.rep: r for r in records}
        self.x_vector = {tag: 0 for tag in CLASS_TAGS}
        for r in records:
            if not r.regular:
                self.x_vector[r.tag] += 1
        self.regular_reps = [r.rep for r in records if r.regular]
        self.gamma_r = sum(r.length for r in records if r.regular)
        self.fix_counts: Dict[str, int] = {}
        self.extra_fix: Dict[str, int] = {}
        self.checks: List[CheckResult] = []

    def tag_of(self, index) -> np.ndarray:
        """Class tag of the M-orbit containing each index ('' for w0 itself)."""
        labels = self.orbits.labels[np.atleast_1d(index)]
        return np.array([self.by_rep[int(l)].tag if l else '' for l in labels], dtype=object)

    def representative(self, tag: str) -> Optional[SuborbitRecord]:
        for r in self.records:
            if r.tag == tag:
                return r
        return None

    def regular_mask(self) -> np.ndarray:
        return np.isin(self.orbits.labels, self.regular_reps)

    def x_tuple(self) -> Tuple[int, ...]:
        return tuple(self.x_vector[t] for t in CLASS_TAGS)

    def to_dict(self) -> Dict:
        action = self.action
        suborbits = []
        for tag in CLASS_TAGS + (REGULAR,):
            members = [r for r in self.records if r.tag == tag]
            if not members:
                continue
            suborbits.append({'class': tag, 'order': members[0].stabilizer_order,
                              'length': members[0].length, 'fix': self.fix_counts.get(tag),
                              'count': len(members),
                              'shapes': sorted({r.profile.shape for r in members})})
        return {
            'q': self.q, 'p': action.field.p, 'm': action.field.m, 'd': self.d,
            'gram': action.geom.gram_kind, 'omega_size': action.size,
            'stabilizer_order': len(action.stab),
            'suborbit_count': len(self.orbits) - 1,
            'suborbits': suborbits,
            'x_vector': list(self.x_tuple()),
            'table': [row.to_dict() for row in self.table],
            'fix_counts': dict(self.fix_counts),
            'extra_fix': dict(self.extra_fix),
            'gamma_r': self.gamma_r,
            'gamma_r_closed_form': gamma_r_closed_form(self.q),
            'base_size': 2 if self.gamma_r else None,
        }


def _analyse_rep(action: ActionCtx, orbits: MOrbits, rep: int) -> SuborbitRecord:
    stab = action.stabilizer_within(rep)
    involutions = int(action.stab_involutions[stab].sum())
    normalizer = len(normalizer_positions(action, stab)) if len(stab) > 1 else len(action.stab)
    tag = classify_stabilizer(action.q, len(stab), involutions, normalizer)
    return SuborbitRecord(rep, stab, tag, orbits.size_of(rep), involutions, normalizer,
                          suborbit_profile(action, rep, tag))


def suborbit_profile(action: ActionCtx, rep: int, tag: str) -> IntersectionProfile:
    """w0 cap Omega[rep], with the A4 triangle told apart from other three-point meets."""
    common = np.intersect1d(action.points[0], action.points[rep], assume_unique=True)
    profile = IntersectionProfile(action.geom, common)
    if tag == K_ALTERNATING and profile.shape == SHAPE_THREE_NONISOTROPIC:
        profile.shape = SHAPE_A4_PROFILE
    return profile


def suborbit_census(action: ActionCtx, jobs: int = 1) -> Census:
    """Partition Omega into M-orbits, classify every point stabilizer and check the table."""
    started = time.monotonic()
    orbits = m_orbits(action)
    reps = [int(r) for r in orbits.reps if r != 0]
    records = ordered_map(lambda rep: _analyse_rep(action, orbits, rep), reps, jobs, label='suborbits')
    census = Census(action, orbits, records)

    for tag in CLASS_TAGS:
        rec = census.representative(tag)
        if rec is not None:
            rec.fix = fixed_count(action, _elements(action, rec.stabilizer))
            census.fix_counts[tag] = rec.fix

    census.checks.append(_check_lengths(census))
    census.checks.append(_check_table(census))
    census.checks.append(_check_table_listed(census))
    census.extra_fix = extra_fix_values(census)
    if K_ALTERNATING not in census.fix_counts and 'A4' in census.extra_fix:
        census.fix_counts[K_ALTERNATING] = census.extra_fix['A4']
    census.checks.append(_check_fix(census))
    census.checks.append(_check_gamma_r(census))
    census.checks.append(_check_shared_involutions(census))
    logger.info("census: %d suborbits, |Gamma_r| = %d (%.1fs)",
                len(records), census.gamma_r, time.monotonic() - started)
    return census


def _check_lengths(census: Census) -> CheckResult:
    check = CheckResult('suborbit-lengths')
    q = census.q
    order_m = len(census.action.stab)
    check.record(order_m == stabilizer_order(q), stabilizer=order_m, expected=stabilizer_order(q))
    for r in census.records:
        check.record(r.length * r.stabilizer_order == order_m, rep=r.rep,
                     length=r.length, order=r.stabilizer_order)
    total = 1 + sum(r.length for r in census.records)
    check.record(total == census.action.size == orbit_size(q), total=total, omega=orbit_size(q))
    return check


def _check_table(census: Census) -> CheckResult:
    """Enumerated x-vector against the table block; mismatches are reported per class."""
    check = CheckResult('table-one-x', note=f"block d={census.d}, q={census.q % 4} mod 4")
    for row in census.table:
        got = census.x_vector[row.tag]
        check.record(got == row.x, **{'class': row.tag, 'enumerated': got, 'table': row.x})
    return check


def _check_table_listed(census: Census) -> CheckResult:
    """The published x column; the Z2A/Z2B rows disagree with enumeration when 4 | q-1."""
    check = CheckResult('table-one-x-listed', asserted=False,
                        note=f"block d={census.d}, q={census.q % 4} mod 4")
    for row in census.table:
        got = census.x_vector[row.tag]
        check.record(got == row.x_listed,
                     **{'class': row.tag, 'enumerated': got, 'listed': row.x_listed})
    return check


def _check_fix(census: Census) -> CheckResult:
    check = CheckResult('table-one-k')
    manning = manning_prediction(census.q)
    for row in census.table:
        got = census.fix_counts.get(row.tag)
        if got is None:
            continue
        check.record(got == row.k and manning[row.tag] == row.k,
                     **{'class': row.tag, 'enumerated': got, 'table': row.k,
                        'manning': str(manning[row.tag])})
    return check


def _check_gamma_r(census: Census) -> CheckResult:
    check = CheckResult('gamma-r')
    action = census.action
    q = census.q
    order_m = stabilizer_order(q)
    orders = class_orders(q)
    from_table = action.size - 1 - sum(row.x * (order_m // orders[row.tag]) for row in census.table)
    closed = gamma_r_closed_form(q)
    check.record(census.gamma_r == closed == from_table,
                 enumerated=census.gamma_r, closed_form=closed, table=from_table)
    check.record(census.gamma_r >= gamma_r_lower_bound(q), enumerated=census.gamma_r,
                 bound=str(gamma_r_lower_bound(q)))
    geometric = base_pair_mask(action, 0)
    check.record(np.array_equal(geometric, census.regular_mask()),
                 geometric=int(geometric.sum()), regular=census.gamma_r)
    return check


def _check_shared_involutions(census: Census) -> CheckResult:
    """|I cap I'| equals the shared nonisotropic points and is at most q+2."""
    check = CheckResult('shared-involutions')
    for r in census.records:
        check.record(r.involutions == r.shared_nonisotropic and r.involutions <= census.q + 2,
                     rep=r.rep, involutions=r.involutions, shared=r.shared_nonisotropic)
    return check


# -- extra fixed-point checks ----------------------------------------------------------

def _element_orders(elements: Sequence[GroupElement], cap: int) -> List[int]:
    return [e.order(cap=cap) for e in elements]


def extra_fix_values(census: Census) -> Dict[str, int]:
    """
    Fix counts of subgroups beyond the census classes: the rotation subgroups of
    the dihedral classes, the Sylow p-subgroup P of the Borel class and a
    subgroup P1 of order p, S4 = N_M(D4A) and an A4 inside it.
    """
    action = census.action
    q, d, p = census.q, census.d, action.field.p
    cap = 2 * (q + 1)
    out: Dict[str, int] = {}

    for tag, n, name in ((K_DIHEDRAL_PLUS, q + 1, 'L(q+1)'), (K_DIHEDRAL_MINUS, q - 1, 'L(q-1)')):
        rec = census.representative(tag)
        if rec is None:
            continue
        elements = _elements(action, rec.stabilizer)
        orders = _element_orders(elements, cap)
        rotation = elements[orders.index(n)]
        out[name] = fixed_count(action, [rotation])

    rec = census.representative(K_BOREL)
    if rec is not None:
        elements = _elements(action, rec.stabilizer)
        orders = _element_orders(elements, cap)
        sylow = [e for e, o in zip(elements, orders) if o in (1, p)]
        out['P'] = fixed_count(action, sylow)
        out['P1'] = fixed_count(action, [e for e, o in zip(elements, orders) if o == p][:1])

    rec = census.representative(K_KLEIN_A)
    if rec is not None:
        s4_pos = normalizer_positions(action, rec.stabilizer)
        s4 = _elements(action, s4_pos)
        out['S4'] = fixed_count(action, s4)
        orders = _element_orders(s4, cap)
        three = s4[orders.index(3)]
        a4 = closure(_elements(action, rec.stabilizer) + [three], limit=12)
        if len(a4) != 12:
            raise CensusError(f"D4A with an element of order 3 generates {len(a4)} elements, expected 12")
        out['A4'] = fixed_count(action, a4)
    return out


def extra_fix_expected(q: int) -> Dict[str, int]:
    d = _d(q)
    return {'L(q+1)': (q + 1) // d, 'L(q-1)': (q + 1) // d, 'P': q, 'P1': q, 'S4': 1, 'A4': d}


def check_extra_fix(census: Census) -> CheckResult:
    check = CheckResult('extra-fix')
    expected = extra_fix_expected(census.q)
    for name, value in sorted(census.extra_fix.items()):
        check.record(value == expected[name], subgroup=name, enumerated=value, expected=expected[name])
    return check


def frame_property(census: Census, max_reps: Optional[int] = None) -> CheckResult:
    """For every rep, each frame of w0 missing Omega[rep] commutes with an involution of its stabilizer."""
    check = CheckResult('frame-commutation')
    frames = orthogonal_frames(census.action.base)
    reps = [r.rep for r in census.records][:max_reps]
    for rep in reps:
        result = frame_commutation_check(census.action, rep, frames)
        check.record(result.ok, rep=rep, frames=result.checked, failures=result.failures[:3])
    return check


# -- regular neighbourhoods -----------------------------------------------------------------

def regular_neighborhood(action: ActionCtx, alpha: int = 0) -> np.ndarray:
    """Gamma_r(alpha) as a boolean mask over Omega."""
    return base_pair_mask(action, alpha)


def regular_count(action: ActionCtx, alpha: int = 0) -> int:
    return int(regular_neighborhood(action, alpha).sum())


def equivariance_check(action: ActionCtx, samples: int, seed: int) -> CheckResult:
    """Gamma_r(w0)^T_i = Gamma_r(Omega[i]) for random transversal elements."""
    check = CheckResult('gamma-r-equivariance')
    rng = np.random.default_rng(seed)
    gamma0 = np.flatnonzero(regular_neighborhood(action, 0))
    for i in rng.integers(1, action.size, size=samples).tolist():
        perm = action.geom.point_perm(action.transversal[i])
        image = np.sort(action.image_indices(gamma0, perm))
        direct = np.flatnonzero(regular_neighborhood(action, i))
        check.record(np.array_equal(image, direct), index=i)
    return check


# -- BG verification --------------------------------------------------------------------

class BgVerdict:
    def __init__(self, rep: int, witness: Optional[int], scanned: int):
        self.rep = rep
        self.witness = witness
        self.scanned = scanned

    @property
    def ok(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> Dict:
        return {'rep': self.rep, 'witness': self.witness, 'scanned': self.scanned}


class BgReport:
    """Common regular neighbours of w0 and every suborbit representative."""

    def __init__(self, action: ActionCtx, verdicts: List[BgVerdict], gamma_r: int, seconds: float):
        self.q = action.q
        self.d = action.d
        self.gram = action.geom.gram_kind
        self.verdicts = verdicts
        self.gamma_r = gamma_r
        self.seconds = seconds

    @property
    def verified(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def check(self) -> CheckResult:
        check = CheckResult('bg-common-neighbor')
        for v in self.verdicts:
            check.record(v.ok, rep=v.rep, scanned=v.scanned)
        return check

    def to_dict(self) -> Dict:
        return {'q': self.q, 'd': self.d, 'gram': self.gram, 'gamma_r': self.gamma_r,
                'verified': self.verified,
                'witnesses': [v.to_dict() for v in self.verdicts]}


def common_regular_neighbor(action: ActionCtx, gamma_alpha: np.ndarray, beta: int) -> BgVerdict:
    """First member of Gamma_r(alpha) (given as indices) adjacent to beta, scanned lazily."""
    for start in range(0, len(gamma_alpha), SCAN_CHUNK):
        sel = gamma_alpha[start:start + SCAN_CHUNK]
        hits = base_pair_mask(action, beta, sel)
        if hits.any():
            k = int(np.argmax(hits))
            return BgVerdict(beta, int(sel[k]), start + k + 1)
    return BgVerdict(beta, None, len(gamma_alpha))


def verify_bg(action: ActionCtx, orbits: Optional[MOrbits] = None, jobs: int = 1,
              max_reps: Optional[int] = None) -> BgReport:
    """Every rep beta (and beta = alpha) shares a regular neighbour with alpha = w0."""
    started = time.monotonic()
    orbits = orbits or m_orbits(action)
    gamma_alpha = np.flatnonzero(regular_neighborhood(action, 0))
    reps = [int(r) for r in orbits.reps][:max_reps]
    verdicts = ordered_map(lambda rep: common_regular_neighbor(action, gamma_alpha, rep),
                           reps, jobs, label='bg')
    report = BgReport(action, verdicts, len(gamma_alpha), time.monotonic() - started)
    failed = [v.rep for v in verdicts if not v.ok]
    if failed:
        logger.error("no common regular neighbour for reps %s", failed[:10])
    else:
        logger.info("BG verified for %d representatives", len(verdicts))
    return report


# -- constructive common neighbour ----------------------------------------------------------

class ConstructiveWitness:
    """A common neighbour tau_y(w0)^(g^-1) found by scanning y = e2 + x e1, x in Delta."""

    def __init__(self, pair: Tuple[int, int], index: int, x: int, trials: int,
                 delta_size: int, successes: Optional[int], lambda0: int):
        self.pair = pair
        self.index = index
        self.x = x
        self.trials = trials
        self.delta_size = delta_size
        self.successes = successes
        self.lambda0 = lambda0

    def to_dict(self) -> Dict:
        return {'pair': list(self.pair), 'witness': self.index, 'x': self.x,
                'trials': self.trials, 'delta': self.delta_size,
                'successes': self.successes, 'lambda0': self.lambda0}


def _delta(F, lambda0: int) -> List[int]:
    """F_{q^2} minus (F_q union lambda0/2 + F_q), in code order."""
    half = F.py_mul[lambda0][F.py_inv[2]]
    excluded = set(F.subfield_codes.tolist())
    excluded.update(F.py_add[half][c] for c in F.subfield_codes.tolist())
    return [x for x in range(F.order) if x not in excluded]


def constructive_common_neighbor(action: ActionCtx, i1: int, i2: int,
                                 count_all: bool = False) -> ConstructiveWitness:
    """
    Move (Omega[i1], P) to (w0, <e1>) for an isotropic P of Omega[i1] off
    Omega[i2], then try tau_y(w0) for y = e2 + x e1 with x in Delta. The first
    candidate forming a base pair with the image of Omega[i2] is moved back.
    """
    geom = action.geom
    F = action.field
    if geom.gram_kind != GRAM_ANTIDIAG:
        raise GroupError("the constructive finder needs the anti-diagonal Gram model")
    if i1 == i2:
        raise GeometryError("the constructive finder needs two distinct subplanes")

    pts1 = action.points[i1].astype(np.int64)
    mask2 = np.zeros(geom.num_points, dtype=bool)
    mask2[action.points[i2]] = True
    outside = pts1[geom.isotropic[pts1] & ~mask2[pts1]]
    if not len(outside):
        raise GroupError("no isotropic point of the first subplane avoids the second")
    g = transport_pair(action, i1, geom.point_at(int(outside[0])))

    other = geom.transform(action.points[i2], g.matrix)
    on_line = other[geom.points[other][:, 2] == 0]
    if len(on_line) != 1:
        raise GroupError(f"the image meets e1-perp in {len(on_line)} points, expected 1")
    v = geom.points[on_line[0]]
    lambda0 = 0 if v[0] == 0 else F.py_inv[int(v[1])]
    delta = _delta(F, lambda0)

    w0_pts = action.base.points.astype(np.int64)
    ys = np.zeros((len(delta), 3), dtype=np.int64)
    ys[:, 0] = delta
    ys[:, 1] = 1
    taus = tau_matrices(geom, ys)
    images = geom.index_of(vec_mat(F, geom.points[w0_pts][None, :, :], taus[:, None, :, :]))
    other_mask = np.zeros(geom.num_points, dtype=bool)
    other_mask[other] = True
    ok = _base_rows(geom, other_mask, images) & _base_rows(geom, action.base.mask, images)
    hits = np.flatnonzero(ok)
    if not len(hits):
        raise CheckFailure('constructive-witness',
                           f"no tau_y(w0) with y in Lambda is a base partner of both ({i1}, {i2})",
                           {'pair': [i1, i2], 'delta': len(delta)})
    first = int(hits[0])
    back = geom.transform(images[first], g.inverse().matrix)
    index = int(action.lookup(np.sort(back)))
    return ConstructiveWitness((i1, i2), index, delta[first], first + 1, len(delta),
                               len(hits) if count_all else None, int(lambda0))


def construct_for_reps(census: Census, jobs: int = 1,
                       max_reps: Optional[int] = None) -> Tuple[List[ConstructiveWitness], CheckResult]:
    """Run the constructive finder on (w0, rep) for every rep and cross-check each witness."""
    action = census.action
    reps = [r.rep for r in census.records][:max_reps]
    witnesses = ordered_map(lambda rep: constructive_common_neighbor(action, 0, rep, count_all=True),
                            reps, jobs, label='construct')
    check = CheckResult('constructive-witness')
    q = census.q
    for w in witnesses:
        both = base_pair_mask(action, w.index, np.array(w.pair))
        eps = 0 if action.field.in_subfield_code(w.lambda0) else 1
        check.record(bool(both.all()) and w.delta_size == q * q - (1 + eps) * q,
                     pair=list(w.pair), witness=w.index, delta=w.delta_size)
    return witnesses, check


def census_checks(census: Census, max_reps: Optional[int] = None) -> List[CheckResult]:
    """Every census-level check, including the ones computed after classification."""
    return census.checks + [check_extra_fix(census), frame_property(census, max_reps)]
