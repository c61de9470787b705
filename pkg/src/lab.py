"""
Counting laboratory for common neighbours.

For w0 and a second subplane w' this enumerates the involution pairs
(t, t') with t in M and t' in M', the subplanes W containing such a pair,
the triples E = {(t, M_i, t')} and the split of |E| - |W| into the parts
B, C and D by intersection type. The closed-form bounds for those parts are
evaluated exactly beside the enumerated values.
"""
import logging
from collections import Counter
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from sympy import isprime, primefactors

from .errors import LabError
from .group import IDENTITY9, ActionCtx
from .involutions import (
    PRODUCT_P, PRODUCT_Q_MINUS, PRODUCT_Q_PLUS, PRODUCT_TWO, product_classes,
)
from .models import CheckResult, split_prime_power
from .parallel import ordered_map
from .saxl import (
    K_ALTERNATING, K_BOREL, K_DIHEDRAL_MINUS, K_DIHEDRAL_PLUS, K_INVOLUTION_A,
    K_INVOLUTION_B, K_KLEIN_A, K_KLEIN_B, REGULAR, Census,
)

logger = logging.getLogger('baersaxl.lab')

Number = Union[int, Fraction]

# Intersection labels: A_1, A_2, A_3 = D4, A_4 = Alt(4), A_q, A_{q+1}, A_{q-1}
A_ONE = '1'
A_TWO = '2'
A_KLEIN = '3'
A_ALT = '4'
A_BOREL = 'q'
A_PLUS = 'q+1'
A_MINUS = 'q-1'

TAG_TO_LABEL = {
    REGULAR: A_ONE,
    K_INVOLUTION_A: A_TWO,
    K_INVOLUTION_B: A_TWO,
    K_KLEIN_A: A_KLEIN,
    K_KLEIN_B: A_KLEIN,
    K_ALTERNATING: A_ALT,
    K_BOREL: A_BOREL,
    K_DIHEDRAL_PLUS: A_PLUS,
    K_DIHEDRAL_MINUS: A_MINUS,
}

VANISHING_CELLS = ((A_PLUS, A_MINUS, A_ONE), (A_MINUS, A_PLUS, A_ONE), (A_PLUS, A_PLUS, A_ONE))


def _d(q: int) -> int:
    return 3 if (q + 1) % 3 == 0 else 1


def subgroup_label(q: int, order: int, involutions: int) -> str:
    """Intersection label of a subgroup of M from its order and involution count."""
    if order == 1:
        return A_ONE
    if order == 2:
        return A_TWO
    if order == 4 and involutions == 3:
        return A_KLEIN
    if order == 12 and involutions == 3:
        return A_ALT
    if order == 2 * q and involutions == q:
        return A_BOREL
    if order == 2 * (q + 1) and involutions == q + 2:
        return A_PLUS
    if order == 2 * (q - 1) and involutions == q:
        return A_MINUS
    return f'order-{order}'


# -- exact values with a sqrt(q) part ----------------------------------------------------

class Surd:
    """rational + root * sqrt(q), compared exactly by squaring."""

    def __init__(self, q: int, rational: Number = 0, root: Number = 0):
        self.q = q
        self.rational = Fraction(rational)
        self.root = Fraction(root)

    def sign_against(self, x: Number) -> int:
        """Sign of self - x."""
        a = self.rational - Fraction(x)
        b = self.root
        if a >= 0 and b >= 0:
            return 0 if a == 0 and b == 0 else 1
        if a <= 0 and b <= 0:
            return -1
        diff = a * a - b * b * self.q
        if diff == 0:
            return 0
        if a > 0:
            return 1 if diff > 0 else -1
        return -1 if diff > 0 else 1

    def __le__(self, x: Number) -> bool:
        return self.sign_against(x) <= 0

    def __ge__(self, x: Number) -> bool:
        return self.sign_against(x) >= 0

    def __float__(self) -> float:
        return float(self.rational) + float(self.root) * self.q ** 0.5

    def to_dict(self) -> Dict:
        return {'rational': str(self.rational), 'sqrt_q': str(self.root), 'approx': round(float(self), 4)}

    def __repr__(self):
        return f"Surd({self.rational} + {self.root}*sqrt({self.q}))"


def _dec(text: str) -> Fraction:
    return Fraction(text)


# -- closed forms ------------------------------------------------------------------------

def nprime_formulas(q: int, r: int) -> Fraction:
    """
    Upper bound for the number of regular suborbits fixed by a field-type
    subgroup of prime order r: q + 5/2 or q/2 + 1/3 for r = 2 (d = 1, 3), and
    q1^2/d + 3/(2d) with q1 = p^(m/r) for odd r.
    """
    if not isprime(r):
        raise LabError(f"r = {r} is not a prime")
    pm = split_prime_power(q)
    if pm is None:
        raise LabError(f"q = {q} is not a prime power")
    p, m = pm
    d = _d(q)
    if r == 2:
        return q + Fraction(5, 2) if d == 1 else Fraction(q, 2) + Fraction(1, 3)
    if m % r:
        raise LabError(f"r = {r} does not divide 2m = {2 * m}")
    q1 = p ** (m // r)
    return Fraction(q1 * q1, d) + Fraction(3, 2 * d)


def applicable(q: int) -> bool:
    """sqrt(q) >= 15 d, decided as q >= 225 d^2."""
    d = _d(q)
    return q >= 225 * d * d


def closed_form_bounds(q: int) -> Dict[str, Surd]:
    """Every closed-form bound of the decomposition, evaluated exactly at q."""
    d = _d(q)
    q4 = q ** 4
    q5 = q ** 5
    if d == 1:
        common = Surd(q, Fraction(4, 9) * q5 - _dec('22.1555') * q4, Fraction(-1, 3) * q4)
        a_low = Surd(q, q5 - _dec('1.0355') * q4)
        b_up = Surd(q, Fraction(5, 9) * q5 + _dec('15.25') * q4, Fraction(1, 3) * q4)
        c_up = Surd(q, _dec('3.85') * q4)
        d_up = Surd(q, _dec('2.02') * q4)
        e_low = Surd(q, q ** 3 - 6 * q - 1)
    else:
        common = Surd(q, Fraction(4, 27) * q5 - _dec('16.8372') * q4, Fraction(-31, 27) * q4)
        a_low = Surd(q, Fraction(1, 3) * q5 - _dec('0.3342') * q4)
        b_up = Surd(q, Fraction(5, 27) * q5 + _dec('10.74') * q4, Fraction(31, 27) * q4)
        c_up = Surd(q, _dec('3.26') * q4)
        d_up = Surd(q, _dec('2.503') * q4)
        e_low = Surd(q, Fraction(q ** 3 - 3 * q - 2, 3))
    return {
        'common_nonregular_lower': common,
        'A_lower': a_low,
        'B_upper': b_up,
        'C_upper': c_up,
        'D_upper': d_up,
        'E_t_lower': e_low,
        'gamma_r_lower': Surd(q, Fraction(q5 - q4, 3 * d)),
        'f2_upper': Surd(q, Fraction(5, 2) * q * q + 4 * q - Fraction(1, 2)),
        'nprime_2': Surd(q, nprime_formulas(q, 2)),
    }


def bounds_report(q: int) -> Dict:
    return {
        'q': q,
        'd': _d(q),
        'applicable': applicable(q),
        'bounds': {k: v.to_dict() for k, v in sorted(closed_form_bounds(q).items())},
    }


# -- pair quantities ---------------------------------------------------------------------

def _containment(q: int, d: int) -> Dict[str, int]:
    """How many members of Omega contain <t, t'> by the order class of tt'."""
    return {
        PRODUCT_TWO: (q + 1) ** 2 // d,
        PRODUCT_P: q,
        PRODUCT_Q_PLUS: (q + 1) // d,
        PRODUCT_Q_MINUS: (q + 1) // d,
    }


class PairContext:
    """Everything enumerated for the pair (w0, Omega[rep])."""

    def __init__(self, rep: int, tag: str):
        self.rep = rep
        self.tag = tag
        self.shared = 0
        self.poles = np.zeros(0, dtype=np.int64)
        self.poles_prime = np.zeros(0, dtype=np.int64)
        self.tallies: Dict[str, np.ndarray] = {}
        self.e_t = np.zeros(0, dtype=np.int64)
        self.e_t_weighted = np.zeros(0, dtype=np.int64)
        self.e_t_closed: List[Fraction] = []
        self.containment_bad: List[Tuple[int, int, str, int]] = []
        self.w_size = 0
        self.e_by_subplane = 0
        self.cells: Counter = Counter()
        self.excess: Counter = Counter()
        self.parts = {'A': 0, 'B': 0, 'C': 0, 'D': 0}
        self.w_outside = 0
        self.common_nonregular = 0
        self.incidence_mismatch = 0

    @property
    def e_total(self) -> int:
        return int(self.e_t.sum())

    def to_dict(self) -> Dict:
        return {
            'rep': self.rep,
            'class': self.tag,
            'shared_involutions': self.shared,
            'w': self.w_size,
            'e': self.e_total,
            'parts': dict(self.parts),
            'common_nonregular': self.common_nonregular,
            'max_i_prime_2': int(self.tallies[PRODUCT_TWO].max()) if len(self.e_t) else 0,
            'max_i_prime_p': int(self.tallies[PRODUCT_P].max()) if len(self.e_t) else 0,
            'min_e_t': int(self.e_t.min()) if len(self.e_t) else None,
            'cells': {','.join(k): v for k, v in sorted(self.cells.items())},
        }


def _labels_by_orbit(census: Census) -> Dict[int, str]:
    return {r.rep: TAG_TO_LABEL[r.tag] for r in census.records}


def nonregular_orbit_mask(census: Census) -> np.ndarray:
    """Members of Gamma_nr(w0) as a mask over Omega."""
    labels = census.orbits.labels
    return ~census.regular_mask() & (labels != 0)


def transported_indices(action: ActionCtx, rep: int) -> np.ndarray:
    """j(i) with Omega[i] . T_rep^-1 = Omega[j(i)]: positions relative to w0."""
    g_inv = action.element(rep).inverse()
    perm = action.geom.point_perm(g_inv.matrix)
    return action.image_indices(np.arange(action.size), perm)


def enumerate_pair_quantities(census: Census, rep: int) -> PairContext:
    """I'(t, s), E(t), W and its cells n_{j,k,l} for the pair (w0, Omega[rep])."""
    action = census.action
    geom = action.geom
    q, d = census.q, census.d
    if rep == 0:
        raise LabError("the pair quantities need a second subplane")
    record = census.by_rep.get(census.orbits.labels[rep].item())
    ctx = PairContext(rep, record.tag if record else '')

    pts = action.points
    in_w0 = np.zeros(geom.num_points, dtype=bool)
    in_w0[pts[0]] = True
    in_w1 = np.zeros(geom.num_points, dtype=bool)
    in_w1[pts[rep]] = True
    non = geom.nonisotropic
    only0 = non & in_w0 & ~in_w1
    only1 = non & in_w1 & ~in_w0
    ctx.shared = int((non & in_w0 & in_w1).sum())
    ctx.poles = np.flatnonzero(only0)
    ctx.poles_prime = np.flatnonzero(only1)

    # I'(t, s) for every t in I \ I'
    classes = product_classes(geom, ctx.poles, ctx.poles_prime)
    for label in (PRODUCT_TWO, PRODUCT_P, PRODUCT_Q_PLUS, PRODUCT_Q_MINUS):
        ctx.tallies[label] = (classes == label).sum(axis=1).astype(np.int64)

    # incidence of W with the two pole sets
    in0 = only0[pts]
    in1 = only1[pts]
    a = in0.sum(axis=1)
    b = in1.sum(axis=1)
    w_idx = np.flatnonzero((a > 0) & (b > 0))
    ctx.w_size = len(w_idx)
    ctx.e_by_subplane = int((a[w_idx] * b[w_idx]).sum())

    col0 = np.full(geom.num_points, -1, dtype=np.int64)
    col0[ctx.poles] = np.arange(len(ctx.poles))
    col1 = np.full(geom.num_points, -1, dtype=np.int64)
    col1[ctx.poles_prime] = np.arange(len(ctx.poles_prime))
    sub = pts[w_idx]
    r0, c0 = np.nonzero(in0[w_idx])
    r1, c1 = np.nonzero(in1[w_idx])
    ys = coo_matrix((np.ones(len(r0), dtype=np.int64), (r0, col0[sub[r0, c0]])),
                    shape=(len(w_idx), len(ctx.poles))).tocsr()
    zs = coo_matrix((np.ones(len(r1), dtype=np.int64), (r1, col1[sub[r1, c1]])),
                    shape=(len(w_idx), len(ctx.poles_prime))).tocsr()
    counts = np.asarray((ys.T @ zs).todense())
    ctx.e_t = counts.sum(axis=1).astype(np.int64)

    expected = _containment(q, d)
    weighted = np.zeros(len(ctx.poles), dtype=np.int64)
    for label, per in expected.items():
        hit = classes == label
        weighted += hit.sum(axis=1) * per
        bad = np.argwhere(hit & (counts != per))
        for y, z in bad[:5].tolist():
            ctx.containment_bad.append((int(ctx.poles[y]), int(ctx.poles_prime[z]), label, int(counts[y, z])))
    ctx.e_t_weighted = weighted
    for k in range(len(ctx.poles)):
        ctx.e_t_closed.append(
            Fraction(q * q * (q + 1), d)
            + Fraction(q * q + q, d) * int(ctx.tallies[PRODUCT_TWO][k])
            + Fraction((d - 1) * q - 1, d) * int(ctx.tallies[PRODUCT_P][k])
            - Fraction(q + 1, d) * ctx.shared
        )

    # classes of M cap M_i, M' cap M_i and M cap M' cap M_i over W
    orbit_label = _labels_by_orbit(census)
    labels = census.orbits.labels
    transported = transported_indices(action, rep)
    nonreg = nonregular_orbit_mask(census)
    nonreg_prime = nonreg[transported]
    shares_prime = (non & in_w1)[pts].any(axis=1)
    shares_prime[rep] = False
    ctx.incidence_mismatch = int((shares_prime != nonreg_prime).sum())
    ctx.common_nonregular = int((nonreg & nonreg_prime).sum())
    ctx.w_outside = int((~(nonreg[w_idx] & nonreg_prime[w_idx])).sum())

    j_of = [orbit_label[int(l)] for l in labels[w_idx]]
    k_of = [orbit_label[int(l)] for l in labels[transported[w_idx]]]
    l_of = _triple_labels(census, record, w_idx)

    for n, i in enumerate(w_idx.tolist()):
        j, k, l = j_of[n], k_of[n], l_of[n]
        ctx.cells[(j, k, l)] += 1
        extra = int(a[i] * b[i]) - 1
        ctx.excess[(j, k, l)] += extra
        if A_ALT in (j, k) or A_BOREL in (j, k):
            ctx.parts['D'] += extra
        elif l == A_ONE:
            ctx.parts['B'] += extra
        else:
            ctx.parts['C'] += extra
    ctx.parts['A'] = ctx.e_total
    return ctx


def _triple_labels(census: Census, record, w_idx: np.ndarray) -> List[str]:
    """Label of M cap M' cap M_i for each i in w_idx."""
    if record is None or record.stabilizer_order == 1:
        return [A_ONE] * len(w_idx)
    action = census.action
    ident = np.array(IDENTITY9)
    order = np.ones(len(w_idx), dtype=np.int64)
    invol = np.zeros(len(w_idx), dtype=np.int64)
    for k in record.stabilizer.tolist():
        if np.array_equal(action.stab[k].ravel(), ident):
            continue
        fixed = action.fixed_mask(action.stab_perm(k), w_idx)
        order += fixed
        if action.stab_involutions[k]:
            invol += fixed
    return [subgroup_label(census.q, int(o), int(v)) for o, v in zip(order, invol)]


def _pick_reps(census: Census, max_reps: Optional[int]) -> List[int]:
    """Representatives with one per class first, so a cap still covers every class."""
    first: Dict[str, int] = {}
    for r in census.records:
        first.setdefault(r.tag, r.rep)
    lead = sorted(first.values())
    rest = [r.rep for r in census.records if r.rep not in first.values()]
    return (lead + rest)[:max_reps]


def pair_checks(census: Census, contexts: List[PairContext]) -> List[CheckResult]:
    """Tally every exact fact about the pair quantities over the given contexts."""
    q, d = census.q, census.d
    two_way = CheckResult('e-two-way')
    containment = CheckResult('pair-containment')
    identity = CheckResult('e-t-identity')
    involution_pairs = CheckResult('involution-pairs')
    vanishing = CheckResult('vanishing-cells')
    membership = CheckResult('w-membership')
    decomposition = CheckResult('abcd-decomposition')
    incidence = CheckResult('gamma-nr-incidence')
    chain = CheckResult('e-t-chain', asserted=False,
                        note='lower-bound chain for |E(t)|, reported only')

    bounds = closed_form_bounds(q)
    for ctx in contexts:
        rep = ctx.rep
        two_way.record(ctx.e_total == ctx.e_by_subplane, rep=rep, by_t=ctx.e_total, by_subplane=ctx.e_by_subplane)
        containment.record(not ctx.containment_bad, rep=rep, pairs=ctx.containment_bad[:5])
        closed_ok = all(int(ctx.e_t[k]) == int(ctx.e_t_weighted[k]) and int(ctx.e_t[k]) == ctx.e_t_closed[k]
                        for k in range(len(ctx.e_t)))
        identity.record(closed_ok, rep=rep)
        inv_ok = (len(ctx.e_t) == 0
                  or (int(ctx.tallies[PRODUCT_TWO].max()) <= 1
                      and int(ctx.tallies[PRODUCT_P].max()) <= 3 * q - 1))
        involution_pairs.record(inv_ok, rep=rep,
                                max_two=int(ctx.tallies[PRODUCT_TWO].max()) if len(ctx.e_t) else 0,
                                max_p=int(ctx.tallies[PRODUCT_P].max()) if len(ctx.e_t) else 0)
        zero_cells = {','.join(c): ctx.cells.get(c, 0) for c in VANISHING_CELLS}
        vanishing.record(not any(zero_cells.values()), rep=rep, cells=zero_cells)
        membership.record(ctx.w_outside == 0, rep=rep, outside=ctx.w_outside)
        p = ctx.parts
        decomposition.record(ctx.w_size == p['A'] - p['B'] - p['C'] - p['D'], rep=rep,
                             w=ctx.w_size, parts=dict(p))
        incidence.record(ctx.incidence_mismatch == 0, rep=rep, mismatches=ctx.incidence_mismatch)
        for k in range(len(ctx.e_t)):
            step = (Fraction(q * q * (q + 1), d) - Fraction((q + 1) * (q + 2), d)
                    + Fraction((d - 1) * q - 1, d) * int(ctx.tallies[PRODUCT_P][k]))
            ok = int(ctx.e_t[k]) >= step and step >= bounds['E_t_lower'].rational
            chain.record(ok, rep=rep, pole=int(ctx.poles[k]), e_t=int(ctx.e_t[k]), step=str(step))
    return [two_way, containment, identity, involution_pairs, vanishing, membership,
            decomposition, incidence, chain]


def part_bound_checks(census: Census, contexts: List[PairContext]) -> List[CheckResult]:
    """The asymptotic bounds on A, B, C, D against the enumerated parts (never asserted)."""
    q = census.q
    bounds = closed_form_bounds(q)
    note = 'asymptotic bound, needs sqrt(q) >= 15d' if not applicable(q) else ''
    out = []
    for name, key, lower in (('A', 'A_lower', True), ('B', 'B_upper', False),
                             ('C', 'C_upper', False), ('D', 'D_upper', False)):
        check = CheckResult(f'part-{name}-bound', asserted=False, note=note)
        for ctx in contexts:
            value = ctx.parts[name]
            ok = bounds[key] <= value if lower else bounds[key] >= value
            check.record(ok, rep=ctx.rep, value=value, bound=round(float(bounds[key]), 2))
        out.append(check)
    return out


# -- the ell criterion ----------------------------------------------------------------

class EllReport:
    """min over reps of |Gamma_nr(w0) cap Gamma_nr(w')| - |Omega| + 2|Gamma_r|."""

    def __init__(self, q: int, omega: int, gamma_r: int, rows: List[Dict]):
        self.q = q
        self.omega = omega
        self.gamma_r = gamma_r
        self.rows = rows
        self.diagonal = gamma_r - 1

    @property
    def minimum_common(self) -> Optional[int]:
        return min((r['common'] for r in self.rows), default=None)

    @property
    def ell(self) -> Optional[int]:
        m = self.minimum_common
        return None if m is None else m - self.omega + 2 * self.gamma_r

    @property
    def positive(self) -> bool:
        return self.ell is not None and self.ell > 0

    def check(self) -> CheckResult:
        check = CheckResult('ell-positive', asserted=False,
                            note='sufficient criterion, may fail at small q')
        check.record(self.positive, ell=self.ell, minimum_common=self.minimum_common)
        return check

    def bound_check(self) -> CheckResult:
        bound = closed_form_bounds(self.q)['common_nonregular_lower']
        note = '' if applicable(self.q) else 'asymptotic bound, needs sqrt(q) >= 15d'
        check = CheckResult('common-nonregular-bound', asserted=False, note=note)
        for row in self.rows:
            check.record(bound <= row['common'], rep=row['rep'], common=row['common'])
        return check

    def to_dict(self) -> Dict:
        return {
            'omega': self.omega,
            'gamma_r': self.gamma_r,
            'ell': self.ell,
            'positive': self.positive,
            'minimum_common': self.minimum_common,
            'diagonal': self.diagonal,
            'closed_form_bound': closed_form_bounds(self.q)['common_nonregular_lower'].to_dict(),
            'rows': self.rows,
        }


def _common_row(census: Census, rep: int) -> Dict:
    nonreg = nonregular_orbit_mask(census)
    transported = transported_indices(census.action, rep)
    common = int((nonreg & nonreg[transported]).sum())
    ell = common - census.action.size + 2 * census.gamma_r
    return {'rep': rep, 'class': census.by_rep[rep].tag, 'common': common, 'ell': ell}


def ell_criterion(census: Census, jobs: int = 1, max_reps: Optional[int] = None) -> EllReport:
    """The exact ell(T, M0) over the suborbit representatives."""
    reps = _pick_reps(census, max_reps)
    rows = ordered_map(lambda rep: _common_row(census, rep), reps, jobs, label='ell')
    report = EllReport(census.q, census.action.size, census.gamma_r, rows)
    logger.info("ell(T, M0) = %s over %d representatives", report.ell, len(rows))
    return report


# -- driver -----------------------------------------------------------------------------

def run_pair_lab(census: Census, jobs: int = 1,
                 max_reps: Optional[int] = None) -> Tuple[Dict, List[CheckResult]]:
    """Pair quantities and the A, B, C, D decomposition for one census."""
    reps = _pick_reps(census, max_reps)
    contexts = ordered_map(lambda rep: enumerate_pair_quantities(census, rep), reps, jobs, label='pairs')
    checks = pair_checks(census, contexts) + part_bound_checks(census, contexts)
    return {'pairs': [c.to_dict() for c in contexts]}, checks


def run_bounds(census: Census, jobs: int = 1,
               max_reps: Optional[int] = None) -> Tuple[Dict, List[CheckResult]]:
    """The ell criterion by enumeration beside the closed-form bound table."""
    q = census.q
    ell = ell_criterion(census, jobs, max_reps)
    _, m = split_prime_power(q)
    nprime = {str(r): str(nprime_formulas(q, r)) for r in primefactors(2 * m)}
    gamma_r = CheckResult('gamma-r-bound', asserted=False, note='asymptotic lower bound')
    gamma_r.record(closed_form_bounds(q)['gamma_r_lower'] <= census.gamma_r, gamma_r=census.gamma_r)
    section = {'ell': ell.to_dict(), 'bounds': bounds_report(q), 'nprime': nprime}
    return section, [ell.check(), ell.bound_check(), gamma_r]
