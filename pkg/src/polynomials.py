"""
Polynomial work over F_q: the two determinant families g1/g2, their solution
sets, curve point counts against the Weil bound, and cubic discriminants.

Polynomials are little-endian lists of field codes. Every coefficient lives in
F_q, embedded in F_{q^2} as the fixed field of conjugation.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import LabError
from .field import FieldCtx
from .geometry import mat_det
from .models import CheckResult
from .parallel import ordered_map

logger = logging.getLogger('baersaxl.polynomials')

G_ONE = 'g1'
G_TWO = 'g2'
SYSTEM_CHOICES = (G_ONE, G_TWO)

CUBIC_MULTIPLE = 'multiple'
CUBIC_ONE_ROOT = 'one-root'
CUBIC_THREE_ROOTS = 'three-roots'

# Largest degree the curve counter accepts
MAX_WEIL_DEGREE = 12


# -- polynomial helpers ---------------------------------------------------------------

def _trim(a: Sequence[int]) -> List[int]:
    a = [int(c) for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def degree(a: Sequence[int]) -> int:
    """Degree of a, with -1 for the zero polynomial."""
    return len(_trim(a)) - 1


def poly_add(F: FieldCtx, a: Sequence[int], b: Sequence[int]) -> List[int]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim(F.py_add[x][y] for x, y in zip(a, b))


def poly_sub(F: FieldCtx, a: Sequence[int], b: Sequence[int]) -> List[int]:
    return poly_add(F, a, [F.py_neg[c] for c in b])


def poly_scale(F: FieldCtx, a: Sequence[int], c: int) -> List[int]:
    return _trim(F.py_mul[x][c] for x in a)


def poly_mul(F: FieldCtx, a: Sequence[int], b: Sequence[int]) -> List[int]:
    a, b = _trim(a), _trim(b)
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        row = F.py_mul[x]
        for j, y in enumerate(b):
            out[i + j] = F.py_add[out[i + j]][row[y]]
    return _trim(out)


def poly_monic(F: FieldCtx, a: Sequence[int]) -> List[int]:
    a = _trim(a)
    if not a:
        return a
    return poly_scale(F, a, F.py_inv[a[-1]])


def poly_divmod(F: FieldCtx, a: Sequence[int], b: Sequence[int]) -> Tuple[List[int], List[int]]:
    b = _trim(b)
    if not b:
        raise LabError("division by the zero polynomial")
    rem = _trim(a)
    quot = [0] * max(len(rem) - len(b) + 1, 0)
    lead_inv = F.py_inv[b[-1]]
    while len(rem) >= len(b):
        shift = len(rem) - len(b)
        coef = F.py_mul[rem[-1]][lead_inv]
        quot[shift] = coef
        rem = poly_sub(F, rem, [0] * shift + poly_scale(F, b, coef))
    return _trim(quot), rem


def poly_gcd(F: FieldCtx, a: Sequence[int], b: Sequence[int]) -> List[int]:
    """Monic gcd (the zero polynomial when both inputs vanish)."""
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_divmod(F, a, b)[1]
    return poly_monic(F, a)


def poly_eval(F: FieldCtx, a: Sequence[int], xs) -> np.ndarray:
    """Horner evaluation at every code in xs."""
    xs = np.asarray(xs)
    acc = np.zeros_like(xs)
    for c in reversed(_trim(a)):
        acc = F.ADD[F.MUL[acc, xs], c]
    return acc


def poly_sqrt(F: FieldCtx, a: Sequence[int]) -> Optional[List[int]]:
    """The monic h with h^2 = a for monic a, or None."""
    a = _trim(a)
    if not a or a[-1] != 1 or (len(a) - 1) % 2:
        return None
    k = (len(a) - 1) // 2
    h = [0] * (k + 1)
    h[k] = 1
    half = F.py_inv[2 % F.p]
    for j in range(k - 1, -1, -1):
        acc = 0
        for i in range(j + 1, k):
            l = k + j - i
            if j < l <= k:
                acc = F.py_add[acc][F.py_mul[h[i]][h[l]]]
        h[j] = F.py_mul[F.py_sub[a[k + j]][acc]][half]
    return h if poly_mul(F, h, h) == a else None


def _code(F: FieldCtx, k: int) -> int:
    return k % F.p


def _fq(F: FieldCtx, values: Dict[str, int]) -> None:
    for name, v in values.items():
        if not 0 <= v < F.order or not F.in_subfield_code(v):
            raise LabError(f"parameter {name} is not an element of F_q")


# -- the quadratic character, vectorized ------------------------------------------------

def character_codes(F: FieldCtx, codes) -> np.ndarray:
    """+1 / -1 / 0 for F_q codes, elementwise."""
    codes = np.asarray(codes)
    safe = np.where(codes == 0, 1, codes)
    k = F.LOG[safe] // (F.q + 1)
    chi = np.where(k % 2 == 0, 1, -1)
    return np.where(codes == 0, 0, chi)


# -- the g1 / g2 systems ------------------------------------------------------------------

class PolySystem:
    """
    One member of the g1 or g2 family, with f, g, h and h' as vectorized
    functions of F_q codes.

    g1 = [[0, 1, m1+n1 i], [e+i, t, 0], [t, i, m2+n2 i]] with m2 n1 - m1 n2 = 1, t != 0;
    g2 = [[0, 1, m1+n1 i], [s, -1, 0], [i, s i, m2+n2 i]] with m2 n1 - m1 n2 = s != 0.
    """

    def __init__(self, field: FieldCtx, choice: str, params: Dict[str, int]):
        self.field = field
        self.choice = choice
        self.params = dict(params)

    # X and Z are the third-column entries of the row reductions
    def _xz(self, a, c):
        F = self.field
        p = self.params
        th = F.theta
        x = F.SUB[F.ADD[F.MUL[a, p['m1']], F.MUL[th, p['n1']]],
                  F.MUL[F.ADD[p['m1'], F.MUL[a, p['n1']]], c]]
        z = F.SUB[F.ADD[F.MUL[a, p['m2']], F.MUL[th, p['n2']]],
                  F.MUL[F.ADD[p['m2'], F.MUL[a, p['n2']]], c]]
        return x, z

    def parts(self, a, c):
        """The (A, B, C) building blocks of f and g."""
        F = self.field
        a, c = np.broadcast_arrays(np.asarray(a), np.asarray(c))
        x, z = self._xz(a, c)
        p = self.params
        if self.choice == G_ONE:
            ea = F.ADD[p['e'], a]
            return F.MUL[ea, z], F.MUL[p['t'], x], F.MUL[ea, x]
        s = p['s']
        return F.MUL[s, z], F.MUL[a, x], F.MUL[s, x]

    def fg(self, a, c):
        F = self.field
        A, B, C = self.parts(a, c)
        a = np.broadcast_to(np.asarray(a), A.shape)
        if self.choice == G_ONE:
            t = self.params['t']
            f = F.SUB[F.ADD[A, F.MUL[t, B]], F.MUL[a, C]]
            g = F.SUB[F.ADD[F.MUL[a, A], F.MUL[F.MUL[a, t], B]], F.MUL[F.theta, C]]
        else:
            s = self.params['s']
            f = F.SUB[F.SUB[A, B], F.MUL[F.MUL[a, s], C]]
            g = F.SUB[F.SUB[F.MUL[a, A], F.MUL[a, B]], F.MUL[F.MUL[F.theta, s], C]]
        return f, g

    def h(self, a, b, c):
        """h(a, b, c) = f(a, c) b - g(a, c)."""
        F = self.field
        f, g = self.fg(a, c)
        return F.SUB[F.MUL[f, b], g]

    def h_prime(self, a, c, z):
        """F(a,c)(z^3 + 3 z theta) + G(a,c)(3 z^2 + theta)."""
        F = self.field
        f, g = self.fg(a, c)
        c = np.broadcast_to(np.asarray(c), f.shape)
        big_f = F.ADD[g, F.MUL[f, c]]
        big_g = F.ADD[F.MUL[g, c], F.MUL[f, F.theta]]
        z = np.asarray(z)
        three = _code(F, 3)
        z2 = F.MUL[z, z]
        cubic = F.ADD[F.MUL[z2, z], F.MUL[F.MUL[three, z], F.theta]]
        quad = F.ADD[F.MUL[three, z2], F.theta]
        return F.ADD[F.MUL[big_f, cubic], F.MUL[big_g, quad]]

    def matrix(self) -> np.ndarray:
        """The 3x3 matrix over F_{q^2} (g_A + g_B i)."""
        g_a, g_b = self.real_parts()
        F = self.field
        return F.ADD[g_a, F.MUL[g_b, F.i_elem]]

    def real_parts(self) -> Tuple[np.ndarray, np.ndarray]:
        F = self.field
        p = self.params
        one = 1
        if self.choice == G_ONE:
            g_a = [[0, one, p['m1']], [p['e'], p['t'], 0], [p['t'], 0, p['m2']]]
            g_b = [[0, 0, p['n1']], [one, 0, 0], [0, one, p['n2']]]
        else:
            s = p['s']
            g_a = [[0, one, p['m1']], [s, F.py_neg[one], 0], [0, 0, p['m2']]]
            g_b = [[0, 0, p['n1']], [0, 0, 0], [one, s, p['n2']]]
        return np.array(g_a, dtype=np.int64), np.array(g_b, dtype=np.int64)

    def determinant_matrix(self, a: int, b: int, c: int) -> np.ndarray:
        """
        a (g_A E_B + g_B E_A) + (g_A E_A + theta g_B E_B) for
        E_A + E_B i = diag(1, -b+i, -c+i); its determinant is h(a, b, c).
        """
        F = self.field
        g_a, g_b = self.real_parts()
        e_a = np.array([1, F.py_neg[b], F.py_neg[c]], dtype=np.int64)
        e_b = np.array([0, 1, 1], dtype=np.int64)
        mixed = F.ADD[F.MUL[g_a, e_b[None, :]], F.MUL[g_b, e_a[None, :]]]
        plain = F.ADD[F.MUL[g_a, e_a[None, :]], F.MUL[F.theta, F.MUL[g_b, e_b[None, :]]]]
        return F.ADD[F.MUL[a, mixed], plain]

    def to_dict(self) -> Dict:
        return {'choice': self.choice, 'params': {k: int(v) for k, v in sorted(self.params.items())}}

    def __repr__(self):
        return f"PolySystem({self.choice}, {self.params})"


def build_poly_system(field: FieldCtx, choice: str, params: Dict[str, int]) -> PolySystem:
    """Validate the parameter constraints of the chosen family and build the system."""
    F = field
    if choice == G_ONE:
        needed = ('e', 't', 'm1', 'm2', 'n1', 'n2')
    elif choice == G_TWO:
        needed = ('s', 'm1', 'm2', 'n1', 'n2')
    else:
        raise LabError(f"unknown system family: {choice}")
    missing = [k for k in needed if k not in params]
    if missing:
        raise LabError(f"missing parameters: {', '.join(missing)}")
    params = {k: int(params[k]) for k in needed}
    _fq(F, params)
    det = F.py_sub[F.py_mul[params['m2']][params['n1']]][F.py_mul[params['m1']][params['n2']]]
    if choice == G_ONE:
        if det != 1:
            raise LabError("g1 needs m2 n1 - m1 n2 = 1")
        if params['t'] == 0:
            raise LabError("g1 needs t != 0")
    else:
        if params['s'] == 0:
            raise LabError("g2 needs s != 0")
        if det != params['s']:
            raise LabError("g2 needs m2 n1 - m1 n2 = s")
    return PolySystem(F, choice, params)


def sample_params(field: FieldCtx, choice: str, rng: np.random.Generator) -> Dict[str, int]:
    """Uniform parameters satisfying the family's constraints."""
    F = field
    fq = F.subfield_codes
    nonzero = fq[fq != 0]

    def pick(pool):
        return int(pool[rng.integers(len(pool))])

    m1, n2 = pick(fq), pick(fq)
    n1 = pick(nonzero)
    target = 1 if choice == G_ONE else pick(nonzero)
    m2 = F.py_mul[F.py_add[target][F.py_mul[m1][n2]]][F.py_inv[n1]]
    if choice == G_ONE:
        return {'e': pick(fq), 't': pick(nonzero), 'm1': m1, 'm2': m2, 'n1': n1, 'n2': n2}
    return {'s': target, 'm1': m1, 'm2': m2, 'n1': n1, 'n2': n2}


# -- solution sets --------------------------------------------------------------------------

class LambdaSets:
    """Sizes of the solution sets of one system, plus the facts checked about them."""

    def __init__(self, system: PolySystem):
        self.system = system
        self.lambda1 = 0
        self.lambda2 = 0
        self.lambda11 = 0
        self.lambda12 = 0
        self.lambda12_prime = 0
        self.lambda12_prime_live = 0
        self.lambda2_shape_ok = True
        self.coprime_ok = True
        self.coprime_at_minus_e: Optional[bool] = None

    def to_dict(self) -> Dict:
        return {
            'system': self.system.to_dict(),
            'lambda1': self.lambda1,
            'lambda2': self.lambda2,
            'lambda11': self.lambda11,
            'lambda12': self.lambda12,
            'lambda12_prime': self.lambda12_prime,
            'lambda12_prime_live': self.lambda12_prime_live,
            'lambda2_shape_ok': self.lambda2_shape_ok,
            'coprime_ok': self.coprime_ok,
            'coprime_at_minus_e': self.coprime_at_minus_e,
        }


def cube_mask(F: FieldCtx) -> np.ndarray:
    """cube[b, c]: (-b+i)(-c+i) is a cube in F_{q^2}^*, indexed by positions in F_q."""
    fq = F.subfield_codes
    u = F.ADD[F.NEG[fq], F.i_elem]
    prod = F.MUL[u[:, None], u[None, :]]
    g = 3 if (F.order - 1) % 3 == 0 else 1
    return F.LOG[prod] % g == 0


def linear_in_c(system: PolySystem, a0: int) -> Tuple[List[int], List[int]]:
    """f(a0, c) and g(a0, c) as polynomials in c (both have degree at most 1)."""
    F = system.field
    f0, g0 = system.fg(np.array([a0, a0]), np.array([0, 1]))
    f = [int(f0[0]), F.py_sub[int(f0[1])][int(f0[0])]]
    g = [int(g0[0]), F.py_sub[int(g0[1])][int(g0[0])]]
    return _trim(f), _trim(g)


def lambda_sets(system: PolySystem) -> LambdaSets:
    """Enumerate the solution sets over F_q^3 by brute force."""
    F = system.field
    fq = F.subfield_codes
    n = len(fq)
    out = LambdaSets(system)

    a = fq[:, None]
    c = fq[None, :]
    f, g = system.fg(a, c)                      # indexed [a, c]
    cube = cube_mask(F)                         # indexed [b, c]
    h = F.SUB[F.MUL[f[:, None, :], fq[None, :, None]], g[:, None, :]]   # [a, b, c]
    cube3 = np.broadcast_to(cube[None, :, :], (n, n, n))
    f_live = np.broadcast_to((f != 0)[:, None, :], (n, n, n))
    lam1 = (h == 0) & f_live & cube3
    both_zero = np.broadcast_to(((f == 0) & (g == 0))[:, None, :], (n, n, n))
    lam2 = both_zero & cube3

    neg_c = F.NEG[fq]
    b_is_neg_c = fq[:, None] == neg_c[None, :]  # [b, c]
    out.lambda1 = int(lam1.sum())
    out.lambda2 = int(lam2.sum())
    out.lambda11 = int((lam1 & b_is_neg_c[None]).sum())
    out.lambda12 = int((lam1 & ~b_is_neg_c[None]).sum())

    z = fq[None, None, :]
    hp = system.h_prime(fq[:, None, None], fq[None, :, None], z)      # [a, c, z]
    out.lambda12_prime = int((hp == 0).sum())
    out.lambda12_prime_live = int(((hp == 0) & (f != 0)[:, :, None]).sum())

    if system.choice == G_ONE:
        minus_e = F.py_neg[system.params['e']]
        ia, ib, ic = np.nonzero(lam2)
        if len(ia):
            x, _ = system._xz(fq[ia], fq[ic])
            out.lambda2_shape_ok = bool(np.all(fq[ia] == minus_e) and np.all(x == 0))
        fa, ga = linear_in_c(system, minus_e)
        out.coprime_at_minus_e = poly_gcd(F, fa, ga) == [1]
        skip = {minus_e}
    else:
        skip = set()
    for a0 in fq.tolist():
        if a0 in skip:
            continue
        fa, ga = linear_in_c(system, a0)
        if poly_gcd(F, fa, ga) != [1]:
            out.coprime_ok = False
            break
    return out


def determinant_agreement(system: PolySystem, samples: int, rng: np.random.Generator) -> int:
    """Number of random (a, b, c) where det(A) differs from h(a, b, c)."""
    F = system.field
    fq = F.subfield_codes
    picks = fq[rng.integers(len(fq), size=(samples, 3))]
    mats = np.stack([system.determinant_matrix(*map(int, row)) for row in picks])
    dets = mat_det(F, mats)
    hs = system.h(picks[:, 0], picks[:, 1], picks[:, 2])
    return int((dets != hs).sum())


def _system_job(args) -> Tuple[LambdaSets, int]:
    field, choice, params, seed = args
    system = build_poly_system(field, choice, params)
    rng = np.random.default_rng(seed)
    return lambda_sets(system), determinant_agreement(system, 8, rng)


def run_systems(field: FieldCtx, count: int, seed: int, jobs: int = 1) -> Tuple[Dict, List[CheckResult]]:
    """
    Sample `count` systems of each family and tally the solution-set facts.

    |Lambda_2| <= q for g1 (with every member on a = -e, X = 0), Lambda_2 empty
    for g2, coprimality of f(a0, .) and g(a0, .) off a0 = -e, and
    |Lambda_12| <= |Lambda'_12| / 3, asserted when q = 2 (mod 3).
    """
    F = field
    q = F.q
    rng = np.random.default_rng(seed)
    jobs_list = []
    for choice in SYSTEM_CHOICES:
        for _ in range(count):
            jobs_list.append((F, choice, sample_params(F, choice, rng), int(rng.integers(2 ** 31))))
    results = ordered_map(_system_job, jobs_list, jobs, label='polynomial systems')

    bound = CheckResult('lambda-two-bound')
    empty = CheckResult('lambda-two-empty')
    shape = CheckResult('lambda-two-shape')
    coprime = CheckResult('fg-coprime')
    twelve = CheckResult('lambda-twelve', asserted=q % 3 == 2,
                         note='' if q % 3 == 2 else 'reported only: needs q = 2 (mod 3)')
    det_check = CheckResult('poly-determinant')
    at_minus_e = {'coprime': 0, 'not_coprime': 0}
    largest = {G_ONE: 0, G_TWO: 0}

    for sets, det_bad in results:
        sys_ = sets.system
        data = sys_.to_dict()
        det_check.record(det_bad == 0, mismatches=det_bad, **data)
        coprime.record(sets.coprime_ok, **data)
        twelve.record(3 * sets.lambda12 <= sets.lambda12_prime, lambda12=sets.lambda12,
                      lambda12_prime=sets.lambda12_prime, **data)
        largest[sys_.choice] = max(largest[sys_.choice], sets.lambda2)
        if sys_.choice == G_ONE:
            bound.record(sets.lambda2 <= q, lambda2=sets.lambda2, **data)
            shape.record(sets.lambda2_shape_ok, **data)
            at_minus_e['coprime' if sets.coprime_at_minus_e else 'not_coprime'] += 1
        else:
            empty.record(sets.lambda2 == 0, lambda2=sets.lambda2, **data)

    summary = {
        'seed': seed,
        'systems_per_family': count,
        'max_lambda2': largest,
        'coprime_at_minus_e': at_minus_e,
        'totals': {
            key: sum(getattr(s, key) for s, _ in results)
            for key in ('lambda1', 'lambda2', 'lambda11', 'lambda12', 'lambda12_prime')
        },
        'samples': [s.to_dict() for s, _ in results[:3]],
    }
    logger.info("polynomial systems: %d sampled at q=%d", len(results), q)
    return summary, [bound, empty, shape, coprime, twelve, det_check]


# -- curves y^2 = g(x) ---------------------------------------------------------------------

class WeilResult:
    def __init__(self, poly: List[int], count: int, irreducible: bool, bound_ok: Optional[bool]):
        self.poly = poly
        self.count = count
        self.irreducible = irreducible
        self.bound_ok = bound_ok

    def to_dict(self) -> Dict:
        return {'poly': self.poly, 'count': self.count, 'irreducible': self.irreducible,
                'bound_ok': self.bound_ok}


def curve_count(F: FieldCtx, g: Sequence[int]) -> int:
    """N = #{(x, y) in F_q^2 : y^2 = g(x)}."""
    values = poly_eval(F, g, F.subfield_codes)
    return int(np.sum(1 + character_codes(F, values)))


def is_absolutely_irreducible(F: FieldCtx, g: Sequence[int]) -> bool:
    """
    y^2 - g(x) factors over the algebraic closure exactly when g is a constant
    times a square; the square root of a monic g is unique, so it suffices to
    look for it over F_q.
    """
    g = _trim(g)
    if len(g) < 2:
        return False
    return poly_sqrt(F, poly_monic(F, g)) is None


def weil_check(F: FieldCtx, g: Sequence[int]) -> WeilResult:
    """Count points on y^2 = g(x) and test (N - q)^2 <= (deg - 1)^2 q when irreducible."""
    g = _trim(g)
    if not g:
        raise LabError("the zero polynomial defines no curve")
    if len(g) - 1 > MAX_WEIL_DEGREE:
        raise LabError(f"degree above {MAX_WEIL_DEGREE}")
    for c in g:
        if not F.in_subfield_code(c):
            raise LabError("curve coefficients must lie in F_q")
    n = curve_count(F, g)
    irreducible = is_absolutely_irreducible(F, g)
    bound_ok = None
    if irreducible:
        deg = len(g) - 1
        bound_ok = (n - F.q) ** 2 <= (deg - 1) ** 2 * F.q
    return WeilResult(g, n, irreducible, bound_ok)


def random_poly(F: FieldCtx, deg: int, rng: np.random.Generator) -> List[int]:
    fq = F.subfield_codes
    coeffs = [int(x) for x in fq[rng.integers(len(fq), size=deg)]]
    nonzero = fq[fq != 0]
    return coeffs + [int(nonzero[rng.integers(len(nonzero))])]


def weil_campaign(F: FieldCtx, count: int, seed: int) -> Tuple[Dict, CheckResult]:
    """Random curves of degree 1..12; reducible ones are skipped, not failed."""
    rng = np.random.default_rng(seed)
    check = CheckResult('weil-bound')
    skipped = 0
    worst = 0.0
    for n in range(count):
        deg = 1 + n % MAX_WEIL_DEGREE
        res = weil_check(F, random_poly(F, deg, rng))
        if not res.irreducible:
            skipped += 1
            continue
        check.record(bool(res.bound_ok), poly=res.poly, count=res.count)
        if deg > 1:
            worst = max(worst, (res.count - F.q) ** 2 / ((deg - 1) ** 2 * F.q))
    return {'seed': seed, 'sampled': count, 'skipped_reducible': skipped,
            'worst_ratio': round(worst, 6)}, check


# -- cubic discriminants ----------------------------------------------------------------

def cubic_discriminant(F: FieldCtx, coeffs: Sequence[int]) -> int:
    """b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd for a x^3 + b x^2 + c x + d."""
    d, c, b, a = (int(x) for x in coeffs)
    mul = F.py_mul

    def m(*xs):
        acc = 1
        for x in xs:
            acc = mul[acc][x]
        return acc

    terms = [
        m(b, b, c, c),
        F.py_neg[m(_code(F, 4), a, c, c, c)],
        F.py_neg[m(_code(F, 4), b, b, b, d)],
        F.py_neg[m(_code(F, 27), a, a, d, d)],
        m(_code(F, 18), a, b, c, d),
    ]
    acc = 0
    for t in terms:
        acc = F.py_add[acc][t]
    return acc


def _validate_cubic(F: FieldCtx, coeffs: Sequence[int]) -> None:
    if len(coeffs) != 4 or int(coeffs[3]) == 0:
        raise LabError("expected a cubic with nonzero leading coefficient")
    for c in coeffs:
        if not F.in_subfield_code(int(c)):
            raise LabError("cubic coefficients must lie in F_q")


def discriminant_classify(F: FieldCtx, coeffs: Sequence[int]) -> str:
    """
    Zero discriminant: a multiple root; nonsquare: exactly one root in F_q;
    nonzero square: three distinct roots in F_q or none at all.
    """
    _validate_cubic(F, coeffs)
    disc = cubic_discriminant(F, coeffs)
    if disc == 0:
        return CUBIC_MULTIPLE
    chi = int(character_codes(F, np.array([disc]))[0])
    return CUBIC_THREE_ROOTS if chi == 1 else CUBIC_ONE_ROOT


def root_profile(F: FieldCtx, coeffs: Sequence[int]) -> Tuple[int, bool]:
    """(distinct roots in F_q, whether some root is repeated) by brute force."""
    _validate_cubic(F, coeffs)
    fq = F.subfield_codes
    roots = fq[poly_eval(F, coeffs, fq) == 0]
    deriv = [F.py_mul[_code(F, k)][int(coeffs[k])] for k in range(1, 4)]
    repeated = bool(np.any(poly_eval(F, deriv, roots) == 0)) if len(roots) else False
    return len(roots), repeated


def expected_class(roots: int, repeated: bool) -> str:
    if repeated:
        return CUBIC_MULTIPLE
    return CUBIC_ONE_ROOT if roots == 1 else CUBIC_THREE_ROOTS


def cubic_census(F: FieldCtx) -> CheckResult:
    """Every monic cubic over F_q: the discriminant class against its root profile."""
    check = CheckResult('cubic-discriminant')
    fq = F.subfield_codes.tolist()
    for b in fq:
        for c in fq:
            for d in fq:
                coeffs = [d, c, b, 1]
                roots, repeated = root_profile(F, coeffs)
                got = discriminant_classify(F, coeffs)
                check.record(got == expected_class(roots, repeated), coeffs=coeffs,
                             roots=roots, repeated=repeated, got=got)
    return check


def m_polynomial(F: FieldCtx, mu: int) -> List[int]:
    """z^3 - 3 mu z^2 + 3 theta z - mu theta."""
    th = F.theta
    three = _code(F, 3)
    return [F.py_neg[F.py_mul[mu][th]], F.py_mul[three][th],
            F.py_neg[F.py_mul[three][mu]], 1]


def m_discriminant_check(F: FieldCtx) -> CheckResult:
    """
    disc m(z, mu) = -108 theta (mu^2 - theta)^2 for every mu in F_q, and it is a
    nonzero square whenever q = 2 (mod 3).
    """
    check = CheckResult('m-discriminant')
    th = F.theta
    gate = F.q % 3 == 2
    coef = F.py_neg[F.py_mul[_code(F, 108)][th]]
    for mu in F.subfield_codes.tolist():
        disc = cubic_discriminant(F, m_polynomial(F, mu))
        diff = F.py_sub[F.py_mul[mu][mu]][th]
        closed = F.py_mul[coef][F.py_mul[diff][diff]]
        ok = disc == closed
        if gate:
            ok = ok and disc != 0 and int(character_codes(F, np.array([disc]))[0]) == 1
        check.record(ok, mu=mu, disc=disc, closed=closed)
    return check
