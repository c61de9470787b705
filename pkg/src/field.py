"""Exact arithmetic in the tower F_p <= F_q <= F_{q^2}.

Elements of F_{q^2} are encoded as integers 0..q^2-1: the integer
sum(c_i * p**i) stands for the residue class of sum(c_i * x**i) modulo the
defining polynomial. All arithmetic runs through precomputed numpy tables,
so the same tables serve scalar code and vectorized array code.
"""
import logging
from functools import lru_cache
from math import gcd
from typing import Iterator, List, Sequence, Union

import numpy as np
import sympy

from .errors import FieldError

logger = logging.getLogger('baersaxl.field')

# Smallest field size the subplane action is studied for
MIN_Q = 7


def _poly_mulmod(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], p: int) -> List[int]:
    """Multiply little-endian coefficient lists modulo a monic polynomial."""
    n = len(modulus) - 1
    prod = [0] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for k in range(2 * n - 2, n - 1, -1):
        c = prod[k] % p
        if c:
            for j in range(n + 1):
                prod[k - n + j] -= c * modulus[j]
    return [c % p for c in prod[:n]]


def _poly_powmod(a: Sequence[int], e: int, modulus: Sequence[int], p: int) -> List[int]:
    n = len(modulus) - 1
    result = [1] + [0] * (n - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, modulus, p)
        base = _poly_mulmod(base, base, modulus, p)
        e >>= 1
    return result


def _digits(code: int, p: int, n: int) -> List[int]:
    out = []
    for _ in range(n):
        out.append(code % p)
        code //= p
    return out


def least_irreducible(p: int, degree: int) -> List[int]:
    """
    Return the lexicographically least monic irreducible polynomial of the given
    degree over F_p, as little-endian coefficients (leading 1 included).

    Candidates x^n + c_{n-1}x^{n-1} + ... + c_0 are ordered by the tuple
    (c_{n-1}, ..., c_0), which is the order of the integer sum(c_i p^i).
    """
    x = sympy.Symbol('x')
    for k in range(p ** degree):
        coeffs = _digits(k, p, degree)
        if coeffs[0] == 0:
            continue
        poly = sympy.Poly(list(reversed(coeffs + [1])), x, modulus=p)
        if poly.is_irreducible:
            return coeffs + [1]
    raise FieldError(f"no irreducible polynomial of degree {degree} over F_{p}")


class FieldCtx:
    """
    The field F_{q^2} together with its subfield F_q and fixed generators.

    Tables (numpy, indexed by element codes):
        ADD, SUB, MUL  q^2 x q^2
        NEG, INV, CONJ, FROB, LOG, EXP
    """

    def __init__(self, p: int, m: int):
        if p == 2 or not sympy.isprime(p):
            raise FieldError(f"p must be an odd prime, got {p}")
        if m < 1:
            raise FieldError(f"m must be a positive integer, got {m}")
        q = p ** m
        if q < MIN_Q:
            raise FieldError(f"q = {q} is below the supported minimum {MIN_Q}")

        self.p = p
        self.m = m
        self.q = q
        self.order = q * q
        self.degree = 2 * m
        self.d = gcd(3, q + 1)
        self.modulus = least_irreducible(p, self.degree)

        self._build_tables()
        self.xi = int(self.EXP[1])
        self.theta = int(self.EXP[q + 1])
        self.i_elem = int(self.EXP[(q + 1) // 2])
        self.subfield_codes = np.sort(np.array(
            [0] + [int(self.EXP[k * (q + 1)]) for k in range(q - 1)], dtype=np.int64))
        self._subfield_mask = np.zeros(self.order, dtype=bool)
        self._subfield_mask[self.subfield_codes] = True

        logger.debug("built F_%d with modulus %s, xi=%d", self.order, self.modulus, self.xi)

    def _build_tables(self) -> None:
        p, n, Q = self.p, self.degree, self.order
        powers = p ** np.arange(n, dtype=np.int64)
        digits = (np.arange(Q, dtype=np.int64)[:, None] // powers[None, :]) % p

        xi = self._find_primitive()
        exp = np.zeros(Q - 1, dtype=np.int64)
        cur = [1] + [0] * (n - 1)
        xi_poly = _digits(xi, p, n)
        for k in range(Q - 1):
            exp[k] = sum(c * p ** i for i, c in enumerate(cur))
            cur = _poly_mulmod(cur, xi_poly, self.modulus, p)
        log = np.full(Q, -1, dtype=np.int64)
        log[exp] = np.arange(Q - 1)

        la = log[:, None]
        lb = log[None, :]
        mul = exp[(la + lb) % (Q - 1)]
        mul[0, :] = 0
        mul[:, 0] = 0

        add = ((digits[:, None, :] + digits[None, :, :]) % p) @ powers
        neg = ((-digits) % p) @ powers
        sub = add[:, neg]

        inv = np.zeros(Q, dtype=np.int64)
        inv[1:] = exp[(-log[1:]) % (Q - 1)]
        conj = np.zeros(Q, dtype=np.int64)
        conj[1:] = exp[(log[1:] * self.q) % (Q - 1)]
        frob = np.zeros(Q, dtype=np.int64)
        frob[1:] = exp[(log[1:] * p) % (Q - 1)]

        self.DIGITS = digits
        self.EXP = exp
        self.LOG = log
        self.ADD = add
        self.SUB = sub
        self.MUL = mul
        self.NEG = neg
        self.INV = inv
        self.CONJ = conj
        self.FROB = frob

        # Python-side copies for scalar hot loops
        self.py_add = add.tolist()
        self.py_sub = sub.tolist()
        self.py_mul = mul.tolist()
        self.py_neg = neg.tolist()
        self.py_inv = inv.tolist()
        self.py_conj = conj.tolist()

    def _find_primitive(self) -> int:
        """Smallest element code whose multiplicative order is q^2 - 1."""
        p, n, Q = self.p, self.degree, self.order
        one = [1] + [0] * (n - 1)
        cofactors = [(Q - 1) // r for r in sympy.primefactors(Q - 1)]
        for code in range(2, Q):
            g = _digits(code, p, n)
            if all(_poly_powmod(g, e, self.modulus, p) != one for e in cofactors):
                return code
        raise FieldError("no primitive element found")

    # -- element construction -------------------------------------------------

    def element(self, code: int) -> 'FieldElement':
        if not 0 <= code < self.order:
            raise FieldError(f"code {code} outside F_{self.order}")
        return FieldElement(self, int(code))

    def from_int(self, k: int) -> 'FieldElement':
        """Embed an integer through the prime field."""
        return FieldElement(self, k % self.p)

    def from_coeffs(self, coeffs: Sequence[int]) -> 'FieldElement':
        """Build an element from little-endian coefficients (reduced mod p)."""
        if len(coeffs) > self.degree:
            raise FieldError(f"expected at most {self.degree} coefficients")
        return FieldElement(self, sum((c % self.p) * self.p ** i for i, c in enumerate(coeffs)))

    def exp(self, k: int) -> 'FieldElement':
        """xi**k."""
        return FieldElement(self, int(self.EXP[k % (self.order - 1)]))

    def elements(self) -> Iterator['FieldElement']:
        for code in range(self.order):
            yield FieldElement(self, code)

    def subfield_elements(self) -> Iterator['FieldElement']:
        for code in self.subfield_codes:
            yield FieldElement(self, int(code))

    @property
    def zero(self) -> 'FieldElement':
        return FieldElement(self, 0)

    @property
    def one(self) -> 'FieldElement':
        return FieldElement(self, 1)

    @property
    def epsilon(self) -> int:
        """+1 or -1 with q = epsilon (mod 4)."""
        return 1 if self.q % 4 == 1 else -1

    # -- code-level helpers (ints or numpy arrays) ----------------------------

    def in_subfield_code(self, codes):
        return self._subfield_mask[codes]

    def sqrt_norm_preimage(self, a: int) -> int:
        """Return lambda with lambda^(q+1) = a for a nonzero a in F_q."""
        if a == 0 or not self._subfield_mask[a]:
            raise FieldError("norm preimage needs a nonzero element of F_q")
        return int(self.EXP[int(self.LOG[a]) // (self.q + 1)])

    def power_code(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise FieldError("zero has no inverse")
            return 0 if e else 1
        return int(self.EXP[(int(self.LOG[a]) * e) % (self.order - 1)])

    def dot(self, xs, ys):
        """sum_i xs[..., i] * ys[..., i] over the last axis, with broadcasting."""
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        prods = self.MUL[xs, ys]
        acc = prods[..., 0]
        for i in range(1, prods.shape[-1]):
            acc = self.ADD[acc, prods[..., i]]
        return acc

    def __repr__(self):
        return f"FieldCtx(p={self.p}, m={self.m}, q={self.q})"


class FieldElement:
    """An element of F_{q^2}; F_q elements are the ones fixed by conjugation."""

    __slots__ = ('ctx', 'code')

    def __init__(self, ctx: FieldCtx, code: int):
        self.ctx = ctx
        self.code = code

    def _coerce(self, other: Union['FieldElement', int]) -> int:
        if isinstance(other, FieldElement):
            if other.ctx is not self.ctx:
                raise FieldError("elements belong to different fields")
            return other.code
        if isinstance(other, (int, np.integer)):
            return int(other) % self.ctx.p
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    @property
    def coeffs(self) -> List[int]:
        """Little-endian coefficient vector of length 2m."""
        return [int(c) for c in self.ctx.DIGITS[self.code]]

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.py_add[self.code][o])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.py_sub[self.code][o])

    def __rsub__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.py_sub[o][self.code])

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.py_mul[self.code][o])

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise FieldError("division by zero")
        return FieldElement(self.ctx, self.ctx.py_mul[self.code][self.ctx.py_inv[o]])

    def __rtruediv__(self, other):
        return FieldElement(self.ctx, self._coerce(other)) / self

    def __neg__(self):
        return FieldElement(self.ctx, self.ctx.py_neg[self.code])

    def __pow__(self, e: int):
        return FieldElement(self.ctx, self.ctx.power_code(self.code, e))

    def inverse(self) -> 'FieldElement':
        if self.code == 0:
            raise FieldError("zero has no inverse")
        return FieldElement(self.ctx, self.ctx.py_inv[self.code])

    def conj(self) -> 'FieldElement':
        return FieldElement(self.ctx, self.ctx.py_conj[self.code])

    def norm(self) -> 'FieldElement':
        return self * self.conj()

    def trace(self) -> 'FieldElement':
        return self + self.conj()

    def in_subfield(self) -> bool:
        return bool(self.ctx._subfield_mask[self.code])

    def is_zero(self) -> bool:
        return self.code == 0

    def multiplicative_order(self) -> int:
        if self.code == 0:
            raise FieldError("zero has no multiplicative order")
        n = self.ctx.order - 1
        return n // gcd(n, int(self.ctx.LOG[self.code]))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.ctx is other.ctx and self.code == other.code
        if isinstance(other, (int, np.integer)):
            return self.code == int(other) % self.ctx.p
        return NotImplemented

    def __hash__(self):
        return hash((id(self.ctx), self.code))

    def __bool__(self):
        return self.code != 0

    def __int__(self):
        return self.code

    def __repr__(self):
        return f"FieldElement({self.coeffs})"


@lru_cache(maxsize=None)
def make_field(p: int, m: int) -> FieldCtx:
    """Build (or fetch) the field context for q = p^m."""
    return FieldCtx(p, m)


def conjugate(x: FieldElement) -> FieldElement:
    """x -> x^q."""
    return x.conj()


def norm(x: FieldElement) -> FieldElement:
    return x.norm()


def trace(x: FieldElement) -> FieldElement:
    return x.trace()


def in_subfield(x: FieldElement) -> bool:
    return x.in_subfield()


def is_cube(x: FieldElement) -> bool:
    """x^((q^2-1)/gcd(3,q^2-1)) == 1."""
    if x.code == 0:
        raise FieldError("is_cube is undefined at 0")
    g = gcd(3, x.ctx.order - 1)
    return int(x.ctx.LOG[x.code]) % g == 0


def is_cube_shortcut(x: FieldElement) -> bool:
    """Cube test that treats every element as a cube when d = 1."""
    if x.code == 0:
        raise FieldError("is_cube is undefined at 0")
    return x.ctx.d == 1 or is_cube(x)


def quadratic_character(x: FieldElement) -> int:
    """Legendre-type character on F_q: +1 square, -1 nonsquare, 0 at zero."""
    if not x.in_subfield():
        raise FieldError("quadratic character is defined on F_q only")
    if x.code == 0:
        return 0
    k = int(x.ctx.LOG[x.code]) // (x.ctx.q + 1)
    return 1 if k % 2 == 0 else -1
