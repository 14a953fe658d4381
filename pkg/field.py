"""
field.py — Exact arithmetic in F_q and F_{q^2}
===============================================
Table-driven arithmetic over F_{q^2}, q = p^m, with a deterministic modulus and
primitive element ξ.

Elements are packed canonical coefficient vectors over the prime field:
    [c0, c1, ..., c_{2m-1}]  <->  c0 + c1*p + ... + c_{2m-1}*p^(2m-1)
so the prime field F_p is exactly the integers 0..p-1 and two elements are
equal iff their packed integers are equal.

Multiplication goes through log/exp tables, addition through the Zech table
(1 + ξ^k = ξ^Z(k)). Every scalar operation has a numpy counterpart (vadd,
vmul, vpow, ...) that works on whole arrays of elements; the family builders
and permutation oracles only use those.
"""

import functools
import itertools
import logging
import re
from dataclasses import dataclass
from math import gcd

import numpy as np
from sympy import factorint, isprime, primefactors
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p, gf_mul, gf_pow_mod, gf_rem

logger = logging.getLogger(__name__)

# ─── Config ───────────────────────────────────────────
DEFAULT_TABLE_BOUND = 1 << 16
LOG_ZERO = -1        # log_table entry for 0
ZECH_NONE = -1       # zech_table entry when 1 + ξ^k = 0

ELEMENT_POWER_RE = re.compile(r"^(?:xi|g)(?:\^(-?\d+))?$")
FIELD_SPEC_RE = re.compile(r"^\s*(\d+)\s*(?:\^\s*(\d+))?\s*$")

# An element of F_{q^2}: its packed canonical coefficient vector.
FieldElem = int


class FieldError(ValueError):
    """Invalid field parameters or element text."""


class FieldConstructionError(RuntimeError):
    """No irreducible modulus or generator found; cannot happen for valid input."""


# ─── Polynomials over F_p (sympy galoistools lists, high degree first) ──

def _to_gf(vec):
    coeffs = [int(c) for c in reversed(vec)]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    return coeffs


def _from_gf(poly, n):
    vec = [0] * n
    for i, c in enumerate(reversed(poly)):
        vec[i] = int(c)
    return vec


def find_modulus(p, degree):
    """
    Lexicographically smallest monic irreducible of the given degree over F_p.
    Coefficient tuples (c0, c1, ..., c_{degree-1}) are compared low-degree-first.
    Returns the full low-first coefficient tuple, leading 1 included.
    """
    for tail in itertools.product(range(p), repeat=degree):
        if tail[0] == 0:
            continue  # divisible by x
        if gf_irreducible_p([1] + [int(c) for c in reversed(tail)], p, ZZ):
            return tuple(tail) + (1,)
    raise FieldConstructionError(f"no irreducible of degree {degree} over F_{p}")


def find_primitive(p, modulus):
    """Smallest coefficient vector (same ordering as the modulus) generating F*."""
    n = len(modulus) - 1
    order = p ** n - 1
    f = _to_gf(modulus)
    cofactors = [order // ell for ell in primefactors(order)]
    for vec in itertools.product(range(p), repeat=n):
        g = _to_gf(vec)
        if not g:
            continue
        if all(_to_gf(_from_gf(gf_pow_mod(g, e, f, p, ZZ), n)) != [1] for e in cofactors):
            return vec
    raise FieldConstructionError(f"no generator found modulo {modulus}")


def _mul_matrix(vec, f, p, n):
    """Row i holds x^i * vec mod f, so (v @ M) % p is v * vec."""
    g = _to_gf(vec)
    rows = []
    for i in range(n):
        rows.append(_from_gf(gf_rem(gf_mul([1] + [0] * i, g, p, ZZ), f, p, ZZ), n))
    return np.array(rows, dtype=np.int64)


def _frozen(arr):
    arr.setflags(write=False)
    return arr


# ─── Field context ────────────────────────────────────

@dataclass(frozen=True, eq=False)
class FieldCtx:
    """
    Immutable description of F_{q^2} with its subfield F_q.

    exp_table[k] = ξ^k for 0 <= k < q^2 - 1; log_table inverts it on nonzero
    elements (log_table[0] = LOG_ZERO); zech_table[k] = Z(k) with
    1 + ξ^k = ξ^Z(k), ZECH_NONE when 1 + ξ^k = 0.
    """
    p: int
    m: int
    q: int
    q_sq: int
    modulus: tuple
    xi: int
    exp_table: np.ndarray
    log_table: np.ndarray
    zech_table: np.ndarray
    neg_table: np.ndarray
    frob_table: np.ndarray
    digits: np.ndarray
    weights: np.ndarray

    @property
    def order(self):
        """Order of the multiplicative group, q^2 - 1."""
        return self.q_sq - 1

    @property
    def degree(self):
        return 2 * self.m

    @property
    def label(self):
        return str(self.p) if self.m == 1 else f"{self.p}^{self.m}"

    def __repr__(self):
        return f"FieldCtx(F_{self.q}^2, modulus={list(self.modulus)}, xi={self.format(self.xi)})"

    # ─── Elements ─────────────────────────────────

    def elements(self):
        return np.arange(self.q_sq, dtype=np.int64)

    def vector(self, x):
        return tuple(int(c) for c in self.digits[x])

    def from_vector(self, vec):
        if len(vec) > self.degree:
            raise FieldError(f"vector {list(vec)} longer than {self.degree}")
        return int(sum((int(c) % self.p) * self.p ** i for i, c in enumerate(vec)))

    def elem(self, value):
        """Coerce an int (prime-field residue), coefficient list or element text."""
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, (list, tuple)):
            return self.from_vector(value)
        return int(value) % self.p

    def parse(self, text):
        text = text.strip()
        if re.fullmatch(r"-?\d+", text):
            return int(text) % self.p
        if text.startswith("[") and text.endswith("]"):
            body = text[1:-1].strip()
            try:
                vec = [int(tok) for tok in body.split(",")] if body else []
            except ValueError:
                raise FieldError(f"bad element text: {text!r}") from None
            return self.from_vector(vec)
        match = ELEMENT_POWER_RE.match(text)
        if match:
            return self.exp(int(match.group(1) or 1))
        raise FieldError(f"bad element text: {text!r}")

    def format(self, x):
        vec = self.vector(x)
        if not any(vec[1:]):
            return str(vec[0])
        return "[" + ",".join(str(c) for c in vec) + "]"

    # ─── Scalar arithmetic ────────────────────────

    def log(self, x):
        if x == 0:
            raise FieldError("log of zero")
        return int(self.log_table[x])

    def exp(self, k):
        return int(self.exp_table[k % self.order])

    def add(self, x, y):
        if x == 0:
            return int(y)
        if y == 0:
            return int(x)
        lx = int(self.log_table[x])
        z = int(self.zech_table[(int(self.log_table[y]) - lx) % self.order])
        if z == ZECH_NONE:
            return 0
        return int(self.exp_table[(lx + z) % self.order])

    def add_by_vectors(self, x, y):
        return int(((self.digits[x] + self.digits[y]) % self.p) @ self.weights)

    def neg(self, x):
        return int(self.neg_table[x])

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        if x == 0 or y == 0:
            return 0
        return int(self.exp_table[(int(self.log_table[x]) + int(self.log_table[y])) % self.order])

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError(f"division by zero in F_{self.q}^2")
        return int(self.exp_table[(-int(self.log_table[x])) % self.order])

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def pow(self, x, e):
        """x^e with 0^0 = 1; negative e inverts first."""
        if e < 0:
            return self.pow(self.inv(x), -e)
        if e == 0:
            return 1
        if x == 0:
            return 0
        return int(self.exp_table[(int(self.log_table[x]) * (e % self.order)) % self.order])

    def arith(self, kind, x, y):
        ops = {"add": self.add, "sub": self.sub, "mul": self.mul, "div": self.div}
        if kind not in ops:
            raise FieldError(f"unknown operation {kind!r}")
        return ops[kind](x, y)

    def frobenius(self, x):
        """x^q, the conjugation of F_{q^2} over F_q."""
        return int(self.frob_table[x])

    def norm(self, x):
        return self.mul(x, self.frobenius(x))

    def trace(self, x):
        return self.add(x, self.frobenius(x))

    def in_subfield(self, x):
        return int(self.frob_table[x]) == int(x)

    # ─── Vectorised arithmetic ────────────────────

    def vmul(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64))
        res = self.exp_table[(self.log_table[X] + self.log_table[Y]) % self.order]
        return np.where((X == 0) | (Y == 0), 0, res)

    def vadd(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64))
        lx = self.log_table[X]
        z = self.zech_table[(self.log_table[Y] - lx) % self.order]
        res = np.where(z == ZECH_NONE, 0, self.exp_table[(lx + z) % self.order])
        res = np.where(X == 0, Y, res)
        return np.where(Y == 0, X, res)

    def vadd_by_vectors(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64))
        return ((self.digits[X] + self.digits[Y]) % self.p) @ self.weights

    def vneg(self, X):
        return self.neg_table[np.asarray(X, dtype=np.int64)]

    def vsub(self, X, Y):
        return self.vadd(X, self.vneg(Y))

    def vpow(self, X, e):
        X = np.asarray(X, dtype=np.int64)
        if e < 0:
            raise FieldError("vpow takes a non-negative exponent")
        if e == 0:
            return np.ones_like(X)
        res = self.exp_table[(self.log_table[X] * (e % self.order)) % self.order]
        return np.where(X == 0, 0, res)

    def vfrob(self, X):
        return self.frob_table[np.asarray(X, dtype=np.int64)]

    def vnorm(self, X):
        return self.vmul(X, self.vfrob(X))

    def vtrace(self, X):
        return self.vadd(X, self.vfrob(X))


# ─── Construction ─────────────────────────────────────

def build_field(p, m=1, bound=DEFAULT_TABLE_BOUND):
    """Build F_{q^2}, q = p^m. Same (p, m) always gives the same context object."""
    p, m = int(p), int(m)
    if not isprime(p):
        raise FieldError(f"{p} is not prime")
    if m < 1:
        raise FieldError(f"extension degree must be positive, got {m}")
    q_sq = p ** (2 * m)
    if q_sq > bound:
        raise FieldError(f"F_{p ** m}^2 has {q_sq} elements, over the table bound {bound}")
    return _tabulate(p, m)


@functools.lru_cache(maxsize=None)
def _tabulate(p, m):
    n = 2 * m
    q = p ** m
    q_sq = q * q
    order = q_sq - 1

    modulus = find_modulus(p, n)
    xi_vec = find_primitive(p, modulus)
    f = _to_gf(modulus)
    weights = p ** np.arange(n, dtype=np.int64)

    # powers of ξ by doubling: block [k, 2k) = block [0, k) * ξ^k
    vecs = np.zeros((order, n), dtype=np.int64)
    vecs[0, 0] = 1
    step = _mul_matrix(xi_vec, f, p, n)
    filled = 1
    while filled < order:
        take = min(filled, order - filled)
        power = (vecs[filled - 1] @ step) % p
        vecs[filled:filled + take] = (vecs[:take] @ _mul_matrix(power, f, p, n)) % p
        filled += take

    exp_table = vecs @ weights
    log_table = np.full(q_sq, LOG_ZERO, dtype=np.int64)
    log_table[exp_table] = np.arange(order, dtype=np.int64)
    if (log_table[1:] == LOG_ZERO).any() or (exp_table == 0).any():
        raise FieldConstructionError(f"{list(xi_vec)} does not generate F_{q}^2")

    one_plus = vecs.copy()
    one_plus[:, 0] = (one_plus[:, 0] + 1) % p
    zech_table = log_table[one_plus @ weights]

    digits = (np.arange(q_sq, dtype=np.int64)[:, None] // weights[None, :]) % p
    neg_table = ((p - digits) % p) @ weights
    frob_table = exp_table[(log_table * q) % order]
    frob_table[0] = 0

    ctx = FieldCtx(
        p=p, m=m, q=q, q_sq=q_sq,
        modulus=tuple(int(c) for c in modulus),
        xi=int(np.asarray(xi_vec, dtype=np.int64) @ weights),
        exp_table=_frozen(exp_table),
        log_table=_frozen(log_table),
        zech_table=_frozen(zech_table),
        neg_table=_frozen(neg_table),
        frob_table=_frozen(frob_table),
        digits=_frozen(digits),
        weights=_frozen(weights),
    )
    logger.debug("built %r (%d table entries)", ctx, q_sq)
    return ctx


def parse_field_spec(text):
    """'13' -> (13, 1), '2^3' -> (2, 3); a bare prime power such as '4' is accepted too."""
    match = FIELD_SPEC_RE.match(str(text))
    if not match:
        raise FieldError(f"bad field spec {text!r}; expected p or p^m")
    base, exp = int(match.group(1)), int(match.group(2) or 1)
    if base < 2:
        raise FieldError(f"bad field spec {text!r}")
    factors = factorint(base)
    if len(factors) != 1:
        raise FieldError(f"{base} is not a prime power")
    (p, k), = factors.items()
    return p, k * exp


def field_from_spec(text, bound=DEFAULT_TABLE_BOUND):
    p, m = parse_field_spec(text)
    return build_field(p, m, bound)


# ─── Structural subsets ───────────────────────────────

def subfield(ctx):
    """F_q inside F_{q^2}: the fixed points of x -> x^q, in canonical order."""
    fixed = np.nonzero(ctx.frob_table == ctx.elements())[0]
    return [int(x) for x in fixed]


def roots_of_unity(ctx, n):
    """
    U_n = {ξ^(k(q^2-1)/n) : k = 0..n-1}, listed by k.

    The list follows successive powers of the generator ξ^((q^2-1)/n), so it
    starts at 1 and is not sorted by packed value. Sort it for display.
    """
    if n < 1 or ctx.order % n:
        raise FieldError(f"{n} does not divide q^2 - 1 = {ctx.order}")
    step = ctx.order // n
    return [int(ctx.exp_table[k * step]) for k in range(n)]


def verify_zech(ctx, rows=None):
    """Zech addition equals vector addition on every pair (x, y) with x in rows."""
    everything = ctx.elements()
    for x in (everything if rows is None else rows):
        if not np.array_equal(ctx.vadd(x, everything), ctx.vadd_by_vectors(x, everything)):
            return False
    return True


def multiplicative_order(ctx, x):
    if x == 0:
        raise FieldError("zero has no multiplicative order")
    return ctx.order // gcd(ctx.order, ctx.log(x))
