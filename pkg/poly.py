"""
poly.py — Polynomials over F_{q^2} and brute-force permutation checks
=====================================================================
Dense polynomials with field-element coefficients, evaluation (scalar and
vectorised), reduction modulo x^{q^2} - x, function tables on finite domains
and the permutation oracles built on them.

Text format for polynomials: comma-separated "exponent:coefficient" terms,
e.g. "28:1, 1:1, 0:[3,1]". A bare element (no colon) is a constant term.
"""

from dataclasses import dataclass

import numpy as np

from field import FieldCtx, FieldError


class PolyFormatError(ValueError):
    """Malformed polynomial text."""


@dataclass(frozen=True, eq=False)
class Poly:
    """Dense polynomial; coeffs[e] is the coefficient of x^e, no trailing zeros."""
    ctx: FieldCtx
    coeffs: tuple = ()

    def __post_init__(self):
        coeffs = [int(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    # ─── Constructors ─────────────────────────────

    @classmethod
    def from_terms(cls, ctx, terms):
        """Build from (exponent, coefficient) pairs or a dict; repeated exponents add up."""
        items = terms.items() if isinstance(terms, dict) else terms
        acc = {}
        for e, c in items:
            if e < 0:
                raise PolyFormatError(f"negative exponent {e}")
            acc[e] = ctx.add(acc.get(e, 0), c)
        coeffs = [0] * (max(acc) + 1 if acc else 0)
        for e, c in acc.items():
            coeffs[e] = c
        return cls(ctx, tuple(coeffs))

    @classmethod
    def constant(cls, ctx, c):
        return cls(ctx, (c,))

    @classmethod
    def monomial(cls, ctx, e, c=1):
        return cls.from_terms(ctx, [(e, c)])

    @classmethod
    def x(cls, ctx):
        return cls(ctx, (0, 1))

    # ─── Inspection ───────────────────────────────

    @property
    def degree(self):
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    def terms(self):
        return [(e, c) for e, c in enumerate(self.coeffs) if c]

    def coeff(self, e):
        return self.coeffs[e] if 0 <= e < len(self.coeffs) else 0

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ctx is other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.ctx), self.coeffs))

    def __repr__(self):
        return f"Poly({format_poly(self)})"

    # ─── Arithmetic ───────────────────────────────

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.ctx is not self.ctx:
                raise FieldError("polynomials over different fields")
            return other
        return Poly.constant(self.ctx, other)

    def __add__(self, other):
        other = self._coerce(other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(size, dtype=np.int64)
        b = np.zeros(size, dtype=np.int64)
        a[:len(self.coeffs)] = self.coeffs
        b[:len(other.coeffs)] = other.coeffs
        return Poly(self.ctx, tuple(self.ctx.vadd(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ctx, tuple(self.ctx.vneg(np.asarray(self.coeffs, dtype=np.int64))))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return Poly(self.ctx)
        ctx = self.ctx
        right = np.asarray(other.coeffs, dtype=np.int64)
        acc = np.zeros(len(self.coeffs) + len(right) - 1, dtype=np.int64)
        for e, c in self.terms():
            window = slice(e, e + len(right))
            acc[window] = ctx.vadd(acc[window], ctx.vmul(c, right))
        return Poly(ctx, tuple(acc))

    __rmul__ = __mul__

    def pow_mod(self, e):
        """self^e reduced modulo x^{q^2} - x after every product."""
        result = Poly.constant(self.ctx, 1)
        base = reduce_mod(self)
        while e > 0:
            if e & 1:
                result = reduce_mod(result * base)
            e >>= 1
            if e:
                base = reduce_mod(base * base)
        return result

    def compose_power(self, inner, e=1):
        """self(inner^e) reduced modulo x^{q^2} - x, built by Horner's rule."""
        arg = inner.pow_mod(e)
        result = Poly(self.ctx)
        for c in reversed(self.coeffs):
            result = reduce_mod(result * arg + c)
        return result


# ─── Evaluation ───────────────────────────────────────

def evaluate(P, x):
    """P(x) by Horner's rule; the constant term is taken with 0^0 = 1."""
    ctx = P.ctx
    acc = 0
    for c in reversed(P.coeffs):
        acc = ctx.add(ctx.mul(acc, x), c)
    return acc


def evaluate_many(P, X):
    """P on an array of elements, term by term with vpow."""
    ctx = P.ctx
    X = np.asarray(X, dtype=np.int64)
    out = np.zeros_like(X)
    for e, c in P.terms():
        out = ctx.vadd(out, ctx.vmul(c, ctx.vpow(X, e)))
    return out


def reduce_mod(P):
    """Reduce modulo x^{q^2} - x: exponents e >= q^2 become ((e-1) mod (q^2-1)) + 1."""
    ctx = P.ctx
    if len(P.coeffs) <= ctx.q_sq:
        return P
    return Poly.from_terms(ctx, [(e if e < ctx.q_sq else (e - 1) % ctx.order + 1, c)
                                 for e, c in P.terms()])


def equal_as_functions(P, Q):
    if P.ctx is not Q.ctx:
        raise FieldError("polynomials over different fields")
    everything = P.ctx.elements()
    return bool(np.array_equal(evaluate_many(P, everything), evaluate_many(Q, everything)))


# ─── Function tables ──────────────────────────────────

@dataclass(frozen=True, eq=False)
class FuncTable:
    """A map given by its values on a finite domain of distinct keys."""
    domain: np.ndarray
    values: np.ndarray
    ctx: FieldCtx = None

    def __post_init__(self):
        domain = np.asarray(self.domain, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.int64)
        if domain.shape != values.shape or domain.ndim != 1:
            raise ValueError(f"domain/values shape mismatch: {domain.shape} vs {values.shape}")
        order = np.argsort(domain, kind="stable")
        keys = domain[order]
        if len(keys) > 1 and (keys[1:] == keys[:-1]).any():
            raise ValueError("function table domain has repeated keys")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_keys", keys)

    def __len__(self):
        return len(self.domain)

    def lookup(self, xs, default=None):
        """Values at xs; keys outside the domain raise KeyError unless a default is given."""
        xs = np.asarray(xs, dtype=np.int64)
        pos = np.clip(np.searchsorted(self._keys, xs), 0, max(len(self._keys) - 1, 0))
        found = (self._keys[pos] == xs) if len(self._keys) else np.zeros(xs.shape, dtype=bool)
        if not found.all():
            if default is None:
                missing = xs[~found]
                raise KeyError(f"{int(missing.flat[0])} is outside the table domain")
            return np.where(found, self.values[self._order[pos]], default)
        return self.values[self._order[pos]]

    def __call__(self, x):
        return int(self.lookup(np.asarray([x]))[0])

    def image(self):
        return np.unique(self.values)

    def as_dict(self):
        return {int(k): int(v) for k, v in zip(self.domain, self.values)}


def func_table(P, domain=None):
    ctx = P.ctx
    domain = ctx.elements() if domain is None else np.asarray(domain, dtype=np.int64)
    return FuncTable(domain, evaluate_many(P, domain), ctx)


def _occupancy(size, values):
    seen = np.zeros(size, dtype=bool)
    seen[values] = True
    return seen


def is_permutation(T, ctx=None):
    """T is a bijection of F_{q^2}, checked with a q^2-slot occupancy array."""
    ctx = ctx or T.ctx
    if ctx is None:
        raise ValueError("is_permutation needs the field of the table")
    if len(T) != ctx.q_sq or T.domain.min() != 0 or T.domain.max() != ctx.q_sq - 1:
        raise ValueError(f"table domain is not the whole of F_{ctx.q}^2")
    return bool(_occupancy(ctx.q_sq, T.values).all())


def permutes_set(T):
    """T maps its domain bijectively onto itself."""
    return bool(np.array_equal(np.unique(T.values), T._keys))


def is_complete_permutation(P):
    """Both P(x) and P(x) + x permute F_{q^2}."""
    table = func_table(P)
    if not is_permutation(table):
        return False
    shifted = FuncTable(table.domain, P.ctx.vadd(table.values, table.domain), P.ctx)
    return is_permutation(shifted)


# ─── Text format ──────────────────────────────────────

def _split_terms(text):
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth:
        raise PolyFormatError(f"unbalanced brackets in {text!r}")
    parts.append(text[start:])
    return [part.strip() for part in parts if part.strip()]


def parse_poly(ctx, text):
    terms = []
    for piece in _split_terms(str(text)):
        exp_text, sep, coeff_text = piece.partition(":")
        if not sep:
            exp_text, coeff_text = "0", piece
        try:
            e = int(exp_text.strip())
        except ValueError:
            raise PolyFormatError(f"bad exponent in term {piece!r}") from None
        try:
            terms.append((e, ctx.parse(coeff_text)))
        except FieldError as exc:
            raise PolyFormatError(f"bad coefficient in term {piece!r}: {exc}") from None
    return Poly.from_terms(ctx, terms)


def format_poly(P):
    if P.is_zero:
        return "0:0"
    return ", ".join(f"{e}:{P.ctx.format(c)}" for e, c in reversed(P.terms()))
