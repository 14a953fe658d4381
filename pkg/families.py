"""
families.py — The polynomial family f and its reduced maps
==========================================================
    f(x) = θ(x)^r φ(θ(x)^m) + u x^q + v x,   θ(x) = a x^q + b x + c,  m = (q^2-1)/d

Builds f, the image S of θ, the reduced map g on S, the map h on U_n, the
λ-partition of S, the decomposition b = ξ^{(q-1)i} a^q, c = ξ^{-i} e, the
linearized form for d | q+1, and the commutative diagram relating f and g.
All tables are computed with the vectorised field operations.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from math import gcd

import numpy as np
from sympy import divisors

from agw import Diagram
from field import FieldError
from poly import FuncTable, Poly, evaluate, evaluate_many, format_poly, parse_poly, reduce_mod

logger = logging.getLogger(__name__)

# ─── Verdicts ─────────────────────────────────────────
PP = "PP"
NOT_PP = "NotPP"
NOT_APPLICABLE = "NotApplicable"

VERDICTS = (PP, NOT_PP, NOT_APPLICABLE)

ELEMENT_FIELDS = ("a", "b", "c", "u", "v")


class ParamsError(ValueError):
    """Parameter tuple outside the family (d ∤ q^2-1, r < 1, ...)."""


class HypothesisError(ValueError):
    """An operation was called on parameters that miss its hypotheses."""

    def __init__(self, clause, what=""):
        super().__init__(f"{what or 'hypotheses'} not satisfied: {clause}")
        self.clause = clause


def fold_phi(phi, modulus):
    """Reduce exponents of φ modulo the given modulus (the values only matter on {0} ∪ U_modulus)."""
    return Poly.from_terms(phi.ctx, [(e % modulus, c) for e, c in phi.terms()])


# ─── Parameters ───────────────────────────────────────

@dataclass(frozen=True, eq=False)
class FamilyParams:
    ctx: object
    a: int
    b: int
    c: int
    u: int
    v: int
    r: int
    d: int
    phi: Poly

    def __post_init__(self):
        if self.r < 1:
            raise ParamsError(f"r must be positive, got {self.r}")
        if self.d < 1 or self.ctx.order % self.d:
            raise ParamsError(f"d = {self.d} does not divide q^2 - 1 = {self.ctx.order}")
        if self.phi.ctx is not self.ctx:
            raise ParamsError("phi is over a different field")
        for name in ELEMENT_FIELDS:
            value = int(getattr(self, name))
            if not 0 <= value < self.ctx.q_sq:
                raise ParamsError(f"{name} = {value} is not an element of F_{self.ctx.q}^2")
            object.__setattr__(self, name, value)

    @property
    def m(self):
        """(q^2 - 1)/d, the exponent inside φ."""
        return self.ctx.order // self.d

    @cached_property
    def phi_normal(self):
        return fold_phi(self.phi, self.d)

    @cached_property
    def derived(self):
        return derive_coeffs(self)

    @cached_property
    def decomposition(self):
        if self.a == 0 or self.b == 0:
            return None
        return decompose(self.ctx, self.a, self.b, self.c)

    def with_changes(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        fmt = self.ctx.format
        out = {"field": self.ctx.label}
        out.update({name: fmt(getattr(self, name)) for name in ELEMENT_FIELDS})
        out.update({"r": self.r, "d": self.d, "phi": format_poly(self.phi)})
        return out

    @classmethod
    def from_dict(cls, ctx, data):
        """Element fields accept element text or ints; phi accepts polynomial text."""
        try:
            values = {name: ctx.elem(data.get(name, 0)) for name in ELEMENT_FIELDS}
            phi = data.get("phi", "0:1")
            phi = phi if isinstance(phi, Poly) else parse_poly(ctx, str(phi))
            return cls(ctx=ctx, r=int(data.get("r", 1)), d=int(data.get("d", 1)), phi=phi, **values)
        except FieldError as exc:
            raise ParamsError(str(exc)) from None


@dataclass(frozen=True)
class DerivedCoeffs:
    """
    A = bu - av, B = au^q - bv^q, C = uv_gap * c, uv_gap = u^{q+1} - v^{q+1},
    m = (q^2-1)/d, n = d/gcd(q+1, d), delta = (b^q/a)^{(q+1)/d} when d | q+1.
    W = A^{1-r} B^{qr} (None when A = 0 and r >= 2) and K = B + W.
    """
    A: int
    B: int
    C: int
    m: int
    n: int
    uv_gap: int
    delta: int = None
    W: int = None
    K: int = None

    def to_dict(self, ctx):
        fmt = lambda x: None if x is None else ctx.format(x)  # noqa: E731
        return {"A": fmt(self.A), "B": fmt(self.B), "C": fmt(self.C), "m": self.m, "n": self.n,
                "uv_gap": fmt(self.uv_gap), "delta": fmt(self.delta), "W": fmt(self.W), "K": fmt(self.K)}


def twist(ctx, A, B, r):
    """A^{1-r} B^{qr}, with A^0 = 1; None when A = 0 and r >= 2."""
    if r == 1:
        return ctx.frobenius(B)
    if A == 0:
        return None
    return ctx.mul(ctx.pow(ctx.inv(A), r - 1), ctx.pow(B, ctx.q * r))


def derive_coeffs(P):
    ctx, q = P.ctx, P.ctx.q
    a, b, c, u, v = P.a, P.b, P.c, P.u, P.v
    A = ctx.sub(ctx.mul(b, u), ctx.mul(a, v))
    B = ctx.sub(ctx.mul(a, ctx.frobenius(u)), ctx.mul(b, ctx.frobenius(v)))
    uv_gap = ctx.sub(ctx.norm(u), ctx.norm(v))
    delta = None
    if (q + 1) % P.d == 0 and a != 0:
        delta = ctx.pow(ctx.div(ctx.frobenius(b), a), (q + 1) // P.d)
    W = twist(ctx, A, B, P.r)
    return DerivedCoeffs(
        A=A, B=B, C=ctx.mul(uv_gap, c),
        m=ctx.order // P.d, n=P.d // gcd(q + 1, P.d),
        uv_gap=uv_gap, delta=delta, W=W,
        K=None if W is None else ctx.add(B, W),
    )


# ─── Decomposition of (a, b, c) ───────────────────────

@dataclass(frozen=True)
class Decomposition:
    """b = ξ^{(q-1)i} a^q and c = ξ^{-i} e with e in F_q; i is the least residue mod q+1."""
    i: int
    e: int


def decompose(ctx, a, b, c):
    if a == 0 or b == 0:
        raise FieldError("decompose needs a and b nonzero")
    q = ctx.q
    if ctx.norm(a) != ctx.norm(b):
        return None
    L = ctx.log(ctx.div(b, ctx.frobenius(a)))
    if L % (q - 1):
        return None
    i = (L // (q - 1)) % (q + 1)
    if ctx.mul(a, ctx.frobenius(c)) != ctx.mul(ctx.frobenius(b), c):
        return None
    e = ctx.mul(ctx.exp(i), c)
    return Decomposition(i=i, e=e)


# ─── Hypothesis clauses shared by the builders ────────

def theta_clauses(P):
    """(name, holds) for ab != 0, a^{q+1} = b^{q+1}, ac^q = b^q c, in that order."""
    ctx = P.ctx
    yield "ab != 0", P.a != 0 and P.b != 0
    yield "a^(q+1) = b^(q+1)", ctx.norm(P.a) == ctx.norm(P.b)
    yield "a c^q = b^q c", ctx.mul(P.a, ctx.frobenius(P.c)) == ctx.mul(ctx.frobenius(P.b), P.c)


def b_shape_holds(P):
    """i ≡ 0 mod gcd(q+1, d), i.e. b = ξ^{(q-1)jd/n} a^q."""
    dec = P.decomposition
    return dec is not None and dec.i % gcd(P.ctx.q + 1, P.d) == 0


def ruv_holds(P):
    """(u^{q+1} = v^{q+1} and gcd(r, m) = 1) or (u^{q+1} != v^{q+1} and r = 1)."""
    if P.derived.uv_gap == 0:
        return gcd(P.r, P.m) == 1
    return P.r == 1


def reduction_clauses(P):
    yield from theta_clauses(P)
    yield "b = xi^((q-1)jd/n) a^q", b_shape_holds(P)
    yield "gcd(r, m) = 1 if u^(q+1) = v^(q+1), else r = 1", ruv_holds(P)


def first_failure(clauses):
    for name, holds in clauses:
        if not holds:
            return name
    return None


def _require(clauses, what):
    failed = first_failure(clauses)
    if failed is not None:
        raise HypothesisError(failed, what)


# ─── Tables ───────────────────────────────────────────

def theta_values(P, X=None):
    ctx = P.ctx
    X = ctx.elements() if X is None else X
    return ctx.vadd(ctx.vadd(ctx.vmul(P.a, ctx.vfrob(X)), ctx.vmul(P.b, X)), P.c)


def theta_table(P):
    X = P.ctx.elements()
    return FuncTable(X, theta_values(P, X), P.ctx)


def build_f(P):
    """f evaluated on all of F_{q^2}."""
    ctx = P.ctx
    X = ctx.elements()
    theta = theta_values(P, X)
    phi_vals = evaluate_many(P.phi_normal, ctx.vpow(theta, P.m))
    linear = ctx.vadd(ctx.vmul(P.u, ctx.vfrob(X)), ctx.vmul(P.v, X))
    return FuncTable(X, ctx.vadd(ctx.vmul(ctx.vpow(theta, P.r), phi_vals), linear), ctx)


def expand_f(P):
    """f as an explicit polynomial reduced modulo x^{q^2} - x (small fields only)."""
    ctx = P.ctx
    theta = Poly.from_terms(ctx, [(ctx.q, P.a), (1, P.b), (0, P.c)])
    outer = P.phi.compose_power(theta, P.m)
    return reduce_mod(theta.pow_mod(P.r) * outer) + Poly.from_terms(ctx, [(ctx.q, P.u), (1, P.v)])


def compute_S(P):
    """Image of θ, sorted."""
    return np.unique(theta_values(P))


def build_g(P):
    """g(x) = x^r[Bφ(x^m) + Wφ(x^m)^q] + uv_gap x on S; NOT_APPLICABLE when W is undefined."""
    _require(theta_clauses(P), "Thm1 hypotheses")
    ctx, D = P.ctx, P.derived
    if D.W is None:
        return NOT_APPLICABLE
    S = compute_S(P)
    ph = evaluate_many(P.phi_normal, ctx.vpow(S, P.m))
    bracket = ctx.vadd(ctx.vmul(D.B, ph), ctx.vmul(D.W, ctx.vfrob(ph)))
    values = ctx.vadd(ctx.vmul(ctx.vpow(S, P.r), bracket), ctx.vmul(D.uv_gap, S))
    return FuncTable(S, values, ctx)


def unit_roots(ctx, n):
    step = ctx.order // n
    return ctx.exp_table[np.arange(n, dtype=np.int64) * step]


def build_h(P, domain=None):
    """
    h(x) = x^r[Bφ(x) + Wφ(x)^q + uv_gap]^m.

    Tabulated on U_n under the Thm2 hypotheses. An explicit domain
    (U_d minus U_{d/2} for odd j in the even-d case) only needs the
    Thm1 hypotheses plus the r, u, v condition.
    """
    ctx, D = P.ctx, P.derived
    if domain is None:
        _require(reduction_clauses(P), "Thm2 hypotheses")
        domain = unit_roots(ctx, D.n)
    else:
        _require(theta_clauses(P), "Thm1 hypotheses")
        _require([("gcd(r, m) = 1 if u^(q+1) = v^(q+1), else r = 1", ruv_holds(P))], "Thm2 hypotheses")
    if D.W is None:
        return NOT_APPLICABLE
    domain = np.asarray(domain, dtype=np.int64)
    ph = evaluate_many(P.phi_normal, domain)
    bracket = ctx.vadd(ctx.vadd(ctx.vmul(D.B, ph), ctx.vmul(D.W, ctx.vfrob(ph))), D.uv_gap)
    return FuncTable(domain, ctx.vmul(ctx.vpow(domain, P.r), ctx.vpow(bracket, P.m)), ctx)


@dataclass(frozen=True)
class LambdaPartition:
    image: list
    fibers: dict = field(repr=False)


def lambda_partition(P):
    """λ(x) = x^m on S: image {0} ∪ U_n, nonzero fibers of size (q-1)/n."""
    _require(reduction_clauses(P), "Thm2 hypotheses")
    S = compute_S(P)
    lam = P.ctx.vpow(S, P.m)
    fibers = {}
    for s, t in zip(S.tolist(), lam.tolist()):
        fibers.setdefault(t, []).append(s)
    return LambdaPartition(image=sorted(fibers), fibers=fibers)


# ─── d | q+1: linearized form ─────────────────────────

@dataclass(frozen=True)
class Linearization:
    alpha: int
    beta: int
    gamma: int

    def poly(self, ctx):
        return Poly.from_terms(ctx, [(ctx.q, self.alpha), (1, self.beta), (0, self.gamma)])


def phi_at_delta(P):
    if (P.ctx.q + 1) % P.d:
        raise HypothesisError("d | q+1", "linearization")
    _require(theta_clauses(P), "Thm1 hypotheses")
    return evaluate(P.phi_normal, P.derived.delta)


def linearize(P):
    """f ≡ αx^q + βx + γ mod x^{q^2} - x, for r = 1 or φ(δ) = 0."""
    ctx = P.ctx
    pd = phi_at_delta(P)
    if P.r != 1 and pd != 0:
        raise HypothesisError("r = 1", "linearization")
    return Linearization(
        alpha=ctx.add(ctx.mul(pd, P.a), P.u),
        beta=ctx.add(ctx.mul(pd, P.b), P.v),
        gamma=ctx.mul(pd, P.c),
    )


# ─── Diagram ──────────────────────────────────────────

def build_diagram(P):
    """
    The diagram θ̄ ∘ f = g ∘ θ with θ̄ = Ax^q + Bx + C.

    When A = 0 the map θ̄ no longer has q values; f is then constant on
    θ-fibers and the diagram with θ̄ = θ and g(θ(x)) = θ(f(x)) is used.
    """
    _require(theta_clauses(P), "Thm1 hypotheses")
    ctx, D = P.ctx, P.derived
    X = ctx.elements()
    f = build_f(P)
    theta = theta_table(P)
    S = compute_S(P)
    if D.A != 0:
        bar = ctx.vadd(ctx.vadd(ctx.vmul(D.A, ctx.vfrob(X)), ctx.vmul(D.B, X)), D.C)
        theta_bar = FuncTable(X, bar, ctx)
        return Diagram(R=X, S=S, S_bar=np.unique(bar), f=f, theta=theta, theta_bar=theta_bar, g=build_g(P))
    logger.debug("A = 0 for %s, using the collapsed diagram", P.to_dict())
    _, first = np.unique(theta.values, return_index=True)
    g_values = theta.lookup(f.values[first])
    return Diagram(R=X, S=S, S_bar=S, f=f, theta=theta, theta_bar=theta,
                   g=FuncTable(S, g_values, ctx))


# ─── Integer and linear criteria ──────────────────────

def linear_is_pp(ctx, a, b):
    """a x^q + b x + c permutes F_{q^2} iff a^{q+1} != b^{q+1}."""
    return ctx.norm(a) != ctx.norm(b)


def enumerate_theta_triples(ctx):
    """Every (a, b, c) with ab != 0, a^{q+1} = b^{q+1}, ac^q = b^q c."""
    q = ctx.q
    subfield_elems = np.nonzero(ctx.frob_table == ctx.elements())[0].tolist()
    for a in range(1, ctx.q_sq):
        a_q = ctx.frobenius(a)
        for i in range(q + 1):
            b = ctx.mul(ctx.exp((q - 1) * i), a_q)
            shift = ctx.exp(-i)
            for e in subfield_elems:
                yield a, b, ctx.mul(shift, e)


def even_d_conditions(q, d):
    """(d | q^2-1 and gcd(q+1, d) = d/2,  d ≡ 0 mod 4 and q+1 ≡ d/2 mod d) for even d >= 4."""
    lhs = (q * q - 1) % d == 0 and gcd(q + 1, d) == d // 2
    rhs = d % 4 == 0 and (q + 1) % d == d // 2
    return lhs, rhs


@dataclass(frozen=True)
class ThirdDivisorCase:
    case: int
    divides: bool
    predicted: bool


def third_d_conditions(q, d):
    """For 3 | d, gcd(q+1, d) = d/3: whether d | q^2-1 against the residue of d mod 9."""
    if d % 3 or gcd(q + 1, d) != d // 3:
        return None
    divides = (q * q - 1) % d == 0
    if (q + 1) % d == d // 3:
        return ThirdDivisorCase(case=1, divides=divides, predicted=d % 9 == 6)
    if (q + 1) % d == 2 * d // 3:
        return ThirdDivisorCase(case=2, divides=divides, predicted=d % 9 == 3)
    return None


def geometric_phi(ctx, d, scale=1):
    return Poly(ctx, (scale,) * d)


def is_geometric_phi(P):
    """φ folded mod d equals e(1 + x + ... + x^{d-1}); returns e, or None."""
    coeffs = P.phi_normal.coeffs
    if len(coeffs) != P.d or len(set(coeffs)) != 1:
        return None
    return coeffs[0]


def geometric_sum_sufficient(P):
    """(1 + d(B + B^q)/uv_gap)^m = 1, sufficient for f to permute whenever d >= 3."""
    ctx, D = P.ctx, P.derived
    clauses = [("d >= 3", P.d >= 3), *theta_clauses(P),
               ("u^(q+1) != v^(q+1)", D.uv_gap != 0), ("r = 1", P.r == 1),
               ("phi = 1 + x + ... + x^(d-1)", is_geometric_phi(P) == 1)]
    _require(clauses, "Thm7 hypotheses")
    ratio = ctx.div(ctx.mul(ctx.elem(P.d), ctx.trace(D.B)), D.uv_gap)
    return ctx.pow(ctx.add(1, ratio), D.m) == 1


def divisors_of_order(ctx):
    return [int(x) for x in divisors(ctx.order)]
