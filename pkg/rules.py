"""
rules.py — Registry of permutation criteria for the family f
============================================================
Each rule carries:
  - its hypotheses as an ordered generator of (clause, holds) pairs, so the
    first failing clause is reported and later clauses may rely on earlier ones
  - its reduced condition (a check on S, on U_n, or a closed-form equality)
  - its semantics: "iff" (PP exactly when the condition holds) or
    "sufficient" (PP whenever the hypotheses hold)
  - the parameter template used to sweep its hypothesis region

predict() turns these into a verdict: PP, NotPP or NotApplicable.
"""

import logging
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from families import (
    NOT_APPLICABLE, NOT_PP, PP,
    FamilyParams, HypothesisError,
    b_shape_holds, build_g, build_h, compute_S, decompose, first_failure,
    fold_phi, geometric_phi, is_geometric_phi, linearize, phi_at_delta,
    ruv_holds, reduction_clauses, theta_clauses, twist, unit_roots,
)
from poly import FuncTable, Poly, evaluate_many, permutes_set

logger = logging.getLogger(__name__)

IFF = "iff"
SUFFICIENT = "sufficient"


@dataclass(frozen=True)
class Rule:
    rule_id: str
    anchor: str
    semantics: str
    clauses: object = field(repr=False)
    condition: object = field(repr=False)
    template: str = "theta_general"
    grid_defaults: dict = field(default_factory=dict, repr=False)
    asserts_cpp: bool = False


@dataclass(frozen=True)
class RuleOutcome:
    rule_id: str
    hypotheses_ok: bool
    failed_clause: str
    reduced_condition: bool
    verdict: str


# ─── Small predicates ─────────────────────────────────

def _minus_one(ctx):
    return ctx.neg(1)


def _sign(ctx, r):
    """(-1)^r as a field element."""
    return 1 if r % 2 == 0 else _minus_one(ctx)


def _trace_zero(ctx, x):
    return ctx.trace(x) == 0


def _phi_is_one(P):
    return P.phi_normal.coeffs == (1,)


def _phi_over_subfield(P):
    return all(P.ctx.in_subfield(c) for c in P.phi_normal.coeffs)


def _monomial_exponent(P, modulus):
    """k when φ folded mod `modulus` is exactly x^k with k in {1, 2}, else None."""
    coeffs = fold_phi(P.phi, modulus).coeffs
    for k in (1, 2):
        if coeffs == (0,) * k + (1,):
            return k
    return None


def _d_odd_divides_q_minus_1(P, minimum):
    q = P.ctx.q
    yield f"d >= {minimum} odd", P.d >= minimum and P.d % 2 == 1
    yield "d | q-1", (q - 1) % P.d == 0


def _minus_b_shape(P):
    ctx = P.ctx
    yield "a = 1", P.a == 1
    yield from theta_clauses(P)
    yield "u = 0", P.u == 0
    yield "v = -b", P.v == ctx.neg(P.b)
    yield "r = 1", P.r == 1


# ─── Hypotheses ───────────────────────────────────────

def _thm1(P):
    yield from theta_clauses(P)


def _thm2(P):
    yield from reduction_clauses(P)


def _cor1(P):
    yield from _d_odd_divides_q_minus_1(P, 3)
    yield from theta_clauses(P)
    yield "gcd(r, m) = 1 if u^(q+1) = v^(q+1), else r = 1", ruv_holds(P)


def _cor2(P):
    yield "d >= 2 even", P.d >= 2 and P.d % 2 == 0
    yield "d | q-1", (P.ctx.q - 1) % P.d == 0
    yield from theta_clauses(P)
    yield "gcd(r, m) = 1 if u^(q+1) = v^(q+1), else r = 1", ruv_holds(P)


def _thm3(P):
    yield from theta_clauses(P)
    yield "phi = 1", _phi_is_one(P)


def _thm4(P):
    yield "d | q+1", (P.ctx.q + 1) % P.d == 0
    yield from theta_clauses(P)


def _cor8(P):
    yield from _thm4(P)
    yield "r = 1", P.r == 1


def _thm5(P):
    q = P.ctx.q
    yield "d = 0 mod 4", P.d % 4 == 0
    yield "q+1 = d/2 mod d", (q + 1) % P.d == P.d // 2
    yield from theta_clauses(P)
    yield "b = xi^((q-1)jd/2) a^q", b_shape_holds(P)
    yield "gcd(r, m) = 1 if u^(q+1) = v^(q+1), else r = 1", ruv_holds(P)


def _thm6(P):
    yield "3 | d", P.d % 3 == 0
    yield "gcd(q+1, d) = d/3", gcd(P.ctx.q + 1, P.d) == P.d // 3
    yield from _minus_b_shape(P)
    yield "b = xi^((q-1)jd/3)", b_shape_holds(P)
    yield "phi = x^k, k = 1, 2", _monomial_exponent(P, 3) is not None


def _cor9(P):
    yield "d = 3", P.d == 3
    yield "3 | q-1", (P.ctx.q - 1) % 3 == 0
    yield from _minus_b_shape(P)
    yield "phi = x^k, k = 1, 2", _monomial_exponent(P, 3) is not None


def _cor10(P):
    yield "d = 6", P.d == 6
    yield "q+1 = 2 mod 6", (P.ctx.q + 1) % 6 == 2
    yield from _minus_b_shape(P)
    yield "b = xi^((q-1)2j)", P.decomposition.i % 2 == 0
    yield "phi = x^k, k = 1, 2", _monomial_exponent(P, 3) is not None


def _thm7(P):
    yield from _d_odd_divides_q_minus_1(P, 3)
    yield from theta_clauses(P)
    yield "u^(q+1) != v^(q+1)", P.derived.uv_gap != 0
    yield "r = 1", P.r == 1
    yield "phi = 1 + x + ... + x^(d-1)", is_geometric_phi(P) == 1


def _cor11(P):
    yield from _thm7(P)
    yield "(u, v) = (a, 0) or (0, -b)", (P.u == P.a and P.v == 0) or (P.u == 0 and P.v == P.ctx.neg(P.b))


def _geometric_scale(P):
    e = is_geometric_phi(P)
    return e if e is not None and P.ctx.in_subfield(e) else None


def _scaled_geometric(P):
    yield from _d_odd_divides_q_minus_1(P, 3)
    yield "a = 1", P.a == 1
    yield from theta_clauses(P)
    yield "r = 1", P.r == 1
    yield "phi = e(1 + x + ... + x^(d-1)), e in F_q", _geometric_scale(P) is not None


def _cor12(P):
    ctx = P.ctx
    yield "q odd", ctx.p != 2
    yield from _scaled_geometric(P)
    e = _geometric_scale(P)
    yield "e != 0", e != 0
    yield "u = 1 - e", P.u == ctx.sub(1, e)
    yield "v = -b(1 + e)", P.v == ctx.neg(ctx.mul(P.b, ctx.add(1, e)))


def _cor13(P):
    ctx = P.ctx
    yield from _scaled_geometric(P)
    e = _geometric_scale(P)
    yield "e(1 + 2e) != 0", ctx.mul(e, ctx.add(1, ctx.add(e, e))) != 0
    yield "u = -e", P.u == ctx.neg(e)
    yield "v = -b(1 + e)", P.v == ctx.neg(ctx.mul(P.b, ctx.add(1, e)))


def _thm8(P):
    yield "phi over F_q", _phi_over_subfield(P)
    yield "d | q-1", (P.ctx.q - 1) % P.d == 0
    yield from theta_clauses(P)
    yield "B + A^(1-r) B^(qr) = 0", P.derived.K == 0


def _thm9(P):
    yield from reduction_clauses(P)
    yield "phi over F_q", _phi_over_subfield(P)
    yield "u^(q+1) = v^(q+1)", P.derived.uv_gap == 0


def _plus_shape(P):
    yield "a = 1", P.a == 1
    yield "b = 1", P.b == 1
    yield "c in F_q", P.ctx.in_subfield(P.c)
    yield "u in F_q", P.ctx.in_subfield(P.u)


def _minus_shape(P):
    yield "a = 1", P.a == 1
    yield "b = -1", P.b == _minus_one(P.ctx)
    yield "c + c^q = 0", _trace_zero(P.ctx, P.c)


def _cor3(P):
    yield "q odd", P.ctx.p != 2
    yield from _plus_shape(P)
    yield "v = -u", P.v == P.ctx.neg(P.u)
    yield "phi = 1", _phi_is_one(P)


def _cor4(P):
    yield from _plus_shape(P)
    yield "e = u - v, e + e^q = 0", _trace_zero(P.ctx, P.ctx.sub(P.u, P.v))
    yield "phi = 1", _phi_is_one(P)


def _cor5(P):
    ctx = P.ctx
    e = ctx.sub(P.v, P.u)
    yield "q even", ctx.p == 2
    yield from _plus_shape(P)
    yield "e = v - u in F_q", ctx.in_subfield(e)
    yield "e not in {0, 1}", e not in (0, 1)
    yield "phi = 1", _phi_is_one(P)


def _cor6(P):
    ctx = P.ctx
    s = ctx.add(P.u, P.v)
    yield from _minus_shape(P)
    yield "(u+v)^q = (-1)^r (u+v)", ctx.frobenius(s) == ctx.mul(_sign(ctx, P.r), s)
    yield "phi = 1", _phi_is_one(P)


def _cor7(P):
    yield from _minus_shape(P)
    yield "u^(q+1) = v^(q+1)", P.derived.uv_gap == 0
    yield "phi = 1", _phi_is_one(P)


def _cor14(P):
    yield "phi over F_q", _phi_over_subfield(P)
    yield "d | q-1", (P.ctx.q - 1) % P.d == 0
    yield from _plus_shape(P)
    yield "e = u - v, e + e^q = 0", _trace_zero(P.ctx, P.ctx.sub(P.u, P.v))


def _cor15(P):
    ctx = P.ctx
    yield "phi over F_q", _phi_over_subfield(P)
    yield "d | q-1", (ctx.q - 1) % P.d == 0
    yield "r even", P.r % 2 == 0
    yield from _minus_shape(P)
    yield "u in F_q", ctx.in_subfield(P.u)
    yield "e = v - u in F_q", ctx.in_subfield(ctx.sub(P.v, P.u))


# ─── Reduced conditions ───────────────────────────────

def _permutes(table):
    return table is not NOT_APPLICABLE and permutes_set(table)


def _when_phi_one(ctx, A, B, uv_gap, r, S):
    """f = θ^r + ux^q + vx permutes iff Kx^r + uv_gap x permutes S, K = B + A^{1-r}B^{qr}."""
    W = twist(ctx, A, B, r)
    if A == 0 or W is None:
        return False
    K = ctx.add(B, W)
    if K == 0:
        return uv_gap != 0
    if uv_gap == 0:
        return gcd(r, ctx.q - 1) == 1
    values = ctx.vadd(ctx.vmul(K, ctx.vpow(S, r)), ctx.vmul(uv_gap, S))
    return permutes_set(FuncTable(S, values, ctx))


def _cond_thm1(P):
    return _permutes(build_g(P))


def _cond_thm2(P):
    return _permutes(build_h(P))


def _cond_cor2(P):
    ctx = P.ctx
    half = unit_roots(ctx, P.d // 2)
    if P.decomposition.i % 2 == 0:
        return _permutes(build_h(P, half))
    return _permutes(build_h(P, np.setdiff1d(unit_roots(ctx, P.d), half)))


def _cond_thm3(P):
    D = P.derived
    return _when_phi_one(P.ctx, D.A, D.B, D.uv_gap, P.r, compute_S(P))


def _cond_thm4(P):
    ctx = P.ctx
    pd = phi_at_delta(P)
    if pd == 0:
        return P.derived.uv_gap != 0
    u_bar, v_bar = ctx.div(P.u, pd), ctx.div(P.v, pd)
    A = ctx.sub(ctx.mul(P.b, u_bar), ctx.mul(P.a, v_bar))
    B = ctx.sub(ctx.mul(P.a, ctx.frobenius(u_bar)), ctx.mul(P.b, ctx.frobenius(v_bar)))
    gap = ctx.sub(ctx.norm(u_bar), ctx.norm(v_bar))
    return _when_phi_one(ctx, A, B, gap, P.r, compute_S(P))


def _cond_cor8(P):
    lin = linearize(P)
    return P.ctx.norm(lin.alpha) != P.ctx.norm(lin.beta)


def _cond_thm5(P):
    ctx, D = P.ctx, P.derived
    if D.W is None:
        return False
    folded = fold_phi(P.phi, 2)
    e0, e1 = folded.coeff(0), folded.coeff(1)
    first = ctx.add(ctx.add(ctx.mul(D.B, e0), ctx.mul(D.W, ctx.frobenius(e0))), D.uv_gap)
    second = ctx.add(ctx.mul(D.B, e1), ctx.mul(D.W, ctx.frobenius(e1)))
    value = ctx.sub(ctx.mul(first, first), ctx.mul(second, second))
    return ctx.pow(value, D.m) == _sign(ctx, P.r + 1)


def _cube_root_pair(ctx, x1, x2):
    omega = ctx.exp(ctx.order // 3)
    return (x1, x2) in ((1, 1), (omega, ctx.mul(omega, omega)))


def _cond_thm6(P):
    ctx, q = P.ctx, P.ctx.q
    omega = ctx.exp(ctx.order // 3)
    k = _monomial_exponent(P, 3)
    pair = [ctx.pow(ctx.sub(ctx.add(ctx.pow(omega, j * q), ctx.pow(omega, j)), 1), P.m)
            for j in (k, 2 * k)]
    return _cube_root_pair(ctx, *pair)


def _two_omega_condition(P, exponent):
    ctx = P.ctx
    omega = ctx.exp(ctx.order // 3)
    k = _monomial_exponent(P, 3)
    pair = [ctx.pow(ctx.sub(ctx.mul(ctx.elem(2), ctx.pow(omega, j)), 1), exponent)
            for j in (k, 2 * k)]
    return _cube_root_pair(ctx, *pair)


def _cond_cor9(P):
    return _two_omega_condition(P, P.ctx.order // 3)


def _cond_cor10(P):
    return _two_omega_condition(P, P.ctx.order // 6)


def _cond_thm7(P):
    ctx, D = P.ctx, P.derived
    ratio = ctx.div(ctx.mul(ctx.elem(P.d), ctx.trace(D.B)), D.uv_gap)
    return ctx.pow(ctx.add(1, ratio), D.m) == 1


def _cond_cor11(P):
    ctx = P.ctx
    two_d = ctx.elem(2 * P.d)
    base = ctx.add(1, two_d) if P.v == 0 and P.u == P.a else ctx.sub(1, two_d)
    return ctx.pow(base, P.m) == 1


def _cond_cor12(P):
    ctx = P.ctx
    return ctx.pow(ctx.sub(1, ctx.elem(P.d)), P.m) == 1


def _cond_cor13(P):
    ctx = P.ctx
    e = _geometric_scale(P)
    two_e = ctx.add(e, e)
    frac = ctx.div(ctx.mul(ctx.elem(P.d), two_e), ctx.add(1, two_e))
    return ctx.pow(ctx.sub(1, frac), P.m) == 1


def _cond_thm8(P):
    return P.derived.uv_gap != 0


def _cond_thm9(P):
    ctx, D = P.ctx, P.derived
    if D.K is None or D.K == 0:
        return False
    U = unit_roots(ctx, D.n)
    values = ctx.vmul(ctx.vpow(U, P.r), ctx.vpow(evaluate_many(P.phi_normal, U), P.m))
    return permutes_set(FuncTable(U, values, ctx))


def _cond_cor3(P):
    return P.u != 0 and gcd(P.r, P.ctx.q - 1) == 1


def _cond_e_nonzero(P):
    return P.u != P.v


def _cond_cor5(P):
    return True


def _cond_cor6(P):
    return P.derived.uv_gap != 0


def _cond_cor7(P):
    ctx = P.ctx
    s = ctx.add(P.u, P.v)
    return gcd(P.r, ctx.q - 1) == 1 and ctx.frobenius(s) != ctx.mul(_sign(ctx, P.r), s)


def _cond_cor15(P):
    ctx = P.ctx
    e = ctx.sub(P.v, P.u)
    return ctx.mul(e, ctx.add(ctx.add(P.u, P.u), e)) != 0


# ─── Templates ────────────────────────────────────────

@dataclass(frozen=True)
class Template:
    """Turns free variables into FamilyParams in a rule's shape."""
    name: str
    variables: tuple
    defaults: dict
    build: object = field(repr=False)


def compatible_c(ctx, a, b, coord):
    """ξ^{-i} coord with i from b = ξ^{(q-1)i} a^q; coord itself when (a, b) has no such i."""
    if a == 0 or b == 0:
        return coord
    dec = decompose(ctx, a, b, 0)
    return coord if dec is None else ctx.mul(ctx.exp(-dec.i), coord)


def _params(ctx, values, **fixed):
    merged = {"r": 1, "d": 1, "phi": Poly.constant(ctx, 1)}
    merged.update(values)
    merged.update(fixed)
    if "c_coord" in merged:
        merged["c"] = compatible_c(ctx, merged["a"], merged["b"], merged.pop("c_coord"))
    for name in ("e", "e0", "e1", "k", "variant"):
        merged.pop(name, None)
    return FamilyParams(ctx=ctx, **merged)


def _build_theta_general(ctx, vals):
    return _params(ctx, vals)


def _build_theta_phi_one(ctx, vals):
    return _params(ctx, vals, d=1, phi=Poly.constant(ctx, 1))


def _build_linear_phi(ctx, vals):
    return _params(ctx, vals, phi=Poly(ctx, (vals["e0"], vals["e1"])))


def _build_monomial(ctx, vals):
    return _params(ctx, vals, a=1, u=0, v=ctx.neg(vals["b"]), r=1,
                   phi=Poly.monomial(ctx, vals["k"]))


def _build_geometric(ctx, vals):
    return _params(ctx, vals, r=1, phi=geometric_phi(ctx, vals["d"]))


def _build_geometric_special(ctx, vals):
    a, b = vals["a"], vals["b"]
    u, v = (a, 0) if vals["variant"] == "u=a" else (0, ctx.neg(b))
    return _params(ctx, vals, u=u, v=v, r=1, phi=geometric_phi(ctx, vals["d"]))


def _build_scaled_one_minus(ctx, vals):
    b, e = vals["b"], vals["e"]
    return _params(ctx, vals, a=1, u=ctx.sub(1, e), v=ctx.neg(ctx.mul(b, ctx.add(1, e))),
                   r=1, phi=geometric_phi(ctx, vals["d"], e))


def _build_scaled_minus(ctx, vals):
    b, e = vals["b"], vals["e"]
    return _params(ctx, vals, a=1, u=ctx.neg(e), v=ctx.neg(ctx.mul(b, ctx.add(1, e))),
                   r=1, phi=geometric_phi(ctx, vals["d"], e))


def _build_sum_negated(ctx, vals):
    return _params(ctx, vals, a=1, b=1, v=ctx.neg(vals["u"]))


def _build_sum_shifted(ctx, vals):
    return _params(ctx, vals, a=1, b=1, v=ctx.sub(vals["u"], vals["e"]))


def _build_sum_plus(ctx, vals):
    return _params(ctx, vals, a=1, b=1, v=ctx.add(vals["u"], vals["e"]))


def _build_difference(ctx, vals):
    return _params(ctx, vals, a=1, b=ctx.neg(1))


def _build_difference_shifted(ctx, vals):
    return _params(ctx, vals, a=1, b=ctx.neg(1), v=ctx.add(vals["u"], vals["e"]))


_THETA_DEFAULTS = {"a": ["1"], "b": "norm-one", "c_coord": "subfield", "u": "all", "v": "all",
                   "r": [1], "d": "divisors", "phi": ["0:1"]}

TEMPLATES = {t.name: t for t in [
    Template("theta_general", ("a", "b", "c_coord", "u", "v", "r", "d", "phi"),
             _THETA_DEFAULTS, _build_theta_general),
    Template("theta_phi_one", ("a", "b", "c_coord", "u", "v", "r"),
             {**_THETA_DEFAULTS, "r": "range:1:3"}, _build_theta_phi_one),
    Template("linear_phi", ("a", "b", "c_coord", "u", "v", "r", "d", "e0", "e1"),
             {**_THETA_DEFAULTS, "d": "multiples-of-4", "u": ["0"], "v": "all",
              "e0": "subfield", "e1": "subfield"}, _build_linear_phi),
    Template("monomial", ("b", "c_coord", "k", "d"),
             {"b": "norm-one", "c_coord": "subfield", "k": [1, 2], "d": "multiples-of-3"},
             _build_monomial),
    Template("geometric", ("a", "b", "c_coord", "u", "v", "d"),
             {**_THETA_DEFAULTS, "d": "odd-divisors-of-q-1"}, _build_geometric),
    Template("geometric_special", ("a", "b", "c_coord", "variant", "d"),
             {"a": "units", "b": "norm-one", "c_coord": "subfield", "variant": ["u=a", "v=-b"],
              "d": "odd-divisors-of-q-1"}, _build_geometric_special),
    Template("geometric_one_minus_e", ("b", "c_coord", "e", "d"),
             {"b": "norm-one", "c_coord": "subfield", "e": "subfield-units",
              "d": "odd-divisors-of-q-1"}, _build_scaled_one_minus),
    Template("geometric_minus_e", ("b", "c_coord", "e", "d"),
             {"b": "norm-one", "c_coord": "subfield", "e": "subfield-units",
              "d": "odd-divisors-of-q-1"}, _build_scaled_minus),
    Template("sum_negated", ("c", "u", "r"),
             {"c": "subfield", "u": "subfield", "r": "range:1:6"}, _build_sum_negated),
    Template("sum_shifted", ("c", "u", "e", "r", "d", "phi"),
             {"c": "subfield", "u": "subfield", "e": "trace-zero", "r": "range:1:3",
              "d": [1], "phi": ["0:1"]}, _build_sum_shifted),
    Template("sum_plus", ("c", "u", "e", "r"),
             {"c": "subfield", "u": "subfield", "e": "subfield-not-prime", "r": "range:1:3"},
             _build_sum_plus),
    Template("difference", ("c", "u", "v", "r"),
             {"c": "trace-zero", "u": "all", "v": "all", "r": "range:1:2"}, _build_difference),
    Template("difference_shifted", ("c", "u", "e", "r", "d", "phi"),
             {"c": "trace-zero", "u": "subfield", "e": "subfield", "r": [2, 4],
              "d": "divisors-of-q-1", "phi": {"degree_below": 2, "coeffs": "subfield"}},
             _build_difference_shifted),
]}


# ─── Registry ─────────────────────────────────────────

_F_Q_PHI = {"d": "divisors-of-q-1", "phi": {"degree_below": 2, "coeffs": "subfield"}}

RULES = {rule.rule_id: rule for rule in [
    Rule("Thm1", "if and only if g(x) permutes S", IFF, _thm1, _cond_thm1,
         grid_defaults={"phi": {"degree_below": 2, "coeffs": "all"}}),
    Rule("Thm2", "if and only if h(x) permutes U_n", IFF, _thm2, _cond_thm2,
         grid_defaults={"phi": {"degree_below": 2, "coeffs": "all"}}),
    Rule("Cor1", "odd divisor of q - 1", IFF, _cor1, _cond_thm2,
         grid_defaults={"d": "odd-divisors-of-q-1", "phi": {"degree_below": 2, "coeffs": "all"}}),
    Rule("Cor2", "permutes U_d \\ U_{d/2} when j is odd", IFF, _cor2, _cond_cor2,
         grid_defaults={"b": ["1", "-1"], "d": "even-divisors-of-q-1",
                        "phi": {"degree_below": 2, "coeffs": "all"}}),
    Rule("Thm3", "B + A^{1-r}B^{qr} = 0", IFF, _thm3, _cond_thm3, template="theta_phi_one"),
    Rule("Thm4", "delta = (b^q/a)^{(q+1)/d}", IFF, _thm4, _cond_thm4,
         grid_defaults={"d": "divisors-of-q+1", "r": "range:1:2",
                        "phi": {"degree_below": 2, "coeffs": "all"}}),
    Rule("Cor8", "alpha^{q+1} != beta^{q+1}", IFF, _cor8, _cond_cor8,
         grid_defaults={"d": "divisors-of-q+1", "phi": {"degree_below": 2, "coeffs": "all"}}),
    Rule("Thm5", "(-1)^{r+1}", IFF, _thm5, _cond_thm5, template="linear_phi"),
    Rule("Thm6", "(1, 1) or (omega, omega^2)", IFF, _thm6, _cond_thm6, template="monomial"),
    Rule("Cor9", "(2 omega^k - 1)", IFF, _cor9, _cond_cor9, template="monomial",
         grid_defaults={"d": [3]}),
    Rule("Cor10", "q + 1 = 2 (mod 6)", IFF, _cor10, _cond_cor10, template="monomial",
         grid_defaults={"d": [6]}),
    Rule("Thm7", "d(B + B^q)", IFF, _thm7, _cond_thm7, template="geometric"),
    Rule("Cor11", "(1 + 2d)^{(q^2-1)/d} = 1", IFF, _cor11, _cond_cor11, template="geometric_special"),
    Rule("Cor12", "(1 - d)^{(q^2-1)/d} = 1", IFF, _cor12, _cond_cor12, template="geometric_one_minus_e"),
    Rule("Cor13", "e(1 + 2e) != 0", IFF, _cor13, _cond_cor13, template="geometric_minus_e"),
    Rule("Thm8", "if and only if u^{q+1} != v^{q+1}", IFF, _thm8, _cond_thm8, grid_defaults=_F_Q_PHI),
    Rule("Thm9", "x^r phi(x)^{(q^2-1)/d} permutes U_n", IFF, _thm9, _cond_thm9,
         grid_defaults={**_F_Q_PHI, "r": "range:1:3"}),
    Rule("Cor3", "u != 0 and gcd(r, q-1) = 1", IFF, _cor3, _cond_cor3, template="sum_negated"),
    Rule("Cor4", "if and only if e != 0", IFF, _cor4, _cond_e_nonzero, template="sum_shifted"),
    Rule("Cor5", "both f(x) and f(x) + x", SUFFICIENT, _cor5, _cond_cor5, template="sum_plus",
         asserts_cpp=True),
    Rule("Cor6", "if and only if u^{q+1} != v^{q+1}", IFF, _cor6, _cond_cor6, template="difference"),
    Rule("Cor7", "gcd(r, q - 1) = 1 and", IFF, _cor7, _cond_cor7, template="difference"),
    Rule("Cor14", "if and only if e != 0", IFF, _cor14, _cond_e_nonzero, template="sum_shifted",
         grid_defaults=_F_Q_PHI),
    Rule("Cor15", "e(2u + e) != 0", IFF, _cor15, _cond_cor15, template="difference_shifted"),
]}

RULE_IDS = tuple(RULES)


def get_rule(rule_id):
    try:
        return RULES[rule_id]
    except KeyError:
        raise KeyError(f"unknown rule {rule_id!r}; known: {', '.join(RULE_IDS)}") from None


def rule_hypotheses(rule_id, P):
    """(True, None) or (False, first failing clause)."""
    failed = first_failure(get_rule(rule_id).clauses(P))
    return failed is None, failed


def rule_reduced_condition(rule_id, P):
    rule = get_rule(rule_id)
    ok, failed = rule_hypotheses(rule_id, P)
    if not ok:
        raise HypothesisError(failed, f"{rule_id} hypotheses")
    if rule.semantics == IFF and P.derived.A == 0:
        return False
    return bool(rule.condition(P))


def evaluate_rule(rule_id, P):
    rule = get_rule(rule_id)
    ok, failed = rule_hypotheses(rule_id, P)
    if not ok:
        logger.debug("%s not applicable: %s fails for %s", rule_id, failed, P.to_dict())
        return RuleOutcome(rule_id, False, failed, None, NOT_APPLICABLE)
    if rule.semantics == SUFFICIENT:
        return RuleOutcome(rule_id, True, None, True, PP)
    if P.derived.A == 0:
        # θ̄ collapses; f is constant on θ-fibers
        return RuleOutcome(rule_id, True, None, False, NOT_PP)
    holds = bool(rule.condition(P))
    return RuleOutcome(rule_id, True, None, holds, PP if holds else NOT_PP)


def predict(rule_id, P):
    return evaluate_rule(rule_id, P).verdict
