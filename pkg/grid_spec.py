"""
grid_spec.py — Parameter grids for sweeps and searches
======================================================
A grid maps each free variable of a rule template to a finite domain:

    {"u": "subfield", "r": "range:1:4", "phi": {"degree_below": 2, "coeffs": "subfield"}}

Element shorthands: all, units, subfield, subfield-units, trace-zero,
norm-one, subfield-not-prime, or an explicit list of element texts.
Integer shorthands: range:A:B (inclusive), coprime:M, divisors,
divisors-of-q-1, divisors-of-q+1, odd-divisors-of-q-1,
even-divisors-of-q-1, multiples-of-3, multiples-of-4, or a list.

Tuples are addressed by their index in the product order (last variable
fastest). Sampling draws indices with a seeded numpy generator, so the same
grid, budget and seed always give the same tuples.
"""

import itertools
import json
import logging
import os
from dataclasses import dataclass
from functools import reduce
from math import gcd

import numpy as np

from families import divisors_of_order
from field import FieldError
from poly import Poly, PolyFormatError, parse_poly
from rules import RULES, TEMPLATES, get_rule

logger = logging.getLogger(__name__)

INT_VARS = {"r", "d", "k"}
POLY_VARS = {"phi"}
CHOICE_VARS = {"variant"}


class GridError(ValueError):
    """Unknown variable, bad shorthand or malformed grid file."""


def load_grid(source):
    """Grid from a JSON file path, inline JSON text, or an already-parsed dict."""
    if source is None:
        return {}
    if isinstance(source, dict):
        return dict(source)
    try:
        if os.path.isfile(source):
            with open(source, "r") as f:
                return json.load(f)
        return json.loads(source)
    except (OSError, json.JSONDecodeError) as e:
        raise GridError(f"cannot read grid {source!r}: {e}") from None


# ─── Domain resolution ────────────────────────────────

def _element_domain(ctx, spec):
    X = ctx.elements()
    if isinstance(spec, list):
        return [ctx.elem(item) for item in spec]
    shorthand = {
        "all": lambda: X,
        "units": lambda: X[1:],
        "subfield": lambda: X[ctx.frob_table == X],
        "subfield-units": lambda: X[(ctx.frob_table == X) & (X != 0)],
        "subfield-not-prime": lambda: X[(ctx.frob_table == X) & (X >= ctx.p)],
        "trace-zero": lambda: X[ctx.vtrace(X) == 0],
        "norm-one": lambda: X[ctx.vnorm(X) == 1],
    }
    if spec not in shorthand:
        raise GridError(f"unknown element domain {spec!r}")
    return [int(x) for x in shorthand[spec]()]


def _int_domain(ctx, spec):
    if isinstance(spec, list):
        return [int(item) for item in spec]
    q, divs = ctx.q, divisors_of_order(ctx)
    if spec.startswith("range:"):
        try:
            lo, hi = (int(tok) for tok in spec.split(":")[1:3])
        except ValueError:
            raise GridError(f"bad range {spec!r}") from None
        return list(range(lo, hi + 1))
    if spec.startswith("coprime:"):
        try:
            modulus = int(spec.split(":", 1)[1])
        except ValueError:
            raise GridError(f"bad coprime spec {spec!r}") from None
        return [r for r in range(1, modulus + 1) if gcd(r, modulus) == 1]
    filters = {
        "divisors": lambda d: True,
        "divisors-of-q-1": lambda d: (q - 1) % d == 0,
        "divisors-of-q+1": lambda d: (q + 1) % d == 0,
        "odd-divisors-of-q-1": lambda d: (q - 1) % d == 0 and d % 2 == 1 and d >= 3,
        "even-divisors-of-q-1": lambda d: (q - 1) % d == 0 and d % 2 == 0,
        "multiples-of-3": lambda d: d % 3 == 0,
        "multiples-of-4": lambda d: d % 4 == 0,
    }
    if spec not in filters:
        raise GridError(f"unknown integer domain {spec!r}")
    return [d for d in divs if filters[spec](d)]


def _poly_domain(ctx, spec):
    if isinstance(spec, list):
        return [parse_poly(ctx, str(item)) for item in spec]
    if isinstance(spec, dict):
        degree = int(spec.get("degree_below", 1))
        coeffs = _element_domain(ctx, spec.get("coeffs", "subfield"))
        return [Poly(ctx, combo) for combo in itertools.product(coeffs, repeat=degree)]
    if spec == "one":
        return [Poly.constant(ctx, 1)]
    raise GridError(f"unknown phi domain {spec!r}")


def resolve_domain(ctx, var, spec):
    try:
        if var in INT_VARS:
            values = _int_domain(ctx, spec)
        elif var in POLY_VARS:
            values = _poly_domain(ctx, spec)
        elif var in CHOICE_VARS:
            values = list(spec)
        else:
            values = _element_domain(ctx, spec)
    except (FieldError, PolyFormatError) as e:
        raise GridError(f"bad domain for {var}: {e}") from None
    if not values:
        logger.warning("domain for %s is empty in F_%d^2: %r", var, ctx.q, spec)
    return values


# ─── Plans ────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class GridPlan:
    ctx: object
    template: object
    variables: tuple
    domains: tuple

    @property
    def size(self):
        return reduce(lambda acc, dom: acc * len(dom), self.domains, 1)

    def values_at(self, index):
        if not 0 <= index < self.size:
            raise GridError(f"tuple index {index} outside grid of size {self.size}")
        out = {}
        for var, dom in zip(reversed(self.variables), reversed(self.domains)):
            index, digit = divmod(index, len(dom))
            out[var] = dom[digit]
        return out

    def params_at(self, index):
        """FamilyParams for the tuple; ParamsError when the tuple leaves the family."""
        return self.template.build(self.ctx, self.values_at(index))

    def indices(self, budget=None, seed=0):
        """All indices, or a sorted seeded sample of at most `budget` distinct ones."""
        size = self.size
        if budget is None or budget >= size:
            return np.arange(size, dtype=np.int64)
        rng = np.random.default_rng(seed)
        return np.unique(rng.integers(0, size, size=budget, dtype=np.int64))


def build_plan(ctx, rule_id, grid=None):
    """Plan over the rule's template; grid entries override template and rule defaults."""
    grid = dict(grid or {})
    rule = get_rule(rule_id) if rule_id in RULES else None
    template_name = grid.pop("template", None) or (rule.template if rule else rule_id)
    if template_name not in TEMPLATES:
        raise GridError(f"unknown template {template_name!r}")
    template = TEMPLATES[template_name]
    unknown = set(grid) - set(template.variables)
    if unknown:
        raise GridError(f"{template_name} has no variables {sorted(unknown)}; "
                        f"expected {list(template.variables)}")
    specs = dict(template.defaults)
    if rule and rule.template == template_name:
        specs.update(rule.grid_defaults)
    specs.update(grid)
    domains = tuple(resolve_domain(ctx, var, specs[var]) for var in template.variables)
    plan = GridPlan(ctx=ctx, template=template, variables=template.variables, domains=domains)
    logger.debug("grid for %s over F_%d^2: %s tuples", rule_id, ctx.q, plan.size)
    return plan
