"""
agw.py — Commutative-diagram bijectivity checks
===============================================
A diagram is four maps over finite sets given as value tables:

        f
    R ----> R
    |       |
  θ |       | θ̄
    v       v
    S ----> S̄
        g

with θ̄ ∘ f = g ∘ θ, θ and θ̄ surjective and #S = #S̄. Under those
conditions f is a bijection of R exactly when g is a bijection S -> S̄
and f is injective on every fiber θ^{-1}(s). agw_equivalence evaluates
both sides independently so a disagreement points at a bug.
"""

import logging
from dataclasses import dataclass

import numpy as np

from poly import FuncTable

logger = logging.getLogger(__name__)

REASON_NOT_COMMUTATIVE = "not-commutative"
REASON_THETA = "theta-not-surjective"
REASON_THETA_BAR = "theta-bar-not-surjective"


class DiagramError(ValueError):
    """Tables do not form a diagram over the stated sets."""


class AgwPreconditionError(ValueError):
    """The diagram does not satisfy the criterion's hypotheses."""

    def __init__(self, reason):
        super().__init__(f"diagram precondition failed: {reason}")
        self.reason = reason


def _as_set(values):
    return np.unique(np.asarray(values, dtype=np.int64))


def _same_keys(table, domain):
    return len(table) == len(domain) and np.array_equal(table._keys, domain)


@dataclass(frozen=True, eq=False)
class Diagram:
    R: np.ndarray
    S: np.ndarray
    S_bar: np.ndarray
    f: FuncTable
    theta: FuncTable
    theta_bar: FuncTable
    g: FuncTable

    def __post_init__(self):
        for name in ("R", "S", "S_bar"):
            object.__setattr__(self, name, _as_set(getattr(self, name)))
        if len(self.S) != len(self.S_bar):
            raise DiagramError(f"#S = {len(self.S)} differs from #S_bar = {len(self.S_bar)}")
        for name, domain in (("f", self.R), ("theta", self.R), ("theta_bar", self.R), ("g", self.S)):
            if not _same_keys(getattr(self, name), domain):
                raise DiagramError(f"{name} is not total on its domain")


def surjective(T, codomain):
    """image(T) equals the codomain."""
    return bool(np.array_equal(T.image(), _as_set(codomain)))


def fibers(theta):
    """Preimage of every value of theta, each sorted."""
    out = {}
    order = np.argsort(theta.values, kind="stable")
    keys = theta.values[order]
    sources = theta.domain[order]
    bounds = np.flatnonzero(np.diff(keys)) + 1
    for chunk_keys, chunk in zip(np.split(keys, bounds), np.split(sources, bounds)):
        if len(chunk):
            out[int(chunk_keys[0])] = sorted(int(x) for x in chunk)
    return out


def check_commutes(D):
    """θ̄(f(x)) = g(θ(x)) for every x in R."""
    lhs = D.theta_bar.lookup(D.f.lookup(D.R), default=-1)
    rhs = D.g.lookup(D.theta.lookup(D.R), default=-2)
    return bool(np.array_equal(lhs, rhs))


def injective_on_fibers(f, theta):
    """No two points of one theta-fiber share an f-value."""
    pairs = np.stack([theta.lookup(theta.domain), f.lookup(theta.domain)], axis=1)
    return len(np.unique(pairs, axis=0)) == len(theta.domain)


def is_bijection(T, codomain):
    return len(T) == len(_as_set(codomain)) and surjective(T, codomain)


@dataclass(frozen=True)
class AgwResult:
    lhs: bool
    rhs: bool
    agree: bool

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "agree": self.agree}


def agw_equivalence(D):
    """Evaluate "f bijective" and "g bijective and f injective on fibers" separately."""
    if not check_commutes(D):
        raise AgwPreconditionError(REASON_NOT_COMMUTATIVE)
    if not surjective(D.theta, D.S):
        raise AgwPreconditionError(REASON_THETA)
    if not surjective(D.theta_bar, D.S_bar):
        raise AgwPreconditionError(REASON_THETA_BAR)
    lhs = is_bijection(D.f, D.R)
    rhs = is_bijection(D.g, D.S_bar) and injective_on_fibers(D.f, D.theta)
    if lhs != rhs:
        logger.error("bijectivity sides disagree: f %s, g/fibers %s", lhs, rhs)
    return AgwResult(lhs=lhs, rhs=rhs, agree=lhs == rhs)


# ─── Random diagrams ──────────────────────────────────

def _surjection(rng, size, k):
    """Random map range(size) -> range(k) hitting every value."""
    values = rng.integers(0, k, size=size)
    values[rng.permutation(size)[:k]] = np.arange(k)
    return values


def random_diagram(rng, size, kind="random"):
    """
    Seeded random valid diagram on R = range(size).

    kind "bijective" makes f a permutation and g a bijection; "random" picks g
    arbitrary and f(x) uniformly in θ̄^{-1}(g(θ(x))), which usually breaks
    injectivity.
    """
    R = np.arange(size, dtype=np.int64)
    k = int(rng.integers(1, size + 1))
    S = np.arange(k, dtype=np.int64)
    S_bar = S + size
    theta = _surjection(rng, size, k)
    if kind == "bijective":
        g = S_bar[rng.permutation(k)]
        perm = rng.permutation(size)
        theta_bar = np.empty(size, dtype=np.int64)
        theta_bar[perm] = g[theta]
        f = perm
    elif kind == "random":
        g = S_bar[rng.integers(0, k, size=k)] if rng.random() < 0.5 else S_bar[rng.permutation(k)]
        theta_bar = S_bar[_surjection(rng, size, k)]
        preimages = {int(s): np.flatnonzero(theta_bar == s) for s in np.unique(theta_bar)}
        f = np.array([rng.choice(preimages[int(g[t])]) for t in theta], dtype=np.int64)
    else:
        raise ValueError(f"unknown diagram kind {kind!r}")
    return Diagram(
        R=R, S=S, S_bar=S_bar,
        f=FuncTable(R, f),
        theta=FuncTable(R, theta),
        theta_bar=FuncTable(R, theta_bar),
        g=FuncTable(S, g),
    )
