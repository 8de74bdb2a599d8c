"""Limit-law targets, long-range influence, and partition-function predictors.

The target vectors here are computed from the constraint graph and its
weights alone: under approximate equipartition the phase classes carry
equal mass, so an even vertex's color law tends to the class-uniform
mixture (1/|M|) sum of lambda_k/lambda_A, and conditioning on a far
vertex simply restricts which classes remain. The exact finite-torus
side of every comparison comes from the counting module, so distances
between the two are honest measurements, not simulations.

Conditional targets follow the class-uniform reading: conditioning on
color ell keeps every compatible class equally likely. The posterior
variant (classes reweighted by how likely ell is under each) is exposed
separately, as is the raw unnormalized class sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .constraint_graph import (
    ConstraintGraph,
    MaximalPair,
    WeightSet,
    apply_perm_to_mask,
    automorphisms,
    common_neighborhood,
    complete_graph,
    eta_and_maximal_pairs,
    subset_weight,
)
from .errors import NotEquipartition, ZeroConditioning, ZeroDenominator
from .exact import exact_marginal
from .torus import TorusGraph

SAME_SIDE = "same-side"
CROSS_SIDE = "cross-side"
EVEN = "even"
ODD = "odd"


# ------------------------------------------------------- equipartition

@lru_cache(maxsize=None)
def equipartition_class(g: ConstraintGraph, w: WeightSet) -> str:
    """Which sufficient condition for approximate equipartition holds.

    Returns "singleton", "two-class-swap", "transitive" (a single orbit
    of the maximal pairs under weight-preserving color automorphisms
    together with the (A,B) -> (B,A) swap), or "unknown". Relative class
    sizes are never guessed: anything else is "unknown".
    """
    _, pairs = eta_and_maximal_pairs(g, w)
    mset = set(pairs)
    if len(mset) == 1:
        return "singleton"
    if len(mset) == 2:
        p, q = mset
        if p.a == q.b and p.b == q.a:
            return "two-class-swap"
    # The swap commutes with every componentwise relabeling and the full
    # group is enumerated, so the closure of the first pair is its image
    # set together with the image set of its swap; no search needed.
    first = pairs[0]
    seeds = (first, MaximalPair(first.b, first.a))
    orbit = set(seeds)
    for pi in automorphisms(g, w):
        for seed in seeds:
            orbit.add(
                MaximalPair(
                    apply_perm_to_mask(pi, seed.a),
                    apply_perm_to_mask(pi, seed.b),
                )
            )
    assert orbit <= mset  # symmetries cannot leave the maximal set
    return "transitive" if orbit == mset else "unknown"


def _equipartition_pairs(
    g: ConstraintGraph, w: WeightSet
) -> tuple[MaximalPair, ...]:
    if equipartition_class(g, w) == "unknown":
        raise NotEquipartition(
            "no equipartition condition detected (singleton, two-class "
            "swap, or transitive maximal pairs); targets are undefined"
        )
    return eta_and_maximal_pairs(g, w)[1]


def _check_side(side: str) -> None:
    if side not in (EVEN, ODD):
        raise ValueError(f"side must be {EVEN!r} or {ODD!r}, got {side!r}")


def _check_relation(relation: str) -> None:
    if relation not in (SAME_SIDE, CROSS_SIDE):
        raise ValueError(
            f"relation must be {SAME_SIDE!r} or {CROSS_SIDE!r}, got {relation!r}"
        )


# ----------------------------------------------------- theorem targets

def theorem_occupation_target(
    g: ConstraintGraph, w: WeightSet, side: str, k: int
) -> Fraction:
    """Limit of p(f(x)=k) for x on the given side: the class-uniform
    average of lambda_k/lambda over classes containing k."""
    _check_side(side)
    pairs = _equipartition_pairs(g, w)
    total = Fraction(0)
    for pair in pairs:
        cls = pair.a if side == EVEN else pair.b
        if (cls >> k) & 1:
            total += w[k] / subset_weight(w, cls)
    return total / len(pairs)


def theorem_occupation_vector(
    g: ConstraintGraph, w: WeightSet, side: str = EVEN
) -> tuple[Fraction, ...]:
    return tuple(
        theorem_occupation_target(g, w, side, k) for k in range(g.h)
    )


def _conditioning_pairs(
    g: ConstraintGraph, w: WeightSet, relation: str, ell: int
) -> tuple[MaximalPair, ...]:
    """Classes compatible with seeing ell at the conditioning vertex.

    The observed vertex sits on the even side for same-side relations
    and on the odd side for cross-side ones; x is always even.
    """
    _check_relation(relation)
    pairs = _equipartition_pairs(g, w)
    if relation == SAME_SIDE:
        kept = tuple(p for p in pairs if (p.a >> ell) & 1)
    else:
        kept = tuple(p for p in pairs if (p.b >> ell) & 1)
    if not kept:
        raise ZeroConditioning(
            f"color {ell} never appears on the conditioning side"
        )
    return kept


def theorem_conditional_target(
    g: ConstraintGraph, w: WeightSet, relation: str, k: int, ell: int
) -> Fraction:
    """Limit of p(f(x)=k | f(y)=ell) for even x and far y.

    Class-uniform over the classes compatible with the conditioning:
    each surviving (A,B) contributes lambda_k/lambda_A when k is in A.
    """
    kept = _conditioning_pairs(g, w, relation, ell)
    total = Fraction(0)
    for pair in kept:
        if (pair.a >> k) & 1:
            total += w[k] / subset_weight(w, pair.a)
    return total / len(kept)


def theorem_conditional_vector(
    g: ConstraintGraph, w: WeightSet, relation: str, ell: int
) -> tuple[Fraction, ...]:
    return tuple(
        theorem_conditional_target(g, w, relation, k, ell)
        for k in range(g.h)
    )


def theorem_raw_conditional_sum(
    g: ConstraintGraph, w: WeightSet, relation: str, k: int, ell: int
) -> Fraction:
    """The unnormalized class sum (1/|M|) sum lambda_k/lambda_A over
    classes compatible with ell: the joint-style display itself."""
    _check_relation(relation)
    pairs = _equipartition_pairs(g, w)
    total = Fraction(0)
    for pair in pairs:
        cond_cls = pair.a if relation == SAME_SIDE else pair.b
        if ((cond_cls >> ell) & 1) and ((pair.a >> k) & 1):
            total += w[k] / subset_weight(w, pair.a)
    return total / len(pairs)


def class_posterior_conditional(
    g: ConstraintGraph, w: WeightSet, relation: str, k: int, ell: int
) -> Fraction:
    """Bayes variant: classes weighted by how likely ell is under each.

    Differs from the class-uniform target exactly when the conditioning
    class weight lambda_A varies across the surviving pairs.
    """
    kept = _conditioning_pairs(g, w, relation, ell)
    num = Fraction(0)
    den = Fraction(0)
    for pair in kept:
        cond_cls = pair.a if relation == SAME_SIDE else pair.b
        u = w[ell] / subset_weight(w, cond_cls)
        den += u
        if (pair.a >> k) & 1:
            num += u * w[k] / subset_weight(w, pair.a)
    return num / den


def theorem_influence_ratio(
    g: ConstraintGraph, w: WeightSet, relation: str, k: int, ell: int
) -> Fraction:
    """Limit of the conditional-to-unconditional ratio at far vertices."""
    base = theorem_occupation_target(g, w, EVEN, k)
    if base == 0:
        raise ZeroDenominator(f"occupation target of color {k} is zero")
    return theorem_conditional_target(g, w, relation, k, ell) / base


# ---------------------------------------------------- exact comparisons

def influence_ratio(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    x: int,
    k: int,
    y: int,
    ell: int,
    *,
    method: str = "auto",
) -> Fraction:
    """Exact finite-torus ratio p(f(x)=k | f(y)=ell) / p(f(x)=k)."""
    base = exact_marginal(t, g, w, x, k, method=method)
    if base == 0:
        raise ZeroDenominator(f"p(f({x})={k}) is zero on this torus")
    return exact_marginal(t, g, w, x, k, (y, ell), method=method) / base


def antipode(t: TorusGraph) -> int:
    """The vertex farthest from the origin: all coordinates m/2."""
    return t.encode((t.m // 2,) * t.d)


def far_vertex(t: TorusGraph, side: str) -> int:
    """Farthest vertex from the origin within one parity class
    (smallest index among ties)."""
    _check_side(side)
    want = 0 if side == EVEN else 1
    dist = [-1] * t.n
    dist[0] = 0
    queue = [0]
    while queue:
        nxt = []
        for v in queue:
            for u in t.neighbors(v):
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        queue = nxt
    best = None
    for v in range(t.n):
        if t.parity(v) == want and (best is None or dist[v] > dist[best]):
            best = v
    return best


def exact_occupation_vector(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    x: int = 0,
    condition: tuple[int, int] | None = None,
    *,
    method: str = "auto",
) -> tuple[Fraction, ...]:
    return tuple(
        exact_marginal(t, g, w, x, k, condition, method=method)
        for k in range(g.h)
    )


def sup_distance(u: Sequence, v: Sequence):
    """d_inf between two vectors; exact when both sides are exact."""
    if len(u) != len(v):
        raise ValueError("vectors have different lengths")
    return max(abs(a - b) for a, b in zip(u, v))


@dataclass(frozen=True)
class ComparisonRecord:
    """A target vector next to its measured counterparts."""

    label: str
    target: tuple
    exact: tuple | None = None
    empirical: tuple | None = None
    stderr: float | None = None
    distance: object = None

    def to_json_dict(self) -> dict:
        def num(x):
            return [str(x.numerator), str(x.denominator)] if isinstance(
                x, Fraction
            ) else x

        return {
            "label": self.label,
            "target": [num(x) for x in self.target],
            "exact": None
            if self.exact is None
            else [num(x) for x in self.exact],
            "empirical": None
            if self.empirical is None
            else list(self.empirical),
            "stderr": self.stderr,
            "d_inf_distance": num(self.distance),
        }


def conditional_comparison(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    relation: str,
    ell: int,
    *,
    y: int | None = None,
    target: Sequence | None = None,
    method: str = "auto",
) -> ComparisonRecord:
    """Exact conditional occupation at the origin vs the limit target.

    y defaults to the farthest vertex on the side the relation implies;
    an explicit target overrides the class-uniform one.
    """
    _check_relation(relation)
    if y is None:
        y = far_vertex(t, EVEN if relation == SAME_SIDE else ODD)
    if target is None:
        target = theorem_conditional_vector(g, w, relation, ell)
    vec = exact_occupation_vector(t, g, w, 0, (y, ell), method=method)
    return ComparisonRecord(
        label=f"{relation} ell={ell} y={y} m={t.m} d={t.d}",
        target=tuple(target),
        exact=vec,
        distance=sup_distance(vec, target),
    )


def occupation_comparison(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    *,
    x: int = 0,
    target: Sequence | None = None,
    method: str = "auto",
) -> ComparisonRecord:
    if target is None:
        target = theorem_occupation_vector(g, w, EVEN)
    vec = exact_occupation_vector(t, g, w, x, method=method)
    return ComparisonRecord(
        label=f"occupation x={x} m={t.m} d={t.d}",
        target=tuple(target),
        exact=vec,
        distance=sup_distance(vec, target),
    )


# ------------------------------------------------ partition predictors

def _exp_string(c: Fraction) -> str:
    if c == 0:
        return "1"
    if c == Fraction(1, 2):
        return "sqrt(e)"
    if c == 1:
        return "e"
    return f"exp({c})"


@dataclass(frozen=True)
class ConjecturePrediction:
    """Corrected first-order weight of one phase class:
    base^half_volume * exp(correction_exponent)."""

    pair: MaximalPair
    base: Fraction
    half_volume: int
    correction_exponent: Fraction
    prefactor_model: str = field(default="")

    def __post_init__(self):
        if self.correction_exponent < 0:
            raise ValueError("correction exponent must be nonnegative")
        if not self.prefactor_model:
            object.__setattr__(
                self, "prefactor_model", _exp_string(self.correction_exponent)
            )

    def leading_weight(self) -> Fraction:
        return self.base**self.half_volume

    def log2_value(self) -> float:
        return self.half_volume * math.log2(float(self.base)) + float(
            self.correction_exponent
        ) / math.log(2)

    def value(self) -> float:
        return float(self.leading_weight()) * math.exp(
            float(self.correction_exponent)
        )


def conjecture_L(
    g: ConstraintGraph, w: WeightSet, pair: MaximalPair, t: TorusGraph
) -> Fraction:
    """Second-order interaction term of the predicted class weight.

    Sums, over colors that could replace a class on one side, the weight
    of the replacement times the surviving palette weight raised to the
    torus degree. Zero exactly when neither class can be left.
    """
    _, pairs = eta_and_maximal_pairs(g, w)
    if pair not in pairs:
        raise ValueError(f"{pair} is not a maximal pair of this instance")
    deg = t.degree
    a, b = pair
    la, lb = subset_weight(w, a), subset_weight(w, b)
    first = Fraction(0)
    for k in range(g.h):
        if not (a >> k) & 1:
            first += w[k] * subset_weight(
                w, common_neighborhood(g, a | (1 << k))
            ) ** deg
    second = Fraction(0)
    for ell in range(g.h):
        if not (b >> ell) & 1:
            second += w[ell] * subset_weight(
                w, common_neighborhood(g, b | (1 << ell))
            ) ** deg
    return first / (2 * la * lb**deg) + second / (2 * lb * la**deg)


def conjecture_weight_prediction(
    g: ConstraintGraph, w: WeightSet, pair: MaximalPair, t: TorusGraph
) -> ConjecturePrediction:
    ell = conjecture_L(g, w, pair, t)
    return ConjecturePrediction(
        pair=pair,
        base=subset_weight(w, pair.a) * subset_weight(w, pair.b),
        half_volume=t.n // 2,
        correction_exponent=t.n * ell,
    )


@dataclass(frozen=True)
class PartitionPrediction:
    """Sum of per-class predictions, with a closed form when they agree."""

    predictions: tuple[ConjecturePrediction, ...]
    prefactor_model: str | None

    def total(self) -> float:
        return sum(p.value() for p in self.predictions)


def conjecture_partition_prediction(
    g: ConstraintGraph, w: WeightSet, t: TorusGraph
) -> PartitionPrediction:
    _, pairs = eta_and_maximal_pairs(g, w)
    preds = tuple(
        conjecture_weight_prediction(g, w, p, t) for p in pairs
    )
    shapes = {(p.base, p.correction_exponent) for p in preds}
    model = None
    if len(shapes) == 1:
        c = preds[0].correction_exponent
        n = len(preds)
        model = (
            str(n)
            if c == 0
            else f"{n}e"
            if c == 1
            else f"{n}*{_exp_string(c)}"
        )
    return PartitionPrediction(predictions=preds, prefactor_model=model)


def conjecture_f_q(q: int, d: int) -> Fraction:
    """Correction exponent for counting proper q-colorings at m=2."""
    if q < 2 or d < 1:
        raise ValueError("need q >= 2 and d >= 1")
    lo, hi = q // 2, (q + 1) // 2
    return Fraction(hi, 2 * lo) * (2 - Fraction(2, hi)) ** d + Fraction(
        lo, 2 * hi
    ) * (2 - Fraction(2, lo)) ** d


@dataclass(frozen=True)
class ColoringCountPrediction:
    """Predicted proper q-coloring count of the m=2 torus of dimension d:
    pair_count * base^(2^(d-1)) * exp(correction_exponent)."""

    q: int
    d: int
    pair_count: int
    base: int
    correction_exponent: Fraction

    @property
    def prefactor_model(self) -> str:
        e = _exp_string(self.correction_exponent)
        if e == "1":
            return str(self.pair_count)
        if e == "e":
            return f"{self.pair_count}e"
        return f"{self.pair_count}*{e}"

    def value(self) -> float:
        return (
            self.pair_count
            * float(self.base) ** (2 ** (self.d - 1))
            * math.exp(float(self.correction_exponent))
        )


def coloring_count_prediction(q: int, d: int) -> ColoringCountPrediction:
    if q < 2 or d < 1:
        raise ValueError("need q >= 2 and d >= 1")
    return ColoringCountPrediction(
        q=q,
        d=d,
        pair_count=(1 + (q % 2)) * comb(q, q // 2),
        base=(q // 2) * ((q + 1) // 2),
        correction_exponent=conjecture_f_q(q, d),
    )


def consistency_L_vs_f(q: int, d: int) -> bool:
    """The per-class interaction term and the coloring-count exponent
    describe the same correction: 2^d * L equals f(q) exactly."""
    g = complete_graph(q)
    w = WeightSet.ones(q)
    a = (1 << (q // 2)) - 1  # first floor(q/2) colors
    b = g.full_mask ^ a
    ell = conjecture_L(g, w, MaximalPair(a, b), TorusGraph(2, d))
    return 2**d * ell == conjecture_f_q(q, d)
