"""Single-site Glauber dynamics and phase-structure observables.

The chain picks a uniform vertex and resamples its color from the
weights restricted to what the neighborhood allows, so the stationary
law is exactly the Gibbs distribution. On top of the dynamics sit the
structural observables: ideal edges (edges whose endpoint neighborhoods
show exactly the two palettes of a maximal pair), the not-ideal
probability estimator with its exact enumeration twin, and a phase
classifier that labels a coloring by the largest ideal component.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .constraint_graph import (
    ConstraintGraph,
    MaximalPair,
    WeightSet,
    mask_from,
    mask_members,
    subset_weight,
    eta_and_maximal_pairs,
)
from .errors import InvalidColoring, NoValidInitial
from .exact import (
    Coloring,
    coloring_weight,
    enumerate_colorings,
    is_valid_coloring,
    partition_function,
)
from .torus import TorusGraph

_GREEDY_RESTARTS = 100
_RNG_BUFFER = 1 << 14

# Desk-scale defaults; the asymptotic theory leaves the thresholds free,
# so these are explicit configuration, not derived constants.
DEFAULT_DEFECT_CAP = 0.1
DEFAULT_BALANCE_TOL = 0.2


@dataclass(frozen=True)
class ChainConfig:
    """Run-length, seed, and conditioning parameters for one chain."""

    steps: int
    burn_in: int = 0
    seed: int = 0
    pinned: tuple[int, int] | None = None
    thin: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be positive")
        if not (0 <= self.burn_in < self.steps):
            raise ValueError("burn_in must satisfy 0 <= burn_in < steps")
        if self.thin < 1:
            raise ValueError("thin must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")


@dataclass
class ChainStats:
    steps: int = 0
    forced_moves: int = 0
    color_changes: int = 0


def chain_rng(seed: int, chain_index: int = 0) -> np.random.Generator:
    """Independent stream per chain index, all derived from one seed."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(chain_index,))
    )


def _draw_tables(g: ConstraintGraph, w: WeightSet):
    """mask -> (colors, cumulative float weights); built lazily per mask."""
    cache: dict[int, tuple[tuple[int, ...], list[float]]] = {}

    def lookup(mask: int):
        entry = cache.get(mask)
        if entry is None:
            colors = mask_members(mask)
            cum, acc = [], 0.0
            for k in colors:
                acc += float(w[k])
                cum.append(acc)
            entry = (colors, cum)
            cache[mask] = entry
        return entry

    return lookup


def glauber_step(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    state: Sequence[int],
    rng: np.random.Generator,
    pinned_vertex: int | None = None,
) -> Coloring:
    """One resampling move; the pinned vertex is never selected.

    The compatible set always contains the current color, so the output
    stays valid.
    """
    free = t.n - (1 if pinned_vertex is not None else 0)
    idx = int(rng.integers(0, free))
    if pinned_vertex is not None and idx >= pinned_vertex:
        idx += 1
    cand = g.full_mask
    for u in t.neighbors(idx):
        cand &= g.adj[state[u]]
    colors, cum = _draw_tables(g, w)(cand)
    out = list(state)
    if len(colors) == 1:
        out[idx] = colors[0]
    else:
        r = rng.random() * cum[-1]
        out[idx] = colors[min(bisect_right(cum, r), len(colors) - 1)]
    return tuple(out)


def _greedy_initial(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    rng: np.random.Generator,
    pinned: tuple[int, int] | None,
) -> list[int]:
    lookup = _draw_tables(g, w)
    for _ in range(_GREEDY_RESTARTS):
        order = list(rng.permutation(t.n))
        state: list[int | None] = [None] * t.n
        if pinned is not None:
            state[pinned[0]] = pinned[1]
            order.remove(pinned[0])
        ok = True
        for v in order:
            cand = g.full_mask
            for u in t.neighbors(v):
                if state[u] is not None:
                    cand &= g.adj[state[u]]
            if cand == 0:
                ok = False
                break
            colors, cum = lookup(cand)
            if len(colors) == 1:
                state[v] = colors[0]
            else:
                r = rng.random() * cum[-1]
                state[v] = colors[min(bisect_right(cum, r), len(colors) - 1)]
        if ok:
            return state  # type: ignore[return-value]
    raise NoValidInitial(
        f"greedy initialization failed {_GREEDY_RESTARTS} times"
    )


def _pure_initial(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    pair: MaximalPair,
    rng: np.random.Generator,
    pinned: tuple[int, int] | None,
) -> list[int]:
    lookup = _draw_tables(g, w)
    even, _ = t.side_sets()
    even_set = set(even)
    state = []
    for v in range(t.n):
        colors, cum = lookup(pair.a if v in even_set else pair.b)
        r = rng.random() * cum[-1]
        state.append(colors[min(bisect_right(cum, r), len(colors) - 1)])
    if pinned is not None:
        y, lcol = pinned
        state[y] = lcol
        # repair the neighborhood greedily if the pin broke it
        for u in t.neighbors(y):
            cand = g.full_mask
            for z in t.neighbors(u):
                cand &= g.adj[state[z]]
            if cand == 0:
                raise NoValidInitial("pin is incompatible with the pure state")
            if not (cand >> state[u]) & 1:
                colors, cum = lookup(cand)
                r = rng.random() * cum[-1]
                state[u] = colors[min(bisect_right(cum, r), len(colors) - 1)]
    return state


def _resolve_initial(t, g, w, initial, rng, pinned) -> list[int]:
    if initial == "uniform-greedy":
        return _greedy_initial(t, g, w, rng, pinned)
    if initial == "pure":
        _, pairs = eta_and_maximal_pairs(g, w)
        return _pure_initial(t, g, w, pairs[0], rng, pinned)
    if isinstance(initial, tuple) and len(initial) == 2 and isinstance(
        initial[1], MaximalPair
    ):
        tag, pair = initial
        if tag != "pure":
            raise ValueError(f"unknown initializer {initial!r}")
        return _pure_initial(t, g, w, pair, rng, pinned)
    if not is_valid_coloring(t, g, initial):
        raise InvalidColoring("explicit initial coloring is not valid")
    state = list(initial)
    if pinned is not None and state[pinned[0]] != pinned[1]:
        raise InvalidColoring("explicit initial coloring contradicts the pin")
    return state


def run_chain(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    cfg: ChainConfig,
    initial="uniform-greedy",
    *,
    chain_index: int = 0,
    stats: ChainStats | None = None,
) -> Iterator[Coloring]:
    """Stream thinned post-burn-in states; deterministic given the config.

    The pinned vertex (if any) keeps its color for the whole run, which
    targets the conditional Gibbs law exactly. Initializers: a coloring,
    "uniform-greedy" (random order, weighted greedy fill, restarts), or
    "pure" / ("pure", pair) for a two-palette start.
    """
    if cfg.pinned is not None:
        y, lcol = cfg.pinned
        if not (0 <= y < t.n) or not (0 <= lcol < g.h):
            raise ValueError("pinned pair outside instance")
    rng = chain_rng(cfg.seed, chain_index)
    state = _resolve_initial(t, g, w, initial, rng, cfg.pinned)
    pinned_vertex = cfg.pinned[0] if cfg.pinned is not None else None
    lookup = _draw_tables(g, w)
    nbrs = t.neighbor_table()
    adj = g.adj
    full = g.full_mask
    free_count = t.n - (1 if pinned_vertex is not None else 0)

    def stream() -> Iterator[Coloring]:
        vbuf = ubuf = None
        pos = _RNG_BUFFER
        for step in range(1, cfg.steps + 1):
            if pos == _RNG_BUFFER:
                vbuf = rng.integers(0, free_count, size=_RNG_BUFFER)
                ubuf = rng.random(_RNG_BUFFER)
                pos = 0
            v = int(vbuf[pos])
            if pinned_vertex is not None and v >= pinned_vertex:
                v += 1
            cand = full
            for u in nbrs[v]:
                cand &= adj[state[u]]
            colors, cum = lookup(cand)
            if len(colors) == 1:
                new = colors[0]
                if stats is not None:
                    stats.forced_moves += 1
            else:
                r = ubuf[pos] * cum[-1]
                new = colors[min(bisect_right(cum, r), len(colors) - 1)]
            pos += 1
            if stats is not None:
                stats.steps += 1
                if new != state[v]:
                    stats.color_changes += 1
            state[v] = new
            if step > cfg.burn_in and (step - cfg.burn_in) % cfg.thin == 0:
                yield tuple(state)

    return stream()


def _pair_map(g: ConstraintGraph, w: WeightSet) -> dict[tuple[int, int], MaximalPair]:
    _, pairs = eta_and_maximal_pairs(g, w)
    return {(p.a, p.b): p for p in pairs}


def _palettes(t: TorusGraph, f: Sequence[int]) -> list[int]:
    return [mask_from(f[u] for u in t.neighbors(v)) for v in range(t.n)]


def is_ideal_edge(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    f: Sequence[int],
    e: tuple[int, int],
) -> MaximalPair | None:
    """The maximal pair whose palettes the edge exhibits, if any.

    The even endpoint's neighborhood must show exactly B and the odd
    endpoint's exactly A for some maximal pair (A,B); the pair is then
    unique. Accepts the edge in either orientation.
    """
    u, v = e
    if t.parity(u) == 1:
        u, v = v, u
    if t.parity(u) != 0 or v not in t.neighbors(u):
        raise ValueError(f"({e[0]},{e[1]}) is not a torus edge")
    pal_u = mask_from(f[z] for z in t.neighbors(u))
    pal_v = mask_from(f[z] for z in t.neighbors(v))
    return _pair_map(g, w).get((pal_v, pal_u))


def ideal_edge_map(
    t: TorusGraph, g: ConstraintGraph, w: WeightSet, f: Sequence[int]
) -> dict[tuple[int, int], MaximalPair]:
    """All ideal edges of f at once, keyed by (even endpoint, odd endpoint)."""
    pairs = _pair_map(g, w)
    pal = _palettes(t, f)
    out = {}
    for u, v in t.edges():
        if t.parity(u) == 1:
            u, v = v, u
        hit = pairs.get((pal[v], pal[u]))
        if hit is not None:
            out[(u, v)] = hit
    return out


def ideal_fraction(
    t: TorusGraph, g: ConstraintGraph, w: WeightSet, f: Sequence[int]
) -> Fraction:
    return Fraction(len(ideal_edge_map(t, g, w, f)), t.num_edges)


def exact_not_ideal_probability(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    edge: tuple[int, int] | None = None,
) -> Fraction:
    """Exact Gibbs probability that a fixed edge is not ideal, by enumeration."""
    if edge is None:
        edge = (0, t.shift(0, t.d, 1))
    z = partition_function(t, g, w).z
    bad = Fraction(0)
    for f in enumerate_colorings(t, g):
        if is_ideal_edge(t, g, w, f, edge) is None:
            bad += coloring_weight(t, g, w, f)
    return bad / z


def _batch_stderr(xs: list[float]) -> float:
    nb = max(2, min(64, int(math.isqrt(len(xs)))))
    size = len(xs) // nb
    if size == 0:
        return float("inf")
    means = [
        sum(xs[i * size : (i + 1) * size]) / size for i in range(nb)
    ]
    grand = sum(means) / nb
    var = sum((mu - grand) ** 2 for mu in means) / (nb - 1)
    return math.sqrt(var / nb)


def epsilon_estimate(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    cfg: ChainConfig,
    *,
    all_edges: bool = True,
    initial="uniform-greedy",
) -> dict:
    """Monte-Carlo estimate of Pr(edge not ideal) with batch-means stderr.

    By vertex-transitivity every edge has the same probability, so the
    default averages the not-ideal indicator over all edges per sample
    (same mean, lower variance). all_edges=False watches the single
    edge from the origin along the last coordinate instead.
    """
    pairs = _pair_map(g, w)
    edge0 = (0, t.shift(0, t.d, 1))
    # orient every edge (even endpoint, odd endpoint)
    edges = [
        ((u, v) if t.parity(u) == 0 else (v, u))
        for u, v in t.edges()
    ]
    xs: list[float] = []
    for f in run_chain(t, g, w, cfg, initial):
        pal = _palettes(t, f)
        if all_edges:
            bad = sum(
                1 for u, v in edges if (pal[v], pal[u]) not in pairs
            )
            xs.append(bad / len(edges))
        else:
            u, v = edge0
            xs.append(float((pal[v], pal[u]) not in pairs))
    mean = sum(xs) / len(xs)
    return {
        "p_not_ideal": mean,
        "stderr": _batch_stderr(xs),
        "n_samples": len(xs),
        "mode": "all-edges" if all_edges else "single-edge",
    }


@dataclass(frozen=True)
class PhaseLabel:
    """Classification of one coloring by its ideal-edge structure."""

    kind: str  # "pure" or "exceptional"
    pair: MaximalPair | None
    defect_e: frozenset[int]
    defect_o: frozenset[int]
    ideal_fraction: Fraction
    balanced: bool | None
    deviations: tuple[tuple[int, float], ...] = field(default=())


def classify(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    f: Sequence[int],
    *,
    defect_cap: float = DEFAULT_DEFECT_CAP,
    balance_tol: float = DEFAULT_BALANCE_TOL,
) -> PhaseLabel:
    """Label a coloring Pure(A,B) or Exceptional from its ideal subgraph.

    Pure requires the largest ideal-edge component to cover at least
    (1 - defect_cap) of all vertices; its edges agree on one maximal pair
    by connectivity, and every component vertex is automatically colored
    inside its side's class, so the defect sets are small by
    construction. Balance compares per-color side frequencies against
    the within-class weight proportions, multiplicatively.
    """
    edge_pairs = ideal_edge_map(t, g, w, f)
    frac = Fraction(len(edge_pairs), t.num_edges)
    if not edge_pairs:
        return PhaseLabel("exceptional", None, frozenset(), frozenset(), frac, None)

    comp = list(range(t.n))

    def find(a: int) -> int:
        while comp[a] != a:
            comp[a] = comp[comp[a]]
            a = comp[a]
        return a

    for u, v in edge_pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            comp[ru] = rv
    sizes: dict[int, int] = {}
    touched = {z for e in edge_pairs for z in e}
    for z in touched:
        r = find(z)
        sizes[r] = sizes.get(r, 0) + 1
    root = max(sizes, key=lambda r: (sizes[r], -r))
    if sizes[root] < (1 - defect_cap) * t.n:
        return PhaseLabel("exceptional", None, frozenset(), frozenset(), frac, None)

    component_pairs = {
        p for e, p in edge_pairs.items() if find(e[0]) == root
    }
    assert len(component_pairs) == 1  # connectivity forces agreement
    pair = component_pairs.pop()
    even, odd = t.side_sets()
    defect_e = frozenset(v for v in even if not (pair.a >> f[v]) & 1)
    defect_o = frozenset(v for v in odd if not (pair.b >> f[v]) & 1)

    half = t.n // 2
    devs = []
    balanced = True
    for side, mask, side_vertices in (("e", pair.a, even), ("o", pair.b, odd)):
        lam = subset_weight(w, mask)
        counts: dict[int, int] = {}
        for v in side_vertices:
            counts[f[v]] = counts.get(f[v], 0) + 1
        for k in mask_members(mask):
            target = w[k] / lam
            actual = Fraction(counts.get(k, 0), half)
            rel = float(abs(actual - target) / target)
            devs.append((k, rel))
            if rel > balance_tol:
                balanced = False
    return PhaseLabel(
        "pure", pair, defect_e, defect_o, frac, balanced, tuple(devs)
    )
