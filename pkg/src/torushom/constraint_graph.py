"""Constraint graphs (color graphs) with rational vertex weights.

A constraint graph H encodes which colors may sit next to which: vertices
are colors 0..h-1, edges (loops allowed) are the permitted adjacent pairs.
Color subsets are bitmasks throughout. The central computation is the
extremal constant eta = max over fully-adjacent subset pairs (A,B) of
lambda_A * lambda_B, together with the set of ordered pairs achieving it.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional, Sequence

from .errors import CapExceeded, EmptyConstraint, ParseError

MAX_COLORS = 24

ColorSet = int  # bitmask over colors


def mask_from(colors) -> int:
    m = 0
    for c in colors:
        m |= 1 << c
    return m


def mask_members(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def mask_size(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class ConstraintGraph:
    """Symmetric adjacency on colors 0..h-1, loops allowed."""

    h: int
    adj: tuple[int, ...]  # adj[k] = bitmask of colors adjacent to k
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("need at least one color")
        if len(self.adj) != self.h:
            raise ValueError("adjacency length != color count")
        full = (1 << self.h) - 1
        for k, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError(f"adjacency row {k} references colors >= {self.h}")
        for i in range(self.h):
            for j in range(self.h):
                if bool(self.adj[i] >> j & 1) != bool(self.adj[j] >> i & 1):
                    raise ValueError("adjacency not symmetric")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(k) for k in range(self.h)))
        elif len(self.labels) != self.h:
            raise ValueError("labels length != color count")

    @property
    def full_mask(self) -> int:
        return (1 << self.h) - 1

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def is_loop(self, k: int) -> bool:
        return bool(self.adj[k] >> k & 1)

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (i, j) with i <= j; a loop appears as (k, k)."""
        return [(i, j) for i in range(self.h) for j in range(i, self.h)
                if self.has_edge(i, j)]

    def label_set(self, mask: int) -> tuple[str, ...]:
        return tuple(self.labels[k] for k in mask_members(mask))

    def relabeled(self, perm: Sequence[int]) -> "ConstraintGraph":
        """Apply a color permutation: new color perm[k] plays old k's role."""
        adj = [0] * self.h
        for k in range(self.h):
            row = 0
            for j in mask_members(self.adj[k]):
                row |= 1 << perm[j]
            adj[perm[k]] = row
        labels = [""] * self.h
        for k in range(self.h):
            labels[perm[k]] = self.labels[k]
        return ConstraintGraph(self.h, tuple(adj), tuple(labels))


@dataclass(frozen=True)
class WeightSet:
    """Strictly positive rational weight per color."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(Fraction(w) for w in self.weights)
        if any(w <= 0 for w in ws):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def ones(cls, h: int) -> "WeightSet":
        return cls((Fraction(1),) * h)

    @classmethod
    def parse(cls, text: str) -> "WeightSet":
        """Comma-separated rationals, e.g. "3/2,1,1"."""
        try:
            return cls(tuple(Fraction(part.strip()) for part in text.split(",")))
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(f"bad weight list {text!r}: {e}") from None

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, k: int) -> Fraction:
        return self.weights[k]

    def is_uniform(self) -> bool:
        return all(w == self.weights[0] for w in self.weights)

    def scaled(self, c) -> "WeightSet":
        c = Fraction(c)
        return WeightSet(tuple(w * c for w in self.weights))

    def scale_denominator(self) -> int:
        """Smallest positive integer C with C*lambda_k integral for all k."""
        return math.lcm(*(w.denominator for w in self.weights))

    def integer_scaled(self) -> tuple[int, tuple[int, ...]]:
        """(C, (C*lambda_k as ints)) for exact integer-weight counting."""
        c = self.scale_denominator()
        return c, tuple(int(w * c) for w in self.weights)


class MaximalPair(NamedTuple):
    a: ColorSet
    b: ColorSet


@dataclass(frozen=True)
class Blowup:
    """Unweighted graph with each color k expanded to a block of C*lambda_k
    clones; edges expand to complete bipartite links, loops to complete
    looped blocks. Reduces the weighted model to a uniform one."""

    graph: ConstraintGraph
    scale_c: int
    block_of: tuple[int, ...]  # blow-up vertex -> original color
    blocks: tuple[int, ...]  # original color -> bitmask of blow-up vertices

    def lift(self, mask: ColorSet) -> int:
        """Image of an original color set as a blow-up vertex set."""
        out = 0
        for k in mask_members(mask):
            out |= self.blocks[k]
        return out

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(mask_size(b) for b in self.blocks)


def all_adjacent(g: ConstraintGraph, a: ColorSet, b: ColorSet) -> bool:
    """True iff every color of a is adjacent to every color of b
    (vacuously true when either side is empty)."""
    for x in mask_members(a):
        if b & ~g.adj[x]:
            return False
    return True


def common_neighborhood(g: ConstraintGraph, a: ColorSet) -> ColorSet:
    """n(a): colors adjacent to everything in a; n(empty) = all colors."""
    out = g.full_mask
    m = a
    while m:
        low = m & -m
        out &= g.adj[low.bit_length() - 1]
        m ^= low
    return out


def nonadjacent_pair_count(g: ConstraintGraph, a: ColorSet, b: ColorSet) -> int:
    """Number of pairs (x, y) in a x b with x not adjacent to y."""
    total = 0
    for x in mask_members(a):
        total += mask_size(b & ~g.adj[x])
    return total


def subset_weight(w: WeightSet, t: ColorSet) -> Fraction:
    """lambda_t = sum of weights over the set; empty set weighs 0."""
    total = Fraction(0)
    for k in mask_members(t):
        total += w[k]
    return total


def eta_and_maximal_pairs(
    g: ConstraintGraph, w: WeightSet
) -> tuple[Fraction, tuple[MaximalPair, ...]]:
    """Extremal constant eta = max lambda_A*lambda_B over fully adjacent
    (A,B), with all ordered maximizing pairs.

    Scanning A over nonempty subsets and pairing with B = n(A) is exhaustive:
    weight positivity forces B = n(A) in any maximizer, and A = n(n(A))
    follows (a strictly larger first component would beat the maximum).
    """
    if len(w) != g.h:
        raise ValueError("weight count != color count")
    if g.h > MAX_COLORS:
        raise CapExceeded(f"subset scan capped at {MAX_COLORS} colors, got {g.h}")
    if not any(g.adj):
        raise EmptyConstraint("constraint graph has no edge or loop")

    best = Fraction(0)
    arg_masks: list[int] = []
    for a in range(1, 1 << g.h):
        b = common_neighborhood(g, a)
        if not b:
            continue
        prod = subset_weight(w, a) * subset_weight(w, b)
        if prod > best:
            best = prod
            arg_masks = [a]
        elif prod == best:
            arg_masks.append(a)

    if not arg_masks:
        raise EmptyConstraint("no adjacent pair of color subsets")

    pairs = []
    for a in arg_masks:
        b = common_neighborhood(g, a)
        assert common_neighborhood(g, b) == a, "maximizer must satisfy a = n(b)"
        pairs.append(MaximalPair(a, b))
    return best, tuple(pairs)


def support_family(g: ConstraintGraph, w: WeightSet) -> frozenset[int]:
    """First-coordinate projection of the maximal pair set."""
    _, pairs = eta_and_maximal_pairs(g, w)
    return frozenset(p.a for p in pairs)


def blowup(g: ConstraintGraph, w: WeightSet) -> Blowup:
    if len(w) != g.h:
        raise ValueError("weight count != color count")
    c, sizes = w.integer_scaled()
    blocks = []
    block_of = []
    start = 0
    for k in range(g.h):
        size = sizes[k]
        blocks.append(((1 << size) - 1) << start)
        block_of.extend([k] * size)
        start += size
    n = start
    adj = []
    for v in range(n):
        row = 0
        for j in mask_members(g.adj[block_of[v]]):
            row |= blocks[j]
        adj.append(row)
    labels = tuple(
        f"{g.labels[block_of[v]]}.{v - (blocks[block_of[v]] & -blocks[block_of[v]]).bit_length() + 1}"
        for v in range(n)
    )
    bg = ConstraintGraph(n, tuple(adj), labels)
    return Blowup(bg, c, tuple(block_of), tuple(blocks))


def check_blowup_pair_bijection(g: ConstraintGraph, w: WeightSet) -> bool:
    """Recompute the extremal structure on the blow-up (all-1 weights) and
    verify eta scales by C^2 and maximal pairs are exactly the lifted ones."""
    eta, pairs = eta_and_maximal_pairs(g, w)
    bu = blowup(g, w)
    beta, bpairs = eta_and_maximal_pairs(bu.graph, WeightSet.ones(bu.graph.h))
    if beta != eta * bu.scale_c**2:
        return False
    lifted = {(bu.lift(p.a), bu.lift(p.b)) for p in pairs}
    return lifted == {(p.a, p.b) for p in bpairs}


def automorphisms(
    g: ConstraintGraph, w: Optional[WeightSet] = None
) -> Iterator[tuple[int, ...]]:
    """All color permutations preserving adjacency (and weights if given),
    by backtracking with (weight, loop, degree-profile) pruning. Lazy."""
    if w is not None and len(w) != g.h:
        raise ValueError("weight count != color count")

    def signature(k):
        wt = w[k] if w is not None else None
        deg = mask_size(g.adj[k])
        nbr_profile = tuple(sorted(
            (mask_size(g.adj[j]), g.is_loop(j), w[j] if w is not None else None)
            for j in mask_members(g.adj[k])
        ))
        return (wt, g.is_loop(k), deg, nbr_profile)

    sigs = [signature(k) for k in range(g.h)]
    candidates = [
        [j for j in range(g.h) if sigs[j] == sigs[k]] for k in range(g.h)
    ]
    perm = [-1] * g.h
    used = [False] * g.h

    def extend(k: int) -> Iterator[tuple[int, ...]]:
        if k == g.h:
            yield tuple(perm)
            return
        for img in candidates[k]:
            if used[img]:
                continue
            ok = True
            for prev in range(k):
                if g.has_edge(k, prev) != bool(g.adj[img] >> perm[prev] & 1):
                    ok = False
                    break
            if ok and g.is_loop(k) == bool(g.adj[img] >> img & 1):
                perm[k] = img
                used[img] = True
                yield from extend(k + 1)
                used[img] = False
                perm[k] = -1

    yield from extend(0)


def apply_perm_to_mask(perm: Sequence[int], mask: int) -> int:
    out = 0
    for k in mask_members(mask):
        out |= 1 << perm[k]
    return out


# ---------------------------------------------------------------- presets


def complete_graph(q: int) -> ConstraintGraph:
    if q < 2:
        raise ValueError("complete target needs q >= 2")
    full = (1 << q) - 1
    return ConstraintGraph(q, tuple(full ^ (1 << k) for k in range(q)),
                           tuple(str(k + 1) for k in range(q)))


def complete_looped_graph(q: int) -> ConstraintGraph:
    full = (1 << q) - 1
    return ConstraintGraph(q, (full,) * q, tuple(str(k + 1) for k in range(q)))


def hard_core_graph() -> ConstraintGraph:
    # color 0 = "in" (unlooped), color 1 = "out" (looped, adjacent to both)
    return ConstraintGraph(2, (0b10, 0b11), ("in", "out"))


def widom_rowlinson_graph() -> ConstraintGraph:
    # fully looped path 1-2-3: the two outer colors exclude each other
    return ConstraintGraph(3, (0b011, 0b111, 0b110), ("1", "2", "3"))


def cycle_graph(n: int) -> ConstraintGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    adj = [0] * n
    for k in range(n):
        adj[k] = (1 << ((k + 1) % n)) | (1 << ((k - 1) % n))
    return ConstraintGraph(n, tuple(adj), tuple(str(k + 1) for k in range(n)))


def path_graph(n: int) -> ConstraintGraph:
    if n < 2:
        raise ValueError("path needs n >= 2")
    adj = [0] * n
    for k in range(n - 1):
        adj[k] |= 1 << (k + 1)
        adj[k + 1] |= 1 << k
    return ConstraintGraph(n, tuple(adj), tuple(str(k + 1) for k in range(n)))


def disjoint_union(g1: ConstraintGraph, g2: ConstraintGraph) -> ConstraintGraph:
    adj = list(g1.adj) + [row << g1.h for row in g2.adj]
    labels = tuple(g1.labels) + tuple(f"{lab}'" if lab in g1.labels else lab
                                      for lab in g2.labels)
    return ConstraintGraph(g1.h + g2.h, tuple(adj), labels)


_PRESET_RE = re.compile(r"^(ind|wr|k4loop|kq:(\d+)|k(\d+)|cycle:(\d+)|path:(\d+))$")


def preset(name: str) -> ConstraintGraph:
    """Named target graphs; disjoint unions via '+', e.g. 'ind+kq:3'."""
    parts = name.strip().split("+")
    graphs = []
    for part in parts:
        part = part.strip()
        m = _PRESET_RE.match(part)
        if not m:
            raise ParseError(f"unknown target preset {part!r}")
        if part == "ind":
            graphs.append(hard_core_graph())
        elif part == "wr":
            graphs.append(widom_rowlinson_graph())
        elif part == "k4loop":
            graphs.append(complete_looped_graph(4))
        elif m.group(2) or m.group(3):
            graphs.append(complete_graph(int(m.group(2) or m.group(3))))
        elif m.group(4):
            graphs.append(cycle_graph(int(m.group(4))))
        else:
            graphs.append(path_graph(int(m.group(5))))
    out = graphs[0]
    for extra in graphs[1:]:
        out = disjoint_union(out, extra)
    return out


# ---------------------------------------------------------------- file input


def parse_text(text: str) -> tuple[ConstraintGraph, WeightSet]:
    """Text format: 'colors h' header, optional 'w k p/q' weight lines
    (default 1), 'e i j' edge lines (i == j declares a loop)."""
    h = None
    weights: dict[int, Fraction] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "colors" and len(fields) == 2:
                h = int(fields[1])
                if h < 1:
                    raise ValueError("need at least one color")
            elif fields[0] in ("w", "e"):
                if h is None:
                    raise ValueError("'colors h' header must come first")
                if len(fields) != 3:
                    raise ValueError(f"expected 2 arguments on {line!r}")
                if fields[0] == "w":
                    k, wt = int(fields[1]), Fraction(fields[2])
                    if not 0 <= k < h:
                        raise ValueError(f"weight index {k} out of range for {h} colors")
                    weights[k] = wt
                else:
                    i, j = int(fields[1]), int(fields[2])
                    if not (0 <= i < h and 0 <= j < h):
                        raise ValueError(f"edge ({i},{j}) out of range for {h} colors")
                    edges.append((i, j))
            else:
                raise ValueError(f"unrecognized line {line!r}")
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(f"line {lineno}: {e}") from None
    if h is None:
        raise ParseError("missing 'colors h' header")
    return _assemble(h, weights, edges)


def parse_json(text: str) -> tuple[ConstraintGraph, WeightSet]:
    """JSON format: {"colors": h, "weights": ["3/2", ...], "edges": [[i,j], ...]}."""
    try:
        doc = json.loads(text)
        h = int(doc["colors"])
        weights = {k: Fraction(str(v)) for k, v in enumerate(doc.get("weights", []))}
        edges = [(int(i), int(j)) for i, j in doc.get("edges", [])]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad constraint-graph JSON: {e}") from None
    return _assemble(h, weights, edges)


def _assemble(h, weights, edges):
    if h < 1:
        raise ParseError("need at least one color")
    adj = [0] * h
    for i, j in edges:
        if not (0 <= i < h and 0 <= j < h):
            raise ParseError(f"edge ({i},{j}) out of range for {h} colors")
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    for k in weights:
        if not 0 <= k < h:
            raise ParseError(f"weight index {k} out of range for {h} colors")
    g = ConstraintGraph(h, tuple(adj))
    try:
        w = WeightSet(tuple(weights.get(k, Fraction(1)) for k in range(h)))
    except ValueError as e:
        raise ParseError(str(e)) from None
    return g, w


def load(path: str) -> tuple[ConstraintGraph, WeightSet]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_text(text)
