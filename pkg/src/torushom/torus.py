"""Geometry of the even discrete torus Z_m^d.

Vertices are mixed-radix indices: coordinate 1 is most significant, so the
index of (x_1,...,x_d) is (((x_1*m + x_2)*m + x_3)...)*m + x_d. Adjacency is
a +-1 step (mod m) in one coordinate; for m=2 the two steps coincide, so the
torus is d-regular there and 2d-regular for m >= 4. The coordinate-parity
bipartition E/O (even/odd coordinate sum) is used everywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence


@dataclass(frozen=True)
class TorusGraph:
    m: int
    d: int

    def __post_init__(self):
        if self.m < 2 or self.m % 2 != 0:
            raise ValueError(f"torus side must be even and >= 2, got {self.m}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")

    @property
    def n(self) -> int:
        return self.m**self.d

    @property
    def degree(self) -> int:
        return 2 * self.d if self.m >= 4 else self.d

    def encode(self, coords: Sequence[int]) -> int:
        if len(coords) != self.d:
            raise ValueError(f"expected {self.d} coordinates")
        v = 0
        for x in coords:
            if not 0 <= x < self.m:
                raise ValueError(f"coordinate {x} out of range 0..{self.m - 1}")
            v = v * self.m + x
        return v

    def decode(self, v: int) -> tuple[int, ...]:
        self._check(v)
        out = []
        for _ in range(self.d):
            out.append(v % self.m)
            v //= self.m
        return tuple(reversed(out))

    def _check(self, v: int):
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range 0..{self.n - 1}")

    def vertex_str(self, v: int) -> str:
        return ",".join(str(x) for x in self.decode(v))

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Coordinate-major order, minus step before plus step; for m=2 the
        two steps coincide and are listed once."""
        self._check(v)
        out = []
        radix = self.n  # m^(d - coordinate index)
        for _ in range(self.d):
            radix //= self.m
            x = (v // radix) % self.m
            base = v - x * radix
            out.append(base + ((x - 1) % self.m) * radix)
            if self.m > 2:
                out.append(base + ((x + 1) % self.m) * radix)
        return tuple(out)

    def neighbor_table(self) -> list[tuple[int, ...]]:
        return [self.neighbors(v) for v in range(self.n)]

    def parity(self, v: int) -> int:
        self._check(v)
        s = 0
        while v:
            s += v % self.m
            v //= self.m
        return s & 1

    def side_sets(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(even side, odd side); every edge crosses between them."""
        even, odd = [], []
        for v in range(self.n):
            (odd if self.parity(v) else even).append(v)
        return tuple(even), tuple(odd)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each edge once, as (u, v) with u < v."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield (u, v)

    @property
    def num_edges(self) -> int:
        return self.n * self.degree // 2

    def shift(self, v: int, coord: int, step: int) -> int:
        """Vertex obtained by moving `step` (mod m) along coordinate
        `coord` (1-based)."""
        radix = self.m ** (self.d - coord)
        x = (v // radix) % self.m
        return v - x * radix + ((x + step) % self.m) * radix


@dataclass(frozen=True)
class Column:
    """A last-coordinate fiber (v_0,...,v_{m-1}); base has x_d = 0 and even
    coordinate parity. Induces an m-cycle for m >= 4, a single edge for m=2."""

    base: int
    members: tuple[int, ...]


def v_star(t: TorusGraph) -> tuple[int, ...]:
    """Column bases: x_d = 0 and even parity; exactly m^(d-1)/2 of them."""
    out = []
    for prefix in range(t.m ** (t.d - 1)):
        v = prefix * t.m
        if t.parity(v) == 0:
            out.append(v)
    return tuple(out)


def columns(t: TorusGraph) -> tuple[Column, ...]:
    return tuple(
        Column(base, tuple(base + i for i in range(t.m))) for base in v_star(t)
    )


def column_of(t: TorusGraph, v: int) -> Column:
    """The fiber through v (regardless of base parity)."""
    base = v - (v % t.m)
    return Column(base, tuple(base + i for i in range(t.m)))


def m_u(t: TorusGraph, u: int) -> tuple[int, ...]:
    """Neighbors of u outside its own column: N_u minus the +-1 steps along
    the last coordinate (a single vertex when m=2)."""
    above = t.shift(u, t.d, 1)
    below = t.shift(u, t.d, -1)
    return tuple(x for x in t.neighbors(u) if x != above and x != below)


def column_side_sets(
    t: TorusGraph, c: Column
) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """(M_u per member in column order, their union sorted)."""
    per = tuple(m_u(t, u) for u in c.members)
    union = sorted(set().union(*[set(p) for p in per]))
    return per, tuple(union)


def column_surround_structure_ok(t: TorusGraph, c: Column) -> bool:
    """Check the induced shape of the union of the M_u around a column:
    2d-2 disjoint m-cycles for m >= 4, d-1 disjoint edges for m = 2."""
    _, union = column_side_sets(t, c)
    members = set(union)
    if t.m >= 4:
        want_components, want_size, want_degree = 2 * t.d - 2, t.m, 2
    else:
        want_components, want_size, want_degree = t.d - 1, 2, 1
    if len(members) != want_components * want_size:
        return False
    seen: set[int] = set()
    components = 0
    for start in union:
        if start in seen:
            continue
        components += 1
        stack, comp = [start], set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            inside = [y for y in t.neighbors(x) if y in members]
            if len(set(inside)) != want_degree:
                return False
            stack.extend(inside)
        if len(comp) != want_size:
            return False
        seen |= comp
    return components == want_components


def edge_boundary(t: TorusGraph, x_set: Iterable[int]) -> int:
    """Number of torus edges with exactly one endpoint in the set."""
    inside = set(x_set)
    count = 0
    for u in inside:
        for v in t.neighbors(u):
            if v not in inside:
                count += 1
    return count


def giant_component_after_deletion(
    t: TorusGraph, deleted: Iterable[tuple[int, int]]
) -> tuple[int, list[int]]:
    """Largest connected component size after deleting the given edges,
    plus a component id per vertex."""
    gone = set()
    for u, v in deleted:
        gone.add((u, v) if u < v else (v, u))
    comp = [-1] * t.n
    best = 0
    cid = 0
    for s in range(t.n):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = cid
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for v in t.neighbors(u):
                key = (u, v) if u < v else (v, u)
                if key in gone or comp[v] >= 0:
                    continue
                comp[v] = cid
                stack.append(v)
        best = max(best, size)
        cid += 1
    return best, comp
