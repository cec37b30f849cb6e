"""Axis trees: the union of translation axes through a tail of a fixed ray."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import tree as T
from .dynamics import Axis, axis_of, stabilizes_end
from .scheme import EXACT, Certification, CocycleElement, GroupScheme
from .tree import End, Vertex


class BallTooSmall(ValueError):
	pass


def shift_states(S: GroupScheme, colors: list[int], k: int, period_start: int, period: int) -> frozenset[int]:
	"""Local actions at the start of a coloured half-line that begin a shift by k.

	An admissible sequence s_0, s_1, ... has s_i(c_i) = c_{i+k} and
	s_{i+1} in s_i E_{c_i}; its existence is decided by a greatest fixed point
	over one period block, then propagated back to index 0.
	"""
	i0 = period_start

	def col(i):
		if i < len(colors):
			return colors[i]
		return colors[i0 + (i - i0) % period]

	def base(i):
		c, ck = col(i), col(i + k)
		return frozenset(s for s in range(len(S.L)) if S.img[s][c] == ck)

	def back(i, nxt):
		c = col(i)
		return frozenset(s for s in base(i) if any(t in nxt for t in S.coset[c][s]))

	block = {i: base(i) for i in range(i0, i0 + period)}
	changed = True
	while changed:
		changed = False
		for i in range(i0 + period - 1, i0 - 1, -1):
			nxt = block[i0] if i == i0 + period - 1 else block[i + 1]
			new = back(i, nxt)
			if new != block[i]:
				block[i] = new
				changed = True
	A = block[i0]
	for i in range(i0 - 1, -1, -1):
		A = back(i, A)
	return A


def min_shift(S: GroupScheme, v: Vertex, xi: End, k_max: int) -> Optional[int]:
	"""Smallest k <= k_max such that some element shifts the half-line [v, xi) by k towards xi."""
	P = len(xi.period)
	i0 = T.ray_period_start(v, xi)
	cols = T.ray_colors(v, xi, i0 + P + k_max + 1)
	for k in range(1, k_max + 1):
		if shift_states(S, cols, k, i0, P):
			return k
	return None


@dataclass
class AxisTree:
	scheme: GroupScheme
	axis: Axis
	end: End
	center: Vertex
	radius: int
	members: frozenset[Vertex]
	shifts: dict[Vertex, int]
	k_max: int
	certification: Certification = EXACT
	rejected: frozenset[Vertex] = frozenset()

	@property
	def lam(self) -> int:
		return min(self.shifts.values())

	def tail(self) -> list[Vertex]:
		return [v for v in self.axis.window(0, 2 * self.radius + len(self.center)) if v in self.members]

	def toward_end(self, v: Vertex) -> Vertex:
		"""Neighbour of v one step closer to the distinguished end."""
		return T.ray_from(v, self.end, 1)[1]

	def below(self, y: Vertex, x0: Vertex) -> bool:
		"""y <=_T x0: x0 lies on the half-line from y to the end."""
		d = T.dist(y, x0)
		return T.ray_from(y, self.end, d)[-1] == x0

	def to_json(self) -> dict:
		return {
			"end": str(self.end),
			"center": T.format_vertex(self.center),
			"radius": self.radius,
			"members": [T.format_vertex(v) for v in sorted(self.members, key=lambda v: (len(v), v))],
			"lambda": self.lam,
			"k_max": self.k_max,
			"certification": str(self.certification),
		}


def build_axis_tree(g: CocycleElement, radius: int, k_max: Optional[int] = None, end: str = "plus") -> AxisTree:
	"""Members of the axis tree within the ball of the given radius around gamma(0).

	The defining ray runs along the axis of g towards its attracting end (or
	its repelling end with end="minus"). A vertex v is a member iff some
	element shifts [v, xi) into itself towards xi; this is decided exactly.
	"""
	ax = axis_of(g)
	S = g.scheme
	xi = ax.xi_plus if end == "plus" else ax.xi_minus
	k_max = k_max or 4 * ax.length
	center = ax.vertex(0)
	inball = set(T.ball(center, radius, S.degree))
	shifts: dict[Vertex, int] = {}
	rejected = set()
	sign = 1 if end == "plus" else -1
	seeds = [ax.vertex(sign * t) for t in range(radius + 1)]
	frontier = []
	for v in seeds:
		k = min_shift(S, v, xi, k_max)
		if k is None:
			raise ValueError(f"ray vertex {T.format_vertex(v)!r} not on any axis within k_max")
		shifts[v] = k
		frontier.append(v)
	while frontier:
		nxt = []
		for u in frontier:
			for w in T.neighbors(u, S.degree):
				if w not in inball or w in shifts or w in rejected:
					continue
				k = min_shift(S, w, xi, k_max)
				if k is None:
					rejected.add(w)
				else:
					shifts[w] = k
					nxt.append(w)
		frontier = nxt
	return AxisTree(S, ax, xi, center, radius, frozenset(shifts), shifts, k_max, EXACT, frozenset(rejected))


def branching_sigma(tree: AxisTree, x0: Vertex, m: int) -> int:
	"""Number of members y below x0 at distance m; 1 for m <= 0."""
	if m <= 0:
		return 1
	x0 = tuple(x0)
	if x0 not in tree.members:
		raise ValueError("x0 is not in the axis tree")
	if T.dist(tree.center, x0) + m > tree.radius:
		raise BallTooSmall(f"need radius {T.dist(tree.center, x0) + m}, have {tree.radius}")
	up = tree.toward_end(x0)
	layer = [x0]
	seen = {x0, up}
	for _ in range(m):
		nxt = []
		for v in layer:
			for w in T.neighbors(v, tree.scheme.degree):
				if w not in seen and w in tree.members:
					seen.add(w)
					nxt.append(w)
		layer = nxt
	return len(layer)


def sigma_table(tree: AxisTree, x0: Vertex, m_max: int) -> list[tuple[int, int]]:
	return [(m, branching_sigma(tree, x0, m)) for m in range(m_max + 1)]


def busemann_beta(h: CocycleElement, tree: AxisTree) -> int:
	"""The b with h(rho(t)) = rho(t - b) for all large t, rho the defining ray."""
	if not stabilizes_end(h, tree.end):
		raise ValueError("element does not fix the distinguished end")
	sign = 1 if tree.end == tree.axis.xi_plus else -1
	ax = tree.axis
	P = len(tree.end.period)
	t = 0
	while True:
		s = ax.position(h(ax.vertex(sign * t)))
		if s is not None:
			b = t - sign * s
			span = range(t, t + 2 * P + 2 * ax.length + 2)
			if all(h(ax.vertex(sign * u)) == ax.vertex(sign * (u - b)) for u in span):
				return b
		t += 1
		if t > 10_000:
			raise RuntimeError("Busemann shift not found")


def sample_bases(tree: AxisTree, m: int, limit: int = 6) -> list[Vertex]:
	"""Members x0 whose m-ball fits inside the working ball, ray vertices first."""
	ok = [v for v in tree.members if T.dist(tree.center, v) + m <= tree.radius]
	ok.sort(key=lambda v: (T.dist(tree.center, v), v))
	return ok[:limit]


def to_dot(tree: AxisTree, x0: Optional[Vertex] = None, m_max: int = 0) -> str:
	"""Graphviz rendering with the defining ray in red and the sigma table as a caption."""
	tail = set(tree.axis.window(0, 4 * tree.radius)) | set(tree.axis.window(-4 * tree.radius, 0))
	ray = {v for v in tree.members if v in tail and tree.below(tree.center, v)} | {tree.center}
	lines = ["graph axis_tree {", "  node [shape=circle, fontsize=9];"]

	def name(v):
		return '"' + (T.format_vertex(v) or "e") + '"'

	for v in sorted(tree.members, key=lambda v: (len(v), v)):
		attrs = []
		if v in ray:
			attrs.append("color=red")
		if x0 is not None and v == tuple(x0):
			attrs.append("style=bold")
		lines.append(f"  {name(v)}" + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
	for v in sorted(tree.members, key=lambda v: (len(v), v)):
		for w in T.neighbors(v, tree.scheme.degree):
			if w in tree.members and (len(w), w) > (len(v), v):
				style = " [color=red]" if v in ray and w in ray else ""
				lines.append(f"  {name(v)} -- {name(w)}{style};")
	if x0 is not None and m_max:
		table = sigma_table(tree, x0, m_max)
		cap = ", ".join(f"sigma({m})={s}" for m, s in table)
		lines.append(f'  label="{cap}";')
	lines.append("}")
	return "\n".join(lines) + "\n"
