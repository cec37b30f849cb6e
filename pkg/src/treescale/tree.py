"""Geometry of the d-regular edge-coloured tree.

A vertex is addressed by the colour word of the path from the base vertex,
stored as a tuple of ints with no two consecutive letters equal. The empty
tuple is the base vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Vertex = tuple[int, ...]
BASE: Vertex = ()


@dataclass(frozen=True)
class TreeParams:
	degree: int
	delta: int = 0

	def __post_init__(self):
		if self.degree < 3:
			raise ValueError(f"tree degree must be >= 3, got {self.degree}")

	@property
	def colors(self) -> range:
		return range(self.degree)


def is_reduced(word: Sequence[int]) -> bool:
	return all(word[i] != word[i + 1] for i in range(len(word) - 1))


def parse_vertex(s: str) -> Vertex:
	s = s.strip()
	if s in ("", "e", "ε"):
		return BASE
	v = tuple(int(x) for x in s.split("."))
	if not is_reduced(v):
		raise ValueError(f"backtracking address {s!r}")
	return v


def format_vertex(v: Vertex) -> str:
	return ".".join(str(c) for c in v)


def neighbor(v: Vertex, c: int) -> Vertex:
	if v and v[-1] == c:
		return v[:-1]
	return v + (c,)


def walk(v: Vertex, colors: Iterable[int]) -> Vertex:
	for c in colors:
		v = neighbor(v, c)
	return v


def neighbors(v: Vertex, degree: int) -> list[Vertex]:
	return [neighbor(v, c) for c in range(degree)]


def edge_color(u: Vertex, v: Vertex) -> int:
	if len(v) == len(u) + 1 and v[:-1] == u:
		return v[-1]
	if len(u) == len(v) + 1 and u[:-1] == v:
		return u[-1]
	raise ValueError(f"{u} and {v} are not adjacent")


def _lcp(u: Vertex, v: Vertex) -> int:
	k = 0
	for a, b in zip(u, v):
		if a != b:
			break
		k += 1
	return k


def dist(u: Vertex, v: Vertex) -> int:
	return len(u) + len(v) - 2 * _lcp(u, v)


def geodesic(u: Vertex, v: Vertex) -> list[Vertex]:
	k = _lcp(u, v)
	up = [u[:i] for i in range(len(u), k - 1, -1)]
	down = [v[:i] for i in range(k + 1, len(v) + 1)]
	return up + down


def path_colors(u: Vertex, v: Vertex) -> list[int]:
	"""Colours of the edges along the geodesic from u to v."""
	k = _lcp(u, v)
	return [u[i] for i in range(len(u) - 1, k - 1, -1)] + list(v[k:])


def convex_hull(S: Iterable[Vertex]) -> frozenset[Vertex]:
	S = list(S)
	if not S:
		raise ValueError("convex hull of an empty set")
	# on a tree the hull is the union of geodesics from one point
	hull: set[Vertex] = set()
	for s in S:
		hull.update(geodesic(S[0], s))
	return frozenset(hull)


def is_convex(S: Iterable[Vertex]) -> bool:
	S = frozenset(S)
	return bool(S) and convex_hull(S) == S


def gromov_product(y: Vertex, z: Vertex, e: Vertex) -> Fraction:
	return Fraction(dist(e, y) + dist(e, z) - dist(y, z), 2)


def ball(center: Vertex, r: int, degree: int) -> list[Vertex]:
	"""Vertices within distance r of center, in BFS order with colours ascending."""
	out = [center]
	seen = {center}
	frontier = [center]
	for _ in range(r):
		nxt = []
		for v in frontier:
			for c in range(degree):
				w = neighbor(v, c)
				if w not in seen:
					seen.add(w)
					nxt.append(w)
		out.extend(nxt)
		frontier = nxt
	return out


def bfs_order(S: Iterable[Vertex], root: Vertex) -> list[Vertex]:
	"""BFS order of a connected vertex set from root, colours ascending."""
	S = set(S)
	order = [root]
	seen = {root}
	q = deque([root])
	while q:
		v = q.popleft()
		children = [w for w in S if w not in seen and dist(v, w) == 1]
		children.sort(key=lambda w: edge_color(v, w))
		for w in children:
			seen.add(w)
			order.append(w)
			q.append(w)
	if len(order) != len(S):
		raise ValueError("vertex set is not connected")
	return order


@dataclass(frozen=True)
class Midpoint:
	"""Midpoint of the edge between two adjacent vertices, stored shorter first."""
	u: Vertex
	v: Vertex

	def __post_init__(self):
		if dist(self.u, self.v) != 1:
			raise ValueError("midpoint of non-adjacent vertices")
		if len(self.u) > len(self.v):
			u, v = self.v, self.u
			object.__setattr__(self, "u", u)
			object.__setattr__(self, "v", v)

	def __str__(self):
		return f"mid({format_vertex(self.u)},{format_vertex(self.v)})"


Point = Union[Vertex, Midpoint]


def center(S: Iterable[Vertex]) -> Point:
	S = sorted(set(S))
	if not S:
		raise ValueError("center of an empty set")
	u = max(S, key=lambda x: (dist(S[0], x), [-c for c in x]))
	v = max(S, key=lambda x: (dist(u, x), [-c for c in x]))
	path = geodesic(u, v)
	L = len(path) - 1
	if L % 2 == 0:
		return path[L // 2]
	return Midpoint(path[L // 2], path[L // 2 + 1])


def _primitive(q: tuple[int, ...]) -> tuple[int, ...]:
	n = len(q)
	for k in range(1, n + 1):
		if n % k == 0 and q[:k] * (n // k) == q:
			return q[:k]
	return q


@dataclass(frozen=True)
class End:
	"""Eventually periodic end: the ray from the base vertex reading prefix then period forever.

	Construction canonicalises, so equal ends compare equal.
	"""
	prefix: Vertex
	period: tuple[int, ...]

	def __post_init__(self):
		p, q = tuple(self.prefix), tuple(self.period)
		if not q:
			raise ValueError("empty period")
		if not is_reduced(p + q + q):
			raise ValueError("end word backtracks")
		q = _primitive(q)
		if len(q) < 2:
			raise ValueError("period of length 1 backtracks")
		while p and p[-1] == q[-1]:
			p = p[:-1]
			q = q[-1:] + q[:-1]
		j = min(range(len(q)), key=lambda i: q[i:] + q[:i])
		p = p + q[:j]
		q = q[j:] + q[:j]
		object.__setattr__(self, "prefix", p)
		object.__setattr__(self, "period", q)

	def letter(self, i: int) -> int:
		if i < len(self.prefix):
			return self.prefix[i]
		return self.period[(i - len(self.prefix)) % len(self.period)]

	def vertex(self, t: int) -> Vertex:
		return tuple(self.letter(i) for i in range(t))

	def __str__(self):
		return f"{format_vertex(self.prefix)}|{format_vertex(self.period)}"

	@classmethod
	def parse(cls, s: str) -> "End":
		a, b = s.split("|")
		return cls(parse_vertex(a), parse_vertex(b))

	@classmethod
	def from_word(cls, word: Sequence[int], start: int, period: int) -> "End":
		"""End of a word known to be periodic with the given period from index start on."""
		word = tuple(word)
		if len(word) < start + period:
			raise ValueError("word too short for the claimed period")
		return cls(word[:start], word[start:start + period])


def end_ray(xi: End, n: int) -> list[Vertex]:
	"""First n+1 vertices of the canonical ray: it starts at the prefix vertex and reads the period."""
	k = len(xi.prefix)
	return [xi.vertex(k + t) for t in range(n + 1)]


def ray_from(v: Vertex, xi: End, n: int) -> list[Vertex]:
	"""First n+1 vertices of the ray from v to xi."""
	far = xi.vertex(len(v) + n + 1)
	return geodesic(v, far)[: n + 1]


def ray_colors(v: Vertex, xi: End, n: int) -> list[int]:
	"""Colours of the first n edges of the ray from v to xi.

	From index len(v) + len(xi.prefix) on they repeat with period len(xi.period).
	"""
	r = ray_from(v, xi, n)
	return [edge_color(r[i], r[i + 1]) for i in range(n)]


def ray_period_start(v: Vertex, xi: End) -> int:
	return len(v) + len(xi.prefix)

