"""Group schemes on the coloured tree, exact elements, and fixator indices.

A scheme fixes the set L of allowed local actions and, for each colour c, the
group E_c of allowed differences across an edge of colour c: adjacent local
actions must satisfy sigma(w) in sigma(v) E_c. Compatibility of the edge colour
(sigma(v)(c) == sigma(w)(c)) is built into E_c, which always fixes c.

Every index is computed from counts of legal local-action assignments on a
finite rooted subtree. The restriction map to such assignments has fibres
equal to cosets of a subgroup fixing the whole subtree, so the ratio of two
counts is the index of the corresponding fixators.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from . import tree as T
from .permgrp import (
	Perm,
	PermGroup,
	column_block,
	column_shift,
	point_stabilizer,
	symmetric_group,
	wreath_coords,
	wreath_point,
	wreath_sym_cyclic,
)
from .tree import End, Vertex

STABILIZATION_WINDOW = 3
DEFAULT_NODE_BUDGET = 2_000_000


class MalformedElement(ValueError):
	pass


class IllegalElement(ValueError):
	pass


class HorizonTooSmall(ValueError):
	pass


class BudgetExceeded(RuntimeError):
	pass


class NotStabilized(RuntimeError):
	pass


@dataclass(frozen=True)
class Certification:
	kind: str
	horizon: Optional[int] = None

	def __str__(self):
		return self.kind if self.horizon is None else f"{self.kind}({self.horizon})"


EXACT = Certification("Exact")


def stabilized_at(R: int) -> Certification:
	return Certification("StabilizedAt", R)


class GroupScheme:
	"""Local constraint system defining a closed subgroup of Aut(T_d)."""

	def __init__(self, kind: str, degree: int, local: PermGroup, n: Optional[int] = None):
		self.kind = kind
		self.tree = T.TreeParams(degree)
		self.degree = degree
		self.local = local
		self.n = n
		self.flags: list[str] = []
		if not local.is_transitive():
			self.flags.append("local action not transitive")
		self.L: list[Perm] = list(local.elements)
		self.index_of = {p: i for i, p in enumerate(self.L)}
		self.identity = self.index_of[Perm.identity(degree)]
		self.img = [p.img for p in self.L]
		self.inv = [self.index_of[p.inverse()] for p in self.L]
		self._edge = [self._edge_group(c) for c in range(degree)]
		# coset[c][i]: indices j with L[j] in L[i] E_c
		self.coset = [
			[tuple(sorted(self.index_of[p * e] for e in self._edge[c])) for p in self.L]
			for c in range(degree)
		]

	def _edge_group(self, c: int) -> list[Perm]:
		if self.kind == "coupled_wreath":
			_, j = wreath_coords(c, self.n)
			block = column_block(self.n, j)
		else:
			block = self.local
		return [e for e in block if e(c) == c]

	def edge_group(self, c: int) -> list[Perm]:
		return list(self._edge[c])

	def pair_legal(self, s: Perm, t: Perm, c: int) -> bool:
		"""Local actions s at v and t at w, for an edge vw of colour c."""
		if s(c) != t(c):
			return False
		if self.kind == "coupled_wreath":
			_, j = wreath_coords(c, self.n)
			d = s.inverse() * t
			return all(d(x) == x for x in range(self.degree) if wreath_coords(x, self.n)[1] != j)
		return True

	def to_json(self) -> dict:
		if self.kind == "full":
			return {"scheme": "full", "degree": self.degree}
		if self.kind == "coupled_wreath":
			return {"scheme": "coupled_wreath", "n": self.n}
		return {"scheme": "universal", "degree": self.degree, "F": self.local.to_json()}

	def __eq__(self, other):
		return isinstance(other, GroupScheme) and self.to_json() == other.to_json()

	def __hash__(self):
		return hash(json.dumps(self.to_json(), sort_keys=True))

	def __repr__(self):
		if self.kind == "full":
			return f"Full({self.degree})"
		if self.kind == "coupled_wreath":
			return f"CoupledWreath({self.n})"
		return f"Universal(d={self.degree}, |F|={len(self.local)})"


def Full(d: int) -> GroupScheme:
	return GroupScheme("full", d, symmetric_group(d))


def Universal(F: PermGroup) -> GroupScheme:
	return GroupScheme("universal", F.domain, F)


def CoupledWreath(n: int) -> GroupScheme:
	return GroupScheme("coupled_wreath", n * n, wreath_sym_cyclic(n), n)


def scheme_from_json(d: Mapping) -> GroupScheme:
	kind = d.get("scheme")
	if kind == "full":
		return Full(int(d["degree"]))
	if kind == "universal":
		F = PermGroup.from_json(d["F"])
		if "degree" in d and int(d["degree"]) != F.domain:
			raise ValueError("degree does not match the domain of F")
		return Universal(F)
	if kind == "coupled_wreath":
		return CoupledWreath(int(d["n"]))
	raise ValueError(f"unknown scheme {kind!r}")


# ---------------------------------------------------------------- elements


class CocycleElement:
	"""Tree automorphism given by the image of the base vertex and local actions.

	sigma is explicit on every vertex of depth <= depth; a deeper vertex uses
	the local action of its ancestor at that depth.
	"""

	__slots__ = ("scheme", "base_image", "depth", "sigma", "_inv", "_hash")

	def __init__(self, scheme: GroupScheme, base_image: Vertex, depth: int, sigma: Mapping[Vertex, Perm]):
		self.scheme = scheme
		self.base_image = tuple(base_image)
		self.depth = int(depth)
		self.sigma = dict(sigma)
		self._inv = None
		self._hash = None
		for v in T.ball(T.BASE, self.depth, scheme.degree):
			if v not in self.sigma:
				raise MalformedElement(f"sigma missing at {T.format_vertex(v)!r}")

	def local(self, v: Vertex) -> Perm:
		return self.sigma[v[: self.depth]] if len(v) > self.depth else self.sigma[v]

	def __call__(self, v: Vertex) -> Vertex:
		return self.apply(v)

	def apply(self, v: Vertex) -> Vertex:
		x = T.BASE
		y = self.base_image
		for c in v:
			y = T.neighbor(y, self.local(x)(c))
			x = x + (c,)
		return y

	def apply_inverse(self, y: Vertex) -> Vertex:
		x = T.BASE
		for c in T.path_colors(self.base_image, y):
			x = T.neighbor(x, self.local(x).inverse()(c))
		return x

	def key(self):
		g = self.normalized()
		return (g.base_image, g.depth, tuple(sorted((v, p.img) for v, p in g.sigma.items())))

	def __eq__(self, other):
		return isinstance(other, CocycleElement) and self.scheme == other.scheme and self.key() == other.key()

	def __hash__(self):
		if self._hash is None:
			self._hash = hash(self.key())
		return self._hash

	def normalized(self) -> "CocycleElement":
		D = self.depth
		sig = self.sigma
		while D > 0:
			level = [v for v in sig if len(v) == D]
			if any(sig[v] != sig[v[:-1]] for v in level):
				break
			sig = {v: p for v, p in sig.items() if len(v) < D}
			D -= 1
		if D == self.depth:
			return self
		return CocycleElement(self.scheme, self.base_image, D, sig)

	def __mul__(self, other: "CocycleElement") -> "CocycleElement":
		return compose(self, other)

	def inverse(self) -> "CocycleElement":
		if self._inv is None:
			self._inv = invert(self)
		return self._inv

	def __pow__(self, k: int) -> "CocycleElement":
		if k < 0:
			return self.inverse() ** (-k)
		result = identity(self.scheme)
		base = self
		while k:
			if k & 1:
				result = compose(result, base)
			base = compose(base, base)
			k >>= 1
		return result

	def to_json(self) -> dict:
		g = self.normalized()
		return {
			"base_image": T.format_vertex(g.base_image),
			"depth": g.depth,
			"sigma": {T.format_vertex(v): g.sigma[v].to_list() for v in T.ball(T.BASE, g.depth, g.scheme.degree)},
		}

	def __repr__(self):
		g = self.normalized()
		return f"CocycleElement(base={T.format_vertex(g.base_image)!r}, depth={g.depth})"


def compose(g: CocycleElement, h: CocycleElement) -> CocycleElement:
	"""The product gh (apply h first): sigma_gh(v) = sigma_g(h v) sigma_h(v)."""
	if g.scheme != h.scheme:
		raise ValueError("elements of different schemes")
	hb = h.base_image
	D = max(h.depth, g.depth + len(hb))
	sig = {}
	for v in T.ball(T.BASE, D, g.scheme.degree):
		sig[v] = g.local(h.apply(v)) * h.local(v)
	return CocycleElement(g.scheme, g.apply(hb), D, sig).normalized()


def invert(g: CocycleElement) -> CocycleElement:
	b = g.apply_inverse(T.BASE)
	D = g.depth + len(g.base_image)
	sig = {}
	for v in T.ball(T.BASE, D, g.scheme.degree):
		sig[v] = g.local(g.apply_inverse(v)).inverse()
	return CocycleElement(g.scheme, b, D, sig).normalized()


def legality_check(g: CocycleElement) -> bool:
	S = g.scheme
	for v in T.ball(T.BASE, g.depth, S.degree):
		p = g.sigma[v]
		if p not in S.local:
			return False
		if len(v) < g.depth:
			for c in range(S.degree):
				w = T.neighbor(v, c)
				if len(w) == len(v) + 1 and not S.pair_legal(p, g.sigma[w], c):
					return False
	return True


def identity(scheme: GroupScheme) -> CocycleElement:
	return CocycleElement(scheme, T.BASE, 0, {T.BASE: Perm.identity(scheme.degree)})


def _translation_perm(scheme: GroupScheme) -> tuple[Vertex, Perm]:
	d = scheme.degree
	if scheme.kind == "coupled_wreath":
		return (wreath_point(0, 0, scheme.n),), column_shift(scheme.n)
	cyc = Perm(tuple((x + 1) % d for x in range(d)))
	if cyc in scheme.local:
		return (0,), cyc
	for p in scheme.L:
		if p(0) != 0:
			return (0,), p
	raise IllegalElement("local action fixes colour 0; no standard translation")


def standard_translation(scheme: GroupScheme) -> CocycleElement:
	"""Constant local action pi with base image "0"; translation length 1.

	For the coupled wreath scheme pi is the column shift, so the edge from
	x_j to x_{j+1} on its axis has colour (0, j).
	"""
	base, pi = _translation_perm(scheme)
	return CocycleElement(scheme, base, 0, {T.BASE: pi})


def local_perturbation(scheme: GroupScheme, vertex: Vertex, perm: Perm) -> CocycleElement:
	"""Fixes the base vertex; acts by perm at every vertex whose address extends vertex."""
	vertex = tuple(vertex)
	D = len(vertex)
	e = Perm.identity(scheme.degree)
	sig = {}
	for v in T.ball(T.BASE, D, scheme.degree):
		sig[v] = perm if v == vertex else e
	g = CocycleElement(scheme, T.BASE, D, sig)
	if not legality_check(g):
		raise IllegalElement("perturbation violates scheme legality")
	return g.normalized()


def builtin_element(scheme: GroupScheme, name: str, params: Optional[Mapping] = None) -> CocycleElement:
	params = dict(params or {})
	if name == "identity":
		g = identity(scheme)
	elif name == "standard_translation":
		g = standard_translation(scheme)
	elif name == "local_perturbation":
		v = params.get("vertex", "")
		v = T.parse_vertex(v) if isinstance(v, str) else tuple(v)
		perm = params["perm"]
		if isinstance(perm, str):
			perm = json.loads(perm)
		g = local_perturbation(scheme, v, Perm(tuple(perm)))
	else:
		raise ValueError(f"unknown builtin {name!r}")
	k = int(params.get("power", 1))
	return g if k == 1 else g ** k


def element_from_json(scheme: GroupScheme, d: Mapping) -> CocycleElement:
	if "builtin" in d:
		return builtin_element(scheme, d["builtin"], {k: v for k, v in d.items() if k != "builtin"})
	try:
		base = T.parse_vertex(d["base_image"])
		D = int(d["depth"])
		sig = {}
		for k, v in d["sigma"].items():
			if isinstance(v, str):
				v = json.loads(v)
			sig[T.parse_vertex(k)] = Perm(tuple(v))
	except (KeyError, TypeError, json.JSONDecodeError) as exc:
		raise MalformedElement(str(exc)) from exc
	g = CocycleElement(scheme, base, D, sig)
	if not legality_check(g):
		raise IllegalElement("element violates scheme legality")
	return g


def random_element(scheme: GroupScheme, rng: random.Random, max_depth: int = 2, max_shift: int = 3) -> CocycleElement:
	"""Legal element with random base image and local actions up to a random depth."""
	d = scheme.degree
	n = rng.randint(0, max_shift)
	word: list[int] = []
	for _ in range(n):
		word.append(rng.choice([c for c in range(d) if not word or c != word[-1]]))
	D = rng.randint(0, max_depth)
	sig = {}
	for v in T.ball(T.BASE, D, d):
		if not v:
			sig[v] = rng.choice(scheme.L)
		else:
			p = scheme.index_of[sig[v[:-1]]]
			sig[v] = scheme.L[rng.choice(scheme.coset[v[-1]][p])]
	return CocycleElement(scheme, tuple(word), D, sig)


# ---------------------------------------------------------------- fixators


@dataclass(frozen=True)
class RayMarker:
	start: Vertex
	end: End

	def __str__(self):
		return f"ray({T.format_vertex(self.start)}->{self.end})"


def on_ray(v: Vertex, ray: RayMarker) -> bool:
	k = T.dist(ray.start, v)
	return T.ray_from(ray.start, ray.end, k)[-1] == v


class FixatorSpec:
	"""U = Fix_G(fixed) for a finite convex vertex set, optionally with rays to ends."""

	def __init__(self, scheme: GroupScheme, fixed: Iterable[Vertex], rays: Iterable[RayMarker] = ()):
		fixed = [tuple(v) for v in fixed]
		byend: dict[End, RayMarker] = {}
		for r in rays:
			byend.setdefault(r.end, RayMarker(tuple(r.start), r.end))
		rays = [byend[e] for e in sorted(byend, key=str)]
		if not fixed and not rays:
			raise ValueError("fixator of the empty set is not compact")
		pts = fixed + [r.start for r in rays]
		# vertices shared by two rays are fixed; keep them in the finite part
		for i in range(len(rays)):
			for j in range(i + 1, len(rays)):
				pts.extend(_ray_meet(rays[i], rays[j]))
		hull = T.convex_hull(pts)
		self.scheme = scheme
		self.fixed = hull
		self.rays = tuple(RayMarker(ray_segment(r, hull)[-1], r.end) for r in rays)

	def with_fixed(self, extra: Iterable[Vertex]) -> "FixatorSpec":
		return FixatorSpec(self.scheme, set(self.fixed) | set(map(tuple, extra)), self.rays)

	def with_ray(self, start: Vertex, end: End) -> "FixatorSpec":
		return FixatorSpec(self.scheme, self.fixed, self.rays + (RayMarker(tuple(start), end),))

	def translate(self, g: CocycleElement) -> "FixatorSpec":
		"""Fixator of the image data under g, which is g U g^-1."""
		rays = [RayMarker(g(r.start), image_of_end(g, r.end)) for r in self.rays]
		return FixatorSpec(self.scheme, [g(v) for v in self.fixed], rays)

	def key(self):
		return (tuple(sorted(self.fixed)), tuple((r.start, str(r.end)) for r in self.rays))

	def __eq__(self, other):
		return isinstance(other, FixatorSpec) and self.scheme == other.scheme and self.key() == other.key()

	def __hash__(self):
		return hash(self.key())

	def __repr__(self):
		vs = ",".join(T.format_vertex(v) or "e" for v in sorted(self.fixed))
		rs = "".join(f"+{r}" for r in self.rays)
		return f"Fix({{{vs}}}{rs})"


def ray_segment(r: RayMarker, core) -> list[Vertex]:
	"""Initial vertices of the ray that lie in core (the start is always included)."""
	verts = [r.start]
	k = 1
	while True:
		nxt = T.ray_from(r.start, r.end, k)[-1]
		if nxt not in core:
			return verts
		verts.append(nxt)
		k += 1


def _ray_meet(r1: RayMarker, r2: RayMarker) -> list[Vertex]:
	if r1.end == r2.end:
		return []
	# two distinct eventually periodic words agree for fewer than this many letters
	n = (len(r1.start) + len(r2.start) + len(r1.end.prefix) + len(r2.end.prefix)
		+ len(r1.end.period) * len(r2.end.period) + 2)
	a = set(T.ray_from(r1.start, r1.end, n))
	return [v for v in T.ray_from(r2.start, r2.end, n) if v in a]


def fixator(scheme: GroupScheme, vertices: Iterable[Vertex], rays: Iterable[tuple[Vertex, End]] = ()) -> FixatorSpec:
	return FixatorSpec(scheme, vertices, [RayMarker(tuple(s), e) for s, e in rays])


def image_of_end(g: CocycleElement, xi: End) -> End:
	"""g(xi) for an eventually periodic end, by exact period tracking.

	Past depth max(depth, len(prefix)) the local action along the ray is a
	constant pi, so the image colours pi(c_t) repeat with the period of xi.
	"""
	s = max(g.depth, len(xi.prefix))
	P = len(xi.period)
	b = len(g.base_image)
	img = g(xi.vertex(s + P + 2 * b + 1))
	return End.from_word(img, b + s, P)


# ---------------------------------------------------------------- regions and counting


@dataclass
class Region:
	"""Finite rooted subtree with the constraints of one fixator on it.

	fixed: vertices every element fixes; boundary: allowed local actions (as
	indices into scheme.L) at the last ray vertex inside the region.
	"""
	scheme: GroupScheme
	root: Vertex
	order: list[Vertex]
	parent: dict[Vertex, Vertex]
	pcolor: dict[Vertex, int]
	children: dict[Vertex, list[Vertex]]
	fixed: frozenset[Vertex] = frozenset()
	boundary: dict[Vertex, frozenset[int]] = field(default_factory=dict)

	def constrained(self, U: FixatorSpec, truncated: bool = False) -> "Region":
		fixed, boundary = region_constraints(self, U, truncated)
		return replace(self, fixed=fixed, boundary=boundary)

	def candidates(self, v: Vertex) -> list[int]:
		S = self.scheme
		F = self.fixed
		cols = []
		if v in F:
			nbrs = list(self.children[v])
			if v in self.parent:
				nbrs.append(self.parent[v])
			cols = [T.edge_color(v, w) for w in nbrs if w in F]
		allowed = self.boundary.get(v)
		out = []
		for i in range(len(S.L)):
			if allowed is not None and i not in allowed:
				continue
			im = S.img[i]
			if all(im[c] == c for c in cols):
				out.append(i)
		return out


def _ray_base(S: GroupScheme, cin: Optional[int], cout: int) -> frozenset[int]:
	return frozenset(
		i for i in range(len(S.L)) if S.img[i][cout] == cout and (cin is None or S.img[i][cin] == cin)
	)


def ray_allowed(S: GroupScheme, start: Vertex, end: End, m: int, truncate: Optional[int] = None) -> frozenset[int]:
	"""Local actions at the m-th ray vertex that extend to an element fixing the whole ray.

	Greatest fixed point of the backward constraint along the eventually
	periodic colour sequence; with truncate=R only R further vertices are fixed.
	"""
	P = len(end.period)
	i0 = max(T.ray_period_start(start, end), m, 1)
	top = (truncate + m) if truncate is not None else i0 + P
	cols = T.ray_colors(start, end, top + 2)

	def base(i):
		return _ray_base(S, cols[i - 1] if i >= 1 else None, cols[i])

	def back(i, nxt):
		c = cols[i]
		return frozenset(s for s in base(i) if any(t in nxt for t in S.coset[c][s]))

	if truncate is not None:
		A = base(top)
		for i in range(top - 1, m - 1, -1):
			A = back(i, A)
		return A
	block = {i: base(i) for i in range(i0, i0 + P)}
	changed = True
	while changed:
		changed = False
		for i in range(i0 + P - 1, i0 - 1, -1):
			nxt = block[i0] if i == i0 + P - 1 else block[i + 1]
			new = back(i, nxt)
			if new != block[i]:
				block[i] = new
				changed = True
	if m >= i0:
		return block[m]
	A = block[i0]
	for i in range(i0 - 1, m - 1, -1):
		A = back(i, A)
	return A


def region_shape(S: GroupScheme, core: Iterable[Vertex], root: Vertex) -> Region:
	order = T.bfs_order(core, root)
	parent, pcolor = {}, {}
	children: dict[Vertex, list[Vertex]] = {v: [] for v in order}
	pos = {v: i for i, v in enumerate(order)}
	for v in order[1:]:
		for c in range(S.degree):
			w = T.neighbor(v, c)
			if w in pos and pos[w] < pos[v]:
				parent[v] = w
				pcolor[v] = c
				children[w].append(v)
				break
	return Region(S, root, order, parent, pcolor, children)


def region_constraints(region: Region, U: FixatorSpec, truncated: bool = False):
	"""Fixed vertices and ray boundary sets of U restricted to the region."""
	core = set(region.order)
	if not U.fixed <= core:
		raise ValueError("region does not contain the fixed set")
	S = U.scheme
	fixed = set(U.fixed)
	boundary: dict[Vertex, frozenset[int]] = {}
	for r in U.rays:
		seg = ray_segment(r, core)
		fixed.update(seg)
		m = len(seg) - 1
		A = ray_allowed(S, r.start, r.end, m, truncate=0 if truncated else None)
		v = seg[-1]
		boundary[v] = boundary[v] & A if v in boundary else A
	return frozenset(fixed), boundary


def build_region(
	U: FixatorSpec,
	B: Iterable[Vertex] = (),
	root: Optional[Vertex] = None,
	truncate: Optional[int] = None,
) -> Region:
	"""Region spanned by U's finite data and B, rooted at a fixed vertex.

	With truncate=R every ray is unrolled R steps past the region and fixed
	there, instead of being summarised by its exact boundary set.
	"""
	S = U.scheme
	B = [tuple(b) for b in B]
	if root is None:
		root = min(U.fixed, key=lambda v: (len(v), v))
	core = set(T.convex_hull(list(U.fixed) + B + [root]))
	if truncate is not None:
		for r in U.rays:
			m = len(ray_segment(r, core)) - 1
			core.update(T.ray_from(r.start, r.end, m + truncate))
	region = region_shape(S, core, root).constrained(U, truncated=truncate is not None)
	if root not in region.fixed:
		raise ValueError("region root must be a fixed vertex")
	return region


def _dp(region: Region) -> dict[Vertex, list[int]]:
	"""Bottom-up counts N[v][i] of legal assignments below v given sigma(v) = L[i]."""
	S = region.scheme
	nL = len(S.L)
	N: dict[Vertex, list[int]] = {}
	for v in reversed(region.order):
		vals = [0] * nL
		sums = []
		for w in region.children[v]:
			Nw = N[w]
			cos = S.coset[region.pcolor[w]]
			cache: dict[int, int] = {}
			sums.append((cos, Nw, cache))
		for i in region.candidates(v):
			prod = 1
			for cos, Nw, cache in sums:
				key = cos[i][0]
				s = cache.get(key)
				if s is None:
					s = sum(Nw[j] for j in cos[i])
					cache[key] = s
				prod *= s
				if not prod:
					break
			vals[i] = prod
		N[v] = vals
	return N


def count_assignments(region: Region) -> int:
	return sum(_dp(region)[region.root])


@dataclass(frozen=True)
class IndexResult:
	value: int
	certification: Certification

	def __int__(self):
		return self.value


def _check_horizon(U: FixatorSpec, B: Sequence[Vertex], horizon: Optional[int]):
	if horizon is None:
		return
	hull = T.convex_hull(list(U.fixed) + list(B))
	diam = max(T.dist(a, b) for a in hull for b in hull)
	if horizon < diam:
		raise HorizonTooSmall(f"horizon {horizon} below hull diameter {diam}")


def index(U: FixatorSpec, extra: Iterable[Vertex], horizon: Optional[int] = None) -> IndexResult:
	"""|Fix(A) : Fix(A u extra)| as a ratio of assignment counts; exact."""
	extra = [tuple(v) for v in extra]
	_check_horizon(U, extra, horizon)
	if not extra or set(extra) <= set(U.fixed):
		return IndexResult(1, EXACT)
	region = build_region(U, extra)
	a = count_assignments(region)
	b = count_assignments(region.constrained(U.with_fixed(extra)))
	if b == 0 or a % b:
		raise ArithmeticError(f"count ratio {a}/{b} is not an index")
	return IndexResult(a // b, EXACT)


def index_between(U: FixatorSpec, V: FixatorSpec, cap: int = 64) -> IndexResult:
	"""|U : U n V| where V may also fix rays.

	A ray of V towards an end U already fixes contributes only the finite
	segment up to where it joins U's ray. For any other end, the ray is
	replaced by its shortest initial segment whose fixator inside U already
	fixes the whole ray; if none is found within cap steps the index is
	treated as unresolved.
	"""
	extra = set(V.fixed)
	mine = {r.end: r for r in U.rays}
	for r in V.rays:
		if r.end in mine:
			k = 0
			while not on_ray(T.ray_from(r.start, r.end, k)[-1], mine[r.end]):
				k += 1
			extra.update(T.ray_from(r.start, r.end, k))
			continue
		n = 0
		while True:
			seg = T.ray_from(r.start, r.end, n)
			W = U.with_fixed(extra | set(seg))
			ok, _ = fixes_ray(W, seg[-1], r.end)
			if ok:
				extra.update(seg)
				break
			n += 1
			if n > cap:
				raise NotStabilized(f"ray to {r.end} not fixed by any initial segment up to {cap}")
	return index(U, extra)


def possible_local_actions(U: FixatorSpec, v: Vertex) -> frozenset[int]:
	"""Indices of local actions at a fixed vertex v that some element of U realises."""
	v = tuple(v)
	if v not in U.fixed:
		raise ValueError("vertex must be fixed by U")
	N = _dp(build_region(U, [v], root=v))
	return frozenset(i for i, x in enumerate(N[v]) if x)


def fixes_ray(U: FixatorSpec, start: Vertex, end: End) -> tuple[bool, Optional[int]]:
	"""Whether every element of U fixes the ray from start to end pointwise.

	Exact: past the fixed data the set of reachable local actions evolves by a
	deterministic rule on an eventually periodic colour sequence, so a repeat
	of (state, phase) settles the question. Returns (verdict, first moved index).
	"""
	S = U.scheme
	start = tuple(start)
	if any(r.end == end for r in U.rays):
		return True, None

	def structural(x):
		return x in U.fixed or any(on_ray(x, r) for r in U.rays)

	if not structural(start):
		raise ValueError("ray start is not fixed by U")
	k = 0
	while structural(T.ray_from(start, end, k + 1)[-1]):
		k += 1
	e = T.ray_from(start, end, k)[-1]
	W = U.with_fixed([e])
	state = possible_local_actions(W, e)
	P = len(end.period)
	i0 = T.ray_period_start(e, end)
	cols = T.ray_colors(e, end, i0 + 4 * P + 8)
	seen = set()
	i = 0
	while True:
		if i >= len(cols):
			cols = T.ray_colors(e, end, 2 * len(cols))
		c = cols[i]
		if any(S.img[s][c] != c for s in state):
			return False, k + i + 1
		nxt = set()
		for s in state:
			nxt.update(S.coset[c][s])
		state = frozenset(nxt)
		i += 1
		if i >= i0:
			key = (state, (i - i0) % P)
			if key in seen:
				return True, None
			seen.add(key)


# ---------------------------------------------------------------- restriction sets


@dataclass(frozen=True)
class RestrictionSet:
	target: tuple[Vertex, ...]
	restrictions: frozenset[tuple[Vertex, ...]]
	horizon: Optional[int]
	certification: Certification

	def __len__(self):
		return len(self.restrictions)

	def maps(self) -> list[dict[Vertex, Vertex]]:
		return [dict(zip(self.target, r)) for r in sorted(self.restrictions)]


def _enumerate_region(region: Region, targets: Sequence[Vertex], budget: int, want_reps: bool = False):
	"""DFS over local actions in BFS order, colours ascending, one branch per future-relevant class."""
	S = region.scheme
	N = _dp(region)
	order = region.order
	out: set = set()
	reps: dict = {}
	sig: dict[Vertex, int] = {}
	img: dict[Vertex, Vertex] = {region.root: region.root}
	nodes = [0]

	def classes(v, cands):
		seen = {}
		for i in cands:
			key = tuple(S.coset[region.pcolor[w]][i][0] for w in region.children[v])
			seen.setdefault(key, i)
		return list(seen.values())

	def rec(k):
		nodes[0] += 1
		if nodes[0] > budget:
			raise BudgetExceeded(f"search exceeded {budget} nodes")
		if k == len(order):
			r = tuple(img[t] for t in targets)
			if r not in out:
				out.add(r)
				if want_reps:
					reps[r] = dict(sig)
			return
		v = order[k]
		if k == 0:
			cands = [i for i, x in enumerate(N[v]) if x]
		else:
			p = region.parent[v]
			c = region.pcolor[v]
			cands = [j for j in S.coset[c][sig[p]] if N[v][j]]
			img[v] = T.neighbor(img[p], S.img[sig[p]][c])
		for i in classes(v, sorted(cands, key=lambda i: S.img[i])):
			sig[v] = i
			rec(k + 1)
		sig.pop(v, None)

	rec(0)
	return out, reps


def enumerate_restrictions(
	U: FixatorSpec,
	B: Iterable[Vertex],
	R: Optional[int] = None,
	budget: int = DEFAULT_NODE_BUDGET,
	window: int = STABILIZATION_WINDOW,
) -> RestrictionSet:
	"""Distinct restrictions to B of elements of U.

	Rays are unrolled R steps past the region; the result is Exact when the
	truncated propagation already agrees with the infinite one, otherwise it
	must be unchanged over the last `window` horizons.
	"""
	B = tuple(tuple(b) for b in B)
	_check_horizon(U, B, R)
	if not U.rays:
		region = build_region(U, B)
		out, _ = _enumerate_region(region, B, budget)
		return RestrictionSet(B, frozenset(out), R, EXACT)
	if R is None:
		region = build_region(U, B)
		out, _ = _enumerate_region(region, B, budget)
		return RestrictionSet(B, frozenset(out), None, EXACT)
	exact = _truncation_exact(U, B, R)
	results = []
	for h in range(max(1, R - window + 1), R + 1):
		region = build_region(U, B, truncate=h)
		out, _ = _enumerate_region(region, B, budget)
		results.append(frozenset(out))
	if exact:
		return RestrictionSet(B, results[-1], R, EXACT)
	if len(set(results)) == 1 and len(results) >= window:
		return RestrictionSet(B, results[-1], R, stabilized_at(R))
	raise NotStabilized(f"restriction set still changing at horizon {R}")


def _truncation_exact(U: FixatorSpec, B: Sequence[Vertex], R: int) -> bool:
	core = set(build_region(U, B).order)
	for r in U.rays:
		m = len(ray_segment(r, core)) - 1
		if ray_allowed(U.scheme, r.start, r.end, m, truncate=R) != ray_allowed(U.scheme, r.start, r.end, m):
			return False
	return True


def realize(scheme: GroupScheme, region: Region, assignment: Mapping[Vertex, int]) -> CocycleElement:
	"""A legal element extending a local-action assignment on a region.

	Outside the region each vertex takes the identity when legal next to its
	neighbour towards the region, else copies that neighbour.
	"""
	S = scheme
	e = S.identity
	D = max(len(v) for v in region.order) + 1
	sig = {v: assignment[v] for v in region.order}
	todo = list(region.order)
	inball = set(T.ball(T.BASE, D, S.degree))
	while todo:
		nxt = []
		for v in todo:
			for c in range(S.degree):
				w = T.neighbor(v, c)
				if w in sig or (w not in inball):
					continue
				s = sig[v]
				sig[w] = e if e in S.coset[c][s] else s
				nxt.append(w)
		todo = nxt
	# image of the base vertex, walking from the fixed root
	y = region.root
	x = region.root
	for c in T.path_colors(region.root, T.BASE):
		y = T.neighbor(y, S.img[sig[x]][c])
		x = T.neighbor(x, c)
	g = CocycleElement(S, y, D, {v: S.L[sig[v]] for v in inball})
	return g.normalized()


def restriction_elements(U: FixatorSpec, B: Iterable[Vertex], budget: int = DEFAULT_NODE_BUDGET) -> dict[tuple, CocycleElement]:
	"""One realising element per restriction to B of the finite part of U.

	Rays of U are only honoured inside the region; beyond it the extension
	follows the identity-or-copy rule of realize.
	"""
	B = tuple(tuple(b) for b in B)
	region = build_region(U, B)
	_, reps = _enumerate_region(region, B, budget, want_reps=True)
	return {r: realize(U.scheme, region, a) for r, a in sorted(reps.items())}


# ---------------------------------------------------------------- oracle


def oracle_ball_group(
	scheme: GroupScheme,
	r: int,
	center: Vertex = T.BASE,
	budget: int = 5_000_000,
) -> tuple[list[Vertex], frozenset[tuple[Vertex, ...]]]:
	"""Every map of the radius-r ball fixing center that a legal element induces.

	Plain backtracking over full local actions on the interior, checking each
	edge constraint with explicit permutation arithmetic, and a brute-force
	existence check at the boundary. No counting, no class merging.
	"""
	S = scheme
	center = tuple(center)
	verts = T.ball(center, r, S.degree)
	interior = [v for v in verts if T.dist(center, v) < r]
	pos = {v: i for i, v in enumerate(verts)}
	par = {}
	for v in verts[1:]:
		for c in range(S.degree):
			w = T.neighbor(v, c)
			if w in pos and pos[w] < pos[v]:
				par[v] = (w, c)
				break
	out = set()
	sig: dict[Vertex, Perm] = {}
	nodes = [0]

	def boundary_ok():
		for v in verts:
			if T.dist(center, v) != r or v not in par:
				continue
			p, c = par[v]
			if not any(S.pair_legal(sig[p], t, c) for t in S.L):
				return False
		return True

	def rec(k):
		nodes[0] += 1
		if nodes[0] > budget:
			raise BudgetExceeded("oracle budget exceeded")
		if k == len(interior):
			if not boundary_ok():
				return
			img = {center: center}
			for v in verts[1:]:
				p, c = par[v]
				img[v] = T.neighbor(img[p], sig[p](c))
			out.add(tuple(img[v] for v in verts))
			return
		v = interior[k]
		for t in S.L:
			if v in par:
				p, c = par[v]
				if not S.pair_legal(sig[p], t, c):
					continue
			sig[v] = t
			rec(k + 1)
			del sig[v]

	if r == 0:
		return verts, frozenset({(center,)})
	rec(0)
	return verts, frozenset(out)


def oracle_restrictions(
	scheme: GroupScheme,
	r: int,
	A: Iterable[Vertex],
	B: Iterable[Vertex],
	center: Vertex = T.BASE,
) -> frozenset[tuple[Vertex, ...]]:
	verts, maps = oracle_ball_group(scheme, r, center)
	pos = {v: i for i, v in enumerate(verts)}
	A = [tuple(a) for a in A]
	B = [tuple(b) for b in B]
	out = set()
	for m in maps:
		if all(m[pos[a]] == a for a in A):
			out.add(tuple(m[pos[b]] for b in B))
	return frozenset(out)
