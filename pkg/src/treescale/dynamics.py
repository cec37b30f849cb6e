"""Classification of tree automorphisms and the dynamics of hyperbolic elements.

Covers axes and ends, end stabilisers, parabolic and contraction membership,
absorbing sets, nub approximations and contraction spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from . import tree as T
from .errors import HorizonTooSmall, InvariantViolation, NotStabilized, Undetermined
from .scheme import (
	EXACT,
	Certification,
	CocycleElement,
	FixatorSpec,
	RestrictionSet,
	enumerate_restrictions,
	fixes_ray,
	image_of_end,
	index,
	stabilized_at,
	DEFAULT_NODE_BUDGET,
	STABILIZATION_WINDOW,
)
from .tree import End, Midpoint, Vertex


# ---------------------------------------------------------------- classification


class Axis:
	"""Translation axis of a hyperbolic element, parametrised so that gamma(t + l) = g gamma(t)."""

	def __init__(self, g: CocycleElement, start: Vertex, length: int):
		self.g = g
		self.length = length
		self._seg = T.geodesic(start, g(start))[:length]
		self._cache: dict[int, Vertex] = {j: v for j, v in enumerate(self._seg)}
		self._plus: Optional[End] = None
		self._minus: Optional[End] = None

	def vertex(self, t: int) -> Vertex:
		v = self._cache.get(t)
		if v is not None:
			return v
		k, j = divmod(t, self.length)
		v = self._seg[j]
		step = self.g if k > 0 else self.g.inverse()
		for _ in range(abs(k)):
			v = step(v)
		self._cache[t] = v
		return v

	def window(self, a: int, b: int) -> list[Vertex]:
		return [self.vertex(t) for t in range(a, b + 1)]

	def contains(self, v: Vertex) -> bool:
		return T.dist(self.g(v), v) == self.length

	def position(self, v: Vertex, bound: int = 10_000) -> Optional[int]:
		"""The t with gamma(t) = v, or None if v is off the axis."""
		if not self.contains(v):
			return None
		x0 = self.vertex(0)
		d = T.dist(x0, v)
		for t in (d, -d):
			if self.vertex(t) == v:
				return t
		return None

	@property
	def xi_plus(self) -> End:
		if self._plus is None:
			self._plus = _attracting_end(self.g, self.vertex, self.length)
		return self._plus

	@property
	def xi_minus(self) -> End:
		if self._minus is None:
			self._minus = _attracting_end(self.g.inverse(), lambda t: self.vertex(-t), self.length)
		return self._minus

	def distance_to(self, v: Vertex) -> int:
		return (T.dist(self.g(v), v) - self.length) // 2


def _attracting_end(g: CocycleElement, gamma: Callable[[int], Vertex], ell: int) -> End:
	# past depth D the local action along the outgoing axis is one fixed pi,
	# so edge colours satisfy c(t + l) = pi(c(t)) and repeat with period l * ord(pi)
	g = g.normalized()
	D = g.depth
	t = 0
	while not (len(gamma(t)) >= D and len(gamma(t + 1)) == len(gamma(t)) + 1):
		t += 1
	v = gamma(t)
	pi = g.local(v)
	P = ell * pi.order()
	return End.from_word(gamma(t + P), len(v), P)


@dataclass
class IsometryReport:
	kind: str
	translation_length: int
	fixed_point: Optional[Union[Vertex, Midpoint]] = None
	axis: Optional[Axis] = None

	@property
	def hyperbolic(self) -> bool:
		return self.kind == "Hyperbolic"

	def to_json(self) -> dict:
		out = {"kind": self.kind, "translation_length": self.translation_length}
		if self.fixed_point is not None:
			fp = self.fixed_point
			out["fixed_point"] = str(fp) if isinstance(fp, Midpoint) else T.format_vertex(fp)
		if self.axis is not None:
			ell = self.axis.length
			out["axis"] = {
				"window": [T.format_vertex(v) for v in self.axis.window(-ell, 2 * ell)],
				"window_start": -ell,
				"xi_plus": str(self.axis.xi_plus),
				"xi_minus": str(self.axis.xi_minus),
			}
		return out


def classify(g: CocycleElement) -> IsometryReport:
	"""Bounded or Hyperbolic, by minimal displacement along [base, g(base)]."""
	path = T.geodesic(T.BASE, g(T.BASE))
	x0 = min(path, key=lambda x: T.dist(g(x), x))
	ell = T.dist(g(x0), x0)
	if ell == 0:
		return IsometryReport("Bounded", 0, fixed_point=x0)
	if ell == 1 and g(g(x0)) == x0:
		return IsometryReport("Bounded", 0, fixed_point=Midpoint(x0, g(x0)))
	return IsometryReport("Hyperbolic", ell, axis=Axis(g, x0, ell))


def axis_of(g: CocycleElement) -> Axis:
	rep = classify(g)
	if not rep.hyperbolic:
		raise ValueError("element is not hyperbolic")
	return rep.axis


# ---------------------------------------------------------------- ends


def end_shift(h: CocycleElement, xi: End, horizon: int) -> Optional[int]:
	"""The b with h(rho(t)) = rho(t - b) for all t in the checked window, else None.

	rho is the ray from the base vertex to xi. The window starts at the
	displacement of the base vertex, past which the image ray has merged into
	rho if it ever does.
	"""
	D0 = len(h(T.BASE))
	P = len(xi.period)
	if horizon <= D0 + P:
		raise HorizonTooSmall(f"horizon {horizon} must exceed {D0 + P}")
	s = max(h.normalized().depth, len(xi.prefix))
	top = max(horizon, s + D0 + 2 * P + 1)
	for b in range(-D0, D0 + 1):
		lo = max(D0, b, 0)
		if all(h(xi.vertex(t)) == xi.vertex(t - b) for t in range(lo, top + 1)):
			return b
	return None


def stabilizes_end(h: CocycleElement, xi: End, horizon: int = 16) -> bool:
	"""Whether h fixes the end xi; the window verdict is cross-checked against exact end tracking."""
	windowed = end_shift(h, xi, horizon) is not None
	exact = image_of_end(h, xi) == xi
	if windowed != exact:
		raise InvariantViolation(f"end-shift window and end image disagree for {xi}")
	return windowed


@dataclass
class ParabolicVerdict:
	value: bool
	displacements: list[int]
	shift: Optional[int]


def parabolic_detail(h: CocycleElement, g: CocycleElement, horizon: Optional[int] = None) -> ParabolicVerdict:
	"""Both routes for membership of h in the stabiliser of the attracting end of g."""
	ax = axis_of(g)
	ell = ax.length
	if horizon is None:
		reach = len(h(T.BASE)) + h.normalized().depth + len(ax.vertex(0)) + len(str(ax.xi_plus))
		horizon = reach // ell + 8
	if horizon < 4:
		raise HorizonTooSmall("parabolic test needs at least 4 orbit steps")
	ds = []
	for n in range(horizon + 1):
		y = ax.vertex(n * ell)
		ds.append(T.dist(h(y), y))
	tail = ds[-4:]
	steps = {b - a for a, b in zip(tail, tail[1:])}
	if steps == {0}:
		definitional = True
	elif steps == {2 * ell}:
		definitional = False
	else:
		raise Undetermined(f"displacements {tail} neither constant nor linear at horizon {horizon}")
	b = end_shift(h, ax.xi_plus, max(16, 2 * horizon))
	geometric = stabilizes_end(h, ax.xi_plus, max(16, 2 * horizon))
	if definitional != geometric:
		raise InvariantViolation("parabolic routes disagree")
	return ParabolicVerdict(geometric, ds, b)


def in_parabolic(h: CocycleElement, g: CocycleElement, horizon: Optional[int] = None) -> bool:
	"""Bounded forward conjugation orbit of h under g^-1, equivalently h fixes the attracting end of g."""
	return parabolic_detail(h, g, horizon).value


# ---------------------------------------------------------------- subspaces


@dataclass(frozen=True)
class Subspace:
	"""A closed convex g-invariant vertex set: the whole tree, an axis, or a common fixed set."""
	kind: str
	axis: Optional[Axis] = None
	elements: tuple[CocycleElement, ...] = ()

	def contains(self, v: Vertex) -> bool:
		if self.kind == "tree":
			return True
		if self.kind == "axis":
			return self.axis.contains(v)
		return all(h(v) == v for h in self.elements)

	def ball(self, center: Vertex, r: int, degree: int) -> list[Vertex]:
		return [v for v in T.ball(center, r, degree) if self.contains(v)]


def whole_tree() -> Subspace:
	return Subspace("tree")


def axis_subspace(g: CocycleElement) -> Subspace:
	return Subspace("axis", axis=axis_of(g))


def fixed_subspace(elements: Iterable[CocycleElement]) -> Subspace:
	return Subspace("fixed", elements=tuple(elements))


def _ybfs(Y: Subspace, center: Vertex, degree: int, inside: Callable[[Vertex], bool], cap: int) -> int:
	"""Largest r <= cap with the Y-ball of radius r around center inside the predicate, or -1."""
	if not inside(center):
		return -1
	seen = {center}
	frontier = [center]
	r = 0
	while r < cap:
		nxt = []
		for v in frontier:
			for w in T.neighbors(v, degree):
				if w not in seen and Y.contains(w):
					if not inside(w):
						return r
					seen.add(w)
					nxt.append(w)
		if not nxt:
			return cap
		frontier = nxt
		r += 1
	return r


# ---------------------------------------------------------------- contraction


def _contraction_horizon(h: CocycleElement, ax: Axis, r: int) -> int:
	reach = len(h(T.BASE)) + len(h.apply_inverse(T.BASE)) + h.normalized().depth + len(ax.vertex(0)) + r
	return 2 * (reach // ax.length + 4)


def contraction_profile(h: CocycleElement, g: CocycleElement, points: Sequence[Vertex], horizon: int) -> dict[Vertex, list[bool]]:
	"""For each y, whether h fixes g^-n(y) for n = 0..horizon."""
	ginv = g.inverse()
	out = {}
	for y in points:
		row = []
		v = y
		for _ in range(horizon + 1):
			row.append(h(v) == v)
			v = ginv(v)
		out[y] = row
	return out


def in_contraction(
	h: CocycleElement,
	g: CocycleElement,
	K: Optional[FixatorSpec] = None,
	radius: int = 2,
	horizon: Optional[int] = None,
	Y: Optional[Subspace] = None,
) -> bool:
	"""Whether h fixes g^-n(y) for all large n, for every y fixed by K near the axis.

	With K omitted the points are the Y-ball (default the whole tree) of the
	given radius around gamma(0).
	"""
	ax = axis_of(g)
	need = _contraction_horizon(h, ax, radius)
	if horizon is None:
		horizon = need
	elif horizon < need:
		raise HorizonTooSmall(f"horizon {horizon} below {need} for this element")
	deg = g.scheme.degree
	if K is not None:
		if not same_group(K.translate(g), K):
			raise ValueError("K is not g-invariant")
		pts = [v for v in T.ball(ax.vertex(0), radius, deg) if index(K, [v]).value == 1]
	else:
		pts = (Y or whole_tree()).ball(ax.vertex(0), radius, deg)
	prof = contraction_profile(h, g, pts, horizon)
	half = horizon // 2
	return all(all(row[half:]) for row in prof.values())


def same_group(U: FixatorSpec, V: FixatorSpec) -> bool:
	"""Equality of two fixators, via mutual containment of their defining data."""

	def inside(A: FixatorSpec, B: FixatorSpec) -> bool:
		# Fix(B) <= Fix(A) iff Fix(B) fixes all of A's data
		if any(index(B, [v]).value != 1 for v in A.fixed):
			return False
		return all(fixes_ray(B.with_fixed([r.start]), r.start, r.end)[0] for r in A.rays)

	return inside(U, V) and inside(V, U)


@dataclass
class AbsorbingWitness:
	end: End
	times: list[int]
	radii: list[int]
	envelope: list[int]
	horizon: int
	absorbing: bool

	def to_json(self) -> dict:
		return {
			"end": str(self.end),
			"times": self.times,
			"radii": self.radii,
			"envelope": self.envelope,
			"horizon": self.horizon,
			"absorbing": self.absorbing,
		}


def is_absorbing(
	inside: Callable[[Vertex], bool],
	ray: Callable[[int], Vertex],
	end: End,
	Y: Subspace,
	degree: int,
	horizon: int = 10,
	stretch: int = 4,
) -> AbsorbingWitness:
	"""Radii r_t of the largest Y-balls around ray(t) inside Z, and whether they grow.

	Accepts iff the suffix-minimum envelope of r_t increases at least once in
	every `stretch` consecutive steps over the second half of [0, horizon].
	"""
	times = list(range(horizon + 1))
	radii = [_ybfs(Y, ray(t), degree, inside, t) for t in times]
	env = radii[:]
	for i in range(len(env) - 2, -1, -1):
		env[i] = min(env[i], env[i + 1])
	lo = horizon // 2
	ok = env[-1] > 0
	for a in range(lo, horizon - stretch + 1):
		if env[a + stretch] <= env[a]:
			ok = False
			break
	return AbsorbingWitness(end, times, radii, env, horizon, ok)


def common_fixed(C: Sequence[CocycleElement]) -> Callable[[Vertex], bool]:
	return lambda v: all(h(v) == v for h in C)


@dataclass
class ContractionVerdict:
	value: bool
	witness: AbsorbingWitness
	per_element: list[bool]


def contraction_geometric(
	C: Sequence[CocycleElement],
	g: CocycleElement,
	Y: Optional[Subspace] = None,
	horizon: int = 10,
	radius: int = 2,
	stretch: int = 4,
) -> ContractionVerdict:
	"""Whether the common fixed set of C is absorbing for the repelling end of g within Y.

	Each element is also tested for contraction modulo the fixator of Y; any
	disagreement is an invariant violation.
	"""
	Y = Y or whole_tree()
	ax = axis_of(g)
	w = is_absorbing(common_fixed(C), lambda t: ax.vertex(-t), ax.xi_minus, Y, g.scheme.degree, horizon, stretch)
	per = [in_contraction(h, g, radius=radius, Y=Y) for h in C]
	if w.absorbing != all(per):
		raise InvariantViolation("absorbing-set verdict disagrees with per-element contraction")
	return ContractionVerdict(w.absorbing, w, per)


# ---------------------------------------------------------------- nub


def nub_approx(
	g: CocycleElement,
	U: FixatorSpec,
	radius: int = 2,
	shifts: int = 4,
	window: int = STABILIZATION_WINDOW,
	budget: int = DEFAULT_NODE_BUDGET,
) -> RestrictionSet:
	"""Restrictions to the ball around gamma(0) of the intersection of g^k U g^-k, |k| <= shifts."""
	if U.rays:
		raise ValueError("nub approximation expects a fixator of a finite set")
	rep = classify(g)
	center = rep.axis.vertex(0) if rep.hyperbolic else (rep.fixed_point if not isinstance(rep.fixed_point, Midpoint) else rep.fixed_point.u)
	B = T.ball(center, radius, g.scheme.degree)
	seq = []
	pts = set(U.fixed)
	gk, gik = g, g.inverse()
	ginv = g.inverse()
	for k in range(shifts + 1):
		if k:
			pts.update(gk(v) for v in U.fixed)
			pts.update(gik(v) for v in U.fixed)
			gk, gik = g * gk, ginv * gik
		V = FixatorSpec(U.scheme, pts)
		seq.append(enumerate_restrictions(V, B, budget=budget).restrictions)
	tail = seq[-window:]
	if len(tail) < window or len(set(tail)) != 1:
		raise NotStabilized(f"nub approximation still changing after {shifts} shifts")
	cert = EXACT if len(set(seq)) == 1 else stabilized_at(shifts)
	return RestrictionSet(tuple(B), seq[-1], shifts, cert)


# ---------------------------------------------------------------- contraction spaces


@dataclass
class ContractionSpaceReport:
	Z: list[Vertex]
	trivial: bool
	z_inside_gz: bool
	union_covers: bool
	intersection_empty: Optional[bool]
	horizon: int

	@property
	def ok(self) -> bool:
		if self.trivial:
			return self.z_inside_gz and self.union_covers
		return self.z_inside_gz and self.union_covers and bool(self.intersection_empty)

	def to_json(self) -> dict:
		return {
			"Z": [T.format_vertex(v) for v in self.Z],
			"trivial": self.trivial,
			"z_inside_gz": self.z_inside_gz,
			"union_covers": self.union_covers,
			"intersection_empty": self.intersection_empty,
			"horizon": self.horizon,
			"ok": self.ok,
		}


def contraction_space_check(
	g: CocycleElement,
	Y: Subspace,
	W: FixatorSpec,
	radius: int = 4,
	horizon: int = 8,
) -> ContractionSpaceReport:
	"""Checks Z within the ball, where Z is the set of points of Y fixed by W.

	Z must lie inside gZ, its forward translates must cover Y, and the
	intersection of its backward translates must be empty. When Z is all of
	Y the last check does not apply.
	"""
	ax = axis_of(g)
	deg = g.scheme.degree
	cache: dict[Vertex, bool] = {}

	def inZ(v):
		r = cache.get(v)
		if r is None:
			r = Y.contains(v) and index(W, [v]).value == 1
			cache[v] = r
		return r

	ginv = g.inverse()
	Yb = Y.ball(ax.vertex(0), radius, deg)
	Z = [v for v in Yb if inZ(v)]
	trivial = len(Z) == len(Yb)
	z_in_gz = all(inZ(ginv(v)) for v in Z)

	def orbit_hits(v, step):
		for _ in range(horizon + 1):
			if inZ(v):
				return True
			v = step(v)
		return False

	covers = all(orbit_hits(v, ginv) for v in Yb)
	if trivial:
		empty = None
	else:
		def always(v):
			for _ in range(horizon + 1):
				if not inZ(v):
					return False
				v = g(v)
			return True

		empty = not any(always(v) for v in Yb)
	return ContractionSpaceReport(Z, trivial, z_in_gz, covers, empty, horizon)
