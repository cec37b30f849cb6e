"""Scale of a tree automorphism by three independent routes, with tidiness certificates."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import tree as T
from .axis_tree import branching_sigma, build_axis_tree, sample_bases
from .dynamics import Axis, classify, axis_of, in_parabolic, stabilizes_end
from .errors import InvariantViolation, NotStabilized
from .scheme import (
	EXACT,
	Certification,
	CocycleElement,
	FixatorSpec,
	RayMarker,
	enumerate_restrictions,
	fixes_ray,
	fixator,
	image_of_end,
	index,
	index_between,
	local_perturbation,
	ray_segment,
	restriction_elements,
	stabilized_at,
)
from .tree import End, Midpoint, Vertex

DEFAULT_TIDY_HORIZON = 4


@dataclass
class ScaleReport:
	s_g: int
	s_ginv: int
	route: str
	subgroup: Optional[FixatorSpec] = None
	horizon: Optional[int] = None
	certification: Certification = EXACT
	detail: dict = field(default_factory=dict)

	def __post_init__(self):
		if self.s_g < 1 or self.s_ginv < 1:
			raise ValueError("scale values are positive integers")

	@property
	def Delta(self) -> Fraction:
		return Fraction(self.s_g, self.s_ginv)

	def to_json(self) -> dict:
		out = {
			"route": self.route,
			"s_g": self.s_g,
			"s_ginv": self.s_ginv,
			"Delta": str(self.Delta),
			"horizon": self.horizon,
			"certification": str(self.certification),
		}
		if self.subgroup is not None:
			out["subgroup"] = repr(self.subgroup)
		out.update(self.detail)
		return out


def _bounded_subgroup(g: CocycleElement) -> FixatorSpec:
	fp = classify(g).fixed_point
	pts = [fp.u, fp.v] if isinstance(fp, Midpoint) else [fp]
	return fixator(g.scheme, pts)


def _bounded_report(g: CocycleElement, route: str) -> ScaleReport:
	U = _bounded_subgroup(g)
	A = sorted(U.fixed)
	s = index(U.translate(g), A).value
	si = index(U.translate(g.inverse()), A).value
	if (s, si) != (1, 1):
		raise InvariantViolation("a bounded element normalising its fixator has scale 1")
	return ScaleReport(1, 1, route, U, certification=EXACT, detail={"kind": "Bounded"})


def displacement_index(U: FixatorSpec, g: CocycleElement) -> int:
	"""|gUg^-1 : gUg^-1 n U| for U the fixator of a finite set."""
	return index(U.translate(g), sorted(U.fixed)).value


# ---------------------------------------------------------------- tidiness


@dataclass
class TidyVerdict:
	TA: Optional[bool]
	GTA: Optional[bool]
	GTplus: Optional[bool]
	GTminus: Optional[bool]
	horizon: int
	witness: dict = field(default_factory=dict)

	@property
	def minimizing(self) -> Optional[bool]:
		flags = (self.GTA, self.GTplus, self.GTminus)
		if all(f is True for f in flags):
			return True
		if any(f is False for f in flags):
			return False
		return None

	def to_json(self) -> dict:
		return {
			"TA": self.TA,
			"GTA": self.GTA,
			"GTplus": self.GTplus,
			"GTminus": self.GTminus,
			"minimizing": self.minimizing,
			"horizon": self.horizon,
			"witness": self.witness,
		}


def exit_vertex(A: Iterable[Vertex], xi: End) -> Vertex:
	"""Last vertex of a convex set on its ray towards xi."""
	A = frozenset(A)
	a = min(A, key=lambda v: (len(v), v))
	return ray_segment(RayMarker(a, xi), A)[-1]


def end_fixator(U: FixatorSpec, xi: End) -> FixatorSpec:
	"""U_xi: the elements of U fixing xi, which fix the ray from U's fixed set to xi."""
	return U.with_ray(exit_vertex(U.fixed, xi), xi)


def _gt_forms(U: FixatorSpec, g: CocycleElement, xi: End, N: int) -> dict[str, bool]:
	# g here is the element whose inverse pushes towards xi: g for xi_+, g^-1 for xi_-
	A = sorted(U.fixed)
	V = end_fixator(U, xi)
	ginv = g.inverse()
	Vc = V.translate(ginv)
	a = index(Vc, A).value == 1
	b = index_between(Vc, V).value == 1
	m1 = index_between(V.translate(g), V).value
	c = all(index_between(V.translate(g ** k), V).value == m1 ** k for k in (2, 3))
	d = True
	gn = g
	for _ in range(N):
		if index(V, [gn(v) for v in A]).value != 1:
			d = False
			break
		gn = g * gn
	return {"a": a, "b": b, "c": c, "d": d, "m": m1}


def check_tidy(U: FixatorSpec, g: CocycleElement, horizon: int = DEFAULT_TIDY_HORIZON) -> TidyVerdict:
	"""Geometric tidiness criteria for U = Fix(A) and a hyperbolic g.

	GTA is tested as transitivity on pairs of ray points at every depth up to
	the horizon; each of GT+ and GT- is evaluated in four equivalent forms
	that must agree; TA compares |U+ : U+ n U-| with |U : U-| on finite
	approximations.
	"""
	if U.rays:
		raise ValueError("check_tidy expects the fixator of a finite set")
	ax = axis_of(g)
	A = sorted(U.fixed)
	ep, em = exit_vertex(A, ax.xi_plus), exit_vertex(A, ax.xi_minus)
	levels = []
	gta = True
	for R in range(1, horizon + 1):
		a = T.ray_from(ep, ax.xi_plus, R)[-1]
		b = T.ray_from(em, ax.xi_minus, R)[-1]
		ia, ib = index(U, [a]).value, index(U, [b]).value
		iab = index(U, [a, b]).value
		levels.append({"R": R, "orbit_plus": ia, "orbit_minus": ib, "orbit_pair": iab})
		if iab != ia * ib:
			gta = False
	plus = _gt_forms(U, g, ax.xi_plus, horizon)
	minus = _gt_forms(U, g.inverse(), ax.xi_minus, horizon)
	for name, forms in (("GT+", plus), ("GT-", minus)):
		vals = {forms[k] for k in "abcd"}
		if len(vals) != 1:
			raise InvariantViolation(f"equivalent forms of {name} disagree: {forms}")
	# TA on finite approximations of U+ and U-
	Ap, Am = set(A), set(A)
	gp, gm = g, g.inverse()
	for _ in range(horizon):
		Ap.update(gp(v) for v in A)
		Am.update(gm(v) for v in A)
		gp, gm = g * gp, g.inverse() * gm
	Uplus = FixatorSpec(U.scheme, Ap)
	ta = index(Uplus, sorted(Am)).value == index(U, sorted(Am)).value
	return TidyVerdict(
		TA=ta,
		GTA=gta,
		GTplus=plus["a"],
		GTminus=minus["a"],
		horizon=horizon,
		witness={"levels": levels, "GT+": plus, "GT-": minus},
	)


# ---------------------------------------------------------------- scale routes


def scale_axis(g: CocycleElement, horizon: int = 12, tidy_horizon: int = DEFAULT_TIDY_HORIZON) -> ScaleReport:
	"""Scale from the fixator of an axis segment certified minimizing.

	Segments gamma[0, t] for t = l, 2l, ... are tried in turn; the first one
	that passes GTA, GT+ and GT- gives s(g) and s(g^-1) as displacement indices.
	"""
	rep = classify(g)
	if not rep.hyperbolic:
		return _bounded_report(g, "axis")
	ax = rep.axis
	ell = ax.length
	tried = []
	t = ell
	while t <= horizon:
		U = fixator(g.scheme, ax.window(0, t))
		I = displacement_index(U, g)
		v = check_tidy(U, g, tidy_horizon)
		tried.append({"t": t, "index": I, "minimizing": v.minimizing, "GTA": v.GTA})
		if v.minimizing:
			Ii = displacement_index(U, g.inverse())
			return ScaleReport(I, Ii, "axis", U, horizon, EXACT, {"t0": t, "tried": tried})
		t += ell
	raise NotStabilized(f"no certified segment up to t = {horizon}; tried {tried}")


def scale_branching(g: CocycleElement, radius: Optional[int] = None) -> ScaleReport:
	"""Scale as the branching count of the axis tree below a member vertex."""
	rep = classify(g)
	if not rep.hyperbolic:
		return _bounded_report(g, "branching")
	ell = rep.axis.length
	radius = radius or 2 * ell + 1
	vals = []
	for h in (g, g.inverse()):
		tr = build_axis_tree(h, radius)
		xs = sample_bases(tr, ell)
		if not xs:
			raise ValueError("radius too small for any base vertex")
		got = {branching_sigma(tr, x, ell) for x in xs}
		if len(got) != 1:
			raise InvariantViolation(f"branching counts depend on the base vertex: {sorted(got)}")
		vals.append(got.pop())
	return ScaleReport(vals[0], vals[1], "branching", None, radius, EXACT, {"lambda": tr.lam})


def rooted_subtrees(v: Vertex, children: dict) -> list[frozenset]:
	"""All subtrees of a rooted tree whose top vertex is v."""
	opts = [[frozenset()] + rooted_subtrees(w, children) for w in children[v]]
	out = []
	for combo in itertools.product(*opts):
		s = {v}
		for part in combo:
			s |= part
		out.append(frozenset(s))
	return out


def convex_subsets(center: Vertex, radius: int, degree: int) -> list[frozenset]:
	ball = T.ball(center, radius, degree)
	children: dict[Vertex, list[Vertex]] = {v: [] for v in ball}
	for v in ball[1:]:
		p = T.geodesic(v, center)[1]
		children[p].append(v)
	out = []
	for v in ball:
		out.extend(rooted_subtrees(v, children))
	return out


def scale_search(g: CocycleElement, bound: int = 2) -> ScaleReport:
	"""Minimum displacement index over fixators of all convex sets in a ball."""
	rep = classify(g)
	if rep.hyperbolic:
		center = rep.axis.vertex(0)
	else:
		fp = rep.fixed_point
		center = fp.u if isinstance(fp, Midpoint) else fp
	subsets = convex_subsets(center, bound, g.scheme.degree)
	best = []
	for h in (g, g.inverse()):
		m, arg = None, None
		for A in subsets:
			U = FixatorSpec(g.scheme, A)
			I = displacement_index(U, h)
			if m is None or I < m or (I == m and (len(A), sorted(A)) < (len(arg), sorted(arg))):
				m, arg = I, A
		best.append((m, arg))
	U = FixatorSpec(g.scheme, best[0][1])
	return ScaleReport(best[0][0], best[1][0], "search", U, bound, stabilized_at(bound), {"candidates": len(subsets)})


# ---------------------------------------------------------------- modular function


@dataclass
class ModularReport:
	delta_end: int
	delta_end_inv: int
	delta_global: Fraction
	delta_direct: Fraction

	def to_json(self) -> dict:
		return {
			"Delta_end_stabilizer": self.delta_end,
			"Delta_end_stabilizer_inverse": self.delta_end_inv,
			"Delta": str(self.delta_global),
			"Delta_direct": str(self.delta_direct),
		}


def ray_expansion(g: CocycleElement, xi: End, base: Vertex) -> int:
	"""|g V g^-1 : V| for V the fixator of the ray from base to xi, g shifting towards xi."""
	V = fixator(g.scheme, [base], [(base, xi)])
	W = V.translate(g)
	up = index_between(W, V).value
	down = index_between(V, W).value
	if down != 1:
		raise InvariantViolation("conjugate of a ray fixator does not contain it")
	return up


def modular(g: CocycleElement) -> ModularReport:
	"""Modular function values from ray fixators, checked against a compact open subgroup."""
	rep = classify(g)
	if not rep.hyperbolic:
		U = _bounded_subgroup(g)
		up = index(U.translate(g), sorted(U.fixed)).value
		down = index(U, sorted(U.translate(g).fixed)).value
		return ModularReport(1, 1, Fraction(1), Fraction(up, down))
	ax = rep.axis
	dp = ray_expansion(g, ax.xi_plus, ax.vertex(0))
	dm = ray_expansion(g.inverse(), ax.xi_minus, ax.vertex(0))
	U = fixator(g.scheme, ax.window(0, ax.length))
	up = index(U.translate(g), sorted(U.fixed)).value
	down = index(U, sorted(U.translate(g).fixed)).value
	direct = Fraction(up, down)
	glob = Fraction(dp, dm)
	if glob != direct:
		raise InvariantViolation(f"modular function {glob} from ray fixators, {direct} from a compact open subgroup")
	return ModularReport(dp, dm, glob, direct)


# ---------------------------------------------------------------- uniscalar battery


@dataclass
class Flag:
	value: Optional[bool]
	certification: Certification
	note: str = ""

	def to_json(self) -> dict:
		return {"value": self.value, "certification": str(self.certification), "note": self.note}


@dataclass
class BatteryReport:
	flags: dict[str, Flag]
	verdict: Optional[bool]

	def to_json(self) -> dict:
		return {"flags": {k: f.to_json() for k, f in self.flags.items()}, "verdict": self.verdict}


def end_perturbations(g: CocycleElement, xi: End, radius: int = 2) -> list[CocycleElement]:
	"""Legal single-vertex perturbations near gamma(0) that fix xi."""
	S = g.scheme
	ax = axis_of(g)
	out = []
	for v in T.ball(ax.vertex(0), radius, S.degree):
		for p in S.L:
			if p.is_identity():
				continue
			try:
				u = local_perturbation(S, v, p)
			except Exception:
				continue
			if stabilizes_end(u, xi):
				out.append(u)
	return out


def _open_radius(U_of_r, x: Vertex, xi: End, horizon: int) -> Optional[int]:
	for r in range(horizon + 1):
		if fixes_ray(U_of_r(r), x, xi)[0]:
			return r
	return None


def uniscalar_battery(g: CocycleElement, horizon: int = 4, samples: int = 24, seed: int = 0) -> BatteryReport:
	"""Seven equivalent conditions for s(g) = 1, each computed by its own route."""
	rep = classify(g)
	if not rep.hyperbolic:
		return BatteryReport({}, None)
	S = g.scheme
	ax = rep.axis
	x = ax.vertex(0)
	ell = ax.length
	flags: dict[str, Flag] = {}
	sa = scale_axis(g)
	flags["i"] = Flag(sa.s_g == 1, EXACT, f"s(g)={sa.s_g}")
	Vp = fixator(S, [ax.vertex(ell)], [(ax.vertex(ell), ax.xi_plus)])
	s_end = index(Vp, ax.window(0, ell)).value
	flags["ii"] = Flag(s_end == 1, EXACT, f"s in end stabiliser = {s_end}")
	# modular function of the end stabiliser from a subgroup based off the axis
	off = next(w for w in T.neighbors(x, S.degree) if not ax.contains(w))
	Vo = fixator(S, [off], [(off, ax.xi_plus)])
	Wo = Vo.translate(g)
	up = index_between(Wo, Vo).value
	down = index_between(Vo, Wo).value
	flags["iii"] = Flag(Fraction(up, down) == 1, EXACT, f"Delta={Fraction(up, down)}")
	ball_fix = lambda r: fixator(S, T.ball(x, r, S.degree))
	r4 = _open_radius(ball_fix, x, ax.xi_minus, horizon)
	flags["iv"] = Flag(r4 is not None, EXACT if r4 is not None else stabilized_at(horizon), f"radius={r4}")
	rel_fix = lambda r: fixator(S, T.ball(x, r, S.degree), [(x, ax.xi_plus)])
	r5 = _open_radius(rel_fix, x, ax.xi_minus, horizon)
	flags["v"] = Flag(r5 is not None, EXACT if r5 is not None else stabilized_at(horizon), f"radius={r5}")
	base_ok = fixes_ray(fixator(S, [x], [(x, ax.xi_plus)]), x, ax.xi_minus)[0]
	pert = end_perturbations(g, ax.xi_plus)
	moved = [u for u in pert if not stabilizes_end(u, ax.xi_minus)]
	vi = base_ok and not moved
	flags["vi"] = Flag(vi, EXACT if not vi else stabilized_at(horizon), f"sampled {len(pert)} end stabilisers")
	rng = random.Random(seed)
	hits = 0
	ok7 = True
	for _ in range(samples if pert else 0):
		u = rng.choice(pert)
		k = rng.randint(1, 3)
		h = u * g ** k
		r = classify(h)
		if not r.hyperbolic or r.axis.xi_plus != ax.xi_plus:
			continue
		hits += 1
		if r.axis.xi_minus != ax.xi_minus:
			ok7 = False
			break
	flags["vii"] = Flag(ok7, EXACT if not ok7 else stabilized_at(samples), f"{hits} sampled elements with the same attracting end")
	vals = {f.value for f in flags.values()}
	if len(vals) == 1:
		return BatteryReport(flags, vals.pop())
	exact = {f.value for f in flags.values() if f.certification.kind == "Exact"}
	if len(exact) > 1:
		raise InvariantViolation(f"uniscalar flags disagree: { {k: f.value for k, f in flags.items()} }")
	return BatteryReport(flags, None)


# ---------------------------------------------------------------- neighbourhoods and arrows


def _compose(a: tuple, b: tuple, pos: dict) -> tuple:
	"""Restriction of ab from restrictions a, b on the same invariant target."""
	return tuple(a[pos[y]] for y in b)


def _invert(a: tuple, target: tuple, pos: dict) -> tuple:
	out = [None] * len(a)
	for i, y in enumerate(a):
		out[pos[y]] = target[i]
	return tuple(out)


def tidy_neighbourhood_check(U: FixatorSpec, g: CocycleElement, horizon: int = 3) -> Optional[int]:
	"""Smallest r with Fix(B_r(x)) inside U_xi+ U_xi- on the ball of radius r + 1, x in U's fixed set."""
	ax = axis_of(g)
	x = min(U.fixed, key=lambda v: (T.dist(v, ax.vertex(0)), v))
	Up, Um = end_fixator(U, ax.xi_plus), end_fixator(U, ax.xi_minus)
	for r in range(horizon + 1):
		B = tuple(T.ball(x, r + 1, g.scheme.degree))
		pos = {v: i for i, v in enumerate(B)}
		if any(v not in pos for v in U.fixed):
			continue
		N = enumerate_restrictions(fixator(g.scheme, T.ball(x, r, g.scheme.degree)), B).restrictions
		P = enumerate_restrictions(Up, B).restrictions
		M = enumerate_restrictions(Um, B).restrictions
		Pinv = [_invert(a, B, pos) for a in P]
		if all(any(_compose(ai, n, pos) in M for ai in Pinv) for n in N):
			return r
	return None


@dataclass
class ArrowReport:
	case: str
	s_g: int
	s_ginv: int
	stabilisers_equal: Optional[bool] = None

	def to_json(self) -> dict:
		return {"case": self.case, "s_g": self.s_g, "s_ginv": self.s_ginv, "stabilisers_equal": self.stabilisers_equal}


def arrow_classify(g: CocycleElement, radius: int = 2) -> ArrowReport:
	"""Where the attracting end of g sits in the arrow structure, from s(g) and s(g^-1)."""
	sa = scale_axis(g)
	ax = axis_of(g)
	if sa.s_g == 1 and sa.s_ginv == 1:
		x = ax.vertex(0)
		Vp = fixator(g.scheme, [x], [(x, ax.xi_plus)])
		Vm = fixator(g.scheme, [x], [(x, ax.xi_minus)])
		B = T.ball(x, radius, g.scheme.degree)
		eq = (
			fixes_ray(Vp, x, ax.xi_minus)[0]
			and fixes_ray(Vm, x, ax.xi_plus)[0]
			and enumerate_restrictions(Vp, B).restrictions == enumerate_restrictions(Vm, B).restrictions
		)
		return ArrowReport("uniscalar_pair", 1, 1, eq)
	if sa.s_g > 1 and sa.s_ginv == 1:
		return ArrowReport("open_stabiliser_many_repelling", sa.s_g, sa.s_ginv)
	if sa.s_g == 1 and sa.s_ginv > 1:
		return ArrowReport("arrow_to_repelling", sa.s_g, sa.s_ginv)
	return ArrowReport("no_arrows", sa.s_g, sa.s_ginv)


# ---------------------------------------------------------------- tidy structure


@dataclass
class TidyStructure:
	target: tuple
	end_plus: frozenset
	g_plus: frozenset
	parabolic: frozenset
	g_plus_certification: Certification
	samples: int

	@property
	def ok(self) -> bool:
		return self.end_plus == self.g_plus == self.parabolic


def tidy_structure(U: FixatorSpec, g: CocycleElement, radius: int = 2, shifts: int = 6, window: int = 3) -> TidyStructure:
	"""Restriction sets of U_xi+, U_g+ and U n par(g^-1) on a ball around gamma(0).

	U_g+ is the intersection of g^n U g^-n over n >= 0, approximated by
	growing n until stable. The parabolic part keeps realised elements of U
	that pass the two-route parabolic test.
	"""
	ax = axis_of(g)
	B = tuple(T.ball(ax.vertex(0), radius, g.scheme.degree))
	Vp = end_fixator(U, ax.xi_plus)
	end_plus = enumerate_restrictions(Vp, B).restrictions
	seq = []
	pts = set(U.fixed)
	gn = g
	for n in range(shifts + 1):
		if n:
			pts.update(gn(v) for v in U.fixed)
			gn = g * gn
		seq.append(enumerate_restrictions(FixatorSpec(U.scheme, pts), B).restrictions)
	if len(set(seq[-window:])) != 1:
		raise NotStabilized("U_g+ restrictions still changing")
	g_plus = seq[-1]
	# elements of U realised on B plus a short stretch of the forward ray
	ep = exit_vertex(U.fixed, ax.xi_plus)
	far = T.ray_from(ep, ax.xi_plus, 2)
	reps = restriction_elements(U, list(B) + far)
	par = set()
	for key, u in reps.items():
		if in_parabolic(u, g):
			par.add(key[: len(B)])
	return TidyStructure(B, end_plus, g_plus, frozenset(par), stabilized_at(shifts), len(reps))
