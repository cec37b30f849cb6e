"""Acceptance checks, one test per criterion; each prints a PASS/FAIL line."""

from __future__ import annotations

import random
import time
from collections import deque
from fractions import Fraction

import pytest

from treescale import padic as BT
from treescale import tree as T
from treescale.dynamics import (
	axis_of,
	axis_subspace,
	classify,
	contraction_geometric,
	in_contraction,
	parabolic_detail,
	stabilizes_end,
	whole_tree,
)
from treescale.permgrp import Perm
from treescale.scale import (
	check_tidy,
	modular,
	scale_axis,
	scale_branching,
	scale_search,
	tidy_structure,
	uniscalar_battery,
)
from treescale.scheme import (
	EXACT,
	CocycleElement,
	CoupledWreath,
	Full,
	Universal,
	enumerate_restrictions,
	fixator,
	identity,
	local_perturbation,
	oracle_restrictions,
	random_element,
	standard_translation,
)
from treescale.permgrp import cyclic_group


@pytest.fixture
def report(capsys):
	def emit(n, ok, detail, t0):
		with capsys.disabled():
			print(f"\n[criterion {n:>2}] {'PASS' if ok else 'FAIL'} {detail} ({time.perf_counter() - t0:.1f}s)")
	return emit


def _schemes():
	return {"Full(3)": Full(3), "U(C3)": Universal(cyclic_group(3)), "CW(2)": CoupledWreath(2)}


def _hyperbolic_instances():
	S = _schemes()
	out = []
	for name in ("Full(3)", "CW(2)", "U(C3)"):
		g = standard_translation(S[name])
		out.append((f"{name} g", g))
		out.append((f"{name} g^2", g ** 2))
	F = S["Full(3)"]
	out.append(("Full(3) hg", local_perturbation(F, (1,), Perm((2, 1, 0))) * standard_translation(F)))
	C = S["CW(2)"]
	out.append(("CW(2) pi g", CocycleElement(C, (), 0, {(): Perm((1, 0, 3, 2))}) * standard_translation(C)))
	return out


def test_criterion_01_figure_nine(report):
	t0 = time.perf_counter()
	g = standard_translation(Full(4)) ** 2
	a = scale_axis(g, horizon=8)
	b = scale_branching(g)
	c = scale_search(g)
	vals = (a.s_g, b.s_g, c.s_g)
	elapsed = time.perf_counter() - t0
	ok = vals == (9, 9, 9) and a.certification == EXACT and elapsed < 60
	report(1, ok, f"Full(4) length-2 translation: axis/branching/search = {vals}", t0)
	assert vals == (9, 9, 9)
	assert a.certification == EXACT and b.certification == EXACT
	assert elapsed < 60


def test_criterion_02_oracle_equivalence(report):
	t0 = time.perf_counter()
	pairs = 0
	bad = []
	for name, S in _schemes().items():
		for r in (2, 3):
			ballv = T.ball(T.BASE, r, S.degree)
			sphere = [v for v in ballv if len(v) == r]
			for A in ([T.BASE], [T.BASE, ballv[1]], [T.BASE, ballv[2], ballv[S.degree + 1]], [T.BASE, sphere[-1]]):
				for B in (ballv, sphere):
					fast = enumerate_restrictions(fixator(S, A), B)
					slow = oracle_restrictions(S, r, A, B)
					pairs += 1
					if fast.restrictions != slow:
						bad.append((name, r, A, len(fast), len(slow)))
	elapsed = time.perf_counter() - t0
	ok = not bad and pairs >= 20 and elapsed < 300
	report(2, ok, f"{pairs} (U, B) pairs, {len(bad)} mismatches", t0)
	assert pairs >= 20
	assert not bad
	assert elapsed < 300


def test_criterion_03_small_tidy(report):
	t0 = time.perf_counter()
	S = CoupledWreath(2)
	g = standard_translation(S)
	ax = axis_of(g)
	v = check_tidy(fixator(S, ax.window(0, 1)), g)
	sa = scale_axis(g)
	t_cert = sa.detail["t0"]
	w = check_tidy(fixator(S, ax.window(0, t_cert)), g)
	elapsed = time.perf_counter() - t0
	ok = v.GTA is False and w.minimizing is True and sa.certification == EXACT and elapsed < 120
	report(3, ok, f"GTA on two adjacent axis vertices = {v.GTA}; minimizing segment at t = {t_cert}", t0)
	assert v.GTA is False
	assert w.minimizing is True and sa.certification == EXACT
	assert elapsed < 120


def test_criterion_04_sl2(report):
	t0 = time.perf_counter()
	reps = [BT.verify_sl2(2, 5), BT.verify_sl2(3, 4)]
	elapsed = time.perf_counter() - t0
	ok = all(r.ok for r in reps) and elapsed < 120
	report(4, ok, "; ".join(f"p={r.p} R={r.radius} |Z0|={r.horoball_size} ok={r.ok}" for r in reps), t0)
	for r in reps:
		assert r.fixed_equals_horoball and r.nested and r.covers
	assert elapsed < 120


def test_criterion_05_uniscalar_battery(report):
	t0 = time.perf_counter()
	rows = []
	for name, g in _hyperbolic_instances():
		assert classify(g).hyperbolic
		b = uniscalar_battery(g)
		vals = {f.value for f in b.flags.values()}
		rows.append((name, b.verdict, vals))
	consistent = [r for r in rows if len(r[2]) == 1 and r[1] is not None]
	ok = len(consistent) == len(rows) and len(rows) >= 6
	report(5, ok, f"{len(consistent)}/{len(rows)} instances with all seven flags agreeing", t0)
	assert len(rows) >= 6
	for name, verdict, vals in rows:
		assert verdict is not None, name
		assert len(vals) == 1, name


def _bounded_orbit(h, g, steps=24):
	"""Definitional route, computed here: d(h g^n x, g^n x) is eventually constant."""
	ax = axis_of(g)
	ds = [T.dist(h(ax.vertex(n * ax.length)), ax.vertex(n * ax.length)) for n in range(steps)]
	tail = ds[-6:]
	if len(set(tail)) == 1:
		return True
	diffs = {b - a for a, b in zip(tail, tail[1:])}
	assert diffs == {2 * ax.length}, ds
	return False


def test_criterion_06_parabolic(report):
	t0 = time.perf_counter()
	rng = random.Random(6)
	counts = {}
	agree_all = True
	for name, S in _schemes().items():
		n = 0
		pos = 0
		base = standard_translation(S)
		while n < 50:
			g = base ** rng.randint(1, 2)
			h = random_element(S, rng, max_depth=2, max_shift=3)
			if rng.random() < 0.3:
				# push a fraction of samples into the stabiliser of the attracting end
				h = g ** rng.randint(-2, 2)
			a = parabolic_detail(h, g).value
			b = stabilizes_end(h, axis_of(g).xi_plus)
			c = _bounded_orbit(h, g)
			agree_all &= a == b == c
			pos += a
			n += 1
		counts[name] = (n, pos)
	report(6, agree_all, ", ".join(f"{k}: {n} pairs ({p} parabolic)" for k, (n, p) in counts.items()), t0)
	assert agree_all
	assert all(n >= 50 for n, _ in counts.values())


def test_criterion_07_tidy_structure(report):
	t0 = time.perf_counter()
	cases = [(name, g, 2) for name, g in _hyperbolic_instances()[:6]]
	cases.append(("Full(4) g^2", standard_translation(Full(4)) ** 2, 1))
	rows = []
	for name, g, radius in cases:
		sa = scale_axis(g)
		U = sa.subgroup
		ts = tidy_structure(U, g, radius=radius)
		rows.append((name, ts.ok, len(ts.g_plus)))
	ok = all(r[1] for r in rows)
	report(7, ok, ", ".join(f"{n}: {'=' if o else '!='} ({k})" for n, o, k in rows), t0)
	for name, o, _ in rows:
		assert o, name


def _contraction_cases():
	F = Full(3)
	g = standard_translation(F)
	ax = axis_of(g)
	cases = []
	# single-vertex perturbations; the ones away from the repelling side fix a horoball-type set
	for v in T.ball(T.BASE, 2, 3):
		if not v:
			continue
		for p in F.L:
			if p.is_identity():
				continue
			try:
				u = local_perturbation(F, v, p)
			except ValueError:
				continue
			cases.append(("Full(3)", [u], g))
			break
	plus_side = [c[1][0] for c in cases if stabilizes_end(c[1][0], ax.xi_minus)]
	cases.append(("Full(3)", plus_side[:2], g))
	cases.append(("Full(3)", [plus_side[0], g], g))
	cases.append(("Full(3)", [identity(F)], g))
	cases.append(("Full(3)", [g], g))
	cases.append(("Full(3)", [g.inverse()], g))
	C = CoupledWreath(2)
	gc = standard_translation(C)
	for p in C.L:
		cases.append(("CW(2)", [CocycleElement(C, (), 0, {(): p})], gc))
	cases.append(("CW(2)", [gc], gc))
	cases.append(("CW(2)", [gc ** 2], gc))
	return cases


def test_criterion_08_contraction(report):
	t0 = time.perf_counter()
	cases = _contraction_cases()
	pos = neg = 0
	agree = True
	for _, Cs, g in cases:
		for Y in (whole_tree(), axis_subspace(g)):
			v = contraction_geometric(Cs, g, Y=Y)
			per = [in_contraction(h, g, Y=Y) for h in Cs]
			agree &= v.value == all(per)
			if Y.kind == "tree":
				pos += v.value
				neg += not v.value
	n3 = sum(1 for c in cases if c[0] == "Full(3)")
	report(8, agree and len(cases) >= 20, f"{len(cases)} cases ({n3} Full(3)), {pos} contracting, {neg} not", t0)
	assert len(cases) >= 20
	assert pos > 0 and neg > 0
	assert agree


def test_criterion_09_modular(report):
	t0 = time.perf_counter()
	rows = []
	for name, g in _hyperbolic_instances():
		sa = scale_axis(g)
		m = modular(g)
		rows.append((name, m.delta_global == Fraction(sa.s_g, sa.s_ginv)))
	rng = random.Random(9)
	bounded = 0
	for S in _schemes().values():
		for _ in range(20):
			h = random_element(S, rng, max_depth=2, max_shift=2)
			if classify(h).hyperbolic:
				continue
			bounded += 1
			sa = scale_axis(h)
			m = modular(h)
			rows.append(("bounded", m.delta_global == 1 == m.delta_direct and (sa.s_g, sa.s_ginv) == (1, 1)))
	ok = all(r[1] for r in rows)
	report(9, ok, f"{len(rows) - bounded} hyperbolic and {bounded} bounded instances", t0)
	assert bounded > 0
	for name, good in rows:
		assert good, name


def test_criterion_10_padic(report):
	t0 = time.perf_counter()
	p, R = 2, 5
	P = BT.precision_for(R) + 8
	B = BT.ball(p, R, P)
	keys = sorted(B, key=lambda L: (L.a, L.b, L.c))
	rng = random.Random(10)

	def bfs(start):
		dist = {start: 0}
		q = deque([start])
		while q:
			v = q.popleft()
			for w in BT.neighbors(v, P):
				if w in B and w not in dist:
					dist[w] = dist[v] + 1
					q.append(w)
		return dist

	dist_ok = 0
	for _ in range(100):
		a, b = rng.choice(keys), rng.choice(keys)
		dist_ok += BT.distance(a, b) == bfs(a)[b]
	iso_ok = 0
	Pw = 4 * R + 16
	for _ in range(100):
		M = BT.random_matrix(rng, p)
		a, b = rng.choice(keys), rng.choice(keys)
		iso_ok += BT.distance(BT.act(M, a, Pw), BT.act(M, b, Pw)) == BT.distance(a, b)
	ok = dist_ok == 100 and iso_ok == 100
	report(10, ok, f"distance = BFS on {dist_ok}/100 pairs; act isometric on {iso_ok}/100 triples", t0)
	assert dist_ok == 100
	assert iso_ok == 100
