"""Scale by three routes, tidiness criteria, modular function and the uniscalar battery."""

from __future__ import annotations

from fractions import Fraction

import pytest

from treescale import tree as T
from treescale.dynamics import axis_of
from treescale.permgrp import Perm
from treescale.scale import (
	arrow_classify,
	check_tidy,
	convex_subsets,
	displacement_index,
	modular,
	scale_axis,
	scale_branching,
	scale_search,
	tidy_neighbourhood_check,
	tidy_structure,
	uniscalar_battery,
)
from treescale.scheme import (
	EXACT,
	fixator,
	identity,
	local_perturbation,
	oracle_restrictions,
	standard_translation,
)


def oracle_displacement(S, A, g):
	"""|U : U n g^-1 U g| by brute force on a ball around A[0]; equals |gUg^-1 : gUg^-1 n U|."""
	ginv = g.inverse()
	B = [ginv(a) for a in A]
	c = A[0]
	r = max(T.dist(c, v) for v in list(A) + B)
	return len(oracle_restrictions(S, r, A, B, center=c))


# (scheme, power) -> (s(g), s(g^-1), first certified segment length t0), frozen after the oracle checks below
SCALES = {
	("Full(3)", 1): (2, 2, 1),
	("Full(3)", 2): (4, 4, 2),
	("CW(2)", 1): (1, 1, 2),
	("CW(2)", 2): (1, 1, 2),
	("U(C3)", 1): (1, 1, 1),
	("U(C3)", 2): (1, 1, 2),
}


@pytest.mark.parametrize("name,k", sorted(SCALES))
def test_scale_axis_frozen(schemes, name, k):
	g = standard_translation(schemes[name]) ** k
	rep = scale_axis(g)
	s, si, t0 = SCALES[(name, k)]
	assert (rep.s_g, rep.s_ginv, rep.detail["t0"]) == (s, si, t0)
	assert rep.certification == EXACT
	ax = axis_of(g)
	A = ax.window(0, t0)
	assert displacement_index(fixator(g.scheme, A), g) == oracle_displacement(g.scheme, A, g) == s


@pytest.mark.parametrize("k", [1, 2])
def test_full_scale_closed_form(full3, k):
	"""Full(d): the scale of a translation of length l is (d-1)^l."""
	g = standard_translation(full3) ** k
	assert scale_axis(g).s_g == 2 ** k


@pytest.mark.parametrize("name,k", [("Full(3)", 1), ("Full(3)", 2), ("CW(2)", 1), ("U(C3)", 1), ("U(C3)", 2)])
def test_branching_agrees(schemes, name, k):
	g = standard_translation(schemes[name]) ** k
	rep = scale_branching(g)
	assert (rep.s_g, rep.s_ginv) == SCALES[(name, k)][:2]


@pytest.mark.parametrize("name", ["Full(3)", "U(C3)"])
def test_search_agrees(schemes, name):
	g = standard_translation(schemes[name])
	rep = scale_search(g)
	assert (rep.s_g, rep.s_ginv) == SCALES[(name, 1)][:2]
	assert str(rep.certification) == "StabilizedAt(2)"


def test_search_never_below_tidy(full3):
	g = standard_translation(full3)
	ax = axis_of(g)
	for A in convex_subsets(ax.vertex(0), 1, 3):
		assert displacement_index(fixator(full3, A), g) >= 2


def test_bounded_elements_are_uniscalar(full3, cw2):
	"""Bounded elements have scale 1 both ways."""
	for g in (identity(full3), local_perturbation(full3, (0,), Perm((0, 2, 1))), identity(cw2)):
		for route in (scale_axis, scale_branching, scale_search):
			rep = route(g)
			assert (rep.s_g, rep.s_ginv) == (1, 1)
		assert modular(g).delta_global == 1


def test_small_tidy_fails_gta(cw2):
	g = standard_translation(cw2)
	ax = axis_of(g)
	v = check_tidy(fixator(cw2, ax.window(0, 1)), g)
	assert v.GTA is False and v.minimizing is False
	# the pair orbit is smaller than the product of the two ray orbits
	lv = v.witness["levels"][0]
	assert lv["orbit_pair"] < lv["orbit_plus"] * lv["orbit_minus"]
	w = check_tidy(fixator(cw2, ax.window(0, 2)), g)
	assert w.minimizing is True and w.TA is True


def test_tidy_full3(full3, std3):
	ax = axis_of(std3)
	v = check_tidy(fixator(full3, ax.window(0, 1)), std3)
	assert v.minimizing and v.TA
	# a single vertex off the axis is not tidy above
	off = (1,)
	assert not ax.contains(off)
	w = check_tidy(fixator(full3, [off]), std3)
	assert w.minimizing is False


@pytest.mark.parametrize("name,k", [("Full(3)", 1), ("Full(3)", 2), ("CW(2)", 1), ("U(C3)", 1)])
def test_modular_identity(schemes, name, k):
	g = standard_translation(schemes[name]) ** k
	m = modular(g)
	s, si, _ = SCALES[(name, k)]
	assert m.delta_global == Fraction(s, si) == m.delta_direct
	# in the stabiliser of the attracting end the modular function is the scale
	assert m.delta_end == s


@pytest.mark.parametrize("name,expected", [("Full(3)", False), ("CW(2)", True), ("U(C3)", True)])
def test_uniscalar_battery(schemes, name, expected):
	rep = uniscalar_battery(standard_translation(schemes[name]))
	assert rep.verdict is expected
	assert {f.value for f in rep.flags.values()} == {expected}
	assert len(rep.flags) == 7


@pytest.mark.parametrize("name,case", [("Full(3)", "no_arrows"), ("CW(2)", "uniscalar_pair"), ("U(C3)", "uniscalar_pair")])
def test_arrows(schemes, name, case):
	rep = arrow_classify(standard_translation(schemes[name]))
	assert rep.case == case
	if case == "uniscalar_pair":
		assert rep.stabilisers_equal


@pytest.mark.parametrize("name,t", [("Full(3)", 1), ("CW(2)", 2)])
def test_tidy_neighbourhood(schemes, name, t):
	g = standard_translation(schemes[name])
	r = tidy_neighbourhood_check(fixator(g.scheme, axis_of(g).window(0, t)), g)
	assert r is not None and r <= 2


@pytest.mark.parametrize("name,t,radius", [("Full(3)", 1, 2), ("CW(2)", 2, 1), ("U(C3)", 1, 2)])
def test_tidy_structure(schemes, name, t, radius):
	g = standard_translation(schemes[name])
	U = fixator(g.scheme, axis_of(g).window(0, t))
	ts = tidy_structure(U, g, radius=radius)
	assert ts.ok


def test_report_json(std3):
	d = scale_axis(std3).to_json()
	assert d["s_g"] == 2 and d["certification"] == "Exact" and d["Delta"] == "1"


def test_search_bound_three(full3, std3):
	assert scale_search(std3, bound=3).s_g == 2


@pytest.mark.parametrize("t", [1, 2, 3])
def test_full_segments_minimizing(full3, std3, t):
	ax = axis_of(std3)
	assert check_tidy(fixator(full3, [ax.vertex(0), ax.vertex(t)]), std3).minimizing


@pytest.mark.parametrize("name,t", [("Full(3)", 0), ("Full(3)", 1), ("CW(2)", 1), ("CW(2)", 2), ("U(C3)", 1)])
def test_minimizing_symmetric_under_inverse(schemes, name, t):
	g = standard_translation(schemes[name])
	U = fixator(g.scheme, axis_of(g).window(0, t))
	assert check_tidy(U, g).minimizing == check_tidy(U, g.inverse()).minimizing


def test_tidy_neighbourhood_single_vertex(full3, std3):
	U = fixator(full3, [axis_of(std3).vertex(0)])
	r = tidy_neighbourhood_check(U, std3)
	assert r is not None
	assert tidy_neighbourhood_check(U, std3 ** 2) == r


def test_battery_skips_bounded(full3):
	rep = uniscalar_battery(identity(full3))
	assert rep.verdict is None and rep.flags == {}


@pytest.mark.parametrize("name", ["Full(3)", "CW(2)"])
def test_arrows_symmetric(schemes, name):
	g = standard_translation(schemes[name])
	assert arrow_classify(g).case == arrow_classify(g.inverse()).case
