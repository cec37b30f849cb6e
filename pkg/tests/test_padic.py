"""Lattice classes in the Bruhat-Tits tree of GL2(Q_p)."""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treescale import padic as BT

P = 40


def bfs_from(start, ballset):
	dist = {start: 0}
	q = deque([start])
	while q:
		v = q.popleft()
		for w in BT.neighbors(v, P):
			if w in ballset and w not in dist:
				dist[w] = dist[v] + 1
				q.append(w)
	return dist


@given(st.integers(-10 ** 6, 10 ** 6).filter(bool), st.integers(1, 10 ** 4))
def test_valuation_is_additive(a, b):
	for p in (2, 3, 5):
		assert BT.nu(Fraction(a) * b, p) == BT.nu(a, p) + BT.nu(b, p)


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_padic_ring_ops(x, y):
	p, prec = 3, 8
	a, b = BT.PAdicInt(p, prec, x), BT.PAdicInt(p, prec, y)
	m = p ** prec
	assert (a * b).value == x * y % m
	assert (a - b + b).value == x % m
	if x % p:
		assert (a * a.unit_part_inverse()).value == 1


def test_parse_entry():
	assert BT.parse_entry("3/2^4") == Fraction(3, 16)
	assert BT.parse_entry("-5") == -5
	assert BT.parse_entry("1/3") == Fraction(1, 3)
	M = BT.Mat2.of([["1", "1/2^3"], ["0", "1"]])
	assert M.det == 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_neighbours(p):
	for L in BT.ball(p, 2):
		nb = BT.neighbors(L, P)
		assert len(set(nb)) == p + 1
		assert all(BT.distance(L, w) == 1 for w in nb)


@pytest.mark.parametrize("p,R,size", [(2, 5, 1 + 3 * (2 ** 5 - 1)), (3, 3, 1 + 4 * (3 ** 3 - 1) // 2)])
def test_ball_size(p, R, size):
	# 1 + (p+1)(1 + p + ... + p^(R-1))
	assert len(BT.ball(p, R)) == size


@given(st.integers(0, 10 ** 6))
def test_canonical_form_is_basis_independent(seed):
	rng = random.Random(seed)
	p = rng.choice([2, 3])
	L = rng.choice(list(BT.ball(p, 3)))
	(x1, y1), (x2, y2) = L.basis()
	# unimodular change of basis, then a scalar
	while True:
		a, b, c, d = (rng.randint(-6, 6) for _ in range(4))
		if (a * d - b * c) % p:
			break
	s = Fraction(p) ** rng.randint(-2, 2)
	cols = [(s * (a * x1 + c * x2), s * (a * y1 + c * y2)), (s * (b * x1 + d * x2), s * (b * y1 + d * y2))]
	assert BT.canonicalize(cols, p, P) == L


def test_axis_shift():
	for p in (2, 3):
		g = BT.diag(p, 1)
		for i in range(-4, 5):
			assert BT.act(g, BT.axis_lattice(p, i), P) == BT.axis_lattice(p, i + 1)
			assert BT.distance(BT.axis_lattice(p, i), BT.axis_lattice(p, 0)) == abs(i)


def test_distance_matches_bfs(rng):
	p, R = 2, 4
	B = BT.ball(p, R)
	keys = list(B)
	for _ in range(30):
		a, b = rng.choice(keys), rng.choice(keys)
		assert BT.distance(a, b) == bfs_from(a, B)[b]


def test_act_is_isometric(rng):
	p = 3
	keys = list(BT.ball(p, 3))
	for _ in range(30):
		M = BT.random_matrix(rng, p)
		a, b = rng.choice(keys), rng.choice(keys)
		assert BT.distance(BT.act(M, a, P), BT.act(M, b, P)) == BT.distance(a, b)


def test_singular_matrix_rejected():
	with pytest.raises(ValueError):
		BT.act(BT.Mat2.of([[1, 2], [2, 4]]), BT.L0(2), P)


def test_low_precision_detected():
	with pytest.raises(BT.PrecisionError):
		BT.act(BT.diag(2 ** 10, 1), BT.L0(2), 6)


def test_unipotent_fixes_balls_around_the_horoball_ray():
	"""u_1 fixes the ball of radius n around [L_-n]."""
	p, R = 2, 6
	F = BT.fixed_set([BT.unipotent(1)], p, R)
	B = BT.ball(p, R)
	for n in range(R // 2 + 1):
		centre = BT.axis_lattice(p, -n)
		assert {L for L in B if BT.distance(L, centre) <= n} <= F


@given(st.integers(-200, 200), st.integers(-200, 200), st.integers(1, 5))
def test_horoball_criterion_for_cyclic_lattices(l1, l2, k):
	p = 2
	if l1 == 0 and l2 == 0:
		return
	L = BT.cyclic_lattice(l1, l2, k, p, P)
	assert BT.busemann_criterion(l1, l2, k, p) == BT.in_horoball(L)


@pytest.mark.parametrize("p,R,z0", [(2, 5, 14), (3, 4, 17), (5, 3, 12)])
def test_verify_sl2(p, R, z0):
	rep = BT.verify_sl2(p, R)
	assert rep.ok
	assert rep.horoball_size == rep.fixed_size == z0


def test_canonical_examples():
	p = 3
	assert BT.canonicalize([(1, 0), (0, 1)], p, P) == BT.L0(p)
	assert BT.canonicalize([(p, 0), (0, p)], p, P) == BT.L0(p)
	assert BT.canonicalize([(0, 1), (p, 0)], p, P) == BT.axis_lattice(p, 1) == BT.act(BT.diag(p, 1), BT.L0(p), P)
	for a in range(-4, 5):
		assert BT.act(BT.unipotent(a), BT.L0(p), P) == BT.L0(p)
	L = BT.axis_lattice(p, 2)
	assert BT.act(BT.diag(p, p), L, P) == L


def test_fixed_set_examples():
	p, R = 2, 3
	B = BT.ball(p, R)
	assert BT.fixed_set([BT.diag(p, 1)], p, R) == set()
	assert BT.fixed_set([BT.identity()], p, R) == set(B)
	Z = BT.horoball_Z0(p, R)
	assert BT.L0(p) in Z
	assert BT.axis_lattice(p, 1) not in Z
	assert BT.verify_sl2(p, R).strict
