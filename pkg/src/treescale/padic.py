"""Bruhat-Tits tree of GL2(Q_p) at bounded precision.

Vertices are scalar classes of lattices, each stored by the Hermite basis of
its unique representative L with L <= L0 and L not inside p L0.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence


class PrecisionError(ArithmeticError):
	pass


def nu(x, p: int) -> Optional[int]:
	"""p-adic valuation of a nonzero rational; None for zero."""
	x = Fraction(x)
	if x == 0:
		return None
	v = 0
	n, d = x.numerator, x.denominator
	while n % p == 0:
		n //= p
		v += 1
	while d % p == 0:
		d //= p
		v -= 1
	return v


@dataclass(frozen=True)
class PAdicInt:
	"""Element of Z_p known modulo p^P."""
	p: int
	P: int
	value: int

	def __post_init__(self):
		object.__setattr__(self, "value", self.value % self.p ** self.P)

	@classmethod
	def of(cls, x, p: int, P: int) -> "PAdicInt":
		x = Fraction(x)
		if nu(x, p) is not None and nu(x, p) < 0:
			raise ValueError(f"{x} is not a p-adic integer")
		m = p ** P
		return cls(p, P, x.numerator * pow(x.denominator, -1, m))

	def _other(self, o) -> int:
		return o.value if isinstance(o, PAdicInt) else int(o)

	def __add__(self, o):
		return PAdicInt(self.p, self.P, self.value + self._other(o))

	def __sub__(self, o):
		return PAdicInt(self.p, self.P, self.value - self._other(o))

	def __mul__(self, o):
		return PAdicInt(self.p, self.P, self.value * self._other(o))

	def __neg__(self):
		return PAdicInt(self.p, self.P, -self.value)

	def is_zero(self) -> bool:
		return self.value == 0

	def valuation(self) -> int:
		"""Valuation, or P when the residue vanishes (unknown at this precision)."""
		if self.value == 0:
			return self.P
		v, x = 0, self.value
		while x % self.p == 0:
			x //= self.p
			v += 1
		return v

	def unit_part_inverse(self) -> "PAdicInt":
		v = self.valuation()
		if v >= self.P:
			raise PrecisionError("no unit part at this precision")
		u = self.value // self.p ** v
		return PAdicInt(self.p, self.P, pow(u, -1, self.p ** self.P))


# ---------------------------------------------------------------- matrices


def parse_entry(s) -> Fraction:
	"""'num', 'num/p^k' or 'num/den' as an exact rational."""
	if isinstance(s, (int, Fraction)):
		return Fraction(s)
	s = str(s).strip()
	if "/" in s:
		num, den = s.split("/")
		if "^" in den:
			b, e = den.split("^")
			return Fraction(int(num), int(b) ** int(e))
		return Fraction(int(num), int(den))
	return Fraction(int(s))


@dataclass(frozen=True)
class Mat2:
	a: Fraction
	b: Fraction
	c: Fraction
	d: Fraction

	@classmethod
	def of(cls, rows: Sequence[Sequence]) -> "Mat2":
		(a, b), (c, d) = rows
		return cls(parse_entry(a), parse_entry(b), parse_entry(c), parse_entry(d))

	@property
	def det(self) -> Fraction:
		return self.a * self.d - self.b * self.c

	def __mul__(self, o: "Mat2") -> "Mat2":
		return Mat2(
			self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
			self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
		)

	def apply(self, col: tuple) -> tuple:
		x, y = col
		return (self.a * x + self.b * y, self.c * x + self.d * y)

	def adj(self) -> "Mat2":
		return Mat2(self.d, -self.b, -self.c, self.a)

	def rows(self) -> list[list[Fraction]]:
		return [[self.a, self.b], [self.c, self.d]]

	def to_json(self) -> list[list[str]]:
		return [[str(x) for x in r] for r in self.rows()]


def identity() -> Mat2:
	return Mat2(Fraction(1), Fraction(0), Fraction(0), Fraction(1))


def diag(x, y) -> Mat2:
	return Mat2(Fraction(x), Fraction(0), Fraction(0), Fraction(y))


def unipotent(a) -> Mat2:
	"""u_a = [[1, a], [0, 1]]."""
	return Mat2(Fraction(1), Fraction(a), Fraction(0), Fraction(1))


# ---------------------------------------------------------------- lattice classes


@dataclass(frozen=True, order=True)
class LatticeClass:
	"""Class with representative basis (p^a, 0), (c, p^b); 0 <= c < p^a, min(a, b, nu(c)) = 0."""
	p: int
	a: int
	b: int
	c: int

	def basis(self) -> list[tuple[int, int]]:
		return [(self.p ** self.a, 0), (self.c, self.p ** self.b)]

	def __str__(self):
		return f"[a={self.a},b={self.b},c={self.c}]"

	def to_json(self) -> dict:
		return {"a": self.a, "b": self.b, "c": self.c}


def L0(p: int) -> LatticeClass:
	return LatticeClass(p, 0, 0, 0)


def axis_lattice(p: int, i: int) -> LatticeClass:
	"""[L_i]: generated by p^i e1 and e2 for i >= 0, by e1 and p^-i e2 for i < 0."""
	return LatticeClass(p, i, 0, 0) if i >= 0 else LatticeClass(p, 0, -i, 0)


def canonicalize(columns: Iterable[tuple], p: int, P: int) -> LatticeClass:
	"""Class of the lattice spanned by the given columns (at least two, spanning Q_p^2)."""
	cols = [(Fraction(x), Fraction(y)) for x, y in columns]
	vals = [nu(x, p) for col in cols for x in col if x != 0]
	if not vals:
		raise ValueError("zero lattice")
	shift = -min(vals)
	scale = Fraction(p) ** shift
	cols = [[PAdicInt.of(x * scale, p, P), PAdicInt.of(y * scale, p, P)] for x, y in cols]
	# second row: the column of least valuation spans the row
	k = min(range(len(cols)), key=lambda i: cols[i][1].valuation())
	pivot = cols.pop(k)
	vb = pivot[1].valuation()
	if vb >= P:
		raise PrecisionError("columns do not span at this precision")
	inv = pivot[1].unit_part_inverse()
	pivot = [pivot[0] * inv, pivot[1] * inv]
	rest = []
	for x, y in cols:
		q = PAdicInt(p, P, y.value // p ** vb)
		rest.append(x - q * pivot[0])
	# first row: the rest now lives in the e1 line
	va = min(x.valuation() for x in rest)
	if va >= P - vb:
		raise PrecisionError("columns do not span at this precision")
	c = pivot[0].value % p ** va
	a, b = va, vb
	m = min(a, b, nu(c, p) if c else a)
	a, b = a - m, b - m
	c = (c // p ** m) % p ** a if a else 0
	if max(a, b) > P - 2:
		raise PrecisionError(f"valuations {a}, {b} too close to precision {P}")
	return LatticeClass(p, a, b, c)


def distance(L1: LatticeClass, L2: LatticeClass) -> int:
	"""Difference of the elementary divisor exponents of the matrix relating the two bases."""
	p = L1.p
	(x1, y1), (x2, y2) = L1.basis()
	M1 = Mat2(Fraction(x1), Fraction(x2), Fraction(y1), Fraction(y2))
	(u1, v1), (u2, v2) = L2.basis()
	M2 = Mat2(Fraction(u1), Fraction(u2), Fraction(v1), Fraction(v2))
	N = M1.adj() * M2
	entries = [e for e in (N.a, N.b, N.c, N.d) if e != 0]
	return nu(N.det, p) - 2 * min(nu(e, p) for e in entries)


def act(M: Mat2, L: LatticeClass, P: int) -> LatticeClass:
	if M.det == 0:
		raise ValueError("singular matrix")
	return canonicalize([M.apply(col) for col in L.basis()], L.p, P)


def neighbors(L: LatticeClass, P: int) -> list[LatticeClass]:
	"""The p + 1 index-p sublattices of the representative, as classes."""
	p = L.p
	(v1x, v1y), (v2x, v2y) = L.basis()
	out = []
	for t in range(p):
		out.append(canonicalize([(v1x + t * v2x, v1y + t * v2y), (p * v2x, p * v2y)], p, P))
	out.append(canonicalize([(p * v1x, p * v1y), (v2x, v2y)], p, P))
	return out


def precision_for(R: int) -> int:
	return 2 * R + 4


def ball(p: int, R: int, P: Optional[int] = None) -> dict[LatticeClass, int]:
	"""Classes within distance R of L0, with their BFS distance."""
	P = P or precision_for(R)
	start = L0(p)
	dist = {start: 0}
	q = deque([start])
	while q:
		v = q.popleft()
		if dist[v] == R:
			continue
		for w in neighbors(v, P):
			if w not in dist:
				dist[w] = dist[v] + 1
				q.append(w)
	return dist


def fixed_set(S: Sequence[Mat2], p: int, R: int, P: Optional[int] = None) -> set[LatticeClass]:
	P = P or precision_for(R)
	return {L for L in ball(p, R, P) if all(act(M, L, P) == L for M in S)}


def w_sample(p: int, R: int) -> list[Mat2]:
	"""u_a for a over residues mod p^R; acts on the R-ball exactly as all of W does."""
	return [unipotent(a) for a in range(p ** R)]


def in_horoball(L: LatticeClass) -> bool:
	"""d(L, L_-n) <= n for some n >= 0; n up to d(L, L0) + 1 decides it."""
	top = distance(L, L0(L.p)) + 1
	return any(distance(L, axis_lattice(L.p, -n)) <= n for n in range(top + 1))


def horoball_Z0(p: int, R: int, P: Optional[int] = None) -> set[LatticeClass]:
	return {L for L in ball(p, R, P) if any(distance(L, axis_lattice(p, -n)) <= n for n in range(R + 1))}


def cyclic_lattice(l1, l2, k: int, p: int, P: int) -> LatticeClass:
	"""Class of Z_p l + p^k L0."""
	pk = p ** k
	return canonicalize([(l1, l2), (pk, 0), (0, pk)], p, P)


def busemann_criterion(l1: int, l2: int, k: int, p: int) -> bool:
	"""Membership of Z_p l + p^k L0 in the horoball, read off the coordinates of l."""
	v1 = nu(l1, p) if l1 else 10 ** 9
	v2 = nu(l2, p) if l2 else 10 ** 9
	return v2 >= k or 2 * v2 >= v1 + k


@dataclass
class SL2Report:
	p: int
	radius: int
	ball_size: int
	fixed_size: int
	horoball_size: int
	fixed_equals_horoball: bool
	nested: bool
	strict: bool
	covers: bool

	@property
	def ok(self) -> bool:
		return self.fixed_equals_horoball and self.nested and self.strict and self.covers

	def to_json(self) -> dict:
		return {
			"p": self.p,
			"radius": self.radius,
			"ball": self.ball_size,
			"fixed": self.fixed_size,
			"horoball": self.horoball_size,
			"fixed_equals_horoball": self.fixed_equals_horoball,
			"Z0_inside_gZ0": self.nested,
			"strict": self.strict,
			"translates_cover_ball": self.covers,
			"ok": self.ok,
		}


def verify_sl2(p: int, R: int) -> SL2Report:
	"""Fixed set of W equals the horoball Z0 in the R-ball, Z0 inside gZ0, and translates of Z0 cover."""
	P = precision_for(R)
	B = ball(p, R, P)
	F = fixed_set(w_sample(p, R), p, R, P)
	Z = horoball_Z0(p, R, P)
	g = diag(p, 1)
	ginv = diag(Fraction(1, p), 1)
	Pw = precision_for(2 * R + 2)
	nested = all(in_horoball(act(ginv, L, Pw)) for L in Z)
	strict = any(in_horoball(act(ginv, L, Pw)) and L not in Z for L in B)

	def reached(L):
		x = L
		for _ in range(R + 1):
			if in_horoball(x):
				return True
			x = act(ginv, x, Pw)
		return False

	covers = all(reached(L) for L in B)
	return SL2Report(p, R, len(B), len(F), len(Z), F == Z, nested, strict, covers)


def random_matrix(rng: random.Random, p: int, span: int = 3) -> Mat2:
	"""Random invertible matrix with entries num/p^k, small numerators."""
	while True:
		e = [Fraction(rng.randint(-p ** 2, p ** 2), p ** rng.randint(0, span)) for _ in range(4)]
		M = Mat2(*e)
		if M.det != 0 and nu(M.det, p) is not None and abs(nu(M.det, p)) <= span:
			return M
