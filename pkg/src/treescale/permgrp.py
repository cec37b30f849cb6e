"""Small permutation groups by full enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_BOUND = 10**6


class GroupTooLarge(Exception):
	pass


@dataclass(frozen=True, order=True)
class Perm:
	"""Permutation of {0..m-1} stored as its image array. p * q applies q first."""
	img: tuple[int, ...]

	def __post_init__(self):
		img = tuple(self.img)
		if sorted(img) != list(range(len(img))):
			raise ValueError(f"not a permutation: {img}")
		object.__setattr__(self, "img", img)

	@classmethod
	def identity(cls, m: int) -> "Perm":
		return cls(tuple(range(m)))

	@classmethod
	def from_cycles(cls, m: int, *cycles: Sequence[int]) -> "Perm":
		img = list(range(m))
		for cyc in cycles:
			for i, x in enumerate(cyc):
				img[x] = cyc[(i + 1) % len(cyc)]
		return cls(tuple(img))

	@property
	def degree(self) -> int:
		return len(self.img)

	def __call__(self, x: int) -> int:
		return self.img[x]

	def __mul__(self, other: "Perm") -> "Perm":
		return Perm(tuple(self.img[i] for i in other.img))

	def inverse(self) -> "Perm":
		inv = [0] * len(self.img)
		for i, x in enumerate(self.img):
			inv[x] = i
		return Perm(tuple(inv))

	def is_identity(self) -> bool:
		return all(i == x for i, x in enumerate(self.img))

	def order(self) -> int:
		k, p = 1, self
		while not p.is_identity():
			p = p * self
			k += 1
		return k

	def to_list(self) -> list[int]:
		return list(self.img)

	def __repr__(self):
		return f"Perm({list(self.img)})"


@dataclass(frozen=True)
class PermGroup:
	domain: int
	generators: tuple[Perm, ...]
	bound: int = DEFAULT_BOUND
	elements: tuple[Perm, ...] = field(init=False, compare=False, repr=False)

	def __post_init__(self):
		gens = tuple(self.generators)
		for g in gens:
			if g.degree != self.domain:
				raise ValueError("generator on the wrong domain")
		object.__setattr__(self, "generators", gens)
		object.__setattr__(self, "elements", _closure(self.domain, gens, self.bound))

	@classmethod
	def from_elements(cls, domain: int, elems: Iterable[Perm]) -> "PermGroup":
		return cls(domain, tuple(sorted(set(elems))))

	def __len__(self) -> int:
		return len(self.elements)

	def __iter__(self):
		return iter(self.elements)

	def __contains__(self, p: Perm) -> bool:
		return p in self._set

	@property
	def _set(self) -> frozenset[Perm]:
		s = self.__dict__.get("_eset")
		if s is None:
			s = frozenset(self.elements)
			object.__setattr__(self, "_eset", s)
		return s

	def __eq__(self, other) -> bool:
		return isinstance(other, PermGroup) and self.domain == other.domain and self.elements == other.elements

	def __hash__(self) -> int:
		return hash((self.domain, self.elements))

	def orbit(self, x: int) -> frozenset[int]:
		return frozenset(g(x) for g in self.elements)

	def is_transitive(self) -> bool:
		return len(self.orbit(0)) == self.domain

	def to_json(self) -> dict:
		return {"domain": self.domain, "generators": [g.to_list() for g in self.generators]}

	@classmethod
	def from_json(cls, d: dict) -> "PermGroup":
		m = int(d["domain"])
		return cls(m, tuple(Perm(tuple(g)) for g in d["generators"]))


def _closure(m: int, gens: tuple[Perm, ...], bound: int) -> tuple[Perm, ...]:
	e = Perm.identity(m)
	seen = {e}
	frontier = [e]
	while frontier:
		nxt = []
		for x in frontier:
			for g in gens:
				y = g * x
				if y not in seen:
					seen.add(y)
					nxt.append(y)
					if len(seen) > bound:
						raise GroupTooLarge(f"group exceeds bound {bound}")
		frontier = nxt
	return tuple(sorted(seen))


def enumerate_group(G: PermGroup) -> frozenset[Perm]:
	return frozenset(G.elements)


def symmetric_group(m: int) -> PermGroup:
	if m == 1:
		return PermGroup(1, ())
	gens = [Perm.from_cycles(m, (0, 1))]
	if m > 2:
		gens.append(Perm.from_cycles(m, tuple(range(m))))
	return PermGroup(m, tuple(gens))


def cyclic_group(m: int) -> PermGroup:
	return PermGroup(m, (Perm.from_cycles(m, tuple(range(m))),))


def subgroup(G: PermGroup, elems: Iterable[Perm]) -> PermGroup:
	return PermGroup.from_elements(G.domain, elems)


def point_stabilizer(G: PermGroup, x: int) -> PermGroup:
	return subgroup(G, (g for g in G if g(x) == x))


def setwise_stabilizer(G: PermGroup, S: Iterable[int]) -> PermGroup:
	S = frozenset(S)
	return subgroup(G, (g for g in G if frozenset(g(x) for x in S) == S))


def in_coset(g: Perm, h: Perm, B: PermGroup) -> bool:
	"""True iff g lies in the left coset hB."""
	return h.inverse() * g in B


def wreath_point(i: int, j: int, n: int) -> int:
	"""Index of the point (i, j) of Z/n x Z/n; column j occupies a contiguous block."""
	return (i % n) + n * (j % n)


def wreath_coords(x: int, n: int) -> tuple[int, int]:
	return x % n, x // n


def column_block(n: int, j: int) -> PermGroup:
	"""Sym(n) acting naturally on column j of Z/n x Z/n and trivially elsewhere."""
	m = n * n
	col = [wreath_point(i, j, n) for i in range(n)]
	gens = []
	for a, b in zip(col, col[1:]):
		gens.append(Perm.from_cycles(m, (a, b)))
	return PermGroup(m, tuple(gens))


def column_shift(n: int) -> Perm:
	return Perm(tuple(wreath_point(i, j + 1, n) for j in range(n) for i in range(n)))


def wreath_sym_cyclic(n: int) -> PermGroup:
	"""Sym(n) wr C_n on Z/n x Z/n: block j permutes column j, the top shifts columns."""
	if n < 2:
		raise ValueError("wreath product needs n >= 2")
	gens = []
	for j in range(n):
		gens.extend(column_block(n, j).generators)
	gens.append(column_shift(n))
	return PermGroup(n * n, tuple(gens))


def all_perms(m: int) -> list[Perm]:
	return [Perm(p) for p in itertools.permutations(range(m))]
