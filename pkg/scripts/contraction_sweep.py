"""Absorbing-set verdicts against per-element contraction for single-vertex perturbations."""

from __future__ import annotations

import argparse

from treescale import Full, local_perturbation, standard_translation
from treescale import tree as T
from treescale.dynamics import axis_subspace, contraction_geometric, whole_tree


def main():
	ap = argparse.ArgumentParser(description=__doc__)
	ap.add_argument("--degree", type=int, default=3)
	ap.add_argument("--radius", type=int, default=2)
	ap.add_argument("--horizon", type=int, default=10)
	args = ap.parse_args()
	S = Full(args.degree)
	g = standard_translation(S)
	print(f"{'vertex':<8} {'perm':<14} {'tree':>6} {'axis':>6} {'onset':>6}")
	for v in T.ball(T.BASE, args.radius, S.degree)[1:]:
		for p in S.L:
			if p.is_identity():
				continue
			try:
				u = local_perturbation(S, v, p)
			except ValueError:
				continue
			a = contraction_geometric([u], g, Y=whole_tree(), horizon=args.horizon)
			b = contraction_geometric([u], g, Y=axis_subspace(g), horizon=args.horizon)
			onset = next((t for t, r in enumerate(a.witness.radii) if r > 0), None)
			print(f"{T.format_vertex(v):<8} {str(p.to_list()):<14} {str(a.value):>6} {str(b.value):>6} {str(onset):>6}")


if __name__ == "__main__":
	main()
