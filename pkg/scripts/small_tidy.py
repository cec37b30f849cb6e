"""Coupled wreath with n^2 colours: fixators of axis segments, which are minimizing and why not."""

from __future__ import annotations

import argparse
import json

from treescale import CoupledWreath, fixator, standard_translation
from treescale.dynamics import axis_of
from treescale.scale import check_tidy, displacement_index


def main():
	ap = argparse.ArgumentParser(description=__doc__)
	ap.add_argument("--n", type=int, default=2)
	ap.add_argument("--max-t", type=int, default=4)
	ap.add_argument("--horizon", type=int, default=4)
	args = ap.parse_args()

	S = CoupledWreath(args.n)
	g = standard_translation(S)
	ax = axis_of(g)
	for t in range(1, args.max_t + 1):
		U = fixator(S, ax.window(0, t))
		v = check_tidy(U, g, args.horizon)
		lv = v.witness["levels"]
		print(json.dumps({
			"t": t,
			"index": displacement_index(U, g),
			"GTA": v.GTA,
			"GT+": v.GTplus,
			"GT-": v.GTminus,
			"TA": v.TA,
			"orbits": [(x["orbit_plus"], x["orbit_minus"], x["orbit_pair"]) for x in lv],
		}))


if __name__ == "__main__":
	main()
