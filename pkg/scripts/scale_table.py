"""Scale by every route, modular function and uniscalar verdict for the standard translations."""

from __future__ import annotations

import argparse
import time

from treescale import CoupledWreath, Full, Universal, cyclic_group, standard_translation
from treescale.scale import arrow_classify, modular, scale_axis, scale_branching, scale_search, uniscalar_battery


def main():
	ap = argparse.ArgumentParser(description=__doc__)
	ap.add_argument("--max-power", type=int, default=2)
	ap.add_argument("--with-full4", action="store_true", help="include Full(4), slower")
	args = ap.parse_args()

	schemes = [("Full(3)", Full(3)), ("CW(2)", CoupledWreath(2)), ("U(C3)", Universal(cyclic_group(3)))]
	if args.with_full4:
		schemes.append(("Full(4)", Full(4)))
	print(f"{'scheme':<8} {'k':>2} {'axis':>7} {'branch':>7} {'search':>7} {'t0':>3} {'Delta':>6} {'uniscalar':>9} {'arrows':<16} {'secs':>6}")
	for name, S in schemes:
		for k in range(1, args.max_power + 1):
			t = time.perf_counter()
			g = standard_translation(S) ** k
			a, b, c = scale_axis(g), scale_branching(g), scale_search(g)
			m = modular(g)
			u = uniscalar_battery(g)
			arr = arrow_classify(g)
			fmt = lambda r: f"{r.s_g}/{r.s_ginv}"
			print(
				f"{name:<8} {k:>2} {fmt(a):>7} {fmt(b):>7} {fmt(c):>7} {a.detail['t0']:>3} "
				f"{str(m.delta_global):>6} {str(u.verdict):>9} {arr.case:<16} {time.perf_counter() - t:>6.1f}"
			)


if __name__ == "__main__":
	main()
