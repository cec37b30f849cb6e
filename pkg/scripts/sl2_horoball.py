"""Fixed points of the upper unipotent group in the Bruhat-Tits tree against the horoball."""

from __future__ import annotations

import argparse
import time

from treescale import padic as BT


def main():
	ap = argparse.ArgumentParser(description=__doc__)
	ap.add_argument("--cases", default="2:5,3:4,5:3,2:6,7:2")
	args = ap.parse_args()
	print(f"{'p':>3} {'R':>3} {'ball':>6} {'fixed':>6} {'Z0':>5} {'equal':>6} {'nested':>7} {'covers':>7} {'secs':>6}")
	for case in args.cases.split(","):
		p, R = map(int, case.split(":"))
		t = time.perf_counter()
		r = BT.verify_sl2(p, R)
		print(
			f"{p:>3} {R:>3} {r.ball_size:>6} {r.fixed_size:>6} {r.horoball_size:>5} "
			f"{str(r.fixed_equals_horoball):>6} {str(r.nested):>7} {str(r.covers):>7} {time.perf_counter() - t:>6.2f}"
		)


if __name__ == "__main__":
	main()
