"""Axis tree of a length-2 translation in Full(4): DOT file plus the branching table."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from treescale import Full, standard_translation
from treescale.axis_tree import build_axis_tree, busemann_beta, sigma_table, to_dot


def main():
	ap = argparse.ArgumentParser(description=__doc__)
	ap.add_argument("--degree", type=int, default=4)
	ap.add_argument("--power", type=int, default=2)
	ap.add_argument("--radius", type=int, default=4)
	ap.add_argument("--out", default="results/axis_tree.dot")
	args = ap.parse_args()

	g = standard_translation(Full(args.degree)) ** args.power
	tree = build_axis_tree(g, args.radius)
	m_max = min(args.radius, tree.axis.length + 1)
	table = sigma_table(tree, tree.center, m_max)
	out = Path(args.out)
	out.parent.mkdir(parents=True, exist_ok=True)
	out.write_text(to_dot(tree, tree.center, m_max))
	print(json.dumps({
		"members": len(tree.members),
		"translation_length": tree.axis.length,
		"sigma": table,
		"busemann_shift_of_g": busemann_beta(g, tree),
		"dot": str(out),
	}, indent=2))


if __name__ == "__main__":
	main()
