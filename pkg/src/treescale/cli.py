"""Command-line frontend: loads group and element specs, runs one pipeline, prints a JSON report.

Exit codes: 0 success, 1 invariant violation, 2 undetermined at the given horizon, 3 parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import padic as BT
from . import tree as T
from .axis_tree import BallTooSmall, build_axis_tree, sigma_table, to_dot
from .dynamics import (
	axis_of,
	axis_subspace,
	classify,
	contraction_geometric,
	contraction_space_check,
	nub_approx,
	parabolic_detail,
	stabilizes_end,
	whole_tree,
)
from .errors import (
	BudgetExceeded,
	HorizonTooSmall,
	IllegalElement,
	InvariantViolation,
	MalformedElement,
	NotStabilized,
	Undetermined,
)
from .scale import check_tidy, modular, scale_axis, scale_branching, scale_search
from .scheme import (
	DEFAULT_NODE_BUDGET,
	STABILIZATION_WINDOW,
	CocycleElement,
	GroupScheme,
	element_from_json,
	enumerate_restrictions,
	fixator,
	oracle_restrictions,
	scheme_from_json,
)

FORMAT = 1
EXIT_OK, EXIT_VIOLATION, EXIT_UNDETERMINED, EXIT_PARSE = 0, 1, 2, 3


class ParseError(ValueError):
	pass


@dataclass
class RunConfig:
	group: Optional[str] = None
	elements: list[str] = field(default_factory=list)
	extra: list[str] = field(default_factory=list)
	horizon: int = 8
	radius: int = 2
	budget: int = DEFAULT_NODE_BUDGET
	output: str = "json"
	window: int = STABILIZATION_WINDOW

	def __post_init__(self):
		if self.horizon < self.radius:
			raise ParseError(f"horizon {self.horizon} below radius {self.radius}")
		if self.budget <= 0 or self.window <= 0:
			raise ParseError("budgets and windows must be positive")
		if self.output not in ("json", "dot", "text"):
			raise ParseError(f"unknown output format {self.output!r}")


# ---------------------------------------------------------------- loading


def load_json(src: str) -> Any:
	"""A JSON document from a file path, or inline if the argument starts with '{' or '['."""
	try:
		if src.lstrip().startswith(("{", "[")):
			return json.loads(src)
		return json.loads(Path(src).read_text())
	except (OSError, json.JSONDecodeError) as exc:
		raise ParseError(f"cannot read {src!r}: {exc}") from exc


def load_scheme(src: Optional[str]) -> GroupScheme:
	if src is None:
		raise ParseError("--group is required")
	try:
		return scheme_from_json(load_json(src))
	except (KeyError, TypeError, ValueError) as exc:
		raise ParseError(f"bad group spec: {exc}") from exc


def load_element(S: GroupScheme, src: str) -> CocycleElement:
	try:
		return element_from_json(S, load_json(src))
	except (MalformedElement, IllegalElement, ParseError):
		raise
	except (KeyError, TypeError, ValueError) as exc:
		raise ParseError(f"bad element spec: {exc}") from exc


def parse_subgroup(spec: str, g: Optional[CocycleElement]):
	"""'fix:v1,v2,...'; a token xk names the axis vertex gamma(k-1), other tokens are vertex addresses."""
	kind, _, body = spec.partition(":")
	if kind != "fix" or not body:
		raise ParseError(f"subgroup spec must look like fix:v1,v2,..., got {spec!r}")
	verts = []
	for tok in body.split(","):
		tok = tok.strip()
		if tok.startswith("x") and tok[1:].lstrip("-").isdigit():
			if g is None:
				raise ParseError("axis tokens need an element")
			verts.append(axis_of(g).vertex(int(tok[1:]) - 1))
		else:
			verts.append(parse_vertex_token(tok))
	return verts


def parse_vertex_token(tok: str):
	if tok in ("", "e", "base"):
		return T.BASE
	try:
		return T.parse_vertex(tok)
	except ValueError as exc:
		raise ParseError(f"bad vertex {tok!r}: {exc}") from exc


def parse_matrix(src: str) -> BT.Mat2:
	try:
		return BT.Mat2.of(load_json(src))
	except (ValueError, TypeError, ZeroDivisionError) as exc:
		raise ParseError(f"bad matrix {src!r}: {exc}") from exc


# ---------------------------------------------------------------- commands


def cmd_dynamics(cfg: RunConfig):
	S = load_scheme(cfg.group)
	g = load_element(S, cfg.elements[0])
	hs = [load_element(S, e) for e in cfg.extra]
	rep = classify(g)
	out = {"isometry": rep.to_json()}
	if hs and not rep.hyperbolic:
		raise ParseError("parabolic tests need a hyperbolic element")
	if hs:
		xi = rep.axis.xi_plus
		rows = []
		for h in hs:
			v = parabolic_detail(h, g)
			rows.append({
				"in_parabolic": v.value,
				"stabilizes_attracting_end": stabilizes_end(h, xi),
				"certification": "Exact",
				"detail": _plain(v),
			})
		out["parabolic"] = rows
	return out, EXIT_OK


def cmd_scale(cfg: RunConfig, method: str):
	S = load_scheme(cfg.group)
	g = load_element(S, cfg.elements[0])
	routes = {
		"axis": lambda: scale_axis(g, horizon=cfg.horizon),
		"branching": lambda: scale_branching(g),
		"search": lambda: scale_search(g),
	}
	names = list(routes) if method == "all" else [method]
	reports = [routes[n]().to_json() for n in names]
	vals = {(r["s_g"], r["s_ginv"]) for r in reports}
	if len(vals) != 1:
		raise InvariantViolation(f"scale routes disagree: {sorted(vals)}")
	s, si = vals.pop()
	out = {"s_g": s, "s_ginv": si, "routes_agree": True, "reports": reports}
	if method == "all":
		out["modular"] = modular(g).to_json()
	return out, EXIT_OK


def cmd_tidy(cfg: RunConfig, subgroup: str):
	S = load_scheme(cfg.group)
	g = load_element(S, cfg.elements[0])
	verts = parse_subgroup(subgroup, g)
	U = fixator(S, verts)
	v = check_tidy(U, g, horizon=cfg.horizon)
	out = {"subgroup": [T.format_vertex(x) for x in verts], "verdict": v.to_json(), "certification": "Exact"}
	code = EXIT_OK if None not in (v.TA, v.GTA, v.GTplus, v.GTminus) else EXIT_UNDETERMINED
	return out, code


def cmd_axis_tree(cfg: RunConfig, end: str, x0: Optional[str], m_max: Optional[int]):
	S = load_scheme(cfg.group)
	g = load_element(S, cfg.elements[0])
	tree = build_axis_tree(g, cfg.radius, end=end)
	base = parse_vertex_token(x0) if x0 is not None else tree.center
	if base not in tree.members:
		raise ParseError(f"x0 {T.format_vertex(base)!r} is not in the axis tree")
	if m_max is None:
		m_max = min(tree.axis.length, cfg.radius - T.dist(tree.center, base))
	table = sigma_table(tree, base, m_max)
	if cfg.output == "dot":
		return to_dot(tree, base, m_max), EXIT_OK
	out = tree.to_json()
	out["x0"] = T.format_vertex(base)
	out["sigma"] = [[m, s] for m, s in table]
	out["translation_length"] = tree.axis.length
	return out, EXIT_OK


def cmd_contract(cfg: RunConfig, space: str, stretch: int):
	S = load_scheme(cfg.group)
	g = load_element(S, cfg.elements[0])
	C = [load_element(S, e) for e in cfg.extra]
	if not C:
		raise ParseError("contract needs at least one --with element")
	Y = axis_subspace(g) if space == "axis" else whole_tree()
	verdict = contraction_geometric(C, g, Y=Y, horizon=cfg.horizon, radius=cfg.radius, stretch=stretch)
	ax = axis_of(g)
	W = fixator(S, sorted(_common_fixed_points(C, ax.vertex(0), cfg.radius, S.degree)))
	cert = f"StabilizedAt({cfg.horizon})"
	out = {
		"space": space,
		"absorbing": {"value": verdict.value, "horizon": cfg.horizon, "certification": cert, "witness": verdict.witness.to_json()},
		"per_element": [{"in_contraction": b, "horizon": cfg.horizon, "certification": cert} for b in verdict.per_element],
	}
	if W.fixed:
		rep = contraction_space_check(g, Y, W, radius=cfg.radius, horizon=cfg.horizon)
		out["space_check"] = {**rep.to_json(), "certification": cert}
		try:
			nub = nub_approx(g, W, radius=min(cfg.radius, 2), window=cfg.window)
			out["nub"] = {"restrictions": len(nub.restrictions), "certification": str(nub.certification)}
		except NotStabilized as exc:
			out["nub"] = {"restrictions": None, "certification": "Undetermined", "note": str(exc)}
	return out, EXIT_OK


def _common_fixed_points(C, center, radius, degree):
	return [v for v in T.ball(center, radius, degree) if all(h(v) == v for h in C)]


def cmd_oracle(cfg: RunConfig, fix: str, targets: Optional[str]):
	S = load_scheme(cfg.group)
	A = [T.BASE] + [parse_vertex_token(t) for t in fix.split(",") if t.strip()] if fix else [T.BASE]
	ballv = T.ball(T.BASE, cfg.radius, S.degree)
	B = [parse_vertex_token(t) for t in targets.split(",")] if targets else ballv
	for v in A + B:
		if T.dist(T.BASE, v) > cfg.radius:
			raise ParseError(f"vertex {T.format_vertex(v)!r} outside the radius-{cfg.radius} ball")
	fast = enumerate_restrictions(fixator(S, A), B, budget=cfg.budget)
	slow = oracle_restrictions(S, cfg.radius, A, B)
	agree = fast.restrictions == slow
	out = {
		"fixed": [T.format_vertex(v) for v in A],
		"targets": len(B),
		"enumerated": len(fast.restrictions),
		"oracle": len(slow),
		"agree": agree,
		"certification": str(fast.certification),
	}
	return out, EXIT_OK if agree else EXIT_VIOLATION


def cmd_bt(args, cfg: RunConfig):
	p = args.p
	if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
		raise ParseError(f"p = {p} is not prime")
	if args.bt_command == "distance":
		P = BT.precision_for(cfg.radius + 4)
		L1 = _lattice(args.lattice1, p, P)
		L2 = _lattice(args.lattice2, p, P)
		return {"p": p, "L1": L1.to_json(), "L2": L2.to_json(), "distance": BT.distance(L1, L2)}, EXIT_OK
	if args.bt_command == "fixset":
		mats = [parse_matrix(m) for m in args.matrix] or BT.w_sample(p, cfg.radius)
		F = BT.fixed_set(mats, p, cfg.radius)
		return {"p": p, "radius": cfg.radius, "size": len(F), "fixed": _classes(F)}, EXIT_OK
	if args.bt_command == "horoball":
		Z = BT.horoball_Z0(p, cfg.radius)
		return {"p": p, "radius": cfg.radius, "size": len(Z), "Z0": _classes(Z)}, EXIT_OK
	rep = BT.verify_sl2(p, cfg.radius)
	return rep.to_json() | {"certification": "Exact"}, EXIT_OK if rep.ok else EXIT_VIOLATION


def _lattice(src: str, p: int, P: int) -> BT.LatticeClass:
	M = parse_matrix(src)
	if M.det == 0:
		raise ParseError("basis matrix is singular")
	return BT.canonicalize([(M.a, M.c), (M.b, M.d)], p, P)


def _classes(S) -> list[dict]:
	return [L.to_json() for L in sorted(S, key=lambda L: (BT.distance(BT.L0(L.p), L), L.a, L.b, L.c))]


def _plain(obj):
	if hasattr(obj, "__dataclass_fields__"):
		return {k: _plain(getattr(obj, k)) for k in obj.__dataclass_fields__}
	if isinstance(obj, (list, tuple)):
		return [_plain(x) for x in obj]
	if isinstance(obj, dict):
		return {str(k): _plain(v) for k, v in obj.items()}
	if isinstance(obj, (bool, int, float, str)) or obj is None:
		return obj
	return str(obj)


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
	def error(self, message):
		self.print_usage(sys.stderr)
		self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
	ap = _Parser(prog="treescale", description=__doc__.splitlines()[0])
	sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

	def common(p, element=True, radius=2, horizon=8):
		p.add_argument("--group")
		if element:
			p.add_argument("--element", required=True)
		p.add_argument("--horizon", type=int, default=horizon)
		p.add_argument("--radius", type=int, default=radius)
		p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
		p.add_argument("--window", type=int, default=STABILIZATION_WINDOW)
		p.add_argument("--out", default="json", choices=["json", "dot", "text"])

	p = sub.add_parser("dynamics", help="classify an element; optional parabolic tests")
	common(p, horizon=16)
	p.add_argument("--with", dest="extra", action="append", default=[])

	p = sub.add_parser("scale", help="scale of an element by one or all routes")
	common(p)
	p.add_argument("--method", default="all", choices=["axis", "branching", "search", "all"])

	p = sub.add_parser("tidy-check", help="geometric tidiness criteria for a vertex fixator")
	common(p, horizon=4)
	p.add_argument("--subgroup", required=True)

	p = sub.add_parser("axis-tree", help="axis tree around the axis of an element")
	common(p, radius=4)
	p.add_argument("--end", default="plus", choices=["plus", "minus"])
	p.add_argument("--x0")
	p.add_argument("--m-max", type=int)

	p = sub.add_parser("contract", help="contraction verdicts for a set of elements")
	common(p, horizon=10)
	p.add_argument("--with", dest="extra", action="append", default=[])
	p.add_argument("--space", default="tree", choices=["tree", "axis"])
	p.add_argument("--stretch", type=int, default=4)

	p = sub.add_parser("oracle", help="fast enumeration against brute force on a ball")
	common(p, element=False, radius=2, horizon=2)
	p.add_argument("--fix", default="")
	p.add_argument("--targets")

	p = sub.add_parser("bt", help="Bruhat-Tits tree of GL2(Q_p)")
	bsub = p.add_subparsers(dest="bt_command", required=True, parser_class=_Parser)
	for name in ("distance", "fixset", "horoball", "verify-sl2"):
		q = bsub.add_parser(name)
		q.add_argument("--p", type=int, required=True)
		q.add_argument("--radius", type=int, default=3)
		if name == "distance":
			q.add_argument("--lattice1", required=True, help="basis columns as a 2x2 JSON matrix")
			q.add_argument("--lattice2", required=True)
		if name == "fixset":
			q.add_argument("--matrix", action="append", default=[])
	return ap


def config_from_args(args) -> RunConfig:
	radius = getattr(args, "radius", 2)
	return RunConfig(
		group=getattr(args, "group", None),
		elements=[args.element] if getattr(args, "element", None) else [],
		extra=list(getattr(args, "extra", []) or []),
		horizon=getattr(args, "horizon", radius),
		radius=radius,
		budget=getattr(args, "budget", DEFAULT_NODE_BUDGET),
		output=getattr(args, "out", "json"),
		window=getattr(args, "window", STABILIZATION_WINDOW),
	)


def run(command: str, cfg: RunConfig, args=None) -> tuple[int, Any]:
	"""Dispatch one command; returns the exit status and the report (dict, or text for DOT)."""
	try:
		if command == "dynamics":
			report, code = cmd_dynamics(cfg)
		elif command == "scale":
			report, code = cmd_scale(cfg, args.method if args else "all")
		elif command == "tidy-check":
			report, code = cmd_tidy(cfg, args.subgroup)
		elif command == "axis-tree":
			report, code = cmd_axis_tree(cfg, args.end, args.x0, args.m_max)
		elif command == "contract":
			report, code = cmd_contract(cfg, args.space, args.stretch)
		elif command == "oracle":
			report, code = cmd_oracle(cfg, args.fix, args.targets)
		elif command == "bt":
			report, code = cmd_bt(args, cfg)
		else:
			raise ParseError(f"unknown command {command!r}")
	except InvariantViolation as exc:
		return EXIT_VIOLATION, _error(command, "invariant_violation", exc)
	except (Undetermined, NotStabilized, HorizonTooSmall, BallTooSmall, BudgetExceeded, BT.PrecisionError) as exc:
		return EXIT_UNDETERMINED, _error(command, "undetermined", exc)
	except (ParseError, MalformedElement, IllegalElement) as exc:
		return EXIT_PARSE, _error(command, "parse_error", exc)
	except ValueError as exc:
		# semantic input errors, e.g. a bounded element where an axis is needed
		return EXIT_PARSE, _error(command, "input_error", exc)
	if isinstance(report, str):
		return code, report
	return code, {"format": FORMAT, "command": command, **report}


def _error(command: str, status: str, exc: Exception) -> dict:
	return {"format": FORMAT, "command": command, "status": status, "message": str(exc)}


def render(report: Any, output: str = "json") -> str:
	if isinstance(report, str):
		return report
	if output == "text":
		return "\n".join(f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(report.items())) + "\n"
	return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv: Optional[list[str]] = None) -> int:
	args = build_parser().parse_args(argv)
	try:
		cfg = config_from_args(args)
	except ParseError as exc:
		sys.stdout.write(render(_error(args.command, "parse_error", exc)))
		return EXIT_PARSE
	code, report = run(args.command, cfg, args)
	sys.stdout.write(render(report, cfg.output if not isinstance(report, dict) or "status" not in report else "json"))
	return code


if __name__ == "__main__":
	sys.exit(main())
