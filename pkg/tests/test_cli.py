"""Command-line frontend: reports, determinism and exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from treescale import cli
from treescale.errors import InvariantViolation

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
	code = cli.main([str(a) for a in argv])
	out = capsys.readouterr().out
	return code, out


def data(name):
	return str(DATA / name)


def test_scale_all_coupled(capsys):
	code, out = run(capsys, "scale", "--group", data("coupled2.json"), "--element", data("standard.json"), "--method", "all")
	rep = json.loads(out)
	assert code == 0
	assert rep["format"] == 1
	assert (rep["s_g"], rep["s_ginv"]) == (1, 1)
	assert rep["routes_agree"]
	assert [r["route"] for r in rep["reports"]] == ["axis", "branching", "search"]
	assert all("certification" in r for r in rep["reports"])


def test_tidy_check_small_tidy(capsys):
	code, out = run(
		capsys, "tidy-check", "--group", data("coupled2.json"), "--element", data("standard.json"), "--subgroup", "fix:x1,x2"
	)
	assert code == 0
	assert json.loads(out)["verdict"]["GTA"] is False


def test_verify_sl2(capsys):
	code, out = run(capsys, "bt", "verify-sl2", "--p", 2, "--radius", 5)
	assert code == 0 and json.loads(out)["ok"] is True


def test_bt_distance_and_sets(capsys):
	code, out = run(capsys, "bt", "distance", "--p", 2, "--lattice1", '[["1","0"],["0","1"]]', "--lattice2", '[["1/2^3","0"],["0","4"]]')
	assert code == 0 and json.loads(out)["distance"] == 5
	code, out = run(capsys, "bt", "horoball", "--p", 2, "--radius", 3)
	hor = json.loads(out)
	code, out = run(capsys, "bt", "fixset", "--p", 2, "--radius", 3)
	fix = json.loads(out)
	assert fix["fixed"] == hor["Z0"]
	code, out = run(capsys, "bt", "fixset", "--p", 2, "--radius", 2, "--matrix", '[["2","0"],["0","1"]]')
	assert json.loads(out)["size"] == 0


def test_dynamics_report(capsys):
	code, out = run(
		capsys, "dynamics", "--group", data("full3.json"), "--element", data("standard.json"), "--with", data("perturb0.json")
	)
	rep = json.loads(out)
	assert code == 0
	assert rep["isometry"]["kind"] == "Hyperbolic"
	assert rep["isometry"]["axis"]["xi_plus"] == "|0.1.2"
	assert rep["parabolic"][0]["in_parabolic"] is False


def test_axis_tree_outputs(capsys):
	args = ["axis-tree", "--group", data("full4.json"), "--element", data("standard_sq.json"), "--radius", 4]
	code, out = run(capsys, *args)
	assert code == 0 and json.loads(out)["sigma"] == [[0, 1], [1, 3], [2, 9]]
	code, out = run(capsys, *args, "--out", "dot")
	assert code == 0 and out.startswith("graph axis_tree {")


def test_contract_report(capsys):
	code, out = run(capsys, "contract", "--group", data("full3.json"), "--element", data("standard.json"), "--with", data("perturb0.json"))
	rep = json.loads(out)
	assert code == 0
	assert rep["absorbing"]["value"] is True
	assert rep["per_element"][0]["in_contraction"] is True
	assert rep["absorbing"]["certification"] == "StabilizedAt(10)"


def test_oracle_command(capsys):
	code, out = run(capsys, "oracle", "--group", data("coupled2.json"), "--radius", 2, "--fix", "0")
	rep = json.loads(out)
	assert code == 0 and rep["agree"] and rep["enumerated"] == rep["oracle"]


def test_reports_are_byte_identical(capsys):
	args = ["scale", "--group", data("full3.json"), "--element", data("standard_sq.json"), "--method", "axis"]
	_, a = run(capsys, *args)
	_, b = run(capsys, *args)
	assert a == b


@pytest.mark.parametrize(
	"argv",
	[
		["scale", "--group", "missing.json", "--element", "{}"],
		["scale", "--group", '{"scheme": "full", "degree": 3}', "--element", '{"base_image": "0.0", "depth": 0, "sigma": {}}'],
		["scale", "--group", '{"scheme": "full", "degree": 2}', "--element", '{"builtin": "identity"}'],
		["tidy-check", "--group", '{"scheme": "full", "degree": 3}', "--element", '{"builtin": "standard_translation"}', "--subgroup", "all"],
		["scale", "--group", '{"scheme": "full", "degree": 3}'],
		["scale", "--group", '{"scheme": "full", "degree": 3}', "--element", '{"builtin": "identity"}', "--radius", "5", "--horizon", "2"],
		["bt", "horoball", "--p", "4"],
	],
)
def test_parse_errors_exit_3(capsys, argv):
	try:
		code, _ = run(capsys, *argv)
	except SystemExit as exc:
		# argparse usage errors
		code = exc.code
	assert code == 3


def test_undetermined_exit_2(capsys):
	code, out = run(
		capsys, "scale", "--group", data("coupled2.json"), "--element", data("standard.json"),
		"--method", "axis", "--radius", 1, "--horizon", 1,
	)
	assert code == 2 and json.loads(out)["status"] == "undetermined"
	code, out = run(
		capsys, "axis-tree", "--group", data("full3.json"), "--element", data("standard.json"), "--radius", 2, "--m-max", 5
	)
	assert code == 2


def test_invariant_violation_exit_1(monkeypatch, capsys):
	def broken(*a, **k):
		raise InvariantViolation("routes disagree")

	monkeypatch.setattr(cli, "scale_branching", broken)
	code, out = run(capsys, "scale", "--group", data("full3.json"), "--element", data("standard.json"), "--method", "branching")
	assert code == 1 and json.loads(out)["status"] == "invariant_violation"


def test_run_config_validation():
	with pytest.raises(cli.ParseError):
		cli.RunConfig(horizon=1, radius=3)
	with pytest.raises(cli.ParseError):
		cli.RunConfig(budget=0)
