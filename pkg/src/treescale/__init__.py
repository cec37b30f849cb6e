"""Scale, tidy subgroups and contraction for groups acting on regular trees."""

from .axis_tree import AxisTree, branching_sigma, build_axis_tree, busemann_beta, to_dot
from .dynamics import (
	Axis,
	IsometryReport,
	Subspace,
	axis_of,
	axis_subspace,
	classify,
	contraction_geometric,
	contraction_space_check,
	end_shift,
	fixed_subspace,
	in_contraction,
	in_parabolic,
	is_absorbing,
	nub_approx,
	stabilizes_end,
	whole_tree,
)
from .errors import InvariantViolation, Undetermined
from .permgrp import Perm, PermGroup, cyclic_group, symmetric_group, wreath_sym_cyclic
from .scale import (
	ScaleReport,
	TidyVerdict,
	arrow_classify,
	check_tidy,
	modular,
	scale_axis,
	scale_branching,
	scale_search,
	tidy_structure,
	uniscalar_battery,
)
from .scheme import (
	CocycleElement,
	CoupledWreath,
	FixatorSpec,
	Full,
	GroupScheme,
	RayMarker,
	Universal,
	builtin_element,
	enumerate_restrictions,
	fixator,
	index,
	local_perturbation,
	oracle_ball_group,
	standard_translation,
)
from .tree import End, Midpoint, TreeParams

__all__ = [
	"Axis", "AxisTree", "CocycleElement", "CoupledWreath", "End", "FixatorSpec", "Full", "GroupScheme",
	"InvariantViolation", "IsometryReport", "Midpoint", "Perm", "PermGroup", "RayMarker", "ScaleReport",
	"Subspace", "TidyVerdict", "TreeParams", "Undetermined", "Universal", "arrow_classify", "axis_of",
	"axis_subspace", "branching_sigma", "build_axis_tree", "builtin_element", "busemann_beta",
	"check_tidy", "classify", "contraction_geometric", "contraction_space_check", "cyclic_group",
	"end_shift", "enumerate_restrictions", "fixator", "fixed_subspace", "in_contraction", "in_parabolic",
	"index", "is_absorbing", "local_perturbation", "modular", "nub_approx", "oracle_ball_group",
	"scale_axis", "scale_branching", "scale_search", "stabilizes_end", "standard_translation",
	"symmetric_group", "tidy_structure", "to_dot", "uniscalar_battery", "whole_tree", "wreath_sym_cyclic",
]
