"""Exceptions shared across modules; the CLI maps them to exit codes."""

from .scheme import BudgetExceeded, HorizonTooSmall, IllegalElement, MalformedElement, NotStabilized


class InvariantViolation(AssertionError):
	"""Two routes that must agree by a theorem under test disagree."""


class Undetermined(RuntimeError):
	"""The horizon was not enough to certify a verdict either way."""


__all__ = [
	"BudgetExceeded", "HorizonTooSmall", "IllegalElement", "InvariantViolation",
	"MalformedElement", "NotStabilized", "Undetermined",
]
