"""Predicate disclosure: boolean statements evaluated over attribute values."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..errors import PredicateTypeError

Scalar = Union[str, int, float, bool]

OPERATORS = frozenset({"eq", "neq", "gt", "gte", "lt", "lte", "contains"})
_ORDERING = frozenset({"gt", "gte", "lt", "lte"})


def _is_number(value) -> bool:
    # bool is an int subclass but is not a number for predicate purposes.
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class Predicate:
    operator: str
    operand: Scalar

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise PredicateTypeError(f"unknown operator: {self.operator!r}")
        if self.operator in _ORDERING and not _is_number(self.operand):
            raise PredicateTypeError(f"operator {self.operator!r} requires a numeric operand")
        if self.operator == "contains" and not isinstance(self.operand, str):
            raise PredicateTypeError("operator 'contains' requires a string operand")

    def describe(self, subject: str) -> str:
        return f"{subject} {self.operator} {self.operand!r}"


def evaluate_predicate(value: Scalar, predicate: Predicate) -> bool:
    """Evaluate with strict typing: incompatible types raise, they never
    evaluate to a silent false."""
    op, operand = predicate.operator, predicate.operand
    if op in _ORDERING:
        if not _is_number(value):
            raise PredicateTypeError(f"operator {op!r} requires a numeric value, got {type(value).__name__}")
        if op == "gt":
            return value > operand
        if op == "gte":
            return value >= operand
        if op == "lt":
            return value < operand
        return value <= operand
    if op == "contains":
        if not isinstance(value, str):
            raise PredicateTypeError(f"operator 'contains' requires a string value, got {type(value).__name__}")
        return operand in value
    # eq / neq: operands must be of the same family (string vs number vs bool)
    same_family = (
        (isinstance(value, str) and isinstance(operand, str))
        or (isinstance(value, bool) and isinstance(operand, bool))
        or (_is_number(value) and _is_number(operand))
    )
    if not same_family:
        raise PredicateTypeError(
            f"cannot compare {type(value).__name__} against {type(operand).__name__}"
        )
    return value == operand if op == "eq" else value != operand
