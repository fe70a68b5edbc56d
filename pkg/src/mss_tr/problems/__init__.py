"""Test-problem catalog."""
from .base import (
    DEFAULT_DIM,
    Problem,
    UnknownProblemError,
    catalog,
    get_problem,
    parse_problem_list,
    problem_names,
)
from . import library as _library  # noqa: F401  (populates the registry)
from .gradcheck import check_gradient

__all__ = [
    "DEFAULT_DIM",
    "Problem",
    "UnknownProblemError",
    "catalog",
    "check_gradient",
    "get_problem",
    "parse_problem_list",
    "problem_names",
]
