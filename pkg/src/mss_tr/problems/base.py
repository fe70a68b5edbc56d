"""Problem container and name registry."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DEFAULT_DIM = 1000


class UnknownProblemError(LookupError):
    pass


@dataclass(frozen=True)
class Problem:
    """Smooth unconstrained test problem of a fixed dimension."""

    name: str
    dim: int
    fun: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    x0: np.ndarray
    known_fmin: Optional[float] = None

    def eval_f(self, x) -> float:
        return float(self.fun(np.asarray(x, dtype=float)))

    def eval_g(self, x) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(x, dtype=float)), dtype=float)

    def starting_point(self) -> np.ndarray:
        return self.x0.copy()


_REGISTRY: dict[str, Callable[[int], Problem]] = {}


def register(name: str):
    def deco(builder: Callable[[int], Problem]):
        _REGISTRY[name.upper()] = builder
        return builder
    return deco


def problem_names() -> list[str]:
    return list(_REGISTRY)


def catalog() -> list[Callable[[int], Problem]]:
    """Problem constructors, each taking the requested dimension."""
    return list(_REGISTRY.values())


def get_problem(name: str, dim: int = DEFAULT_DIM) -> Problem:
    try:
        builder = _REGISTRY[name.upper()]
    except KeyError:
        raise UnknownProblemError(f"unknown problem {name!r}") from None
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    return builder(int(dim))


def parse_problem_list(text: str, default_dim: int = DEFAULT_DIM) -> list[tuple[str, int]]:
    """Parse one ``name`` or ``name:dim`` per line; ``#`` starts a comment.

    Raises ``UnknownProblemError`` for names not in the registry.
    """
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, _, dim = line.partition(":")
        name = name.strip().upper()
        if name not in _REGISTRY:
            raise UnknownProblemError(f"unknown problem {name!r}")
        out.append((name, int(dim) if dim.strip() else default_dim))
    return out
