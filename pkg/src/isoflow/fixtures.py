"""Built-in initial matrices for the experiments.

``example1`` and ``example2`` are embedded entry by entry as fixed test
matrices (no generator seed exists for them). ``t5``/``t10`` are
``tridiag(1, -2, 1)``; ``ts5``/``ts10`` are the same scaled by ``(n+1)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flows import circulant_kernel_witness, shader_counterexample
from .symspace import as_sym, read_matrix

EXAMPLE1 = [
    [0.87, 1.23, 0,    0,    0,    0],
    [1.23, 1.67, 0.62, 0,    0,    0],
    [0,    0.62, 0.25, 1.17, 0,    0],
    [0,    0,    1.17, 0.79, 1.87, 0],
    [0,    0,    0,    1.87, 1.92, 1.63],
    [0,    0,    0,    0,    1.63, 1.8],
]

EXAMPLE2 = [
    [1.7,  0,    0,    0,    0,    0,    1.92, 0,    0.48, 1.25],
    [0,    1.16, 1.16, 0.91, 1.56, 0,    0,    1.69, 0,    0],
    [0,    1.16, 0.48, 0,    0.90, 0,    0,    0,    0,    0],
    [0,    0.91, 0,    0.66, 0.88, 0,    0.93, 1.25, 0,    1.39],
    [0,    1.56, 0.9,  0.88, 0.3,  0,    0,    0,    0,    0],
    [0,    0,    0,    0,    0,    0.94, 1.49, 0.37, 0.88, 0],
    [1.92, 0,    0,    0.93, 0,    1.49, 1.12, 0.67, 0.4,  0],
    [0,    1.69, 0,    1.25, 0,    0.37, 0.67, 1.1,  0,    1.54],
    [0.48, 0,    0,    0,    0,    0.88, 0.4,  0,    0.44, 1.05],
    [1.25, 0,    0,    1.39, 0,    0,    0,    1.54, 1.05, 1.2],
]


def tridiag(n: int, lower: float = 1.0, diag: float = -2.0, upper: float = 1.0) -> np.ndarray:
    return diag * np.eye(n) + lower * np.eye(n, k=-1) + upper * np.eye(n, k=1)


@dataclass(frozen=True)
class Fixture:
    name: str
    X0: np.ndarray
    description: str


def _builtin(name: str) -> Fixture:
    if name == "example1":
        return Fixture(name, np.array(EXAMPLE1, dtype=float), "random symmetric tridiagonal, n=6")
    if name == "example2":
        return Fixture(name, np.array(EXAMPLE2, dtype=float),
                       "random symmetric with random zero pattern, n=10")
    if name in ("t5", "t10"):
        n = int(name[1:])
        return Fixture(name, tridiag(n), f"tridiag(1,-2,1) of order {n}")
    if name in ("ts5", "ts10"):
        n = int(name[2:])
        return Fixture(name, (n + 1) ** 2 * tridiag(n), f"{(n + 1) ** 2} * tridiag(1,-2,1) of order {n}")
    if name == "shader":
        E, _, _ = shader_counterexample(1.0, 2.0, 2.0)
        return Fixture(name, E, "non-diagonal equilibrium, a=1, b=2 (target diag(1,5,4))")
    if name == "circulant":
        X, _ = circulant_kernel_witness()
        return Fixture(name, X, "circulant(-2,1,0,1); A.X + m is singular")
    raise KeyError(name)


FIXTURE_NAMES = ("example1", "example2", "t5", "t10", "ts5", "ts10", "shader", "circulant")


def fixture(name: str) -> Fixture:
    """Look up a built-in fixture, or load ``file:<path>`` in the matrix text format."""
    if name.startswith("file:"):
        path = name[len("file:"):]
        return Fixture(name, read_matrix(path), f"loaded from {path}")
    try:
        fx = _builtin(name)
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)} "
                         "or file:<path>") from None
    return Fixture(fx.name, as_sym(fx.X0), fx.description)


DEFAULT_T_FINAL = {"example1": 60.0, "example2": 60.0, "t5": 200.0, "t10": 200.0,
                   "ts5": 2.0, "ts10": 2.0, "shader": 50.0, "circulant": 10.0}


def default_t_final(name: str) -> float:
    """Default horizon of a fixture; 60 for anything not listed (e.g. ``file:`` inputs)."""
    return DEFAULT_T_FINAL.get(name, 60.0)
