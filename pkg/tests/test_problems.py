import json
from pathlib import Path

import numpy as np
import pytest

from mss_tr.problems import (
    DEFAULT_DIM,
    Problem,
    UnknownProblemError,
    catalog,
    check_gradient,
    get_problem,
    parse_problem_list,
    problem_names,
)
from reference_problems import REFERENCE

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_fx0.json").read_text())
NAMES = problem_names()


def perturbed_points(p, count=5, seed=0):
    rng = np.random.default_rng(seed)
    x0 = p.x0
    return [x0 + 0.1 * (1 + np.abs(x0)) * rng.standard_normal(p.dim) for _ in range(count)]


def test_catalog_size_and_registry():
    assert len(NAMES) >= 35
    assert len(catalog()) == len(NAMES)
    assert set(NAMES) == set(REFERENCE)


def test_unknown_problem():
    with pytest.raises(UnknownProblemError):
        get_problem("NOSUCHPROBLEM")
    with pytest.raises(LookupError):
        get_problem("NOSUCHPROBLEM")


def test_lookup_is_case_insensitive():
    assert get_problem("arwhead", 10).name == "ARWHEAD"


@pytest.mark.parametrize("name", NAMES)
def test_golden_start_values(name):
    p = get_problem(name)
    assert p.dim == GOLDEN[name]["dim"]
    assert p.eval_f(p.x0) == pytest.approx(GOLDEN[name]["f_x0"], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("name", NAMES)
def test_matches_loop_reference(name):
    p = get_problem(name, 100)
    for x in [p.x0] + perturbed_points(p, 3, seed=1):
        ref = REFERENCE[name](x)
        assert p.eval_f(x) == pytest.approx(ref, rel=1e-11, abs=1e-11)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("dim", [100, DEFAULT_DIM])
def test_gradient_at_start_and_perturbations(name, dim):
    p = get_problem(name, dim)
    assert p.dim >= dim and p.x0.shape == (p.dim,)
    assert np.all(np.isfinite(p.x0))
    for x in [p.x0] + perturbed_points(p):
        assert check_gradient(p, x) <= 1e-5


def test_dimension_rounding():
    assert get_problem("DIXMAANA", 1000).dim == 1002
    assert get_problem("POWELLSG", 1001).dim == 1004
    assert get_problem("BROYDN7D", 999).dim == 1000
    assert get_problem("FMINSURF", 1000).dim == 1024
    assert get_problem("CRAGGLVY", 1001).dim % 2 == 0


def test_quartc_minimizer():
    p = get_problem("QUARTC", 50)
    x = np.arange(1.0, 51.0)
    assert p.eval_f(x) == 0.0
    assert not np.any(p.eval_g(x))


def test_starting_point_is_a_copy():
    p = get_problem("ARWHEAD", 5)
    x = p.starting_point()
    x[0] = 99.0
    assert p.x0[0] == 1.0


def test_checker_linear_and_quadratic():
    c = np.linspace(-1, 1, 10)
    lin = Problem("LIN", 10, lambda x: c @ x, lambda x: c, np.zeros(10))
    assert check_gradient(lin, np.ones(10)) <= 1e-9
    A = np.diag(np.arange(1.0, 11.0))
    quad = Problem("Q", 10, lambda x: 0.5 * x @ A @ x, lambda x: A @ x, np.zeros(10))
    assert check_gradient(quad, np.linspace(0, 3, 10)) <= 1e-8
    wrong = Problem("W", 10, lambda x: 0.5 * x @ A @ x, lambda x: 2 * A @ x, np.zeros(10))
    assert check_gradient(wrong, np.ones(10)) > 0.1


def test_checker_sampling_is_seeded():
    p = get_problem("ARWHEAD", 500)
    x = p.x0 + 0.3
    assert check_gradient(p, x, seed=3) == check_gradient(p, x, seed=3)


def test_parse_problem_list():
    text = "# comment\nARWHEAD\ndixmaana:300\n\n"
    assert parse_problem_list(text, 1000) == [("ARWHEAD", 1000), ("DIXMAANA", 300)]
    with pytest.raises(UnknownProblemError):
        parse_problem_list("NOPE\n")
