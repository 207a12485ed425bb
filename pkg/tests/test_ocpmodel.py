import json

import pytest

from ocprelax.ocpmodel import (
    SchemaError,
    load_problem,
    problem_from_dict,
    save_problem,
    validate,
)
from conftest import problem_path


def jump_dict(**overrides):
    raw = json.loads(problem_path("jump").read_text())
    raw.update(overrides)
    return raw


def test_load_jump(jump_problem):
    p = jump_problem
    assert p.state_names == ("y",)
    assert p.control_name == "u"
    assert p.p == 1
    assert p.y0 == (0.0,)
    assert p.y1 == (1.0,)
    assert p.control_bounds.unbounded
    assert [a.name for a in p.aux] == ["w"]
    assert p.oracle == "jump"
    assert validate(p) == []


def test_parameters_are_folded(jump_problem):
    # eps = 0.2 baked into the auxiliary constraint
    h = jump_problem.aux[0].constraints[0]
    i = h.space.index("r")
    const = tuple(0 for _ in h.space.names)
    assert h.coefficient(const) == pytest.approx(-0.04)
    lin = tuple(1 if j == i else 0 for j in range(h.space.dim))
    assert h.coefficient(lin) == pytest.approx(0.08)


def test_parameter_override():
    p = load_problem(problem_path("jump"), {"eps": 0.5})
    h = p.aux[0].constraints[0]
    const = tuple(0 for _ in h.space.names)
    assert h.coefficient(const) == pytest.approx(-0.25)


def test_round_trip(tmp_path, jump_problem):
    out = tmp_path / "copy.ocp"
    save_problem(jump_problem, out)
    again = load_problem(out)
    assert again.state_names == jump_problem.state_names
    assert again.lagrangian == jump_problem.lagrangian
    assert again.dynamics[0].poly == jump_problem.dynamics[0].poly
    assert again.aux[0].constraints == jump_problem.aux[0].constraints
    assert again.control_bounds == jump_problem.control_bounds


def test_bad_horizon_rejected():
    with pytest.raises(SchemaError, match="horizon"):
        problem_from_dict(jump_dict(horizon=[0, 2]))


def test_vector_control_rejected():
    with pytest.raises(SchemaError, match="scalar control"):
        problem_from_dict(jump_dict(control=["u", "v"]))


def test_growth_exponent_validated():
    diags = validate(problem_from_dict(jump_dict(p=0)))
    assert any("growth exponent" in d for d in diags)


def test_boundary_value_outside_bounds():
    diags = validate(problem_from_dict(jump_dict(y0=[2.0])))
    assert any("boundary values outside bounds" in d for d in diags)


def test_unbounded_control_must_start_at_zero():
    raw = jump_dict()
    raw["bounds"] = dict(raw["bounds"], u=[1, None])
    diags = validate(problem_from_dict(raw))
    assert any("unbounded control" in d for d in diags)


def test_load_rejects_invalid(tmp_path):
    bad = tmp_path / "bad.ocp"
    bad.write_text(json.dumps(jump_dict(y0=[2.0])))
    with pytest.raises(SchemaError, match="boundary values"):
        load_problem(bad)


def test_unknown_variable_in_dynamics():
    raw = jump_dict(dynamics=[{"poly": "z", "denominator_power": 0}])
    with pytest.raises(SchemaError):
        problem_from_dict(raw)


def test_compact_problems_load(osc_problem, conc_problem):
    assert not osc_problem.control_bounds.unbounded
    assert osc_problem.p == 4
    assert conc_problem.control_bounds.unbounded
    assert validate(osc_problem) == []
    assert validate(conc_problem) == []
