import pytest

from ocprelax.compactify import CompactifyError, compactify, weak_constraints
from ocprelax.compactify import test_monomials as monomial_basis
from ocprelax.ocpmodel import problem_from_dict
from ocprelax.oracles import get_entry
from ocprelax.polyalg import parse_poly

from test_ocpmodel import jump_dict


def test_jump_compactification(jump_compactified):
    cp = jump_compactified
    sp = cp.space
    assert sp.names == ("t", "y", "r", "w")
    assert cp.objective == parse_poly("(t + y)*r", sp)
    assert cp.time_weight == parse_poly("1 - r", sp)
    assert cp.dynamics == (parse_poly("w", sp),)
    assert cp.control_unbounded
    assert cp.y0 == (0.0,)
    assert cp.y1 == (1.0,)


def test_jump_support_set(jump_compactified):
    sp = jump_compactified.space
    expected = sorted(str(parse_poly(f"{v} - {v}^2", sp)) for v in sp.names)
    assert sorted(str(g) for g in jump_compactified.inequalities) == expected
    (h,) = jump_compactified.equalities
    diff = h - parse_poly("w^2 - r^2 - 0.04*(1 - r)^2", sp)
    assert max((abs(c) for c in diff.terms.values()), default=0.0) <= 1e-12


def test_weak_constraint_spot_values(jump_compactified):
    cp = jump_compactified
    sp = cp.space
    names, monos = monomial_basis(cp, 2)
    cons = weak_constraints(cp, 2)
    table = dict(zip(monos, cons))
    # v = t: d/dt(t) integrates the time weight; full horizon has length 1
    integrand, rhs = table[(1, 0)]
    assert integrand == parse_poly("1 - r", sp) and rhs == 1.0
    # v = y: the state moves by w overall and ends at 1
    integrand, rhs = table[(0, 1)]
    assert integrand == parse_poly("w", sp) and rhs == 1.0
    # v = t*y: product rule
    integrand, rhs = table[(1, 1)]
    assert integrand == parse_poly("y*(1 - r) + t*w", sp) and rhs == 1.0


def test_weak_constraint_count(jump_compactified):
    for d in (1, 2, 4, 6):
        n = len(weak_constraints(jump_compactified, 2 * d))
        assert n == (2 * d + 1) * (2 * d + 2) // 2 - 1


def test_monomials_exclude_constant(jump_compactified):
    names, monos = monomial_basis(jump_compactified, 3)
    assert names == ("t", "y")
    assert (0, 0) not in monos
    assert all(0 < sum(m) <= 3 for m in monos)
    keys = [(sum(m), tuple(-x for x in m)) for m in monos]
    assert keys == sorted(keys)


def test_oracle_moments_satisfy_weak_constraints(jump_compactified):
    measure = get_entry("jump", 0.2)
    for integrand, rhs in weak_constraints(jump_compactified, 4):
        total = sum(
            coeff * measure.moment(exps)
            for exps, coeff in integrand.terms.items()
        )
        assert total == pytest.approx(rhs, abs=1e-12)


def test_growth_mismatch_rejected():
    problem = problem_from_dict(jump_dict(p=2))
    with pytest.raises(CompactifyError, match="growth/homogenization mismatch"):
        compactify(problem)


def test_compact_control_branch(osc_problem):
    cp = compactify(osc_problem)
    sp = cp.space
    assert sp.names == ("t", "y", "u")
    assert not cp.control_unbounded
    assert cp.time_weight == parse_poly("1", sp)
    # state y in [-1, 1] rescales to [0, 1]: y_orig = 2*y - 1
    assert cp.objective == parse_poly("(u^2 - 1)^2 + (2*y - 1)^2", sp)
    # dy/dt = u becomes d(yhat)/dt = u / 2
    assert cp.dynamics == (parse_poly("0.5*u", sp),)
    assert cp.y0 == (0.5,)
    assert cp.y1 == (0.5,)
    # control box stays native
    assert parse_poly("(1 - u)*(u + 1)", sp) in cp.inequalities


def test_variable_map_round_trip(jump_compactified, osc_problem):
    for cp, val in ((jump_compactified, 0.3), (compactify(osc_problem), -0.4)):
        for name, m in cp.variable_map().items():
            assert m.backward(m.forward(val)) == pytest.approx(val)


def test_denominator_power_needs_unbounded_control():
    raw = jump_dict()
    raw["bounds"] = dict(raw["bounds"], u=[0, 3])
    raw["dynamics"] = [{"poly": "w*(1+u)", "denominator_power": 1}]
    raw["aux"] = [{"name": "w", "constraints": ["w^2 - u^2"], "bounds": [0, 1]}]
    problem = problem_from_dict(raw)
    with pytest.raises(CompactifyError, match="denominator"):
        compactify(problem)
