"""Transform a control problem into a linear problem over a measure on a
compact semialgebraic box.

For an unbounded control u in [0, inf) with linear growth (p = 1) the
change of variables u = r/(1-r) maps the control onto r in [0, 1]; the
1/(1+u) weights become (1-r) and all denominators clear to polynomials.
For a compact control interval the identity map is used and the classical
occupation-measure constraints are emitted. States are affinely rescaled
to [0, 1] so every support polynomial lives inside the unit box.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ocpmodel import OcpProblem, RECIPROCAL_CONTROL
from .polyalg import Polynomial, VariableSpace


class CompactifyError(ValueError):
    pass


@dataclass(frozen=True)
class AffineMap:
    """original = offset + scale * rescaled"""

    offset: float
    scale: float

    def forward(self, original: float) -> float:
        return (original - self.offset) / self.scale

    def backward(self, rescaled: float) -> float:
        return self.offset + self.scale * rescaled


@dataclass(frozen=True)
class CompactifiedProblem:
    space: VariableSpace                  # (t, states, r-or-u, aux...)
    state_names: tuple[str, ...]
    control_name: str
    objective: Polynomial                 # transformed Lagrangian integrand
    time_weight: Polynomial               # transformed 1/(1+|u|^p) factor
    dynamics: tuple[Polynomial, ...]      # transformed F components, one per state
    inequalities: tuple[Polynomial, ...]  # g >= 0 support constraints
    equalities: tuple[Polynomial, ...]    # h == 0 support constraints
    y0: tuple[float, ...]                 # rescaled boundary values
    y1: tuple[float, ...]
    state_maps: tuple[AffineMap, ...]
    control_unbounded: bool

    def variable_map(self) -> dict[str, AffineMap]:
        """Affine map from each reported variable back to original units."""
        out = {name: AffineMap(0.0, 1.0) for name in self.space.names}
        for name, m in zip(self.state_names, self.state_maps):
            out[name] = m
        return out


def _clear_reciprocal(poly: Polynomial, control: str, power: int,
                      target: VariableSpace) -> Polynomial:
    """(1-r)^power * poly(u -> r/(1-r)), as a polynomial over `target`.

    Requires deg_u(poly) <= power. Written as sum_j A_j * r^j * (1-r)^(power-j)
    for poly = sum_j A_j(t, y, aux) * u^j.
    """
    deg_u = poly.degree_in(control)
    if deg_u > power:
        raise CompactifyError(
            f"growth/homogenization mismatch: degree {deg_u} in {control!r} "
            f"exceeds cleared denominator power {power}"
        )
    u_idx = poly.space.index(control)
    r = Polynomial.variable(RECIPROCAL_CONTROL, target)
    one_minus_r = Polynomial.constant(1.0, target) - r

    # positions of the non-control variables inside the target space
    other = [n for n in poly.space.names if n != control]
    out = Polynomial.zero(target)
    by_degree: dict[int, Polynomial] = {}
    for exps, coeff in poly.terms.items():
        j = exps[u_idx]
        rest = [0] * target.dim
        for name, e in zip(poly.space.names, exps):
            if name == control:
                continue
            rest[target.index(name)] = e
        by_degree[j] = by_degree.get(j, Polynomial.zero(target)) + Polynomial.monomial(
            rest, coeff, target
        )
    for j, a_j in by_degree.items():
        out = out + a_j * r**j * one_minus_r ** (power - j)
    return out


def _box_constraint(var: str, lo: float, hi: float, space: VariableSpace) -> Polynomial:
    """(hi - x)(x - lo) >= 0, expanded."""
    x = Polynomial.variable(var, space)
    return (Polynomial.constant(hi, space) - x) * (x - Polynomial.constant(lo, space))


def compactify(problem: OcpProblem) -> CompactifiedProblem:
    diagnostics_unbounded = problem.control_bounds.unbounded
    control = problem.compact_control_name()
    space = VariableSpace(
        ("t",) + problem.state_names + (control,) + tuple(a.name for a in problem.aux)
    )

    # Affine state rescaling onto [0, 1].
    state_maps = tuple(
        AffineMap(b.lo, b.hi - b.lo) for b in problem.state_bounds
    )
    rescale = {}
    for name, m in zip(problem.state_names, state_maps):
        rescale[name] = Polynomial.constant(m.offset, space) + Polynomial.variable(
            name, space
        ) * m.scale

    def into_space(poly: Polynomial) -> Polynomial:
        """Map a polynomial over the problem space into the compactified
        space, substituting rescaled states; the control stays symbolic."""
        bindings = {}
        for name in poly.space.names:
            if name in rescale:
                bindings[name] = rescale[name]
            elif name in space.names:
                bindings[name] = Polynomial.variable(name, space)
            elif diagnostics_unbounded and name == problem.control_name:
                # rename u -> r; the denominators clear afterwards
                bindings[name] = Polynomial.variable(control, space)
            else:
                raise CompactifyError(f"variable {name!r} has no compactified image")
        return poly.substitute(bindings)

    if diagnostics_unbounded:
        if problem.p != 1:
            raise CompactifyError(
                "growth/homogenization mismatch: unbounded control supported "
                "only for growth exponent p = 1"
            )
        # Substitute states first (control degree is unaffected), then clear
        # denominators with u = r/(1-r). The renamed control r stands in for
        # u during the state substitution.
        lag = into_space(problem.lagrangian)
        objective = _clear_reciprocal(
            lag.substitute({control: Polynomial.variable(control, space)}),
            control,
            problem.p,
            space,
        )
        # integrand of dt: 1/(1+u)^p = (1-r)^p
        one = Polynomial.constant(1.0, space)
        time_weight = (one - Polynomial.variable(control, space)) ** problem.p
        dynamics = []
        for entry, m in zip(problem.dynamics, state_maps):
            cleared = _clear_reciprocal(
                into_space(entry.poly),
                control,
                entry.denominator_power + problem.p,
                space,
            )
            dynamics.append(cleared * (1.0 / m.scale))
        control_support = _box_constraint(control, 0.0, 1.0, space)
    else:
        for entry in problem.dynamics:
            if entry.denominator_power != 0:
                raise CompactifyError(
                    "denominator_power requires an unbounded control "
                    "(denominator not a power of (1+u))"
                )
        objective = into_space(problem.lagrangian)
        time_weight = Polynomial.constant(1.0, space)
        dynamics = [
            into_space(entry.poly) * (1.0 / m.scale)
            for entry, m in zip(problem.dynamics, state_maps)
        ]
        cb = problem.control_bounds
        control_support = _box_constraint(control, cb.lo, cb.hi, space)

    inequalities = [_box_constraint("t", 0.0, 1.0, space)]
    inequalities += [
        _box_constraint(name, 0.0, 1.0, space) for name in problem.state_names
    ]
    inequalities.append(control_support)
    inequalities += [
        _box_constraint(a.name, a.bounds.lo, a.bounds.hi, space) for a in problem.aux
    ]

    equalities = []
    for a in problem.aux:
        for con in a.constraints:
            equalities.append(into_space(con))

    y0 = tuple(m.forward(v) for m, v in zip(state_maps, problem.y0))
    y1 = tuple(m.forward(v) for m, v in zip(state_maps, problem.y1))

    return CompactifiedProblem(
        space=space,
        state_names=problem.state_names,
        control_name=control,
        objective=objective,
        time_weight=time_weight,
        dynamics=tuple(dynamics),
        inequalities=tuple(inequalities),
        equalities=tuple(equalities),
        y0=y0,
        y1=y1,
        state_maps=state_maps,
        control_unbounded=diagnostics_unbounded,
    )


def test_monomials(cp: CompactifiedProblem, degree: int):
    """Monomials t^a * y^b of total degree 1..degree, graded-lex."""
    names = ("t",) + cp.state_names
    out = []

    def rec(prefix, remaining, budget):
        if not remaining:
            out.append(tuple(prefix))
            return
        for e in range(budget + 1):
            rec(prefix + [e], remaining[1:], budget - e)

    rec([], list(names), degree)
    monos = [m for m in out if 0 < sum(m) <= degree]
    monos.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    return names, monos


def weak_constraints(cp: CompactifiedProblem, degree: int):
    """One linear constraint per test monomial v = t^a * y^b of total degree
    1..degree: integrand = dv/dt * D_t + sum_i dv/dy_i * D_i, right-hand side
    v(1, y1) - v(0, y0). The constant test function is excluded (0 = 0) and
    the measure's total mass stays free.
    """
    if degree < 1:
        raise CompactifyError("degree must be >= 1")
    names, monos = test_monomials(cp, degree)
    space = cp.space
    constraints = []
    for exps in monos:
        v = Polynomial.monomial(
            [exps[names.index(n)] if n in names else 0 for n in space.names],
            1.0,
            space,
        )
        integrand = v.differentiate("t") * cp.time_weight
        for state, d_i in zip(cp.state_names, cp.dynamics):
            integrand = integrand + v.differentiate(state) * d_i
        at1 = _eval_boundary(exps, names, 1.0, cp.y1)
        at0 = _eval_boundary(exps, names, 0.0, cp.y0)
        constraints.append((integrand, at1 - at0))
    return constraints


def _eval_boundary(exps, names, t_val: float, y_vals) -> float:
    point = {"t": t_val}
    for name, v in zip(names[1:], y_vals):
        point[name] = v
    out = 1.0
    for name, e in zip(names, exps):
        if e:
            out *= point[name] ** e
    return out
