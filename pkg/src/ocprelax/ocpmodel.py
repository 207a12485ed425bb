"""Data model and file ingestion for polynomial optimal control problems.

A problem file is a JSON document describing

    inf_u  int_0^1 L(t, y, u) dt
    s.t.   dy/dt = F(t, y, u),  y(0) = y0,  y(1) = y1,

with the time horizon fixed to [0, 1], a single scalar control, compact
state boxes, and the control either on a compact interval or on [0, inf).
Non-polynomial dynamics (square roots and the like) are not parsed: the
file must supply an auxiliary variable with polynomial defining equalities
written in the compactified control variable, mirroring how the change of
variables clears the radical by hand.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .polyalg import ParseError, PolyError, Polynomial, VariableSpace, parse_poly

RECIPROCAL_CONTROL = "r"  # name of the compactified control for unbounded u


class SchemaError(ValueError):
    """Problem file violates the schema or a model invariant."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float | None  # None encodes +infinity

    @property
    def unbounded(self) -> bool:
        return self.hi is None

    def to_json(self):
        return [self.lo, self.hi]


@dataclass(frozen=True)
class AuxVariable:
    name: str
    constraints: tuple[Polynomial, ...]  # equalities, in compactified variables
    bounds: Interval


@dataclass(frozen=True)
class DynamicsEntry:
    poly: Polynomial          # numerator, in (t, states, control, aux)
    denominator_power: int    # divides by (1 + u)^q after compactification


@dataclass(frozen=True)
class OcpProblem:
    state_names: tuple[str, ...]
    control_name: str
    p: int                           # growth exponent of the Lagrangian
    lagrangian: Polynomial
    dynamics: tuple[DynamicsEntry, ...]
    aux: tuple[AuxVariable, ...]
    y0: tuple[float, ...]
    y1: tuple[float, ...]
    state_bounds: tuple[Interval, ...]
    control_bounds: Interval
    oracle: str | None = None        # registered analytic-solution name, if any

    @property
    def n(self) -> int:
        return len(self.state_names)

    @property
    def space(self) -> VariableSpace:
        """(t, states, control, aux) -- the space dynamics live in."""
        return VariableSpace(
            ("t",) + self.state_names + (self.control_name,) + tuple(a.name for a in self.aux)
        )

    def compact_control_name(self) -> str:
        return RECIPROCAL_CONTROL if self.control_bounds.unbounded else self.control_name


def _as_interval(raw, what: str) -> Interval:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise SchemaError(f"{what}: bound must be a [lo, hi] pair, got {raw!r}")
    lo, hi = raw
    lo = float(lo)
    hi = None if hi is None else float(hi)
    if hi is not None and hi <= lo:
        raise SchemaError(f"{what}: empty interval [{lo}, {hi}]")
    return Interval(lo, hi)


_IDENT_RE = re.compile(r"[a-z][a-z0-9_]*")


def _fold_parameters(text: str, params: dict[str, float]) -> str:
    """Textually substitute named scalar parameters before parsing."""

    def repl(m: re.Match) -> str:
        name = m.group(0)
        if name in params:
            return f"({params[name]!r})"
        return name

    return _IDENT_RE.sub(repl, text)


def load_problem(path, overrides: dict[str, float] | None = None) -> OcpProblem:
    """Load and validate a problem file; raises SchemaError on any defect."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    problem = problem_from_dict(raw, overrides)
    diagnostics = validate(problem)
    if diagnostics:
        raise SchemaError(f"{path}: " + "; ".join(diagnostics))
    return problem


def problem_from_dict(raw: dict, overrides: dict[str, float] | None = None) -> OcpProblem:
    if not isinstance(raw, dict):
        raise SchemaError("problem file must contain a JSON object")

    horizon = raw.get("horizon", [0, 1])
    if list(horizon) != [0, 1]:
        raise SchemaError("t horizon must be [0,1]")

    for key in ("states", "control", "lagrangian", "dynamics", "y0", "y1", "bounds"):
        if key not in raw:
            raise SchemaError(f"missing field {key!r}")

    states = raw["states"]
    if isinstance(states, str):
        states = [states]
    states = tuple(str(s) for s in states)

    control = raw["control"]
    if isinstance(control, list):
        if len(control) != 1:
            raise SchemaError("only scalar control supported")
        control = control[0]
    control = str(control)

    p = int(raw.get("p", 1))

    params = {str(k): float(v) for k, v in raw.get("parameters", {}).items()}
    if overrides:
        unknown = set(overrides) - set(params)
        if unknown:
            raise SchemaError(f"override of undeclared parameter(s): {sorted(unknown)}")
        params.update({k: float(v) for k, v in overrides.items()})

    aux_raw = raw.get("aux", [])
    aux_names = tuple(str(a["name"]) for a in aux_raw)

    unbounded_control = raw["bounds"].get("u", raw["bounds"].get(control))
    control_bounds = _as_interval(
        unbounded_control if unbounded_control is not None else raw["bounds"].get("control"),
        "control",
    )
    compact_name = RECIPROCAL_CONTROL if control_bounds.unbounded else control

    full_space = VariableSpace(("t",) + states + (control,) + aux_names)
    if control_bounds.unbounded and RECIPROCAL_CONTROL in ("t",) + states + aux_names:
        raise SchemaError(
            f"variable name {RECIPROCAL_CONTROL!r} is reserved for the compactified control"
        )
    aux_space = VariableSpace(("t",) + states + (compact_name,) + aux_names)

    def parse_in(text: str, space: VariableSpace, what: str) -> Polynomial:
        try:
            return parse_poly(_fold_parameters(str(text), params), space)
        except (ParseError, PolyError) as exc:
            raise SchemaError(f"{what}: {exc}") from exc

    lagrangian = parse_in(raw["lagrangian"], full_space, "lagrangian")

    dynamics = []
    for i, entry in enumerate(raw["dynamics"]):
        if isinstance(entry, str):
            entry = {"poly": entry}
        poly = parse_in(entry["poly"], full_space, f"dynamics[{i}]")
        q = int(entry.get("denominator_power", 0))
        if q < 0:
            raise SchemaError(f"dynamics[{i}]: denominator_power must be >= 0")
        dynamics.append(DynamicsEntry(poly, q))

    aux = []
    for a in aux_raw:
        cons = tuple(
            parse_in(c, aux_space, f"aux {a['name']!r} constraint") for c in a["constraints"]
        )
        aux.append(AuxVariable(str(a["name"]), cons, _as_interval(a["bounds"], f"aux {a['name']!r}")))

    y0 = tuple(float(v) for v in raw["y0"])
    y1 = tuple(float(v) for v in raw["y1"])

    state_bounds_raw = raw["bounds"].get("y", raw["bounds"].get("states"))
    if state_bounds_raw is None:
        raise SchemaError("bounds: missing state bounds ('y')")
    if len(state_bounds_raw) != len(states):
        raise SchemaError("bounds: one [lo, hi] pair per state required")
    state_bounds = tuple(_as_interval(b, f"state {s!r}") for s, b in zip(states, state_bounds_raw))

    return OcpProblem(
        state_names=states,
        control_name=control,
        p=p,
        lagrangian=lagrangian,
        dynamics=tuple(dynamics),
        aux=tuple(aux),
        y0=y0,
        y1=y1,
        state_bounds=state_bounds,
        control_bounds=control_bounds,
        oracle=raw.get("oracle"),
    )


def validate(problem: OcpProblem) -> list[str]:
    """Return a diagnostic per violated invariant (empty list iff valid)."""
    out = []
    if problem.n < 1:
        out.append("at least one state required")
    if problem.p < 1:
        out.append("growth exponent must be >= 1")
    if len(problem.dynamics) != problem.n:
        out.append("one dynamics entry per state required")
    if len(problem.y0) != problem.n or len(problem.y1) != problem.n:
        out.append("y0/y1 must have one entry per state")
    for name, b in zip(problem.state_names, problem.state_bounds):
        if b.unbounded or not (math.isfinite(b.lo) and math.isfinite(b.hi)):
            out.append(f"state {name!r}: bounds must be compact")
    cb = problem.control_bounds
    if cb.unbounded and cb.lo != 0.0:
        out.append("unbounded control must have bounds [0, inf)")
    for (name, b), v0, v1 in zip(
        zip(problem.state_names, problem.state_bounds), problem.y0, problem.y1
    ):
        if not b.unbounded and not (b.lo <= v0 <= b.hi and b.lo <= v1 <= b.hi):
            out.append(f"state {name!r}: boundary values outside bounds")
    for a in problem.aux:
        if a.bounds.unbounded:
            out.append(f"aux {a.name!r}: bounds must be compact")
    return out


def save_problem(problem: OcpProblem, path) -> None:
    """Serialize a problem (parameters folded) so that load(save(p)) == p."""
    doc = {
        "states": list(problem.state_names),
        "control": problem.control_name,
        "p": problem.p,
        "lagrangian": str(problem.lagrangian),
        "dynamics": [
            {"poly": str(d.poly), "denominator_power": d.denominator_power}
            for d in problem.dynamics
        ],
        "aux": [
            {
                "name": a.name,
                "constraints": [str(c) for c in a.constraints],
                "bounds": a.bounds.to_json(),
            }
            for a in problem.aux
        ],
        "y0": list(problem.y0),
        "y1": list(problem.y1),
        "bounds": {
            "y": [b.to_json() for b in problem.state_bounds],
            "u": problem.control_bounds.to_json(),
        },
    }
    if problem.oracle:
        doc["oracle"] = problem.oracle
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
