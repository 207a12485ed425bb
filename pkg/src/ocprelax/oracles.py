"""Analytic limit measures with closed-form moments, used as ground truth.

Each catalog entry is a finite sum of weighted components; a component
pins every variable either to a constant, or to an affine function of one
free variable that is integrated uniformly over an interval. That covers
every limit object needed here: Dirac atoms, Lebesgue segments, and
Dirac-on-a-line conditionals, optionally organized as a disintegration
triplet (time measure, control conditional, state conditional).

Compactified test functions are polynomials in s = u/(1+|u|), so the
control value at +infinity is s = 1 and at -infinity is s = -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy.polynomial.polynomial as npoly

from .polyalg import PolyError, Polynomial, VariableSpace


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Measure components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureComponent:
    """weight * (uniform average over the free variable, if any) of a
    product of coordinates, each affine in the free variable."""

    weight: float
    coords: dict  # var name -> float (pinned) or (a, b) meaning a + b * s
    free: tuple[str, float, float] | None = None  # (var, lo, hi)

    def moment(self, space: VariableSpace, exps) -> float:
        if self.free is None:
            out = self.weight
            for name, e in zip(space.names, exps):
                if e:
                    out *= float(self.coords[name]) ** e
            return out
        var, lo, hi = self.free
        if hi <= lo:
            raise OracleError(f"empty segment for {var!r}")
        poly = [1.0]
        scalar = self.weight / (hi - lo)
        for name, e in zip(space.names, exps):
            if not e:
                continue
            if name == var:
                factor = [0.0, 1.0]
            else:
                c = self.coords[name]
                factor = list(c) if isinstance(c, tuple) else [float(c)]
            for _ in range(e):
                poly = npoly.polymul(poly, factor)
        anti = npoly.polyint(poly)
        return scalar * float(npoly.polyval(hi, anti) - npoly.polyval(lo, anti))


@dataclass(frozen=True)
class MeasureSpec:
    space: VariableSpace
    components: tuple[MeasureComponent, ...]
    structure: str = "plain"  # plain | young | time | pair | triplet
    description: str = ""

    def mass(self) -> float:
        return self.moment((0,) * self.space.dim)

    def moment(self, exps) -> float:
        if len(exps) != self.space.dim:
            raise OracleError(
                f"monomial dimension {len(exps)} != space dimension {self.space.dim}"
            )
        return sum(c.moment(self.space, tuple(exps)) for c in self.components)


def moment_of(measure: MeasureSpec, mono) -> float:
    """Exact integral of a monomial (Monomial or exponent tuple)."""
    exps = getattr(mono, "exponents", mono)
    return measure.moment(tuple(exps))


def integrate_poly(measure: MeasureSpec, poly: Polynomial) -> float:
    if poly.space != measure.space:
        raise OracleError(
            f"space mismatch: {poly.space.names} vs {measure.space.names}"
        )
    return sum(c * measure.moment(e) for e, c in poly.terms.items())


# ---------------------------------------------------------------------------
# Disintegration triplets (time measure, control conditional, state conditional)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeSegment:
    lo: float
    hi: float
    density: float  # constant; total weight = density * (hi - lo)


@dataclass(frozen=True)
class TimeAtom:
    t: float
    weight: float


@dataclass(frozen=True)
class StateDirac:
    """State pinned to value, or to offset + slope * t on a time segment."""

    offset: float
    slope: float = 0.0


@dataclass(frozen=True)
class StateSegment:
    """Uniform (probability) distribution of the state on [lo, hi]."""

    lo: float
    hi: float


@dataclass(frozen=True)
class Triplet:
    """Time measure tau, control conditional omega(.|t) and state
    conditional upsilon(.|t, u). Conditionals are keyed by the time piece;
    each control branch carries the pinned control coordinates (e.g. the
    compactified value s and any derived variables)."""

    space: VariableSpace
    time_pieces: tuple  # TimeSegment | TimeAtom
    # per time piece: list of (probability, {control var: value})
    control_branches: tuple[tuple[tuple[float, dict], ...], ...]
    # per (time piece, branch): StateDirac | StateSegment | None
    state_conditionals: tuple[tuple[object, ...], ...]

    def conditional_masses(self):
        """Total mass of each control conditional (must each be 1)."""
        return [sum(p for p, _ in branches) for branches in self.control_branches]

    def components(self) -> tuple[MeasureComponent, ...]:
        out = []
        for piece, branches, states in zip(
            self.time_pieces, self.control_branches, self.state_conditionals
        ):
            for (prob, control_coords), state in zip(branches, states):
                coords = dict(control_coords)
                if isinstance(piece, TimeSegment):
                    weight = prob * piece.density * (piece.hi - piece.lo)
                    free = ("t", piece.lo, piece.hi)
                    if isinstance(state, StateDirac):
                        coords["y"] = (state.offset, state.slope)
                    elif isinstance(state, StateSegment):
                        raise OracleError(
                            "state segment conditional requires a time atom"
                        )
                    out.append(MeasureComponent(weight, coords, free))
                else:
                    weight = prob * piece.weight
                    coords["t"] = piece.t
                    if isinstance(state, StateDirac):
                        coords["y"] = state.offset + state.slope * piece.t
                        out.append(MeasureComponent(weight, coords, None))
                    elif isinstance(state, StateSegment):
                        out.append(
                            MeasureComponent(
                                weight, coords, ("y", state.lo, state.hi)
                            )
                        )
                    else:
                        out.append(MeasureComponent(weight, coords, None))
        return tuple(out)

    def measure(self, structure="triplet", description="") -> MeasureSpec:
        return MeasureSpec(self.space, self.components(), structure, description)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def jump_measure(eps: float = 0.2) -> MeasureSpec:
    """Optimal limit measure of the impulsive benchmark (jump at t = 0),
    over the compactified variables (t, y, r, w): a Lebesgue-in-time sheet
    along y = 1 - eps + eps*t with r = 0, w = eps, plus a time atom at 0
    with r = 1, w = 1 and the state spread uniformly over the jump."""
    if not 0.0 < eps < 1.0:
        raise OracleError("eps must lie in (0, 1)")
    space = VariableSpace.of("t", "y", "r", "w")
    triplet = Triplet(
        space=space,
        time_pieces=(TimeSegment(0.0, 1.0, 1.0), TimeAtom(0.0, 1.0 - eps)),
        control_branches=(
            ((1.0, {"r": 0.0, "w": eps}),),
            ((1.0, {"r": 1.0, "w": 1.0}),),
        ),
        state_conditionals=(
            (StateDirac(1.0 - eps, eps),),
            (StateSegment(0.0, 1.0 - eps),),
        ),
    )
    return triplet.measure(description=f"impulsive jump benchmark, eps={eps}")


def osc_measure() -> MeasureSpec:
    """Chattering limit over (t, u): half Dirac at u = -1, half at u = +1,
    uniformly in time."""
    space = VariableSpace.of("t", "u")
    comps = (
        MeasureComponent(0.5, {"u": -1.0}, ("t", 0.0, 1.0)),
        MeasureComponent(0.5, {"u": 1.0}, ("t", 0.0, 1.0)),
    )
    return MeasureSpec(space, comps, "young", "chattering control limit")


def conc_measure() -> MeasureSpec:
    """Concentration limit on time: unit atom at t = 1/2."""
    space = VariableSpace.of("t")
    return MeasureSpec(
        space, (MeasureComponent(1.0, {"t": 0.5}, None),), "time",
        "impulse concentration limit",
    )


def oscconc_measure() -> MeasureSpec:
    """Joint oscillation/concentration limit over (t, s), s = u/(1+u):
    time density 2 with the control half at 0 and half at infinity."""
    space = VariableSpace.of("t", "s")
    comps = (
        MeasureComponent(1.0, {"s": 0.0}, ("t", 0.0, 1.0)),
        MeasureComponent(1.0, {"s": 1.0}, ("t", 0.0, 1.0)),
    )
    return MeasureSpec(space, comps, "pair", "oscillation + concentration limit")


def spike_triplet() -> Triplet:
    """Single upward spike at t = 1/2 driving the state from 0 to 1. The
    time atom carries unit weight: with the spike control k on a 1/k window
    the weighted time mass (1 + u) contributes (1 + k)/k -> 1."""
    space = VariableSpace.of("t", "s", "y")
    return Triplet(
        space=space,
        time_pieces=(
            TimeSegment(0.0, 0.5, 1.0),
            TimeSegment(0.5, 1.0, 1.0),
            TimeAtom(0.5, 1.0),
        ),
        control_branches=(
            ((1.0, {"s": 0.0}),),
            ((1.0, {"s": 0.0}),),
            ((1.0, {"s": 1.0}),),
        ),
        state_conditionals=(
            (StateDirac(0.0),),
            (StateDirac(1.0),),
            (StateSegment(0.0, 1.0),),
        ),
    )


def updown_triplet() -> Triplet:
    """Up-then-down spike at t = 1/2: state rises 0 -> 1 with control +k,
    then falls 1 -> -1 with control -2k. The downward branch carries twice
    the weighted time mass, so the control conditional at the atom is
    (1/3, 2/3) over (+infinity, -infinity) and the atom weight is 3."""
    space = VariableSpace.of("t", "s", "y")
    return Triplet(
        space=space,
        time_pieces=(
            TimeSegment(0.0, 0.5, 1.0),
            TimeSegment(0.5, 1.0, 1.0),
            TimeAtom(0.5, 3.0),
        ),
        control_branches=(
            ((1.0, {"s": 0.0}),),
            ((1.0, {"s": 0.0}),),
            ((1.0 / 3.0, {"s": 1.0}), (2.0 / 3.0, {"s": -1.0})),
        ),
        state_conditionals=(
            (StateDirac(0.0),),
            (StateDirac(-1.0),),
            (StateSegment(0.0, 1.0), StateSegment(-1.0, 1.0)),
        ),
    )


def catalog(eps: float = 0.2) -> dict[str, MeasureSpec]:
    return {
        "jump": jump_measure(eps),
        "osc": osc_measure(),
        "conc": conc_measure(),
        "oscconc": oscconc_measure(),
        "spike": spike_triplet().measure(description="single spike with jump"),
        "updown": updown_triplet().measure(description="up-down spike with jump"),
    }


def get_entry(name: str, eps: float = 0.2) -> MeasureSpec:
    entries = catalog(eps)
    try:
        return entries[name]
    except KeyError:
        raise OracleError(
            f"no oracle registered under {name!r}; known: {sorted(entries)}"
        ) from None


# ---------------------------------------------------------------------------
# Closed-form marginal moments of the jump benchmark
# ---------------------------------------------------------------------------

def table_moment(which: str, k: int, eps: float = 0.2) -> float:
    """Closed-form k-th marginal moment of the jump-benchmark measure for
    the variables t, y, r, w."""
    if k < 0:
        raise OracleError("moment degree must be >= 0")
    if not 0.0 < eps < 1.0:
        raise OracleError("eps must lie in (0, 1)")
    zero_pow = 1.0 if k == 0 else 0.0
    q = (1.0 - eps) ** (k + 1)
    if which == "t":
        return 1.0 / (k + 1) + (1.0 - eps) * zero_pow
    if which == "y":
        return q / (k + 1) - (q - 1.0) / (eps * (k + 1))
    if which == "r":
        return zero_pow + (1.0 - eps)
    if which == "w":
        return eps**k + (1.0 - eps)
    raise OracleError(f"unknown marginal {which!r}; expected one of t, y, r, w")


def jump_objective_value(eps: float) -> float:
    """Optimal value of the jump benchmark: (1 - eps)^2 / 2."""
    return (1.0 - eps) ** 2 / 2.0


# ---------------------------------------------------------------------------
# Iterated integrals against the limit measures
# ---------------------------------------------------------------------------

def _require_univariate(poly: Polynomial, what: str) -> None:
    if poly.space.dim != 1:
        raise OracleError(f"{what} must be a polynomial in one variable")


def anisotropic_integral(
    entry: str | MeasureSpec,
    f: Polynomial,
    g0: Polynomial,
    h: Polynomial | None = None,
    eps: float = 0.2,
) -> float:
    """Iterated integral of f(t) * g0(s) * h(y) against a catalog entry,
    g0 given in the compactified control s = u/(1+|u|) (finite at the
    compactification points by construction)."""
    measure = get_entry(entry, eps) if isinstance(entry, str) else entry
    _require_univariate(f, "f")
    _require_univariate(g0, "g0")
    names = measure.space.names
    if "s" not in names and "r" not in names:
        raise OracleError(
            f"entry over {names} has no compactified control coordinate"
        )
    s_name = "s" if "s" in names else "r"
    product = _lift(f, "t", measure.space) * _lift(g0, s_name, measure.space)
    if h is not None:
        _require_univariate(h, "h")
        if "y" not in names:
            raise OracleError(f"entry over {names} has no state coordinate")
        product = product * _lift(h, "y", measure.space)
    return integrate_poly(measure, product)


def young_integral(
    entry: str | MeasureSpec,
    f: Polynomial,
    g: Polynomial | None = None,
    eps: float = 0.2,
) -> float:
    """Integral of f(t) * g(u) against an uncompactified limit measure."""
    measure = get_entry(entry, eps) if isinstance(entry, str) else entry
    _require_univariate(f, "f")
    product = _lift(f, "t", measure.space)
    if g is not None:
        _require_univariate(g, "g")
        product = product * _lift(g, "u", measure.space)
    return integrate_poly(measure, product)


def _lift(poly: Polynomial, var: str, space: VariableSpace) -> Polynomial:
    try:
        idx = space.index(var)
    except PolyError:
        raise OracleError(f"entry space {space.names} lacks variable {var!r}") from None
    terms = {}
    for exps, coeff in poly.terms.items():
        e = [0] * space.dim
        e[idx] = exps[0]
        terms[tuple(e)] = coeff
    return Polynomial(space, terms)
