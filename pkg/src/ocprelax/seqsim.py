"""Minimizing control sequences and exact piecewise integration.

Each named sequence is a piecewise-constant control u_k with its
piecewise-affine trajectory y_k, represented exactly by breakpoints
(powers of two stay exact in binary floating point). On every piece the
control is constant and the trajectory affine, so any integrand that is
polynomial in (t, y) with coefficients depending on u integrates in
closed form; quadrature only ever appears as an independent cross-check
in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy.polynomial.polynomial as npoly

from . import oracles
from .polyalg import Polynomial


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class Piece:
    t0: float
    t1: float
    u: float
    y0: float      # trajectory value at t0
    slope: float   # dy/dt on the piece


@dataclass(frozen=True)
class SequenceSpec:
    name: str
    k: int
    pieces: tuple[Piece, ...]
    eps: float | None = None

    @property
    def terminal_state(self) -> float:
        last = self.pieces[-1]
        return last.y0 + last.slope * (last.t1 - last.t0)

    def state_at(self, t: float) -> float:
        for piece in self.pieces:
            if piece.t0 <= t <= piece.t1:
                return piece.y0 + piece.slope * (t - piece.t0)
        raise SequenceError(f"t={t} outside [0, 1]")

    def control_at(self, t: float) -> float:
        for piece in self.pieces:
            if piece.t0 <= t < piece.t1 or (t == piece.t1 == 1.0):
                return piece.u
        raise SequenceError(f"t={t} outside [0, 1]")


def _build(name, k, segments, slope_of, y_start=0.0, eps=None) -> SequenceSpec:
    """segments: list of (t0, t1, u); the trajectory accumulates exactly."""
    pieces = []
    y = y_start
    for t0, t1, u in segments:
        if t1 <= t0:
            continue
        slope = slope_of(u)
        pieces.append(Piece(t0, t1, u, y, slope))
        y += slope * (t1 - t0)
    if not pieces or abs(pieces[0].t0) > 0 or pieces[-1].t1 != 1.0:
        raise SequenceError(f"{name}: pieces do not cover [0, 1]")
    return SequenceSpec(name, k, tuple(pieces), eps)


def make_sequence(name: str, k: int, eps: float = 0.2) -> SequenceSpec:
    """Construct the named minimizing sequence at index k.

    Names: osc (chattering between -1 and +1), conc (single growing spike),
    oscconc (spike train), spike (one spike at a state jump), updown
    (up-then-down spike), jump (impulsive start, parametrized by eps).
    """
    if k < 1:
        raise SequenceError("k must be >= 1")
    ident = lambda u: u

    if name == "osc":
        if k == 1:
            return _build(name, k, [(0.0, 1.0, 0.0)], ident)
        segs = []
        for l in range(k):
            segs.append((2 * l / (2 * k), (2 * l + 1) / (2 * k), -1.0))
            segs.append(((2 * l + 1) / (2 * k), (2 * l + 2) / (2 * k), 1.0))
        return _build(name, k, segs, ident)

    if name == "conc":
        segs = [
            (0.0, (k - 1) / (2 * k), 0.0),
            ((k - 1) / (2 * k), (k + 1) / (2 * k), float(k)),
            ((k + 1) / (2 * k), 1.0, 0.0),
        ]
        return _build(name, k, segs, ident)

    if name == "oscconc":
        if k == 1:
            return _build(name, k, [(0.0, 1.0, 1.0)], ident)
        segs = []
        prev = 0.0
        half = 1.0 / (2 * k * k)
        for l in range(1, k):
            center = l / k
            segs.append((prev, center - half, 0.0))
            segs.append((center - half, center + half, float(k)))
            prev = center + half
        segs.append((prev, 1.0, 0.0))
        return _build(name, k, segs, ident)

    if name == "spike":
        if k < 2:
            raise SequenceError("spike requires k >= 2")
        segs = [
            (0.0, 0.5, 0.0),
            (0.5, 0.5 + 1.0 / k, float(k)),
            (0.5 + 1.0 / k, 1.0, 0.0),
        ]
        return _build(name, k, segs, ident)

    if name == "updown":
        if k < 2:
            raise SequenceError("updown requires k >= 2")
        segs = [
            (0.0, 0.5 - 1.0 / k, 0.0),
            (0.5 - 1.0 / k, 0.5, float(k)),
            (0.5, 0.5 + 1.0 / k, -2.0 * k),
            (0.5 + 1.0 / k, 1.0, 0.0),
        ]
        return _build(name, k, segs, ident)

    if name == "jump":
        if not 0.0 < eps < 1.0:
            raise SequenceError("eps must lie in (0, 1)")
        rate = k * (1.0 - eps) + eps
        u_val = math.sqrt(rate**2 - eps**2)
        segs = [(0.0, 1.0 / k, u_val)]
        if k > 1:
            segs.append((1.0 / k, 1.0, 0.0))
        return _build(name, k, segs, lambda u: math.sqrt(eps**2 + u**2), eps=eps)

    raise SequenceError(f"unknown sequence {name!r}")


# ---------------------------------------------------------------------------
# Exact piecewise integration
# ---------------------------------------------------------------------------

def _coeffs1d(poly: Polynomial | None):
    if poly is None:
        return [1.0]
    if poly.space.dim != 1:
        raise SequenceError("test function must be a polynomial in one variable")
    deg = poly.degree()
    out = [0.0] * (deg + 1)
    for exps, coeff in poly.terms.items():
        out[exps[0]] = coeff
    return out if out else [0.0]


def _piece_integral(piece: Piece, f_coeffs, h_coeffs) -> float:
    """Exact integral over the piece of f(t) * h(y0 + slope*(t - t0))."""
    y_affine = [piece.y0 - piece.slope * piece.t0, piece.slope]
    # compose h with the affine trajectory, then multiply by f
    comp = [0.0]
    power = [1.0]
    for c in h_coeffs:
        comp = npoly.polyadd(comp, npoly.polymul([c], power))
        power = npoly.polymul(power, y_affine)
    integrand = npoly.polymul(f_coeffs, comp)
    anti = npoly.polyint(integrand)
    return float(npoly.polyval(piece.t1, anti) - npoly.polyval(piece.t0, anti))


def compactified_control(u: float) -> float:
    """s = u / (1 + |u|), the two-point compactification coordinate."""
    return u / (1.0 + abs(u))


def integrate(
    seq: SequenceSpec,
    f: Polynomial | None = None,
    g0: Polynomial | None = None,
    h: Polynomial | None = None,
    p: int = 1,
) -> float:
    """Exact value of  int_0^1 f(t) g0(s(u_k)) (1 + |u_k|^p) h(y_k) dt."""
    f_coeffs = _coeffs1d(f)
    g0_coeffs = _coeffs1d(g0)
    h_coeffs = _coeffs1d(h)
    total = 0.0
    for piece in seq.pieces:
        s = compactified_control(piece.u)
        scale = float(npoly.polyval(s, g0_coeffs)) * (1.0 + abs(piece.u) ** p)
        if scale:
            total += scale * _piece_integral(piece, f_coeffs, h_coeffs)
    return total


def integrate_young(
    seq: SequenceSpec,
    f: Polynomial | None = None,
    g: Polynomial | None = None,
    h: Polynomial | None = None,
) -> float:
    """Exact value of  int_0^1 f(t) g(u_k) h(y_k) dt  (no growth weight)."""
    f_coeffs = _coeffs1d(f)
    g_coeffs = _coeffs1d(g)
    h_coeffs = _coeffs1d(h)
    total = 0.0
    for piece in seq.pieces:
        scale = float(npoly.polyval(piece.u, g_coeffs))
        if scale:
            total += scale * _piece_integral(piece, f_coeffs, h_coeffs)
    return total


def integrate_lagrangian(seq: SequenceSpec, integrand_of_u) -> float:
    """Exact integral of a per-piece integrand: integrand_of_u(u) returns
    (f_coeffs, h_coeffs) pairs whose products f(t) * h(y) are summed."""
    total = 0.0
    for piece in seq.pieces:
        for f_coeffs, h_coeffs in integrand_of_u(piece.u):
            total += _piece_integral(piece, f_coeffs, h_coeffs)
    return total


def cost(seq: SequenceSpec) -> float:
    """Exact cost of the sequence under its benchmark Lagrangian."""
    name = seq.name
    if name == "osc":
        # (u^2 - 1)^2 + y^2
        return integrate_lagrangian(
            seq, lambda u: [([(u * u - 1.0) ** 2], [1.0]), ([1.0], [0.0, 0.0, 1.0])]
        )
    if name == "conc":
        # (t - 1/2)^2 * u
        return integrate_lagrangian(
            seq, lambda u: [([0.25 * u, -u, u], [1.0])]
        )
    if name == "oscconc":
        # u^2/(1 + u^4) + (y - t)^2; expand (y - t)^2 = y^2 - 2ty + t^2
        def pieces(u):
            c = u * u / (1.0 + u**4)
            return [
                ([c], [1.0]),
                ([1.0], [0.0, 0.0, 1.0]),
                ([0.0, -2.0], [0.0, 1.0]),
                ([0.0, 0.0, 1.0], [1.0]),
            ]

        return integrate_lagrangian(seq, pieces)
    if name == "jump":
        # (t + y) * u
        return integrate_lagrangian(
            seq, lambda u: [([0.0, u], [1.0]), ([u], [0.0, 1.0])]
        )
    raise SequenceError(f"sequence {name!r} has no benchmark cost")


# ---------------------------------------------------------------------------
# Convergence reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    k: int
    value: float
    error: float


def oracle_limit(
    name: str,
    f: Polynomial | None,
    g0: Polynomial | None,
    h: Polynomial | None,
    eps: float = 0.2,
) -> float:
    """Limit value of the weighted integral against the matching catalog
    entry. The chattering and concentration entries use the unweighted
    (Young) pairing; the rest pair compactified test functions."""
    entry = oracles.get_entry(name, eps)
    if name in ("osc", "conc"):
        if g0 is not None and "u" in entry.space.names:
            return oracles.young_integral(entry, _as_poly(f), g0)
        return oracles.young_integral(entry, _as_poly(f))
    return oracles.anisotropic_integral(entry, _as_poly(f), _as_poly(g0), h)


def _as_poly(poly) -> Polynomial:
    if poly is None:
        from .polyalg import VariableSpace

        return Polynomial.constant(1.0, VariableSpace.of("s"))
    return poly


def convergence_report(
    name: str,
    f: Polynomial | None = None,
    g0: Polynomial | None = None,
    h: Polynomial | None = None,
    k_list=(2, 4, 8, 16, 32, 64, 128, 256, 512, 1024),
    p: int = 1,
    eps: float = 0.2,
) -> tuple[list[ConvergenceRow], float]:
    """Evaluate the weighted integral along the sequence for each k and
    report the distance to the oracle limit."""
    limit = oracle_limit(name, f, g0, h, eps)
    rows = []
    for k in k_list:
        seq = make_sequence(name, int(k), eps)
        if name in ("osc", "conc"):
            value = integrate_young(seq, f, g0, h)
        else:
            value = integrate(seq, f, g0, h, p=p)
        rows.append(ConvergenceRow(int(k), value, abs(value - limit)))
    return rows, limit


def richardson(rows: list[ConvergenceRow]) -> float:
    """Extrapolate the k -> infinity value assuming an O(1/k) error from
    the last two entries of a geometric k grid."""
    if len(rows) < 2:
        raise SequenceError("need at least two rows to extrapolate")
    a, b = rows[-2], rows[-1]
    ratio = b.k / a.k
    return (ratio * b.value - a.value) / (ratio - 1.0)
