import math
import random

import pytest

from ocprelax.oracles import jump_objective_value
from ocprelax.polyalg import Polynomial, VariableSpace, parse_poly
from ocprelax.seqsim import (
    SequenceError,
    compactified_control,
    convergence_report,
    cost,
    integrate,
    integrate_young,
    make_sequence,
    oracle_limit,
    richardson,
)

T = VariableSpace.of("t")
S = VariableSpace.of("s")
Y = VariableSpace.of("y")
U = VariableSpace.of("u")


def poly_t(text):
    return parse_poly(text, T)


@pytest.mark.parametrize(
    "name,k,terminal",
    [
        ("osc", 8, 0.0),
        ("conc", 8, 1.0),
        ("spike", 8, 1.0),
        ("jump", 8, 1.0),
        ("updown", 8, -1.0),
        ("oscconc", 8, 7 / 8),
    ],
)
def test_terminal_states(name, k, terminal):
    seq = make_sequence(name, k)
    assert seq.terminal_state == pytest.approx(terminal, abs=1e-14)


def test_pieces_cover_horizon():
    for name in ("osc", "conc", "oscconc", "spike", "updown", "jump"):
        for k in (2, 4, 64):
            seq = make_sequence(name, k)
            assert seq.pieces[0].t0 == 0.0
            assert seq.pieces[-1].t1 == 1.0
            for a, b in zip(seq.pieces, seq.pieces[1:]):
                assert a.t1 == b.t0


def test_conc_cost_exact():
    for k in (2, 4, 8, 64, 1024, 4096):
        seq = make_sequence("conc", k)
        assert cost(seq) == pytest.approx(1 / (12 * k * k), abs=1e-12)


def test_osc_cost_decays():
    for i in range(1, 13):
        k = 2**i
        assert 0 < cost(make_sequence("osc", k)) <= 2 / k


def test_jump_cost_converges():
    limit = jump_objective_value(0.2)
    errors = [abs(cost(make_sequence("jump", 2**i, 0.2)) - limit) for i in (2, 5, 8)]
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] < 1e-2


def test_oscconc_cost_decays():
    values = [cost(make_sequence("oscconc", 2**i)) for i in (2, 4, 6, 8)]
    assert values == sorted(values, reverse=True)
    assert values[-1] < 0.02


def test_spike_exact_derivative_pairing():
    # g0 = s weighted by (1 + |u|) recovers g(u) = u, so the integral is
    # int 2 y y' dt = y(1)^2 - y(0)^2 = 1 for every k
    s = parse_poly("s", S)
    two_y = parse_poly("2*y", Y)
    for k in (2, 8, 128):
        seq = make_sequence("spike", k)
        assert integrate(seq, None, s, two_y) == pytest.approx(1.0, abs=1e-12)


def test_weighted_integral_against_quadrature():
    rng = random.Random(1)
    for _ in range(40):
        name = rng.choice(["spike", "updown", "jump", "osc", "conc", "oscconc"])
        k = rng.choice([2, 3, 4, 7, 8])
        seq = make_sequence(name, k)
        f = poly_t(f"{rng.uniform(-1, 1):.3f} + {rng.uniform(-1, 1):.3f}*t^2")
        g0 = parse_poly(f"{rng.uniform(-1, 1):.3f} + {rng.uniform(-1, 1):.3f}*s", S)
        h = parse_poly(f"1 + {rng.uniform(-1, 1):.3f}*y", Y)
        exact = integrate(seq, f, g0, h, p=1)
        total = 0.0
        n = 2000
        for piece in seq.pieces:
            width = piece.t1 - piece.t0
            scale = g0.evaluate((compactified_control(piece.u),)) * (1 + abs(piece.u))
            for i in range(n):
                t = piece.t0 + (i + 0.5) / n * width
                y = piece.y0 + piece.slope * (t - piece.t0)
                total += scale * f.evaluate((t,)) * h.evaluate((y,)) * width / n
        assert exact == pytest.approx(total, abs=1e-6 * (1 + abs(exact)))


def test_young_integral_against_quadrature():
    seq = make_sequence("osc", 4)
    f = poly_t("t^2")
    g = parse_poly("u + u^2", U)
    exact = integrate_young(seq, f, g)
    n = 40000
    total = sum(
        f.evaluate(((i + 0.5) / n,))
        * g.evaluate((seq.control_at((i + 0.5) / n),))
        for i in range(n)
    ) / n
    assert exact == pytest.approx(total, abs=1e-4)


def test_convergence_report_trend():
    f = poly_t("1 + t")
    g0 = parse_poly("1 - s^2", S)
    h = parse_poly("y", Y)
    rows, limit = convergence_report(
        "spike", f, g0, h, k_list=[2**i for i in range(2, 11)]
    )
    assert rows[-1].error <= rows[0].error
    assert rows[-1].error < 1e-2
    assert math.isfinite(limit)


def test_richardson_extrapolation():
    f = poly_t("1")
    g0 = Polynomial.constant(1.0, S)
    h = parse_poly("2*y", Y)
    rows, limit = convergence_report(
        "spike", f, g0, h, k_list=[2**i for i in range(4, 13)]
    )
    assert limit == pytest.approx(2.0, abs=1e-12)
    assert abs(richardson(rows) - limit) < rows[-1].error


def test_osc_young_limit_zero():
    rows, limit = convergence_report(
        "osc", poly_t("t"), parse_poly("u", U), None,
        k_list=[2**i for i in range(1, 11)],
    )
    assert limit == 0.0
    assert rows[-1].error < 1e-3


def test_bad_sequence_arguments():
    with pytest.raises(SequenceError):
        make_sequence("osc", 0)
    with pytest.raises(SequenceError):
        make_sequence("warp", 4)
    with pytest.raises(SequenceError):
        make_sequence("jump", 4, eps=1.5)
    with pytest.raises(SequenceError):
        cost(make_sequence("spike", 4))


def test_oracle_limit_matches_measures():
    f = poly_t("1 - t")
    g0 = parse_poly("s^2", S)
    h = parse_poly("y^2", Y)
    val = oracle_limit("updown", f, g0, h)
    assert math.isfinite(val)
    rows, limit = convergence_report(
        "updown", f, g0, h, k_list=[2**i for i in range(6, 13)]
    )
    assert limit == val
    assert rows[-1].error <= 2.0 / rows[-1].k * 4 + 1e-9
