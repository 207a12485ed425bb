import pytest

from ocprelax.oracles import (
    OracleError,
    anisotropic_integral,
    catalog,
    get_entry,
    jump_measure,
    jump_objective_value,
    spike_triplet,
    table_moment,
    updown_triplet,
    young_integral,
)
from ocprelax.polyalg import Polynomial, VariableSpace, parse_poly

# Published reference marginals of the jump benchmark at eps = 0.2, rounded
# to 4 decimals (order-6 relaxation; 13 degrees x 4 variables).
REFERENCE_MARGINALS = {
    "t": [1.8000, 0.5000, 0.3333, 0.2500, 0.2000, 0.1667, 0.1429,
          0.1250, 0.1111, 0.1000, 0.0909, 0.0833, 0.0769],
    "y": [1.8000, 1.2200, 0.9840, 0.8404, 0.7379, 0.6586, 0.5944,
          0.5411, 0.4959, 0.4571, 0.4233, 0.3938, 0.3677],
    "r": [1.8000, 0.8000, 0.8000, 0.8000, 0.8000, 0.8000, 0.8000,
          0.8000, 0.8000, 0.8000, 0.8000, 0.8000, 0.8000],
    "w": [1.8000, 1.0000, 0.8400, 0.8080, 0.8016, 0.8003, 0.8001,
          0.8000, 0.8000, 0.8000, 0.8000, 0.8000, 0.8000],
}

SPACE = VariableSpace.of("t", "y", "r", "w")


def marginal_exps(name, k):
    i = SPACE.index(name)
    return tuple(k if j == i else 0 for j in range(4))


def test_reference_marginals_all_52():
    measure = jump_measure(0.2)
    for name, column in REFERENCE_MARGINALS.items():
        for k, ref in enumerate(column):
            got = measure.moment(marginal_exps(name, k))
            assert got == pytest.approx(ref, abs=5e-5), (name, k)


@pytest.mark.parametrize("eps", [0.1, 0.2, 0.5, 0.9])
def test_closed_form_matches_integration(eps):
    measure = jump_measure(eps)
    for name in ("t", "y", "r", "w"):
        for k in range(13):
            assert measure.moment(marginal_exps(name, k)) == pytest.approx(
                table_moment(name, k, eps), abs=1e-12
            )


@pytest.mark.parametrize("eps", [0.1, 0.2, 0.5])
def test_objective_moment_closed_form(eps):
    measure = jump_measure(eps)
    value = measure.moment((1, 0, 1, 0)) + measure.moment((0, 1, 1, 0))
    assert value == pytest.approx(jump_objective_value(eps), abs=1e-12)
    assert jump_objective_value(eps) == pytest.approx((1 - eps) ** 2 / 2)


def test_total_masses():
    entries = catalog(0.2)
    assert entries["jump"].mass() == pytest.approx(1.8)
    assert entries["osc"].mass() == pytest.approx(1.0)
    assert entries["conc"].mass() == pytest.approx(1.0)
    assert entries["oscconc"].mass() == pytest.approx(2.0)
    assert entries["spike"].mass() == pytest.approx(2.0)
    assert entries["updown"].mass() == pytest.approx(4.0)


def test_conditionals_are_probabilities():
    for triplet in (spike_triplet(), updown_triplet()):
        for mass in triplet.conditional_masses():
            assert mass == pytest.approx(1.0, abs=1e-14)


def test_unknown_entry():
    with pytest.raises(OracleError, match="no oracle registered"):
        get_entry("bang-bang")


def test_bad_eps():
    for eps in (0.0, 1.0, -0.3):
        with pytest.raises(OracleError):
            jump_measure(eps)


def test_spot_values():
    one_t = Polynomial.constant(1.0, VariableSpace.of("t"))
    s = parse_poly("s", VariableSpace.of("s"))
    one_s = Polynomial.constant(1.0, VariableSpace.of("s"))
    two_y = parse_poly("2*y", VariableSpace.of("y"))
    assert anisotropic_integral("spike", one_t, s, two_y) == pytest.approx(1.0, abs=1e-12)
    assert anisotropic_integral("spike", one_t, one_s, two_y) == pytest.approx(2.0, abs=1e-12)
    assert anisotropic_integral("updown", one_t, one_s, two_y) == pytest.approx(0.0, abs=1e-12)


def test_young_integral_symmetry():
    t = parse_poly("t", VariableSpace.of("t"))
    u = parse_poly("u", VariableSpace.of("u"))
    # the chattering measure is symmetric in the control
    assert young_integral("osc", t, u) == pytest.approx(0.0, abs=1e-14)
    assert young_integral("osc", t, u * u) == pytest.approx(0.5, abs=1e-14)
    # the concentration limit evaluates time test functions at 1/2
    f = parse_poly("t^2", VariableSpace.of("t"))
    assert young_integral("conc", f) == pytest.approx(0.25, abs=1e-14)


def test_anisotropic_requires_univariate():
    ty = parse_poly("t*y", VariableSpace.of("t", "y"))
    one_s = Polynomial.constant(1.0, VariableSpace.of("s"))
    with pytest.raises(OracleError, match="one variable"):
        anisotropic_integral("spike", ty, one_s)


def test_mixed_moment_consistency():
    # sheet: y = 1 - eps + eps * t with r = 0, w = eps; atom at t = 0 with
    # r = 1, w = 1, y uniform on [0, 1 - eps]
    eps = 0.2
    measure = jump_measure(eps)
    # E[t * y] over the sheet only (atom sits at t = 0)
    sheet = (1 - eps) / 2 + eps / 3
    assert measure.moment((1, 1, 0, 0)) == pytest.approx(sheet, abs=1e-12)
    # E[y * r]: the sheet has r = 0, the atom averages y over [0, 1 - eps]
    atom = (1 - eps) * (1 - eps) / 2
    assert measure.moment((0, 1, 1, 0)) == pytest.approx(atom, abs=1e-12)
