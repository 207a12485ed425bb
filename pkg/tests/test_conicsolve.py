import numpy as np
import pytest
import scipy.sparse as sp

from ocprelax.conicsolve import (
    ClarabelBackend,
    SolveError,
    SolveOptions,
    SolveResult,
    residuals,
    solve,
    verify,
)
from ocprelax.hierarchy import ConicProgram, PsdBlock, assemble


def tiny_program(rhs0=1.0):
    """min y1  s.t.  [[y0, y1], [y1, y2]] PSD, y0 = rhs0, y2 = 1."""
    block = PsdBlock(2, ((0, 0, 0, 1.0), (0, 1, 1, 1.0), (1, 1, 2, 1.0)))
    eq = sp.csr_matrix(np.array([[1.0, 0, 0], [0, 0, 1.0]]))
    return ConicProgram(
        objective=np.array([0.0, 1.0, 0.0]),
        eq_matrix=eq,
        eq_rhs=np.array([rhs0, 1.0]),
        blocks=[block],
    )


@pytest.mark.parametrize("backend", ["cvxopt", "clarabel"])
def test_tiny_sdp_optimum(backend):
    result = solve(tiny_program(), SolveOptions(backend=backend))
    assert result.status in ("optimal", "near-optimal")
    assert result.bound == pytest.approx(-1.0, abs=1e-6)
    assert result.eq_residual <= 1e-6
    assert result.min_eigenvalue >= -1e-5


@pytest.mark.parametrize("backend", ["cvxopt", "clarabel"])
def test_infeasible_detected(backend):
    program = ConicProgram(
        objective=np.array([1.0]),
        eq_matrix=sp.csr_matrix(np.array([[1.0]])),
        eq_rhs=np.array([-1.0]),
        blocks=[PsdBlock(1, ((0, 0, 0, 1.0),))],
    )
    result = solve(program, SolveOptions(backend=backend))
    assert result.status == "infeasible"
    assert np.isnan(result.bound)
    assert result.moments is None


def test_unknown_backend_rejected():
    with pytest.raises(SolveError, match="unknown backend"):
        solve(tiny_program(), SolveOptions(backend="simplex"))


def test_clarabel_memory_guard():
    big = ConicProgram(
        objective=np.zeros(1),
        eq_matrix=sp.csr_matrix((0, 1)),
        eq_rhs=np.zeros(0),
        blocks=[PsdBlock(210, ((0, 0, 0, 1.0),))],
    )
    with pytest.raises(SolveError, match="too large"):
        ClarabelBackend().solve(big, SolveOptions())


def test_status_is_reverified_not_trusted(jump_compactified):
    program = assemble(jump_compactified, 2)
    result = solve(program, SolveOptions())
    assert result.status in ("optimal", "near-optimal")
    eq, eig = residuals(result.moments.values, program)
    assert eq == result.eq_residual
    assert eig == result.min_eigenvalue
    assert result.bound == pytest.approx(0.31998, abs=5e-5)


def test_verify_flags_corrupted_moments(jump_compactified):
    program = assemble(jump_compactified, 2)
    result = solve(program, SolveOptions())
    report = verify(result, program)
    assert report.clean
    corrupted = result.moments.values.copy()
    corrupted[5] += 1.0
    bad = SolveResult(
        status=result.status,
        bound=result.bound,
        moments=type(result.moments)(program.index, corrupted),
        eq_residual=result.eq_residual,
        min_eigenvalue=result.min_eigenvalue,
        iterations=result.iterations,
        wall_time=result.wall_time,
        solver_status=result.solver_status,
    )
    report = verify(bad, program)
    assert not report.clean


def test_backends_agree(jump_compactified):
    program = assemble(jump_compactified, 2)
    a = solve(program, SolveOptions(backend="cvxopt"))
    b = solve(program, SolveOptions(backend="clarabel"))
    assert a.bound == pytest.approx(b.bound, abs=1e-5)


def test_residuals_of_exact_feasible_point():
    # moments of Lebesgue measure on [0, 1] fill the tiny Hankel program
    program = tiny_program()
    y = np.array([1.0, 0.5, 1.0])
    eq, eig = residuals(y, program)
    assert eq == 0.0
    assert eig >= 0.0
