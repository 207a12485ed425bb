"""Solve an assembled moment relaxation and re-verify the result.

The backend is an adapter (set data, solve, read primal); the default is
the CVXOPT interior-point solver on the natural conic form

    min  c . y   s.t.  A y = b,   M_k(y) PSD for every block k.

CVXOPT forms a Schur complement of size num_moments, so memory stays flat
as the matrix blocks grow; Clarabel is kept as an independent cross-check
but its KKT system carries a dense scaling block per PSD cone and is only
practical for the smaller relaxations.

The reported status is always re-derived from freshly computed residuals,
never taken from the solver's own claim.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hierarchy import ConicProgram, MomentVector, PsdBlock

# Post-solve verification thresholds for calling a result "optimal".
VERIFIED_EQ_TOL = 1e-7
VERIFIED_EIG_TOL = -1e-7


class SolveError(RuntimeError):
    pass


@dataclass
class SolveOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    verbose: bool = False
    backend: str = "cvxopt"


@dataclass
class ResidualReport:
    eq_residual: float
    min_eigenvalue: float
    flags: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.flags


@dataclass
class SolveResult:
    status: str                    # optimal | near-optimal | infeasible | unbounded | numerical-failure
    bound: float
    moments: MomentVector | None
    eq_residual: float
    min_eigenvalue: float
    iterations: int
    wall_time: float
    solver_status: str


def _svec_operator(block: PsdBlock, num_vars: int) -> sp.csc_matrix:
    """Sparse map y -> svec(M(y)) in Clarabel's scaled upper-triangle
    (column-stacked, off-diagonals times sqrt(2)) convention."""
    n = block.n
    tri_index = {}
    k = 0
    for col in range(n):
        for row in range(col + 1):
            tri_index[(row, col)] = k
            k += 1
    rows, cols, data = [], [], []
    r2 = np.sqrt(2.0)
    for i, j, v, c in block.entries:
        a, b = (i, j) if i <= j else (j, i)
        rows.append(tri_index[(a, b)])
        cols.append(v)
        data.append(c if a == b else r2 * c)
    return sp.csc_matrix((data, (rows, cols)), shape=(k, num_vars))


def _diag_operator(block: PsdBlock, num_vars: int) -> sp.csc_matrix:
    rows, cols, data = [], [], []
    for i, j, v, c in block.entries:
        if i != j:
            raise SolveError("diagonal block with off-diagonal entry")
        rows.append(i)
        cols.append(v)
        data.append(c)
    return sp.csc_matrix((data, (rows, cols)), shape=(block.n, num_vars))


# Refuse Clarabel runs whose dense PSD scaling blocks cannot fit in memory.
CLARABEL_SCALING_BUDGET = 1.5e9

class ClarabelBackend:
    """Interior-point conic backend (PSD + zero + nonnegative cones).

    Used for cross-checks; KKT memory grows with the fourth power of the
    largest block size, so large relaxations are rejected up front.
    """

    name = "clarabel"

    def solve(self, program: ConicProgram, opts: SolveOptions):
        import clarabel

        scaling_bytes = sum(
            (block.n * (block.n + 1) // 2) ** 2 * 8
            for block in program.blocks
            if not block.diagonal
        )
        if scaling_bytes > CLARABEL_SCALING_BUDGET:
            raise SolveError(
                "program too large for the clarabel backend "
                f"(~{scaling_bytes / 1e9:.1f} GB of PSD scaling blocks); "
                "use the cvxopt backend"
            )

        n = program.num_moments
        cones = []
        mats = []
        rhs_parts = []
        n_eq = program.eq_matrix.shape[0]
        if n_eq:
            cones.append(clarabel.ZeroConeT(n_eq))
            mats.append(sp.csc_matrix(program.eq_matrix))
            rhs_parts.append(np.asarray(program.eq_rhs, dtype=float))
        for block in program.blocks:
            if block.diagonal:
                cones.append(clarabel.NonnegativeConeT(block.n))
                op = _diag_operator(block, n)
            else:
                cones.append(clarabel.PSDTriangleConeT(block.n))
                op = _svec_operator(block, n)
            mats.append(-op)  # A y + s = 0 with s = svec(M(y)) in the cone
            rhs_parts.append(np.zeros(op.shape[0]))

        A = sp.vstack(mats, format="csc")
        b = np.concatenate(rhs_parts)
        P = sp.csc_matrix((n, n))
        q = np.asarray(program.objective, dtype=float)

        settings = clarabel.DefaultSettings()
        settings.verbose = opts.verbose
        settings.max_iter = opts.max_iter
        settings.tol_feas = opts.feas_tol
        settings.tol_gap_abs = opts.gap_tol
        settings.tol_gap_rel = opts.gap_tol

        solver = clarabel.DefaultSolver(P, q, A, b, cones, settings)
        sol = solver.solve()
        status = str(sol.status)
        mapping = {
            "Solved": "solved",
            "AlmostSolved": "almost-solved",
            "PrimalInfeasible": "infeasible",
            "AlmostPrimalInfeasible": "infeasible",
            "DualInfeasible": "unbounded",
            "AlmostDualInfeasible": "unbounded",
        }
        outcome = mapping.get(status, "failure")
        x = np.asarray(sol.x) if outcome in ("solved", "almost-solved") else None
        return x, outcome, status, int(sol.iterations)


class CvxoptBackend:
    """Default interior-point backend (Schur-complement KKT, flat memory)."""

    name = "cvxopt"

    def solve(self, program: ConicProgram, opts: SolveOptions):
        import cvxopt

        cvxopt.solvers.options["show_progress"] = opts.verbose
        cvxopt.solvers.options["maxiters"] = opts.max_iter
        n = program.num_moments
        c = cvxopt.matrix(np.asarray(program.objective, dtype=float))

        Gs, hs = [], []
        Gl_rows, hl = None, None
        for block in program.blocks:
            rows, cols, data = [], [], []
            for i, j, v, coeff in block.entries:
                # cvxopt wants -vec(M(y)) <= 0 in full column-major layout
                rows.append(i * block.n + j)
                cols.append(v)
                data.append(-coeff)
                if i != j:
                    rows.append(j * block.n + i)
                    cols.append(v)
                    data.append(-coeff)
            Gs.append(
                cvxopt.spmatrix(data, rows, cols, (block.n * block.n, n))
            )
            hs.append(cvxopt.matrix(np.zeros((block.n, block.n))))

        A_coo = program.eq_matrix.tocoo()
        A = cvxopt.spmatrix(
            A_coo.data.tolist(),
            A_coo.row.tolist(),
            A_coo.col.tolist(),
            (program.eq_matrix.shape[0], n),
        )
        b = cvxopt.matrix(np.asarray(program.eq_rhs, dtype=float))
        sol = cvxopt.solvers.sdp(c, Gs=Gs, hs=hs, A=A, b=b)
        status = sol["status"]
        if status in ("optimal", "unknown") and sol["x"] is not None:
            outcome = "solved" if status == "optimal" else "almost-solved"
            return np.asarray(sol["x"]).ravel(), outcome, status, 0
        if status == "primal infeasible":
            return None, "infeasible", status, 0
        if status == "dual infeasible":
            return None, "unbounded", status, 0
        return None, "failure", status, 0


_BACKENDS = {"clarabel": ClarabelBackend, "cvxopt": CvxoptBackend}


def residuals(y: np.ndarray, program: ConicProgram) -> tuple[float, float]:
    if program.eq_matrix.shape[0]:
        eq = float(np.max(np.abs(program.eq_matrix @ y - program.eq_rhs)))
    else:
        eq = 0.0
    min_eig = np.inf
    for block in program.blocks:
        m = block.materialize(y)
        if block.diagonal:
            min_eig = min(min_eig, float(np.min(np.diag(m))))
        else:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(m)[0]))
    return eq, float(min_eig)


def solve(program: ConicProgram, opts: SolveOptions | None = None) -> SolveResult:
    opts = opts or SolveOptions()
    try:
        backend = _BACKENDS[opts.backend]()
    except KeyError:
        raise SolveError(f"unknown backend {opts.backend!r}") from None
    start = time.perf_counter()
    y, outcome, solver_status, iterations = backend.solve(program, opts)
    wall = time.perf_counter() - start

    if y is None:
        status = outcome if outcome in ("infeasible", "unbounded") else "numerical-failure"
        return SolveResult(
            status=status,
            bound=float("nan"),
            moments=None,
            eq_residual=float("nan"),
            min_eigenvalue=float("nan"),
            iterations=iterations,
            wall_time=wall,
            solver_status=solver_status,
        )

    eq, min_eig = residuals(y, program)
    bound = float(program.objective @ y)
    if outcome == "solved" and eq <= VERIFIED_EQ_TOL and min_eig >= VERIFIED_EIG_TOL:
        status = "optimal"
    elif eq <= 1e-5 and min_eig >= -1e-5:
        status = "near-optimal"
    else:
        status = "numerical-failure"
    moments = MomentVector(program.index, np.asarray(y)) if program.index else None
    return SolveResult(
        status=status,
        bound=bound,
        moments=moments,
        eq_residual=eq,
        min_eigenvalue=min_eig,
        iterations=iterations,
        wall_time=wall,
        solver_status=solver_status,
    )


def verify(result: SolveResult, program: ConicProgram) -> ResidualReport:
    """Recompute all residuals from scratch and flag invariant breaches."""
    if result.moments is None or result.moments.values is None:
        return ResidualReport(float("nan"), float("nan"), ["no moments to verify"])
    eq, min_eig = residuals(result.moments.values, program)
    flags = []
    if result.status == "optimal" and eq > VERIFIED_EQ_TOL:
        flags.append(f"equality residual {eq:.3e} exceeds {VERIFIED_EQ_TOL:.0e}")
    if result.status == "optimal" and min_eig < VERIFIED_EIG_TOL:
        flags.append(f"min eigenvalue {min_eig:.3e} below {VERIFIED_EIG_TOL:.0e}")
    if result.status not in ("optimal", "near-optimal"):
        if eq > 1e-5 or min_eig < -1e-5:
            flags.append("residuals inconsistent with feasible moments")
    elif eq > 1e-5:
        flags.append(f"equality residual {eq:.3e} too large for status {result.status}")
    return ResidualReport(eq, min_eig, flags)


# ---------------------------------------------------------------------------
# Sparse SDPA import (round-trip with hierarchy.export_sdpa)
# ---------------------------------------------------------------------------

def load_sdpa(path) -> ConicProgram:
    """Read a sparse SDPA file into a ConicProgram. Diagonal (negative-size)
    blocks become nonnegative-orthant blocks; there are no equality rows in
    the imported form, so bounds agree with the exporting program but the
    structure is the inequality-pair encoding."""
    tokens_lines = []
    with open(path) as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith(('"', "*")):
                continue
            tokens_lines.append(stripped)
    m = int(tokens_lines[0].split()[0])
    nblocks = int(tokens_lines[1].split()[0])
    sizes = [int(s) for s in tokens_lines[2].replace(",", " ").split()]
    if len(sizes) != nblocks:
        raise SolveError("SDPA header: block count mismatch")
    c = np.array([float(v) for v in tokens_lines[3].replace(",", " ").split()])
    if len(c) != m:
        raise SolveError("SDPA header: objective length mismatch")

    # entries[block] maps variable -> list of (i, j, value); matno 0 is F0
    per_block: list[dict[int, list[tuple[int, int, float]]]] = [
        {} for _ in range(nblocks)
    ]
    for line in tokens_lines[4:]:
        parts = line.replace(",", " ").split()
        matno, bno, i, j, val = (
            int(parts[0]),
            int(parts[1]),
            int(parts[2]),
            int(parts[3]),
            float(parts[4]),
        )
        per_block[bno - 1].setdefault(matno, []).append((i - 1, j - 1, val))

    # One extra variable slot is never added: constants F0 enter via an
    # affine shift, which the exporter only uses on diagonal blocks. The
    # imported program keeps them as explicit rows with shifted variables.
    blocks = []
    shift_rows = []
    for size, ent in zip(sizes, per_block):
        diagonal = size < 0
        n = -size if diagonal else size
        entries = []
        consts = {}
        for matno, items in ent.items():
            for i, j, val in items:
                if matno == 0:
                    consts[(i, j)] = consts.get((i, j), 0.0) - val
                else:
                    a, b = (i, j) if i <= j else (j, i)
                    entries.append((a, b, matno - 1, val))
        blocks.append(
            PsdBlock(n, tuple(entries), label="imported", diagonal=diagonal)
        )
        shift_rows.append(consts)

    program = ConicProgram(
        objective=c,
        eq_matrix=sp.csr_matrix((0, m)),
        eq_rhs=np.zeros(0),
        blocks=blocks,
        index=None,
    )
    # Constant offsets appear only on diagonal blocks in our exporter; fold
    # them by augmenting the block with a synthetic constant if present.
    for block, consts in zip(program.blocks, shift_rows):
        if consts and not block.diagonal:
            raise SolveError("constant offset on a PSD block is not supported")
    if any(shift_rows):
        program = _fold_constants(program, shift_rows)
    return program


def _fold_constants(program: ConicProgram, shift_rows) -> ConicProgram:
    """Append a synthetic variable pinned to 1 to carry constant offsets."""
    m = program.num_moments
    blocks = []
    for block, consts in zip(program.blocks, shift_rows):
        entries = list(block.entries)
        for (i, j), val in consts.items():
            entries.append((i, j, m, val))
        blocks.append(PsdBlock(block.n, tuple(entries), block.label, block.diagonal))
    eq = sp.csr_matrix(([1.0], ([0], [m])), shape=(1, m + 1))
    return ConicProgram(
        objective=np.concatenate([program.objective, [0.0]]),
        eq_matrix=eq,
        eq_rhs=np.array([1.0]),
        blocks=blocks,
        index=None,
    )
