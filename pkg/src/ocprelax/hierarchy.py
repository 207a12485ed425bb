"""Order-d moment relaxation of a compactified measure problem.

The moment vector collects all moments of degree <= 2d over the
compactified variables, indexed graded-lexicographically. The relaxation
consists of one linear equality per weak-form test monomial, equality rows
pinning the localizing entries of each support equality to zero, one PSD
moment matrix, and one PSD localizing matrix per support inequality.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
import scipy.sparse as sp

from .compactify import CompactifiedProblem, weak_constraints
from .polyalg import Monomial, Polynomial, VariableSpace


class AssemblyError(ValueError):
    pass


@lru_cache(maxsize=None)
def _basis_exponents(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    out = []

    def rec(prefix, slots, budget):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for e in range(budget + 1):
            rec(prefix + [e], slots - 1, budget - e)

    rec([], dim, degree)
    out.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    return tuple(out)


def moment_basis(space: VariableSpace, d: int) -> list[Monomial]:
    """All monomials of total degree <= d, graded-lex."""
    if d < 0:
        raise AssemblyError("order must be >= 0")
    return [Monomial(e) for e in _basis_exponents(space.dim, d)]


@dataclass(frozen=True)
class MomentIndex:
    """Bijection between monomials of degree <= degree and vector positions."""

    space: VariableSpace
    degree: int
    exponents: tuple[tuple[int, ...], ...]
    position: dict[tuple[int, ...], int]

    @staticmethod
    def build(space: VariableSpace, degree: int) -> "MomentIndex":
        exps = _basis_exponents(space.dim, degree)
        return MomentIndex(space, degree, exps, {e: i for i, e in enumerate(exps)})

    def __len__(self) -> int:
        return len(self.exponents)

    def of(self, exps: tuple[int, ...]) -> int:
        try:
            return self.position[exps]
        except KeyError:
            raise AssemblyError(
                f"monomial {exps} of degree {sum(exps)} exceeds index degree {self.degree}"
            ) from None


@dataclass
class MomentVector:
    index: MomentIndex
    values: np.ndarray | None = None

    def __len__(self):
        return len(self.index)

    def moment(self, exps) -> float:
        if self.values is None:
            raise AssemblyError("moment vector has no values yet")
        return float(self.values[self.index.of(tuple(exps))])

    def marginal(self, name: str, k: int) -> float:
        exps = [0] * self.index.space.dim
        exps[self.index.space.index(name)] = k
        return self.moment(exps)


@dataclass(frozen=True)
class PsdBlock:
    """Symmetric matrix linear in the moment vector.

    entries holds (row, col, variable index, coefficient) with row <= col;
    the (col, row) mirror is implied.
    """

    n: int
    entries: tuple[tuple[int, int, int, float], ...]
    label: str = ""
    diagonal: bool = False  # diagonal blocks act as a nonnegative-orthant cone

    def materialize(self, y: np.ndarray) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for i, j, v, c in self.entries:
            m[i, j] += c * y[v]
            if i != j:
                m[j, i] += c * y[v]
        return m


@dataclass
class ConicProgram:
    objective: np.ndarray           # minimize objective . y
    eq_matrix: sp.csr_matrix
    eq_rhs: np.ndarray
    blocks: list[PsdBlock]
    index: MomentIndex | None = None
    constraint_labels: list[str] = field(default_factory=list)

    @property
    def num_moments(self) -> int:
        return len(self.objective)


def moment_matrix(space: VariableSpace, d: int, index: MomentIndex) -> np.ndarray:
    """Symmetric matrix of moment-vector positions: entry (i, j) is the
    index of basis[i] * basis[j]."""
    basis = _basis_exponents(space.dim, d)
    n = len(basis)
    out = np.empty((n, n), dtype=int)
    for i in range(n):
        for j in range(i, n):
            prod = tuple(a + b for a, b in zip(basis[i], basis[j]))
            out[i, j] = out[j, i] = index.of(prod)
    return out


def localizing_matrix(g: Polynomial, space: VariableSpace, d: int,
                      index: MomentIndex, label: str = "") -> PsdBlock:
    """Localizing matrix of order d for g >= 0: entry (i, j) references
    sum_a g_a * moment(basis[i] * basis[j] * x^a). With g = 1 this is the
    moment matrix itself."""
    order = d - (g.degree() + 1) // 2
    if order < 0:
        raise AssemblyError(
            f"relaxation order {d} too small for constraint of degree {g.degree()}"
        )
    basis = _basis_exponents(space.dim, order)
    entries = []
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            base = tuple(a + b for a, b in zip(basis[i], basis[j]))
            for exps, coeff in g.terms.items():
                prod = tuple(a + b for a, b in zip(base, exps))
                entries.append((i, j, index.of(prod), coeff))
    return PsdBlock(len(basis), tuple(entries), label=label or str(g))


def _poly_row(poly: Polynomial, index: MomentIndex, rows, cols, data, row: int):
    for exps, coeff in poly.terms.items():
        rows.append(row)
        cols.append(index.of(exps))
        data.append(coeff)


def assemble(cp: CompactifiedProblem, d: int) -> ConicProgram:
    """Build the order-d relaxation: equalities from the weak constraints
    and support equalities, PSD blocks from the moment and localizing
    matrices, and the linear objective."""
    space = cp.space
    index = MomentIndex.build(space, 2 * d)

    max_deg = max(
        [cp.objective.degree(), cp.time_weight.degree()]
        + [p.degree() for p in cp.dynamics]
        + [g.degree() for g in cp.inequalities]
        + [h.degree() for h in cp.equalities]
    )
    if 2 * d < max_deg:
        raise AssemblyError(
            f"order {d} too small: problem data has degree {max_deg} > {2 * d}"
        )

    objective = np.zeros(len(index))
    for exps, coeff in cp.objective.terms.items():
        objective[index.of(exps)] += coeff

    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    rhs: list[float] = []
    labels: list[str] = []

    for integrand, value in weak_constraints(cp, 2 * d):
        _poly_row(integrand, index, rows, cols, data, len(rhs))
        rhs.append(value)
        labels.append("weak")

    # Support equalities h = 0: moments of m * h vanish for every monomial m
    # with deg(m) <= 2d - deg(h) (the distinct localizing entries).
    for h in cp.equalities:
        budget = 2 * d - h.degree()
        if budget < 0:
            raise AssemblyError(
                f"order {d} too small for equality constraint of degree {h.degree()}"
            )
        for m_exps in _basis_exponents(space.dim, budget):
            row = len(rhs)
            for exps, coeff in h.terms.items():
                prod = tuple(a + b for a, b in zip(m_exps, exps))
                rows.append(row)
                cols.append(index.of(prod))
                data.append(coeff)
            rhs.append(0.0)
            labels.append(f"equality:{h}")

    eq_matrix = sp.csr_matrix(
        (data, (rows, cols)), shape=(len(rhs), len(index))
    )
    eq_matrix.sum_duplicates()

    one = Polynomial.constant(1.0, space)
    blocks = [localizing_matrix(one, space, d, index, label="moment matrix")]
    for g in cp.inequalities:
        blocks.append(localizing_matrix(g, space, d, index))

    return ConicProgram(
        objective=objective,
        eq_matrix=eq_matrix,
        eq_rhs=np.asarray(rhs),
        blocks=blocks,
        index=index,
        constraint_labels=labels,
    )


def expected_moment_count(dim: int, d: int) -> int:
    return comb(dim + 2 * d, 2 * d)


# ---------------------------------------------------------------------------
# Sparse SDPA export
# ---------------------------------------------------------------------------

def export_sdpa(program: ConicProgram, path) -> None:
    """Write the program in sparse SDPA format (.dat-s).

    Encoding: one primal variable per moment; each PSD block becomes an
    SDPA block; the linear equalities become a diagonal block holding the
    pair (A_j.y - b_j, b_j - A_j.y) >= 0 per row. A comment line documents
    the moment-index mapping so external solutions can be read back.
    """
    lines = []
    if program.index is not None:
        names = ",".join(program.index.space.names)
        lines.append(
            f'"moment variables: graded-lex monomials of degree <= '
            f'{program.index.degree} over ({names})'
        )
    m = program.num_moments
    n_eq = program.eq_matrix.shape[0]
    block_sizes = [b.n for b in program.blocks]
    if n_eq:
        block_sizes.append(-2 * n_eq)
    lines.append(str(m))
    lines.append(str(len(block_sizes)))
    lines.append(" ".join(str(s) for s in block_sizes))
    lines.append(" ".join(repr(float(c)) for c in program.objective))

    entries = []  # (matno, blkno, i, j, value); matno 0 is the constant part

    for bno, block in enumerate(program.blocks, start=1):
        for i, j, v, c in block.entries:
            entries.append((v + 1, bno, i + 1, j + 1, c))

    if n_eq:
        bno = len(program.blocks) + 1
        coo = program.eq_matrix.tocoo()
        for r, c, val in zip(coo.row, coo.col, coo.data):
            entries.append((c + 1, bno, 2 * r + 1, 2 * r + 1, val))
            entries.append((c + 1, bno, 2 * r + 2, 2 * r + 2, -val))
        for r, b_val in enumerate(program.eq_rhs):
            if b_val != 0.0:
                entries.append((0, bno, 2 * r + 1, 2 * r + 1, b_val))
                entries.append((0, bno, 2 * r + 2, 2 * r + 2, -b_val))

    for matno, bno, i, j, val in entries:
        lines.append(f"{matno} {bno} {i} {j} {float(val)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
