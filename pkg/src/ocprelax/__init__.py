"""Measure relaxations of polynomial optimal control problems whose
minimizers oscillate, concentrate, or jump: polynomial algebra, problem
ingestion, compactification to a measure linear program, moment-SDP
assembly and solving, analytic-measure oracles, and minimizing-sequence
simulation."""

from .compactify import CompactifiedProblem, compactify, weak_constraints
from .conicsolve import SolveOptions, SolveResult, solve, verify
from .hierarchy import ConicProgram, MomentIndex, MomentVector, assemble, moment_basis
from .ocpmodel import OcpProblem, load_problem, save_problem, validate
from .oracles import MeasureSpec, anisotropic_integral, catalog, moment_of, table_moment
from .polyalg import Monomial, Polynomial, VariableSpace, parse_poly
from .seqsim import SequenceSpec, convergence_report, integrate, make_sequence

__all__ = [
    "CompactifiedProblem", "ConicProgram", "MeasureSpec", "Monomial",
    "MomentIndex", "MomentVector", "OcpProblem", "Polynomial",
    "SequenceSpec", "SolveOptions", "SolveResult", "VariableSpace",
    "anisotropic_integral", "assemble", "catalog", "compactify",
    "convergence_report", "integrate", "load_problem", "make_sequence",
    "moment_basis", "moment_of", "parse_poly", "save_problem", "solve",
    "table_moment", "validate", "verify", "weak_constraints",
]
__version__ = "0.1.0"
