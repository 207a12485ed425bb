"""Sparse multivariate polynomials over a fixed, ordered set of variables.

Everything downstream (problem files, measure relaxations, moment indexing)
manipulates these polynomials, so the representation is deliberately small:
a term map from exponent vectors to float coefficients, canonicalized after
every arithmetic operation. Monomials are ordered graded-lexicographically
by the variable order of the ambient space, which keeps moment indices
deterministic across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

# Coefficients below this magnitude are dropped during canonicalization.
COEFF_TOL = 1e-14

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


class PolyError(ValueError):
    pass


class ParseError(PolyError):
    """Syntax or lookup error while parsing polynomial text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class VariableSpace:
    """Ordered, fixed list of variable names."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise PolyError(f"duplicate variable names in {self.names}")
        for n in self.names:
            if not _NAME_RE.match(n):
                raise PolyError(f"invalid variable name {n!r}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise PolyError(f"unknown variable {name!r} in space {self.names}") from None

    @staticmethod
    def of(*names: str) -> "VariableSpace":
        return VariableSpace(tuple(names))


@dataclass(frozen=True)
class Monomial:
    """Exponent vector over an ambient VariableSpace (one slot per variable)."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise PolyError(f"negative exponent in {self.exponents}")

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def sort_key(self):
        # graded lex: lower total degree first, then first variable dominant
        return (self.degree, tuple(-e for e in self.exponents))

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), tuple(-e for e in exps))


@dataclass(frozen=True)
class Polynomial:
    """Canonical sparse polynomial: no stored zero coefficients."""

    space: VariableSpace
    terms: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(space: VariableSpace) -> "Polynomial":
        return Polynomial(space, {})

    @staticmethod
    def constant(value: float, space: VariableSpace) -> "Polynomial":
        return _canonical(space, {(0,) * space.dim: float(value)})

    @staticmethod
    def variable(name: str, space: VariableSpace) -> "Polynomial":
        exps = [0] * space.dim
        exps[space.index(name)] = 1
        return Polynomial(space, {tuple(exps): 1.0})

    @staticmethod
    def monomial(exps: Iterable[int], coeff: float, space: VariableSpace) -> "Polynomial":
        return _canonical(space, {tuple(exps): float(coeff)})

    # -- queries ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, name: str) -> int:
        i = self.space.index(name)
        return max((e[i] for e in self.terms), default=0)

    def coefficient(self, exps: Iterable[int]) -> float:
        return self.terms.get(tuple(exps), 0.0)

    def monomials(self) -> list[Monomial]:
        return [Monomial(e) for e in sorted(self.terms, key=_grlex_key)]

    # -- arithmetic ---------------------------------------------------

    def _check_space(self, other: "Polynomial"):
        if self.space != other.space:
            raise PolyError(f"space mismatch: {self.space.names} vs {other.space.names}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other, self.space)
        self._check_space(other)
        acc = dict(self.terms)
        for e, c in other.terms.items():
            acc[e] = acc.get(e, 0.0) + c
        return _canonical(self.space, acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.space, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other, self.space)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return _canonical(self.space, {e: c * other for e, c in self.terms.items()})
        self._check_space(other)
        acc: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0.0) + c1 * c2
        return _canonical(self.space, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise PolyError("exponent must be a non-negative integer")
        out = Polynomial.constant(1.0, self.space)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # -- calculus and substitution ------------------------------------

    def differentiate(self, name: str) -> "Polynomial":
        i = self.space.index(name)
        acc: dict[tuple[int, ...], float] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            d = list(e)
            d[i] -= 1
            key = tuple(d)
            acc[key] = acc.get(key, 0.0) + c * e[i]
        return _canonical(self.space, acc)

    def substitute(self, bindings: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Simultaneous substitution. Unbound variables map to themselves
        in the (common) target space, which must then contain them."""
        if not bindings:
            return self
        targets = {p.space for p in bindings.values()}
        if len(targets) != 1:
            raise PolyError("substitution images must share a common target space")
        target = targets.pop()
        for name in bindings:
            self.space.index(name)  # raises on unknown variable
        images = []
        for name in self.space.names:
            if name in bindings:
                images.append(bindings[name])
            else:
                images.append(Polynomial.variable(name, target))
        out = Polynomial.zero(target)
        for e, c in self.terms.items():
            term = Polynomial.constant(c, target)
            for img, k in zip(images, e):
                if k:
                    term = term * img**k
            out = out + term
        return out

    def evaluate(self, point) -> float:
        if len(point) != self.space.dim:
            raise PolyError(
                f"point dimension {len(point)} != space dimension {self.space.dim}"
            )
        total = 0.0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= float(x) ** k
            total += v
        return total

    # -- printing -----------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key):
            c = self.terms[e]
            factors = [
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(self.space.names, e)
                if k
            ]
            if not factors:
                body = repr(abs(c))
            elif abs(c) == 1.0:
                body = "*".join(factors)
            else:
                body = "*".join([repr(abs(c))] + factors)
            if not parts:
                parts.append(body if c >= 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c >= 0 else f"- {body}")
        return " ".join(parts)

    __repr__ = __str__


def _canonical(space: VariableSpace, terms: dict) -> Polynomial:
    return Polynomial(space, {e: c for e, c in terms.items() if abs(c) > COEFF_TOL})


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)|(?P<name>[a-z][a-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


class _Parser:
    def __init__(self, text: str, space: VariableSpace):
        self.text = text
        self.space = space
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip():
                    raise ParseError(f"unexpected character {text[pos]!r}", pos)
                break
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> Polynomial:
        kind, val, _ = self.peek()
        sign = 1.0
        if kind == "op" and val in "+-":
            self.next()
            sign = -1.0 if val == "-" else 1.0
        out = self.term() * sign
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                out = out + rhs if val == "+" else out - rhs
            else:
                return out

    def term(self) -> Polynomial:
        sign = 1.0
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                if val == "-":
                    sign = -sign
            else:
                break
        out = self.factor() * sign
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.next()
                out = out * self.factor()
            else:
                return out

    def factor(self) -> Polynomial:
        base = self.base()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.next()
            kind, val, pos = self.next()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be a non-negative integer", pos)
            return base ** int(val)
        return base

    def base(self) -> Polynomial:
        kind, val, pos = self.next()
        if kind == "num":
            return Polynomial.constant(float(val), self.space)
        if kind == "name":
            if val not in self.space.names:
                raise ParseError(f"unknown variable {val!r}", pos)
            return Polynomial.variable(val, self.space)
        if kind == "op" and val == "(":
            inner = self.expr()
            kind, val, pos = self.next()
            if val != ")":
                raise ParseError("expected ')'", pos)
            return inner
        raise ParseError(f"expected number, variable or '(', got {val!r}", pos)


def parse_poly(text: str, space: VariableSpace) -> Polynomial:
    """Parse polynomial text (`+ - * ^`, parentheses, decimal literals)."""
    parser = _Parser(text, space)
    out = parser.expr()
    kind, val, pos = parser.peek()
    if kind is not None:
        raise ParseError(f"unexpected trailing token {val!r}", pos)
    return out


# Functional aliases for the method-style operations.

def differentiate(p: Polynomial, var: str) -> Polynomial:
    return p.differentiate(var)


def substitute(p: Polynomial, bindings: Mapping[str, Polynomial]) -> Polynomial:
    return p.substitute(bindings)


def evaluate(p: Polynomial, point) -> float:
    return p.evaluate(point)
