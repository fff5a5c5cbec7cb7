"""Tiny model-formula language for the CLI.

Grammar (deliberately small):

    formula  := response '~' rhs
    rhs      := item (('+' | '-') item)*      # '-' only valid before '1'
    item     := '1' | term
    term     := factor (':' factor)*          # interaction
    factor   := NAME ('^' INT)?               # power of a column

The intercept is implicit and removed with '- 1'.  Column names start with a
letter or underscore and may contain letters, digits, underscores and dots.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Formula", "Term", "parse_formula", "build_design"]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")


@dataclass(frozen=True)
class Term:
    """Product of powered columns, e.g. dyslexia:iq^2 -> ((dyslexia,1),(iq,2))."""

    factors: tuple  # of (name, power)

    @property
    def label(self) -> str:
        return ":".join(n if p == 1 else f"{n}^{p}" for n, p in self.factors)


@dataclass(frozen=True)
class Formula:
    response: str
    terms: tuple
    intercept: bool

    @property
    def column_names(self) -> tuple:
        names = ("intercept",) if self.intercept else ()
        return names + tuple(t.label for t in self.terms)


def _parse_factor(text: str) -> tuple:
    text = text.strip()
    m = _NAME_RE.fullmatch(text)
    if m:
        return text, 1
    if "^" in text:
        base, _, power = text.partition("^")
        base = base.strip()
        power = power.strip()
        if _NAME_RE.fullmatch(base) and power.isdigit() and int(power) >= 1:
            return base, int(power)
    raise DomainError(f"bad factor {text!r} in formula")


def _parse_term(text: str) -> Term:
    parts = [p for p in text.split(":")]
    if any(not p.strip() for p in parts):
        raise DomainError(f"bad term {text!r} in formula")
    return Term(factors=tuple(_parse_factor(p) for p in parts))


def parse_formula(text: str) -> Formula:
    if text.count("~") != 1:
        raise DomainError("formula must contain exactly one '~'")
    lhs, _, rhs = text.partition("~")
    response = lhs.strip()
    if not _NAME_RE.fullmatch(response):
        raise DomainError(f"bad response name {response!r}")

    intercept = True
    terms = []
    # split rhs into (sign, chunk) pieces on top-level + and -
    chunks = re.split(r"([+-])", rhs)
    pending_sign = "+"
    items = []
    for piece in chunks:
        piece = piece.strip()
        if piece in ("+", "-"):
            pending_sign = piece
            continue
        if piece == "":
            continue
        items.append((pending_sign, piece))
        pending_sign = "+"
    if not items:
        raise DomainError("formula right-hand side is empty")
    for sign, piece in items:
        if piece == "1":
            if sign == "-":
                intercept = False
            continue
        if sign == "-":
            raise DomainError("'-' may only remove the intercept ('- 1')")
        terms.append(_parse_term(piece))
    if not terms and not intercept:
        raise DomainError("formula selects no columns")
    seen = set()
    for t in terms:
        if t.label in seen:
            raise DomainError(f"duplicate term {t.label!r} in formula")
        seen.add(t.label)
    return Formula(response=response, terms=tuple(terms), intercept=intercept)


def build_design(formula: Formula, columns: dict) -> np.ndarray:
    """Assemble the design matrix from named numeric columns."""
    needed = {n for t in formula.terms for n, _ in t.factors}
    missing = sorted(n for n in needed if n not in columns)
    if missing:
        raise DomainError(f"formula references unknown column(s): {', '.join(missing)}")
    n_rows = len(next(iter(columns.values()))) if columns else 0
    cols = []
    if formula.intercept:
        cols.append(np.ones(n_rows))
    for t in formula.terms:
        v = np.ones(n_rows)
        for name, power in t.factors:
            v = v * np.asarray(columns[name], dtype=float) ** power
        cols.append(v)
    return np.column_stack(cols)
