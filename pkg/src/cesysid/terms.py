"""Monomial term libraries over state variables."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, InvalidInputError, TermParseError


@dataclass(frozen=True)
class TermSpec:
    exponents: tuple[int, ...]
    display: str

    @property
    def degree(self):
        return sum(self.exponents)


def term_display(exponents, var_names):
    """``(1, 0, 1)`` over ``(x, y, z)`` -> ``"xz"``; ``(2, 0, 0)`` -> ``"x^2"``.

    Multi-character variable names are joined with ``*`` so the name parses back.
    """
    parts = []
    for e, v in zip(exponents, var_names):
        if e:
            parts.append(v if e == 1 else f"{v}^{e}")
    sep = "" if all(len(v) == 1 for v in var_names) else "*"
    return sep.join(parts)


def make_term(exponents, var_names) -> TermSpec:
    exps = tuple(int(e) for e in exponents)
    if len(exps) != len(var_names):
        raise TermParseError(f"exponent vector {exps} does not match variables {tuple(var_names)}")
    if any(e < 0 for e in exps) or not any(exps):
        raise TermParseError(f"term exponents must be nonnegative with at least one positive: {exps}")
    return TermSpec(exps, term_display(exps, var_names))


def _degree_exponents(dim, degree):
    """All exponent vectors of total ``degree``, in lexicographic-descending order."""
    for combo in itertools.combinations_with_replacement(range(dim), degree):
        exps = [0] * dim
        for i in combo:
            exps[i] += 1
        yield tuple(exps)


def paper_terms(var_names):
    """Linear terms followed by all distinct pairwise products (no squares)."""
    dim = len(var_names)
    out = [make_term([int(i == j) for j in range(dim)], var_names) for i in range(dim)]
    for a, b in itertools.combinations(range(dim), 2):
        out.append(make_term([int(j in (a, b)) for j in range(dim)], var_names))
    return out


def full_degree_terms(var_names, n):
    if int(n) != n or n < 1:
        raise TermParseError(f"degree must be a positive integer, got {n}")
    dim = len(var_names)
    out = []
    for degree in range(1, int(n) + 1):
        out.extend(make_term(e, var_names) for e in _degree_exponents(dim, degree))
    return out


_FACTOR = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*?)(?:\^(\d+))?$")


def parse_term(text, var_names) -> TermSpec:
    """Parse ``"xz"``, ``"x*z"``, ``"x^2"`` or ``"x^2*y"`` into a term.

    Concatenated factors (``xz``) are only split for single-character names.
    """
    names = tuple(var_names)
    index = {v: i for i, v in enumerate(names)}
    text = text.strip()
    if not text:
        raise TermParseError("empty term")
    exps = [0] * len(names)
    factors = text.split("*") if "*" in text else _split_concatenated(text, names)
    for factor in factors:
        m = _FACTOR.match(factor.strip())
        if not m or m.group(1) not in index:
            raise TermParseError(
                f"term {text!r} references unknown variable in {factor!r}; "
                f"variables are {', '.join(names)}"
            )
        exps[index[m.group(1)]] += int(m.group(2) or 1)
    return make_term(exps, names)


def _split_concatenated(text, names):
    m = _FACTOR.match(text)
    if m and m.group(1) in names:
        return [text]
    single = {v for v in names if len(v) == 1}
    out = []
    i = 0
    while i < len(text):
        m = re.match(r"([A-Za-z_])(\^\d+)?", text[i:])
        if not m or m.group(1) not in single:
            raise TermParseError(
                f"term {text!r} references unknown variable at {text[i:]!r}; "
                f"variables are {', '.join(names)}"
            )
        out.append(m.group(0))
        i += m.end()
    return out


def build_terms(var_names, mode="paper"):
    """Build an ordered candidate library.

    ``mode`` is ``"paper"``, ``"degree:N"`` (or ``("degree", N)``), or an
    explicit list / comma-separated string of term names.
    """
    names = tuple(var_names)
    if not names:
        raise TermParseError("need at least one state variable")
    if isinstance(mode, tuple) and len(mode) == 2 and mode[0] in ("degree", "full_degree"):
        return full_degree_terms(names, mode[1])
    if isinstance(mode, str):
        spec = mode.strip()
        if spec == "paper":
            return paper_terms(names)
        m = re.fullmatch(r"(?:degree|full_degree)[:=(]\s*(\d+)\s*\)?", spec)
        if m:
            return full_degree_terms(names, int(m.group(1)))
        items = [s for s in spec.split(",") if s.strip()]
    else:
        items = list(mode)
    terms = [t if isinstance(t, TermSpec) else parse_term(t, names) for t in items]
    seen = set()
    for t in terms:
        if t.exponents in seen:
            raise TermParseError(f"duplicate term {t.display!r}")
        seen.add(t.exponents)
    return terms


def evaluate_terms(states, terms) -> np.ndarray:
    """Column ``j`` is ``prod_i states[:, i] ** terms[j].exponents[i]``."""
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if not np.all(np.isfinite(states)):
        raise InvalidInputError("states contain non-finite values")
    out = np.empty((states.shape[0], len(terms)))
    for j, term in enumerate(terms):
        if len(term.exponents) != states.shape[1]:
            raise InvalidInputError(
                f"term {term.display!r} has {len(term.exponents)} exponents, states have {states.shape[1]} columns"
            )
        col = np.ones(states.shape[0])
        with np.errstate(over="ignore", invalid="ignore"):
            for i, e in enumerate(term.exponents):
                if e:
                    col = col * states[:, i] ** e
        if not np.all(np.isfinite(col)):
            raise EvaluationError(f"term {term.display!r} overflowed to non-finite values", term=term.display)
        out[:, j] = col
    return out
