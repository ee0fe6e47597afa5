"""Strategy matrices, total support, total threat and state classification."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any, Mapping, Sequence

from .environment import Environment, load_json
from .errors import InputError, StrategyError
from .rational import format_rational, parse_rational


class State(enum.Enum):
    SAFE = "safe"
    PRECARIOUS = "precarious"
    UNSAFE = "unsafe"

    @property
    def survives(self) -> bool:
        return self is not State.UNSAFE


def classify(sigma: Fraction, tau: Fraction) -> State:
    if sigma > tau:
        return State.SAFE
    if sigma == tau:
        return State.PRECARIOUS
    return State.UNSAFE


@dataclass(frozen=True)
class StrategyMatrix:
    """A validated allocation bound to the environment it was checked against.

    Build through :func:`validate_strategy`; the constructor does not check.
    """

    env: Environment
    rows: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def replace_row(self, i: int, row: Sequence[Fraction]) -> StrategyMatrix:
        """New matrix with row ``i`` swapped out, re-validated."""
        rows = list(self.rows)
        rows[i] = tuple(row)
        return validate_strategy(self.env, rows)


def validate_strategy(env: Environment, raw: Sequence[Sequence[Any]]) -> StrategyMatrix:
    """Check nonnegativity, exact row sums and the neighborhood zero pattern."""
    n = env.n
    if len(raw) != n:
        raise StrategyError(f"expected {n} rows, got {len(raw)}")
    rows = []
    for i, raw_row in enumerate(raw):
        if len(raw_row) != n:
            raise StrategyError(f"row {i} has {len(raw_row)} entries, expected {n}")
        try:
            row = tuple(parse_rational(x) for x in raw_row)
        except ValueError as exc:
            raise StrategyError(str(exc), f"row {env.labels[i]}") from None
        allowed = env.friends(i) | env.adversaries(i)
        for j, u in enumerate(row):
            if u < 0:
                raise StrategyError(f"negative entry u[{env.labels[i]}][{env.labels[j]}] = {u}")
            if u != 0 and j not in allowed:
                raise StrategyError(
                    f"country {env.labels[i]} allocates {u} to non-neighbor {env.labels[j]}"
                )
        total = sum(row, Fraction(0))
        if total != env.powers[i]:
            raise StrategyError(
                f"row {env.labels[i]} sums to {total}, but the power is {env.powers[i]}"
            )
        rows.append(row)
    return StrategyMatrix(env, tuple(rows))


def self_allocation(env: Environment) -> StrategyMatrix:
    """Every country keeps all of its power on itself."""
    n = env.n
    return StrategyMatrix(
        env, tuple(tuple(env.powers[i] if j == i else Fraction(0) for j in range(n)) for i in range(n))
    )


def _check(env: Environment, U: StrategyMatrix, i: int | None = None) -> None:
    if U.env is not env and U.env != env:
        raise InputError("strategy matrix was validated against a different environment")
    if i is not None:
        env.check_id(i)


def total_support(env: Environment, U: StrategyMatrix, i: int) -> Fraction:
    """Incoming friendly allocations (including ``u_ii``) plus ``i``'s own attacks."""
    _check(env, U, i)
    rows = U.rows
    return sum((rows[j][i] for j in env.friends(i)), Fraction(0)) + sum(
        (rows[i][j] for j in env.adversaries(i)), Fraction(0)
    )


def total_threat(env: Environment, U: StrategyMatrix, i: int) -> Fraction:
    _check(env, U, i)
    return sum((U.rows[j][i] for j in env.adversaries(i)), Fraction(0))


def state(env: Environment, U: StrategyMatrix, i: int) -> State:
    return classify(total_support(env, U, i), total_threat(env, U, i))


def integer_view(env: Environment, U: StrategyMatrix):
    """``(den, entries, sigmas, taus)`` with everything scaled to integers by ``den``."""
    _check(env, U)
    den = 1
    for row in U.rows:
        for u in row:
            if u.denominator != 1:
                den = lcm(den, u.denominator)
    ints = [[u.numerator * (den // u.denominator) for u in row] for row in U.rows]
    sigma, tau = [], []
    for i in range(env.n):
        advs = env._adversaries[i]
        sigma.append(sum(ints[j][i] for j in env._friends[i]) + sum(ints[i][j] for j in advs))
        tau.append(sum(ints[j][i] for j in advs))
    return den, ints, sigma, tau


def supports_and_threats(env: Environment, U: StrategyMatrix) -> tuple[list[Fraction], list[Fraction]]:
    """All supports and threats at once, summed over a common integer denominator."""
    den, _, sigma, tau = integer_view(env, U)
    return [Fraction(s, den) for s in sigma], [Fraction(t, den) for t in tau]


def states(env: Environment, U: StrategyMatrix) -> tuple[State, ...]:
    sigma, tau = supports_and_threats(env, U)
    return tuple(classify(s, t) for s, t in zip(sigma, tau))


# --------------------------------------------------------------------------- files


def allocation_from_dict(env: Environment, doc: Any) -> StrategyMatrix:
    if not isinstance(doc, dict) or set(doc) != {"rows"} or not isinstance(doc["rows"], dict):
        raise InputError("allocation file must be an object with a single 'rows' object", "$")
    n = env.n
    raw = [[Fraction(0)] * n for _ in range(n)]
    for src, cells in doc["rows"].items():
        loc = f"$.rows.{src}"
        if src not in env.labels:
            raise InputError(f"unknown country label {src!r}", loc)
        if not isinstance(cells, dict):
            raise InputError("row must be an object", loc)
        i = env.labels.index(src)
        for dst, value in cells.items():
            if dst not in env.labels:
                raise InputError(f"unknown country label {dst!r}", f"{loc}.{dst}")
            try:
                raw[i][env.labels.index(dst)] = parse_rational(value)
            except ValueError as exc:
                raise InputError(str(exc), f"{loc}.{dst}") from None
    return validate_strategy(env, raw)


def parse_allocation(env: Environment, text: str | bytes) -> StrategyMatrix:
    return allocation_from_dict(env, load_json(text, "allocation"))


def allocation_to_dict(U: StrategyMatrix) -> dict:
    """Nonzero cells only, keyed by label."""
    labels = U.env.labels
    rows = {}
    for i, row in enumerate(U.rows):
        rows[labels[i]] = {labels[j]: format_rational(u) for j, u in enumerate(row) if u != 0}
    return {"rows": rows}


def rows_from_mapping(env: Environment, cells: Mapping[tuple[int, int], Any]) -> list[list[Fraction]]:
    """Dense raw matrix from ``{(i, j): value}``; omitted cells are zero."""
    raw = [[Fraction(0)] * env.n for _ in range(env.n)]
    for (i, j), v in cells.items():
        raw[i][j] = parse_rational(v)
    return raw


def serialize_allocation(U: StrategyMatrix) -> str:
    return json.dumps(allocation_to_dict(U), indent=2, sort_keys=True) + "\n"
