from __future__ import annotations

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from pag.environment import Relation, make_environment, parse_environment  # noqa: E402
from pag.mechanics import rows_from_mapping, validate_strategy  # noqa: E402
from pag.utility import make_model  # noqa: E402

DATA = Path(__file__).parent / "data"

F, A = Relation.FRIEND, Relation.ADVERSARY


@pytest.fixture
def ex1a():
    return parse_environment((DATA / "example1a.json").read_text())


@pytest.fixture
def ex1b():
    return parse_environment((DATA / "example1b.json").read_text())


def example_model(t_friend=1, t_adversary=2, **kw):
    """All-ones additive table except for country 3's view of country 2."""
    return make_model(3, "additive", {(2, 1, F): (t_friend, 0), (2, 1, A): (t_adversary, 0)}, **kw)


def matrix(env, cells):
    """Validated matrix from ``{(i, j): value}`` with 0-based ids."""
    return validate_strategy(env, rows_from_mapping(env, cells))


def random_environment(rng: random.Random, n: int, max_power: int = 4, p_none: float = 1 / 3, denominators=(1,)):
    powers = [Fraction(rng.randint(0, max_power * d), d) for d in (rng.choice(denominators) for _ in range(n))]
    rels = {}
    for i in range(n):
        for j in range(i + 1, n):
            r = rng.random()
            if r >= p_none:
                rels[(i, j)] = F if r < p_none + (1 - p_none) / 2 else A
    return make_environment([f"c{k}" for k in range(n)], powers, rels)


def random_matrix(rng: random.Random, env, denominator: int = 1):
    """A random valid matrix whose entries are multiples of ``1/denominator`` times the row's grain."""
    rows = []
    for i in range(env.n):
        cols = env.allowed_columns(i)
        p = env.powers[i]
        grain = Fraction(1, p.denominator * denominator)
        units = int(p / grain)
        cuts = sorted(rng.randint(0, units) for _ in range(len(cols) - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [units])]
        row = [Fraction(0)] * env.n
        for c, k in zip(cols, parts):
            row[c] = k * grain
        rows.append(row)
    return validate_strategy(env, rows)


@st.composite
def environments(draw, max_n: int = 5, max_power: int = 4):
    n = draw(st.integers(1, max_n))
    powers = [draw(st.fractions(0, max_power, max_denominator=3)) for _ in range(n)]
    rels = {}
    for i in range(n):
        for j in range(i + 1, n):
            sign = draw(st.sampled_from([None, F, A]))
            if sign is not None:
                rels[(i, j)] = sign
    return make_environment([str(k + 1) for k in range(n)], powers, rels)


@st.composite
def env_and_matrix(draw, max_n: int = 5):
    env = draw(environments(max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return env, random_matrix(random.Random(seed), env, draw(st.integers(1, 3)))


# --------------------------------------------------------------------------- acceptance summary

ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    """Log one acceptance line; the line is printed at the end of the run."""
    ACCEPTANCE.append((criterion, ok, detail))
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"criterion {criterion:<4} {'PASS' if ok else 'FAIL'}  {detail}")
