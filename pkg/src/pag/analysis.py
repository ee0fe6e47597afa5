"""Welfare comparisons across environments, theorem checkers and price of anarchy.

Everything here is backed by exhaustive grid enumeration, so every "for all
equilibria" statement means "for all equilibria on the chosen grid".
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .environment import Environment, Relation, make_environment
from .equilibrium import EquilibriumSet, enumerate_equilibria
from .errors import InputError, NoEquilibriumError, PreconditionError
from .grid import GridGame
from .mechanics import StrategyMatrix, states, supports_and_threats
from .rational import format_rational, parse_rational
from .utility import UtilityModel, total_utility

ZERO = Fraction(0)


class Mode(enum.Enum):
    EQUILIBRIA = "equilibria"
    ALL = "all"


@dataclass
class Game:
    """A grid game together with its (lazily enumerated) equilibria."""

    env: Environment
    model: UtilityModel
    grid: GridGame
    verify: bool = True
    jobs: int = 1
    _eq: EquilibriumSet | None = None

    @classmethod
    def build(cls, env, model, d, verify=True, jobs=1, max_space=None) -> Game:
        return cls(env, model, GridGame(env, model, d, max_space), verify, jobs)

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def equilibria(self) -> EquilibriumSet:
        if self._eq is None:
            self._eq = enumerate_equilibria(
                self.env, self.model, self.d, verify=self.verify, jobs=self.jobs, game=self.grid
            )
        return self._eq

    def require_equilibria(self) -> EquilibriumSet:
        eq = self.equilibria
        if not eq.equilibria:
            raise NoEquilibriumError(f"no grid equilibria at denominator {self.d}")
        return eq

    def utilities_at_equilibria(self, i: int) -> list[Fraction]:
        f = self.grid.utility(i)
        return [self.grid.value(f[idx]) for idx in self.require_equilibria().indices]

    def welfare_at_equilibria(self) -> list[Fraction]:
        w = self.grid.welfare()
        return [self.grid.value(w[idx]) for idx in self.require_equilibria().indices]


def _game(env, model, d, game=None, **kw) -> Game:
    if game is not None:
        return game
    return Game.build(env, model, d, **kw)


def optimal_welfare(
    env: Environment,
    model: UtilityModel,
    i: int,
    mode: Mode | str = Mode.EQUILIBRIA,
    grid_denominator: int = 1,
    *,
    game: Game | None = None,
    **kw,
) -> Fraction:
    """Best utility ``i`` attains over grid equilibria, or over all grid matrices."""
    mode = Mode(mode)
    env.check_id(i)
    g = _game(env, model, grid_denominator, game, **kw)
    if mode is Mode.ALL:
        return g.grid.value(g.grid.utility(i).max())
    return max(g.utilities_at_equilibria(i))


# --------------------------------------------------------------------------- paradox


@dataclass(frozen=True)
class ParadoxReport:
    country: int
    env_small: Environment
    env_large: Environment
    welfare_small: Fraction
    welfare_large: Fraction
    paradox: bool
    mode: Mode
    grid_denominator: int

    def to_dict(self) -> dict:
        return {
            "country": self.env_small.labels[self.country],
            "welfare_small": format_rational(self.welfare_small),
            "welfare_large": format_rational(self.welfare_large),
            "paradox": self.paradox,
            "mode": self.mode.value,
            "grid_denominator": self.grid_denominator,
        }


def environment_diff(a: Environment, b: Environment) -> list[tuple[int, int, Relation | None, Relation | None]]:
    if a.labels != b.labels:
        raise PreconditionError(f"country labels differ: {a.labels} vs {b.labels}")
    if a.powers != b.powers:
        diffs = [a.labels[k] for k in range(a.n) if a.powers[k] != b.powers[k]]
        raise PreconditionError(f"powers differ for {diffs}")
    ra = {(i, j): s for i, j, s in a.relations}
    rb = {(i, j): s for i, j, s in b.relations}
    return [(i, j, ra.get((i, j)), rb.get((i, j))) for i, j in sorted(set(ra) | set(rb)) if ra.get((i, j)) != rb.get((i, j))]


def check_friend_extension(env_small: Environment, env_large: Environment, i: int) -> list[int]:
    """Verify the large environment only adds friends of ``i``; return the new friends."""
    env_small.check_id(i)
    diff = environment_diff(env_small, env_large)
    new = []
    for a, b, s_small, s_large in diff:
        other = b if a == i else a if b == i else None
        if other is None or s_large is not Relation.FRIEND:
            la, lb = env_small.labels[a], env_small.labels[b]
            raise PreconditionError(
                f"pair ({la}, {lb}) changes from {getattr(s_small, 'value', None)} to "
                f"{getattr(s_large, 'value', None)}; only new friends of {env_small.labels[i]} are allowed"
            )
        new.append(other)
    if not new:
        raise PreconditionError(f"{env_small.labels[i]} has the same friends in both environments")
    return sorted(new)


def check_model_pair(env_small, env_large, model_small: UtilityModel, model_large: UtilityModel) -> None:
    """Pairs that keep their sign must carry the same values in both models."""
    if model_small.form is not model_large.form:
        raise PreconditionError("utility forms differ between the two models")
    for i in range(env_small.n):
        if model_small.self_values(i) != model_large.self_values(i):
            raise PreconditionError(f"self values of {env_small.labels[i]} differ between models")
        for j in range(env_small.n):
            if i == j:
                continue
            sign = env_small.relation(i, j)
            if sign is not None and sign is env_large.relation(i, j):
                if model_small.pair(i, j, sign) != model_large.pair(i, j, sign):
                    raise PreconditionError(
                        f"t({env_small.labels[i]},{env_small.labels[j]}) differs between models"
                    )


def detect_paradox(
    env_small: Environment,
    env_large: Environment,
    model_small: UtilityModel,
    model_large: UtilityModel,
    i: int,
    mode: Mode | str = Mode.EQUILIBRIA,
    grid_denominator: int = 1,
    **kw,
) -> ParadoxReport:
    """Does ``i`` do strictly better in the environment where it has fewer friends?"""
    mode = Mode(mode)
    check_friend_extension(env_small, env_large, i)
    check_model_pair(env_small, env_large, model_small, model_large)
    small = optimal_welfare(env_small, model_small, i, mode, grid_denominator, **kw)
    large = optimal_welfare(env_large, model_large, i, mode, grid_denominator, **kw)
    return ParadoxReport(i, env_small, env_large, small, large, small > large, mode, grid_denominator)


# --------------------------------------------------------------------------- theorem checks


@dataclass(frozen=True)
class SurvivalReport:
    country: int
    survives_small: bool
    survives_large: bool
    holds: bool
    counterexample: StrategyMatrix | None
    equilibria_small: int
    equilibria_large: int


def _first_failure(game: Game, i: int) -> StrategyMatrix | None:
    surv = game.grid.survives(i)
    eq = game.require_equilibria()
    for idx, U in zip(eq.indices, eq.equilibria):
        if not surv[idx]:
            return U
    return None


def check_theorem1(
    env_small: Environment, env_large: Environment, model: UtilityModel, i: int, grid_denominator: int = 1, **kw
) -> SurvivalReport:
    """If ``i`` survives in every grid equilibrium with fewer friends, it must also
    survive in every grid equilibrium with more. A failing report carries the
    offending equilibrium of the larger environment."""
    check_friend_extension(env_small, env_large, i)
    g_small = Game.build(env_small, model, grid_denominator, **kw)
    g_large = Game.build(env_large, model, grid_denominator, **kw)
    bad_small = _first_failure(g_small, i)
    bad_large = _first_failure(g_large, i)
    survives_small, survives_large = bad_small is None, bad_large is None
    holds = survives_large or not survives_small
    return SurvivalReport(
        i,
        survives_small,
        survives_large,
        holds,
        None if holds else bad_large,
        len(g_small.equilibria),
        len(g_large.equilibria),
    )


def check_necessary_condition(
    model: UtilityModel, i: int, candidates: Iterable[int] | None = None, require_explicit: bool = False
) -> tuple[bool, list[int]]:
    """Countries ``j != i`` with ``t_ij^F(0) < t_ij^A(1)``.

    With ``require_explicit`` both values must be present in the table rather
    than taken from the defaults.
    """
    js = [j for j in (range(model.n) if candidates is None else candidates) if j != i]
    witnesses = []
    for j in js:
        if require_explicit and not (
            model.has_pair(i, j, Relation.FRIEND) and model.has_pair(i, j, Relation.ADVERSARY)
        ):
            raise InputError(f"missing friend/adversary values for pair ({i}, {j})")
        if model.pair(i, j, Relation.FRIEND)[1] < model.pair(i, j, Relation.ADVERSARY)[0]:
            witnesses.append(j)
    return bool(witnesses), witnesses


def _labels(n: int) -> list[str]:
    return [str(k + 1) for k in range(n)]


def construct_theorem3_pair(n: int, powers: Sequence, i: int, j: int) -> tuple[Environment, Environment]:
    """``(more friends, fewer friends)`` for country ``i``.

    In the first environment every country other than ``i`` and ``j`` is an
    adversary of ``j`` and ``i`` is friends with everyone. The second differs
    only in ``i`` being an adversary of ``j``.
    """
    return construct_corollary1_pair(n, powers, i, [j])


def construct_corollary1_pair(
    n: int, powers: Sequence, i: int, subset: Iterable[int], intra: str = "adversary"
) -> tuple[Environment, Environment]:
    """``(more friends, fewer friends)`` for ``i`` against a whole subset.

    Members of ``subset`` are adversaries of every country outside ``{i}`` and
    friends of ``i``; the second environment turns ``i`` against them too.
    ``intra`` decides relations between two members of the subset:
    ``"adversary"`` (the default) or ``"none"`` keep both environments in
    agreement on them; ``"literal"`` makes them adversaries only in the second
    environment, which then differs from the first outside ``i``'s edges and
    is rejected by :func:`detect_paradox`.
    """
    S = sorted(set(subset))
    powers = [parse_rational(p) for p in powers]
    if n < 3:
        raise PreconditionError("need at least 3 countries")
    if len(powers) != n:
        raise PreconditionError(f"expected {n} powers, got {len(powers)}")
    if not 0 <= i < n or any(not 0 <= j < n for j in S):
        raise PreconditionError("country index out of range")
    if not S:
        raise PreconditionError("subset must be nonempty")
    if i in S:
        raise PreconditionError("the country itself cannot be in the subset")
    if intra not in ("adversary", "none", "literal"):
        raise PreconditionError(f"intra must be 'adversary', 'none' or 'literal', got {intra!r}")
    rest = [k for k in range(n) if k != i and k not in S]
    lhs = powers[i] + sum(powers[j] for j in S)
    rhs = sum((powers[k] for k in rest), ZERO)
    if lhs > rhs:
        raise PreconditionError(f"power condition violated: {lhs} > {rhs}")
    rels: dict[tuple[int, int], Relation] = {}
    for k in range(n):
        if k != i:
            rels[(i, k)] = Relation.FRIEND
    for j in S:
        for k in rest:
            rels[(j, k)] = Relation.ADVERSARY
    if intra == "adversary":
        for a in S:
            for b in S:
                if a < b:
                    rels[(a, b)] = Relation.ADVERSARY
    large = make_environment(_labels(n), powers, rels)
    for j in S:
        rels[(i, j)] = Relation.ADVERSARY
    if intra == "literal":
        for a in S:
            for b in S:
                if a < b:
                    rels[(a, b)] = Relation.ADVERSARY
    small = make_environment(_labels(n), powers, rels)
    return large, small


def lemma1_check(env: Environment, U: StrategyMatrix) -> bool:
    """At least one country survives."""
    return any(x.survives for x in states(env, U))


def conservation_terms(env: Environment, U: StrategyMatrix) -> tuple[Fraction, Fraction]:
    """``(sum sigma - sum tau, sum over i of friend allocations received)``; equal for valid U."""
    sigma, tau = supports_and_threats(env, U)
    lhs = sum(sigma, ZERO) - sum(tau, ZERO)
    rhs = sum((U.rows[j][i] for i in range(env.n) for j in env.friends(i)), ZERO)
    return lhs, rhs


# --------------------------------------------------------------------------- price of anarchy


def theorem4_bounds(env: Environment, model: UtilityModel) -> tuple[Fraction, Fraction]:
    """``(1, A/B)`` with ``A`` the best favorable sum times ``n`` and ``B`` the
    welfare floor of a single minimal survivor among failed countries."""
    n = env.n
    best = None
    for i in range(n):
        total = model.self_values(i)[0]
        for j in env.neighbors(i):
            total += model.pair(i, j, env.relation(i, j))[0]
        best = total if best is None else max(best, total)
    A = n * best
    B = (n - 1) * min(model.self_values(i)[1] for i in range(n)) + min(model.self_values(i)[0] for i in range(n))
    if B <= 0:
        raise PreconditionError(f"bound denominator B = {B} is not positive")
    return Fraction(1), Fraction(A) / B


@dataclass(frozen=True)
class PoAReport:
    max_welfare: Fraction
    min_equilibrium_welfare: Fraction
    poa: Fraction | None
    bound_A: Fraction | None
    bound_B: Fraction | None
    within_bounds: bool | None
    grid_denominator: int
    equilibria: int

    @property
    def valid(self) -> bool:
        return self.poa is not None

    def to_dict(self) -> dict:
        fmt = lambda v: None if v is None else format_rational(v)  # noqa: E731
        return {
            "max_welfare": fmt(self.max_welfare),
            "min_equilibrium_welfare": fmt(self.min_equilibrium_welfare),
            "poa": fmt(self.poa),
            "valid": self.valid,
            "bound_A": fmt(self.bound_A),
            "bound_B": fmt(self.bound_B),
            "upper_bound": fmt(None if self.bound_A is None else self.bound_A / self.bound_B),
            "within_bounds": self.within_bounds,
            "grid_denominator": self.grid_denominator,
            "equilibria": self.equilibria,
        }


def _bound_parts(env, model) -> tuple[Fraction, Fraction] | None:
    try:
        _, upper = theorem4_bounds(env, model)
    except PreconditionError:
        return None
    n = env.n
    B = (n - 1) * min(model.self_values(i)[1] for i in range(n)) + min(model.self_values(i)[0] for i in range(n))
    return upper * B, Fraction(B)


def price_of_anarchy(
    env: Environment, model: UtilityModel, grid_denominator: int = 1, *, game: Game | None = None, **kw
) -> PoAReport:
    g = _game(env, model, grid_denominator, game, **kw)
    best = g.grid.value(g.grid.welfare().max())
    worst_eq = min(g.welfare_at_equilibria())
    poa = best / worst_eq if worst_eq > 0 else None
    parts = _bound_parts(env, model)
    A, B = parts if parts else (None, None)
    within = None
    if poa is not None and parts is not None:
        within = 1 <= poa <= A / B
    return PoAReport(best, worst_eq, poa, A, B, within, g.d, len(g.equilibria))
