"""Exact best responses, equilibrium tests, grid enumeration and dynamics.

With the other rows fixed, country ``i``'s row only moves three kinds of
quantity: its own support (friend allocations leave it, everything else stays),
the support of each friend, and the threat on each adversary. Each neighbor
becomes favorable once ``i`` pays a fixed cost and stays so for any larger
allocation, and utilities are step functions of those events. The best
response is therefore a small subset-selection problem solved by enumeration,
with exact thresholds (a precarious neighbor already counts as favorable).
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
import numpy as np

from .environment import Environment
from .errors import InputError
from .grid import GridGame
from .mechanics import StrategyMatrix, classify, integer_view
from .utility import UtilityModel, outcome_utility, total_utility, utility_from_states

ZERO = Fraction(0)


@dataclass(frozen=True)
class BestResponse:
    """Optimal utility of one country against fixed opponents.

    ``target_sets`` lists ``(friends paid for, adversaries paid for, survives)``
    for every optimal configuration; ``witness_rows`` holds one canonical row
    per configuration, sorted so that ``witness`` is the lexicographically
    smallest.
    """

    country: int
    value: Fraction
    witness_rows: tuple[tuple[Fraction, ...], ...]
    target_sets: tuple[tuple[frozenset[int], frozenset[int], bool], ...]

    @property
    def witness(self) -> tuple[Fraction, ...]:
        return self.witness_rows[0]


class GameSolver:
    """Best-response oracle for one ``(env, model)`` pair, memoized on the
    quantities a best response actually depends on."""

    def __init__(self, env: Environment, model: UtilityModel):
        if model.n != env.n:
            raise InputError(f"utility model covers {model.n} countries, environment has {env.n}")
        self.env, self.model = env, model
        self._cache: dict = {}
        self._utility_cache: dict = {}

    def _check(self, U: StrategyMatrix) -> None:
        if U.env is not self.env and U.env != self.env:
            raise InputError("strategy matrix was validated against a different environment")

    def costs(self, U: StrategyMatrix, i: int, view=None) -> tuple[Fraction, Fraction, tuple]:
        """``(friend support s_i, threat tau_i, ((j, cost_j), ...))`` with row ``i`` ignored."""
        s, tau_i, costs, den = self._integer_costs(U, i, view)
        return Fraction(s, den), Fraction(tau_i, den), tuple((j, Fraction(c, den)) for j, c in costs)

    def _integer_costs(self, U: StrategyMatrix, i: int, view=None):
        env = self.env
        self._check(U)
        env.check_id(i)
        den, ints, sigma, tau = view or integer_view(env, U)
        friends = env._friends[i]
        s = sum(ints[j][i] for j in friends if j != i)
        costs = []
        for j in sorted(env.neighbors(i)):
            if j in friends:
                c = tau[j] - (sigma[j] - ints[i][j])
            else:
                c = sigma[j] - (tau[j] - ints[i][j])
            costs.append((j, c if c > 0 else 0))
        return s, tau[i], tuple(costs), den

    def best_response(self, U: StrategyMatrix, i: int, view=None) -> BestResponse:
        s, tau_i, costs, den = self._integer_costs(U, i, view)
        # only ratios matter, so reduce to lowest terms before keying the cache
        g = gcd(s, tau_i, *(c for _, c in costs), den)
        key = (i, s // g, tau_i // g, tuple((j, c // g) for j, c in costs), den // g)
        if key not in self._cache:
            self._cache[key] = self._solve(
                i, Fraction(s, den), Fraction(tau_i, den), tuple((j, Fraction(c, den)) for j, c in costs)
            )
        return self._cache[key]

    def _solve(self, i: int, s: Fraction, tau_i: Fraction, costs) -> BestResponse:
        env, model = self.env, self.model
        p = env.powers[i]
        n = env.n
        friends = env.friends(i)
        free = [j for j, c in costs if c == 0]
        paid = [(j, c) for j, c in costs if c > 0]
        survive_budget = p + s - tau_i  # friend spending must not exceed this

        configs = []  # (value, T_F, T_A, survives, row)
        for mask in range(1 << len(paid)):
            chosen = [paid[k] for k in range(len(paid)) if mask >> k & 1]
            f_spend = sum((c for j, c in chosen if j in friends), ZERO)
            total = sum((c for _, c in chosen), ZERO)
            if total > p or f_spend > survive_budget:
                continue
            row = [ZERO] * n
            for j, c in chosen:
                row[j] = c
            row[i] = p - total
            value = outcome_utility(env, model, i, True, free + [j for j, _ in chosen])
            t_f = frozenset(j for j, _ in chosen if j in friends)
            t_a = frozenset(j for j, _ in chosen if j not in friends)
            configs.append((value, t_f, t_a, True, tuple(row)))

        others = sorted(friends - {i})
        min_support = s if (others and p > 0) else p + s
        if min_support < tau_i:
            row = [ZERO] * n
            if p + s < tau_i or not others:
                row[i] = p
            else:
                row[others[0]] = p
            configs.append((model.self_values(i)[1], frozenset(), frozenset(), False, tuple(row)))

        best = max(c[0] for c in configs)
        optimal = sorted((c for c in configs if c[0] == best), key=lambda c: c[4])
        return BestResponse(
            country=i,
            value=best,
            witness_rows=tuple(dict.fromkeys(c[4] for c in optimal)),
            target_sets=tuple((c[1], c[2], c[3]) for c in optimal),
        )

    def utility(self, i: int, xs) -> Fraction:
        key = (i, tuple(xs))
        if key not in self._utility_cache:
            self._utility_cache[key] = utility_from_states(self.env, self.model, i, xs)
        return self._utility_cache[key]

    def is_equilibrium(self, U: StrategyMatrix, concept: str = "utility") -> bool:
        self._check(U)
        env = self.env
        if concept == "utility":
            view = integer_view(env, U)
            xs = [classify(a, b) for a, b in zip(view[2], view[3])]
            return all(self.utility(i, xs) == self.best_response(U, i, view).value for i in range(env.n))
        if concept == "preference":
            # a deviation counts only if it turns i from unsafe to surviving
            view = integer_view(env, U)
            for i in range(env.n):
                if view[2][i] < view[3][i]:
                    s, tau_i, _ = self.costs(U, i, view)
                    if env.powers[i] + s >= tau_i:
                        return False
            return True
        raise InputError(f"unknown equilibrium concept {concept!r}")


def best_response(env: Environment, model: UtilityModel, U: StrategyMatrix, i: int) -> BestResponse:
    return GameSolver(env, model).best_response(U, i)


def is_equilibrium(env: Environment, model: UtilityModel, U: StrategyMatrix, concept: str = "utility") -> bool:
    """No country can strictly gain by any continuous unilateral deviation."""
    return GameSolver(env, model).is_equilibrium(U, concept)


@dataclass(frozen=True)
class EquilibriumSet:
    """Equilibria found among the grid matrices at ``1/grid_denominator``.

    Matrices off the grid are never examined; ``exhaustive_over_grid`` only
    vouches for the grid itself.
    """

    grid_denominator: int
    equilibria: tuple[StrategyMatrix, ...]
    exhaustive_over_grid: bool
    search_space: int
    concept: str = "utility"
    verified: bool = True
    indices: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.equilibria)

    def __iter__(self):
        return iter(self.equilibria)


def _verify_chunk(args) -> list[bool]:
    env, model, concept, raws = args
    solver = GameSolver(env, model)
    return [solver.is_equilibrium(StrategyMatrix(env, raw), concept) for raw in raws]


def enumerate_equilibria(
    env: Environment,
    model: UtilityModel,
    grid_denominator: int,
    *,
    concept: str = "utility",
    verify: bool = True,
    jobs: int = 1,
    max_space: int | None = None,
    game: GridGame | None = None,
) -> EquilibriumSet:
    """All grid strategy matrices that are equilibria.

    Candidates come from the vectorized grid test; with ``verify`` each one is
    re-checked by the exact best-response oracle (in ``jobs`` processes), and a
    disagreement raises since it would mean one of the two routes is wrong.
    """
    if game is None:
        game = GridGame(env, model, grid_denominator, max_space)
    mask = game.equilibrium_mask(concept)
    indices = [tuple(int(x) for x in idx) for idx in np.argwhere(mask)]
    matrices = [game.matrix(idx) for idx in indices]
    if verify and matrices:
        solver = GameSolver(env, model)
        if jobs <= 1:
            ok = [solver.is_equilibrium(U, concept) for U in matrices]
        else:
            size = -(-len(matrices) // jobs)
            chunks = [
                (env, model, concept, [U.rows for U in matrices[k : k + size]])
                for k in range(0, len(matrices), size)
            ]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                ok = [flag for part in pool.map(_verify_chunk, chunks) for flag in part]
        if not all(ok):
            bad = matrices[ok.index(False)]
            raise AssertionError(f"grid test and exact oracle disagree on {bad.rows}")
    return EquilibriumSet(
        grid_denominator=grid_denominator,
        equilibria=tuple(matrices),
        exhaustive_over_grid=True,
        search_space=game.size,
        concept=concept,
        verified=verify,
        indices=tuple(indices),
    )


@dataclass(frozen=True)
class DynamicsResult:
    trajectory: tuple[StrategyMatrix, ...]
    converged: bool
    rounds: int

    @property
    def final(self) -> StrategyMatrix:
        return self.trajectory[-1]


def best_response_dynamics(
    env: Environment,
    model: UtilityModel,
    U0: StrategyMatrix,
    schedule: str = "round-robin",
    max_rounds: int = 100,
    seed: int | None = None,
) -> DynamicsResult:
    """Sequential best-response play.

    Each round visits every country once (in index order, or a seeded random
    order for ``schedule="random"``); a country that can strictly improve
    switches to the lexicographically smallest optimal witness row. Stops after
    a round with no switch.
    """
    if schedule not in ("round-robin", "random"):
        raise InputError(f"unknown schedule {schedule!r}")
    solver = GameSolver(env, model)
    solver._check(U0)
    rng = random.Random(seed)
    U = U0
    trajectory = [U0]
    for rnd in range(1, max_rounds + 1):
        order = list(range(env.n))
        if schedule == "random":
            rng.shuffle(order)
        changed = False
        for i in order:
            br = solver.best_response(U, i)
            if total_utility(env, model, U, i) < br.value:
                U = U.replace_row(i, br.witness)
                trajectory.append(U)
                changed = True
        if not changed:
            return DynamicsResult(tuple(trajectory), True, rnd)
    return DynamicsResult(tuple(trajectory), False, max_rounds)

