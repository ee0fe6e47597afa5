"""Vectorized evaluation of every grid strategy matrix of a game.

At denominator ``d`` each row of country ``i`` is a composition of
``p_i * d`` into the columns ``i`` may allocate to. The full search space is
the Cartesian product of these row sets; it is laid out as an ``n``-dimensional
array whose axis ``i`` indexes country ``i``'s row. All arithmetic is done on
integers (allocations scaled by ``d``, utilities scaled by the common
denominator of the utility table), so comparisons are exact.

Because every threshold a best response has to meet is a sum of grid entries,
the maximum of a country's utility along its own axis equals its continuous
best-response value at every grid point. That makes the axis-max test an exact
equilibrium test on the grid.
"""

from __future__ import annotations

import os
from fractions import Fraction
from itertools import combinations
from math import comb, prod

import numpy as np

from .environment import Environment, Relation
from .errors import InputError, SearchSpaceError
from .mechanics import StrategyMatrix
from .rational import common_denominator
from .utility import UtilityForm, UtilityModel

DEFAULT_MAX_SPACE = 10**7


def max_space_from_env() -> int:
    raw = os.environ.get("PAG_MAX_SPACE")
    if raw is None:
        return DEFAULT_MAX_SPACE
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"PAG_MAX_SPACE must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise InputError("PAG_MAX_SPACE must be positive")
    return cap


def compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total``, in lexicographic order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    # stars and bars: choose the bar positions among total + parts - 1 slots
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def scaled_powers(env: Environment, d: int) -> list[int]:
    if not isinstance(d, int) or d <= 0:
        raise InputError(f"grid denominator must be a positive integer, got {d!r}")
    out = []
    for label, p in zip(env.labels, env.powers):
        q = p * d
        if q.denominator != 1:
            raise InputError(f"power {p} of {label} is not a multiple of 1/{d}")
        out.append(int(q))
    return out


def row_counts(env: Environment, d: int) -> list[int]:
    powers = scaled_powers(env, d)
    return [comb(powers[i] + k - 1, k - 1) for i, k in enumerate(len(env.allowed_columns(i)) for i in range(env.n))]


def search_space(env: Environment, d: int) -> int:
    return prod(row_counts(env, d))


def default_grid(env: Environment, max_space: int | None = None) -> int:
    """Largest multiple of the minimal valid denominator whose space fits under the cap."""
    cap = max_space_from_env() if max_space is None else max_space
    base = common_denominator(env.powers)
    if search_space(env, base) > cap:
        raise SearchSpaceError(f"even denominator {base} gives {search_space(env, base)} matrices > cap {cap}")
    grows = any(p > 0 and len(env.allowed_columns(i)) > 1 for i, p in enumerate(env.powers))
    if not grows:
        return base
    m = 1
    while search_space(env, base * (m + 1)) <= cap:
        m += 1
    return base * m


class GridGame:
    """Every grid matrix of ``(env, model)`` at denominator ``d``, evaluated at once."""

    def __init__(self, env: Environment, model: UtilityModel, d: int, max_space: int | None = None):
        if model.n != env.n:
            raise InputError(f"utility model covers {model.n} countries, environment has {env.n}")
        cap = max_space_from_env() if max_space is None else max_space
        self.env, self.model, self.d = env, model, d
        powers = scaled_powers(env, d)
        self.size = search_space(env, d)
        if self.size > cap:
            raise SearchSpaceError(f"search space {self.size} exceeds cap {cap} at denominator {d}")
        n = env.n
        self.rows: list[np.ndarray] = []
        for i in range(n):
            cols = env.allowed_columns(i)
            block = np.zeros((comb(powers[i] + len(cols) - 1, len(cols) - 1), n), dtype=np.int64)
            for r, comp in enumerate(compositions(powers[i], len(cols))):
                block[r, list(cols)] = comp
            self.rows.append(block)
        self.shape = tuple(len(b) for b in self.rows)
        self._signs = [self._sign(c) for c in range(n)]
        self.scale = common_denominator(model.all_values())
        self._utilities: dict[int, np.ndarray] = {}

    def _along(self, i: int, vec: np.ndarray) -> np.ndarray:
        shape = [1] * len(self.shape)
        shape[i] = len(vec)
        return vec.reshape(shape)

    def _sign(self, c: int) -> np.ndarray:
        """sign(sigma_c - tau_c) over the whole space, as int8."""
        env = self.env
        margin = np.zeros(self.shape, dtype=np.int64)
        for i, block in enumerate(self.rows):
            if i == c:
                contrib = block[:, sorted({c} | env.adversaries(c))].sum(axis=1)
            elif i in env.friends(c):
                contrib = block[:, c]
            elif i in env.adversaries(c):
                contrib = -block[:, c]
            else:
                continue
            margin = margin + self._along(i, contrib)
        return np.sign(margin).astype(np.int8)

    def sign(self, c: int) -> np.ndarray:
        return self._signs[c]

    def survives(self, c: int) -> np.ndarray:
        return self._signs[c] >= 0

    def _scaled(self, v: Fraction) -> int:
        return int(v * self.scale)

    def utility(self, i: int) -> np.ndarray:
        """Country ``i``'s utility over the space, scaled by ``self.scale``."""
        if i in self._utilities:
            return self._utilities[i]
        env, model = self.env, self.model
        surv, fail = model.self_values(i)
        friends = sorted(env.friends(i) - {i})
        advs = sorted(env.adversaries(i))
        fav = {j: self._signs[j] >= 0 for j in friends}
        fav.update({j: self._signs[j] <= 0 for j in advs})
        if model.form is UtilityForm.ADDITIVE:
            alive = np.full(self.shape, self._scaled(surv), dtype=np.int64)
            for j in friends + advs:
                t1, t0 = model.pair(i, j, env.relation(i, j))
                alive = alive + np.where(fav[j], self._scaled(t1), self._scaled(t0))
        else:
            friend_part = np.full(self.shape, self._scaled(surv), dtype=np.int64)
            for j in friends:
                friend_part = friend_part + fav[j] * self._scaled(model.pair(i, j, Relation.FRIEND)[0])
            adv_part = np.zeros(self.shape, dtype=np.int64)
            for j in advs:
                adv_part = adv_part + fav[j] * self._scaled(model.pair(i, j, Relation.ADVERSARY)[0])
            if model.form is UtilityForm.BASIC:
                alive = friend_part + adv_part
            else:
                all_friends = np.ones(self.shape, dtype=bool)
                for j in friends:
                    all_friends &= fav[j]
                alive = friend_part + np.where(all_friends, adv_part, 0)
        out = np.where(self.survives(i), alive, self._scaled(fail))
        self._utilities[i] = out
        return out

    def welfare(self) -> np.ndarray:
        return sum(self.utility(i) for i in range(self.env.n))

    def equilibrium_mask(self, concept: str = "utility") -> np.ndarray:
        """Grid points where no country has a profitable unilateral deviation."""
        mask = np.ones(self.shape, dtype=bool)
        for i in range(self.env.n):
            if concept == "utility":
                f = self.utility(i)
                mask &= f == f.max(axis=i, keepdims=True)
            elif concept == "preference":
                s = self.survives(i)
                mask &= s | ~s.max(axis=i, keepdims=True)
            else:
                raise InputError(f"unknown equilibrium concept {concept!r}")
        return mask

    def raw_matrix(self, index) -> list[list[Fraction]]:
        d = self.d
        return [[Fraction(int(v), d) for v in self.rows[i][r]] for i, r in enumerate(index)]

    def matrix(self, index) -> StrategyMatrix:
        # grid rows satisfy the invariants by construction
        return StrategyMatrix(self.env, tuple(tuple(row) for row in self.raw_matrix(index)))

    def value(self, scaled) -> Fraction:
        return Fraction(int(scaled), self.scale)
