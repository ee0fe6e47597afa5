"""Sufficient-condition preference predicates over pairs of strategy matrices.

These are decidable relations that hold when the listed conditions do; they
do not claim to exhaust a country's actual preference ordering.
"""

from __future__ import annotations

from .environment import Environment
from .errors import InputError
from .mechanics import State, StrategyMatrix, states


def _both_states(env: Environment, i: int, U: StrategyMatrix, V: StrategyMatrix):
    env.check_id(i)
    for M in (U, V):
        if M.env is not env and M.env != env:
            raise InputError("strategy matrix was validated against a different environment")
    return states(env, U), states(env, V)


def weakly_prefers(env: Environment, i: int, U: StrategyMatrix, V: StrategyMatrix) -> bool:
    """Whether ``i`` weakly prefers ``V`` over ``U``.

    Every friend must survive under ``V`` or already be unsafe under ``U``;
    every adversary must be unsafe or precarious under ``V`` or already safe
    under ``U``.
    """
    xu, xv = _both_states(env, i, U, V)
    for j in env.friends(i):
        if not (xv[j].survives or xu[j] is State.UNSAFE):
            return False
    for j in env.adversaries(i):
        if not (xv[j] is not State.SAFE or xu[j] is State.SAFE):
            return False
    return True


def indifferent(
    env: Environment, i: int, U: StrategyMatrix, V: StrategyMatrix, strict: bool = False
) -> bool:
    """Whether every neighbor of ``i`` has the same state under ``U`` and ``V``.

    With ``strict=True`` the printed condition is taken literally: ``i``'s own
    state under ``U`` must equal each neighbor's state under ``V``.
    """
    xu, xv = _both_states(env, i, U, V)
    hood = env.friends(i) | env.adversaries(i)
    if strict:
        return all(xu[i] is xv[j] for j in hood)
    return all(xu[j] is xv[j] for j in hood)


def strongly_prefers(env: Environment, i: int, U: StrategyMatrix, V: StrategyMatrix) -> bool:
    xu, xv = _both_states(env, i, U, V)
    return xv[i].survives and xu[i] is State.UNSAFE
