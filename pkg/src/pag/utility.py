"""Pairwise utility tables and the utility forms built on them.

A country ``i`` values each neighbor ``j`` through two numbers, a favorable
value and an unfavorable one. For a friend the favorable outcome is that ``j``
survives (safe or precarious); for an adversary it is that ``j`` is unsafe or
precarious. Tables are keyed by the sign of the relation, so one model can
carry values for both signs of a pair and serve two environments that differ
in that pair.

Three forms turn realized pairwise values into a total utility:

* ``BASIC``: the sum of favorable values over neighbors (and self) that are
  currently favorable; unfavorable neighbors contribute nothing.
* ``FRIENDS_FIRST``: like ``BASIC`` but adversaries only count once every
  friend is favorable.
* ``ADDITIVE``: the self value plus the realized value (favorable or
  unfavorable) of every neighbor.

In every form an unsafe country receives exactly its own failure value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .environment import Environment, Relation, load_json
from .errors import InputError
from .mechanics import State, StrategyMatrix, states
from .rational import format_rational, parse_rational

ONE = Fraction(1)
ZERO = Fraction(0)


class UtilityForm(enum.Enum):
    BASIC = "basic"
    FRIENDS_FIRST = "friends-first"
    ADDITIVE = "additive"


PairKey = tuple[int, int, Relation]


@dataclass(frozen=True)
class UtilityModel:
    """Pairwise tables plus a form.

    ``pairs`` maps ``(i, j, sign)`` to ``(favorable, unfavorable)``; ``selves``
    maps ``i`` to ``(survive, fail)``. Missing entries fall back to
    ``default_favorable``/``default_unfavorable``.
    """

    n: int
    form: UtilityForm = UtilityForm.ADDITIVE
    pairs: tuple[tuple[PairKey, tuple[Fraction, Fraction]], ...] = ()
    selves: tuple[tuple[int, tuple[Fraction, Fraction]], ...] = ()
    default_favorable: Fraction = ONE
    default_unfavorable: Fraction = ZERO
    _pairs: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _selves: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.default_favorable < self.default_unfavorable:
            raise InputError("default favorable value is below the unfavorable one")
        pairs = {}
        for (i, j, sign), (fav, unfav) in self.pairs:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise InputError(f"bad utility pair ({i}, {j})")
            if fav < unfav:
                raise InputError(
                    f"t[{i}][{j}] ({Relation(sign).value}): favorable {fav} < unfavorable {unfav}"
                )
            pairs[(i, j, Relation(sign))] = (fav, unfav)
        selves = {}
        for i, (surv, fail) in self.selves:
            if not 0 <= i < self.n:
                raise InputError(f"bad self utility index {i}")
            if surv < fail:
                raise InputError(f"t[{i}][{i}]: survive value {surv} < fail value {fail}")
            selves[i] = (surv, fail)
        object.__setattr__(self, "_pairs", pairs)
        object.__setattr__(self, "_selves", selves)

    def pair(self, i: int, j: int, sign: Relation) -> tuple[Fraction, Fraction]:
        return self._pairs.get((i, j, sign), (self.default_favorable, self.default_unfavorable))

    def self_values(self, i: int) -> tuple[Fraction, Fraction]:
        return self._selves.get(i, (self.default_favorable, self.default_unfavorable))

    def has_pair(self, i: int, j: int, sign: Relation) -> bool:
        return (i, j, sign) in self._pairs

    def all_values(self) -> Iterable[Fraction]:
        yield self.default_favorable
        yield self.default_unfavorable
        for v in self._pairs.values():
            yield from v
        for v in self._selves.values():
            yield from v


def make_model(
    n: int,
    form: UtilityForm | str = UtilityForm.ADDITIVE,
    pairs: dict[PairKey, tuple[Any, Any]] | None = None,
    selves: dict[int, tuple[Any, Any]] | None = None,
    default_favorable: Any = 1,
    default_unfavorable: Any = 0,
) -> UtilityModel:
    pairs = pairs or {}
    selves = selves or {}
    return UtilityModel(
        n=n,
        form=UtilityForm(form),
        pairs=tuple(
            sorted(
                (
                    ((i, j, Relation(s)), (parse_rational(a), parse_rational(b)))
                    for (i, j, s), (a, b) in pairs.items()
                ),
                key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value),
            )
        ),
        selves=tuple(sorted((i, (parse_rational(a), parse_rational(b))) for i, (a, b) in selves.items())),
        default_favorable=parse_rational(default_favorable),
        default_unfavorable=parse_rational(default_unfavorable),
    )


def with_form(model: UtilityModel, form: UtilityForm | str) -> UtilityModel:
    return UtilityModel(
        model.n, UtilityForm(form), model.pairs, model.selves, model.default_favorable, model.default_unfavorable
    )


def _check(env: Environment, model: UtilityModel) -> None:
    if model.n != env.n:
        raise InputError(f"utility model covers {model.n} countries, environment has {env.n}")


def is_favorable(sign: Relation, x: State) -> bool:
    if sign is Relation.FRIEND:
        return x.survives
    return x is not State.SAFE


def realized_pairwise(env: Environment, model: UtilityModel, i: int, j: int, x_j: State) -> Fraction:
    """Value ``i`` draws from neighbor ``j`` in state ``x_j``."""
    _check(env, model)
    if i == j:
        raise InputError("realized_pairwise is for neighbors; use the self values for i == j")
    sign = env.relation(i, j)
    if sign is None:
        raise InputError(f"{env.labels[j]} is not a neighbor of {env.labels[i]}")
    fav, unfav = model.pair(i, j, sign)
    return fav if is_favorable(sign, x_j) else unfav


def favorable_sets(env: Environment, U: StrategyMatrix, i: int) -> tuple[frozenset[int], frozenset[int]]:
    """Friends (self included) that survive and adversaries that do not stand safe."""
    xs = states(env, U)
    env.check_id(i)
    return (
        frozenset(j for j in env.friends(i) if xs[j].survives),
        frozenset(j for j in env.adversaries(i) if xs[j] is not State.SAFE),
    )


def outcome_utility(
    env: Environment, model: UtilityModel, i: int, survived: bool, favorable: Iterable[int]
) -> Fraction:
    """Utility of ``i`` given its own survival and the set of favorable neighbors.

    ``favorable`` lists neighbors ``j != i``; anything outside the neighborhood
    is ignored.
    """
    surv, fail = model.self_values(i)
    if not survived:
        return fail
    favorable = set(favorable)
    form = model.form
    total = surv
    if form is UtilityForm.ADDITIVE:
        for j in env.neighbors(i):
            sign = env.relation(i, j)
            fav, unfav = model.pair(i, j, sign)
            total += fav if j in favorable else unfav
        return total
    friend_sum = sum((model.pair(i, j, Relation.FRIEND)[0] for j in env.friends(i) - {i} if j in favorable), ZERO)
    adv_sum = sum((model.pair(i, j, Relation.ADVERSARY)[0] for j in env.adversaries(i) if j in favorable), ZERO)
    if form is UtilityForm.BASIC:
        return total + friend_sum + adv_sum
    # FRIENDS_FIRST: the printed branches overlap when every friend survives;
    # the top tier is taken to require every friend favorable.
    if env.friends(i) - {i} <= favorable:
        return total + friend_sum + adv_sum
    return total + friend_sum


def utility_from_states(env: Environment, model: UtilityModel, i: int, xs) -> Fraction:
    favorable = [j for j in env.neighbors(i) if is_favorable(env.relation(i, j), xs[j])]
    return outcome_utility(env, model, i, xs[i].survives, favorable)


def total_utility(env: Environment, model: UtilityModel, U: StrategyMatrix, i: int) -> Fraction:
    _check(env, model)
    env.check_id(i)
    return utility_from_states(env, model, i, states(env, U))


def total_welfare(env: Environment, model: UtilityModel, U: StrategyMatrix) -> Fraction:
    _check(env, model)
    xs = states(env, U)
    return sum((utility_from_states(env, model, i, xs) for i in range(env.n)), ZERO)


# --------------------------------------------------------------------------- files


def model_from_dict(env: Environment, doc: Any) -> UtilityModel:
    """Parse the ``utilities`` section against ``env``'s labels.

    A pair entry may carry ``"sign"`` to set values for a specific relation
    type; without it the entry applies to the pair's sign in ``env``.
    """
    if doc is None:
        return make_model(env.n)
    if not isinstance(doc, dict):
        raise InputError("'utilities' must be an object", "$.utilities")
    unknown = set(doc) - {"form", "pairs", "self"}
    if unknown:
        raise InputError(f"unknown keys {sorted(unknown)}", "$.utilities")
    try:
        form = UtilityForm(doc.get("form", "additive"))
    except ValueError:
        raise InputError(f"unknown form {doc.get('form')!r}", "$.utilities.form") from None

    def idx(label: Any, loc: str) -> int:
        if label not in env.labels:
            raise InputError(f"unknown country label {label!r}", loc)
        return env.labels.index(label)

    def num(value: Any, loc: str) -> Fraction:
        try:
            return parse_rational(value)
        except ValueError as exc:
            raise InputError(str(exc), loc) from None

    pairs: dict[PairKey, tuple[Fraction, Fraction]] = {}
    for k, entry in enumerate(doc.get("pairs", [])):
        loc = f"$.utilities.pairs[{k}]"
        if not isinstance(entry, dict) or not {"i", "j", "favorable", "unfavorable"} <= set(entry) or not set(
            entry
        ) <= {"i", "j", "favorable", "unfavorable", "sign"}:
            raise InputError("expected keys i, j, favorable, unfavorable and optional sign", loc)
        i, j = idx(entry["i"], loc), idx(entry["j"], loc)
        if i == j:
            raise InputError("self values belong in 'self'", loc)
        if "sign" in entry:
            if entry["sign"] not in ("friend", "adversary"):
                raise InputError(f"bad sign {entry['sign']!r}", loc)
            sign = Relation(entry["sign"])
        else:
            sign = env.relation(i, j)
            if sign is None:
                raise InputError(f"{entry['i']} and {entry['j']} are not related; give an explicit sign", loc)
        fav, unfav = num(entry["favorable"], loc), num(entry["unfavorable"], loc)
        if fav < unfav:
            raise InputError(f"t({entry['i']},{entry['j']}) favorable {fav} < unfavorable {unfav}", loc)
        if (i, j, sign) in pairs:
            raise InputError("duplicate pair entry", loc)
        pairs[(i, j, sign)] = (fav, unfav)

    selves: dict[int, tuple[Fraction, Fraction]] = {}
    for k, entry in enumerate(doc.get("self", [])):
        loc = f"$.utilities.self[{k}]"
        if not isinstance(entry, dict) or set(entry) != {"i", "survive", "fail"}:
            raise InputError("expected keys i, survive, fail", loc)
        i = idx(entry["i"], loc)
        surv, fail = num(entry["survive"], loc), num(entry["fail"], loc)
        if surv < fail:
            raise InputError(f"t({entry['i']},{entry['i']}) survive {surv} < fail {fail}", loc)
        if i in selves:
            raise InputError("duplicate self entry", loc)
        selves[i] = (surv, fail)
    return make_model(env.n, form, pairs, selves)


def parse_game(text: str | bytes) -> tuple[Environment, UtilityModel]:
    """Parse an environment file together with its optional utilities section."""
    from .environment import environment_from_dict

    doc = load_json(text, "environment")
    env = environment_from_dict(doc)
    return env, model_from_dict(env, doc.get("utilities"))


def model_to_dict(env: Environment, model: UtilityModel) -> dict:
    labels = env.labels
    return {
        "form": model.form.value,
        "pairs": [
            {
                "i": labels[i],
                "j": labels[j],
                "sign": s.value,
                "favorable": format_rational(a),
                "unfavorable": format_rational(b),
            }
            for (i, j, s), (a, b) in model.pairs
        ],
        "self": [
            {"i": labels[i], "survive": format_rational(a), "fail": format_rational(b)} for i, (a, b) in model.selves
        ],
    }
