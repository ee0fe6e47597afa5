"""The signed environment graph on which a game is played.

Countries are dense integer ids ``0..n-1``; files use string labels that are
mapped to ids in file order. Relations live on unordered pairs and are either
``Relation.FRIEND`` or ``Relation.ADVERSARY``; an absent pair means no
relationship at all. Every country is implicitly its own friend.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .errors import InputError
from .rational import format_rational, parse_rational

ENV_KEYS = {"countries", "relations", "utilities"}


class Relation(enum.Enum):
    FRIEND = "friend"
    ADVERSARY = "adversary"


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Environment:
    """Immutable signed graph with exact powers.

    ``relations`` is a sorted tuple of ``(i, j, Relation)`` with ``i < j``.
    Use :func:`make_environment` rather than the constructor when starting from
    a mapping.
    """

    labels: tuple[str, ...]
    powers: tuple[Fraction, ...]
    relations: tuple[tuple[int, int, Relation], ...] = ()
    _lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _friends: tuple = field(default=(), init=False, repr=False, compare=False, hash=False)
    _adversaries: tuple = field(default=(), init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n = len(self.labels)
        if len(self.powers) != n:
            raise InputError("labels and powers differ in length")
        if len(set(self.labels)) != n:
            raise InputError("duplicate country label")
        for i, p in enumerate(self.powers):
            if not isinstance(p, Fraction):
                raise InputError(f"power of {self.labels[i]!r} is not a Fraction")
            if p < 0:
                raise InputError(f"negative power {p} for country {self.labels[i]!r}")
        lookup = {}
        for i, j, sign in self.relations:
            if i == j:
                raise InputError(f"self-relation on country {self.labels[i]!r}")
            if not (0 <= i < n and 0 <= j < n) or i > j:
                raise InputError(f"bad relation pair ({i}, {j})")
            if (i, j) in lookup:
                raise InputError(f"duplicate pair ({self.labels[i]}, {self.labels[j]})")
            lookup[(i, j)] = Relation(sign)
        if list(self.relations) != sorted(self.relations, key=lambda r: (r[0], r[1])):
            raise InputError("relations must be sorted by pair")
        friends = [{i} for i in range(n)]
        adversaries = [set() for _ in range(n)]
        for (i, j), sign in lookup.items():
            target = friends if sign is Relation.FRIEND else adversaries
            target[i].add(j)
            target[j].add(i)
        object.__setattr__(self, "_lookup", lookup)
        object.__setattr__(self, "_friends", tuple(frozenset(f) for f in friends))
        object.__setattr__(self, "_adversaries", tuple(frozenset(a) for a in adversaries))

    @property
    def n(self) -> int:
        return len(self.labels)

    def check_id(self, i: int) -> int:
        if type(i) is int and 0 <= i < len(self.labels):
            return i
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < self.n:
            raise InputError(f"unknown country id {i!r}")
        return i

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown country label {label!r}") from None

    def relation(self, i: int, j: int) -> Relation | None:
        """Sign of the pair ``{i, j}``, or ``None`` when the pair is absent."""
        self.check_id(i)
        self.check_id(j)
        if i == j:
            return Relation.FRIEND
        return self._lookup.get(_pair(i, j))

    def friends(self, i: int) -> frozenset[int]:
        self.check_id(i)
        return self._friends[i]

    def adversaries(self, i: int) -> frozenset[int]:
        self.check_id(i)
        return self._adversaries[i]

    def neighbors(self, i: int) -> frozenset[int]:
        """``F_i | A_i`` without ``i`` itself."""
        return (self.friends(i) | self.adversaries(i)) - {i}

    def allowed_columns(self, i: int) -> tuple[int, ...]:
        """Columns where row ``i`` of a strategy matrix may be nonzero."""
        return tuple(sorted(self.friends(i) | self.adversaries(i)))


def make_environment(
    labels: Iterable[str],
    powers: Iterable[Any],
    relations: Mapping[tuple[int, int], Relation | str] | Iterable = (),
) -> Environment:
    """Build an environment from loose inputs (ids or rationals as strings)."""
    labels = tuple(str(x) for x in labels)
    powers = tuple(parse_rational(p) for p in powers)
    items = relations.items() if isinstance(relations, Mapping) else ((r[:2], r[2]) for r in relations)
    triples = {}
    for (i, j), sign in items:
        if i == j:
            raise InputError(f"self-relation on country {labels[i]!r}")
        key = _pair(i, j)
        if key in triples:
            raise InputError(f"duplicate pair ({labels[key[0]]}, {labels[key[1]]})")
        triples[key] = Relation(sign)
    rels = tuple((i, j, s) for (i, j), s in sorted(triples.items()))
    return Environment(labels, powers, rels)


def friends_of(env: Environment, i: int) -> frozenset[int]:
    return env.friends(i)


def adversaries_of(env: Environment, i: int) -> frozenset[int]:
    return env.adversaries(i)


def with_relation(env: Environment, i: int, j: int, sign: Relation | None) -> Environment:
    """Copy of ``env`` with pair ``{i, j}`` set to ``sign`` (``None`` removes it)."""
    env.check_id(i)
    env.check_id(j)
    if i == j:
        raise InputError("a country cannot be related to itself")
    key = _pair(i, j)
    rels = {(a, b): s for a, b, s in env.relations if (a, b) != key}
    if sign is not None:
        rels[key] = Relation(sign)
    return Environment(env.labels, env.powers, tuple((a, b, s) for (a, b), s in sorted(rels.items())))


def add_friend(env: Environment, i: int, j: int) -> Environment:
    """Make ``i`` and ``j`` friends. The pair must not already be friends."""
    if i == j:
        raise InputError("a country cannot befriend itself")
    if env.relation(i, j) is Relation.FRIEND:
        raise InputError(f"{env.labels[i]} and {env.labels[j]} are already friends")
    return with_relation(env, i, j, Relation.FRIEND)


# --------------------------------------------------------------------------- files


def load_json(text: str | bytes, what: str = "input") -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"{what} is not UTF-8: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, f"{what} line {exc.lineno} column {exc.colno}") from None


def environment_from_dict(doc: Any) -> Environment:
    if not isinstance(doc, dict):
        raise InputError("environment file must hold a JSON object", "$")
    unknown = set(doc) - ENV_KEYS
    if unknown:
        raise InputError(f"unknown keys {sorted(unknown)}", "$")
    countries = doc.get("countries")
    if not isinstance(countries, list):
        raise InputError("'countries' must be an array", "$.countries")
    labels: list[str] = []
    powers: list[Fraction] = []
    for k, c in enumerate(countries):
        loc = f"$.countries[{k}]"
        if not isinstance(c, dict) or set(c) != {"label", "power"}:
            raise InputError("expected an object with exactly 'label' and 'power'", loc)
        label = c["label"]
        if not isinstance(label, str):
            raise InputError("label must be a string", loc)
        if label in labels:
            raise InputError(f"duplicate country label {label!r}", loc)
        try:
            p = parse_rational(c["power"])
        except ValueError as exc:
            raise InputError(str(exc), loc) from None
        if p < 0:
            raise InputError(f"negative power {p} for country {label!r}", loc)
        labels.append(label)
        powers.append(p)

    relations = doc.get("relations", [])
    if not isinstance(relations, list):
        raise InputError("'relations' must be an array", "$.relations")
    triples: dict[tuple[int, int], Relation] = {}
    for k, r in enumerate(relations):
        loc = f"$.relations[{k}]"
        if not isinstance(r, dict) or set(r) != {"a", "b", "sign"}:
            raise InputError("expected an object with exactly 'a', 'b' and 'sign'", loc)
        ends = []
        for key in ("a", "b"):
            if r[key] not in labels:
                raise InputError(f"relation names unknown label {r[key]!r}", loc)
            ends.append(labels.index(r[key]))
        if ends[0] == ends[1]:
            raise InputError(f"self-relation on {r['a']!r}", loc)
        if r["sign"] not in ("friend", "adversary"):
            raise InputError(f"sign must be 'friend' or 'adversary', got {r['sign']!r}", loc)
        key = _pair(*ends)
        if key in triples:
            raise InputError(f"duplicate pair ({r['a']}, {r['b']})", loc)
        triples[key] = Relation(r["sign"])
    return Environment(tuple(labels), tuple(powers), tuple((i, j, s) for (i, j), s in sorted(triples.items())))


def parse_environment(text: str | bytes) -> Environment:
    """Parse an environment file. A ``utilities`` section is accepted but ignored here."""
    return environment_from_dict(load_json(text, "environment"))


def canonicalize(env: Environment) -> Environment:
    """Relabel ids so that countries are sorted by label."""
    order = sorted(range(env.n), key=lambda i: env.labels[i])
    new_id = {old: new for new, old in enumerate(order)}
    rels = {_pair(new_id[i], new_id[j]): s for i, j, s in env.relations}
    return Environment(
        tuple(env.labels[i] for i in order),
        tuple(env.powers[i] for i in order),
        tuple((i, j, s) for (i, j), s in sorted(rels.items())),
    )


def environment_to_dict(env: Environment) -> dict:
    env = canonicalize(env)
    rels = sorted(
        (tuple(sorted((env.labels[i], env.labels[j]))), s.value) for i, j, s in env.relations
    )
    return {
        "countries": [{"label": l, "power": format_rational(p)} for l, p in zip(env.labels, env.powers)],
        "relations": [{"a": a, "b": b, "sign": s} for (a, b), s in rels],
    }


def serialize_environment(env: Environment) -> str:
    return json.dumps(environment_to_dict(env), indent=2, sort_keys=True) + "\n"
