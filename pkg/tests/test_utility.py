import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import A, F, env_and_matrix, example_model, matrix
from pag.environment import make_environment
from pag.errors import InputError
from pag.mechanics import State, self_allocation, states
from pag.utility import (
    UtilityForm,
    favorable_sets,
    make_model,
    model_from_dict,
    model_to_dict,
    parse_game,
    realized_pairwise,
    total_utility,
    total_welfare,
    with_form,
)


@pytest.fixture
def u_attack(ex1a):
    return matrix(ex1a, {(0, 1): 8, (1, 0): 6, (2, 2): 1})


def test_precarious_is_favorable_both_ways(ex1a, ex1b):
    model = example_model()
    assert realized_pairwise(ex1a, model, 2, 1, State.PRECARIOUS) == 1
    assert realized_pairwise(ex1b, model, 2, 1, State.PRECARIOUS) == 2


def test_unsafe_friend_realizes_unfavorable(ex1a):
    assert realized_pairwise(ex1a, example_model(), 2, 1, State.UNSAFE) == 0


def test_favorable_sets(ex1a, u_attack):
    assert favorable_sets(ex1a, u_attack, 2) == ({2, 0}, set())
    M = self_allocation(ex1a)
    for i in range(3):
        assert favorable_sets(ex1a, M, i) == (ex1a.friends(i), set())


def test_favorable_sets_all_adversaries():
    # d crushes b and c; b's attack leaves a unsafe as well
    env = make_environment("abcd", [0, 1, 0, 3], {(0, 1): A, (0, 2): A, (1, 3): A, (2, 3): A})
    M = matrix(env, {(1, 0): 1, (3, 1): 2, (3, 2): 1})
    assert [x.value for x in states(env, M)][:3] == ["unsafe"] * 3
    assert favorable_sets(env, M, 0) == (set(), {1, 2})


@pytest.mark.parametrize("form", list(UtilityForm))
def test_unsafe_gets_fail_value(ex1a, u_attack, form):
    model = make_model(3, form, selves={1: (5, 3)})
    assert total_utility(ex1a, model, u_attack, 1) == 3


@pytest.mark.parametrize("form", list(UtilityForm))
def test_forms_on_example(ex1a, u_attack, form):
    # friend 2 is unsafe: basic drops it, additive adds t(0) = 0, friends-first drops the adversary tier
    assert total_utility(ex1a, make_model(3, form), u_attack, 2) == 2


def test_friends_first_tiers():
    env = make_environment("abcd", [3, 1, 1, 2], {(0, 1): F, (0, 2): A, (1, 3): A})
    model = make_model(4, "friends-first", {(0, 2, A): (5, 0)})
    # c precarious (favorable adversary) but friend b unsafe: adversary tier is withheld
    M = matrix(env, {(0, 2): 1, (0, 0): 2, (1, 1): 1, (2, 2): 1, (3, 1): 2})
    assert total_utility(env, model, M, 0) == 1
    assert total_utility(env, with_form(model, "basic"), M, 0) == 1 + 5
    # b rescued: top tier
    V = matrix(env, {(0, 2): 1, (0, 1): 2, (1, 1): 1, (2, 2): 1, (3, 1): 2})
    assert total_utility(env, model, V, 0) == 1 + 1 + 5


def test_basic_welfare_all_friends():
    env = make_environment("abc", [1, 1, 1], {(0, 1): F, (0, 2): F, (1, 2): F})
    assert total_welfare(env, make_model(3, "basic"), self_allocation(env)) == 9


def test_single_country_basic():
    env = make_environment("a", [3])
    model = make_model(1, "basic", selves={0: (7, 2)})
    assert total_utility(env, model, self_allocation(env), 0) == 7


def test_model_rejects_inverted_values():
    with pytest.raises(InputError, match="favorable"):
        make_model(2, pairs={(0, 1, F): (0, 1)})
    with pytest.raises(InputError):
        make_model(2, selves={0: (0, 1)})


def test_game_file(ex1a):
    text = (Path(__file__).parent / "data" / "example1a.json").read_text()
    env, model = parse_game(text)
    assert env == ex1a
    assert model == example_model()
    assert model_from_dict(env, json.loads(json.dumps(model_to_dict(env, model)))) == model


@pytest.mark.parametrize(
    "utilities, fragment",
    [
        ({"pairs": [{"i": "1", "j": "2", "sign": "friend", "favorable": 0, "unfavorable": 1}]}, "favorable 0 < unfavorable 1"),
        ({"self": [{"i": "1", "survive": 0, "fail": 1}]}, "survive 0 < fail 1"),
        ({"form": "weird"}, "unknown form"),
        ({"pairs": [{"i": "1", "j": "1", "favorable": 1, "unfavorable": 0}]}, "self values"),
        ({"pairs": [{"i": "1", "j": "3", "favorable": 1, "unfavorable": 0}]}, "unknown country label"),
    ],
)
def test_utility_errors(utilities, fragment):
    doc = {"countries": [{"label": "1", "power": 1}, {"label": "2", "power": 1}], "utilities": utilities}
    with pytest.raises(InputError, match=fragment):
        parse_game(json.dumps(doc))


def test_unrelated_pair_needs_sign():
    doc = {
        "countries": [{"label": "1", "power": 1}, {"label": "2", "power": 1}],
        "utilities": {"pairs": [{"i": "1", "j": "2", "favorable": 1, "unfavorable": 0}]},
    }
    with pytest.raises(InputError, match="explicit sign"):
        parse_game(json.dumps(doc))


values = st.fractions(0, 5, max_denominator=4)


@settings(max_examples=80)
@given(env_and_matrix(max_n=4), st.sampled_from(list(UtilityForm)), st.data())
def test_utilities_match_definitions(case, form, data):
    env, M = case
    pairs = {}
    for i in range(env.n):
        for j in env.neighbors(i):
            lo = data.draw(values)
            pairs[(i, j, env.relation(i, j))] = (lo + data.draw(values), lo)
    selves = {}
    for i in range(env.n):
        lo = data.draw(values)
        selves[i] = (lo + data.draw(values), lo)
    model = make_model(env.n, form, pairs, selves)
    for i in range(env.n):
        assert total_utility(env, model, M, i) == oracles.utility(env, model, M.rows, i)


@given(env_and_matrix())
def test_welfare_floor(case):
    # someone always survives, so welfare is at least (n-1) min fail + min survive
    env, M = case
    model = make_model(env.n)
    assert total_welfare(env, model, M) >= (env.n - 1) * 0 + 1
