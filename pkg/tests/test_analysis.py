import random
from fractions import Fraction

import pytest
from hypothesis import given

from conftest import A, F, env_and_matrix, example_model, matrix, random_environment
from pag.analysis import (
    Game,
    Mode,
    check_friend_extension,
    check_necessary_condition,
    check_theorem1,
    conservation_terms,
    construct_corollary1_pair,
    construct_theorem3_pair,
    detect_paradox,
    lemma1_check,
    optimal_welfare,
    price_of_anarchy,
    theorem4_bounds,
)
from pag.environment import add_friend, make_environment, with_relation
from pag.errors import InputError, NoEquilibriumError, PreconditionError
from pag.mechanics import State, self_allocation, states
from pag.utility import make_model

SURVIVE = (State.SAFE, State.PRECARIOUS)
FAIL = (State.UNSAFE, State.PRECARIOUS)


def all_friends(n, powers=None):
    powers = powers or [1] * n
    return make_environment([str(k + 1) for k in range(n)], powers, {(a, b): F for a in range(n) for b in range(a + 1, n)})


# --------------------------------------------------------------------------- welfare and paradox


def test_optimal_welfare_over_equilibria(ex1a, ex1b):
    model = example_model()
    assert optimal_welfare(ex1b, model, 2, Mode.EQUILIBRIA, 1) == 4
    assert optimal_welfare(ex1a, model, 2, "equilibria", 1) == 3


def test_optimal_welfare_all_mode(ex1a):
    assert optimal_welfare(ex1a, example_model(), 2, Mode.ALL, 1) == 3


@pytest.mark.parametrize("mode", list(Mode))
def test_single_country_welfare(mode):
    env = make_environment("a", [2])
    assert optimal_welfare(env, make_model(1, selves={0: (4, 1)}), 0, mode, 1) == 4


def test_paradox_on_example(ex1a, ex1b):
    rep = detect_paradox(ex1b, ex1a, example_model(), example_model(), 2)
    assert rep.paradox and (rep.welfare_small, rep.welfare_large) == (4, 3)
    assert rep.to_dict()["welfare_small"] == "4/1"


def test_no_paradox_with_equal_values(ex1a, ex1b):
    model = example_model(t_adversary=1)
    rep = detect_paradox(ex1b, ex1a, model, model, 2)
    assert not rep.paradox and rep.welfare_small == rep.welfare_large == 3


def test_paradox_needs_more_friends(ex1a, ex1b):
    with pytest.raises(PreconditionError):
        detect_paradox(ex1a, ex1a, example_model(), example_model(), 2)
    with pytest.raises(PreconditionError):
        detect_paradox(ex1a, ex1b, example_model(), example_model(), 2)


def test_friend_extension_only_touches_country(ex1b):
    grown = add_friend(add_friend(ex1b, 1, 2), 0, 1)
    with pytest.raises(PreconditionError):
        check_friend_extension(ex1b, grown, 2)
    assert check_friend_extension(ex1b, add_friend(ex1b, 1, 2), 2) == [1]


def test_paradox_models_must_agree(ex1a, ex1b):
    with pytest.raises(PreconditionError):
        detect_paradox(ex1b, ex1a, example_model(), make_model(3, "basic"), 2)


def test_no_equilibria_is_reported(ex1a):
    game = Game.build(ex1a, example_model(), 1)
    game._eq = type(game.equilibria)(1, (), True, 3780)
    with pytest.raises(NoEquilibriumError):
        optimal_welfare(ex1a, example_model(), 0, game=game)


# --------------------------------------------------------------------------- survival


def test_theorem1_on_example(ex1a, ex1b):
    rep = check_theorem1(ex1b, ex1a, example_model(), 2)
    assert rep.holds
    # in the smaller environment 3 can be sacrificed, so the implication is vacuous here
    assert not rep.survives_small and rep.survives_large


def test_theorem1_isolated_country():
    small = make_environment("abc", [1, 2, 2], {(1, 2): A})
    rep = check_theorem1(small, add_friend(small, 0, 1), make_model(3), 0)
    assert rep.survives_small and rep.survives_large and rep.holds


@pytest.mark.parametrize("seed", range(15))
def test_theorem1_random_triples(seed):
    rng = random.Random(seed)
    env = random_environment(rng, 3, max_power=3)
    i, j = rng.sample(range(3), 2)
    small = with_relation(env, i, j, rng.choice([None, A]))
    assert check_theorem1(small, add_friend(small, i, j), make_model(3), i).holds


# --------------------------------------------------------------------------- necessary condition


def test_necessary_condition():
    model = make_model(3, pairs={(2, 1, F): (1, 0), (2, 1, A): (2, 0)})
    holds, witnesses = check_necessary_condition(model, 2, [1])
    assert holds and witnesses == [1]
    assert check_necessary_condition(make_model(3), 0) == (True, [1, 2])


def test_necessary_condition_boundary():
    model = make_model(3, pairs={(0, j, s): (1, 1) for j in (1, 2) for s in (F, A)})
    assert check_necessary_condition(model, 0) == (False, [])


def test_necessary_condition_explicit():
    with pytest.raises(InputError):
        check_necessary_condition(make_model(3), 0, require_explicit=True)


# --------------------------------------------------------------------------- constructions


def test_theorem3_construction_edges():
    large, small = construct_theorem3_pair(4, [1, 1, 2, 2], 0, 1)
    assert large.relations == ((0, 1, F), (0, 2, F), (0, 3, F), (1, 2, A), (1, 3, A))
    assert small.relations == ((0, 1, A), (0, 2, F), (0, 3, F), (1, 2, A), (1, 3, A))


def _pattern_holds(env, model, S):
    eq = Game.build(env, model, 1).require_equilibria()
    for M in eq:
        xs = states(env, M)
        if any(xs[k] not in (FAIL if k in S else SURVIVE) for k in range(env.n)):
            return False
    return True


def test_theorem3_pattern_and_paradox():
    large, small = construct_theorem3_pair(4, [1, 1, 2, 2], 0, 1)
    model = make_model(4, pairs={(0, 1, F): (1, 0), (0, 1, A): (2, 0)})
    assert _pattern_holds(large, model, {1}) and _pattern_holds(small, model, {1})
    assert detect_paradox(small, large, model, model, 0).paradox


def test_singleton_subset_is_theorem3():
    assert construct_corollary1_pair(4, [1, 1, 2, 2], 0, [1]) == construct_theorem3_pair(4, [1, 1, 2, 2], 0, 1)


def test_corollary1_example():
    large, small = construct_corollary1_pair(5, [1, 1, 1, 3, 3], 0, [1, 2])
    assert check_friend_extension(small, large, 0) == [1, 2]
    assert large.relation(1, 2) is A and small.relation(1, 2) is A
    assert _pattern_holds(large, make_model(5), {1, 2})


def test_corollary1_without_intra_relations():
    large, small = construct_corollary1_pair(5, [1, 1, 1, 3, 3], 0, [1, 2], intra="none")
    assert large.relation(1, 2) is None and small.relation(1, 2) is None


def test_corollary1_literal_variant_is_not_a_clean_extension():
    large, small = construct_corollary1_pair(5, [1, 1, 1, 3, 3], 0, [1, 2], intra="literal")
    assert large.relation(1, 2) is None and small.relation(1, 2) is A
    with pytest.raises(PreconditionError):
        check_friend_extension(small, large, 0)


@pytest.mark.parametrize(
    "args",
    [
        (4, [1, 1, 2, 2], 0, [0]),
        (4, [1, 1, 2, 2], 0, []),
        (2, [1, 1], 0, [1]),
        (4, [3, 1, 2, 1], 0, [1]),
        (4, [1, 1, 2], 0, [1]),
    ],
)
def test_construction_preconditions(args):
    with pytest.raises(PreconditionError):
        construct_corollary1_pair(*args)


# --------------------------------------------------------------------------- lemma 1 and conservation


def test_lemma1_examples(ex1a):
    assert lemma1_check(ex1a, self_allocation(ex1a))
    assert lemma1_check(ex1a, matrix(ex1a, {(0, 1): 8, (1, 0): 6, (2, 2): 1}))


@given(env_and_matrix(max_n=6))
def test_lemma1_and_conservation(case):
    env, M = case
    assert lemma1_check(env, M)
    lhs, rhs = conservation_terms(env, M)
    assert lhs == rhs


# --------------------------------------------------------------------------- price of anarchy


def test_bounds_formula():
    env = all_friends(3)
    model = make_model(
        3, pairs={(0, 1, F): (2, 0), (0, 2, F): (1, 0), (1, 2, F): (1, 0), (2, 0, F): (1, 0), (2, 1, F): (0, 0)},
        selves={k: (2, 1) for k in range(3)},
    )
    assert theorem4_bounds(env, model) == (1, Fraction(15, 4))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bounds_all_friends(n):
    model = make_model(n, selves={k: (1, 1) for k in range(n)})
    assert theorem4_bounds(all_friends(n), model) == (1, n)


def test_bounds_guard():
    with pytest.raises(PreconditionError):
        theorem4_bounds(all_friends(3), make_model(3, selves={k: (0, 0) for k in range(3)}))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_poa_all_friends(n):
    rep = price_of_anarchy(all_friends(n, list(range(1, n + 1))), make_model(n, selves={k: (2, 1) for k in range(n)}), 1)
    assert rep.poa == 1 and rep.within_bounds


def test_poa_example(ex1a):
    rep = price_of_anarchy(ex1a, make_model(3, selves={k: (1, 1) for k in range(3)}), 1)
    assert rep.poa == Fraction(3, 2)
    assert rep.bound_A / rep.bound_B == 3 and rep.within_bounds


def test_poa_single_country():
    rep = price_of_anarchy(make_environment("a", [1]), make_model(1), 1)
    assert rep.poa == 1 and rep.equilibria == 1


def test_poa_invalid_when_worst_equilibrium_is_worthless():
    env = make_environment("ab", [1, 1], {(0, 1): A})
    rep = price_of_anarchy(env, make_model(2, default_favorable=0), 1)
    assert not rep.valid and rep.to_dict()["poa"] is None
