"""Command-line front end.

Every command prints one JSON document (or writes it to ``--out``) made of a
``manifest`` (command, parameters, input digests, tool version) and a
``report``. Exit codes: 0 success, 2 malformed input, 3 analysis failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    Mode,
    check_friend_extension,
    construct_corollary1_pair,
    detect_paradox,
    price_of_anarchy,
    theorem4_bounds,
)
from .environment import Environment, Relation, environment_to_dict
from .equilibrium import GameSolver, best_response_dynamics, enumerate_equilibria
from .errors import InputError, PagError, PreconditionError
from .grid import default_grid, max_space_from_env
from .mechanics import (
    StrategyMatrix,
    allocation_to_dict,
    parse_allocation,
    self_allocation,
    states,
    supports_and_threats,
)
from .rational import format_rational, parse_rational
from .utility import UtilityModel, make_model, model_to_dict, parse_game, total_utility, total_welfare, with_form


class Inputs:
    """Reads files once and remembers their digests for the manifest."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def read(self, role: str, path: str) -> bytes:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
        self.digests[role] = "sha256:" + hashlib.sha256(data).hexdigest()
        return data

    def game(self, role: str, path: str, form: str | None) -> tuple[Environment, UtilityModel]:
        env, model = parse_game(self.read(role, path))
        if form:
            model = with_form(model, form)
        return env, model


def _country(env: Environment, label: str) -> int:
    return env.index(label)


def _grid(env: Environment, args) -> int:
    if args.grid is not None:
        return args.grid
    return default_grid(env, max_space_from_env())


def _states_dict(env: Environment, U: StrategyMatrix) -> dict:
    return {env.labels[i]: x.value for i, x in enumerate(states(env, U))}


def _matrix_dict(env, model, U) -> dict:
    out = allocation_to_dict(U)
    out["states"] = _states_dict(env, U)
    out["welfare"] = format_rational(total_welfare(env, model, U))
    return out


# --------------------------------------------------------------------------- commands


def cmd_validate(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, None)
    return {
        "valid": True,
        "countries": len(env.labels),
        "relations": len(env.relations),
        "form": model.form.value,
    }


def cmd_states(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, args.form)
    U = parse_allocation(env, inputs.read("allocation", args.alloc))
    sigma, tau = supports_and_threats(env, U)
    xs = states(env, U)
    return {
        "countries": {
            env.labels[i]: {
                "sigma": format_rational(sigma[i]),
                "tau": format_rational(tau[i]),
                "state": xs[i].value,
                "utility": format_rational(total_utility(env, model, U, i)),
            }
            for i in range(env.n)
        },
        "welfare": format_rational(total_welfare(env, model, U)),
    }


def cmd_best_response(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, args.form)
    U = parse_allocation(env, inputs.read("allocation", args.alloc))
    i = _country(env, args.country)
    br = GameSolver(env, model).best_response(U, i)
    lab = env.labels
    return {
        "country": lab[i],
        "value": format_rational(br.value),
        "current": format_rational(total_utility(env, model, U, i)),
        "witness": {lab[j]: format_rational(u) for j, u in enumerate(br.witness) if u != 0},
        "witness_rows": [{lab[j]: format_rational(u) for j, u in enumerate(r) if u != 0} for r in br.witness_rows],
        "target_sets": [
            {"friends": sorted(lab[j] for j in tf), "adversaries": sorted(lab[j] for j in ta), "survives": sv}
            for tf, ta, sv in br.target_sets
        ],
    }


def cmd_equilibria(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, args.form)
    d = _grid(env, args)
    args.grid = d
    eq = enumerate_equilibria(env, model, d, concept=args.concept, jobs=args.jobs)
    return {
        "grid_denominator": d,
        "search_space": eq.search_space,
        "exhaustive_over_grid": eq.exhaustive_over_grid,
        "concept": eq.concept,
        "count": len(eq),
        "equilibria": [_matrix_dict(env, model, U) for U in eq],
    }


def cmd_dynamics(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, args.form)
    U0 = parse_allocation(env, inputs.read("allocation", args.alloc)) if args.alloc else self_allocation(env)
    res = best_response_dynamics(env, model, U0, args.schedule, args.max_rounds, args.seed)
    solver = GameSolver(env, model)
    return {
        "converged": res.converged,
        "rounds": res.rounds,
        "is_equilibrium": solver.is_equilibrium(res.final),
        "final": _matrix_dict(env, model, res.final),
        "trajectory": [allocation_to_dict(U) for U in res.trajectory],
    }


def cmd_paradox(args, inputs: Inputs) -> dict:
    env_a, model_a = inputs.game("first", args.first, args.form)
    env_b, model_b = inputs.game("second", args.second, args.form)
    i = _country(env_a, args.country)
    # accept the two files in either order; the one where i has fewer friends is "small"
    try:
        check_friend_extension(env_a, env_b, i)
        small, large = (env_a, model_a, "first"), (env_b, model_b, "second")
    except PreconditionError:
        check_friend_extension(env_b, env_a, i)
        small, large = (env_b, model_b, "second"), (env_a, model_a, "first")
    d = args.grid if args.grid is not None else min(default_grid(small[0]), default_grid(large[0]))
    args.grid = d
    rep = detect_paradox(small[0], large[0], small[1], large[1], i, Mode(args.mode), d, jobs=args.jobs)
    out = rep.to_dict()
    out["small_input"], out["large_input"] = small[2], large[2]
    return out


def cmd_poa(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, args.form)
    d = _grid(env, args)
    args.grid = d
    return price_of_anarchy(env, model, d, jobs=args.jobs).to_dict()


def cmd_bounds(args, inputs: Inputs) -> dict:
    env, model = inputs.game("environment", args.env, args.form)
    lower, upper = theorem4_bounds(env, model)
    return {"lower": format_rational(lower), "upper": format_rational(upper)}


def _env_file(env: Environment, model: UtilityModel | None) -> str:
    doc = environment_to_dict(env)
    if model is not None:
        doc["utilities"] = model_to_dict(env, model)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_construct(args, inputs: Inputs) -> dict:
    powers = [parse_rational(p) for p in args.powers.split(",")]
    labels = [str(k + 1) for k in range(args.n)]

    def idx(label: str) -> int:
        if label not in labels:
            raise InputError(f"unknown country label {label!r}; constructed labels are 1..{args.n}")
        return labels.index(label)

    i = idx(args.i)
    if args.kind == "thm3":
        if args.j is None:
            raise InputError("thm3 needs --j")
        subset = [idx(args.j)]
    else:
        if not args.subset:
            raise InputError("cor1 needs --subset")
        subset = [idx(s) for s in args.subset.split(",")]
    large, small = construct_corollary1_pair(args.n, powers, i, subset, args.intra)
    model = None
    if args.t_friend is not None or args.t_adversary is not None:
        tf = parse_rational(args.t_friend if args.t_friend is not None else "1")
        ta = parse_rational(args.t_adversary if args.t_adversary is not None else "1")
        pairs = {}
        for j in subset:
            pairs[(i, j, Relation.FRIEND)] = (tf, 0)
            pairs[(i, j, Relation.ADVERSARY)] = (ta, 0)
        model = make_model(args.n, "additive", pairs)
    written = {}
    for tag, env in (("small", small), ("large", large)):
        text = _env_file(env, model)
        path = f"{args.out_prefix}_{tag}.json"
        Path(path).write_text(text, encoding="utf-8")
        written[tag] = {"path": path, "digest": "sha256:" + hashlib.sha256(text.encode()).hexdigest()}
    return {"country": args.i, "subset": [labels[j] for j in subset], "files": written}


# --------------------------------------------------------------------------- plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pag", description="Power allocation game solver.")
    parser.add_argument("--version", action="version", version=f"pag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=False, form=True, jobs=False):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if form:
            p.add_argument("--form", choices=["basic", "friends-first", "additive"])
        if grid:
            p.add_argument("--grid", type=int, help="grid denominator (default: largest under the space cap)")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes for verification")

    p = sub.add_parser("validate", help="parse and validate an environment file")
    p.add_argument("env")
    common(p, form=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("states", help="support, threat and state of every country")
    p.add_argument("env")
    p.add_argument("alloc")
    common(p)
    p.set_defaults(func=cmd_states)

    p = sub.add_parser("best-response", help="exact best response of one country")
    p.add_argument("env")
    p.add_argument("alloc")
    p.add_argument("--country", required=True)
    common(p)
    p.set_defaults(func=cmd_best_response)

    p = sub.add_parser("equilibria", help="enumerate grid equilibria")
    p.add_argument("env")
    p.add_argument("--concept", choices=["utility", "preference"], default="utility")
    common(p, grid=True, jobs=True)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("dynamics", help="run best-response dynamics")
    p.add_argument("env")
    p.add_argument("--alloc", help="starting allocation (default: everyone on itself)")
    p.add_argument("--schedule", choices=["round-robin", "random"], default="round-robin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=100)
    common(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("paradox", help="compare optimal welfare across two environments")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--country", required=True)
    p.add_argument("--mode", choices=["equilibria", "all"], default="equilibria")
    common(p, grid=True, jobs=True)
    p.set_defaults(func=cmd_paradox)

    p = sub.add_parser("poa", help="price of anarchy over the grid")
    p.add_argument("env")
    common(p, grid=True, jobs=True)
    p.set_defaults(func=cmd_poa)

    p = sub.add_parser("bounds", help="analytic price-of-anarchy bounds")
    p.add_argument("env")
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("construct", help="build an environment pair exhibiting the paradox")
    p.add_argument("kind", choices=["thm3", "cor1"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--powers", required=True, help="comma-separated powers")
    p.add_argument("--i", required=True, help="label of the country (1-based)")
    p.add_argument("--j", help="label of the other country (thm3)")
    p.add_argument("--subset", help="comma-separated labels (cor1)")
    p.add_argument("--intra", choices=["adversary", "none", "literal"], default="adversary")
    p.add_argument("--t-friend", help="favorable value of the pair as friends")
    p.add_argument("--t-adversary", help="favorable value of the pair as adversaries")
    p.add_argument("--out-prefix", required=True)
    common(p, form=False)
    p.set_defaults(func=cmd_construct)
    return parser


PARAMS = ("grid", "form", "mode", "country", "seed", "jobs", "concept", "schedule", "max_rounds", "kind", "n",
          "powers", "i", "j", "subset", "intra", "t_friend", "t_adversary")


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    inputs = Inputs()
    try:
        report = args.func(args, inputs)
    except InputError as exc:
        print(f"pag {args.command}: {exc}", file=sys.stderr)
        return 2
    except PagError as exc:
        print(f"pag {args.command}: {exc}", file=sys.stderr)
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}, "manifest": _manifest(args, inputs)}, args.out)
        return 3
    _emit({"manifest": _manifest(args, inputs), "report": report}, args.out)
    return 0


def _manifest(args, inputs: Inputs) -> dict:
    params = {k: getattr(args, k) for k in PARAMS if getattr(args, k, None) is not None and k != "jobs"}
    if args.command in ("equilibria", "paradox", "poa"):
        params["max_space"] = max_space_from_env()
    return {
        "command": args.command,
        "inputs": dict(sorted(inputs.digests.items())),
        "parameters": params,
        "tool_version": __version__,
    }


if __name__ == "__main__":
    sys.exit(main())
