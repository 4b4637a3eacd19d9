"""Command-line surface.

Subcommands: check, lambda-min, synthesize, simulate, region, heatmap,
equalizer, trivial.  Exit codes: 0 success, 2 invalid input, 3 when a
strategy (or threshold) was requested for a constraint that is not
enforceable at the requested discount factor.  Errors go to stderr as
single-line JSON {"code": ..., "message": ...}; floating-point output is
printed with 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import enforce, games, plots, sim, synth
from .errors import AutocratError, InputError, NotEnforceableError, SynthesisError
from .game import (
    LinearRelationSpec,
    ObjectiveMatrix,
    StageGame,
    build_linear_phi,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_ENFORCEABLE = 3


def _round12(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _round12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round12(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(f"{float(x):.12g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"code": EXIT_INPUT, "message": message}), file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _emit_error(code: int, message: str) -> int:
    print(json.dumps({"code": code, "message": message}), file=sys.stderr)
    return code


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, str]]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        elif isinstance(v, list):
            rows.append((key, ";".join(str(x) for x in v)))
        else:
            rows.append((key, str(v)))
    return rows


def _emit(payload: dict, args) -> None:
    payload = _round12(payload)
    if getattr(args, "format", "json") == "csv":
        text = "\n".join(f"{k},{v}" for k, v in _flatten(payload)) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Shared argument plumbing


def _add_game_args(p: _Parser) -> None:
    p.add_argument("--game", help=f"builtin game name ({', '.join(games.BUILTIN_GAMES)})")
    p.add_argument("--param", default="", help="comma-separated game parameters, e.g. R=3,S=0,T=5,P=1")
    p.add_argument("--game-json", help="path to a stage-game JSON file")


def _add_objective_args(p: _Parser) -> None:
    p.add_argument("--kappa", type=float)
    p.add_argument("--chi", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--objective-json", help="path to an objective JSON file (phi matrix or relation coefficients)")


def _parse_params(text: str) -> dict:
    params = {}
    if not text:
        return params
    for item in text.split(","):
        if "=" not in item:
            raise InputError(f"bad --param entry {item!r}; expected key=value")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = float(v)
        except ValueError:
            raise InputError(f"non-numeric value for parameter {k.strip()!r}: {v!r}") from None
    return params


def _resolve_game(args) -> Optional[StageGame]:
    sources = [s for s in (args.game, args.game_json) if s]
    if len(sources) > 1:
        raise InputError("give exactly one game source (--game or --game-json)")
    if args.game:
        return games.make_game(args.game, **_parse_params(args.param))
    if args.game_json:
        return StageGame.from_json_file(args.game_json)
    return None


def _resolve_objective(args, game: Optional[StageGame]) -> ObjectiveMatrix:
    forms = []
    if args.kappa is not None or args.chi is not None:
        if args.kappa is None or args.chi is None:
            raise InputError("--kappa and --chi must be given together")
        forms.append("kappa_chi")
    if any(v is not None for v in (args.alpha, args.beta, args.gamma)):
        if None in (args.alpha, args.beta, args.gamma):
            raise InputError("--alpha, --beta, --gamma must be given together")
        forms.append("coefficients")
    if args.objective_json:
        forms.append("json")
    if len(forms) != 1:
        raise InputError("give exactly one objective form (--kappa/--chi, --alpha/--beta/--gamma, or --objective-json)")
    form = forms[0]
    if form == "json":
        with open(args.objective_json) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as e:
                raise InputError(f"malformed JSON in {args.objective_json}: {e}") from None
        from .game import objective_from_json_dict

        return objective_from_json_dict(d, game)
    if game is None:
        raise InputError("a stage game is required for a linear relation objective")
    if form == "kappa_chi":
        rel = LinearRelationSpec.from_kappa_chi(args.kappa, args.chi)
    else:
        rel = LinearRelationSpec.from_coefficients(args.alpha, args.beta, args.gamma)
    return build_linear_phi(game, rel)


def _figure_path(output: str) -> str:
    return output.rsplit(".", 1)[0] + ".png" if "." in output else output + ".png"


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_check(args) -> int:
    game = _resolve_game(args)
    phi = _resolve_objective(args, game)
    report = enforce.analyze(phi)
    _emit(report.to_json_dict(), args)
    return EXIT_OK


def _cmd_lambda_min(args) -> int:
    game = _resolve_game(args)
    phi = _resolve_objective(args, game)
    try:
        lam, _ = enforce.lambda_min(phi)
    except NotEnforceableError as e:
        return _emit_error(EXIT_NOT_ENFORCEABLE, str(e))
    print(f"{lam:.12g}")
    return EXIT_OK


def _synthesize_strategy(phi: ObjectiveMatrix, lam: float, K: float, reactive: bool):
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"discount factor {lam} outside [0, 1]")
    lam_min, wit = enforce.lambda_min(phi)
    if lam < lam_min - 1e-9:
        raise NotEnforceableError(
            f"discount factor {lam:.12g} is below the threshold {lam_min:.12g}"
        )
    if reactive:
        if phi.additive is None:
            raise InputError("--reactive requires an additive objective")
        if lam >= 1.0:
            raise InputError("--reactive synthesis needs lambda < 1")
        return synth.synthesize_reactive(phi, lam, wit.tau_plus, wit.tau_minus, K)
    if lam >= 1.0:
        return synth.synthesize_undiscounted(phi, wit.tau_plus, wit.tau_minus, K)
    return synth.synthesize_two_point(phi, lam, wit.tau_plus, wit.tau_minus, K)


def _strategy_json(strategy, game: Optional[StageGame]) -> dict:
    d = strategy.to_json_dict()
    if game is not None and isinstance(strategy, synth.TwoPointStrategy):
        labels = game.actions_y.labels
        d["base"] = {
            "respond_at_0": {labels[s]: strategy.respond(0.0, s) for s in range(len(labels))},
            "respond_at_1": {labels[s]: strategy.respond(1.0, s) for s in range(len(labels))},
        }
    elif game is not None and isinstance(strategy, synth.ReactiveStrategy):
        labels = game.actions_y.labels
        d["respond"] = {labels[s]: float(strategy.p_star[s]) for s in range(len(labels))}
    return d


def _cmd_synthesize(args) -> int:
    game = _resolve_game(args)
    phi = _resolve_objective(args, game)
    strategy = _synthesize_strategy(phi, args.lam, args.K, args.reactive)
    _emit(_strategy_json(strategy, game), args)
    return EXIT_OK


def _parse_opponent(spec: str, game: Optional[StageGame], n: int, seed: int):
    kind, _, arg = spec.partition(":")
    labels = game.actions_y.labels if game is not None else tuple(str(i) for i in range(n))

    def index_of(token: str) -> int:
        token = token.strip()
        if game is not None and token in labels:
            return labels.index(token)
        try:
            i = int(token)
        except ValueError:
            raise InputError(f"unknown opponent action {token!r}; have {labels}") from None
        if not 0 <= i < n:
            raise InputError(f"opponent action index {i} out of range")
        return i

    if kind == "all":
        return sim.Exogenous.constant(index_of(arg))
    if kind == "exogenous":
        if not arg:
            raise InputError("exogenous opponent needs actions, e.g. exogenous:C,D,D")
        return sim.Exogenous(tuple(index_of(t) for t in arg.split(",")))
    if kind == "alternating":
        if n < 2:
            raise InputError("alternating opponent needs at least two actions")
        return sim.Exogenous.alternating()
    if kind == "uniform":
        return sim.UniformRandom()
    if kind == "adversarial-max":
        return sim.Adversarial("max")
    if kind == "adversarial-min":
        return sim.Adversarial("min")
    if kind == "random-memory-one":
        if game is None:
            raise InputError("random-memory-one opponent needs a stage game")
        rng = sim.stream(seed, 0, 0, 2)
        return sim.sample_memory_one(game.shape, rng)
    raise InputError(
        f"unknown opponent {spec!r}; use all:<action>, exogenous:<a,b,...>, alternating, "
        "uniform, adversarial-max, adversarial-min, or random-memory-one"
    )


def _cmd_simulate(args) -> int:
    game = _resolve_game(args)
    phi = _resolve_objective(args, game)
    strategy = _synthesize_strategy(phi, args.lam, args.K, reactive=False)
    n = phi.shape[1]
    opponent = _parse_opponent(args.opponent, game, n, args.seed)

    if isinstance(opponent, sim.MemoryOne) and args.backend == "exact":
        raise InputError("memory-one opponents react to realized actions; use --backend sampled")

    if args.backend == "sampled":
        res = sim.monte_carlo_payoffs(
            strategy, opponent, args.lam, args.trials, args.seed,
            game=game, phi=phi, geometric=args.geometric, horizon=args.horizon,
        )
        payload = {
            "backend": "sampled",
            "trials": res.trials,
            "horizon": res.horizon,
            "phi_mean": res.phi_mean,
            "phi_se": res.phi_se,
        }
        if res.payoffs is not None:
            payload.update(
                pi_x=res.payoffs.pi_x, pi_y=res.payoffs.pi_y,
                pi_x_se=res.payoff_se.pi_x, pi_y_se=res.payoff_se.pi_y,
            )
        _emit_summary(payload, args)
        return EXIT_OK

    rng = sim.stream(args.seed, 0, 0, 3)
    labels = game.actions_y.labels if game is not None else None
    if strategy.mode == "undiscounted":
        T = args.horizon if args.horizon is not None else 1000
        avg = sim.cesaro_check(strategy, opponent, T, rng)
        payload = {
            "backend": "exact",
            "horizon": T,
            "cesaro_average": avg,
            "bound": strategy.gap / (T + 1),
        }
        _emit_summary(payload, args)
        return EXIT_OK
    T = args.horizon if args.horizon is not None else sim.truncation_horizon(args.lam, strategy.gap)
    res = sim.exact_discounted_sum(strategy, opponent, T, rng, labels=labels)
    payload = {
        "backend": "exact",
        "horizon": T,
        "partial_sum": res.partial_sum,
        "predicted_residual": res.predicted_residual,
        "normalized_total": (1.0 - args.lam) * (res.partial_sum - res.predicted_residual),
    }
    if args.output:
        res.trace.write_csv(args.output)
        if not args.no_plot:
            plots.plot_trace(res.trace, _figure_path(args.output))
        payload["trace"] = args.output
    _emit_summary(payload, args)
    return EXIT_OK


def _emit_summary(payload: dict, args) -> None:
    payload = _round12(payload)
    if getattr(args, "format", "json") == "csv":
        sys.stdout.write("\n".join(f"{k},{v}" for k, v in _flatten(payload)) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _cmd_region(args) -> int:
    game = _resolve_game(args)
    if game is None:
        raise InputError("region sampling needs a stage game")
    phi = _resolve_objective(args, game)
    strategy = _synthesize_strategy(phi, args.lam, args.K, reactive=False)
    points = sim.payoff_region(
        strategy, args.opponents, args.lam, args.seed,
        game=game, phi=phi, trials_per_opponent=args.trials, geometric=args.geometric,
    )
    if args.output:
        sim.write_region_csv(points, args.output)
        if not args.no_plot:
            plots.plot_region(points, _figure_path(args.output))
    else:
        sys.stdout.write("pi_y,pi_x\n")
        for pt in points:
            sys.stdout.write(f"{pt.pi_y:.12g},{pt.pi_x:.12g}\n")
    return EXIT_OK


def _cmd_heatmap(args) -> int:
    game = _resolve_game(args)
    if game is None:
        raise InputError("heatmap sweeps need a stage game")
    r_range = (args.r_min, args.r_max)
    theta_range = (args.theta_min, args.theta_max)
    records = games.heatmap(game, r_range, theta_range, args.grid)
    if args.output:
        games.write_heatmap_csv(records, args.output)
        if not args.no_plot:
            plots.plot_heatmap(records, _figure_path(args.output))
    else:
        games.dump_heatmap_csv(records, sys.stdout)
    return EXIT_OK


def _cmd_equalizer(args) -> int:
    game = _resolve_game(args)
    if game is None:
        raise InputError("equalizer analysis needs a stage game")
    interval = games.equalizer_interval(game, args.target)
    _emit({"target": args.target, "interval": None if interval is None else list(interval)}, args)
    return EXIT_OK


def _cmd_trivial(args) -> int:
    game = _resolve_game(args)
    phi = _resolve_objective(args, game)
    action = enforce.find_trivial(phi)
    _emit({"trivial_action": None if action is None else action.tolist()}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="autocrat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, objective=True, output=True, fmt=True):
        _add_game_args(p)
        if objective:
            _add_objective_args(p)
        if output:
            p.add_argument("--output", help="write the result to this file instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("check", help="full enforceability report")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("lambda-min", help="print the minimum discount factor")
    common(p, output=False, fmt=False)
    p.set_defaults(func=_cmd_lambda_min)

    p = sub.add_parser("synthesize", help="construct the enforcing strategy")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--K", type=float, default=0.0, help="target constant (default 0)")
    p.add_argument("--reactive", action="store_true", help="reactive construction (additive objectives)")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("simulate", help="run the synthesized strategy against an opponent")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--opponent", required=True)
    p.add_argument("--backend", choices=("exact", "sampled"), default="exact")
    p.add_argument("--horizon", type=int)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--geometric", action="store_true", help="sample game length geometrically")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("region", help="payoff cloud against random memory-one opponents")
    common(p, fmt=False)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--opponents", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100, help="trials per opponent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--geometric", action="store_true")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("heatmap", help="enforceability sweep over the (r, theta) grid")
    common(p, objective=False, fmt=False)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--r-min", type=float, default=games.DEFAULT_R_RANGE[0])
    p.add_argument("--r-max", type=float, default=games.DEFAULT_R_RANGE[1])
    p.add_argument("--theta-min", type=float, default=games.DEFAULT_THETA_RANGE[0])
    p.add_argument("--theta-max", type=float, default=games.DEFAULT_THETA_RANGE[1])
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("equalizer", help="payoff-pinning range for self or opponent")
    common(p, objective=False)
    p.add_argument("--target", choices=("self", "opponent"), required=True)
    p.set_defaults(func=_cmd_equalizer)

    p = sub.add_parser("trivial", help="unconditional enforcing action, if any")
    common(p)
    p.set_defaults(func=_cmd_trivial)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NotEnforceableError, SynthesisError) as e:
        return _emit_error(EXIT_NOT_ENFORCEABLE, str(e))
    except AutocratError as e:
        return _emit_error(EXIT_INPUT, str(e))
    except OSError as e:
        return _emit_error(EXIT_INPUT, str(e))


if __name__ == "__main__":
    sys.exit(main())
