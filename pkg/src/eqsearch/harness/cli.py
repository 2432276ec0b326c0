"""Command-line entry point: ``eqsearch <subcommand> ...``.

Every subcommand writes flat CSV tables plus ``manifest.json`` under its
output directory. Wall-clock timing goes to ``timing.json`` and is the only
file that differs between two runs with the same inputs.
"""
import argparse
import json
import sys
import time
from pathlib import Path

from ..errors import ConfigError, ContractError
from ..estimators import check_unbiasedness, random_models
from ..exploit import exploitability, seed_average_experiment
from ..games.matrix import MatrixGame
from ..ratings import OutcomeDataset, fit_ratings
from ..regret import RmConfig, run_rm
from ..search import format_result
from ..subgame import SubgameSpec
from . import tables
from .config import ExperimentConfig, agent_factory, load_config, make_blueprint, make_env, search_config
from .experiments import SWEEP_AXES, evaluate_1v6, game_seed, play_game, sweep, with_axis


def _rm_config(params, seed):
    try:
        return RmConfig(iterations=int(params.get("iterations", 256)),
                        linear=bool(params.get("linear", True)),
                        optimism=bool(params.get("optimism", True)),
                        seed=int(seed),
                        trace_every=int(params.get("every", 0)))
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def _load_game(cfg):
    return MatrixGame.load(cfg.resolve(cfg.params["game_file"]))


# --- experiment kinds --------------------------------------------------------
# Each runner takes an ExperimentConfig and returns {table name: (header, rows)}
# plus an optional text report for stdout.

def run_solve_matrix(cfg):
    game = _load_game(cfg)
    spec = SubgameSpec.from_matrix(game)
    result = run_rm(spec, _rm_config(cfg.params, cfg.seed))
    rep = exploitability(spec, result.average_policies)
    rows = []
    for i in range(result.num_players):
        for a, label in enumerate(result.actions[i]):
            rows.append((i, label, float(result.final_policies[i][a]),
                         float(result.average_policies[i][a]), float(result.avg_utilities[i][a])))
    out = {"policies.csv": (["player", "action", "final", "average", "avg_u"], rows),
           "exploitability.csv": (["player", "gain"],
                                  [(i, float(g)) for i, g in enumerate(rep.gains)]
                                  + [("total", float(rep.total))])}
    text = format_result(result) + f"\nexploitability(avg)={rep.total:.6f}"
    return out, text


def run_seed_average(cfg):
    p = cfg.params
    rm = RmConfig(iterations=int(p.get("iterations", 256)),
                  linear=bool(p.get("linear", False)), optimism=bool(p.get("optimism", False)))
    rep = seed_average_experiment(int(p.get("rows", 10)), int(p.get("cols", 10)), rm,
                                  num_seeds=int(p.get("seeds", 1000)),
                                  num_games=int(p.get("games", 20)), master_seed=cfg.seed)
    out = {"seed_average.csv": (["game", "seed", "iteration", "quantity", "value"],
                                rep.rows_table())}
    text = "\n".join(f"{q:>13s}  {getattr(rep, q):.4f}  (se {rep.stderr(q):.4f})"
                     for q in rep.QUANTITIES)
    return out, text


def run_trace(cfg):
    game = _load_game(cfg)
    params = dict(cfg.params)
    params.setdefault("every", 1)
    rmc = _rm_config(params, cfg.seed)
    if rmc.trace_every < 1:
        raise ConfigError("--every must be >= 1")
    result = run_rm(SubgameSpec.from_matrix(game), rmc)
    rows = [(int(t), float(e)) for t, e in result.trace]
    text = "iteration  exploitability\n" + "\n".join(f"{t:9d}  {e:.6f}" for t, e in rows)
    return {"trace.csv": (["iteration", "exploitability"], rows)}, text


def _agents(cfg):
    env = make_env(cfg.params)
    bp = make_blueprint(cfg.params)
    return env, bp


def _num_games(cfg):
    n = int(cfg.params.get("games", cfg.repetitions))
    if n < 1:
        raise ConfigError("games must be >= 1")
    return n


def run_play(cfg):
    env, bp = _agents(cfg)
    specs = cfg.params.get("agents")
    if not isinstance(specs, list) or len(specs) != env.num_players:
        raise ConfigError(f"'agents' must list one agent per seat ({env.num_players})")
    factories = [agent_factory(s, bp) for s in specs]
    rows, logs = [], []
    for g in range(_num_games(cfg)):
        gs = game_seed(cfg.seed, g)
        agents = [f() for f in factories]
        final, log = play_game(env, agents, gs)
        value = env.terminal_value(final)
        counts = final.sc_counts()
        for p, agent in enumerate(agents):
            rows.append((g, gs, p, agent.kind, counts[p], float(value[p])))
        logs.append({"game": g, "game_seed": gs, "board": env.board.to_dict(),
                     "phases": log, "final_state": final.to_dict()})
    return {"games.csv": (["game", "game_seed", "seat", "agent", "sc_count", "score"], rows),
            "logs.jsonl": logs}, None


def _match_rows(report, extra=()):
    rows = []
    for g, (seat, gs, score) in enumerate(zip(report.seats, report.game_seeds, report.scores)):
        rows.append((*extra, g, gs, seat, float(score[seat]), *map(float, score)))
    return rows


def _score_header(n):
    return ["game", "game_seed", "a_seat", "a_score"] + [f"score_{i}" for i in range(n)]


def _summary_row(report, extra=()):
    s = report.summary()
    return (*extra, s["agent_a"], s["agent_b"], s["games"], s["mean_a"], s["stderr_a"],
            s["mean_b"], s["stderr_b"], s["null"])


SUMMARY_HEADER = ["agent_a", "agent_b", "games", "mean_a", "stderr_a", "mean_b", "stderr_b", "null"]


def _ab(cfg, bp):
    try:
        a, b = cfg.params["agent_a"], cfg.params["agent_b"]
    except KeyError as exc:
        raise ConfigError(f"missing {exc.args[0]!r}") from exc
    return a, b


def run_evaluate(cfg):
    env, bp = _agents(cfg)
    a, b = _ab(cfg, bp)
    report = evaluate_1v6(env, agent_factory(a, bp), agent_factory(b, bp), _num_games(cfg), cfg.seed)
    text = (f"A={report.agent_a} mean {report.mean_a:.4f} +/- {report.stderr_a:.4f}  "
            f"B={report.agent_b} mean {report.mean_b:.4f}  null {report.null_score:.4f}")
    return {"games.csv": (_score_header(env.num_players), _match_rows(report)),
            "summary.csv": (SUMMARY_HEADER, [_summary_row(report)])}, text


def run_sweep(cfg):
    env, bp = _agents(cfg)
    a, b = _ab(cfg, bp)
    axis = cfg.params.get("axis")
    values = cfg.params.get("values")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {SWEEP_AXES}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    if isinstance(a, str):
        a = {"kind": a}
    base = search_config(a)

    def make_a_for(ax, v):
        cfg_v = with_axis(base, ax, v)
        spec = dict(a, M=cfg_v.M, iterations=cfg_v.rm.iterations,
                    rollout_horizon=cfg_v.rollout_horizon)
        return agent_factory(spec, bp)

    results = sweep(env, axis, values, make_a_for, agent_factory(b, bp), _num_games(cfg), cfg.seed)
    summary, games = [], []
    for v, rep in results:
        summary.append(_summary_row(rep, (axis, v)))
        games.extend(_match_rows(rep, (axis, v)))
    text = "\n".join(f"{axis}={v}: mean {r.mean_a:.4f} +/- {r.stderr_a:.4f}" for v, r in results)
    return {"sweep.csv": (["axis", "value"] + SUMMARY_HEADER, summary),
            "games.csv": (["axis", "value"] + _score_header(env.num_players), games)}, text


def run_rate(cfg):
    p = cfg.params
    data = OutcomeDataset.load(cfg.resolve(p["dataset"]))
    fit = fit_ratings(data, lam=float(p.get("lam", 0.1)),
                      learning_rate=float(p.get("learning_rate", 0.01)),
                      steps=int(p.get("steps", 5000)), squared=bool(p.get("squared", False)))
    rows = sorted(((name, float(r)) for name, r in zip(data.names, fit.s)), key=lambda x: -x[1])
    text = "\n".join(f"{name:>12s}  {r:+.4f}" for name, r in rows)
    return {"ratings.csv": (["player_id", "rating"], rows)}, text


def run_entropy(cfg):
    p = cfg.params
    models = random_models(int(p.get("models", 10)), int(p.get("outcomes", 5)), seed=cfg.seed)
    rows = check_unbiasedness(models, int(p.get("batches", 200)), int(p.get("batch_size", 10_000)),
                              seed=cfg.seed)
    worst = max(abs(r[5]) for r in rows)
    text = f"{len(rows)} coordinates, max |z| = {worst:.3f}"
    return {"entropy_grad.csv": (["model", "coord", "exact", "estimate", "stderr", "z"], rows)}, text


RUNNERS = {
    "solve-matrix": run_solve_matrix,
    "seed-average": run_seed_average,
    "convergence-trace": run_trace,
    "play": run_play,
    "evaluate-1v6": run_evaluate,
    "sweep": run_sweep,
    "rate": run_rate,
    "check-entropy-grad": run_entropy,
}


def execute(cfg: ExperimentConfig, quiet=False):
    """Run ``cfg`` and write its tables and manifest; returns the output directory."""
    start = time.perf_counter()
    out, text = RUNNERS[cfg.kind](cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, payload in out.items():
        if name.endswith(".jsonl"):
            with open(out_dir / name, "w") as fh:
                for doc in payload:
                    fh.write(json.dumps(doc, sort_keys=True) + "\n")
        else:
            tables.write_table(out_dir / name, *payload)
    tables.write_manifest(out_dir, cfg.kind, cfg.to_dict(), cfg.seed, list(out))
    tables.write_json(out_dir / "timing.json", {"seconds": time.perf_counter() - start})
    if text and not quiet:
        print(text)
    return out_dir


# --- argument parsing -------------------------------------------------------

def _add_common(p, default_out):
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--output-dir", default=None, help=f"where tables go (default {default_out})")
    p.add_argument("--quiet", action="store_true")


def _add_rm(p, linear=True, optimism=True):
    p.add_argument("--iters", type=int, default=256)
    p.add_argument("--linear", action=argparse.BooleanOptionalAction, default=linear)
    p.add_argument("--optimism", action=argparse.BooleanOptionalAction, default=optimism)


def build_parser():
    ap = argparse.ArgumentParser(prog="eqsearch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-matrix", help="run sampled RM on a matrix game file")
    p.add_argument("game_file")
    _add_rm(p)
    _add_common(p, "runs/solve-matrix")

    p = sub.add_parser("seed-average", help="final vs average policy exploitability, seed-averaged")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--seeds", type=int, required=True, help="RM runs per game")
    p.add_argument("--games", type=int, default=20)
    p.add_argument("--master-seed", type=int, default=None)
    _add_rm(p, linear=False, optimism=False)
    _add_common(p, "runs/seed-average")

    p = sub.add_parser("trace", help="exploitability of the average policy over iterations")
    p.add_argument("--game-file", required=True)
    p.add_argument("--every", type=int, required=True)
    _add_rm(p)
    _add_common(p, "runs/convergence-trace")

    for name, helptext in (("play", "self-play games from a config"),
                           ("evaluate-1v6", "one A agent against B agents, rotating seats")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--games", type=int, default=None)
        _add_common(p, f"runs/{name}")

    p = sub.add_parser("sweep", help="1-vs-rest evaluation along one search parameter")
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma separated, e.g. 1,2,4")
    p.add_argument("--config", required=True)
    p.add_argument("--games", type=int, default=None)
    _add_common(p, "runs/sweep")

    p = sub.add_parser("rate", help="fit pairwise-outcome ratings")
    p.add_argument("--dataset", required=True, help="CSV: game_id,player_id,outcome_rank")
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--squared", action="store_true", help="squared-norm penalty")
    _add_common(p, "runs/rate")

    p = sub.add_parser("check-entropy-grad", help="statistical check of the entropy-gradient estimator")
    p.add_argument("--models", type=int, default=10)
    p.add_argument("--outcomes", type=int, default=5)
    p.add_argument("--batches", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=10_000)
    _add_common(p, "runs/check-entropy-grad")

    p = sub.add_parser("run", help="run any experiment described by a config file")
    p.add_argument("--config", required=True)
    _add_common(p, None)
    return ap


def _number(text):
    v = float(text)
    return int(v) if v.is_integer() else v


def config_from_args(args):
    cmd = args.command
    seed = args.seed
    if cmd in ("play", "evaluate-1v6", "sweep", "run"):
        overrides = {}
        if cmd == "sweep":
            overrides["axis"] = args.axis
            overrides["values"] = [_number(v) for v in args.values.split(",") if v.strip()]
        if getattr(args, "games", None) is not None:
            overrides["games"] = args.games
        if seed is not None:
            overrides["seed"] = seed
        if args.output_dir is not None:
            overrides["output_dir"] = args.output_dir
        cfg = load_config(args.config, overrides)
        if cmd != "run" and cfg.kind != cmd:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {cmd!r}")
        return cfg

    if cmd == "solve-matrix":
        kind = cmd
        params = {"game_file": str(Path(args.game_file).resolve())}
    elif cmd == "trace":
        kind = "convergence-trace"
        params = {"game_file": str(Path(args.game_file).resolve()), "every": args.every}
    elif cmd == "seed-average":
        kind = cmd
        params = {"rows": args.rows, "cols": args.cols, "seeds": args.seeds, "games": args.games}
        if args.master_seed is not None:
            seed = args.master_seed
    elif cmd == "rate":
        kind = cmd
        params = {"dataset": str(Path(args.dataset).resolve()), "lam": args.lam,
                  "learning_rate": args.learning_rate, "steps": args.steps,
                  "squared": args.squared}
    else:
        kind = cmd
        params = {"models": args.models, "outcomes": args.outcomes,
                  "batches": args.batches, "batch_size": args.batch_size}
    if hasattr(args, "iters"):
        params.update(iterations=args.iters, linear=args.linear, optimism=args.optimism)
    return ExperimentConfig(kind=kind, seed=0 if seed is None else seed,
                            output_dir=args.output_dir or f"runs/{kind}", params=params)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        out_dir = execute(cfg, quiet=args.quiet)
    except (ConfigError, ContractError, FileNotFoundError) as exc:
        print(f"eqsearch: error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"wrote {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
