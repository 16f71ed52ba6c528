import argparse
import logging
import sys
from pathlib import Path
from pyace import params as defaults
from pyace.board import load
from pyace.config import load_config, scenario, scenarios, with_seed
from pyace.errors import AceError, ConfigError, IntegrityError
from pyace.experiments import (audit_soundness_experiment, complexity_csv, complexity_probe, forgery_csv,
                               forgery_election, plot_soundness, receipt_forgery_experiment, soundness_csv,
                               soundness_sweep)
from pyace.experiments import write_csv
from pyace.harness import run_election
from pyace.judge import judge_verify

logger = logging.getLogger("pyace")

ACCEPT, REJECT, USAGE = 0, 1, 2
TRANSCRIPT_FILE = "transcript.ace"
METRICS_FILE = "metrics.csv"


def _execute(config, adversary, out: Path) -> int:
    transcript, metrics = run_election(config, adversary)
    out.mkdir(parents=True, exist_ok=True)
    (out / TRANSCRIPT_FILE).write_text(transcript.dumps(), encoding="ascii")
    with open(out / METRICS_FILE, "w", newline="") as stream:
        write_csv(metrics.rows(), defaults.metrics_columns, stream)
    print(metrics.verdict)
    if metrics.winner is not None:
        print(f"winner: {metrics.winner}")
    return ACCEPT if metrics.accepted else REJECT


def cmd_run(args) -> int:
    config, adversary = load_config(args.config)
    return _execute(with_seed(config, args.seed), adversary, Path(args.out))


def cmd_attack(args) -> int:
    config, _ = load_config(args.config)
    config = with_seed(config, args.seed)
    return _execute(config, scenario(args.scenario, config), Path(args.out))


def cmd_verify(args) -> int:
    try:
        transcript = load(args.transcript)
    except OSError as e:
        raise IntegrityError(f"cannot read {args.transcript}: {e}")
    verdict = judge_verify(transcript)
    print(verdict)
    return ACCEPT if verdict.accepted else REJECT


def cmd_stats(args) -> int:
    out = sys.stdout
    if args.experiment == "audit-soundness":
        if args.sweep:
            results = soundness_sweep(args.sweep, args.trials, args.seed)
        else:
            results = [audit_soundness_experiment(args.k, args.trials, args.seed)]
        soundness_csv(results, out)
        if args.plot:
            plot_soundness(results, args.plot)
        return ACCEPT if all(r.within_3_sigma for r in results) else REJECT
    if args.experiment == "complexity":
        rows = complexity_probe(args.k, seed=args.seed)
        complexity_csv(rows, out)
        return ACCEPT if all(row.within_bounds for row in rows) else REJECT
    election = forgery_election(args.seed)
    results = [receipt_forgery_experiment(election, args.trials, args.seed),
               receipt_forgery_experiment(election, args.trials, args.seed, corrupted=True)]
    forgery_csv(results, out)
    return ACCEPT if results[0].rate == 1.0 else REJECT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pyace", description="Audit-or-cast election simulator and verifier.")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an election from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default="out")
    run.add_argument("--seed", type=int, default=None)
    run.set_defaults(handler=cmd_run)

    verify = commands.add_parser("verify", help="judge a transcript file")
    verify.add_argument("transcript")
    verify.set_defaults(handler=cmd_verify)

    attack = commands.add_parser("attack", help="run an election under a named attack scenario")
    attack.add_argument("--scenario", required=True, choices=sorted(scenarios))
    attack.add_argument("--config", required=True)
    attack.add_argument("--out", default="out")
    attack.add_argument("--seed", type=int, default=None)
    attack.set_defaults(handler=cmd_attack)

    stats = commands.add_parser("stats", help="run an experiment and print its CSV")
    stats.add_argument("experiment", choices=["audit-soundness", "complexity", "receipt-forgery"])
    stats.add_argument("--k", type=int, default=4)
    stats.add_argument("--trials", type=int, default=5000)
    stats.add_argument("--seed", type=int, default=None)
    stats.add_argument("--sweep", type=int, default=0, help="run k = 1..SWEEP")
    stats.add_argument("--plot", default=None, help="write the soundness curve to this PNG")
    stats.set_defaults(handler=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (ConfigError, IntegrityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except AceError as e:
        logger.error("%s", e)
        return USAGE


if __name__ == '__main__':
    sys.exit(main())
