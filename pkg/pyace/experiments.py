import csv
import logging
import math
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from scipy.stats import binomtest
from pyace import params as defaults
from pyace.board import accepted_ballots
from pyace.commitments import comm_vec, forge_rerand_witness, rerand
from pyace.config import AdversaryConfig, ElectionConfig
from pyace.entries import BlindedCommitment, PoIORecord, tallier_party, voter_party
from pyace.errors import ConfigError, TrapdoorError
from pyace.groups import Backend
from pyace.harness import Election, run_election
from pyace.randomness import RandomSource
from pyace.tallier import TallierPolicy
from pyace.voter import AuditStrategy

logger = logging.getLogger(__name__)


### Audit-or-cast soundness

@dataclass(frozen=True)
class SoundnessResult:
    k: int
    trials: int
    cheat_probability: float
    undetected: int
    rate: float
    expected: float
    sigma: float
    p_value: float

    @property
    def within_3_sigma(self) -> bool:
        return abs(self.rate - self.expected) <= 3 * self.sigma + 1e-12


def expected_undetected_rate(k: int, cheat_probability: float) -> float:
    """
    A tallier flipping a cheat coin every round goes unnoticed iff it stays honest in the
    k - 1 audited rounds and cheats in the cast round.
    """
    return (1 - cheat_probability) ** (k - 1) * cheat_probability


def _soundness_trial(k: int, cheat_probability: float, seed: int, backend: Backend) -> bool:
    """
    One voter audits k - 1 rounds and casts the k-th against a tallier that swaps the
    published commitment on a cheat coin, played by the real actors through Voting.
    True when the cast round was swapped and no PoIO reached the board.
    """
    config = ElectionConfig(n_v=1, n_t=2, n_choices=2, backend=backend, audit=AuditStrategy.fixed(k), seed=seed)
    adversary = AdversaryConfig(corrupted_talliers=frozenset({1}), tallier_policy=TallierPolicy.ALWAYS_SWAP_COMMITMENT,
                                cheat_probability=cheat_probability)
    election = Election(config, adversary)
    election.open_voting()
    election.run_voting()
    voter, record = election.voters[0], election.talliers[1].records.get(0)
    if voter.cast_round is None or record is None or record.round != voter.cast_round:
        return False
    return record.swapped and not election.board.read(PoIORecord, voter.index)


def audit_soundness_experiment(k: int, trials: int, seed: Union[int, np.random.SeedSequence, None] = None,
                               cheat_probability: float = 0.5,
                               backend: Backend = Backend.TINY_TEST) -> SoundnessResult:
    """
    Monte Carlo estimate of the rate at which a cheating tallier modifies the cast ballot
    without being caught by any of the k - 1 audits.
    """
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    if trials < 1:
        raise ConfigError("the experiment needs at least one trial")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = root.generate_state(trials, np.uint64)
    undetected = sum(_soundness_trial(k, cheat_probability, int(s), backend) for s in seeds)
    expected = expected_undetected_rate(k, cheat_probability)
    rate = undetected / trials
    sigma = math.sqrt(expected * (1 - expected) / trials)
    if 0 < expected < 1:
        p_value = binomtest(undetected, trials, expected).pvalue
    else:
        p_value = 1.0 if undetected == round(expected * trials) else 0.0
    logger.info("k=%d: %d of %d cast ballots modified undetected (%.4f, expected %.4f)",
                k, undetected, trials, rate, expected)
    return SoundnessResult(k, trials, cheat_probability, undetected, rate, expected, sigma, float(p_value))


def soundness_sweep(max_k: int, trials: int, seed: Optional[int] = None,
                    cheat_probability: float = 0.5) -> List[SoundnessResult]:
    seeds = np.random.SeedSequence(seed).spawn(max_k)
    return [audit_soundness_experiment(k, trials, s, cheat_probability) for k, s in zip(range(1, max_k + 1), seeds)]


def plot_soundness(results: Sequence[SoundnessResult], path: Union[str, Path]):
    fig = Figure(figsize=(4.8, 3.2))
    plot = fig.subplots()
    ks = np.array([r.k for r in results])
    rates = np.array([r.rate for r in results])
    sigmas = np.array([r.sigma for r in results])
    plot.errorbar(ks, rates, yerr=3 * sigmas, fmt='o', color='b', label='measured')
    plot.plot(ks, [r.expected for r in results], 'k--', label='expected')
    plot.set_yscale('log')
    plot.set_xlabel('k')
    plot.set_ylabel('undetected cheat rate')
    plot.legend()
    fig.tight_layout()
    FigureCanvasAgg(fig).print_png(str(path))
    logger.info("soundness plot written to %s", path)


### Communication complexity

@dataclass(frozen=True)
class ComplexityRow:
    n_t: int
    k: int
    n_v: int
    voter_messages: int
    voter_bound: int
    tallier_voter_messages: int
    tallier_sync_messages: int
    sync_bound: int

    @property
    def within_bounds(self) -> bool:
        return self.voter_messages <= self.voter_bound and self.tallier_sync_messages <= self.sync_bound


def complexity_probe(k: int = 4, n_t_grid: Iterable[int] = (1, 3, 5, 10), n_v: int = 3, n_choices: int = 2,
                     seed: Optional[int] = None, backend: Backend = Backend.TINY_TEST) -> List[ComplexityRow]:
    """
    Runs one honest election per n_t and reports the largest message counts of any voter
    and any tallier, next to the bounds 3 k n_t + n_t and 2 (n_t + n_v).
    """
    rows = []
    for n_t in n_t_grid:
        config = ElectionConfig(n_v=n_v, n_t=n_t, n_choices=n_choices, backend=backend,
                                audit=AuditStrategy.fixed(k), seed=0 if seed is None else seed)
        _, metrics = run_election(config)
        voters = [metrics.messages[voter_party(i)] for i in range(n_v)]
        talliers = [metrics.messages[tallier_party(j)] for j in range(n_t)]
        syncs = [metrics.sync_messages[tallier_party(j)] for j in range(n_t)]
        row = ComplexityRow(n_t, k, n_v, max(voters, default=0), 3 * k * n_t + n_t,
                            max(t - s for t, s in zip(talliers, syncs)), max(syncs), 2 * (n_t + n_v))
        if not row.within_bounds:
            logger.error("message counts exceed the bounds: %s", row)
        rows.append(row)
    return rows


### Receipt forgery

@dataclass(frozen=True)
class ForgeryResult:
    trials: int
    successes: int
    rate: float
    corrupted_trapdoor: bool


def corrupt_trapdoor(params):
    return params.with_trapdoor(tuple(lam + k + 1 for k, lam in enumerate(params.trapdoor)))


def receipt_forgery_experiment(election: Election, trials: int, seed: Optional[int] = None,
                               corrupted: bool = False) -> ForgeryResult:
    """
    For a random cast share, computes the blinding factor that explains its published c~
    as a re-randomization of a random fake opening, and checks the explanation holds.
    """
    params = election.params
    if params.trapdoor is None:
        raise TrapdoorError("receipt forgery needs the tiny_test trapdoor")
    if trials < 1:
        raise ConfigError("the experiment needs at least one trial")
    forging = corrupt_trapdoor(params) if corrupted else params
    entries = election.board.read()
    accepted = accepted_ballots(entries)
    targets = [e.payload for e in entries if isinstance(e.payload, BlindedCommitment)
               and accepted.get(e.payload.voter) == e.payload.round]
    if not targets:
        raise ConfigError("the election has no accepted cast ballot to forge a receipt for")

    rng = RandomSource(seed)
    q = params.q
    successes = 0
    for _ in range(trials):
        target = targets[rng.choice(len(targets))]
        record = election.talliers[target.tallier].records[target.voter]
        fake_share = tuple(rng.scalar(q) for _ in range(params.n_choices))
        fake_r = rng.scalar(q)
        rtilde = forge_rerand_witness(forging, target.blinded, fake_share, fake_r,
                                      (record.share, record.randomness, record.rtilde))
        successes += rerand(params, comm_vec(params, fake_share, fake_r), rtilde) == target.blinded
    rate = successes / trials
    logger.info("receipt forgery: %d of %d fake openings verify%s", successes, trials,
                " (corrupted trapdoor)" if corrupted else "")
    return ForgeryResult(trials, successes, rate, corrupted)


def forgery_election(seed: Optional[int] = None) -> Election:
    config = ElectionConfig(n_v=4, n_t=2, n_choices=2, backend=Backend.TINY_TEST,
                            audit=AuditStrategy.fixed(2), seed=0 if seed is None else seed)
    election = Election(config, AdversaryConfig())
    election.run()
    return election


### CSV output

def write_csv(rows: Iterable, columns: Sequence[str], stream: TextIO):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(astuple(row) if hasattr(row, "__dataclass_fields__") else row)


def soundness_csv(results: Iterable[SoundnessResult], stream: TextIO):
    write_csv(((r.k, r.trials, r.cheat_probability, r.undetected, f"{r.rate:.6f}", f"{r.expected:.6f}",
                f"{r.sigma:.6f}", f"{r.p_value:.4f}") for r in results), defaults.soundness_columns, stream)


def complexity_csv(rows: Iterable[ComplexityRow], stream: TextIO):
    write_csv(rows, defaults.complexity_columns, stream)


def forgery_csv(results: Iterable[ForgeryResult], stream: TextIO):
    write_csv(((r.trials, r.successes, f"{r.rate:.6f}", int(r.corrupted_trapdoor)) for r in results),
              defaults.forgery_columns, stream)
