import logging
from collections import Counter
from dataclasses import astuple, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple
import numpy as np
from pyace.board import Board, Transcript, accepted_ballots, schedule_to_record
from pyace.commitments import one_hot
from pyace.config import AdversaryConfig, ElectionConfig, with_seed
from pyace.encoding import encode_all
from pyace.entries import EC, ParamsRecord, PoIORecord, ResultRecord, parse_party, tallier_party
from pyace.judge import Verdict, judge_verify
from pyace.messages import Network, Party
from pyace.proofs import Relation, nizk_setup
from pyace.randomness import RandomSource
from pyace.signatures import KeyPair
from pyace.tallier import DesignatedTallier, Tallier, talliers_send_aggregates, talliers_sync_validate
from pyace.voter import Voter, VoterPolicy

logger = logging.getLogger(__name__)


def plaintext_oracle(config: ElectionConfig, votes: Iterable[Sequence[int]]) -> Tuple[Tuple[int, ...], int]:
    """
    Coordinate-wise sum of the plaintext votes and its lowest-index argmax.
    """
    tally = np.zeros(config.n_choices, dtype=np.int64)
    for vote in votes:
        tally += np.asarray(vote, dtype=np.int64)
    return tuple(int(t) for t in tally), int(np.argmax(tally))


@dataclass
class RunMetrics:
    messages: Counter = field(default_factory=Counter)
    sync_messages: Counter = field(default_factory=Counter)
    entries: Counter = field(default_factory=Counter)
    rejections: Counter = field(default_factory=Counter)
    poios: int = 0
    verdict: Optional[Verdict] = None
    winner: Optional[int] = None
    tally: Optional[Tuple[int, ...]] = None
    oracle_tally: Tuple[int, ...] = ()
    oracle_winner: int = 0
    ticks: int = 0

    @property
    def accepted(self) -> bool:
        return self.verdict is not None and self.verdict.accepted

    def rows(self) -> List[Tuple[str, int]]:
        return sorted(self.messages.items())


class Election:
    """
    One simulated run: the commission generates keys and appends the setup record at
    tick 0, then a single-threaded scheduler drives the voters tick by tick through
    Voting, closes the board, lets the talliers validate and aggregate, and hands over
    to the designated tallier.
    """
    def __init__(self, config: ElectionConfig, adversary: AdversaryConfig = AdversaryConfig(),
                 seed: Optional[int] = None):
        self.config = with_seed(config, seed)
        self.adversary = adversary
        adversary.check_against(self.config)
        self.params = params = self.config.params
        self.schedule = dict(self.config.phase_ticks)
        eid = self.config.election_id

        key_rng, vote_rng, self.schedule_rng, voter_rng, tallier_rng, designated_rng = \
            RandomSource(self.config.seed).spawn(6)
        self.ec_keys = KeyPair.generate(params, key_rng)
        self.board_keys = KeyPair.generate(params, key_rng)
        self.designated_keys = KeyPair.generate(params, key_rng)
        self.voter_keys = [KeyPair.generate(params, key_rng) for _ in range(self.config.n_v)]
        self.tallier_keys = [KeyPair.generate(params, key_rng) for _ in range(self.config.n_t)]
        voter_pks = tuple(kp.pk for kp in self.voter_keys)
        tallier_pks = tuple(kp.pk for kp in self.tallier_keys)

        self.board = Board(params, self.board_keys, self.schedule, self.config.digest())
        self.network = Network(self.board)
        self.commission = Party(EC, self.ec_keys, params, eid, self.network)
        vote_ctx, _ = nizk_setup(params, Relation.VOTE)
        result_ctx, _ = nizk_setup(params, Relation.RESULT)

        self.votes = [self._draw_vote(i, vote_rng) for i in range(self.config.n_v)]
        self.voters = [Voter(i, self.votes[i], self.config.audit, self.voter_keys[i], params, eid, self.network,
                             tallier_pks, vote_ctx, rng, self.config.audit_timeout, adversary.voter_policy_of(i))
                       for i, rng in enumerate(voter_rng.spawn(self.config.n_v))]
        self.talliers = [Tallier(j, self.tallier_keys[j], params, eid, self.network, voter_pks, rng,
                                 adversary.tallier_policy_of(j), adversary.cheat_probability)
                         for j, rng in enumerate(tallier_rng.spawn(self.config.n_t))]
        self.designated = DesignatedTallier(self.designated_keys, params, eid, self.network, tallier_pks,
                                            self.config.n_v, result_ctx, designated_rng, adversary.designated_policy)
        self.vote_ctx = vote_ctx
        for party in [self.commission, *self.voters, *self.talliers, self.designated]:
            self.network.register(party)

    def _draw_vote(self, i: int, rng: RandomSource) -> Tuple[int, ...]:
        n = self.config.n_choices
        choice = rng.choice(n, self.config.weights)
        if self.adversary.voter_policy_of(i) is VoterPolicy.INVALID_VOTE_GARBAGE_PROOF:
            return tuple(1 for _ in range(n))
        return one_hot(n, choice)

    def setup_record(self) -> ParamsRecord:
        params = self.params
        return ParamsRecord(self.config.election_id, params.backend.value, params.n_choices, params.domain_tag,
                            params.digest(), self.config.digest(), tuple(kp.pk for kp in self.voter_keys),
                            tuple(kp.pk for kp in self.tallier_keys), self.designated_keys.pk, self.board_keys.pk,
                            self.ec_keys.pk, schedule_to_record(self.schedule), self.config.audit_timeout)

    def _tick(self, now: int, force: bool = False):
        self.network.now = now
        self.board.advance(now, force)

    def run_voting(self):
        start, end = self.schedule["voting"]
        for now in range(start, end):
            self._tick(now)
            for voter in self.schedule_rng.permutation(self.voters):
                voter.on_tick(now)
            self.network.drain()
            if all(v.finished for v in self.voters):
                logger.info("all voters done at tick %d", now)
                break

    def open_voting(self):
        self.network.now = 0
        self.commission.post(self.setup_record())

    def run(self) -> Tuple[Transcript, RunMetrics]:
        self.open_voting()
        self.run_voting()

        tally_start = self.schedule["tally"][0]
        self._tick(tally_start, force=True)
        talliers_sync_validate(self.talliers, self.vote_ctx)
        talliers_send_aggregates(self.talliers)
        self.network.drain()

        result_start = self.schedule["result"][0]
        self._tick(result_start)
        self.designated.on_tick(result_start)
        self.network.drain()

        self._tick(self.schedule["verification"][0])
        transcript = self.board.transcript()
        return transcript, self.metrics(transcript)

    def metrics(self, transcript: Transcript) -> RunMetrics:
        metrics = RunMetrics()
        for envelope in self.network.log:
            metrics.messages[envelope.sender] += 1
            if parse_party(envelope.sender)[0] == "T" and parse_party(envelope.recipient)[0] == "T":
                metrics.sync_messages[envelope.sender] += 1
        metrics.entries.update(entry.kind.value for entry in transcript.entries)
        metrics.rejections.update(self.network.rejections)
        metrics.poios = len(transcript.read(PoIORecord))
        metrics.verdict = judge_verify(transcript, self.params)
        results = transcript.read(ResultRecord)
        metrics.winner = results[0].payload.winner if results else None
        metrics.tally = self.designated.tally
        accepted = accepted_ballots(transcript.entries)
        metrics.oracle_tally, metrics.oracle_winner = plaintext_oracle(self.config,
                                                                       [self.votes[i] for i in sorted(accepted)])
        metrics.ticks = self.board.now
        return metrics

    def observable_bytes(self, corrupted_talliers: Iterable[int]) -> bytes:
        """
        Everything a coalition of corrupted talliers sees: the board, their own state and
        every private message they sent or received.
        """
        corrupted = {tallier_party(j) for j in corrupted_talliers}
        parts = [self.board.transcript().dumps().encode("ascii")]
        for envelope in self.network.log:
            if envelope.sender in corrupted or envelope.recipient in corrupted:
                parts.append(envelope.to_bytes(self.params))
        for tallier in self.talliers:
            if tallier.party_id not in corrupted:
                continue
            records = [(r.voter, r.round, r.commitment, r.rtilde, r.blinded, r.share or (), r.randomness or 0)
                       for _, r in sorted(tallier.records.items())]
            views = [astuple(item) for _, view in sorted(tallier.views.items()) for _, item in sorted(view.items())]
            parts.append(encode_all(self.params, records, tallier.used_rtildes, views, tallier.keys.sk))
        return b"".join(parts)


def run_election(config: ElectionConfig, adv: AdversaryConfig = AdversaryConfig(),
                 seed: Optional[int] = None) -> Tuple[Transcript, RunMetrics]:
    election = Election(config, adv, seed)
    transcript, metrics = election.run()
    logger.info("election finished: %s, winner %s", metrics.verdict, metrics.winner)
    return transcript, metrics
