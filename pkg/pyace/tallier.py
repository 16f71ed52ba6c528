import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple
from pyace.board import accepted_ballots, blinded_product
from pyace.commitments import Commitment, add_vectors, comm_vec, derand, rerand
from pyace.entries import (TDES, AggregateDispute, AuditDiscard, BlindedCommitment, CastFinal, OpeningDispute,
                           Phase, PoIONizkRecord, ResultRecord, VoteValidity, tallier_party, voter_party)
from pyace.errors import StatementError
from pyace.messages import (AUDIT, CAST, AggregateMessage, Decision, Opening, Party, Receipt, Reveal, Submission,
                            SyncBatch, SyncItem, TallierAggregate, ValidityBatch, aggregate_statement,
                            decision_statement, opening_statement, proof_statement, receipt_statement,
                            reveal_statement, submission_statement, validity_statement)
from pyace.proofs import ProofContext, ProofResult, ProofVote, lowest_argmax, prove_result, verify_vote
from pyace.randomness import RandomSource
from pyace.signatures import Signature

logger = logging.getLogger(__name__)

OK = "ok"
INVALID = "invalid"
MISSING = "missing"


class TallierPolicy(Enum):
    HONEST = "honest"
    ALWAYS_SWAP_COMMITMENT = "always_swap_commitment"
    NAIVE_SWAP = "naive_swap"
    WRONG_AUDIT_REVEAL = "wrong_audit_reveal"
    WRONG_AGGREGATE = "wrong_aggregate"
    SILENT = "silent"


class DesignatedPolicy(Enum):
    HONEST = "honest"
    WRONG_WINNER = "wrong_winner"
    WRONG_RTILDE = "wrong_rtilde"


@dataclass
class ShareRecord:
    """
    What a tallier holds for one voter's current round: the received commitment with the
    voter's signature, its blinding factor, the published c~ and, once cast, the opening.
    """
    voter: int
    round: int
    commitment: Commitment
    signature: Signature
    rtilde: int
    blinded: Commitment
    swapped: bool = False
    cast: bool = False
    status: str = MISSING
    share: Optional[Tuple[int, ...]] = None
    randomness: Optional[int] = None
    proof: Optional[ProofVote] = None
    proof_signature: Optional[Signature] = None


class Tallier(Party):
    def __init__(self, index: int, keys, params, election_id, network, voter_keys, rng: RandomSource,
                 policy: TallierPolicy = TallierPolicy.HONEST, cheat_probability: float = 1.0):
        super().__init__(tallier_party(index), keys, params, election_id, network)
        self.index = index
        self.voter_keys = tuple(voter_keys)
        self.rng = rng
        self.policy = TallierPolicy(policy)
        self.cheat_probability = cheat_probability
        self.records: Dict[int, ShareRecord] = {}
        self.used_rtildes: List[int] = []
        self.views: Dict[int, Dict[int, SyncItem]] = {}
        self.validity_batches: Dict[int, ValidityBatch] = {}
        self.decisions: Dict[int, Tuple[bool, str]] = {}
        self.handlers = {
            Submission: self.on_submission,
            Decision: self.on_decision,
            Opening: self.on_opening,
            SyncBatch: self.on_sync_batch,
            ValidityBatch: self.on_validity_batch,
        }

    @property
    def cooperates(self) -> bool:
        return self.policy is not TallierPolicy.SILENT

    def receive(self, sender: str, message):
        if not self.cooperates:
            logger.debug("%s stays silent on %s", self.party_id, type(message).__name__)
            return
        super().receive(sender, message)

    def _has_cast(self, voter: int) -> Optional[int]:
        entries = self.board.read(CastFinal, voter)
        return entries[0].payload.round if entries else None

    ### voting

    def on_commitment(self, msg: Submission) -> Optional[int]:
        """
        Blinds a received share commitment with a fresh r~, publishes c~ = ReRand(c, r~)
        and returns its board sequence number. Drops bad or duplicate submissions.
        """
        voter = msg.voter
        if not 0 <= voter < len(self.voter_keys) or msg.tallier != self.index:
            logger.warning("%s drops submission for unknown voter %d", self.party_id, voter)
            return None
        statement = submission_statement(self.params, self.election_id, voter, self.index, msg.round, msg.commitment)
        if not self.verify(self.voter_keys[voter], statement, msg.signature):
            logger.warning("%s drops badly signed submission of voter %d", self.party_id, voter)
            return None
        if self._has_cast(voter) is not None:
            logger.warning("%s drops submission of voter %d after cast", self.party_id, voter)
            return None
        previous = self.records.get(voter)
        if previous is not None and previous.round >= msg.round:
            logger.warning("%s drops duplicate round %d of voter %d", self.party_id, msg.round, voter)
            return None

        rtilde = self.rng.scalar(self.params.q)
        self.used_rtildes.append(rtilde)
        stored = msg.commitment
        swapped = False
        if self.policy in (TallierPolicy.ALWAYS_SWAP_COMMITMENT, TallierPolicy.NAIVE_SWAP):
            swapped = self.rng.coin(self.cheat_probability)
        published = msg.commitment
        if swapped:
            published = self.params.mul(msg.commitment, self.params.g_vec[0])
            if self.policy is TallierPolicy.NAIVE_SWAP:
                stored = published
        blinded = rerand(self.params, published, rtilde)

        seq = self.post(BlindedCommitment(voter, self.index, msg.round, blinded))
        if seq is None:
            return None
        self.records[voter] = ShareRecord(voter, msg.round, stored, msg.signature, rtilde, blinded, swapped)
        receipt = receipt_statement(self.params, self.election_id, voter, self.index, msg.round, msg.commitment)
        self.send(voter_party(voter), Receipt(voter, self.index, msg.round, msg.commitment, self.sign(receipt)))
        return seq

    def on_audit(self, voter: int) -> Optional[Reveal]:
        """
        Reveals r~ of the audited round to the voter, records the discard on the board
        and forgets the round.
        """
        record = self.records.get(voter)
        if record is None or record.cast:
            logger.warning("%s has no open round to audit for voter %d", self.party_id, voter)
            return None
        rtilde = record.rtilde
        if self.policy is TallierPolicy.WRONG_AUDIT_REVEAL:
            rtilde = (rtilde + 1) % self.params.q
        if self.post(AuditDiscard(voter, self.index, record.round)) is None:
            return None
        statement = reveal_statement(self.params, self.election_id, voter, self.index, record.round, rtilde)
        reveal = Reveal(voter, self.index, record.round, rtilde, self.sign(statement))
        self.send(voter_party(voter), reveal)
        del self.records[voter]
        return reveal

    def on_cast_and_opening(self, voter: int, opening: Opening) -> Optional[int]:
        """
        Stores a valid opening of the cast share for aggregation. An opening that does not
        match the stored commitment is published as an opening dispute.
        """
        record = self.records.get(voter)
        if record is None or not record.cast or record.round != opening.round:
            logger.warning("%s got an opening for unknown round %d of voter %d", self.party_id, opening.round, voter)
            return None
        statement = opening_statement(self.params, self.election_id, voter, self.index, opening.round,
                                      opening.share, opening.randomness)
        if not self.verify(self.voter_keys[voter], statement, opening.signature):
            logger.warning("%s drops badly signed opening of voter %d", self.party_id, voter)
            return None
        record.proof, record.proof_signature = opening.proof, opening.proof_signature

        matches = comm_vec(self.params, opening.share, opening.randomness) == record.commitment
        if self.policy is TallierPolicy.NAIVE_SWAP or matches:
            share = tuple(opening.share)
            if record.swapped and self.policy is TallierPolicy.ALWAYS_SWAP_COMMITMENT:
                share = ((share[0] + 1) % self.params.q,) + share[1:]
            record.share, record.randomness, record.status = share, opening.randomness, OK
            return None
        logger.info("%s disputes the opening of voter %d", self.party_id, voter)
        record.status = INVALID
        return self.post(OpeningDispute(voter, self.index, record.round, record.commitment, record.signature,
                                        tuple(opening.share), opening.randomness, opening.signature))

    def on_submission(self, sender: str, msg: Submission):
        if sender == voter_party(msg.voter):
            self.on_commitment(msg)

    def on_decision(self, sender: str, msg: Decision):
        voter = msg.voter
        if sender != voter_party(voter) or not 0 <= voter < len(self.voter_keys):
            return
        statement = decision_statement(self.params, self.election_id, voter, msg.round, msg.decision)
        record = self.records.get(voter)
        if record is None or record.round != msg.round or not self.verify(self.voter_keys[voter], statement,
                                                                           msg.signature):
            logger.warning("%s drops decision %s of voter %d", self.party_id, msg.decision, voter)
            return
        if msg.decision == AUDIT:
            self.on_audit(voter)
        elif msg.decision == CAST and self._has_cast(voter) == msg.round:
            record.cast = True

    def on_opening(self, sender: str, msg: Opening):
        if sender == voter_party(msg.voter) and msg.tallier == self.index:
            self.on_cast_and_opening(msg.voter, msg)

    def close_voting(self):
        """
        At the end of voting: rounds the board closed are forgotten, cast ballots without
        a valid opening are flagged and their shares zeroed.
        """
        for voter, record in list(self.records.items()):
            cast_round = self._has_cast(voter)
            if cast_round != record.round:
                del self.records[voter]
                continue
            record.cast = True
            if record.status == MISSING:
                logger.info("%s flags voter %d for a missing opening", self.party_id, voter)
                record.share, record.randomness = None, None

    ### synchronization

    def sync_items(self) -> Tuple[SyncItem, ...]:
        return tuple(SyncItem(r.voter, r.round, r.commitment, r.signature, r.status)
                     for r in sorted(self.records.values(), key=lambda r: r.voter) if r.cast)

    def share_views(self, peers: Sequence[int]):
        items = self.sync_items()
        self.views = {item.voter: {self.index: item} for item in items}
        for j in peers:
            if j != self.index:
                self.send(tallier_party(j), SyncBatch(self.index, items))

    def on_sync_batch(self, sender: str, msg: SyncBatch):
        if sender != tallier_party(msg.tallier):
            return
        for item in msg.items:
            self.views.setdefault(item.voter, {})[msg.tallier] = item

    def decide_validity(self, voter: int, n_t: int, ctx: ProofContext, verdicts: dict) -> Tuple[bool, str]:
        """
        Validity of a cast ballot from this tallier's view. Identical views share one proof
        verification through the verdicts cache.
        """
        view = self.views.get(voter, {})
        record = self.records.get(voter)
        if len(view) < n_t or record is None:
            return False, "non-cooperative"
        statuses = {item.opening for item in view.values()}
        if INVALID in statuses:
            return False, "invalid-opening"
        if MISSING in statuses or record.proof is None:
            return False, "missing-opening"

        aggregate = self.params.prod(view[j].commitment for j in range(n_t))
        key = (voter, aggregate, record.proof.to_bytes(self.params), record.proof_signature)
        if key not in verdicts:
            signed = self.verify(self.voter_keys[voter],
                                 proof_statement(self.params, self.election_id, voter, record.round, record.proof),
                                 record.proof_signature)
            verdicts[key] = signed and verify_vote(ctx, aggregate, record.proof, voter_party(voter), self.election_id)
        return (True, "") if verdicts[key] else (False, "invalid-proof")

    def sign_validity(self, n_t: int, ctx: ProofContext, verdicts: dict, coordinator: int):
        signatures = []
        for voter in sorted(self.views):
            accepted, reason = self.decide_validity(voter, n_t, ctx, verdicts)
            self.decisions[voter] = (accepted, reason)
            round_ = self.views[voter][self.index].round if self.index in self.views[voter] else 0
            statement = validity_statement(self.params, self.election_id, voter, round_, accepted, reason)
            signatures.append((voter, self.sign(statement)))
        batch = ValidityBatch(self.index, tuple(signatures))
        if coordinator == self.index:
            self.validity_batches[self.index] = batch
        else:
            self.send(tallier_party(coordinator), batch)

    def on_validity_batch(self, sender: str, msg: ValidityBatch):
        if sender == tallier_party(msg.tallier):
            self.validity_batches[msg.tallier] = msg

    def publish_validity(self, n_t: int):
        """
        Coordinator step: a PoIO_NIZKP for every ballot rejected on its proof, then one
        validity record per cast ballot carrying every tallier's signature.
        """
        for voter in sorted(self.decisions):
            accepted, reason = self.decisions[voter]
            view = self.views[voter]
            round_ = next(iter(view.values())).round
            if reason == "invalid-proof":
                record = self.records[voter]
                shares = tuple((view[j].commitment, view[j].signature) for j in range(n_t))
                logger.info("%s publishes PoIO_NIZKP for voter %d", self.party_id, voter)
                self.post(PoIONizkRecord(voter, round_, record.proof, record.proof_signature, shares))
            signatures = tuple((j, sig) for j, batch in sorted(self.validity_batches.items())
                               for v, sig in batch.signatures if v == voter)
            self.post(VoteValidity(voter, round_, accepted, reason, signatures))

    ### tally

    def aggregate(self) -> TallierAggregate:
        """
        Sums of the shares, r and r~ over the accepted ballots, mod q.
        """
        q = self.params.q
        accepted = accepted_ballots(self.board.read())
        records = [r for v, r in sorted(self.records.items())
                   if accepted.get(v) == r.round and r.share is not None]
        zero = tuple(0 for _ in range(self.params.n_choices))
        share_sum = add_vectors(q, zero, *[r.share for r in records])
        if self.policy is TallierPolicy.WRONG_AGGREGATE:
            share_sum = ((share_sum[0] + 1) % q,) + share_sum[1:]
        return TallierAggregate(self.index, share_sum, sum(r.randomness for r in records) % q,
                                sum(r.rtilde for r in records) % q)

    def send_aggregate(self):
        agg = self.aggregate()
        statement = aggregate_statement(self.params, self.election_id, agg.tallier, agg.share_sum,
                                        agg.randomness_sum, agg.rtilde_sum)
        self.send(TDES, AggregateMessage(agg, self.sign(statement)))


def talliers_sync_validate(talliers: Sequence[Tallier], ctx: ProofContext) -> Dict[int, Tuple[bool, str]]:
    """
    Talliers exchange their share commitments for every cast ballot, each decides the
    ballot's validity and signs it, and the coordinator (lowest cooperating index)
    publishes PoIO_NIZKP and validity records.
    """
    cooperating = [t for t in talliers if t.cooperates]
    if not cooperating:
        logger.warning("no tallier takes part in synchronization")
        return {}
    n_t = len(talliers)
    network = cooperating[0].network
    coordinator = cooperating[0]
    for t in talliers:
        t.close_voting()
    for t in cooperating:
        t.share_views(range(n_t))
    network.drain()

    verdicts = {}
    for t in cooperating:
        t.sign_validity(n_t, ctx, verdicts, coordinator.index)
    network.drain()
    coordinator.publish_validity(n_t)
    return dict(coordinator.decisions)


def talliers_send_aggregates(talliers: Sequence[Tallier]):
    for t in talliers:
        if t.cooperates:
            t.send_aggregate()


class DesignatedTallier(Party):
    """
    Checks every tallier's aggregate against the board, reconstructs the tally and
    publishes the winner with the result proof.
    """
    def __init__(self, keys, params, election_id, network, tallier_keys, n_v: int, ctx: ProofContext,
                 rng: RandomSource, policy: DesignatedPolicy = DesignatedPolicy.HONEST):
        super().__init__(TDES, keys, params, election_id, network)
        self.tallier_keys = tuple(tallier_keys)
        self.n_v = n_v
        self.ctx = ctx
        self.rng = rng
        self.policy = DesignatedPolicy(policy)
        self.aggregates: Dict[int, AggregateMessage] = {}
        self.tally: Optional[Tuple[int, ...]] = None
        self.done = False
        self.handlers = {AggregateMessage: self.on_aggregate}

    def on_aggregate(self, sender: str, msg: AggregateMessage):
        agg = msg.aggregate
        if sender != tallier_party(agg.tallier) or not 0 <= agg.tallier < len(self.tallier_keys):
            return
        statement = aggregate_statement(self.params, self.election_id, agg.tallier, agg.share_sum,
                                        agg.randomness_sum, agg.rtilde_sum)
        if not self.verify(self.tallier_keys[agg.tallier], statement, msg.signature):
            logger.warning("Tdes drops badly signed aggregate from %s", sender)
            return
        self.aggregates[agg.tallier] = msg

    def check_and_reconstruct(self) -> Optional[Tuple[Tuple[int, ...], int, int, Commitment]]:
        """
        Each aggregate must open c~_bot^(j), the product of tallier j's published blinded
        commitments over accepted ballots. Returns (T, r~_bot, r_bot, c_bot), or None after
        publishing a dispute against the first inconsistent tallier.
        """
        params = self.params
        q = params.q
        n_t = len(self.tallier_keys)
        missing = [j for j in range(n_t) if j not in self.aggregates]
        if missing:
            logger.error("Tdes is missing aggregates from talliers %s", missing)
            return None
        entries = self.board.read()
        accepted = accepted_ballots(entries)
        blinded = []
        for j in range(n_t):
            msg = self.aggregates[j]
            agg = msg.aggregate
            c_j = blinded_product(params, entries, j, accepted)
            if comm_vec(params, agg.share_sum, agg.randomness_sum + agg.rtilde_sum) != c_j:
                logger.info("aggregate of tallier %d is inconsistent with the board", j)
                self.post(AggregateDispute(j, agg.share_sum, agg.randomness_sum, agg.rtilde_sum, msg.signature))
                return None
            blinded.append(c_j)

        aggregates = [self.aggregates[j].aggregate for j in range(n_t)]
        tally = add_vectors(q, *[a.share_sum for a in aggregates])
        rtilde_total = sum(a.rtilde_sum for a in aggregates) % q
        r_total = sum(a.randomness_sum for a in aggregates) % q
        c_bot = derand(params, params.prod(blinded), rtilde_total)
        return tally, rtilde_total, r_total, c_bot

    def publish_result(self, tally, rtilde_total: int, r_total: int, c_bot: Commitment) -> Optional[int]:
        winner = lowest_argmax(tally)
        try:
            proof = prove_result(self.ctx, tally, r_total, c_bot, winner, self.n_v, self.rng)
        except StatementError as e:
            logger.error("Tdes cannot prove the result: %s", e)
            return None
        if self.policy is DesignatedPolicy.WRONG_WINNER:
            winner = (winner + 1) % self.params.n_choices
            proof = ProofResult.garbage(self.params, self.n_v, self.rng)
        elif self.policy is DesignatedPolicy.WRONG_RTILDE:
            rtilde_total = (rtilde_total + 1) % self.params.q
        return self.post(ResultRecord(winner, rtilde_total, proof))

    def on_tick(self, now: int):
        if self.done or self.board.phase is not Phase.RESULT:
            return
        self.done = True
        reconstructed = self.check_and_reconstruct()
        if reconstructed is None:
            logger.info("election aborted at the result phase")
            return
        tally, rtilde_total, r_total, c_bot = reconstructed
        self.tally = tally
        self.publish_result(tally, rtilde_total, r_total, c_bot)
