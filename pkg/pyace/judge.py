import logging
from dataclasses import dataclass
from typing import Optional, Set, Tuple
from pyace.board import (Transcript, BoardRules, accepted_ballots, blinded_product, schedule_from_record, select)
from pyace.commitments import comm_vec, derand, rerand
from pyace.entries import (EC, PBB, TDES, AggregateDispute, AuditDiscard, BlindedCommitment, CastFinal, EntryKind,
                           OpeningDispute, ParamsRecord, PhaseMarker, PoIONizkRecord, PoIORecord, ResultRecord, SilenceRecord,
                           VoteValidity, tallier_party, voter_party)
from pyace.errors import (BadSignature, BoardError, DuplicateVote, NotAuthorized)
from pyace.groups import GroupParams
from pyace.messages import (AUDIT, aggregate_statement, decision_statement, opening_statement, proof_statement,
                            receipt_statement, reveal_statement, submission_statement, validity_statement)
from pyace.proofs import Relation, nizk_setup, verify_result, verify_vote
from pyace.signatures import verify_sig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of judging a transcript: accepted, or rejected naming the earliest violated
    rule and the blamed party.
    """
    accepted: bool
    rule: str = ""
    blamed: str = ""
    detail: str = ""
    excluded_voters: Tuple[int, ...] = ()

    @classmethod
    def accept(cls, excluded=()) -> 'Verdict':
        return cls(True, excluded_voters=tuple(sorted(excluded)))

    @classmethod
    def reject(cls, rule: str, blamed: str, detail: str) -> 'Verdict':
        return cls(False, rule, blamed, detail)

    def __str__(self):
        if self.accepted:
            excluded = f" (excluded voters: {list(self.excluded_voters)})" if self.excluded_voters else ""
            return "accept" + excluded
        return f"reject rule={self.rule} blame={self.blamed}: {self.detail}"


class _Rejected(Exception):
    def __init__(self, rule: str, blamed: str, detail: str):
        super().__init__(detail)
        self.verdict = Verdict.reject(rule, blamed, detail)


def _rule_of(error: BoardError) -> str:
    if isinstance(error, (BadSignature, NotAuthorized)):
        return "signature"
    if isinstance(error, DuplicateVote):
        return "double-vote"
    return "phase"


def _key(keys, index: int):
    return keys[index] if 0 <= index < len(keys) else None


def verify_poio(poio: PoIORecord, board) -> bool:
    """
    A PoIO is valid iff its tallier-signed receipt and reveal verify and the referenced
    published commitment satisfies c~ != c * h^r~. Dangling references make it invalid.
    """
    params, setup = board.params, board.setup
    entries = board.read()
    if setup is None or not 0 <= poio.blinded_seq < len(entries):
        return False
    ref = entries[poio.blinded_seq].payload
    if not isinstance(ref, BlindedCommitment) or (ref.voter, ref.tallier, ref.round) != (poio.voter, poio.tallier, poio.round):
        return False
    pk = _key(setup.tallier_keys, poio.tallier)
    if pk is None:
        return False
    eid = setup.election_id
    receipt = receipt_statement(params, eid, poio.voter, poio.tallier, poio.round, poio.commitment)
    reveal = reveal_statement(params, eid, poio.voter, poio.tallier, poio.round, poio.rtilde)
    if not verify_sig(params, pk, receipt, poio.receipt) or not verify_sig(params, pk, reveal, poio.reveal):
        return False
    return ref.blinded != rerand(params, poio.commitment, poio.rtilde)


def verify_opening_dispute(dispute: OpeningDispute, params: GroupParams, setup: ParamsRecord) -> bool:
    """
    Valid iff both voter signatures verify and the signed opening does not open the signed commitment.
    """
    pk = _key(setup.voter_keys, dispute.voter)
    if pk is None or len(dispute.share) != params.n_choices:
        return False
    eid = setup.election_id
    submission = submission_statement(params, eid, dispute.voter, dispute.tallier, dispute.round, dispute.commitment)
    opening = opening_statement(params, eid, dispute.voter, dispute.tallier, dispute.round, dispute.share,
                                dispute.randomness)
    if not verify_sig(params, pk, submission, dispute.submission) or not verify_sig(params, pk, opening, dispute.opening):
        return False
    return comm_vec(params, dispute.share, dispute.randomness) != dispute.commitment


def poio_nizk_blame(record: PoIONizkRecord, publisher: str, params: GroupParams, setup: ParamsRecord) -> Optional[str]:
    """
    Deterministic blame for a rejected ballot: a tallier holding no voter signature for its
    share commitment is blamed; a proof that is unsigned or actually verifies blames the
    publisher; otherwise the voter is rightly excluded and None is returned.
    """
    pk = _key(setup.voter_keys, record.voter)
    if pk is None or len(record.shares) != setup.n_t:
        return publisher
    eid = setup.election_id
    for j, (c, sig) in enumerate(record.shares):
        if not verify_sig(params, pk, submission_statement(params, eid, record.voter, j, record.round, c), sig):
            return tallier_party(j)
    if not verify_sig(params, pk, proof_statement(params, eid, record.voter, record.round, record.proof),
                      record.proof_signature):
        return publisher
    ctx, _ = nizk_setup(params, Relation.VOTE)
    aggregate = params.prod(c for c, _ in record.shares)
    if verify_vote(ctx, aggregate, record.proof, voter_party(record.voter), eid):
        return publisher
    return None


def silence_blame(silence: SilenceRecord, params: GroupParams, setup: ParamsRecord, entries) -> str:
    """
    Blame for a silence claim, judged against the board before it. The voter is blamed
    when the claim is unsigned, comes after its cast, names a round the voter was not
    in, or a request the board shows answered; otherwise the named tallier.
    """
    voter = voter_party(silence.voter)
    pk = _key(setup.voter_keys, silence.voter)
    if pk is None or not 0 <= silence.tallier < setup.n_t or silence.round < 1:
        return voter
    eid = setup.election_id
    if silence.stage == "reveal":
        statement = decision_statement(params, eid, silence.voter, silence.round, AUDIT)
    elif silence.stage in ("receipt", "publish"):
        statement = submission_statement(params, eid, silence.voter, silence.tallier, silence.round,
                                         silence.commitment)
    else:
        return voter
    if not verify_sig(params, pk, statement, silence.request):
        return voter
    if select(entries, CastFinal, silence.voter):
        return voter

    rounds = [e.payload for e in select(entries, BlindedCommitment, silence.voter)]
    latest = max((c.round for c in rounds), default=0)
    published = any(c.tallier == silence.tallier and c.round == silence.round for c in rounds)
    discarded = any(e.payload.round == silence.round for e in select(entries, AuditDiscard, silence.voter))
    if silence.stage == "reveal":
        return tallier_party(silence.tallier) if published and silence.round == latest else voter
    if silence.round not in (latest, latest + 1) or discarded:
        return voter
    if silence.stage == "publish" and published:
        return voter
    return tallier_party(silence.tallier)


def aggregate_dispute_blame(dispute: AggregateDispute, params: GroupParams, setup: ParamsRecord, entries) -> str:
    """
    Tallier j is blamed when its signed aggregate does not open the product of its published
    blinded commitments; the designated tallier when the dispute is unfounded.
    """
    pk = _key(setup.tallier_keys, dispute.tallier)
    statement = aggregate_statement(params, setup.election_id, dispute.tallier, dispute.share_sum,
                                    dispute.randomness_sum, dispute.rtilde_sum)
    if pk is None or len(dispute.share_sum) != params.n_choices or not verify_sig(params, pk, statement, dispute.signature):
        return TDES
    c_j = blinded_product(params, entries, dispute.tallier, accepted_ballots(entries))
    if comm_vec(params, dispute.share_sum, dispute.randomness_sum + dispute.rtilde_sum) != c_j:
        return tallier_party(dispute.tallier)
    return TDES


def _check_setup(transcript: Transcript, params: GroupParams):
    setup = transcript.setup
    first = transcript.entries[0] if transcript.entries else None
    if setup is None or first.appender != EC:
        raise _Rejected("setup", EC, "first entry is not a setup record by EC")
    expected = (params.backend.value, params.n_choices, params.domain_tag, params.digest())
    actual = (setup.backend, setup.n_choices, setup.domain_tag, setup.params_digest)
    if expected != actual or transcript.params.digest() != params.digest():
        raise _Rejected("setup", EC, "setup record does not match the election params")
    if setup.config_digest != transcript.config_digest:
        raise _Rejected("setup", EC, "config digest differs from the transcript header")
    phases = {name for name, _, _ in setup.schedule}
    if phases != {"setup", "voting", "tally", "result", "verification"}:
        raise _Rejected("setup", EC, "phase schedule is incomplete")


def _replay(transcript: Transcript, params: GroupParams, excluded: Set[int]):
    """
    Runs every entry through the board rules and checks disputes where they appear.
    """
    rules = BoardRules(params)
    entries = transcript.entries
    for entry in entries:
        try:
            rules.admit(entry.appender, entry.payload, entry.signature, entry.tick)
        except BoardError as e:
            raise _Rejected(_rule_of(e), entry.appender, f"entry {entry.seq}: {e}")
        payload = entry.payload
        setup = rules.setup

        if isinstance(payload, PhaseMarker):
            start, _ = schedule_from_record(setup)[payload.phase.value]
            if payload.tick < start:
                raise _Rejected("phase", PBB, f"{payload.phase.value} entered at tick {payload.tick} before {start}")
        elif isinstance(payload, PoIORecord):
            prefix = Transcript(params, transcript.config_digest, entries[:entry.seq], entry.prev_hash)
            if verify_poio(payload, prefix):
                raise _Rejected("poio", tallier_party(payload.tallier),
                                f"valid PoIO by voter {payload.voter} in round {payload.round}")
            raise _Rejected("poio", entry.appender, f"entry {entry.seq}: invalid PoIO")
        elif isinstance(payload, SilenceRecord):
            blamed = silence_blame(payload, params, setup, entries[:entry.seq])
            raise _Rejected("silence", blamed, f"entry {entry.seq}: {payload.stage} of voter {payload.voter} "
                            f"in round {payload.round} left unanswered by tallier {payload.tallier}")
        elif isinstance(payload, OpeningDispute):
            if not verify_opening_dispute(payload, params, setup):
                raise _Rejected("opening", entry.appender, f"entry {entry.seq}: unfounded opening dispute")
            excluded.add(payload.voter)
        elif isinstance(payload, PoIONizkRecord):
            blamed = poio_nizk_blame(payload, entry.appender, params, setup)
            if blamed is not None:
                raise _Rejected("poio-nizk", blamed, f"entry {entry.seq}: PoIO_NIZKP for voter {payload.voter}")
            excluded.add(payload.voter)
        elif isinstance(payload, AggregateDispute):
            blamed = aggregate_dispute_blame(payload, params, setup, entries[:entry.seq])
            raise _Rejected("consistency", blamed, f"aggregate of tallier {payload.tallier} disputed")


def _check_validity(transcript: Transcript, params: GroupParams, excluded: Set[int]):
    setup = transcript.setup
    eid = setup.election_id
    validity = {e.payload.voter: e for e in transcript.read(VoteValidity)}
    for cast_entry in transcript.read(CastFinal):
        voter, round_ = cast_entry.payload.voter, cast_entry.payload.round
        entry = validity.get(voter)
        if entry is None:
            raise _Rejected("validity", tallier_party(0), f"cast ballot of voter {voter} has no validity record")
        record = entry.payload
        statement = validity_statement(params, eid, voter, round_, record.accepted, record.reason)
        signers = {j for j, sig in record.signatures
                   if _key(setup.tallier_keys, j) is not None and verify_sig(params, setup.tallier_keys[j], statement, sig)}
        for j in range(setup.n_t):
            if j not in signers:
                raise _Rejected("validity", tallier_party(j), f"validity of voter {voter} lacks a signature of T{j}")
        published = {e.payload.tallier for e in transcript.read(BlindedCommitment, voter) if e.payload.round == round_}
        if len(published) != setup.n_t:
            raise _Rejected("validity", entry.appender, f"voter {voter} lacks blinded commitments")
        if record.accepted and voter in excluded:
            raise _Rejected("validity", entry.appender, f"voter {voter} accepted despite a valid dispute")
        if not record.accepted:
            justified = record.reason == "missing-opening" or (
                record.reason in ("invalid-proof", "invalid-opening") and voter in excluded)
            if not justified:
                raise _Rejected("validity", entry.appender, f"voter {voter} rejected without evidence ({record.reason})")


def _check_result(transcript: Transcript, params: GroupParams):
    results = transcript.read(ResultRecord)
    if not results:
        raise _Rejected("result", TDES, "no result was published")
    result = results[0].payload
    entries = transcript.entries
    setup = transcript.setup
    accepted = accepted_ballots(entries)
    blinded = params.prod(blinded_product(params, entries, j, accepted) for j in range(setup.n_t))
    c_bot = derand(params, blinded, result.rtilde_total)
    ctx, _ = nizk_setup(params, Relation.RESULT)
    if not verify_result(ctx, c_bot, result.winner, result.proof, setup.n_v):
        raise _Rejected("result", TDES, f"result proof for winner {result.winner} does not verify")


def judge_verify(transcript: Transcript, params: Optional[GroupParams] = None) -> Verdict:
    """
    Verifies a run from public data only: hash chain, setup, signatures and phases,
    at most one cast per voter, every dispute with its blame, complete validity records,
    and the result proof against c_bot recomputed from the board.
    """
    params = params or transcript.params
    excluded: Set[int] = set()
    try:
        broken = transcript.broken_link()
        if broken is not None:
            raise _Rejected("integrity", PBB, f"hash chain broken at entry {broken}")
        _check_setup(transcript, params)
        _replay(transcript, params, excluded)
        _check_validity(transcript, params, excluded)
        _check_result(transcript, params)
    except _Rejected as rejection:
        logger.info("judge: %s", rejection.verdict)
        return rejection.verdict
    verdict = Verdict.accept(excluded)
    logger.info("judge: %s", verdict)
    return verdict
