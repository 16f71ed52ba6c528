import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple
from pyace.commitments import BallotSecrets, Commitment, is_one_hot, rerand, share_vote
from pyace.entries import BlindedCommitment, CastFinal, PoIORecord, SilenceRecord, tallier_party, voter_party
from pyace.errors import ProtocolError, StatementError
from pyace.messages import (AUDIT, CAST, Decision, Opening, Party, Receipt, Reveal, Submission,
                            decision_statement, opening_statement, proof_statement, receipt_statement,
                            reveal_statement, submission_statement)
from pyace.proofs import ProofContext, ProofVote, prove_vote
from pyace.randomness import RandomSource
from pyace.signatures import Signature

logger = logging.getLogger(__name__)


def blinding_matches(params, commitment: Commitment, blinded: Commitment, rtilde: int) -> bool:
    """
    Audit check of one tallier: c~ = ReRand(c, r~), i.e. c = DeRand(c~, r~).
    """
    return rerand(params, commitment, rtilde) == blinded


@dataclass(frozen=True)
class AuditStrategy:
    """
    How many rounds a voter plays: audit the first k - 1, cast the k-th. Either a fixed
    k, or k drawn per voter from a geometric distribution with success probability p.
    """
    k: Optional[int] = None
    p: Optional[float] = None

    def __post_init__(self):
        if (self.k is None) == (self.p is None):
            raise ValueError("give exactly one of k and p")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.p is not None and not 0 < self.p <= 1:
            raise ValueError(f"p must be in (0, 1], got {self.p}")

    @classmethod
    def fixed(cls, k: int) -> 'AuditStrategy':
        return cls(k=k)

    @classmethod
    def geometric(cls, p: float) -> 'AuditStrategy':
        return cls(p=p)

    def sample_k(self, rng: RandomSource) -> int:
        return self.k if self.k is not None else rng.geometric(self.p)


class VoterPolicy(Enum):
    HONEST = "honest"
    INVALID_VOTE_GARBAGE_PROOF = "invalid_vote_garbage_proof"
    WRONG_OPENING = "wrong_opening"
    DOUBLE_VOTE_ATTEMPT = "double_vote_attempt"


class Stage(Enum):
    IDLE = "idle"
    SUBMITTED = "submitted"
    AUDITING = "auditing"
    CAST = "cast"
    STALLED = "stalled"


@dataclass(frozen=True)
class RoundMaterial:
    round: int
    secrets: BallotSecrets
    commitments: Tuple[Commitment, ...]
    proof: ProofVote


class Voter(Party):
    """
    Voter state machine: fresh shares, commitments and proof every round, audits the
    first k - 1 rounds, casts the k-th and then opens the cast shares to the talliers.
    """
    def __init__(self, index: int, vote, strategy: AuditStrategy, keys, params, election_id, network,
                 tallier_keys, ctx: ProofContext, rng: RandomSource, audit_timeout: int,
                 policy: VoterPolicy = VoterPolicy.HONEST):
        super().__init__(voter_party(index), keys, params, election_id, network)
        self.index = index
        self.vote = tuple(vote)
        self.strategy = strategy
        self.tallier_keys = tuple(tallier_keys)
        self.ctx = ctx
        self.rng = rng
        self.audit_timeout = audit_timeout
        self.policy = VoterPolicy(policy)
        self.k = strategy.sample_k(rng)

        self.round = 0
        self.audits = 0
        self.stage = Stage.IDLE
        self.current: Optional[RoundMaterial] = None
        self.receipts: Dict[int, Signature] = {}
        self.requests: Dict[int, Signature] = {}
        self.audit_request: Optional[Signature] = None
        self.reveals: Dict[int, Tuple[int, Signature]] = {}
        self.started = 0
        self.cast_round: Optional[int] = None
        self.poios: List[PoIORecord] = []
        self.double_vote_tried = False
        self.handlers = {Receipt: self.on_receipt, Reveal: self.on_reveal}

    @property
    def n_t(self) -> int:
        return len(self.tallier_keys)

    @property
    def finished(self) -> bool:
        if self.stage is Stage.STALLED:
            return True
        return self.stage is Stage.CAST and (self.policy is not VoterPolicy.DOUBLE_VOTE_ATTEMPT
                                             or self.double_vote_tried)

    def prepare_round(self) -> RoundMaterial:
        """
        Fresh shares, commitments and well-formedness proof for the next round, and the
        signed submission of each share commitment to its tallier.
        """
        if self.cast_round is not None:
            raise ProtocolError(f"{self.party_id} already cast")
        self.round += 1
        if self.policy is VoterPolicy.INVALID_VOTE_GARBAGE_PROOF:
            secrets = self._share_any(self.vote)
            commitments = secrets.commitments(self.params)
            proof = ProofVote.garbage(self.params, self.rng)
        else:
            if not is_one_hot(self.vote):
                raise StatementError(f"{self.party_id} refuses to submit invalid vote {self.vote}")
            secrets = share_vote(self.params, self.vote, self.n_t, self.rng)
            commitments = secrets.commitments(self.params)
            proof = prove_vote(self.ctx, secrets, commitments, self.party_id, self.election_id, self.rng)
        material = RoundMaterial(self.round, secrets, commitments, proof)

        self.current = material
        self.receipts, self.reveals, self.requests = {}, {}, {}
        self.audit_request = None
        self.started = self.now
        self.stage = Stage.SUBMITTED
        for j, c in enumerate(material.commitments):
            statement = submission_statement(self.params, self.election_id, self.index, j, material.round, c)
            self.requests[j] = self.sign(statement)
            self.send(tallier_party(j), Submission(self.index, j, material.round, c, self.requests[j]))
        return material

    def _share_any(self, vote) -> BallotSecrets:
        """
        Additive shares of an arbitrary vector, used by a voter submitting a non one-hot vote.
        """
        q = self.params.q
        shares = [tuple(self.rng.scalar(q) for _ in vote) for _ in range(self.n_t - 1)]
        shares.append(tuple((v - sum(col)) % q for v, col in zip(vote, zip(*shares))) if shares else tuple(vote))
        randomness = tuple(self.rng.scalar(q) for _ in range(self.n_t))
        return BallotSecrets(tuple(vote), tuple(shares), randomness)

    def published(self) -> Dict[int, object]:
        """
        Blinded commitments on the board for the current round, by tallier.
        """
        entries = self.board.read(BlindedCommitment, self.index)
        return {e.payload.tallier: e for e in entries if e.payload.round == self.round}

    def decide(self) -> Optional[str]:
        """
        AUDIT for the first k - 1 rounds and CAST afterwards, once every tallier has a receipt
        out and a blinded commitment on the board; None while anything is missing.
        """
        if self.stage is not Stage.SUBMITTED:
            return None
        if len(self.published()) < self.n_t or len(self.receipts) < self.n_t:
            return None
        return AUDIT if self.audits < self.k - 1 else CAST

    def check_audit(self, revealed: Dict[int, Tuple[int, Signature]]) -> Optional[PoIORecord]:
        """
        Checks every revealed r~ against the board: c~ must equal ReRand(c, r~). Returns a
        PoIO naming the first failing tallier, or None when all checks pass.
        """
        published = self.published()
        for j in range(self.n_t):
            entry = published[j]
            rtilde, reveal_sig = revealed[j]
            c = self.current.commitments[j]
            if not blinding_matches(self.params, c, entry.payload.blinded, rtilde):
                logger.info("%s caught tallier %d in round %d", self.party_id, j, self.round)
                return PoIORecord(self.index, j, self.round, entry.seq, c, self.receipts[j], rtilde, reveal_sig)
        return None

    def open(self) -> List[Opening]:
        if self.cast_round is None or self.current is None:
            raise ProtocolError(f"{self.party_id} has not cast yet")
        material = self.current
        proof_sig = self.sign(proof_statement(self.params, self.election_id, self.index, material.round,
                                              material.proof))
        openings = []
        for j, (share, r) in enumerate(zip(material.secrets.shares, material.secrets.randomness)):
            if self.policy is VoterPolicy.WRONG_OPENING:
                r = (r + 1) % self.params.q
            statement = opening_statement(self.params, self.election_id, self.index, j, material.round, share, r)
            openings.append(Opening(self.index, j, material.round, tuple(share), r, self.sign(statement),
                                    material.proof, proof_sig))
        return openings

    def _send_decision(self, decision: str):
        sig = self.sign(decision_statement(self.params, self.election_id, self.index, self.round, decision))
        if decision == AUDIT:
            self.audit_request = sig
        for j in range(self.n_t):
            self.send(tallier_party(j), Decision(self.index, self.round, decision, sig))

    def _file_silence(self, stage_of):
        for j in range(self.n_t):
            stage = stage_of(j)
            if stage is not None:
                logger.info("%s reports tallier %d silent at %s", self.party_id, j, stage)
                request = self.audit_request if stage == "reveal" else self.requests[j]
                self.post(SilenceRecord(self.index, j, self.round, stage, self.current.commitments[j], request))
        self.stage = Stage.STALLED

    def on_tick(self, now: int):
        if self.stage is Stage.IDLE and self.cast_round is None:
            self.prepare_round()
        elif self.stage is Stage.SUBMITTED:
            decision = self.decide()
            if decision is None:
                if now - self.started > self.audit_timeout:
                    published = self.published()
                    self._file_silence(lambda j: "receipt" if j not in self.receipts
                                       else "publish" if j not in published else None)
            elif decision == AUDIT:
                self._send_decision(AUDIT)
                self.started = now
                self.stage = Stage.AUDITING
            else:
                self._cast()
        elif self.stage is Stage.AUDITING and now - self.started > self.audit_timeout:
            self._file_silence(lambda j: "reveal" if j not in self.reveals else None)
        elif self.stage is Stage.CAST and self.policy is VoterPolicy.DOUBLE_VOTE_ATTEMPT and not self.double_vote_tried:
            self.double_vote_tried = True
            logger.info("%s attempts a second cast", self.party_id)
            self.post(CastFinal(self.index, self.round))

    def _cast(self):
        if self.post(CastFinal(self.index, self.round)) is None:
            self.stage = Stage.STALLED
            return
        self.cast_round = self.round
        self.stage = Stage.CAST
        self._send_decision(CAST)
        for opening in self.open():
            self.send(tallier_party(opening.tallier), opening)

    def on_receipt(self, sender: str, msg: Receipt):
        if self.current is None or msg.round != self.round or sender != tallier_party(msg.tallier):
            return
        c = self.current.commitments[msg.tallier]
        statement = receipt_statement(self.params, self.election_id, self.index, msg.tallier, msg.round, c)
        if msg.commitment != c or not self.verify(self.tallier_keys[msg.tallier], statement, msg.signature):
            logger.warning("%s got a bad receipt from %s", self.party_id, sender)
            return
        self.receipts[msg.tallier] = msg.signature

    def on_reveal(self, sender: str, msg: Reveal):
        if self.stage is not Stage.AUDITING or msg.round != self.round or sender != tallier_party(msg.tallier):
            return
        statement = reveal_statement(self.params, self.election_id, self.index, msg.tallier, msg.round, msg.rtilde)
        if not self.verify(self.tallier_keys[msg.tallier], statement, msg.signature):
            logger.warning("%s got a badly signed reveal from %s", self.party_id, sender)
            return
        self.reveals[msg.tallier] = (msg.rtilde, msg.signature)
        if len(self.reveals) < self.n_t:
            return

        self.audits += 1
        poio = self.check_audit(self.reveals)
        if poio is not None:
            self.poios.append(poio)
            self.post(poio)
        # either way the next round starts from a fresh ballot
        self.stage = Stage.IDLE
