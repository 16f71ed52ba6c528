import logging
from collections import Counter, deque
from dataclasses import astuple, dataclass
from typing import Dict, List, Optional, Tuple
from pyace.encoding import encode_all
from pyace.entries import Payload, entry_message
from pyace.errors import BoardError
from pyace.groups import Element, GroupParams, Scalar
from pyace.proofs import ProofVote
from pyace.signatures import KeyPair, Signature, sign, verify_sig

logger = logging.getLogger(__name__)

AUDIT = "audit"
CAST = "cast"


def statement(params: GroupParams, label: str, election_id: str, *fields) -> bytes:
    """
    Canonical bytes of a signed protocol statement.
    """
    return encode_all(params, params.domain_tag, label, election_id, *fields)


def submission_statement(params, election_id, voter, tallier, round_, commitment) -> bytes:
    return statement(params, "submission", election_id, voter, tallier, round_, commitment)


def receipt_statement(params, election_id, voter, tallier, round_, commitment) -> bytes:
    return statement(params, "receipt", election_id, voter, tallier, round_, commitment)


def decision_statement(params, election_id, voter, round_, decision) -> bytes:
    return statement(params, "decision", election_id, voter, round_, decision)


def reveal_statement(params, election_id, voter, tallier, round_, rtilde) -> bytes:
    return statement(params, "reveal", election_id, voter, tallier, round_, rtilde)


def opening_statement(params, election_id, voter, tallier, round_, share, randomness) -> bytes:
    return statement(params, "opening", election_id, voter, tallier, round_, tuple(share), randomness)


def proof_statement(params, election_id, voter, round_, proof: ProofVote) -> bytes:
    return statement(params, "proof", election_id, voter, round_, proof.to_bytes(params))


def validity_statement(params, election_id, voter, round_, accepted, reason) -> bytes:
    return statement(params, "validity", election_id, voter, round_, accepted, reason)


def aggregate_statement(params, election_id, tallier, share_sum, randomness_sum, rtilde_sum) -> bytes:
    return statement(params, "aggregate", election_id, tallier, tuple(share_sum), randomness_sum, rtilde_sum)


### Private messages

@dataclass(frozen=True)
class Submission:
    voter: int
    tallier: int
    round: int
    commitment: Element
    signature: Signature


@dataclass(frozen=True)
class Receipt:
    voter: int
    tallier: int
    round: int
    commitment: Element
    signature: Signature


@dataclass(frozen=True)
class Decision:
    voter: int
    round: int
    decision: str
    signature: Signature


@dataclass(frozen=True)
class Reveal:
    voter: int
    tallier: int
    round: int
    rtilde: Scalar
    signature: Signature


@dataclass(frozen=True)
class Opening:
    voter: int
    tallier: int
    round: int
    share: Tuple[Scalar, ...]
    randomness: Scalar
    signature: Signature
    proof: ProofVote
    proof_signature: Signature


@dataclass(frozen=True)
class SyncItem:
    """
    One tallier's view of a cast ballot: its share commitment, the voter signature on it
    and the state of the opening it received ("ok", "invalid" or "missing").
    """
    voter: int
    round: int
    commitment: Element
    signature: Signature
    opening: str


@dataclass(frozen=True)
class SyncBatch:
    tallier: int
    items: Tuple[SyncItem, ...]


@dataclass(frozen=True)
class ValidityBatch:
    tallier: int
    signatures: Tuple[Tuple[int, Signature], ...]


@dataclass(frozen=True)
class TallierAggregate:
    tallier: int
    share_sum: Tuple[Scalar, ...]
    randomness_sum: Scalar
    rtilde_sum: Scalar


@dataclass(frozen=True)
class AggregateMessage:
    aggregate: TallierAggregate
    signature: Signature


@dataclass(frozen=True)
class Envelope:
    sender: str
    recipient: str
    message: object

    def to_bytes(self, params: GroupParams) -> bytes:
        return encode_all(params, self.sender, self.recipient, type(self.message).__name__, astuple(self.message))


class Network:
    """
    Authenticated point-to-point channels plus the single append point of the board.
    Every send increments exactly one counter; messages queue until the scheduler drains them.
    """
    def __init__(self, board):
        self.board = board
        self.parties: Dict[str, 'Party'] = {}
        self.queue = deque()
        self.sent = Counter()
        self.rejections = Counter()
        self.log: List[Envelope] = []
        self.now = 0

    def register(self, party: 'Party'):
        self.parties[party.party_id] = party

    def send(self, envelope: Envelope):
        self.sent[envelope.sender] += 1
        self.log.append(envelope)
        self.queue.append(envelope)

    def post(self, appender: str, payload: Payload, signature: Signature) -> Optional[int]:
        try:
            return self.board.append(appender, payload, signature, self.now)
        except BoardError as e:
            logger.warning("board rejected %s from %s: %s", payload.kind.value, appender, e)
            self.rejections[type(e).__name__] += 1
            return None

    def drain(self):
        while self.queue:
            envelope = self.queue.popleft()
            recipient = self.parties.get(envelope.recipient)
            if recipient is None:
                logger.warning("no recipient %s for %s", envelope.recipient, type(envelope.message).__name__)
                continue
            recipient.receive(envelope.sender, envelope.message)


class Party:
    """
    Base class for protocol actors: a party id, a signing key and access to the network.
    Subclasses register message handlers in self.handlers.
    """
    def __init__(self, party_id: str, keys: KeyPair, params: GroupParams, election_id: str, network: Network):
        self.party_id = party_id
        self.keys = keys
        self.params = params
        self.election_id = election_id
        self.network = network
        self.handlers = {}

    @property
    def board(self):
        return self.network.board

    @property
    def now(self) -> int:
        return self.network.now

    def sign(self, message: bytes) -> Signature:
        return sign(self.params, self.keys, message)

    def verify(self, pk: Element, message: bytes, signature: Signature) -> bool:
        return verify_sig(self.params, pk, message, signature)

    def send(self, recipient: str, message):
        logger.debug("%s -> %s: %s", self.party_id, recipient, type(message).__name__)
        self.network.send(Envelope(self.party_id, recipient, message))

    def post(self, payload: Payload) -> Optional[int]:
        signature = self.sign(entry_message(self.params, self.party_id, payload))
        return self.network.post(self.party_id, payload, signature)

    def receive(self, sender: str, message):
        handler = self.handlers.get(type(message))
        if handler is None:
            logger.warning("%s ignores %s from %s", self.party_id, type(message).__name__, sender)
            return
        handler(sender, message)

    def on_tick(self, now: int):
        pass
