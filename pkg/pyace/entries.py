from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Dict, Optional, Tuple
from pyace.encoding import Decoder, Encoder
from pyace.errors import EncodingError
from pyace.groups import Element, GroupParams, Scalar
from pyace.proofs import ProofResult, ProofVote
from pyace.signatures import Signature

EC = "EC"
PBB = "PBB"
TDES = "Tdes"


def voter_party(i: int) -> str:
    return f"V{i}"


def tallier_party(j: int) -> str:
    return f"T{j}"


def parse_party(party: str) -> Tuple[str, Optional[int]]:
    """
    Splits a party id into its role and index: "V3" -> ("V", 3), "Tdes" -> ("Tdes", None).
    """
    if party in (EC, PBB, TDES):
        return party, None
    if len(party) > 1 and party[0] in "VT" and party[1:].isdigit():
        return party[0], int(party[1:])
    raise ValueError(f"unknown party {party!r}")


class Phase(Enum):
    SETUP = "setup"
    VOTING = "voting"
    TALLY = "tally"
    RESULT = "result"
    VERIFICATION = "verification"

    @property
    def order(self) -> int:
        return list(Phase).index(self)


class EntryKind(Enum):
    PARAMS = "params"
    PHASE = "phase"
    BLINDED_COMMITMENT = "blinded-commitment"
    AUDIT_DISCARD = "audit-discard"
    CAST_FINAL = "cast-final"
    POIO = "poio"
    SILENCE = "silence"
    OPENING_DISPUTE = "opening-dispute"
    VOTE_VALIDITY = "vote-validity"
    POIO_NIZK = "poio-nizk"
    AGGREGATE_DISPUTE = "aggregate-dispute"
    RESULT = "result"


class Payload:
    """
    Body of a board entry. The appender signs signed_bytes(), which is the full
    encoding unless a payload carries signatures of other parties.
    """
    kind: ClassVar[EntryKind]

    def encode(self, enc: Encoder):
        raise NotImplementedError

    @classmethod
    def decode(cls, dec: Decoder) -> 'Payload':
        raise NotImplementedError

    def signed_bytes(self, params: GroupParams) -> bytes:
        enc = Encoder(params)
        self.encode(enc)
        return enc.to_bytes()


def _encode_signatures(enc: Encoder, signatures):
    enc.uint(len(signatures))
    for index, sig in signatures:
        enc.sint(index)
        sig.encode(enc)


def _decode_signatures(dec: Decoder) -> tuple:
    return tuple((dec.sint(), Signature.decode(dec)) for _ in range(dec.uint()))


@dataclass(frozen=True)
class ParamsRecord(Payload):
    """
    Setup record appended by the election commission: the public parameters, the
    rolls of voter and tallier keys, the special party keys and the phase schedule.
    """
    kind: ClassVar[EntryKind] = EntryKind.PARAMS
    election_id: str
    backend: str
    n_choices: int
    domain_tag: bytes
    params_digest: bytes
    config_digest: bytes
    voter_keys: Tuple[Element, ...]
    tallier_keys: Tuple[Element, ...]
    designated_key: Element
    board_key: Element
    ec_key: Element
    schedule: Tuple[Tuple[str, int, int], ...]
    audit_timeout: int

    @property
    def n_v(self) -> int:
        return len(self.voter_keys)

    @property
    def n_t(self) -> int:
        return len(self.tallier_keys)

    def key_of(self, party: str) -> Optional[Element]:
        role, index = parse_party(party)
        if role == EC: return self.ec_key
        if role == PBB: return self.board_key
        if role == TDES: return self.designated_key
        keys = self.voter_keys if role == "V" else self.tallier_keys
        return keys[index] if 0 <= index < len(keys) else None

    def encode(self, enc: Encoder):
        enc.text(self.election_id).text(self.backend).uint(self.n_choices).blob(self.domain_tag)
        enc.blob(self.params_digest).blob(self.config_digest)
        enc.elements(self.voter_keys).elements(self.tallier_keys)
        enc.element(self.designated_key).element(self.board_key).element(self.ec_key)
        enc.uint(len(self.schedule))
        for name, start, end in self.schedule:
            enc.text(name).sint(start).sint(end)
        enc.uint(self.audit_timeout)

    @classmethod
    def decode(cls, dec: Decoder) -> 'ParamsRecord':
        head = (dec.text(), dec.text(), dec.uint(), dec.blob(), dec.blob(), dec.blob())
        keys = (dec.elements(), dec.elements(), dec.element(), dec.element(), dec.element())
        schedule = tuple((dec.text(), dec.sint(), dec.sint()) for _ in range(dec.uint()))
        return cls(*head, *keys, schedule, dec.uint())


@dataclass(frozen=True)
class PhaseMarker(Payload):
    kind: ClassVar[EntryKind] = EntryKind.PHASE
    phase: Phase
    tick: int

    def encode(self, enc: Encoder):
        enc.text(self.phase.value).uint(self.tick)

    @classmethod
    def decode(cls, dec: Decoder) -> 'PhaseMarker':
        name = dec.text()
        try:
            phase = Phase(name)
        except ValueError:
            raise EncodingError(f"unknown phase {name!r}")
        return cls(phase, dec.uint())


@dataclass(frozen=True)
class BlindedCommitment(Payload):
    kind: ClassVar[EntryKind] = EntryKind.BLINDED_COMMITMENT
    voter: int
    tallier: int
    round: int
    blinded: Element

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.tallier).uint(self.round).element(self.blinded)

    @classmethod
    def decode(cls, dec: Decoder) -> 'BlindedCommitment':
        return cls(dec.uint(), dec.uint(), dec.uint(), dec.element())


@dataclass(frozen=True)
class AuditDiscard(Payload):
    """
    Closes an audited round. tallier is -1 when the board force-discards an open
    session at the end of voting.
    """
    kind: ClassVar[EntryKind] = EntryKind.AUDIT_DISCARD
    voter: int
    tallier: int
    round: int

    def encode(self, enc: Encoder):
        enc.uint(self.voter).sint(self.tallier).uint(self.round)

    @classmethod
    def decode(cls, dec: Decoder) -> 'AuditDiscard':
        return cls(dec.uint(), dec.sint(), dec.uint())


@dataclass(frozen=True)
class CastFinal(Payload):
    kind: ClassVar[EntryKind] = EntryKind.CAST_FINAL
    voter: int
    round: int

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.round)

    @classmethod
    def decode(cls, dec: Decoder) -> 'CastFinal':
        return cls(dec.uint(), dec.uint())


@dataclass(frozen=True)
class PoIORecord(Payload):
    """
    Proof of incorrect opening for an audited round: the tallier-signed receipt for
    c, the tallier-signed reveal of r~ and a reference to the published c~.
    """
    kind: ClassVar[EntryKind] = EntryKind.POIO
    voter: int
    tallier: int
    round: int
    blinded_seq: int
    commitment: Element
    receipt: Signature
    rtilde: Scalar
    reveal: Signature

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.tallier).uint(self.round).uint(self.blinded_seq)
        enc.element(self.commitment)
        self.receipt.encode(enc)
        enc.scalar(self.rtilde)
        self.reveal.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'PoIORecord':
        return cls(dec.uint(), dec.uint(), dec.uint(), dec.uint(), dec.element(),
                   Signature.decode(dec), dec.scalar(), Signature.decode(dec))


@dataclass(frozen=True)
class SilenceRecord(Payload):
    """
    A voter's claim that a tallier left a request unanswered past the audit timeout.
    stage is one of "receipt", "publish" or "reveal". request is the voter's own
    signature on what was asked: the submission of commitment for "receipt" and
    "publish", the audit decision of the round for "reveal".
    """
    kind: ClassVar[EntryKind] = EntryKind.SILENCE
    voter: int
    tallier: int
    round: int
    stage: str
    commitment: Element
    request: Signature

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.tallier).uint(self.round).text(self.stage).element(self.commitment)
        self.request.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'SilenceRecord':
        return cls(dec.uint(), dec.uint(), dec.uint(), dec.text(), dec.element(), Signature.decode(dec))


@dataclass(frozen=True)
class OpeningDispute(Payload):
    """
    A tallier's evidence that a voter opened its share commitment wrongly: the voter-signed
    submission of c and the voter-signed opening (share, r).
    """
    kind: ClassVar[EntryKind] = EntryKind.OPENING_DISPUTE
    voter: int
    tallier: int
    round: int
    commitment: Element
    submission: Signature
    share: Tuple[Scalar, ...]
    randomness: Scalar
    opening: Signature

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.tallier).uint(self.round).element(self.commitment)
        self.submission.encode(enc)
        enc.scalars(self.share).scalar(self.randomness)
        self.opening.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'OpeningDispute':
        return cls(dec.uint(), dec.uint(), dec.uint(), dec.element(), Signature.decode(dec),
                   dec.scalars(), dec.scalar(), Signature.decode(dec))


@dataclass(frozen=True)
class VoteValidity(Payload):
    """
    Joint validity decision for a cast ballot. signatures is the multiset of
    (tallier, signature) pairs over the validity statement; the appender's own
    signature covers everything else.
    """
    kind: ClassVar[EntryKind] = EntryKind.VOTE_VALIDITY
    voter: int
    round: int
    accepted: bool
    reason: str
    signatures: Tuple[Tuple[int, Signature], ...]

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.round).flag(self.accepted).text(self.reason)
        _encode_signatures(enc, self.signatures)

    @classmethod
    def decode(cls, dec: Decoder) -> 'VoteValidity':
        return cls(dec.uint(), dec.uint(), dec.flag(), dec.text(), _decode_signatures(dec))

    def signed_bytes(self, params: GroupParams) -> bytes:
        return Encoder(params).uint(self.voter).uint(self.round).flag(self.accepted).text(self.reason).to_bytes()


@dataclass(frozen=True)
class PoIONizkRecord(Payload):
    """
    Ballot rejected at synchronization: the voter's proof and its signature, plus
    every tallier's share commitment with the voter signature it holds for it.
    """
    kind: ClassVar[EntryKind] = EntryKind.POIO_NIZK
    voter: int
    round: int
    proof: ProofVote
    proof_signature: Signature
    shares: Tuple[Tuple[Element, Signature], ...]

    def encode(self, enc: Encoder):
        enc.uint(self.voter).uint(self.round)
        self.proof.encode(enc)
        self.proof_signature.encode(enc)
        enc.uint(len(self.shares))
        for c, sig in self.shares:
            enc.element(c)
            sig.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'PoIONizkRecord':
        voter, round_ = dec.uint(), dec.uint()
        proof = ProofVote.decode(dec)
        proof_signature = Signature.decode(dec)
        shares = tuple((dec.element(), Signature.decode(dec)) for _ in range(dec.uint()))
        return cls(voter, round_, proof, proof_signature, shares)


@dataclass(frozen=True)
class AggregateDispute(Payload):
    """
    The designated tallier's evidence that tallier j's signed aggregate does not open
    the product of its published blinded commitments.
    """
    kind: ClassVar[EntryKind] = EntryKind.AGGREGATE_DISPUTE
    tallier: int
    share_sum: Tuple[Scalar, ...]
    randomness_sum: Scalar
    rtilde_sum: Scalar
    signature: Signature

    def encode(self, enc: Encoder):
        enc.uint(self.tallier).scalars(self.share_sum).scalar(self.randomness_sum).scalar(self.rtilde_sum)
        self.signature.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'AggregateDispute':
        return cls(dec.uint(), dec.scalars(), dec.scalar(), dec.scalar(), Signature.decode(dec))


@dataclass(frozen=True)
class ResultRecord(Payload):
    kind: ClassVar[EntryKind] = EntryKind.RESULT
    winner: int
    rtilde_total: Scalar
    proof: ProofResult

    def encode(self, enc: Encoder):
        enc.uint(self.winner).scalar(self.rtilde_total)
        self.proof.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'ResultRecord':
        return cls(dec.uint(), dec.scalar(), ProofResult.decode(dec))


payload_types: Dict[EntryKind, type] = {
    cls.kind: cls for cls in (ParamsRecord, PhaseMarker, BlindedCommitment, AuditDiscard, CastFinal,
                              PoIORecord, SilenceRecord, OpeningDispute, VoteValidity, PoIONizkRecord,
                              AggregateDispute, ResultRecord)
}

# entry kinds the board accepts in each phase, besides phase markers
allowed_kinds = {
    Phase.SETUP: {EntryKind.PARAMS},
    Phase.VOTING: {EntryKind.BLINDED_COMMITMENT, EntryKind.AUDIT_DISCARD, EntryKind.CAST_FINAL,
                   EntryKind.POIO, EntryKind.SILENCE, EntryKind.OPENING_DISPUTE},
    Phase.TALLY: {EntryKind.VOTE_VALIDITY, EntryKind.POIO_NIZK},
    Phase.RESULT: {EntryKind.AGGREGATE_DISPUTE, EntryKind.RESULT},
    Phase.VERIFICATION: set(),
}


def entry_message(params: GroupParams, appender: str, payload: Payload) -> bytes:
    """
    Bytes an appender signs. Sequence number and tick are assigned by the board and not signed.
    """
    return (Encoder(params).blob(params.domain_tag).text("entry").text(payload.kind.value)
            .text(appender).blob(payload.signed_bytes(params)).to_bytes())
