import base64
import binascii
import hashlib
import json
import logging
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union
from pyace import params as defaults
from pyace.encoding import Decoder, Encoder
from pyace.entries import (EC, PBB, TDES, AuditDiscard, EntryKind, ParamsRecord, Payload, Phase, PhaseMarker,
                           allowed_kinds, entry_message, parse_party, payload_types, tallier_party, voter_party)
from pyace.errors import (BadSignature, ConfigError, DuplicateEntry, DuplicateVote, EncodingError,
                          IntegrityError, NotAuthorized, OpenSessions, TickError, UnknownReference, WrongPhase)
from pyace.groups import Backend, GroupParams, derive_params
from pyace.signatures import KeyPair, Signature, sign, verify_sig

logger = logging.getLogger(__name__)

Schedule = Dict[str, Tuple[int, Optional[int]]]


@dataclass(frozen=True)
class BoardEntry:
    seq: int
    tick: int
    appender: str
    payload: Payload
    signature: Signature
    prev_hash: bytes

    @property
    def kind(self) -> EntryKind:
        return self.payload.kind

    def encode(self, enc: Encoder):
        body = Encoder(enc.params)
        self.payload.encode(body)
        enc.uint(self.seq).uint(self.tick).text(self.appender).text(self.kind.value).blob(body.to_bytes())
        self.signature.encode(enc)
        enc.blob(self.prev_hash)

    @classmethod
    def decode(cls, dec: Decoder) -> 'BoardEntry':
        seq, tick, appender, kind = dec.uint(), dec.uint(), dec.text(), dec.text()
        try:
            payload_type = payload_types[EntryKind(kind)]
        except ValueError:
            raise EncodingError(f"unknown entry kind {kind!r}")
        body = Decoder(dec.params, dec.blob())
        payload = payload_type.decode(body)
        body.finish()
        return cls(seq, tick, appender, payload, Signature.decode(dec), dec.blob())

    def to_bytes(self, params: GroupParams) -> bytes:
        enc = Encoder(params)
        self.encode(enc)
        return enc.to_bytes()

    def digest(self, params: GroupParams) -> bytes:
        return hashlib.sha256(b"ace/entry" + self.to_bytes(params)).digest()


def genesis_hash(params: GroupParams, config_digest: bytes) -> bytes:
    return hashlib.sha256(b"ace/genesis" + params.digest() + config_digest).digest()


def phase_at(schedule: Schedule, tick: int) -> Phase:
    """
    The phase whose [start, end) interval contains tick; end None means open-ended.
    """
    for phase in Phase:
        start, end = schedule[phase.value]
        if start <= tick and (end is None or tick < end):
            return phase
    raise TickError(f"tick {tick} is outside every phase interval")


def schedule_from_record(setup: ParamsRecord) -> Schedule:
    return {name: (start, None if end < 0 else end) for name, start, end in setup.schedule}


def schedule_to_record(schedule: Schedule) -> Tuple[Tuple[str, int, int], ...]:
    return tuple((phase.value, schedule[phase.value][0],
                  -1 if schedule[phase.value][1] is None else schedule[phase.value][1]) for phase in Phase)


@dataclass(frozen=True)
class Transcript:
    """
    Ordered board entries with the params and config digest they were produced under.
    Each entry carries the hash of its predecessor; head is the hash of the last entry.
    """
    params: GroupParams
    config_digest: bytes
    entries: Tuple[BoardEntry, ...]
    head: bytes

    @property
    def setup(self) -> Optional[ParamsRecord]:
        if self.entries and isinstance(self.entries[0].payload, ParamsRecord):
            return self.entries[0].payload
        return None

    def broken_link(self) -> Optional[int]:
        """
        Index of the first entry whose hash link does not match, len(entries) when
        only the head is wrong, None for an intact chain.
        """
        prev = genesis_hash(self.params, self.config_digest)
        for index, entry in enumerate(self.entries):
            if entry.prev_hash != prev or entry.seq != index:
                return index
            prev = entry.digest(self.params)
        return None if prev == self.head else len(self.entries)

    def resealed(self, entries) -> 'Transcript':
        """
        Copy with the given entries renumbered and re-linked into a valid chain.
        """
        prev = genesis_hash(self.params, self.config_digest)
        linked = []
        for index, entry in enumerate(entries):
            entry = replace(entry, seq=index, prev_hash=prev)
            prev = entry.digest(self.params)
            linked.append(entry)
        return replace(self, entries=tuple(linked), head=prev)

    def read(self, kind=None, voter: Optional[int] = None) -> Tuple[BoardEntry, ...]:
        return select(self.entries, kind, voter)

    def header(self) -> dict:
        setup = self.setup
        return {
            "format": defaults.transcript_format,
            "backend": self.params.backend.value,
            "n_choices": self.params.n_choices,
            "domain_tag": self.params.domain_tag.hex(),
            "params_digest": self.params.digest().hex(),
            "config_digest": self.config_digest.hex(),
            "election_id": setup.election_id if setup else "",
            "entries": len(self.entries),
            "head": self.head.hex(),
        }

    def dumps(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True, separators=(",", ":"))]
        lines += [base64.b64encode(entry.to_bytes(self.params)).decode("ascii") for entry in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> 'Transcript':
        lines = text.splitlines()
        if not lines:
            raise IntegrityError("empty transcript file")
        try:
            header = json.loads(lines[0])
            if header["format"] != defaults.transcript_format:
                raise IntegrityError(f"unsupported transcript format {header['format']}")
            params = derive_params(Backend(header["backend"]), int(header["n_choices"]),
                                   bytes.fromhex(header["domain_tag"]))
            config_digest = bytes.fromhex(header["config_digest"])
            head = bytes.fromhex(header["head"])
            count = int(header["entries"])
            params_digest = bytes.fromhex(header["params_digest"])
        except (ValueError, KeyError, TypeError, ConfigError) as e:
            raise IntegrityError(f"bad transcript header: {e}")
        if params.digest() != params_digest:
            raise IntegrityError("params digest in header does not match the derived params")
        if len(lines) - 1 != count:
            raise IntegrityError(f"header announces {count} entries, file has {len(lines) - 1}")

        entries = []
        for number, line in enumerate(lines[1:], start=2):
            try:
                dec = Decoder(params, base64.b64decode(line, validate=True))
                entries.append(BoardEntry.decode(dec))
                dec.finish()
            except (binascii.Error, EncodingError) as e:
                raise IntegrityError(f"line {number}: {e}")
        transcript = cls(params, config_digest, tuple(entries), head)
        broken = transcript.broken_link()
        if broken is not None:
            raise IntegrityError(f"hash chain broken at entry {broken}")
        return transcript


def select(entries, kind=None, voter: Optional[int] = None) -> Tuple[BoardEntry, ...]:
    if isinstance(kind, type):
        kind = kind.kind
    return tuple(e for e in entries
                 if (kind is None or e.kind is kind)
                 and (voter is None or getattr(e.payload, "voter", None) == voter))


def load(path: Union[str, Path]) -> Transcript:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as e:
        raise IntegrityError(str(e))
    return Transcript.loads(text)


class BoardRules:
    """
    Admission rules of the board as a replayable state machine. The board runs every
    append through it, and the judge replays a transcript through a fresh instance.
    """
    def __init__(self, params: GroupParams):
        self.params = params
        self.setup: Optional[ParamsRecord] = None
        self.phase = Phase.SETUP
        self.tick = 0
        self.rounds: Dict[int, Dict[int, Set[int]]] = {}
        self.closed: Dict[int, Set[int]] = {}
        self.discards: Set[Tuple[int, int, int]] = set()
        self.cast: Dict[int, int] = {}
        self.validity: Set[int] = set()
        self.results = 0

    def latest_round(self, voter: int) -> int:
        return max(self.rounds.get(voter, {0: None}))

    def open_sessions(self) -> List[Tuple[int, int]]:
        sessions = []
        for voter in sorted(self.rounds):
            latest = self.latest_round(voter)
            if voter not in self.cast and latest not in self.closed.get(voter, set()):
                sessions.append((voter, latest))
        return sessions

    def _authorize(self, appender: str, payload: Payload):
        """
        Checks that appender is the party allowed to post this payload.
        """
        kind = payload.kind
        try:
            role, index = parse_party(appender)
        except ValueError:
            raise NotAuthorized(f"unknown party {appender!r}")
        if kind is EntryKind.PARAMS:
            expected = role == EC
        elif kind is EntryKind.PHASE:
            expected = role == PBB
        elif kind is EntryKind.AUDIT_DISCARD and payload.tallier < 0:
            expected = role == PBB
        elif kind in (EntryKind.BLINDED_COMMITMENT, EntryKind.AUDIT_DISCARD, EntryKind.OPENING_DISPUTE):
            expected = appender == tallier_party(payload.tallier)
        elif kind in (EntryKind.CAST_FINAL, EntryKind.POIO, EntryKind.SILENCE):
            expected = appender == voter_party(payload.voter)
        elif kind in (EntryKind.VOTE_VALIDITY, EntryKind.POIO_NIZK):
            expected = role == "T"
        else:
            expected = role == TDES
        if not expected:
            raise NotAuthorized(f"{appender} may not append {kind.value}")

        if self.setup is not None:
            voter = getattr(payload, "voter", None)
            tallier = getattr(payload, "tallier", None)
            if voter is not None and not 0 <= voter < self.setup.n_v:
                raise NotAuthorized(f"voter {voter} is not on the roll")
            if tallier is not None and tallier >= 0 and tallier >= self.setup.n_t:
                raise NotAuthorized(f"tallier {tallier} is not on the roll")
            if self.setup.key_of(appender) is None:
                raise NotAuthorized(f"{appender} is not on the roll")

    def _verify_signature(self, appender: str, payload: Payload, signature: Signature):
        if isinstance(payload, ParamsRecord):
            pk = payload.ec_key
        elif self.setup is None:
            raise WrongPhase("no setup record on the board yet")
        else:
            pk = self.setup.key_of(appender)
        if not verify_sig(self.params, pk, entry_message(self.params, appender, payload), signature):
            raise BadSignature(f"signature of {appender} on {payload.kind.value} does not verify")

    def _check_state(self, payload: Payload, tick: int):
        kind = payload.kind
        if kind is EntryKind.PARAMS:
            if self.setup is not None:
                raise DuplicateEntry("setup record already present")
            if payload.params_digest != self.params.digest():
                raise NotAuthorized("setup record does not match the board params")
            return
        if kind is EntryKind.PHASE:
            if payload.phase.order <= self.phase.order:
                raise WrongPhase(f"cannot move from {self.phase.value} to {payload.phase.value}")
            if payload.tick != tick:
                raise TickError(f"phase marker for tick {payload.tick} appended at tick {tick}")
            return

        voter = getattr(payload, "voter", None)
        cast_round = self.cast.get(voter)
        if kind in (EntryKind.BLINDED_COMMITMENT, EntryKind.AUDIT_DISCARD, EntryKind.CAST_FINAL):
            if cast_round is not None:
                raise DuplicateVote(f"voter {voter} already cast in round {cast_round}")
            round_talliers = self.rounds.get(voter, {}).get(payload.round, set())
            closed = payload.round in self.closed.get(voter, set())

        if kind is EntryKind.BLINDED_COMMITMENT:
            if payload.round < 1 or payload.round < self.latest_round(voter):
                raise DuplicateEntry(f"round {payload.round} of voter {voter} is stale")
            if closed or payload.tallier in round_talliers:
                raise DuplicateEntry(f"round {payload.round} of voter {voter} already has this commitment")
        elif kind is EntryKind.AUDIT_DISCARD:
            if not round_talliers or (payload.tallier >= 0 and payload.tallier not in round_talliers):
                raise UnknownReference(f"no blinded commitment for voter {voter} round {payload.round}")
            if (voter, payload.tallier, payload.round) in self.discards:
                raise DuplicateEntry(f"round {payload.round} of voter {voter} already discarded")
        elif kind is EntryKind.CAST_FINAL:
            if closed or len(round_talliers) != self.setup.n_t:
                raise UnknownReference(f"round {payload.round} of voter {voter} is not complete and open")
        elif kind in (EntryKind.OPENING_DISPUTE, EntryKind.VOTE_VALIDITY, EntryKind.POIO_NIZK):
            if cast_round is None or cast_round != payload.round:
                raise UnknownReference(f"voter {voter} did not cast round {payload.round}")
            if kind is EntryKind.VOTE_VALIDITY and voter in self.validity:
                raise DuplicateEntry(f"voter {voter} already has a validity record")
        elif kind is EntryKind.RESULT and self.results:
            raise DuplicateEntry("result already published")

    def check(self, appender: str, payload: Payload, signature: Signature, tick: int):
        """
        Raises the BoardError an append of this payload would cause.
        """
        if tick < self.tick:
            raise TickError(f"tick {tick} is before {self.tick}")
        kind = payload.kind
        if kind is not EntryKind.PHASE and kind not in allowed_kinds[self.phase]:
            raise WrongPhase(f"{kind.value} is not allowed in the {self.phase.value} phase")
        self._authorize(appender, payload)
        self._verify_signature(appender, payload, signature)
        self._check_state(payload, tick)

    def apply(self, payload: Payload, tick: int):
        self.tick = tick
        kind = payload.kind
        if kind is EntryKind.PARAMS:
            self.setup = payload
        elif kind is EntryKind.PHASE:
            self.phase = payload.phase
        elif kind is EntryKind.BLINDED_COMMITMENT:
            self.rounds.setdefault(payload.voter, {}).setdefault(payload.round, set()).add(payload.tallier)
        elif kind is EntryKind.AUDIT_DISCARD:
            self.closed.setdefault(payload.voter, set()).add(payload.round)
            self.discards.add((payload.voter, payload.tallier, payload.round))
        elif kind is EntryKind.CAST_FINAL:
            self.cast[payload.voter] = payload.round
        elif kind is EntryKind.VOTE_VALIDITY:
            self.validity.add(payload.voter)
        elif kind is EntryKind.RESULT:
            self.results += 1

    def admit(self, appender: str, payload: Payload, signature: Signature, tick: int):
        self.check(appender, payload, signature, tick)
        self.apply(payload, tick)


class Board:
    """
    Append-only public bulletin board. Appends are serialized by a lock and hash-chained;
    reads return immutable snapshots ordered by sequence number.
    """
    def __init__(self, params: GroupParams, key: KeyPair, schedule: Schedule, config_digest: bytes):
        self.params = params
        self.key = key
        self.schedule = schedule
        self.config_digest = config_digest
        self.rules = BoardRules(params)
        self._entries: List[BoardEntry] = []
        self._head = genesis_hash(params, config_digest)
        self._lock = threading.RLock()
        self.now = 0

    @property
    def phase(self) -> Phase:
        return self.rules.phase

    @property
    def setup(self) -> Optional[ParamsRecord]:
        return self.rules.setup

    def append(self, appender: str, payload: Payload, signature: Signature, now: int) -> int:
        with self._lock:
            if now < self.now:
                raise TickError(f"tick {now} is before {self.now}")
            self.rules.check(appender, payload, signature, now)
            entry = BoardEntry(len(self._entries), now, appender, payload, signature, self._head)
            self._entries.append(entry)
            self._head = entry.digest(self.params)
            self.rules.apply(payload, now)
            self.now = now
            logger.debug("#%d %s by %s at tick %d", entry.seq, payload.kind.value, appender, now)
            return entry.seq

    def _append_own(self, payload: Payload, now: int) -> int:
        signature = sign(self.params, self.key, entry_message(self.params, PBB, payload))
        return self.append(PBB, payload, signature, now)

    def open_sessions(self) -> List[Tuple[int, int]]:
        with self._lock:
            return self.rules.open_sessions()

    def advance(self, now: int, force: bool = False) -> Phase:
        """
        Moves to the phase whose tick interval contains now, appending a phase marker for
        every phase entered. Leaving Voting with open audit sessions raises OpenSessions,
        or force-discards them when force is set.
        """
        with self._lock:
            if now < self.now:
                raise TickError(f"tick {now} is before {self.now}")
            target = phase_at(self.schedule, now)
            phases = list(Phase)
            while self.phase.order < target.order:
                if self.phase is Phase.VOTING:
                    sessions = self.rules.open_sessions()
                    if sessions and not force:
                        raise OpenSessions(f"{len(sessions)} voters have open audit sessions")
                    for voter, round_ in sessions:
                        logger.info("force-discarding round %d of voter %d", round_, voter)
                        self._append_own(AuditDiscard(voter, -1, round_), now)
                next_phase = phases[self.phase.order + 1]
                self._append_own(PhaseMarker(next_phase, now), now)
                logger.info("board entered %s at tick %d", next_phase.value, now)
            self.now = now
            return self.phase

    def read(self, kind=None, voter: Optional[int] = None) -> Tuple[BoardEntry, ...]:
        with self._lock:
            entries = tuple(self._entries)
        return select(entries, kind, voter)

    def __len__(self):
        return len(self._entries)

    def transcript(self) -> Transcript:
        with self._lock:
            return Transcript(self.params, self.config_digest, tuple(self._entries), self._head)

    def persist(self, path: Union[str, Path]):
        Path(path).write_text(self.transcript().dumps(), encoding="ascii")


def accepted_ballots(entries) -> Dict[int, int]:
    """
    Voters whose cast ballot was accepted, mapped to their cast round.
    """
    cast = {e.payload.voter: e.payload.round for e in select(entries, EntryKind.CAST_FINAL)}
    return {e.payload.voter: cast[e.payload.voter] for e in select(entries, EntryKind.VOTE_VALIDITY)
            if e.payload.accepted and cast.get(e.payload.voter) == e.payload.round}


def blinded_product(params: GroupParams, entries, tallier: int, accepted: Dict[int, int]):
    """
    c~_bot^(j): product of tallier j's published blinded commitments over the accepted cast ballots.
    """
    return params.prod(e.payload.blinded for e in select(entries, EntryKind.BLINDED_COMMITMENT)
                       if e.payload.tallier == tallier and accepted.get(e.payload.voter) == e.payload.round)
