import pytest
from pyace import params as defaults
from pyace.board import BoardRules, Transcript, accepted_ballots, blinded_product, load, phase_at
from pyace.entries import (PBB, TDES, AuditDiscard, BlindedCommitment, CastFinal, EntryKind, Phase, ResultRecord,
                           tallier_party, voter_party)
from pyace.errors import (BadSignature, DuplicateEntry, DuplicateVote, IntegrityError, NotAuthorized, OpenSessions,
                          TickError, UnknownReference, WrongPhase)
from pyace.proofs import ProofResult
from pyace.randomness import RandomSource

N_V, N_T = 4, 2


@pytest.fixture
def setup(tiny, hand_board):
    return hand_board(tiny)


def test_empty_board(tiny, hand_board):
    board = hand_board(tiny, started=False).board
    assert board.read() == ()
    assert board.phase is Phase.SETUP
    assert len(board) == 0


def test_phase_at_boundaries():
    schedule = dict(defaults.phase_ticks)
    assert phase_at(schedule, 0) is Phase.SETUP
    assert phase_at(schedule, 99) is Phase.VOTING
    assert phase_at(schedule, 100) is Phase.TALLY
    assert phase_at(schedule, 10 ** 6) is Phase.VERIFICATION


def test_advance_follows_schedule(setup):
    assert setup.board.advance(99) is Phase.VOTING
    assert setup.board.advance(100) is Phase.TALLY
    markers = setup.board.read(EntryKind.PHASE)
    assert [m.payload.phase for m in markers] == [Phase.VOTING, Phase.TALLY]
    assert all(m.appender == PBB for m in markers)


def test_advance_backwards(setup):
    setup.board.advance(60)
    with pytest.raises(TickError):
        setup.board.advance(50)


def test_read_filters(setup):
    setup.commit(1, 1)
    setup.commit(3, 1)
    assert len(setup.board.read(BlindedCommitment, voter=1)) == N_T
    assert len(setup.board.read(EntryKind.BLINDED_COMMITMENT)) == 2 * N_T
    assert setup.board.read(CastFinal) == ()


def test_double_cast(setup):
    setup.commit(3, 1)
    setup.post(voter_party(3), CastFinal(3, 1), 2)
    with pytest.raises(DuplicateVote):
        setup.post(voter_party(3), CastFinal(3, 1), 3)
    with pytest.raises(DuplicateVote):
        setup.commit(3, 2, now=3)


def test_cast_needs_complete_round(setup):
    setup.commit(2, 1, talliers=[0])
    with pytest.raises(UnknownReference):
        setup.post(voter_party(2), CastFinal(2, 1), 2)


def test_audited_round_is_closed(setup):
    setup.commit(0, 1)
    for j in range(N_T):
        setup.post(tallier_party(j), AuditDiscard(0, j, 1), 2)
    with pytest.raises(UnknownReference):
        setup.post(voter_party(0), CastFinal(0, 1), 3)
    with pytest.raises(DuplicateEntry):
        setup.post(tallier_party(0), AuditDiscard(0, 0, 1), 3)
    setup.commit(0, 2, now=3)
    setup.post(voter_party(0), CastFinal(0, 2), 4)
    assert [e.kind for e in setup.board.read(voter=0)] == [EntryKind.BLINDED_COMMITMENT] * 2 \
        + [EntryKind.AUDIT_DISCARD] * 2 + [EntryKind.BLINDED_COMMITMENT] * 2 + [EntryKind.CAST_FINAL]


def test_stale_round_rejected(setup):
    setup.commit(1, 2)
    with pytest.raises(DuplicateEntry):
        setup.commit(1, 1, now=2)


def test_result_during_voting(setup):
    result = ResultRecord(0, 0, ProofResult.garbage(setup.params, N_V, RandomSource(1)))
    with pytest.raises(WrongPhase):
        setup.post(TDES, result, 2)


def test_unauthorized_appender(setup):
    with pytest.raises(NotAuthorized):
        setup.post(tallier_party(1), BlindedCommitment(0, 0, 1, setup.params.h), 1)
    with pytest.raises(NotAuthorized):
        setup.post(voter_party(0), CastFinal(1, 1), 1)
    with pytest.raises(NotAuthorized):
        setup.post(tallier_party(0), BlindedCommitment(N_V, 0, 1, setup.params.h), 1)


def test_bad_signature(prod, hand_board):
    s = hand_board(prod)
    with pytest.raises(BadSignature):
        s.post(tallier_party(0), BlindedCommitment(0, 0, 1, prod.h), 1, key=s.talliers[1])
    assert len(s.board) == 2


def test_tick_cannot_go_back(setup):
    setup.commit(0, 1, now=5)
    with pytest.raises(TickError):
        setup.commit(1, 1, now=4)


def test_open_sessions_block_tally(setup):
    setup.commit(1, 1)
    setup.commit(2, 1)
    setup.post(voter_party(2), CastFinal(2, 1), 2)
    assert setup.board.open_sessions() == [(1, 1)]
    with pytest.raises(OpenSessions):
        setup.board.advance(100)
    assert setup.board.phase is Phase.VOTING
    assert setup.board.advance(100, force=True) is Phase.TALLY
    discard = setup.board.read(AuditDiscard)[0]
    assert discard.appender == PBB
    assert (discard.payload.voter, discard.payload.tallier, discard.payload.round) == (1, -1, 1)


def test_replay_matches_board(setup):
    setup.commit(0, 1)
    setup.post(voter_party(0), CastFinal(0, 1), 2)
    setup.board.advance(100)
    rules = BoardRules(setup.params)
    for entry in setup.board.read():
        rules.admit(entry.appender, entry.payload, entry.signature, entry.tick)
    assert rules.cast == {0: 1}
    assert rules.phase is Phase.TALLY


def test_accepted_ballots_and_blinded_product(honest_tiny):
    election, transcript, _ = honest_tiny
    accepted = accepted_ballots(transcript.entries)
    assert sorted(accepted) == list(range(election.config.n_v))
    params = transcript.params
    for j in range(election.config.n_t):
        expected = params.prod(e.payload.blinded for e in transcript.read(BlindedCommitment)
                               if e.payload.tallier == j and accepted[e.payload.voter] == e.payload.round)
        assert blinded_product(params, transcript.entries, j, accepted) == expected


### Persistence

def test_persist_and_load(honest_tiny, tmp_path):
    election, transcript, _ = honest_tiny
    path = tmp_path / "board.ace"
    election.board.persist(path)
    loaded = load(path)
    assert loaded == transcript
    assert loaded.broken_link() is None
    assert loaded.setup == transcript.setup


def test_flipped_byte_detected(honest_tiny):
    _, transcript, _ = honest_tiny
    lines = transcript.dumps().splitlines()
    line = lines[3]
    middle = len(line) // 2
    lines[3] = line[:middle] + ("A" if line[middle] != "A" else "B") + line[middle + 1:]
    with pytest.raises(IntegrityError):
        Transcript.loads("\n".join(lines) + "\n")


def test_truncated_file_detected(honest_tiny):
    _, transcript, _ = honest_tiny
    lines = transcript.dumps().splitlines()
    with pytest.raises(IntegrityError):
        Transcript.loads("\n".join(lines[:-1]) + "\n")
    with pytest.raises(IntegrityError):
        Transcript.loads("")
    with pytest.raises(IntegrityError):
        Transcript.loads("{not json\n")


def test_resealed_chain(honest_tiny):
    _, transcript, _ = honest_tiny
    entries = list(transcript.entries)
    del entries[-1]
    resealed = transcript.resealed(entries)
    assert resealed.broken_link() is None
    assert resealed.head != transcript.head
