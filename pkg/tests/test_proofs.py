from dataclasses import replace
import pytest
from pyace.commitments import BallotSecrets, comm_vec, commit_scalar, share_vote
from pyace.errors import EncodingError, StatementError
from pyace.groups import Backend, derive_params
from pyace.proofs import (BitProof, ProofResult, ProofVote, Relation, lowest_argmax, nizk_setup, prove_bit,
                          prove_range, prove_result, prove_vote, range_bits, verify_bit, verify_range,
                          verify_result, verify_vote)
from pyace.randomness import RandomSource

ELECTION = "test-election"


@pytest.fixture(scope="module")
def prod3():
    return derive_params(Backend.PRODUCTION, 3)


def _vote_statement(params, vote, n_t, seed=1):
    rng = RandomSource(seed)
    ctx, _ = nizk_setup(params, Relation.VOTE)
    secrets = share_vote(params, vote, n_t, rng)
    commitments = secrets.commitments(params)
    proof = prove_vote(ctx, secrets, commitments, "V0", ELECTION, rng)
    return ctx, params.prod(commitments), proof


def test_setup_is_deterministic(tiny):
    assert nizk_setup(tiny, Relation.VOTE) == nizk_setup(tiny, Relation.VOTE)
    assert nizk_setup(tiny, Relation.VOTE)[0] != nizk_setup(tiny, Relation.RESULT)[0]


def test_range_bits():
    assert range_bits(0) == 1
    assert range_bits(1) == 1
    assert range_bits(3) == 2
    assert range_bits(7) == 3
    assert range_bits(8) == 4


### Bit and range proofs

def test_bit_proof_completeness(tiny):
    ctx, _ = nizk_setup(tiny, Relation.VOTE)
    rng = RandomSource(2)
    for value in (0, 1):
        for s in range(tiny.q):
            c = commit_scalar(tiny, value, s)
            assert verify_bit(ctx, c, prove_bit(ctx, c, value, s, rng))


def test_bit_proof_refuses_non_bits(tiny):
    ctx, _ = nizk_setup(tiny, Relation.VOTE)
    with pytest.raises(StatementError):
        prove_bit(ctx, commit_scalar(tiny, 2, 4), 2, 4, RandomSource(0))


def test_swapped_branches_rejected(prod):
    ctx, _ = nizk_setup(prod, Relation.VOTE)
    c = commit_scalar(prod, 0, 12345)
    proof = prove_bit(ctx, c, 0, 12345, RandomSource(3))
    swapped = BitProof(proof.a1, proof.a0, proof.e1, proof.e0, proof.z1, proof.z0)
    assert verify_bit(ctx, c, proof)
    assert not verify_bit(ctx, c, swapped)


def test_range_proof_five_of_seven(tiny):
    ctx, _ = nizk_setup(tiny, Relation.RESULT)
    c = commit_scalar(tiny, 5, 4)
    proof = prove_range(ctx, c, 5, 4, 7, RandomSource(4))
    assert len(proof.bit_commitments) == 3
    assert len(proof.bit_proofs) == 3
    assert verify_range(ctx, c, proof, 7)


def test_range_proof_refuses_out_of_range(tiny):
    ctx, _ = nizk_setup(tiny, Relation.RESULT)
    with pytest.raises(StatementError):
        prove_range(ctx, commit_scalar(tiny, 8, 1), 8, 1, 7, RandomSource(0))


def test_tampered_range_proof_rejected(prod):
    ctx, _ = nizk_setup(prod, Relation.RESULT)
    c = commit_scalar(prod, 5, 99)
    proof = prove_range(ctx, c, 5, 99, 7, RandomSource(5))
    bit = proof.bit_proofs[1]
    tampered = replace(proof, bit_proofs=(proof.bit_proofs[0], replace(bit, z0=(bit.z0 + 1) % prod.q),
                                          proof.bit_proofs[2]))
    assert verify_range(ctx, c, proof, 7)
    assert not verify_range(ctx, c, tampered, 7)
    assert not verify_range(ctx, c, proof, 15)


### Ballot proofs

@pytest.mark.parametrize("n_t", [1, 3])
def test_vote_proof_completeness(tiny3, n_t):
    for choice in range(3):
        vote = tuple(1 if k == choice else 0 for k in range(3))
        ctx, c, proof = _vote_statement(tiny3, vote, n_t, seed=choice)
        assert verify_vote(ctx, c, proof, "V0", ELECTION)


def test_vote_proof_refuses_false_statement(tiny):
    ctx, _ = nizk_setup(tiny, Relation.VOTE)
    secrets = BallotSecrets((1, 1), ((1, 1),), (3,))
    with pytest.raises(StatementError, match="statement false"):
        prove_vote(ctx, secrets, secrets.commitments(tiny), "V0", ELECTION, RandomSource(0))


def test_vote_proof_refuses_foreign_commitments(tiny):
    ctx, _ = nizk_setup(tiny, Relation.VOTE)
    secrets = share_vote(tiny, (0, 1), 2, RandomSource(1))
    with pytest.raises(StatementError):
        prove_vote(ctx, secrets, (1, 1), "V0", ELECTION, RandomSource(0))


def test_vote_proof_mutations_rejected(prod):
    ctx, c, proof = _vote_statement(prod, (0, 1), 2)
    h, q = prod.h, prod.q
    bump = lambda x: prod.mul(x, h)
    link = proof.link_proof
    mutants = [
        replace(proof, aux_commitments=(bump(proof.aux_commitments[0]),) + proof.aux_commitments[1:]),
        replace(proof, aux_commitments=proof.aux_commitments[:1] + (bump(proof.aux_commitments[1]),)),
        replace(proof, bit_proofs=(replace(proof.bit_proofs[0], a0=bump(proof.bit_proofs[0].a0)),)
                + proof.bit_proofs[1:]),
        replace(proof, bit_proofs=proof.bit_proofs[:1]
                + (replace(proof.bit_proofs[1], a1=bump(proof.bit_proofs[1].a1)),)),
        replace(proof, sum_proof=replace(proof.sum_proof, commitment=bump(proof.sum_proof.commitment))),
        replace(proof, sum_proof=replace(proof.sum_proof, response=(proof.sum_proof.response + 1) % q)),
        replace(proof, link_proof=replace(link, vector_commitment=bump(link.vector_commitment))),
        replace(proof, link_proof=replace(link, coordinate_commitments=(bump(link.coordinate_commitments[0]),)
                                          + link.coordinate_commitments[1:])),
        replace(proof, link_proof=replace(link, randomness_response=(link.randomness_response + 1) % q)),
    ]
    assert verify_vote(ctx, c, proof, "V0", ELECTION)
    for mutant in mutants:
        assert not verify_vote(ctx, c, mutant, "V0", ELECTION)


def test_vote_proof_bound_to_statement(prod):
    ctx, c, proof = _vote_statement(prod, (1, 0), 2)
    assert not verify_vote(ctx, prod.mul(c, prod.h), proof, "V0", ELECTION)
    assert not verify_vote(ctx, c, proof, "V1", ELECTION)
    assert not verify_vote(ctx, c, proof, "V0", "other-election")
    result_ctx, _ = nizk_setup(prod, Relation.RESULT)
    assert not verify_vote(result_ctx, c, proof, "V0", ELECTION)


def test_vote_proof_bound_to_params(prod):
    ctx, c, proof = _vote_statement(prod, (1, 0), 2)
    other, _ = nizk_setup(derive_params(Backend.PRODUCTION, 2, b"other-tag"), Relation.VOTE)
    assert not verify_vote(other, c, proof, "V0", ELECTION)


def test_garbage_vote_proof_rejected(prod):
    ctx, c, _ = _vote_statement(prod, (1, 0), 2)
    assert not verify_vote(ctx, c, ProofVote.garbage(prod, RandomSource(9)), "V0", ELECTION)


def test_vote_proof_bytes(tiny):
    ctx, c, proof = _vote_statement(tiny, (1, 0), 2)
    data = proof.to_bytes(tiny)
    assert ProofVote.from_bytes(tiny, data) == proof
    with pytest.raises(EncodingError):
        ProofVote.from_bytes(tiny, b"\x09" + data[1:])
    with pytest.raises(EncodingError):
        ProofVote.from_bytes(tiny, data + b"\x00")


def _shift(values, index, delta, q):
    return values[:index] + ((values[index] + delta) % q,) + values[index + 1:]


def _mutate_response(proof, rng, q):
    """
    The proof with one response scalar moved by a random nonzero amount.
    """
    delta = 1 + rng.scalar(q - 1)
    link = proof.link_proof
    b = rng.choice(len(proof.bit_proofs))
    k = rng.choice(len(link.coordinate_responses))
    field = rng.choice(8)
    if field < 4:
        name = ("e0", "e1", "z0", "z1")[field]
        bit = proof.bit_proofs[b]
        bits = proof.bit_proofs[:b] + (replace(bit, **{name: (getattr(bit, name) + delta) % q}),) + proof.bit_proofs[b + 1:]
        return replace(proof, bit_proofs=bits)
    if field == 4:
        return replace(proof, sum_proof=replace(proof.sum_proof, response=(proof.sum_proof.response + delta) % q))
    if field == 5:
        return replace(proof, link_proof=replace(link, randomness_response=(link.randomness_response + delta) % q))
    if field == 6:
        return replace(proof, link_proof=replace(link, coordinate_responses=_shift(link.coordinate_responses, k,
                                                                                    delta, q)))
    return replace(proof, link_proof=replace(link, blinding_responses=_shift(link.blinding_responses, k, delta, q)))


@pytest.mark.slow
def test_vote_proof_completeness_at_scale(tiny3):
    rng = RandomSource(31)
    for seed in range(10000):
        choice = rng.choice(3)
        vote = tuple(1 if k == choice else 0 for k in range(3))
        ctx, c, proof = _vote_statement(tiny3, vote, 1 + rng.choice(3), seed=seed)
        assert verify_vote(ctx, c, proof, "V0", ELECTION)


@pytest.mark.slow
def test_forged_vote_proofs_rejected_at_scale(prod):
    ctx, c, proof = _vote_statement(prod, (0, 1), 2)
    rng = RandomSource(32)
    for i in range(10000):
        forged = ProofVote.garbage(prod, rng) if i % 2 else _mutate_response(proof, rng, prod.q)
        assert not verify_vote(ctx, c, forged, "V0", ELECTION)


### Result proofs

def _result_statement(params, tally, winner, n_v, seed=0):
    ctx, _ = nizk_setup(params, Relation.RESULT)
    rng = RandomSource(seed)
    opening = rng.scalar(params.q)
    c_bot = comm_vec(params, tally, opening)
    return ctx, c_bot, prove_result(ctx, tally, opening, c_bot, winner, n_v, rng)


def test_lowest_argmax():
    assert lowest_argmax((2, 1, 0)) == 0
    assert lowest_argmax((2, 2)) == 0
    assert lowest_argmax((0, 3, 3)) == 1


def test_result_proof_completeness(tiny3):
    ctx, c_bot, proof = _result_statement(tiny3, (2, 1, 0), 0, 3)
    assert len(proof.range_proofs) == 2
    assert verify_result(ctx, c_bot, 0, proof, 3)


def test_result_proof_tie_goes_to_lowest_index(tiny):
    ctx, c_bot, proof = _result_statement(tiny, (2, 2), 0, 4)
    assert verify_result(ctx, c_bot, 0, proof, 4)
    opening = 3
    with pytest.raises(StatementError):
        prove_result(ctx, (2, 2), opening, comm_vec(tiny, (2, 2), opening), 1, 4, RandomSource(0))


def test_result_proof_refuses_wrong_winner(tiny):
    ctx, _ = nizk_setup(tiny, Relation.RESULT)
    c_bot = comm_vec(tiny, (1, 2), 5)
    with pytest.raises(StatementError):
        prove_result(ctx, (1, 2), 5, c_bot, 0, 3, RandomSource(0))
    with pytest.raises(StatementError):
        prove_result(ctx, (1, 2), 6, c_bot, 1, 3, RandomSource(0))


def test_result_proof_rejections(prod3):
    ctx, c_bot, proof = _result_statement(prod3, (2, 1, 0), 0, 3)
    assert verify_result(ctx, c_bot, 0, proof, 3)
    assert not verify_result(ctx, c_bot, 1, proof, 3)
    assert not verify_result(ctx, c_bot, 0, proof, 8)
    assert not verify_result(ctx, prod3.mul(c_bot, prod3.h), 0, proof, 3)

    first = proof.range_proofs[0]
    bits = (prod3.mul(first.bit_commitments[0], prod3.g),) + first.bit_commitments[1:]
    tampered = replace(proof, range_proofs=(replace(first, bit_commitments=bits),) + proof.range_proofs[1:])
    assert not verify_result(ctx, c_bot, 0, tampered, 3)
    assert not verify_result(ctx, c_bot, 0, ProofResult.garbage(prod3, 3, RandomSource(1)), 3)


def test_result_proof_bytes(tiny3):
    ctx, c_bot, proof = _result_statement(tiny3, (0, 2, 1), 1, 3)
    assert ProofResult.from_bytes(tiny3, proof.to_bytes(tiny3)) == proof
