import logging
from dataclasses import replace
from enum import Enum
from typing import Tuple
from pyace.board import Transcript
from pyace.entries import (PBB, TDES, BlindedCommitment, CastFinal, PoIONizkRecord, ResultRecord, VoteValidity,
                           tallier_party, voter_party)
from pyace.judge import Verdict, judge_verify

logger = logging.getLogger(__name__)


class Mutation(Enum):
    FLIP_WINNER = "flip_winner"
    ALTER_BLINDED_COMMITMENT = "alter_blinded_commitment"
    DROP_VALIDITY_SIGNATURE = "drop_validity_signature"
    DUPLICATE_CAST = "duplicate_cast"
    SWAP_RTILDE_TOTAL = "swap_rtilde_total"
    CORRUPT_PROOF_VOTE = "corrupt_proof_vote"
    CORRUPT_PROOF_RESULT = "corrupt_proof_result"
    BREAK_HASH_CHAIN = "break_hash_chain"


def _first(transcript: Transcript, kind):
    entries = transcript.read(kind)
    if not entries:
        raise ValueError(f"transcript has no {kind.kind.value} entry to mutate")
    return entries[0]


def _replaced(transcript: Transcript, index: int, payload) -> Transcript:
    entries = list(transcript.entries)
    entries[index] = replace(entries[index], payload=payload)
    return transcript.resealed(entries)


def flip_winner(transcript: Transcript):
    entry = _first(transcript, ResultRecord)
    winner = (entry.payload.winner + 1) % transcript.params.n_choices
    return _replaced(transcript, entry.seq, replace(entry.payload, winner=winner)), ("signature", TDES)


def alter_blinded_commitment(transcript: Transcript):
    params = transcript.params
    entry = _first(transcript, BlindedCommitment)
    payload = replace(entry.payload, blinded=params.mul(entry.payload.blinded, params.h))
    return _replaced(transcript, entry.seq, payload), ("signature", tallier_party(entry.payload.tallier))


def drop_validity_signature(transcript: Transcript):
    # the validity signatures are outside the appender's signed bytes
    entry = _first(transcript, VoteValidity)
    dropped, _ = entry.payload.signatures[-1]
    payload = replace(entry.payload, signatures=entry.payload.signatures[:-1])
    return _replaced(transcript, entry.seq, payload), ("validity", tallier_party(dropped))


def duplicate_cast(transcript: Transcript):
    entry = _first(transcript, CastFinal)
    entries = list(transcript.entries)
    entries.insert(entry.seq + 1, entry)
    return transcript.resealed(entries), ("double-vote", voter_party(entry.payload.voter))


def swap_rtilde_total(transcript: Transcript):
    entry = _first(transcript, ResultRecord)
    rtilde = (entry.payload.rtilde_total + 1) % transcript.params.q
    return _replaced(transcript, entry.seq, replace(entry.payload, rtilde_total=rtilde)), ("signature", TDES)


def corrupt_proof_vote(transcript: Transcript):
    q = transcript.params.q
    entry = _first(transcript, PoIONizkRecord)
    proof = entry.payload.proof
    sum_proof = replace(proof.sum_proof, response=(proof.sum_proof.response + 1) % q)
    payload = replace(entry.payload, proof=replace(proof, sum_proof=sum_proof))
    return _replaced(transcript, entry.seq, payload), ("signature", entry.appender)


def corrupt_proof_result(transcript: Transcript):
    q = transcript.params.q
    entry = _first(transcript, ResultRecord)
    proof = entry.payload.proof
    link = replace(proof.link_proof, randomness_response=(proof.link_proof.randomness_response + 1) % q)
    payload = replace(entry.payload, proof=replace(proof, link_proof=link))
    return _replaced(transcript, entry.seq, payload), ("signature", TDES)


def break_hash_chain(transcript: Transcript):
    if len(transcript.entries) < 2:
        raise ValueError("transcript too short to break its chain")
    index = len(transcript.entries) // 2
    entries = list(transcript.entries)
    entries[index] = replace(entries[index], prev_hash=bytes(len(entries[index].prev_hash)))
    return replace(transcript, entries=tuple(entries)), ("integrity", PBB)


mutations = {
    Mutation.FLIP_WINNER: flip_winner,
    Mutation.ALTER_BLINDED_COMMITMENT: alter_blinded_commitment,
    Mutation.DROP_VALIDITY_SIGNATURE: drop_validity_signature,
    Mutation.DUPLICATE_CAST: duplicate_cast,
    Mutation.SWAP_RTILDE_TOTAL: swap_rtilde_total,
    Mutation.CORRUPT_PROOF_VOTE: corrupt_proof_vote,
    Mutation.CORRUPT_PROOF_RESULT: corrupt_proof_result,
    Mutation.BREAK_HASH_CHAIN: break_hash_chain,
}


def mutate(transcript: Transcript, mutation) -> Tuple[Transcript, Tuple[str, str]]:
    """
    Applies one tamper and returns the mutated transcript with the (rule, blamed party)
    the judge must report for it. Every mutation but break_hash_chain re-seals the chain.
    """
    try:
        mutation = Mutation(mutation)
    except ValueError:
        raise ValueError(f"unknown mutation {mutation!r}, choose from {', '.join(m.value for m in Mutation)}")
    return mutations[mutation](transcript)


def mutate_and_judge(transcript: Transcript, mutation) -> Tuple[Verdict, Tuple[str, str]]:
    mutated, expected = mutate(transcript, mutation)
    verdict = judge_verify(mutated)
    if verdict.accepted or (verdict.rule, verdict.blamed) != expected:
        logger.warning("mutation %s: judge said %s, expected %s", Mutation(mutation).value, verdict, expected)
    return verdict, expected
