from dataclasses import dataclass
from typing import Sequence, Tuple
from pyace.errors import TrapdoorError
from pyace.groups import Element, GroupParams, Scalar
from pyace.randomness import RandomSource

VoteVector = Tuple[int, ...]
VoteShare = Tuple[int, ...]
Commitment = Element


def one_hot(n_choices: int, index: int) -> VoteVector:
    if not 0 <= index < n_choices:
        raise ValueError(f"choice {index} outside 0..{n_choices - 1}")
    return tuple(1 if k == index else 0 for k in range(n_choices))


def is_one_hot(vote: Sequence[int]) -> bool:
    return all(v in (0, 1) for v in vote) and sum(vote) == 1


def add_vectors(q: int, *vectors: Sequence[int]) -> Tuple[int, ...]:
    return tuple(sum(column) % q for column in zip(*vectors))


def sub_vectors(q: int, a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
    return tuple((x - y) % q for x, y in zip(a, b))


def comm_vec(params: GroupParams, v: Sequence[int], r: Scalar) -> Commitment:
    """
    Pedersen vector commitment h^r * prod_k g_k^v[k].
    """
    if len(v) != params.n_choices:
        raise ValueError(f"vector has {len(v)} coordinates, params expect {params.n_choices}")
    c = params.exp(params.h, r)
    for g_k, v_k in zip(params.g_vec, v):
        if v_k % params.q:
            c = params.mul(c, params.exp(g_k, v_k))
    return c


def commit_scalar(params: GroupParams, value: int, r: Scalar) -> Commitment:
    """
    Scalar Pedersen commitment g^value * h^r on the auxiliary base.
    """
    return params.mul(params.exp(params.g, value), params.exp(params.h, r))


def rerand(params: GroupParams, c: Commitment, r_blind: Scalar) -> Commitment:
    return params.mul(c, params.exp(params.h, r_blind))


def derand(params: GroupParams, c_blinded: Commitment, r_blind: Scalar) -> Commitment:
    return params.mul(c_blinded, params.exp(params.h, -r_blind))


@dataclass(frozen=True)
class BallotSecrets:
    """
    One round of a voter's ballot: the vote, its full-threshold shares and the
    commitment randomness r^(j) of every share.
    """
    vote: VoteVector
    shares: Tuple[VoteShare, ...]
    randomness: Tuple[Scalar, ...]

    @property
    def n_t(self) -> int:
        return len(self.shares)

    @property
    def total_randomness(self) -> int:
        return sum(self.randomness)

    def commitments(self, params: GroupParams) -> Tuple[Commitment, ...]:
        return tuple(comm_vec(params, s, r) for s, r in zip(self.shares, self.randomness))


def share_vote(params: GroupParams, v: Sequence[int], n_t: int, rng: RandomSource) -> BallotSecrets:
    """
    Split a vote into n_t additive shares mod q: n_t - 1 uniform shares and a last
    share fixing the sum. Every share gets fresh commitment randomness.
    """
    if n_t < 1:
        raise ValueError("need at least one tallier")
    if len(v) != params.n_choices or not is_one_hot(v):
        raise ValueError(f"invalid vote vector {tuple(v)}")
    q = params.q
    shares = [tuple(rng.scalar(q) for _ in v) for _ in range(n_t - 1)]
    shares.append(sub_vectors(q, v, add_vectors(q, tuple(0 for _ in v), *shares)))
    randomness = tuple(rng.scalar(q) for _ in range(n_t))
    return BallotSecrets(tuple(v), tuple(shares), randomness)


def forge_rerand_witness(params: GroupParams, c_blinded: Commitment, fake_vote_share: Sequence[int],
                         fake_r: Scalar, real_opening: Tuple[Sequence[int], Scalar, Scalar]) -> Scalar:
    """
    Blinding factor r~' that makes c_blinded a re-randomization of CommVec(fake, fake_r).
    With lambda_k = log_h(g_k):  r~' = (r + r~ - r') + sum_k (v[k] - v'[k]) * lambda_k  (mod q).
    """
    if params.trapdoor is None:
        raise TrapdoorError("forging a blinding factor needs the tiny_test trapdoor")
    real_share, real_r, real_rtilde = real_opening
    if rerand(params, comm_vec(params, real_share, real_r), real_rtilde) != c_blinded:
        raise ValueError("real opening does not open the blinded commitment")
    lambdas = params.trapdoor[:params.n_choices]
    shift = sum((v - v_fake) * lam for v, v_fake, lam in zip(real_share, fake_vote_share, lambdas))
    return (real_r + real_rtilde - fake_r + shift) % params.q
