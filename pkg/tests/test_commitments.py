import pytest
from pyace.commitments import (BallotSecrets, add_vectors, comm_vec, derand, forge_rerand_witness, is_one_hot,
                               one_hot, rerand, share_vote)
from pyace.errors import TrapdoorError
from pyace.groups import Backend, derive_params
from pyace.randomness import RandomSource


def test_comm_vec_hand_values(tiny):
    assert comm_vec(tiny, (1, 0), 5) == 6
    assert comm_vec(tiny, (0, 0), 0) == 1


def test_comm_vec_dimension_mismatch(tiny):
    with pytest.raises(ValueError):
        comm_vec(tiny, (1, 0, 0), 5)


def test_rerand_and_derand_hand_values(tiny):
    assert rerand(tiny, 6, 3) == 1
    assert rerand(tiny, 6, 0) == 6
    assert derand(tiny, 1, 3) == 6


@pytest.mark.parametrize("trials", [50, pytest.param(1000, marks=pytest.mark.slow)])
@pytest.mark.parametrize("backend", [Backend.TINY_TEST, Backend.PRODUCTION])
def test_commitment_algebra(backend, trials):
    params = derive_params(backend, 3)
    rng = RandomSource(11)
    q = params.q
    for _ in range(trials):
        v1 = tuple(rng.scalar(q) for _ in range(3))
        v2 = tuple(rng.scalar(q) for _ in range(3))
        r1, r2, blind = rng.scalar(q), rng.scalar(q), rng.scalar(q)
        c1 = comm_vec(params, v1, r1)
        assert params.mul(c1, comm_vec(params, v2, r2)) == comm_vec(params, add_vectors(q, v1, v2), (r1 + r2) % q)
        assert derand(params, rerand(params, c1, blind), blind) == c1
        assert rerand(params, c1, blind) == comm_vec(params, v1, (r1 + blind) % q)


def test_one_hot_helpers():
    assert one_hot(3, 1) == (0, 1, 0)
    assert is_one_hot((0, 0, 1))
    assert not is_one_hot((1, 1, 0))
    assert not is_one_hot((0, 0, 0))
    with pytest.raises(ValueError):
        one_hot(2, 2)


def test_share_vote_degenerate_split(tiny, rng):
    secrets = share_vote(tiny, (1, 0), 1, rng)
    assert secrets.shares == ((1, 0),)


def test_hand_shares_reconstruct(tiny):
    secrets = BallotSecrets((1, 0), ((5, 7), (7, 4)), (1, 2))
    assert add_vectors(tiny.q, *secrets.shares) == (1, 0)


@pytest.mark.parametrize("backend", [Backend.TINY_TEST, Backend.PRODUCTION])
def test_shares_always_reconstruct(backend):
    params = derive_params(backend, 4)
    rng = RandomSource(3)
    for n_t in (1, 2, 5):
        for choice in range(4):
            secrets = share_vote(params, one_hot(4, choice), n_t, rng)
            assert secrets.n_t == n_t
            assert add_vectors(params.q, *secrets.shares) == one_hot(4, choice)
            assert params.prod(secrets.commitments(params)) == comm_vec(params, secrets.vote,
                                                                         secrets.total_randomness % params.q)


def test_share_vote_rejects_bad_input(tiny, rng):
    with pytest.raises(ValueError):
        share_vote(tiny, (1, 1), 2, rng)
    with pytest.raises(ValueError):
        share_vote(tiny, (1, 0), 0, rng)


### Receipt forgery with the tiny trapdoor

def test_forge_hand_example(tiny):
    assert rerand(tiny, comm_vec(tiny, (1, 0), 5), 3) == 1
    rtilde = forge_rerand_witness(tiny, 1, (0, 1), 1, ((1, 0), 5, 3))
    assert rtilde == 8
    assert rerand(tiny, comm_vec(tiny, (0, 1), 1), rtilde) == 1


def test_forge_with_real_opening_returns_real_blinding(tiny):
    assert forge_rerand_witness(tiny, 1, (1, 0), 5, ((1, 0), 5, 3)) == 3


def test_every_fake_opening_verifies(tiny3):
    rng = RandomSource(5)
    q = tiny3.q
    real = (tuple(rng.scalar(q) for _ in range(3)), rng.scalar(q), rng.scalar(q))
    blinded = rerand(tiny3, comm_vec(tiny3, real[0], real[1]), real[2])
    for _ in range(1000):
        fake = tuple(rng.scalar(q) for _ in range(3))
        fake_r = rng.scalar(q)
        rtilde = forge_rerand_witness(tiny3, blinded, fake, fake_r, real)
        assert rerand(tiny3, comm_vec(tiny3, fake, fake_r), rtilde) == blinded


def test_forge_needs_trapdoor(prod):
    with pytest.raises(TrapdoorError):
        forge_rerand_witness(prod, prod.h, (0, 1), 1, ((1, 0), 5, 3))


def test_forge_checks_real_opening(tiny):
    with pytest.raises(ValueError):
        forge_rerand_witness(tiny, 1, (0, 1), 1, ((1, 0), 5, 4))
