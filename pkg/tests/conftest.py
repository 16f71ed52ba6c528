import pytest
from pyace import params as defaults
from pyace.board import Board, schedule_to_record
from pyace.config import AdversaryConfig, ElectionConfig, scenario
from pyace.entries import EC, TDES, BlindedCommitment, ParamsRecord, entry_message, tallier_party
from pyace.groups import Backend, derive_params
from pyace.harness import Election
from pyace.randomness import RandomSource
from pyace.signatures import KeyPair, sign
from pyace.voter import AuditStrategy


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: statistical and full-size acceptance runs")


@pytest.fixture
def tiny():
    return derive_params(Backend.TINY_TEST, 2)


@pytest.fixture
def tiny3():
    return derive_params(Backend.TINY_TEST, 3)


@pytest.fixture(scope="session")
def prod():
    return derive_params(Backend.PRODUCTION, 2)


@pytest.fixture
def rng():
    return RandomSource(7)


@pytest.fixture(scope="session")
def make_config():
    def make(backend=Backend.TINY_TEST, n_v=4, n_t=2, n_choices=2, k=2, seed=1, **kwargs):
        return ElectionConfig(n_v=n_v, n_t=n_t, n_choices=n_choices, backend=backend,
                              audit=AuditStrategy.fixed(k), seed=seed, **kwargs)
    return make


@pytest.fixture(scope="session")
def run():
    """
    Runs an election and returns (election, transcript, metrics); adversary may be a
    scenario name.
    """
    def run_(config, adversary=None):
        if isinstance(adversary, str):
            adversary = scenario(adversary, config)
        election = Election(config, adversary or AdversaryConfig())
        transcript, metrics = election.run()
        return election, transcript, metrics
    return run_


@pytest.fixture(scope="session")
def honest_tiny(make_config, run):
    return run(make_config())


@pytest.fixture(scope="session")
def honest_prod(make_config, run):
    return run(make_config(Backend.PRODUCTION, n_v=3))


@pytest.fixture(scope="session")
def invalid_vote_prod(make_config, run):
    config = make_config(Backend.PRODUCTION, n_v=3)
    return run(config, "invalid-vote")


class HandBoard:
    """
    A board with every party's keys, for driving appends by hand.
    """
    n_v, n_t = 4, 2
    config_digest = bytes(32)

    def __init__(self, params):
        rng = RandomSource(21)
        self.params = params
        self.ec, self.pbb, self.tdes = (KeyPair.generate(params, rng) for _ in range(3))
        self.voters = [KeyPair.generate(params, rng) for _ in range(self.n_v)]
        self.talliers = [KeyPair.generate(params, rng) for _ in range(self.n_t)]
        self.schedule = dict(defaults.phase_ticks)
        self.board = Board(params, self.pbb, self.schedule, self.config_digest)
        self.record = ParamsRecord(defaults.election_id, params.backend.value, params.n_choices, params.domain_tag,
                                   params.digest(), self.config_digest, tuple(kp.pk for kp in self.voters),
                                   tuple(kp.pk for kp in self.talliers), self.tdes.pk, self.pbb.pk, self.ec.pk,
                                   schedule_to_record(self.schedule), defaults.audit_timeout)

    def key(self, party):
        if party == EC: return self.ec
        if party == TDES: return self.tdes
        keys = self.voters if party[0] == "V" else self.talliers
        return keys[int(party[1:])]

    def sign(self, party, message):
        return sign(self.params, self.key(party), message)

    def post(self, party, payload, now, key=None):
        signature = sign(self.params, key or self.key(party), entry_message(self.params, party, payload))
        return self.board.append(party, payload, signature, now)

    def start(self):
        self.post(EC, self.record, 0)
        self.board.advance(1)
        return self

    def commit(self, voter, round_, now=1, talliers=None, blinded=None):
        for j in range(self.n_t) if talliers is None else talliers:
            self.post(tallier_party(j), BlindedCommitment(voter, j, round_, blinded or self.params.h), now)


@pytest.fixture
def hand_board():
    """
    HandBoard factory; started boards have the setup record posted and are in Voting.
    """
    def make(params, started=True):
        board = HandBoard(params)
        return board.start() if started else board
    return make
