import io
import math
import pytest
from pyace import params as defaults
from pyace.entries import CastFinal, PoIORecord
from pyace.errors import ConfigError, TrapdoorError
from pyace.experiments import (ForgeryResult, audit_soundness_experiment, complexity_csv, complexity_probe,
                               corrupt_trapdoor, expected_undetected_rate, forgery_csv, forgery_election,
                               plot_soundness, receipt_forgery_experiment, soundness_csv, soundness_sweep)
from pyace.groups import Backend
from pyace.harness import Election
from pyace.tallier import TallierPolicy


def _close(result, sigmas=4):
    return abs(result.rate - result.expected) <= sigmas * result.sigma


def test_expected_rate():
    assert expected_undetected_rate(1, 0.5) == 0.5
    assert expected_undetected_rate(4, 0.5) == 0.0625
    assert expected_undetected_rate(3, 1.0) == 0.0
    assert expected_undetected_rate(5, 0.0) == 0.0


def test_soundness_matches_expectation():
    result = audit_soundness_experiment(3, 400, seed=3)
    assert result.k == 3
    assert result.trials == 400
    assert result.expected == 0.125
    assert _close(result)
    assert 0.0 <= result.p_value <= 1.0


def test_always_cheating_tallier_is_caught():
    result = audit_soundness_experiment(2, 60, seed=1, cheat_probability=1.0)
    assert result.undetected == 0
    assert result.p_value == 1.0
    assert audit_soundness_experiment(1, 60, seed=1, cheat_probability=1.0).rate == 1.0


def test_honest_tallier_is_never_counted():
    assert audit_soundness_experiment(1, 30, seed=4, cheat_probability=0.0).undetected == 0


def test_soundness_trial_runs_the_actors(monkeypatch):
    elections = []
    init = Election.__init__

    def spy(self, *args, **kwargs):
        init(self, *args, **kwargs)
        elections.append(self)

    monkeypatch.setattr(Election, "__init__", spy)
    assert audit_soundness_experiment(1, 3, seed=6, cheat_probability=1.0).undetected == 3
    assert len(elections) == 3
    for election in elections:
        cheater = election.talliers[1]
        assert cheater.policy is TallierPolicy.ALWAYS_SWAP_COMMITMENT
        assert cheater.records[0].swapped
        assert election.voters[0].cast_round == 1
        assert election.board.read(CastFinal)

    elections.clear()
    assert audit_soundness_experiment(2, 3, seed=6, cheat_probability=1.0).undetected == 0
    for election in elections:
        poios = election.board.read(PoIORecord)
        assert poios and {p.payload.tallier for p in poios} == {1}


def test_soundness_arguments():
    with pytest.raises(ConfigError):
        audit_soundness_experiment(0, 100)
    with pytest.raises(ConfigError):
        audit_soundness_experiment(2, 0)


def test_soundness_is_reproducible():
    assert audit_soundness_experiment(2, 100, seed=8) == audit_soundness_experiment(2, 100, seed=8)


@pytest.mark.slow
def test_soundness_sweep():
    results = soundness_sweep(6, 5000, seed=2024)
    assert [r.k for r in results] == [1, 2, 3, 4, 5, 6]
    assert all(_close(r) for r in results)
    rates = [r.rate for r in results]
    assert rates == sorted(rates, reverse=True)


@pytest.mark.slow
def test_four_rounds_leave_one_in_sixteen():
    result = audit_soundness_experiment(4, 40000, seed=2024)
    assert 0.0575 <= result.rate <= 0.0675


def test_soundness_plot(tmp_path):
    results = soundness_sweep(3, 100, seed=5)
    path = tmp_path / "soundness.png"
    plot_soundness(results, path)
    assert path.read_bytes()[:4] == b"\x89PNG"


def test_soundness_csv():
    stream = io.StringIO()
    soundness_csv([audit_soundness_experiment(2, 50, seed=0)], stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == ",".join(defaults.soundness_columns)
    assert lines[1].startswith("2,50,0.5,")


### Communication complexity

def test_complexity_counts():
    rows = complexity_probe(k=2, n_t_grid=(1, 3), n_v=2, seed=1)
    assert [row.n_t for row in rows] == [1, 3]
    for row in rows:
        assert row.within_bounds
        assert row.voter_messages == 2 * row.k * row.n_t + row.n_t
        assert row.tallier_sync_messages == (0 if row.n_t == 1 else row.n_t)
    stream = io.StringIO()
    complexity_csv(rows, stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == ",".join(defaults.complexity_columns)
    assert lines[2].startswith("3,2,2,15,21,")


### Receipt forgery

@pytest.fixture(scope="module")
def forgery_run():
    return forgery_election(seed=1)


def test_every_receipt_can_be_forged(forgery_run):
    result = receipt_forgery_experiment(forgery_run, 300, seed=2)
    assert result == ForgeryResult(300, 300, 1.0, False)


def test_corrupted_trapdoor_fails(forgery_run):
    # with a wrong trapdoor the forged blinding factor is uniform: about 1/q of the fakes verify
    trials = 2000
    result = receipt_forgery_experiment(forgery_run, trials, seed=2, corrupted=True)
    chance = 1 / forgery_run.params.q
    assert result.corrupted_trapdoor
    assert abs(result.rate - chance) <= 4 * math.sqrt(chance * (1 - chance) / trials)


def test_corrupt_trapdoor_shifts_every_log(tiny):
    assert corrupt_trapdoor(tiny).trapdoor[:2] == ((3 + 1) % 11, (2 + 2) % 11)


def test_forgery_needs_trapdoor(make_config):
    election = Election(make_config(Backend.PRODUCTION, n_v=2))
    with pytest.raises(TrapdoorError):
        receipt_forgery_experiment(election, 10)


def test_forgery_needs_trials(forgery_run):
    with pytest.raises(ConfigError):
        receipt_forgery_experiment(forgery_run, 0)


def test_forgery_csv():
    stream = io.StringIO()
    forgery_csv([ForgeryResult(10, 10, 1.0, False), ForgeryResult(10, 1, 0.1, True)], stream)
    assert stream.getvalue().splitlines() == [",".join(defaults.forgery_columns), "10,10,1.000000,0",
                                              "10,1,0.100000,1"]
