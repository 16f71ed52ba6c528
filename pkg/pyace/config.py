import configparser
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Optional, Tuple, Union
import numpy as np
from pyace import params as defaults
from pyace.errors import ConfigError
from pyace.groups import Backend, derive_params
from pyace.tallier import DesignatedPolicy, TallierPolicy
from pyace.voter import AuditStrategy, VoterPolicy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElectionConfig:
    n_v: int = 100
    n_t: int = 5
    n_choices: int = 4
    backend: Backend = Backend.PRODUCTION
    audit: AuditStrategy = AuditStrategy.fixed(3)
    phase_ticks: Dict[str, Tuple[int, Optional[int]]] = field(default_factory=lambda: dict(defaults.phase_ticks))
    weights: Optional[Tuple[float, ...]] = None
    seed: int = 0
    audit_timeout: int = defaults.audit_timeout
    election_id: str = defaults.election_id

    def __post_init__(self):
        if self.weights is None:
            object.__setattr__(self, "weights", tuple(1 / self.n_choices for _ in range(self.n_choices)))
        self.validate()

    def validate(self):
        try:
            backend = Backend(self.backend)
        except ValueError:
            raise ConfigError(f"unknown backend {self.backend!r}")
        object.__setattr__(self, "backend", backend)
        if self.n_t < 1:
            raise ConfigError(f"n_t must be at least 1, got {self.n_t}")
        if self.n_v < 0:
            raise ConfigError(f"n_v must not be negative, got {self.n_v}")
        if not 2 <= self.n_choices <= defaults.max_choices[backend.value]:
            raise ConfigError(f"n_choices must be in 2..{defaults.max_choices[backend.value]}, got {self.n_choices}")
        params = derive_params(backend, self.n_choices)
        if self.n_v >= params.q:
            raise ConfigError(f"n_v = {self.n_v} must be below the group order {params.q}")
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (self.n_choices,) or (weights < 0).any() or not np.isclose(weights.sum(), 1.0):
            raise ConfigError(f"vote weights must be {self.n_choices} non-negative numbers summing to 1")
        if set(self.phase_ticks) != set(defaults.phase_ticks):
            raise ConfigError(f"phases must be exactly {sorted(defaults.phase_ticks)}")
        previous_end = 0
        for name in defaults.phase_ticks:
            start, end = self.phase_ticks[name]
            if start != previous_end or (end is not None and end <= start):
                raise ConfigError(f"phase {name} interval ({start}, {end}) does not follow the previous one")
            previous_end = end
        if previous_end is not None:
            raise ConfigError("the verification phase must be open-ended")
        if self.audit_timeout < 1:
            raise ConfigError("audit timeout must be at least one tick")

    @property
    def params(self):
        return derive_params(self.backend, self.n_choices)

    def to_dict(self) -> dict:
        return {
            "n_v": self.n_v,
            "n_t": self.n_t,
            "n_choices": self.n_choices,
            "backend": self.backend.value,
            "audit": asdict(self.audit),
            "phase_ticks": {name: list(interval) for name, interval in self.phase_ticks.items()},
            "weights": list(self.weights),
            "seed": self.seed,
            "audit_timeout": self.audit_timeout,
            "election_id": self.election_id,
        }

    def digest(self) -> bytes:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).digest()


@dataclass(frozen=True)
class AdversaryConfig:
    """
    Static corruption: which parties misbehave and how, fixed before the run.
    """
    corrupted_talliers: FrozenSet[int] = frozenset()
    tallier_policy: TallierPolicy = TallierPolicy.HONEST
    cheat_probability: float = 1.0
    corrupted_voters: FrozenSet[int] = frozenset()
    voter_policy: VoterPolicy = VoterPolicy.HONEST
    designated_policy: DesignatedPolicy = DesignatedPolicy.HONEST

    def __post_init__(self):
        try:
            object.__setattr__(self, "tallier_policy", TallierPolicy(self.tallier_policy))
            object.__setattr__(self, "voter_policy", VoterPolicy(self.voter_policy))
            object.__setattr__(self, "designated_policy", DesignatedPolicy(self.designated_policy))
        except ValueError as e:
            raise ConfigError(f"unknown policy: {e}")
        object.__setattr__(self, "corrupted_talliers", frozenset(self.corrupted_talliers))
        object.__setattr__(self, "corrupted_voters", frozenset(self.corrupted_voters))
        if not 0 <= self.cheat_probability <= 1:
            raise ConfigError(f"cheat probability must be in [0, 1], got {self.cheat_probability}")

    @property
    def honest(self) -> bool:
        return (self.tallier_policy is TallierPolicy.HONEST and self.voter_policy is VoterPolicy.HONEST
                and self.designated_policy is DesignatedPolicy.HONEST)

    def tallier_policy_of(self, j: int) -> TallierPolicy:
        return self.tallier_policy if j in self.corrupted_talliers else TallierPolicy.HONEST

    def voter_policy_of(self, i: int) -> VoterPolicy:
        return self.voter_policy if i in self.corrupted_voters else VoterPolicy.HONEST

    def check_against(self, config: ElectionConfig):
        if any(not 0 <= j < config.n_t for j in self.corrupted_talliers):
            raise ConfigError(f"corrupted talliers {sorted(self.corrupted_talliers)} outside 0..{config.n_t - 1}")
        if any(not 0 <= i < config.n_v for i in self.corrupted_voters):
            raise ConfigError(f"corrupted voters {sorted(self.corrupted_voters)} outside 0..{config.n_v - 1}")
        if len(self.corrupted_talliers) >= config.n_t and self.tallier_policy is not TallierPolicy.HONEST:
            raise ConfigError("at least one tallier must remain honest")


def _last_tallier(config: ElectionConfig) -> FrozenSet[int]:
    return frozenset({config.n_t - 1})


scenarios = {
    "honest": lambda config: AdversaryConfig(),
    "swap-commitment": lambda config: AdversaryConfig(_last_tallier(config), TallierPolicy.ALWAYS_SWAP_COMMITMENT),
    "naive-swap": lambda config: AdversaryConfig(_last_tallier(config), TallierPolicy.NAIVE_SWAP),
    "wrong-audit-reveal": lambda config: AdversaryConfig(_last_tallier(config), TallierPolicy.WRONG_AUDIT_REVEAL),
    "wrong-aggregate": lambda config: AdversaryConfig(_last_tallier(config), TallierPolicy.WRONG_AGGREGATE),
    "silent-tallier": lambda config: AdversaryConfig(_last_tallier(config), TallierPolicy.SILENT),
    "invalid-vote": lambda config: AdversaryConfig(corrupted_voters=frozenset({0}),
                                                   voter_policy=VoterPolicy.INVALID_VOTE_GARBAGE_PROOF),
    "wrong-opening": lambda config: AdversaryConfig(corrupted_voters=frozenset({0}),
                                                    voter_policy=VoterPolicy.WRONG_OPENING),
    "double-vote": lambda config: AdversaryConfig(corrupted_voters=frozenset({0}),
                                                  voter_policy=VoterPolicy.DOUBLE_VOTE_ATTEMPT),
    "wrong-winner": lambda config: AdversaryConfig(designated_policy=DesignatedPolicy.WRONG_WINNER),
    "wrong-rtilde": lambda config: AdversaryConfig(designated_policy=DesignatedPolicy.WRONG_RTILDE),
}


def scenario(name: str, config: ElectionConfig) -> AdversaryConfig:
    if name not in scenarios:
        raise ConfigError(f"unknown scenario {name!r}, choose from {', '.join(scenarios)}")
    adv = scenarios[name](config)
    adv.check_against(config)
    return adv


def _ints(text: str) -> FrozenSet[int]:
    return frozenset(int(part) for part in text.replace(",", " ").split())


def parse_config(text: str) -> Tuple[ElectionConfig, AdversaryConfig]:
    """
    Reads an INI-style election file with sections [election], [audit], [phases],
    [votes] and [adversary]. Missing keys take the defaults from pyace.params.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
        election = parser["election"] if parser.has_section("election") else {}
        kwargs = {}
        for key in ("n_v", "n_t", "n_choices", "seed"):
            if key in election:
                kwargs[key] = int(election[key])
        if "backend" in election:
            kwargs["backend"] = election["backend"].strip()
        if "election_id" in election:
            kwargs["election_id"] = election["election_id"].strip()

        if parser.has_section("audit"):
            audit = parser["audit"]
            if "p" in audit:
                kwargs["audit"] = AuditStrategy.geometric(audit.getfloat("p"))
            elif "k" in audit:
                kwargs["audit"] = AuditStrategy.fixed(audit.getint("k"))
            if "timeout" in audit:
                kwargs["audit_timeout"] = audit.getint("timeout")

        if parser.has_section("phases"):
            ticks = dict(defaults.phase_ticks)
            for name, value in parser["phases"].items():
                parts = [part.strip() for part in value.split(",")]
                end = None if parts[1].lower() in ("", "none") else int(parts[1])
                ticks[name] = (int(parts[0]), end)
            kwargs["phase_ticks"] = ticks

        if parser.has_section("votes") and "weights" in parser["votes"]:
            kwargs["weights"] = tuple(float(w) for w in parser["votes"]["weights"].replace(",", " ").split())

        adv_kwargs = {}
        if parser.has_section("adversary"):
            adv = parser["adversary"]
            if "talliers" in adv:
                adv_kwargs["corrupted_talliers"] = _ints(adv["talliers"])
            if "voters" in adv:
                adv_kwargs["corrupted_voters"] = _ints(adv["voters"])
            for key in ("tallier_policy", "voter_policy", "designated_policy"):
                if key in adv:
                    adv_kwargs[key] = adv[key].strip()
            if "cheat_probability" in adv:
                adv_kwargs["cheat_probability"] = adv.getfloat("cheat_probability")
    except (configparser.Error, ValueError, IndexError) as e:
        raise ConfigError(f"malformed config: {e}")

    config = ElectionConfig(**kwargs)
    adversary = AdversaryConfig(**adv_kwargs)
    adversary.check_against(config)
    return config, adversary


def load_config(path: Union[str, Path]) -> Tuple[ElectionConfig, AdversaryConfig]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    config, adversary = parse_config(text)
    logger.info("loaded config %s: n_v=%d n_t=%d n_choices=%d backend=%s", path, config.n_v, config.n_t,
                config.n_choices, config.backend.value)
    return config, adversary


def with_seed(config: ElectionConfig, seed: Optional[int]) -> ElectionConfig:
    return config if seed is None else replace(config, seed=seed)
