"""Experiment configuration: algorithm presets, per-domain defaults, file io.

Config files are flat `key = value` text with `#` comments. Recognized keys:
domain, algorithm, seeds, out, plus `net.<field>` and `trainer.<field>`
overrides checked against the real config dataclasses; anything else is an
error. Algorithm ids select baselines and sharing ablations as pure config
degenerations of the same architecture.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .. import envs as envs_mod
from ..checkpoint import config_hash
from ..network import NetConfig
from ..trainer import TrainerConfig

# net-config deltas per algorithm id
ALGORITHMS = {
    "cradol": {},
    "oc": {"num_mechanisms": 1, "top_k": 1},
    "sac": {"num_mechanisms": 1, "top_k": 1, "num_options": 1},
    "cradol-jointp": {"table_shared": True},
    "cradol-sepv": {"value_shared": False},
    "cradol-sepcomm": {"comm_shared": False},
    "cradol-jointp-sepv": {"table_shared": True, "value_shared": False},
    "cradol-jointp-sepcomm": {"table_shared": True, "comm_shared": False},
    "cradol-sepv-sepcomm": {"value_shared": False, "comm_shared": False},
}

# the sharing-ablation family, in reporting order
ABLATION_IDS = [
    "cradol-jointp",
    "cradol-sepv",
    "cradol-sepcomm",
    "cradol-jointp-sepv",
    "cradol-jointp-sepcomm",
    "cradol-sepv-sepcomm",
]

# published per-domain hyperparameters
DOMAIN_DEFAULTS = {
    "empty6": {
        "net": {"value_size": 32, "entropy_weight": 0.005},
        "trainer": {
            "lr_q_omega": 3e-4, "lr_q_u": 3e-4, "lr_policy": 3e-4, "lr_termination": 3e-4,
            "entropy_weight": 0.005,
        },
    },
    "multiroom-n2s4": {
        "net": {"value_size": 32, "entropy_weight": 0.001},
        "trainer": {
            "lr_q_omega": 5e-4, "lr_q_u": 5e-4, "lr_policy": 5e-4, "lr_termination": 5e-4,
            "entropy_weight": 0.001,
        },
    },
    "doorkey6": {
        "net": {"value_size": 32, "entropy_weight": 0.001},
        "trainer": {
            "lr_q_omega": 5e-4, "lr_q_u": 5e-4, "lr_policy": 5e-4, "lr_termination": 5e-4,
            "entropy_weight": 0.001,
        },
    },
    "bandit": {
        "net": {"value_size": 16, "entropy_weight": 0.005},
        "trainer": {
            "lr_q_omega": 5e-3, "lr_q_u": 5e-3, "lr_policy": 5e-3, "lr_termination": 5e-3,
            "entropy_weight": 0.005,
        },
    },
    "reacher": {
        "net": {
            "value_size": 64, "entropy_weight": 0.001,
            "num_mechanisms": 6, "top_k": 4, "continuous_actions": True,
        },
        "trainer": {
            "lr_q_omega": 1e-3, "lr_q_u": 1e-3, "lr_policy": 1e-3, "lr_termination": 1e-3,
            "entropy_weight": 0.001,
        },
    },
}

_NET_FIELDS = {f.name for f in dataclasses.fields(NetConfig)}
_TRAINER_FIELDS = {f.name for f in dataclasses.fields(TrainerConfig)}


def _domain_key(domain: str) -> str:
    return "bandit" if domain.startswith("bandit-") else domain


@dataclass
class ExperimentConfig:
    domain: str
    algorithm: str = "cradol"
    seeds: tuple = (0,)
    out: str = None
    net: dict = field(default_factory=dict)
    trainer: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; known: {sorted(ALGORITHMS)}")
        self.seeds = tuple(int(s) for s in self.seeds)
        bad = set(self.net) - _NET_FIELDS
        if bad:
            raise ValueError(f"unknown net config keys: {sorted(bad)}")
        bad = set(self.trainer) - _TRAINER_FIELDS
        if bad:
            raise ValueError(f"unknown trainer config keys: {sorted(bad)}")

    @property
    def name(self) -> str:
        return f"{self.domain}_{self.algorithm}"

    def resolve(self):
        """Materialize (NetConfig, TrainerConfig) for this experiment."""
        probe = envs_mod.make(self.domain)
        dom = DOMAIN_DEFAULTS.get(_domain_key(self.domain), {"net": {}, "trainer": {}})

        net_kwargs = {
            "obs_size": probe.observation_size,
            "action_size": probe.action_size,
            "continuous_actions": probe.continuous,
        }
        net_kwargs.update(dom["net"])
        net_kwargs.update(ALGORITHMS[self.algorithm])
        net_kwargs.update(self.net)

        trainer_kwargs = dict(dom["trainer"])
        if self.algorithm == "sac":
            trainer_kwargs["freeze_termination"] = True
        trainer_kwargs.update(self.trainer)
        net_cfg = NetConfig(**net_kwargs)
        tr_cfg = TrainerConfig(**trainer_kwargs)
        # one entropy knob: the trainer's weight wins, mirrored into the net config
        net_cfg.entropy_weight = tr_cfg.entropy_weight
        return net_cfg, tr_cfg

    def resolved_dict(self) -> dict:
        net_cfg, tr_cfg = self.resolve()
        return {
            "domain": self.domain,
            "algorithm": self.algorithm,
            "seeds": list(self.seeds),
            "net": net_cfg.to_dict(),
            "trainer": tr_cfg.to_dict(),
        }

    def hash(self) -> str:
        d = self.resolved_dict()
        d.pop("seeds")  # the same experiment on different seeds shares a hash
        return config_hash(d)

    # ------------------------------------------------------------------
    # flat key=value serialization

    def to_text(self) -> str:
        lines = [
            f"domain = {self.domain}",
            f"algorithm = {self.algorithm}",
            f"seeds = {','.join(str(s) for s in self.seeds)}",
        ]
        if self.out:
            lines.append(f"out = {self.out}")
        for k in sorted(self.net):
            lines.append(f"net.{k} = {self.net[k]}")
        for k in sorted(self.trainer):
            lines.append(f"trainer.{k} = {self.trainer[k]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        fields = {"net": {}, "trainer": {}}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key == "domain":
                fields["domain"] = val
            elif key == "algorithm":
                fields["algorithm"] = val
            elif key == "seeds":
                fields["seeds"] = tuple(int(s) for s in val.split(",") if s.strip())
            elif key == "out":
                fields["out"] = val
            elif key.startswith("net."):
                name = key[4:]
                if name not in _NET_FIELDS:
                    raise ValueError(f"line {lineno}: unknown net key {name!r}")
                fields["net"][name] = _coerce(NetConfig, name, val)
            elif key.startswith("trainer."):
                name = key[8:]
                if name not in _TRAINER_FIELDS:
                    raise ValueError(f"line {lineno}: unknown trainer key {name!r}")
                fields["trainer"][name] = _coerce(TrainerConfig, name, val)
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        if "domain" not in fields:
            raise ValueError("config must set a domain")
        return cls(**fields)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_text(f.read())

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_text())


def _coerce(dc, name, val):
    ftype = {f.name: f.type for f in dataclasses.fields(dc)}[name]
    if ftype in ("bool", bool):
        low = val.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {val!r}")
    if ftype in ("int", int):
        return int(val)
    if ftype in ("float", float):
        return float(val)
    return val
