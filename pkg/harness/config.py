from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from common.budgets import DEFAULT_BUDGET
from common.errors import ConfigInvalid, LittlewoodOffordError
from mathutil.rationals import format_rational, parse_rational

from .parameters import DEFAULT_BETA, TASKS
from .serialize import load_json


@dataclass(frozen=True)
class ExperimentConfig:
    """One task with its input files, distribution, radius, parameters and seed.

    `inputs` maps input names (points, matrix, gap, cert) to JSON
    files. `parameters` holds FitParams overrides for the inverse tasks and
    `options` any task-specific settings.
    """

    task: str
    inputs: dict[str, str] = field(default_factory=dict)
    dist: str | list | dict = "bernoulli"
    beta: Fraction = parse_rational(DEFAULT_BETA)
    parameters: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    output: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigInvalid(f"Unknown task {self.task!r}; tasks are {list(TASKS)}")
        try:
            object.__setattr__(self, "beta", parse_rational(self.beta))
        except LittlewoodOffordError as e:
            raise ConfigInvalid(f"Invalid beta: {e}") from e
        if self.beta < 0:
            raise ConfigInvalid(f"beta must be non-negative, got {self.beta}")
        for name, path in self.inputs.items():
            if not Path(path).exists():
                raise ConfigInvalid(f"Input {name} file {path} does not exist")
        if not isinstance(self.budget, int) or not isinstance(self.seed, int):
            raise ConfigInvalid("budget and seed must be integers")
        if self.budget < 1:
            raise ConfigInvalid(f"budget must be positive, got {self.budget}")
        if self.seed < 0:
            raise ConfigInvalid(f"seed must be non-negative, got {self.seed}")

    @classmethod
    def from_dict(cls, config: dict) -> "ExperimentConfig":
        if not isinstance(config, dict) or "task" not in config:
            raise ConfigInvalid("A config must be an object with a task")
        names = {f.name for f in fields(cls)}
        unknown = set(config) - names
        if unknown:
            raise ConfigInvalid(f"Unknown config fields: {sorted(unknown)}")
        return cls(**config)

    def to_dict(self) -> dict:
        """JSON-ready echo of the config."""
        return {
            "task": self.task,
            "inputs": dict(sorted(self.inputs.items())),
            "dist": self.dist,
            "beta": format_rational(self.beta),
            "parameters": self.parameters,
            "options": self.options,
            "seed": self.seed,
            "budget": self.budget,
            "output": self.output,
        }


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(load_json(path))
