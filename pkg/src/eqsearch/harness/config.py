"""Experiment configuration files (YAML or JSON) and agent construction."""
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..blueprint import DEFAULT_ROLLOUT_TEMPERATURE, GridConquestBlueprint
from ..envs import GridConquestEnv
from ..errors import ConfigError, ContractError
from ..games.gridconquest import torus_board
from ..regret import RmConfig
from ..search import BEST_RESPONSE, BestResponseAgent, BlueprintAgent, SearchAgent, SearchConfig

KINDS = ("solve-matrix", "seed-average", "convergence-trace", "play", "evaluate-1v6",
         "sweep", "rate", "check-entropy-grad")

AGENT_KINDS = ("blueprint", "searchbot", "brbot")


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    output_dir: str = "runs/out"
    repetitions: int = 1
    params: dict = field(default_factory=dict)
    source: str = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if int(self.repetitions) < 1:
            raise ConfigError("repetitions must be >= 1")
        for key in ("game_file", "dataset"):
            path = self.params.get(key)
            if path is not None:
                resolved = self.resolve(path)
                if not resolved.exists():
                    raise ConfigError(f"{key} {path!r} does not exist")

    def resolve(self, path):
        p = Path(path)
        if not p.is_absolute() and self.source is not None:
            p = Path(self.source).parent / p
        return p

    def to_dict(self):
        return {"kind": self.kind, "seed": self.seed, "output_dir": self.output_dir,
                "repetitions": self.repetitions, "params": self.params}


def load_config(path, overrides=None):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text()
    try:
        doc = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError(f"{path}: expected a mapping with a 'kind' field")
    doc = dict(doc)
    doc.update(overrides or {})
    known = {"kind", "seed", "output_dir", "repetitions"}
    params = {k: v for k, v in doc.items() if k not in known}
    return ExperimentConfig(kind=doc["kind"], seed=int(doc.get("seed", 0)),
                            output_dir=str(doc.get("output_dir", f"runs/{doc['kind']}")),
                            repetitions=int(doc.get("repetitions", 1)),
                            params=params, source=str(path))


def make_env(params):
    b = params.get("board", {}) or {}
    return GridConquestEnv(torus_board(b.get("rows", 4), b.get("cols", 4), b.get("horizon", 10)))


def make_blueprint(params):
    bp = params.get("blueprint", {}) or {}
    return GridConquestBlueprint(temperature=bp.get("temperature", DEFAULT_ROLLOUT_TEMPERATURE))


def search_config(spec):
    """SearchConfig from an agent mapping (flat keys as in the config files)."""
    rm = RmConfig(iterations=int(spec.get("iterations", 256)),
                  linear=bool(spec.get("linear", True)),
                  optimism=bool(spec.get("optimism", True)))
    try:
        return SearchConfig(M=float(spec.get("M", 5)),
                            rollout_horizon=int(spec.get("rollout_horizon", 2)),
                            rm=rm,
                            mode=spec.get("mode", "equilibrium"),
                            rollouts_per_query=int(spec.get("rollouts_per_query", 1)),
                            br_rollouts=int(spec.get("br_rollouts", 64)))
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def agent_factory(spec, bp):
    """Zero-argument factory for the agent described by ``spec``."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind not in AGENT_KINDS:
        raise ConfigError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")
    if kind == "blueprint":
        return lambda: BlueprintAgent(bp)
    cfg = search_config(spec)
    if kind == "brbot" or cfg.mode == BEST_RESPONSE:
        return lambda: BestResponseAgent(bp, cfg)
    return lambda: SearchAgent(bp, cfg)
