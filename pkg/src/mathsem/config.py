"""Run configuration: built-in defaults, an optional ``mathsem.json``, then flags.

The config file is looked up as ``--config PATH``, else ``$MATHSEM_CONFIG``,
else ``./mathsem.json`` if it exists. A relative lexicon path is resolved
against the directory of the config file that names it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .context import ScoringParams
from .errors import ConfigError
from .numeric import Sampler
from .tagger import RuleWeights

ENV_VAR = "MATHSEM_CONFIG"
DEFAULT_FILE = "mathsem.json"


@dataclass(frozen=True)
class Config:
    lexicon: str | None = None
    weights: RuleWeights = RuleWeights()
    scoring: ScoringParams = ScoringParams()
    window: int = 2
    sampler: Sampler = Sampler()
    tolerance: float = 1e-10
    cutoff: float = 0.3
    source: str | None = field(default=None, compare=False)  # file the values came from

    def __post_init__(self):
        if self.window < 0:
            raise ConfigError("context window must be non-negative")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if not 0 <= self.cutoff <= 1:
            raise ConfigError("score cutoff must lie in [0, 1]")

    def to_dict(self) -> dict:
        w, s, smp = self.weights, self.scoring, self.sampler
        return {
            "lexicon": self.lexicon,
            "weights": {"signature": w.signature, "function": w.function, "constant": w.constant, "tau": w.tau},
            "context": {"lambda_w": s.lambda_w, "lambda_f": s.lambda_f, "window": self.window},
            "sampler": {"seed": smp.seed, "count": smp.count, "radius": smp.radius, "region": smp.region},
            "tolerance": self.tolerance,
            "cutoff": self.cutoff,
        }

    def with_overrides(self, **flags: Any) -> "Config":
        """Apply flag values that were actually given (``None`` means absent)."""
        given = {k: v for k, v in flags.items() if v is not None}
        if not given:
            return self
        data = self.to_dict()
        for key, value in given.items():
            section, _, name = key.rpartition(".")
            (data[section] if section else data)[name] = value
        return _build(data, self.source)


_SECTIONS = {
    "weights": {"signature", "function", "constant", "tau"},
    "context": {"lambda_w", "lambda_f", "window"},
    "sampler": {"seed", "count", "radius", "region"},
}
_TOP = {"lexicon", "tolerance", "cutoff", *_SECTIONS}


def _number(value: Any, where: str, integer: bool = False):
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if not ok or isinstance(value, bool):
        raise ConfigError(f"{where}: expected {'an integer' if integer else 'a number'}, got {value!r}")
    return value


def _build(data: Mapping[str, Any], source: str | None) -> Config:
    unknown = set(data) - _TOP
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for section, keys in _SECTIONS.items():
        raw = data.get(section, {})
        if not isinstance(raw, Mapping):
            raise ConfigError(f"{section}: expected an object")
        extra = set(raw) - keys
        if extra:
            raise ConfigError(f"{section}: unknown keys {sorted(extra)}")
    w = data.get("weights", {})
    c = data.get("context", {})
    s = data.get("sampler", {})
    defaults = Config()
    try:
        weights = RuleWeights(
            signature=_number(w.get("signature", defaults.weights.signature), "weights.signature"),
            function=_number(w.get("function", defaults.weights.function), "weights.function"),
            constant=_number(w.get("constant", defaults.weights.constant), "weights.constant"),
            tau=_number(w.get("tau", defaults.weights.tau), "weights.tau"),
        )
        scoring = ScoringParams(
            lambda_w=_number(c.get("lambda_w", defaults.scoring.lambda_w), "context.lambda_w"),
            lambda_f=_number(c.get("lambda_f", defaults.scoring.lambda_f), "context.lambda_f"),
        )
        region = s.get("region", defaults.sampler.region)
        if not isinstance(region, str):
            raise ConfigError("sampler.region: expected a string")
        sampler = Sampler(
            seed=_number(s.get("seed", defaults.sampler.seed), "sampler.seed", integer=True),
            count=_number(s.get("count", defaults.sampler.count), "sampler.count", integer=True),
            radius=_number(s.get("radius", defaults.sampler.radius), "sampler.radius"),
            region=region,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    lexicon = data.get("lexicon")
    if lexicon is not None and not isinstance(lexicon, str):
        raise ConfigError("lexicon: expected a path string")
    return Config(
        lexicon=lexicon,
        weights=weights,
        scoring=scoring,
        window=_number(c.get("window", defaults.window), "context.window", integer=True),
        sampler=sampler,
        tolerance=_number(data.get("tolerance", defaults.tolerance), "tolerance"),
        cutoff=_number(data.get("cutoff", defaults.cutoff), "cutoff"),
        source=source,
    )


def config_path(explicit: str | None = None, env: Mapping[str, str] | None = None,
                cwd: str | Path | None = None) -> tuple[Path | None, bool]:
    """Which config file applies, and whether it was asked for explicitly."""
    env = os.environ if env is None else env
    if explicit:
        return Path(explicit), True
    if env.get(ENV_VAR):
        return Path(env[ENV_VAR]), True
    local = Path(cwd or ".") / DEFAULT_FILE
    return (local, False) if local.is_file() else (None, False)


def load_config(explicit: str | None = None, env: Mapping[str, str] | None = None,
                cwd: str | Path | None = None) -> Config:
    path, required = config_path(explicit, env, cwd)
    if path is None:
        return Config()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        if required:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
        return Config()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    cfg = _build(data, str(path))
    if cfg.lexicon is not None and not Path(cfg.lexicon).is_absolute():
        cfg = replace(cfg, lexicon=str(path.parent / cfg.lexicon))
    return cfg
