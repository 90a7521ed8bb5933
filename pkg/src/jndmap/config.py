"""Run configuration: JSON-file round-trippable settings for the pipeline."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .mapping import FAMILIES
from .screening import METHODS as SCREENING_METHODS
from .significance import TESTS


@dataclass(frozen=True)
class DecompositionConfig:
    strategy: str = "balanced"
    k: int = 5  # balanced
    width: float = 10.0  # fixed_width
    bounds: tuple[float, ...] | None = None  # explicit
    balance: str = "stimuli"  # balanced: "stimuli" | "pairs"


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.05
    test: str = "welch"
    screening: str = "bt500"
    decomposition: DecompositionConfig = field(default_factory=DecompositionConfig)
    bin_width: float = 2.0
    families: tuple[str, ...] = FAMILIES
    thresholds: tuple[float, ...] = (0.75, 0.8, 0.85, 0.9, 0.95)
    glm_mode: str = "pairwise"
    chain_orders: bool = True
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.test not in TESTS:
            raise ValueError(f"test must be one of {TESTS}, got {self.test!r}")
        if self.screening not in SCREENING_METHODS:
            raise ValueError(
                f"screening must be one of {SCREENING_METHODS}, got {self.screening!r}"
            )
        if self.decomposition.strategy not in ("balanced", "fixed_width", "explicit"):
            raise ValueError(f"unknown decomposition strategy {self.decomposition.strategy!r}")
        if self.decomposition.strategy == "explicit" and not self.decomposition.bounds:
            raise ValueError("explicit decomposition needs bounds")
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be positive, got {self.bin_width}")
        for family in self.families:
            if family not in FAMILIES:
                raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
        for thr in self.thresholds:
            if not 0.0 < thr < 1.0:
                raise ValueError(f"thresholds must be in (0, 1), got {thr}")
        if self.glm_mode not in ("pairwise", "points"):
            raise ValueError(f"glm_mode must be 'pairwise' or 'points', got {self.glm_mode!r}")

    def to_json_dict(self) -> dict:
        data = asdict(self)
        data["families"] = list(self.families)
        data["thresholds"] = list(self.thresholds)
        decomp = data["decomposition"]
        decomp["bounds"] = None if self.decomposition.bounds is None else list(
            self.decomposition.bounds
        )
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunConfig":
        kwargs = dict(data)
        if "decomposition" in kwargs:
            dk = dict(kwargs["decomposition"])
            if dk.get("bounds") is not None:
                dk["bounds"] = tuple(float(b) for b in dk["bounds"])
            kwargs["decomposition"] = DecompositionConfig(**dk)
        if "families" in kwargs:
            kwargs["families"] = tuple(kwargs["families"])
        if "thresholds" in kwargs:
            kwargs["thresholds"] = tuple(float(t) for t in kwargs["thresholds"])
        return cls(**kwargs)

    def with_overrides(self, **kwargs) -> "RunConfig":
        decomp_keys = {k: v for k, v in kwargs.items() if k in ("strategy", "k", "width", "bounds", "balance")}
        top = {k: v for k, v in kwargs.items() if k not in decomp_keys}
        cfg = replace(self, **top) if top else self
        if decomp_keys:
            cfg = replace(cfg, decomposition=replace(cfg.decomposition, **decomp_keys))
        return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return RunConfig.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def config_json_text(config: RunConfig) -> str:
    return json.dumps(config.to_json_dict(), indent=2, sort_keys=True) + "\n"
