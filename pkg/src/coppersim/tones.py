"""Technology profiles and DMT tone grids.

Each profile fixes a sub-carrier spacing and tone count. Tone index 0 (DC)
is excluded: the first usable tone sits one spacing above DC unless a
custom ``start_hz`` is given.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class TonePlan:
    """Frequency grid for one technology profile.

    ``symbol_rate_hz`` equals ``spacing_hz * (1 - overhead_fraction)``;
    with the default zero overhead this is the ideal DMT symbol rate.
    """

    profile_name: str
    spacing_hz: float
    num_tones: int
    start_hz: float
    overhead_fraction: float = 0.0
    duplexing: str = "TDD"

    def __post_init__(self):
        if self.num_tones <= 0:
            raise ConfigError("num_tones must be a positive integer")
        if self.spacing_hz <= 0:
            raise ConfigError("spacing_hz must be positive")
        if self.start_hz <= 0:
            raise ConfigError("start_hz must be positive")
        if not 0.0 <= self.overhead_fraction < 1.0:
            raise ConfigError("overhead_fraction must lie in [0, 1)")

    @property
    def symbol_rate_hz(self) -> float:
        return self.spacing_hz * (1.0 - self.overhead_fraction)

    @property
    def bandwidth_hz(self) -> float:
        """Upper band edge implied by the grid (within one tone spacing)."""
        return self.start_hz + self.num_tones * self.spacing_hz

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TonePlan":
        return cls(**d)


def _profile(name, spacing, tones, duplexing):
    return TonePlan(
        profile_name=name,
        spacing_hz=spacing,
        num_tones=tones,
        start_hz=spacing,
        duplexing=duplexing,
    )


#: Built-in technology profiles. The 848 MHz grid (103.5 kHz spacing,
#: 8192 tones) is anticipated rather than standardized.
PROFILES = {
    "vdsl17": _profile("vdsl17", 4312.5, 4096, "FDD"),
    "gfast106": _profile("gfast106", 51750.0, 2048, "TDD"),
    "gfast212": _profile("gfast212", 51750.0, 4096, "TDD"),
    "gmgfast424": _profile("gmgfast424", 51750.0, 8192, "FD"),
    "gmgfast848": _profile("gmgfast848", 103500.0, 8192, "FD"),
}


def get_profile(name: str) -> TonePlan:
    """Look up a built-in profile by its config/CLI name (e.g. "gfast212")."""
    key = name.strip().lower().replace("-", "").replace(".", "").replace("()", "")
    if key not in PROFILES:
        known = ", ".join(sorted(PROFILES))
        raise ConfigError(f"unknown profile '{name}' (known: {known})")
    return PROFILES[key]


def tone_frequencies(plan: TonePlan) -> np.ndarray:
    """Center frequencies f_k = start_hz + k * spacing_hz, k = 0..num_tones-1."""
    return plan.start_hz + plan.spacing_hz * np.arange(plan.num_tones)
