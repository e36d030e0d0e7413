"""Tunable engine thresholds, collected in one place.

Defaults are the engine's pinned operating points; tests rely on them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EngineConfig:
    # A concept counts as in the common ground when at least this fraction
    # of its statement vector lies in the span of the dialogue basis.
    common_ground_threshold: float = 0.5
    # Assessment at or above this ends a scaffold cycle early (the student
    # has demonstrated understanding).
    mastery_threshold: float = 0.7
    # Summary assessment at or above this counts the concept as covered
    # and marks it presumed-understood.
    summary_coverage_threshold: float = 0.6
    # Summary coverage at or below this ratio schedules a second round of
    # concept maps and scaffolding.
    two_round_ratio: float = 1.0 / 3.0
    # Residual norm below this is treated as linearly dependent and not
    # added to the dialogue basis.
    basis_residual_epsilon: float = 1e-6
    # Which side(s) of the dialogue feed the common-ground basis.
    basis_source: str = "both"  # "both" | "student" | "tutor"
    # Probability that any given concept-map label is blanked.
    map_blank_probability: float = 0.5
    # Advisory only: past this the session view sets a wrap-up flag.
    session_soft_limit_minutes: float = 35.0
    # Presumed-covered concepts persist across a student's sessions.
    persist_presumed: bool = True

    def __post_init__(self):
        if self.basis_source not in ("both", "student", "tutor"):
            raise ValueError(f"bad basis_source: {self.basis_source!r}")


DEFAULT_CONFIG = EngineConfig()
