"""Built-in benchmark data-generating processes.

Four quarterly (s = 4) models sharing alpha = 1.6, d = 0.15, D = 0.20 and
differing in the short-memory part: none, AR(1) 0.6, MA(1) 0.4, or both.
"""

from __future__ import annotations

from .model import ArfismaParams, SeasonalSpec

PRESETS: dict[int, tuple[ArfismaParams, SeasonalSpec]] = {
    1: (ArfismaParams(alpha=1.6, d=0.15, D=0.20), SeasonalSpec(s=4)),
    2: (
        ArfismaParams(alpha=1.6, d=0.15, D=0.20, phi=(0.6,)),
        SeasonalSpec(s=4, p=1),
    ),
    3: (
        ArfismaParams(alpha=1.6, d=0.15, D=0.20, theta=(0.4,)),
        SeasonalSpec(s=4, q=1),
    ),
    4: (
        ArfismaParams(alpha=1.6, d=0.15, D=0.20, phi=(0.6,), theta=(0.4,)),
        SeasonalSpec(s=4, p=1, q=1),
    ),
}


def get_preset(model: int) -> tuple[ArfismaParams, SeasonalSpec]:
    try:
        return PRESETS[int(model)]
    except (KeyError, ValueError):
        raise ValueError(f"unknown preset {model!r}; available: {sorted(PRESETS)}") from None
