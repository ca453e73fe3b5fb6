"""Shared test helpers; calibration results are cached per (kind, levels)."""

import functools

from platonic_rb import pulse


@functools.lru_cache(maxsize=None)
def calibrated(kind: str = "octahedral", levels: int = 3):
    """Calibrated pulse parameters plus the config they were solved under."""
    cfg = pulse.PulseSimConfig(levels=levels)
    return pulse.calibrate(cfg, kind=kind), cfg
