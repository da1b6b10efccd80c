"""Small numeric routines with fixed conventions.

Population standard deviation, lower-middle median, and summation in index
order, so summary tables are reproducible to the bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegenerateInput

Z95 = 1.959964


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: Optional[float] = None
    median: Optional[float] = None
    std: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None


def summarize_sample(values: Sequence[float]) -> SampleStats:
    n = len(values)
    if n == 0:
        return SampleStats(0)
    total = 0.0
    for v in values:
        total += v
    mean = total / n
    sq = 0.0
    for v in values:
        sq += (v - mean) * (v - mean)
    ordered = sorted(values)
    return SampleStats(
        n=n,
        mean=mean,
        median=float(ordered[(n - 1) // 2]),
        std=math.sqrt(sq / n),
        min=float(ordered[0]),
        max=float(ordered[-1]),
    )


def wilson_interval(successes: int, trials: int, z: float = Z95):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DegenerateInput("wilson_interval: trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"wilson_interval: successes {successes} outside [0, {trials}]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, min(p, centre - half))
    high = 1.0 if successes == trials else min(1.0, max(p, centre + half))
    return low, high
