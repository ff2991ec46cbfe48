"""Composite Simpson weights on a uniform grid with an odd point count.

The zone grids used everywhere in this package have odd counts, so the
classic 1,4,2,...,2,4,1 pattern applies without a trapezoid patch. The
weights are returned as a vector so many integrands can reuse them as a
dot-product mask.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError


def simpson_weights(count: int, spacing: float) -> np.ndarray:
    if count < 3 or count % 2 == 0:
        raise InvalidArgumentError(f"Simpson rule needs an odd count >= 3, got {count}")
    w = np.ones(count)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (spacing / 3.0)
