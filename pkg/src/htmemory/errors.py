"""Exception taxonomy shared across the package.

Library code raises ``ValueError`` for plain argument violations; the
classes here mark conditions the command-line layer maps to distinct exit
codes (config 2, numerics 3, data 4).
"""

from __future__ import annotations

import numpy as np


class ConfigError(ValueError):
    """Unusable configuration: bad literals, missing parameters."""


class DataError(ValueError):
    """Unusable input data: missing columns, bad rows, wrong signs."""


class ConvergenceError(RuntimeError):
    """A numerical routine could not reach its requested accuracy.

    Carries the best available value and the achieved error estimate.
    """

    def __init__(self, message: str, value: float = np.nan, error: float = np.nan):
        super().__init__(message)
        self.value = value
        self.error = error
