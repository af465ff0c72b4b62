"""Logarithmic and fixed-width bins used by the analyses.

Log bins hold ``bins_per_decade`` bins per factor of ten. Zero gets its own
bin (index -1) so uncited papers are never merged into [1, 10^(1/k)).
"""

import numpy as np
import pandas as pd

ZERO_BIN = -1


def log_bin_index(values: pd.Series | np.ndarray, bins_per_decade: int) -> np.ndarray:
    """Bin index per value: -1 for 0, else b with 10^(b/k) <= v < 10^((b+1)/k)."""
    v = np.asarray(values, dtype=np.float64)
    top = max(1.0, float(v.max(initial=1.0)))
    n_edges = int(np.ceil(np.log10(top) * bins_per_decade)) + 2
    edges = 10.0 ** (np.arange(n_edges) / bins_per_decade)
    idx = np.searchsorted(edges, v, side="right") - 1
    return np.where(v <= 0, ZERO_BIN, idx)


def log_bin_bounds(index: int, bins_per_decade: int) -> tuple[float, float]:
    """Value range [lo, hi) covered by a log bin."""
    if index == ZERO_BIN:
        return 0.0, 1.0
    return 10.0 ** (index / bins_per_decade), 10.0 ** ((index + 1) / bins_per_decade)


def with_bin_bounds(frame: pd.DataFrame, column: str, bins_per_decade: int) -> pd.DataFrame:
    """Insert ``<column>_lo`` / ``<column>_hi`` next to a log-bin column."""
    bounds = [log_bin_bounds(int(b), bins_per_decade) for b in frame[column]]
    pos = frame.columns.get_loc(column) + 1
    frame.insert(pos, f"{column}_lo", [lo for lo, _ in bounds])
    frame.insert(pos + 1, f"{column}_hi", [hi for _, hi in bounds])
    return frame


def dp_bin_index(dp: pd.Series, width: int) -> pd.Series:
    """Lower edge of the fixed-width DP bin; DP = 100 falls in the last bin."""
    last = (100 // width - 1) * width if 100 % width == 0 else (100 // width) * width
    return (np.floor(dp / width) * width).clip(upper=last).astype("Int64")
