"""Small statistical helpers for the anonymity harness."""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy import stats

LN2 = np.log(2.0)


def uniformity_p(counts: Sequence[int]) -> float:
    """Chi-square goodness-of-fit p-value against the uniform distribution."""
    counts = np.asarray(counts, dtype=float)
    if counts.size < 2 or counts.sum() == 0:
        return 1.0
    return float(stats.chisquare(counts).pvalue)


def homogeneity_p(table) -> float:
    """Chi-square homogeneity p-value for a labels x values count table."""
    t = np.asarray(table, dtype=float)
    t = t[:, t.sum(axis=0) > 0]
    t = t[t.sum(axis=1) > 0]
    if t.shape[0] < 2 or t.shape[1] < 2:
        return 1.0
    return float(stats.chi2_contingency(t, correction=False).pvalue)


def _entropy_mm(counts: np.ndarray, total: float) -> float:
    c = counts[counts > 0]
    p = c / total
    # Miller-Madow: add (K - 1) / 2N to the plug-in entropy
    return float(-(p * np.log(p)).sum() + (c.size - 1) / (2 * total))


def mutual_information(table) -> float:
    """Miller-Madow corrected plug-in MI (bits) of a labels x values table."""
    t = np.asarray(table, dtype=float)
    total = t.sum()
    if total == 0:
        return 0.0
    h_l = _entropy_mm(t.sum(axis=1), total)
    h_v = _entropy_mm(t.sum(axis=0), total)
    h_lv = _entropy_mm(t.reshape(-1), total)
    return float((h_l + h_v - h_lv) / LN2)


def total_variation(p: Mapping[Hashable, float], q: Mapping[Hashable, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical(values: Sequence[Hashable]) -> dict:
    c = Counter(values)
    n = sum(c.values())
    return {k: v / n for k, v in c.items()}


def binomial_sigma(n: int, p: float) -> float:
    return float(np.sqrt(n * p * (1 - p)))
