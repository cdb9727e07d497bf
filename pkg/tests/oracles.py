"""Independent reference implementations used only to check the fast paths.

Deliberately written the slow, obvious way so they share no code with the
package: the spectral oracle evaluates the DFT sum term by term, and the
threshold oracle rescans the whole population for every candidate split.
"""

import cmath

import numpy as np


def brute_force_psd(values):
    """One-sided PSD via the textbook O(N^2) DFT sum: |Y[k]|^2 / N."""
    n = len(values)
    out = []
    for k in range(n // 2 + 1):
        acc = 0j
        for t, x in enumerate(values):
            acc += x * cmath.exp(-2j * cmath.pi * k * t / n)
        out.append(abs(acc) ** 2 / n)
    return out


def brute_force_psd_fast(values):
    """Same O(N^2) DFT sum, vectorized per frequency bin (still not an FFT)."""
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    t = np.arange(n)
    out = []
    for k in range(n // 2 + 1):
        acc = np.sum(x * np.exp(-2j * np.pi * k * t / n))
        out.append(abs(acc) ** 2 / n)
    return out


def brute_force_psd_matrix(values):
    """O(N^2) DFT via the explicit basis matrix: one row per output bin."""
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    basis = np.exp(-2j * np.pi * k * t / n)
    spectrum = basis @ x
    return np.abs(spectrum) ** 2 / n


def exhaustive_balanced_threshold(pairs):
    """Best split value by scanning every candidate with direct summation.

    For each distinct value t, tokens_low = sum of weights with value <= t;
    minimize |tokens_low - tokens_high|, ties to the smaller low side.
    """
    total = sum(w for _, w in pairs)
    best_t = None
    best_imbalance = None
    best_low = None
    for t in sorted({v for v, _ in pairs}):
        low = sum(w for v, w in pairs if v <= t)
        imbalance = abs(low - (total - low))
        if (
            best_imbalance is None
            or imbalance < best_imbalance
            or (imbalance == best_imbalance and low < best_low)
        ):
            best_t, best_imbalance, best_low = t, imbalance, low
    return best_t


def mean_positions(sequence, label_of):
    """Mean index per label over a flat sample sequence."""
    sums = {}
    counts = {}
    for idx, item in enumerate(sequence):
        label = label_of(item)
        sums[label] = sums.get(label, 0.0) + idx
        counts[label] = counts.get(label, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}
