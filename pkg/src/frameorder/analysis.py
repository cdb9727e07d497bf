"""Distribution statistics and loss-curve smoothness instruments.

Smoothness of a training-loss curve l[n] is summarized by the share of its
power spectral density above a cutoff frequency: Y[k] = FFT(l[n]),
PSD[k] = |Y[k]|^2 / N over the one-sided spectrum k = 0..floor(N/2), and

    R = sum_{f > f_c} PSD[k] / sum_{k=0}^{N/2} PSD[k]

with f_c expressed as a fraction of the Nyquist frequency. Smaller R means a
smoother curve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import _iter_lines, _parse_json_line
from .errors import (
    CorpusFormatError,
    EmptyGroupError,
    EmptySpectrumError,
    LengthMismatchError,
)
from .scorer import ScoredSample

DEFAULT_CUTOFF_FRACTION = 0.1
DEFAULT_BIN_COUNT = 20


# ---------------------------------------------------------------------------
# Distribution reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DistributionReport:
    group_key: str
    metric: str  # "ppl" or "pd"
    mean: float
    variance: float
    histogram: tuple[tuple[float, int], ...]  # (bin lower edge, count)
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "group_key": self.group_key,
            "metric": self.metric,
            "mean": self.mean,
            "variance": self.variance,
            "histogram": [[edge, count] for edge, count in self.histogram],
            "sample_count": self.sample_count,
        }


def distribution_stats(
    groups: Mapping[str, Sequence[ScoredSample]],
    metric: str,
    bin_count: int = DEFAULT_BIN_COUNT,
) -> list[DistributionReport]:
    """Mean/variance/histogram of ppl or pd for each group of scored samples.

    Variance is the population variance (a singleton group has variance 0).
    Histograms span [min, max] with equal-width bins; counts sum to the group
    size.
    """
    if bin_count < 1:
        raise ValueError(f"bin_count must be >= 1, got {bin_count}")
    if metric not in ("ppl", "pd"):
        raise ValueError(f"unknown metric {metric!r}")
    reports = []
    for key in groups:
        samples = groups[key]
        if not samples:
            raise EmptyGroupError(f"group {key!r} has no samples")
        values = np.asarray(
            [s.ppl_strong if metric == "ppl" else s.pd for s in samples], dtype=np.float64
        )
        lo, hi = float(values.min()), float(values.max())
        if hi > lo:
            counts, edges = np.histogram(values, bins=bin_count, range=(lo, hi))
        else:
            counts = np.array([len(values)] + [0] * (bin_count - 1))
            edges = np.linspace(lo - 0.5, lo + 0.5, bin_count + 1)
        reports.append(
            DistributionReport(
                group_key=str(key),
                metric=metric,
                mean=float(values.mean()),
                variance=float(values.var()),
                histogram=tuple(
                    (float(edges[i]), int(counts[i])) for i in range(bin_count)
                ),
                sample_count=len(values),
            )
        )
    return reports


def group_by_domain(corpus, scored: Sequence[ScoredSample]) -> dict:
    domains = {s.id: (s.domain or "unknown") for s in corpus.samples}
    groups: dict[str, list[ScoredSample]] = {}
    for s in scored:
        groups.setdefault(domains.get(s.id, "unknown"), []).append(s)
    return groups


def group_by_quadrant(partition, scored: Sequence[ScoredSample]) -> dict:
    groups: dict[str, list[ScoredSample]] = {}
    for s in scored:
        groups.setdefault(partition.labels[s.id], []).append(s)
    return groups


# ---------------------------------------------------------------------------
# Spectral smoothness
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LossCurve:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError("loss curve needs at least 2 points")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"loss curve {self.name!r} contains non-finite values")


@dataclass(frozen=True, slots=True)
class SpectralReport:
    name: str
    psd: tuple[float, ...]
    cutoff_fraction: float
    high_freq_ratio: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "psd": list(self.psd),
            "cutoff_fraction": self.cutoff_fraction,
            "high_freq_ratio": self.high_freq_ratio,
        }


def power_spectral_density(curve: LossCurve) -> np.ndarray:
    """One-sided PSD: |FFT(l)[k]|^2 / N for k = 0..floor(N/2).

    numpy's FFT is an exact mixed-radix transform for every length, so no
    padding is involved and the spectrum is the plain DFT's for any N.
    """
    values = np.asarray(curve.values, dtype=np.float64)
    n = len(values)
    spectrum = np.fft.rfft(values)
    psd = (spectrum.real**2 + spectrum.imag**2) / n
    return psd[: n // 2 + 1]


def high_freq_ratio(psd: Sequence[float], cutoff_fraction: float) -> float:
    """Share of one-sided spectral power above the cutoff.

    ``cutoff_fraction`` is f_c as a fraction of Nyquist; bin k (of a length-N
    curve, K = floor(N/2) bins after DC) is "high" when k/K > cutoff_fraction.
    The denominator includes the DC term.
    """
    psd = np.asarray(psd, dtype=np.float64)
    if psd.size == 0:
        raise EmptySpectrumError("empty spectrum")
    if not 0.0 < cutoff_fraction < 1.0:
        raise ValueError(f"cutoff_fraction must be in (0, 1), got {cutoff_fraction}")
    total = float(psd.sum())
    if total == 0.0:
        raise EmptySpectrumError("all-zero spectrum: high-frequency ratio undefined")
    k_max = psd.size - 1  # Nyquist bin index of the one-sided spectrum
    bins = np.arange(psd.size)
    high = bins / max(k_max, 1) > cutoff_fraction
    return float(psd[high].sum() / total)


def spectral_report(
    curve: LossCurve, cutoff_fraction: float = DEFAULT_CUTOFF_FRACTION
) -> SpectralReport:
    psd = power_spectral_density(curve)
    return SpectralReport(
        name=curve.name,
        psd=tuple(float(v) for v in psd),
        cutoff_fraction=cutoff_fraction,
        high_freq_ratio=high_freq_ratio(psd, cutoff_fraction),
    )


def compare_smoothness(
    curves: Sequence[LossCurve], cutoff_fraction: float = DEFAULT_CUTOFF_FRACTION
) -> list[SpectralReport]:
    """High-frequency ratio per curve, smoothest (lowest R) first.

    Curves must share a length so the ratios are comparable. Which curve wins
    is entirely a property of the inputs.
    """
    if not curves:
        return []
    lengths = {len(c.values) for c in curves}
    if len(lengths) > 1:
        raise LengthMismatchError(f"curves have differing lengths: {sorted(lengths)}")
    reports = [spectral_report(c, cutoff_fraction) for c in curves]
    return sorted(reports, key=lambda r: (r.high_freq_ratio, r.name))


# ---------------------------------------------------------------------------
# Loss-curve files
# ---------------------------------------------------------------------------


def load_loss_curve(path, name: str | None = None) -> LossCurve:
    """Read a loss curve from JSON Lines ({"step", "loss"}) or CSV."""
    from pathlib import Path

    path = Path(path)
    curve_name = name if name is not None else path.stem
    points: list[tuple[int, float]] = []
    if path.suffix == ".csv":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"step", "loss"} <= set(reader.fieldnames):
                raise CorpusFormatError(path, 1, "CSV loss curve needs 'step' and 'loss' columns")
            for row_no, row in enumerate(reader, start=2):
                try:
                    points.append((int(row["step"]), float(row["loss"])))
                except (TypeError, ValueError) as exc:
                    raise CorpusFormatError(path, row_no, f"bad loss-curve row: {exc}") from exc
    else:
        for line_no, line in _iter_lines(path):
            obj = _parse_json_line(path, line_no, line)
            try:
                points.append((int(obj["step"]), float(obj["loss"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(path, line_no, f"bad loss-curve record: {exc}") from exc
    points.sort(key=lambda p: p[0])
    return LossCurve(name=curve_name, values=tuple(loss for _, loss in points))
