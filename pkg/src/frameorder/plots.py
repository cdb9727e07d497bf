"""Figure rendering for analysis reports.

Every report the analyze path emits as JSONL/CSV also gets a PNG next to it:
metric histograms per group, loss curves with their spectra, the smoothness
ranking, and the realized stage composition of a manifest.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import DistributionReport, LossCurve, SpectralReport
from .manifest import OrderedManifest, STAGE_ORDER

_STAGE_COLORS = {
    "Q1": "tab:green",
    "Q2": "tab:red",
    "Q3": "tab:blue",
    "Q4": "tab:orange",
    "ppl_low": "tab:green",
    "ppl_high": "tab:blue",
    "pd_low": "tab:green",
    "pd_high": "tab:red",
    "random": "tab:gray",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_distributions(reports: Sequence[DistributionReport], path) -> Path:
    """Step histograms of one metric, one line per group."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    metric = reports[0].metric if reports else "metric"
    for rep in reports:
        edges = [edge for edge, _ in rep.histogram]
        counts = [count for _, count in rep.histogram]
        ax.step(edges, counts, where="post", label=f"{rep.group_key} (n={rep.sample_count})")
        ax.axvline(rep.mean, linestyle=":", linewidth=0.8, color=ax.lines[-1].get_color())
    ax.set_xlabel(metric)
    ax.set_ylabel("samples")
    ax.set_title(f"{metric} distribution by group")
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_spectra(
    curves: Sequence[LossCurve], reports: Sequence[SpectralReport], path
) -> Path:
    """Loss curves and their one-sided spectra with the cutoff marked."""
    fig, (ax_curve, ax_psd) = plt.subplots(1, 2, figsize=(10, 4))
    by_name = {c.name: c for c in curves}
    for rep in reports:
        curve = by_name.get(rep.name)
        if curve is not None:
            ax_curve.plot(curve.values, label=rep.name, linewidth=0.9)
        psd = np.asarray(rep.psd)
        k_max = max(len(psd) - 1, 1)
        freq = np.arange(len(psd)) / k_max
        positive = psd > 0
        ax_psd.semilogy(freq[positive], psd[positive], label=f"{rep.name} (R={rep.high_freq_ratio:.2e})", linewidth=0.9)
    if reports:
        ax_psd.axvline(reports[0].cutoff_fraction, color="k", linestyle="--", linewidth=0.8, label="cutoff")
    ax_curve.set_xlabel("step")
    ax_curve.set_ylabel("loss")
    ax_curve.set_title("loss curves")
    ax_curve.legend(fontsize=8)
    ax_psd.set_xlabel("frequency (fraction of Nyquist)")
    ax_psd.set_ylabel("PSD")
    ax_psd.set_title("power spectral density")
    ax_psd.legend(fontsize=8)
    return _save(fig, path)


def render_smoothness(reports: Sequence[SpectralReport], path) -> Path:
    """Bar chart of high-frequency energy ratios, smoothest first."""
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [r.name for r in reports]
    ratios = [r.high_freq_ratio for r in reports]
    ax.bar(range(len(names)), ratios, color="tab:blue")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("high-frequency energy ratio R")
    ax.set_title("loss-curve smoothness (lower is smoother)")
    return _save(fig, path)


def render_stage_composition(manifest: OrderedManifest, path) -> Path:
    """Stacked per-batch stage fractions: the realized transition curves."""
    stages = [s for s in STAGE_ORDER[manifest.schedule]]
    n_batches = len(manifest.batches)
    fractions = np.zeros((len(stages), n_batches))
    for j, batch in enumerate(manifest.batches):
        size = len(batch.sample_ids)
        for i, stage in enumerate(stages):
            fractions[i, j] = batch.source_counts.get(stage, 0) / size
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.stackplot(
        np.arange(n_batches),
        fractions,
        labels=stages,
        colors=[_STAGE_COLORS.get(s, "tab:gray") for s in stages],
        alpha=0.85,
    )
    ax.set_xlabel("batch index")
    ax.set_ylabel("stage fraction of batch")
    ax.set_ylim(0, 1)
    ax.set_title(f"stage composition ({manifest.schedule}, N={manifest.batch_size})")
    ax.legend(loc="center right", fontsize=8)
    return _save(fig, path)
