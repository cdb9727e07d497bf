"""frameorder: offline curriculum ordering for pretraining corpora.

Scores each document with a weak/strong reference-model perplexity pair,
partitions the corpus into four token-balanced quadrants on the ppl/pd plane,
and emits a deterministic batch manifest that trains high-ppl data before
low-ppl data and low-pd data before high-pd data within each half, with
smooth S-shaped stage transitions.
"""

from .analysis import (
    DistributionReport,
    LossCurve,
    SpectralReport,
    compare_smoothness,
    distribution_stats,
    high_freq_ratio,
    load_loss_curve,
    power_spectral_density,
    spectral_report,
)
from .corpus import (
    Corpus,
    SampleRecord,
    ScoreRecord,
    count_tokens,
    load_corpus,
    load_scores,
    write_corpus,
    write_scores,
)
from .errors import FrameOrderError
from .manifest import (
    SCHEDULES,
    STAGE_ORDER,
    Batch,
    OrderedManifest,
    read_manifest,
    write_manifest,
)
from .partition import (
    QuadrantPartition,
    Thresholds,
    TwoWaySplit,
    find_token_balanced_threshold,
    partition_quadrants,
    read_partition_report,
    two_way_partition,
    write_partition_report,
)
from .scheduler import (
    MergePlan,
    SShapeParams,
    StageConstraintReport,
    build_ablation,
    build_frame,
    merge_datasets,
    plan_merge,
    s_shape,
    verify_stage_constraints,
)
from .scorer import (
    NgramModel,
    ScoredSample,
    attach_external_scores,
    compute_pd,
    ppl,
    score_corpus,
    train_ngram,
)

__version__ = "0.1.0"
