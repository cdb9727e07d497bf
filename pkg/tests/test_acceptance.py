"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass/fail lines.
Every tolerance and runtime budget is pinned here.
"""

import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from frameorder.analysis import LossCurve, high_freq_ratio, power_spectral_density
from frameorder.cli import EXIT_OK, main as cli_main
from frameorder.manifest import SCHEDULES
from frameorder.partition import QuadrantPartition, Thresholds, partition_quadrants
from frameorder.scheduler import (
    SShapeParams,
    build_ablation,
    build_frame,
    ideal_cumulative_takes,
    plan_merge,
    s_shape,
    verify_stage_constraints,
)
from frameorder.scorer import NgramModel, ScoredSample, compute_pd, ppl
from frameorder.corpus import SampleRecord

from oracles import brute_force_psd_matrix, exhaustive_balanced_threshold


@contextmanager
def criterion(number, description, budget_seconds):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {description}")
        raise
    elapsed = time.perf_counter() - start
    print(f"[PASS] criterion {number}: {description} ({elapsed:.2f}s, budget {budget_seconds:.0f}s)")
    assert elapsed < budget_seconds, f"criterion {number} exceeded its {budget_seconds}s budget"


def _scored(id, ppl_value, pd_value, tokens=1):
    return ScoredSample(id=id, token_count=tokens, ppl_strong=ppl_value, ppl_weak=1.0, pd=pd_value)


def _equal_partition(per_quadrant):
    labels = {}
    for q in ("Q1", "Q2", "Q3", "Q4"):
        for i in range(per_quadrant):
            labels[f"{q.lower()}-{i:04d}"] = q
    return QuadrantPartition(
        thresholds=Thresholds(ppl_split=1.0, pd_split_low_ppl=0.0, pd_split_high_ppl=0.0),
        labels=labels,
        token_totals={q: per_quadrant for q in ("Q1", "Q2", "Q3", "Q4")},
    )


def test_criterion_1_pd_formula():
    with criterion(1, "pd formula and scale invariance", budget_seconds=1.0):
        assert compute_pd(10.0, 7.0) == 0.3
        rng = random.Random(101)
        for _ in range(10_000):
            w = rng.uniform(0.1, 100.0)
            s = rng.uniform(0.1, 100.0)
            c = math.exp(rng.uniform(-10, 10))
            assert math.isclose(
                compute_pd(c * w, c * s), compute_pd(w, s), rel_tol=1e-12, abs_tol=1e-12
            )


def test_criterion_2_s_shape():
    with criterion(2, "s-shape identities and a=35 quarter point", budget_seconds=1.0):
        params = SShapeParams(a=35.0)
        assert s_shape(0.5, params) == 0.5
        rng = random.Random(202)
        for _ in range(1_000):
            p = rng.random()
            assert abs(s_shape(p, params) + s_shape(1.0 - p, params) - 1.0) <= 1e-12
        assert abs(s_shape(0.25, params) - 0.999841) <= 1e-6


def test_criterion_3_token_balance():
    with criterion(3, "token-balanced quadrants vs exhaustive split oracle", budget_seconds=30.0):
        rng = random.Random(303)
        checked_against_oracle = 0
        for case in range(1_000):
            if case % 20 == 0:
                n = rng.randint(2_000, 10_000)  # exercise the upper size range
            else:
                # floor of 16 keeps instances inside the partition's
                # "generic enough to split" precondition (a 4-sample corpus
                # can be dominated by one huge sample, which is a documented
                # degenerate-distribution error, covered by unit tests)
                n = int(math.exp(rng.uniform(math.log(16), math.log(2_000))))
            ppl_values = [rng.uniform(1.0, 100.0) for _ in range(n)]
            pd_values = [rng.uniform(-1.0, 1.0) for _ in range(n)]
            tokens = [rng.randint(1, 10_000) for _ in range(n)]
            scored = [
                _scored(f"s{i}", ppl_values[i], pd_values[i], tokens[i]) for i in range(n)
            ]
            part = partition_quadrants(scored)
            total = sum(tokens)
            max_tok = max(tokens)
            for q in ("Q1", "Q2", "Q3", "Q4"):
                assert abs(part.token_totals[q] - total / 4) <= max_tok, (case, q)
            if n <= 200:
                checked_against_oracle += 1
                pairs = list(zip(ppl_values, tokens))
                assert part.thresholds.ppl_split == exhaustive_balanced_threshold(pairs)
                low_pairs = [
                    (pd_values[i], tokens[i])
                    for i in range(n)
                    if ppl_values[i] <= part.thresholds.ppl_split
                ]
                high_pairs = [
                    (pd_values[i], tokens[i])
                    for i in range(n)
                    if ppl_values[i] > part.thresholds.ppl_split
                ]
                assert part.thresholds.pd_split_low_ppl == exhaustive_balanced_threshold(low_pairs)
                assert part.thresholds.pd_split_high_ppl == exhaustive_balanced_threshold(high_pairs)
        assert checked_against_oracle >= 100


def test_criterion_4_permutation_conservation():
    with criterion(4, "manifest ids are a permutation for every schedule", budget_seconds=30.0):
        rng = random.Random(404)
        for config in range(100):
            sizes = {q: rng.randint(1, 50) for q in ("Q1", "Q2", "Q3", "Q4")}
            labels = {}
            for q, count in sizes.items():
                for i in range(count):
                    labels[f"{q}-{config}-{i}"] = q
            part = QuadrantPartition(
                thresholds=Thresholds(1.0, 0.0, 0.0),
                labels=labels,
                token_totals={q: c for q, c in sizes.items()},
            )
            seed = rng.getrandbits(64)
            batch = rng.randint(1, 17)
            expected = sorted(labels)
            for schedule in SCHEDULES:
                manifest = build_ablation(part, schedule, batch, SShapeParams(a=35.0), seed)
                assert sorted(manifest.sample_ids()) == expected, (config, schedule)


def test_criterion_5_error_diffusion_bound():
    with criterion(5, "prefix deviation < 1 before source exhaustion", budget_seconds=10.0):
        rng = random.Random(505)
        for _ in range(400):
            n1 = rng.randint(0, 600)
            n2 = rng.randint(0, 600)
            if n1 + n2 == 0:
                continue
            batch = rng.randint(1, 40)
            params = SShapeParams(a=rng.choice([1.0, 5.0, 10.0, 35.0, 100.0]))
            plan = plan_merge(n1, n2, batch, params)
            ideal = ideal_cumulative_takes(n1, n2, batch, params)
            taken = 0
            for take, ci in zip(plan.d1_takes, ideal):
                scheduled = max(0, math.ceil(ci - 1e-9) - taken)
                if take != scheduled:
                    break  # drain or clamp fired: exhaustion regime begins
                taken += take
                assert abs(taken - ci) < 1.0


def test_criterion_6_stage_ordering():
    with criterion(6, "frame stage purity and ablation stage order", budget_seconds=10.0):
        part = _equal_partition(100)
        manifest = build_frame(part, batch_size=10, params=SShapeParams(a=35.0), seed=606)
        batches = manifest.batches
        assert len(batches) == 40
        tenth = len(batches) // 10
        first = [part.labels[i] for b in batches[:tenth] for i in b.sample_ids]
        last = [part.labels[i] for b in batches[-tenth:] for i in b.sample_ids]
        assert first.count("Q3") / len(first) >= 0.95
        assert last.count("Q2") / len(last) >= 0.95
        means = manifest.stage_mean_batch_index()
        assert means["Q3"] < means["Q4"] < means["Q1"] < means["Q2"]
        for schedule, first_stage, second_stage in (
            ("two_stage_ppl_h2l", "ppl_high", "ppl_low"),
            ("two_stage_ppl_l2h", "ppl_low", "ppl_high"),
            ("two_stage_pd_l2h", "pd_low", "pd_high"),
            ("two_stage_pd_h2l", "pd_high", "pd_low"),
        ):
            ablation = build_ablation(part, schedule, 10, SShapeParams(a=35.0), 606)
            ab_means = ablation.stage_mean_batch_index()
            assert ab_means[first_stage] < ab_means[second_stage], schedule


def test_criterion_7_constraint_verification():
    with criterion(7, "stage constraints with one intentional pd break", budget_seconds=5.0):
        part = _equal_partition(100)
        manifest = build_frame(part, batch_size=10, params=SShapeParams(a=35.0), seed=707)
        report = verify_stage_constraints(manifest, part)
        by_boundary = {(b.from_stage, b.to_stage): b for b in report.boundaries}
        assert by_boundary[("Q3", "Q4")].ppl_status == "satisfied"
        assert by_boundary[("Q3", "Q4")].pd_status == "satisfied"
        assert by_boundary[("Q1", "Q2")].ppl_status == "satisfied"
        assert by_boundary[("Q1", "Q2")].pd_status == "satisfied"
        assert by_boundary[("Q4", "Q1")].pd_status == "broken"
        assert report.intentional_breaks == [("Q4->Q1", "pd")]


def test_criterion_8_spectral_oracle():
    with criterion(8, "fft psd vs direct dft, parseval, ratio behavior", budget_seconds=30.0):
        rng = np.random.default_rng(808)
        for n in range(2, 1025):
            values = rng.uniform(-2.0, 2.0, size=n)
            curve = LossCurve(name=f"n{n}", values=tuple(values))
            psd = power_spectral_density(curve)
            oracle = brute_force_psd_matrix(values)
            scale = max(float(oracle.max()), 1e-30)
            assert np.allclose(psd, oracle, rtol=1e-9, atol=scale * 1e-12), n
            doubled = psd.copy()
            last_interior = len(psd) - 1 if n % 2 else len(psd) - 2
            doubled[1 : last_interior + 1] *= 2.0
            energy = float(np.sum(values * values))
            assert abs(doubled.sum() - energy) <= 1e-9 * max(energy, 1.0), n

        constant = power_spectral_density(LossCurve(name="c", values=(3.0,) * 64))
        assert high_freq_ratio(constant, 0.1) == 0.0

        n = 256
        high_sine = [math.sin(2 * math.pi * 100 * t / n) for t in range(n)]
        psd_high = power_spectral_density(LossCurve(name="hs", values=tuple(high_sine)))
        assert abs(high_freq_ratio(psd_high, 0.5) - 1.0) <= 1e-6

        for trial in range(20):
            base = rng.uniform(0.5, 2.0) * np.exp(-np.arange(n) / rng.uniform(30, 120)) + 1.0
            noise = 0.2 * np.sin(2 * np.pi * 110 * np.arange(n) / n)
            r_plain = high_freq_ratio(
                power_spectral_density(LossCurve(name="p", values=tuple(base))), 0.1
            )
            r_noisy = high_freq_ratio(
                power_spectral_density(LossCurve(name="q", values=tuple(base + noise))), 0.1
            )
            assert r_noisy > r_plain, trial


def test_criterion_9_pipeline_determinism(tmp_path):
    with criterion(9, "demo pipeline reruns byte-identically", budget_seconds=10.0):
        outputs = []
        for run in ("one", "two"):
            out = tmp_path / run
            code = cli_main(
                ["pipeline", "--corpus", "demo", "-o", str(out), "--seed", "909", "--no-figures"]
            )
            assert code == EXIT_OK
            outputs.append(out)
        for artifact in ("scores.jsonl", "partition.jsonl", "manifest.jsonl"):
            a = (outputs[0] / artifact).read_bytes()
            b = (outputs[1] / artifact).read_bytes()
            assert a == b, artifact


def test_criterion_10_uniform_model_perplexity():
    with criterion(10, "uniform-model perplexity equals vocabulary size", budget_seconds=1.0):
        sample = SampleRecord(
            id="x", token_count=6, text="any text at all works here"
        )
        for vocab_size in (2, 10, 1000):
            model = NgramModel.uniform(vocab_size)
            assert ppl(model, sample) == pytest.approx(vocab_size, rel=1e-9)
