"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. The suite favors
direction-of-effect and property checks; the long-running population
searches use the exact hyperparameters the criteria state.
"""

import time

import numpy as np
import pytest
from scipy.special import gammaincinv

from evoimage import (
    EvolveConfig,
    Image,
    TransformSpec,
    apply_transform,
    brisque_features,
    content_hash,
    degrade,
    evolve,
    external_score,
    fit_aggd,
    init_population,
    epoch_step,
    noise_variance,
    parse_trace,
    replay,
    serialize_trace,
    ssim,
    stack_weighted,
    synthetic_image,
    to_luma,
    tv_denoise,
)
from evoimage.errors import ScorerProcessError, ScorerTimeout
from evoimage.iqa import ScorerConfig, make_scorer
from oracles import brisque_features_ref, ssim_ref
from test_transforms import DEHAZE_GOLDEN, GOLDEN, foggy_ramp
from conftest import pattern_image, pattern_image_b


@pytest.fixture(scope="module")
def hundred_runs():
    """100 seeded searches at P=6, E=15 on 64x64 scenes, with per-epoch
    best-fitness history. Shared by criteria 1 and 3."""
    results = []
    start = time.perf_counter()
    for run in range(100):
        img = synthetic_image(run % 10, (64, 64))
        cfg = EvolveConfig(population_size=6, epochs=15, min_ssim=0.5, seed=run)
        scorer = make_scorer(cfg.scorer)
        rng = np.random.default_rng(cfg.seed)
        pop = init_population(img, cfg, rng, scorer)
        baseline = pop.members[0]
        history = [pop.best_fitness()]
        for _ in range(cfg.epochs):
            pop = epoch_step(pop, img, cfg, rng, scorer)
            history.append(pop.best_fitness())
        best = pop.best()
        if best.ssim_to_initial < cfg.min_ssim or best.fitness < baseline.fitness:
            best = baseline
        results.append(
            {"history": history, "baseline": baseline.fitness, "best": best}
        )
    return results, time.perf_counter() - start


def test_criterion_1_elitism_monotonicity(hundred_runs):
    results, elapsed = hundred_runs
    assert len(results) == 100
    violations = 0
    for r in results:
        h = r["history"]
        if any(h[i + 1] < h[i] for i in range(len(h) - 1)):
            violations += 1
        if r["best"].fitness < r["baseline"]:
            violations += 1
    assert violations == 0
    assert elapsed < 120.0, f"runtime budget exceeded: {elapsed:.1f}s"
    print(f"\nACCEPTANCE 1 PASS: fitness monotone and >= baseline over 100 runs "
          f"({elapsed:.1f}s)")


def test_criterion_2_determinism_and_replay():
    mismatches = 0
    for run in range(20):
        img = synthetic_image(300 + run, (64, 64))
        if run % 2:
            img = degrade(img, "fog", 0.3)
        cfg = EvolveConfig(population_size=8, epochs=10, min_ssim=0.5, seed=run)
        best, trace = evolve(img, cfg)
        rebuilt = parse_trace(serialize_trace(trace))
        out = replay(img, rebuilt, verify=True)  # raises on hash mismatch
        if content_hash(out) != content_hash(best.image):
            mismatches += 1
    assert mismatches == 0
    print("\nACCEPTANCE 2 PASS: 20 serialize/parse/replay round-trips byte-identical")


def test_criterion_3_ssim_guard(hundred_runs):
    results, _ = hundred_runs
    violations = sum(
        1
        for r in results
        if r["best"].ssim_to_initial < 0.5 and r["best"].sequence != ()
    )
    assert violations == 0
    print("\nACCEPTANCE 3 PASS: every returned best has ssim >= 0.5 or is the baseline")


def _direction_of_effect(kind: str, strength: float):
    improved = 0
    befores, afters, walls = [], [], []
    for i in range(20):
        img = synthetic_image(400 + i, (128, 128))
        degraded = degrade(img, kind, strength, seed=900 + i)
        cfg = EvolveConfig(population_size=20, epochs=50, min_ssim=0.5, seed=i)
        t0 = time.perf_counter()
        _, trace = evolve(degraded, cfg)
        walls.append(time.perf_counter() - t0)
        befores.append(trace.scores.raw_before)
        afters.append(trace.scores.raw_after)
        improved += trace.scores.raw_after < trace.scores.raw_before
    return improved, float(np.mean(befores)), float(np.mean(afters)), max(walls)


def test_criterion_4_direction_of_effect_fog_and_blur():
    for kind, strength in (("fog", 0.4), ("blur", 2.0)):
        improved, mean_before, mean_after, worst_wall = _direction_of_effect(
            kind, strength
        )
        assert improved >= 16, f"{kind}: only {improved}/20 improved"
        assert mean_after < mean_before, f"{kind}: mean did not improve"
        assert worst_wall <= 30.0, f"{kind}: {worst_wall:.1f}s/image"
        print(f"\nACCEPTANCE 4 PASS ({kind}): {improved}/20 improved, "
              f"mean {mean_before:.2f} -> {mean_after:.2f}, "
              f"max {worst_wall:.1f}s/image")


def test_criterion_5_noise_reduction_direction():
    before, after = [], []
    for i in range(20):
        img = synthetic_image(500 + i, (128, 128))
        noisy = degrade(img, "noise", 0.05, seed=700 + i)
        cfg = EvolveConfig(population_size=20, epochs=50, min_ssim=0.5, seed=i)
        _, trace = evolve(noisy, cfg)
        before.append(trace.scores.noise_sigma_before)
        after.append(trace.scores.noise_sigma_after)
    mean_before = float(np.mean(before))
    mean_after = float(np.mean(after))
    assert mean_after < mean_before
    print(f"\nACCEPTANCE 5 PASS: mean noise sigma {mean_before:.4f} -> {mean_after:.4f}")


def _aggd_samples(alpha, beta_l, beta_r, n, seed):
    rng = np.random.default_rng(seed)
    side = rng.random(n)
    u = rng.random(n)
    magnitude = gammaincinv(1.0 / alpha, u) ** (1.0 / alpha)
    p_left = beta_l / (beta_l + beta_r)
    return np.where(side < p_left, -beta_l * magnitude, beta_r * magnitude)


def test_criterion_6_iqa_numerics():
    # (a) ssim identity and windowed-oracle agreement on 5 fixed pairs
    for seed in range(5):
        img = synthetic_image(600 + seed, (48, 48))
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-9)
        other = degrade(img, "noise", 0.04, seed=seed)
        ref = ssim_ref(to_luma(img).data[:, :, 0], to_luma(other).data[:, :, 0])
        assert ssim(img, other) == pytest.approx(ref, abs=1e-4)

    # (b) shape recovery within 10% for alpha in {1, 1.5, 2}
    rng = np.random.default_rng(610)
    laplace = rng.laplace(0.0, 1.0, 100_000)
    assert fit_aggd(laplace)[0] == pytest.approx(1.0, rel=0.10)
    asym = _aggd_samples(1.5, 1.0, 2.0, 100_000, seed=611)
    assert fit_aggd(asym)[0] == pytest.approx(1.5, rel=0.10)
    gauss = np.random.default_rng(612).normal(0.0, 1.0, 100_000)
    assert fit_aggd(gauss)[0] == pytest.approx(2.0, rel=0.10)

    # (c) injected noise sigma recovered
    noisy = np.clip(
        0.5 + np.random.default_rng(613).normal(0.0, 0.05, (128, 128)), 0.0, 1.0
    )
    estimate = noise_variance(Image(noisy))
    assert 0.04 <= estimate <= 0.06

    # (d) feature pipeline matches the brute-force oracle per component
    for seed in (614, 615, 616):
        luma = to_luma(synthetic_image(seed, (64, 64)))
        got = brisque_features(luma)
        ref = np.array(brisque_features_ref(luma.data[:, :, 0]))
        assert np.abs(got - ref).max() < 1e-4
    print("\nACCEPTANCE 6 PASS: ssim/aggd/noise/feature numerics within tolerance")


def test_criterion_7_transform_golden_suite(natural_64):
    img, init = pattern_image(), pattern_image_b()
    for op, (params, expected) in GOLDEN.items():
        out = apply_transform(TransformSpec(op, params), img, init)
        assert content_hash(out) == expected, op
    params, expected = DEHAZE_GOLDEN
    hazy = foggy_ramp()
    assert content_hash(apply_transform(TransformSpec("dehaze", params), hazy, hazy)) == expected

    # identity parameters return inputs exactly
    gamma_out = apply_transform(TransformSpec("gamma", {"g": 1.0}), img, init)
    assert np.array_equal(gamma_out.data, img.data)
    assert np.array_equal(stack_weighted(img, init, 1.0).data, img.data)
    assert np.array_equal(stack_weighted(img, init, 0.0).data, init.data)
    y = to_luma(natural_64[0])
    from evoimage import sharpen

    assert np.array_equal(sharpen(y, 0.0).data, y.data)
    assert np.array_equal(tv_denoise(y, 0.0).data, y.data)
    print("\nACCEPTANCE 7 PASS: all 17 golden hashes match; identity params exact")


def test_criterion_8_external_scorer_protocol():
    import sys

    img = Image(np.full((16, 16, 3), 0.5))
    ok = external_score(
        img, ScorerConfig(kind="external", command="echo 5.0", timeout=10.0,
                          orientation="higher_better")
    )
    assert ok.value == 5.0
    with pytest.raises(ScorerProcessError):
        external_score(
            img,
            ScorerConfig(kind="external",
                         command=f'{sys.executable} -c "import sys; sys.exit(1)"',
                         timeout=10.0, orientation="higher_better"),
        )
    with pytest.raises(ScorerTimeout):
        external_score(
            img,
            ScorerConfig(kind="external",
                         command=f'{sys.executable} -c "import time; time.sleep(30)"',
                         timeout=0.5, orientation="higher_better"),
        )
    print("\nACCEPTANCE 8 PASS: echo/failing/timeout scorers conform")
