"""Population search over ordered transform sequences.

The loop keeps P candidates. Every epoch produces three children — the
best member mutated, a random member mutated, and a random member stacked
with the initial image — then culls the three lowest-fitness members.
Fitness is the scorer value normalized so that higher is better, with a
large subtractive penalty when structural similarity to the initial image
drops below the configured threshold. Keeping an unmodified clone in the
initial population guarantees the search never returns something worse
than doing nothing.

All randomness flows through one seeded generator in a fixed draw order,
so a (image, config) pair fully determines the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EvoImageError
from .image import Image, content_hash, to_luma
from .iqa import (
    HIGHER_BETTER,
    QualityScore,
    Scorer,
    ScorerConfig,
    make_scorer,
    noise_variance,
    ssim,
)
from .trace import Trace, TraceScores, trace_config_from_evolve
from .transforms import REGISTRY, TransformSpec, apply_transform, registry_ops

__all__ = [
    "EvolveConfig",
    "Individual",
    "Population",
    "canonical_fitness",
    "random_transform",
    "init_population",
    "epoch_step",
    "evolve",
    "render_sequence",
    "SSIM_PENALTY",
    "FAILED_FITNESS",
]

SSIM_PENALTY = 1e6
FAILED_FITNESS = -1e9

# Mutations draw uniformly from every registry op except stack_initial,
# which only the dedicated stacking child emits.
MUTATION_OPS = tuple(op for op in registry_ops() if op != "stack_initial")
_STACK_RANGE = tuple(
    (p.lo, p.hi) for p in REGISTRY["stack_initial"].params if p.name == "weight"
)[0]


@dataclass(frozen=True)
class EvolveConfig:
    """Search hyperparameters; defaults follow the P=20/E=50/T=0.5 setup."""

    population_size: int = 20
    epochs: int = 50
    min_ssim: float = 0.5
    seed: int = 0
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    max_sequence_len: int = 25

    def validate(self) -> None:
        if self.population_size < 2:
            raise ConfigError("population_size must be >= 2")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not 0.0 <= self.min_ssim <= 1.0:
            raise ConfigError("min_ssim must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.max_sequence_len < 1:
            raise ConfigError("max_sequence_len must be >= 1")
        self.scorer.validate()


@dataclass(frozen=True)
class Individual:
    """A candidate: transform sequence, its rendered image, and its scores."""

    sequence: tuple[TransformSpec, ...]
    image: Image
    raw_score: QualityScore
    ssim_to_initial: float
    fitness: float


@dataclass
class Population:
    members: list[Individual]

    def best(self) -> Individual:
        # Ties prefer shorter sequences, then earlier insertion.
        best_i = 0
        for i in range(1, len(self.members)):
            a, b = self.members[i], self.members[best_i]
            if a.fitness > b.fitness or (
                a.fitness == b.fitness and len(a.sequence) < len(b.sequence)
            ):
                best_i = i
        return self.members[best_i]

    def best_fitness(self) -> float:
        return max(m.fitness for m in self.members)


def canonical_fitness(score: QualityScore, ssim_val: float, threshold: float) -> float:
    """Orientation-normalized score minus the similarity penalty.

    Higher is always better; candidates below the SSIM threshold lose 1e6,
    which dominates both the 0-100 and 0-10 metric scales.
    """
    base = score.value if score.orientation == HIGHER_BETTER else -score.value
    if ssim_val < threshold:
        base -= SSIM_PENALTY
    return base


def random_transform(
    rng: np.random.Generator, current_len: int = 0, max_len: int = 25
) -> TransformSpec:
    """Draw a mutation step: uniform op, uniform parameters in range.

    Integer parameters are uniform over their lattice. The sequence
    lengths are accepted for symmetry with the callers, which handle the
    append-vs-replace decision at the cap.
    """
    if max_len < 1:
        raise ConfigError("max_len must be >= 1")
    op = MUTATION_OPS[int(rng.integers(len(MUTATION_OPS)))]
    params = {}
    for p in REGISTRY[op].params:
        if p.integer:
            params[p.name] = float(rng.integers(int(p.lo), int(p.hi) + 1))
        else:
            params[p.name] = float(rng.uniform(p.lo, p.hi))
    return TransformSpec(op, params)


def render_sequence(initial: Image, sequence) -> Image:
    """Re-render a transform sequence from scratch against `initial`."""
    img = initial
    for spec in sequence:
        img = apply_transform(spec, img, initial)
    return img


def _evaluate(
    sequence: tuple[TransformSpec, ...],
    image: Image,
    initial: Image,
    scorer: Scorer,
    threshold: float,
) -> Individual:
    raw = scorer.score(image)
    sim = 1.0 if image is initial else ssim(image, initial)
    return Individual(sequence, image, raw, sim, canonical_fitness(raw, sim, threshold))


def _failed(parent: Individual, sequence) -> Individual:
    # A child whose transform or scoring failed: keep the parent's render so
    # the record stays replayable, flag it for immediate culling.
    return Individual(
        tuple(sequence), parent.image, parent.raw_score, parent.ssim_to_initial, FAILED_FITNESS
    )


def _make_child(
    parent: Individual,
    step: TransformSpec,
    initial: Image,
    config: EvolveConfig,
    scorer: Scorer,
) -> Individual:
    if len(parent.sequence) < config.max_sequence_len:
        sequence = parent.sequence + (step,)
        try:
            image = apply_transform(step, parent.image, initial)
            return _evaluate(sequence, image, initial, scorer, config.min_ssim)
        except EvoImageError:
            return _failed(parent, sequence)
    # At the cap the mutation replaces the final step, which needs a full
    # re-render because the cached parent image includes the old step.
    sequence = parent.sequence[:-1] + (step,)
    try:
        image = render_sequence(initial, sequence)
        return _evaluate(sequence, image, initial, scorer, config.min_ssim)
    except EvoImageError:
        return _failed(parent, sequence)


def init_population(
    initial: Image,
    config: EvolveConfig,
    rng: np.random.Generator,
    scorer: Scorer | None = None,
) -> Population:
    """P members: index 0 is the untouched clone, the rest each get one
    random transform with probability 1/2."""
    if scorer is None:
        scorer = make_scorer(config.scorer)
    baseline = _evaluate((), initial, initial, scorer, config.min_ssim)
    members = [baseline]
    for _ in range(config.population_size - 1):
        if rng.random() < 0.5:
            step = random_transform(rng, 0, config.max_sequence_len)
            members.append(_make_child(baseline, step, initial, config, scorer))
        else:
            members.append(baseline)
    return Population(members)


def epoch_step(
    pop: Population,
    initial: Image,
    config: EvolveConfig,
    rng: np.random.Generator,
    scorer: Scorer | None = None,
) -> Population:
    """One generation: add three children, cull the three worst.

    Draw order is fixed (A's transform, B's parent, B's transform, C's
    parent, C's stack weight) so results never depend on evaluation order.
    A child whose transform or scorer raises gets fitness -1e9 instead of
    aborting the run.
    """
    if scorer is None:
        scorer = make_scorer(config.scorer)
    members = list(pop.members)
    p = len(members)

    step_a = random_transform(rng, 0, config.max_sequence_len)
    idx_b = int(rng.integers(p))
    step_b = random_transform(rng, 0, config.max_sequence_len)
    idx_c = int(rng.integers(p))
    weight_c = float(rng.uniform(*_STACK_RANGE))

    best = Population(members).best()
    children = [
        _make_child(best, step_a, initial, config, scorer),
        _make_child(members[idx_b], step_b, initial, config, scorer),
        _make_child(
            members[idx_c],
            TransformSpec("stack_initial", {"weight": weight_c}),
            initial,
            config,
            scorer,
        ),
    ]
    members.extend(children)

    # Cull the 3 lowest-fitness members; ties drop longer sequences first,
    # then earlier-inserted members.
    order = sorted(
        range(len(members)),
        key=lambda i: (members[i].fitness, -len(members[i].sequence), i),
    )
    drop = set(order[:3])
    survivors = [m for i, m in enumerate(members) if i not in drop]
    return Population(survivors)


def evolve(
    initial: Image,
    config: EvolveConfig,
    scorer: Scorer | None = None,
) -> tuple[Individual, Trace]:
    """Run the full search and return the best candidate plus its trace.

    The result is never worse than the untouched input: the baseline clone
    seeds the population and elitist culling keeps max fitness monotone.
    If every surviving member violates the similarity guard (possible only
    with extreme external-scorer scales), the baseline itself is returned.
    """
    config.validate()
    if scorer is None:
        scorer = make_scorer(config.scorer)
    rng = np.random.default_rng(config.seed)
    pop = init_population(initial, config, rng, scorer)
    baseline = pop.members[0]
    for _ in range(config.epochs):
        pop = epoch_step(pop, initial, config, rng, scorer)
    best = pop.best()
    if best.ssim_to_initial < config.min_ssim or best.fitness < baseline.fitness:
        best = baseline
    trace = build_trace(initial, baseline, best, config)
    return best, trace


def build_trace(
    initial: Image,
    baseline: Individual,
    best: Individual,
    config: EvolveConfig,
) -> Trace:
    noise_before = noise_variance(to_luma(initial))
    noise_after = (
        noise_before if best.image is initial else noise_variance(to_luma(best.image))
    )
    return Trace(
        format_version=1,
        source_hash=content_hash(initial),
        seed=config.seed,
        config=trace_config_from_evolve(
            config.population_size,
            config.epochs,
            config.min_ssim,
            config.scorer.kind,
            config.scorer.eval_downscale,
        ),
        steps=best.sequence,
        result_hash=content_hash(best.image),
        scores=TraceScores(
            raw_before=baseline.raw_score.value,
            raw_after=best.raw_score.value,
            ssim_final=best.ssim_to_initial,
            noise_sigma_before=noise_before,
            noise_sigma_after=noise_after,
        ),
    )
