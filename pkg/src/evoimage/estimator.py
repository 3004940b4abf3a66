"""Scikit-learn style front end for the evolutionary enhancer.

fit() runs the search against one image and learns a transform sequence;
transform() replays that sequence on any image of the same channel
count. get_params/set_params follow the sklearn contract so the class
works with clone() and pipeline tooling without importing sklearn.
"""

from __future__ import annotations

import inspect

import numpy as np

from .evolve import EvolveConfig, canonical_fitness, evolve, render_sequence
from .image import Image
from .iqa import ScorerConfig, make_scorer, ssim
from .validation import as_image, check_is_fitted

__all__ = ["EvolutionaryEnhancer"]


class EvolutionaryEnhancer:
    """Improve an image by evolutionary search over transform sequences.

    Parameters mirror the search configuration: population size, epoch
    count, the minimum structural similarity to the input, the scorer
    choice, and the seed. After fit(), the learned recipe is available as
    ``steps_`` and the full provenance record as ``trace_``.

    Example
    -------
    >>> enhancer = EvolutionaryEnhancer(population_size=6, epochs=10, seed=7)
    >>> enhanced = enhancer.fit_transform(pixels)   # (h, w, 3) floats in [0, 1]
    """

    def __init__(
        self,
        population_size: int = 20,
        epochs: int = 50,
        min_ssim: float = 0.5,
        max_steps: int = 25,
        scorer: str = "brisque",
        scorer_command: str | None = None,
        scorer_timeout: float = 30.0,
        scorer_orientation: str | None = None,
        eval_downscale: int | None = None,
        seed: int = 0,
    ):
        self.population_size = population_size
        self.epochs = epochs
        self.min_ssim = min_ssim
        self.max_steps = max_steps
        self.scorer = scorer
        self.scorer_command = scorer_command
        self.scorer_timeout = scorer_timeout
        self.scorer_orientation = scorer_orientation
        self.eval_downscale = eval_downscale
        self.seed = seed

    # -- sklearn plumbing ---------------------------------------------------

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [n for n in sig.parameters if n != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}"
                )
            setattr(self, name, value)
        return self

    # -- configuration ------------------------------------------------------

    def _scorer_config(self) -> ScorerConfig:
        if self.scorer == "brisque":
            kind, orientation = "brisque_builtin", "lower_better"
        elif self.scorer == "external":
            kind = "external"
            orientation = self.scorer_orientation or "higher_better"
        else:
            kind, orientation = self.scorer, self.scorer_orientation or "lower_better"
        return ScorerConfig(
            kind=kind,
            command=self.scorer_command,
            timeout=self.scorer_timeout,
            orientation=orientation,
            eval_downscale=self.eval_downscale,
        )

    def _config(self) -> EvolveConfig:
        return EvolveConfig(
            population_size=self.population_size,
            epochs=self.epochs,
            min_ssim=self.min_ssim,
            seed=self.seed,
            scorer=self._scorer_config(),
            max_sequence_len=self.max_steps,
        )

    # -- estimator API ------------------------------------------------------

    def fit(self, X, y=None):
        """Search for an improving transform sequence on one image.

        X is an Image or an (h, w[, 3]) float array in [0, 1].
        """
        img = as_image(X)
        best, trace = evolve(img, self._config())
        self.steps_ = best.sequence
        self.trace_ = trace
        self.best_image_ = best.image
        self.score_before_ = trace.scores.raw_before
        self.score_after_ = trace.scores.raw_after
        self.ssim_to_initial_ = best.ssim_to_initial
        return self

    def transform(self, X):
        """Replay the learned sequence on X (X plays the initial-image role)."""
        check_is_fitted(self, "steps_")
        img = as_image(X)
        out = render_sequence(img, self.steps_)
        if isinstance(X, Image):
            return out
        return np.asarray(out.data)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)

    def score(self, X) -> float:
        """Configured quality score of X, normalized so higher is better."""
        img = as_image(X)
        raw = make_scorer(self._scorer_config()).score(img)
        return canonical_fitness(raw, 1.0, 0.0)

    def similarity(self, X) -> float:
        """SSIM between X and the fitted result."""
        check_is_fitted(self, "best_image_")
        return ssim(as_image(X), self.best_image_)
