"""Constructive check that a part-aligned image cannot align perfectly.

Under a linear image encoder f, if an input splits as x = x1 + x2 with
cos(f(x1), g_y) = 1, cos(f(x2), g_y) strictly below 1, and x1, x2 linearly
independent, then cos(f(x), g_y) is strictly below 1. A strict inequality
is unfalsifiable at machine precision, so constructed instances enforce
quantitative margins:

* ``cos(f(x2), g_y) <= cos2_max`` with ``cos2_max <= 0.99``;
* x1 is rescaled so ``||f(x1)|| = 1`` and x2 so ``||f(x2)||`` lies in
  [0.5, 2] (positive rescaling changes no cosine and no independence);
* ``||x1||, ||x2|| >= min_component_norm``;
* the stacked pair [x1; x2] keeps a singular value ratio of at least 1e-6.

With a = ||f(x1)|| = 1 and b = ||f(x2)|| in [0.5, 2] the verified cosine is
(1 + b*cos_t) / hypot(1 + b*cos_t, b*sin_t), whose gap below 1 is at least
(b*sin_t)^2 / (2*(1+b)^2) > 1e-4 for cos_t <= 0.99, so asserting
``< 1 - 1e-9`` in float64 is sound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import LinearEncoder
from .errors import ConfigError, ConstructionError, DomainError
from .vecmath import cosine

INDEPENDENCE_RATIO = 1e-6
RESIDUAL_TOL = 1e-8
DEFAULT_NORM_FLOOR = 0.1
RESAMPLE_BUDGET = 1000


@dataclass(frozen=True)
class TheoremInstance:
    """A synthetic encoder with a perfectly aligned part and an imperfect part."""

    encoder: LinearEncoder
    g_y: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    cos2_max: float
    min_component_norm: float

    def validate(self) -> None:
        f1 = self.encoder(self.x1)
        f2 = self.encoder(self.x2)
        if abs(cosine(f1, self.g_y) - 1.0) > 1e-9:
            raise DomainError("x1 is not perfectly aligned with g_y")
        if cosine(f2, self.g_y) > self.cos2_max:
            raise DomainError("x2 exceeds its alignment bound")
        if (
            np.linalg.norm(self.x1) < self.min_component_norm
            or np.linalg.norm(self.x2) < self.min_component_norm
        ):
            raise DomainError("a component is below the norm floor")
        if independence_ratio(self.x1, self.x2) < INDEPENDENCE_RATIO:
            raise DomainError("x1 and x2 are not sufficiently independent")


def independence_ratio(x1, x2) -> float:
    """Smallest over largest singular value of the stacked pair."""
    s = np.linalg.svd(np.stack([x1, x2]), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def construct_instance(
    rng: np.random.Generator,
    d_in: int,
    d_out: int,
    cos2_max: float,
    min_component_norm: float = DEFAULT_NORM_FLOOR,
    matrix=None,
    g_y=None,
) -> TheoremInstance:
    """Sample a valid instance; resamples until every margin holds.

    ``matrix`` and ``g_y`` pin the encoder and target for deterministic
    cases; by default both are drawn fresh whenever a candidate fails.
    """
    if d_in < 2 or d_out < 2:
        raise ConfigError("d_in and d_out must both be >= 2")
    if not (-1.0 <= cos2_max <= 0.99):
        raise ConfigError(f"cos2_max must lie in [-1, 0.99], got {cos2_max}")

    failures = {"encoder": 0, "cos2": 0, "norm_floor": 0, "independence": 0}
    budget = RESAMPLE_BUDGET

    encoder = None
    g = None
    x1 = None
    while budget > 0:
        budget -= 1
        if encoder is None:
            a = np.asarray(matrix, dtype=np.float64) if matrix is not None else rng.normal(
                size=(d_out, d_in)
            )
            sv = np.linalg.svd(a, compute_uv=False)
            if sv[-1] < 1e-3 * sv[0]:
                failures["encoder"] += 1
                continue
            if g_y is not None:
                g_cand = np.asarray(g_y, dtype=np.float64)
            else:
                # The target must lie in the encoder's range, or no input can
                # align with it perfectly; draw it as the image of a random input.
                g_cand = a @ rng.normal(size=d_in)
            g_norm = np.linalg.norm(g_cand)
            if g_norm == 0.0:
                failures["encoder"] += 1
                continue
            g_cand = g_cand / g_norm
            scale = rng.uniform(0.5, 2.0)
            x1_cand, *_ = np.linalg.lstsq(a, scale * g_cand, rcond=None)
            residual = np.linalg.norm(a @ x1_cand - scale * g_cand)
            f1_norm = np.linalg.norm(a @ x1_cand)
            if residual > RESIDUAL_TOL or f1_norm == 0.0:
                failures["encoder"] += 1
                if matrix is not None:
                    break
                continue
            x1_cand = x1_cand / f1_norm
            if np.linalg.norm(x1_cand) < min_component_norm:
                failures["norm_floor"] += 1
                if matrix is not None:
                    break
                continue
            encoder = LinearEncoder(a)
            g = g_cand
            x1 = x1_cand

        x2 = rng.normal(size=d_in)
        f2 = encoder(x2)
        f2_norm = np.linalg.norm(f2)
        if f2_norm == 0.0:
            failures["cos2"] += 1
            continue
        x2 = x2 * (rng.uniform(0.5, 2.0) / f2_norm)
        if cosine(encoder(x2), g) > cos2_max:
            failures["cos2"] += 1
            continue
        if np.linalg.norm(x2) < min_component_norm:
            failures["norm_floor"] += 1
            continue
        if independence_ratio(x1, x2) < INDEPENDENCE_RATIO:
            failures["independence"] += 1
            continue
        return TheoremInstance(
            encoder=encoder,
            g_y=g,
            x1=x1,
            x2=x2,
            cos2_max=cos2_max,
            min_component_norm=min_component_norm,
        )

    worst = max(failures, key=failures.get)
    raise ConstructionError(
        f"no valid instance after {RESAMPLE_BUDGET} resamples; "
        f"most frequent failure: {worst} ({failures[worst]} times; all: {failures})"
    )


def verify_theorem(inst: TheoremInstance) -> float:
    """Cosine of the recombined input against the target."""
    inst.validate()
    return cosine(inst.encoder(inst.x1 + inst.x2), inst.g_y)


@dataclass
class ProbeSummary:
    trials: int
    d_in: int
    d_out: int
    cos2_max: float
    max_cos: float | None = None
    worst_seed: int | None = None
    linearity_max_err: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "d_in": self.d_in,
            "d_out": self.d_out,
            "cos2_max": self.cos2_max,
            "max_cos": self.max_cos,
            "worst_seed": self.worst_seed,
        }


def trial_seed(base_seed: int, trial: int) -> int:
    """Self-contained seed for one probe trial."""
    return (base_seed * 0x9E3779B97F4A7C15 + trial) % (1 << 64)


def counterexample_probe(
    base_seed: int,
    trials: int,
    d_in: int = 8,
    d_out: int = 8,
    cos2_max: float = 0.9,
    min_component_norm: float = DEFAULT_NORM_FLOOR,
) -> ProbeSummary:
    """Search random valid instances for a perfect recombined alignment.

    Records the largest observed cosine and the seed reproducing it, plus
    the worst additivity violation of the encoder over x1, x2. Callers
    assert on the summary; the probe itself only reports.
    """
    summary = ProbeSummary(trials=trials, d_in=d_in, d_out=d_out, cos2_max=cos2_max)
    for t in range(trials):
        seed_t = trial_seed(base_seed, t)
        inst = construct_instance(
            np.random.default_rng(seed_t), d_in, d_out, cos2_max, min_component_norm
        )
        value = verify_theorem(inst)
        if summary.max_cos is None or value > summary.max_cos:
            summary.max_cos = value
            summary.worst_seed = seed_t
        lin_err = float(
            np.max(
                np.abs(
                    inst.encoder(inst.x1) + inst.encoder(inst.x2)
                    - inst.encoder(inst.x1 + inst.x2)
                )
            )
        )
        summary.linearity_max_err = max(summary.linearity_max_err, lin_err)
    return summary
