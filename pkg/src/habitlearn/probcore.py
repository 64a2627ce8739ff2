"""Decayed-count frequency estimation, deciban evidence and Bayes' rule.

The estimator is an exponentially weighted (IIR) relative-frequency
counter.  Decay is applied lazily against a global event clock: every
count is multiplied by ``(1 - 1/W) ** elapsed`` the next time the
estimator is touched, so contexts that are rarely visited still forget
on the same time scale as busy ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List

INF = math.inf
DISPLAY_CLAMP_DB = 100


class DomainError(ValueError):
    """Argument outside the domain of a probability function."""


class UndefinedPosteriorError(ZeroDivisionError):
    """Bayes' rule with zero evidence mass."""


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------


def validate_token_name(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError("token name must be a non-empty string")
    if any(ch.isspace() for ch in name):
        raise ValueError(f"token name {name!r} contains whitespace")
    return name


class Vocabulary:
    """Bijective name <-> id table for interned tokens."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: List[str] = []
        self._ids: Dict[str, int] = {}
        for name in names:
            if name in self._ids:
                raise ValueError(f"duplicate token name {name!r}")
            self.intern(name)

    def intern(self, name: str) -> int:
        tid = self._ids.get(name)
        if tid is None:
            validate_token_name(name)
            tid = len(self._names)
            self._names.append(name)
            self._ids[name] = tid
        return tid

    def id(self, name: str) -> int | None:
        """Id of ``name`` or None when the token was never interned."""
        return self._ids.get(name)

    def name(self, tid: int) -> str:
        return self._names[tid]

    def names(self) -> List[str]:
        return list(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)


# ---------------------------------------------------------------------------
# Adaptive frequency estimator
# ---------------------------------------------------------------------------


def decay_rate(window: float) -> float:
    """Per-event retention factor for an analysis window ``W``."""
    if window == INF:
        return 1.0
    return 1.0 - 1.0 / window


def validate_window(window: float) -> float:
    window = float(window)
    if math.isnan(window) or window < 1.0:
        raise ValueError(f"window must be >= 1 or inf, got {window!r}")
    return window


@dataclass
class AdaptiveFrequencyEstimator:
    """Categorical frequency estimator with exponential forgetting.

    ``counts`` and ``total`` are stored as of ``last_event``; every query
    decays them to the requested clock value without writing back.
    """

    window: float = INF
    reserve: float = 0.5
    counts: Dict[int, float] = field(default_factory=dict)
    total: float = 0.0
    last_event: int = 0

    def __post_init__(self) -> None:
        self.window = validate_window(self.window)
        if self.reserve < 0 or math.isnan(self.reserve):
            raise ValueError(f"reserve must be >= 0, got {self.reserve!r}")

    def _factor(self, now: int) -> float:
        elapsed = now - self.last_event
        if elapsed < 0:
            raise ValueError(f"clock went backwards: {now} < {self.last_event}")
        if elapsed == 0 or self.window == INF:
            return 1.0
        return decay_rate(self.window) ** elapsed

    def observe(self, outcome: int, now: int) -> None:
        factor = self._factor(now)
        if factor != 1.0:
            for key in self.counts:
                self.counts[key] *= factor
            self.total *= factor
        self.counts[outcome] = self.counts.get(outcome, 0.0) + 1.0
        self.total += 1.0
        self.last_event = now

    def prob(self, outcome: int, now: int) -> float:
        """Decayed probability of ``outcome``.

        An unseen outcome gets the whole novelty reserve ``r / (total + r)``;
        dividing it between candidate hypotheses is the caller's business.
        """
        factor = self._factor(now)
        denom = self.total * factor + self.reserve
        if denom == 0.0:
            return 0.0
        count = self.counts.get(outcome)
        if count is None:
            return self.reserve / denom
        return count * factor / denom

    def distribution(self, now: int) -> Dict[int, float]:
        """Probabilities of every seen outcome (sums to total/(total+r))."""
        factor = self._factor(now)
        denom = self.total * factor + self.reserve
        if denom == 0.0:
            return {}
        return {k: c * factor / denom for k, c in self.counts.items()}

    def effective_count(self, now: int) -> float:
        return self.total * self._factor(now)

    def __len__(self) -> int:
        return len(self.counts)


# ---------------------------------------------------------------------------
# Evidence scale
# ---------------------------------------------------------------------------


def evidence(p: float) -> float:
    """Log-odds in decibans: ``10 log10(p / (1 - p))``.

    Returns ``-inf`` for 0 and ``inf`` for 1.
    """
    if math.isnan(p) or p < 0.0 or p > 1.0:
        raise DomainError(f"probability out of [0, 1]: {p!r}")
    if p == 0.0:
        return -INF
    if p == 1.0:
        return INF
    return 10.0 * (math.log10(p) - math.log10(1.0 - p))


def display_db(value: float) -> int:
    """Integer-rounded decibans (half away from zero), clamped to +-100."""
    if math.isnan(value):
        raise DomainError("cannot display NaN evidence")
    if value >= DISPLAY_CLAMP_DB:
        return DISPLAY_CLAMP_DB
    if value <= -DISPLAY_CLAMP_DB:
        return -DISPLAY_CLAMP_DB
    rounded = math.floor(abs(value) + 0.5)
    return int(rounded if value >= 0 else -rounded)


def bayes_posterior(prior: float, tpr: float, fpr: float) -> float:
    """P(H | E) from P(H), P(E | H) and P(E | not H)."""
    for name, value in (("prior", prior), ("tpr", tpr), ("fpr", fpr)):
        if math.isnan(value) or value < 0.0 or value > 1.0:
            raise DomainError(f"{name} out of [0, 1]: {value!r}")
    hit = prior * tpr
    denom = hit + (1.0 - prior) * fpr
    if denom == 0.0:
        raise UndefinedPosteriorError("P(E) is zero; posterior undefined")
    return hit / denom

