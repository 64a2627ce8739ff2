"""Single-rank adaptive Bayesian classifier.

A :class:`RankInstance` predicts the token found at one position of a
sequence.  It keeps one decayed-count estimator per conditioning context
(the preceding tokens, truncated to the Markov order) and creates those
estimators on first sight, so the network grows with the data stream.

The conditional ``P(next | context)`` is stored directly.  In the exact
counting case this equals the joint-over-marginal posterior
``P(context, y) / P(context)`` obtained from the generative product form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple

from .probcore import INF, AdaptiveFrequencyEstimator, validate_window

ContextKey = Tuple[int, ...]


def truncate_context(prefix: Tuple[int, ...], order: Optional[int]) -> ContextKey:
    """Keep the ``order`` most recent tokens (all of them when unbounded)."""
    if order is None or len(prefix) <= order:
        return tuple(prefix)
    return tuple(prefix[len(prefix) - order:])


@dataclass
class RankInstance:
    rank: int
    order: Optional[int] = None
    window: float = INF
    reserve: float = 0.5
    tables: Dict[ContextKey, AdaptiveFrequencyEstimator] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.order is not None and self.order < 1:
            raise ValueError(f"order must be >= 1 or None, got {self.order}")
        self.window = validate_window(self.window)

    @property
    def max_context(self) -> int:
        limit = self.rank - 1
        return limit if self.order is None else min(limit, self.order)

    def observe(self, context: ContextKey, outcome: int, now: int) -> None:
        if len(context) > self.max_context:
            raise ValueError(
                f"context of length {len(context)} exceeds {self.max_context} at rank {self.rank}"
            )
        est = self.tables.get(context)
        if est is None:
            est = AdaptiveFrequencyEstimator(self.window, self.reserve, last_event=now)
            self.tables[context] = est
        est.observe(outcome, now)

    def posterior(self, context: ContextKey, now: int) -> Dict[int, float]:
        """Distribution over next tokens; empty when the context is unknown."""
        est = self.tables.get(context)
        if est is None:
            return {}
        return est.distribution(now)

    def knows(self, context: ContextKey) -> bool:
        return context in self.tables

    def size(self) -> int:
        return sum(len(est) for est in self.tables.values())

    def __iter__(self) -> Iterator[Tuple[ContextKey, AdaptiveFrequencyEstimator]]:
        return iter(self.tables.items())
