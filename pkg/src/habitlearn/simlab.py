"""Navigation-habit simulations: stationary and sequential regimes.

Two built-in scenarios are provided.  ``STATIONARY`` is a single multiset
of ten menu paths (thirteen sequences once copies are counted) that is
replayed in shuffled passes.  ``SEQUENTIAL`` is four groups of five paths
learned one group after the other, drawing uniformly within a group.

Randomness comes from :class:`SplitMix64` so reports are byte-identical
for a given seed on every platform and Python version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from .abith import HabitModel, PathPrediction
from .probcore import INF, display_db, evidence
from .taskmodel import TaskGraph, extract, to_dot

Path = Tuple[str, ...]
Multiset = List[Tuple[Path, int]]

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    ``state += 0x9E3779B97F4A7C15`` then the output is mixed with two
    xor-shift-multiply rounds.  Bounded integers use rejection sampling
    so they are exactly uniform.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n < 1:
            raise ValueError("n must be >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def _paths(*rows: str) -> List[Path]:
    return [tuple(row.split()) for row in rows]


@dataclass(frozen=True)
class Scenario:
    name: str
    phases: Tuple[Tuple[Tuple[Path, int], ...], ...]

    def __post_init__(self) -> None:
        if not self.phases:
            raise ValueError("scenario needs at least one phase")
        for phase in self.phases:
            if not phase:
                raise ValueError("empty phase")
            for path, copies in phase:
                if not path:
                    raise ValueError("empty path")
                if copies < 1:
                    raise ValueError(f"copy count must be >= 1 for {' '.join(path)}")

    def draws(self, phase: int) -> List[Path]:
        """The phase's multiset expanded into a flat list of sequences."""
        return [path for path, copies in self.phases[phase] for _ in range(copies)]


STATIONARY = Scenario(
    "stationary",
    (
        (
            (("1a", "2a", "3b", "4b"), 1),
            (("1a", "2a", "3b", "4c"), 3),
            (("1a", "2b", "3b", "4b"), 1),
            (("1a", "2a", "3a", "4a"), 2),
            (("1a", "2a", "3c", "4a"), 1),
            (("1b", "2b", "3b", "4b"), 1),
            (("1c", "2b", "3a"), 1),
            (("1c", "2b", "3a", "4b"), 1),
            (("1c", "2b", "3a", "4b", "5c"), 1),
            (("1d", "2b", "3a", "4c", "5d"), 1),
        ),
    ),
)

_GROUPS = (
    _paths(
        "#2 #21 #211 #2112",
        "#1 #11 #111",
        "#3 #33 #331",
        "#4 #42 #421 #4211",
        "#4 #42 #421 #4212 #42121",
    ),
    _paths(
        "#2 #21 #211 #2111 #21112",
        "#3 #34 #3221",
        "#2 #22 #33 #331",
        "#2 #23 #233",
        "#2 #23 #232 #2321 #23211 #232111",
    ),
    _paths(
        "#3 #32 #321",
        "#4 #41 #411 #4111",
        "#1 #11 #112 #1122 #21112",
        "#3 #31",
        "#2 #23 #232 #2322",
    ),
    _paths(
        "#1 #11 #112 #1121 #11211 #112111",
        "#3 #32 #322 #3221",
        "#2 #23 #231",
        "#2 #21 #211 #2111 #21111",
        "#1 #11 #211 #2112",
    ),
)

SEQUENTIAL = Scenario(
    "sequential",
    tuple(tuple((path, 1) for path in group) for group in _GROUPS),
)


# ---------------------------------------------------------------------------
# exact-counting oracle
# ---------------------------------------------------------------------------


def oracle_conditionals(multiset: Sequence[Tuple[Path, int]], path: Sequence[str]) -> List[float]:
    """Step probabilities of ``path`` by direct counting over ``multiset``.

    At rank ``n`` only sequences that reach rank ``n`` count, so a path
    ending early contributes nothing past its last token.
    """
    path = tuple(path)
    steps = []
    for n in range(1, len(path) + 1):
        reach = [(seq, c) for seq, c in multiset if len(seq) >= n and seq[: n - 1] == path[: n - 1]]
        denom = sum(c for _, c in reach)
        num = sum(c for seq, c in reach if seq[n - 1] == path[n - 1])
        steps.append(num / denom if denom else 0.0)
    return steps


def oracle_evidence(multiset: Sequence[Tuple[Path, int]], path: Sequence[str]) -> float:
    """Theoretical joint evidence (dB) of a complete path; NaN for a prefix path."""
    path = tuple(path)
    if not any(seq == path for seq, _ in multiset):
        raise KeyError(f"path {' '.join(path)!r} is not in the multiset")
    if any(len(seq) > len(path) and seq[: len(path)] == path for seq, _ in multiset):
        return math.nan
    return evidence(math.prod(oracle_conditionals(multiset, path)))


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    passes: int = 300
    draws_per_phase: int = 50
    window: float = 200.0
    order: Optional[int] = None
    reserve: float = 0.5
    p_min: float = 0.0
    max_results: int = 64

    def __post_init__(self) -> None:
        if self.passes < 1 or self.draws_per_phase < 1:
            raise ValueError("passes and draws_per_phase must be >= 1")
        if self.max_results < 1:
            raise ValueError("max_results must be >= 1")
        if not 0.0 <= self.p_min < 1.0:
            raise ValueError("p_min must be in [0, 1)")

    @classmethod
    def stationary(cls, **overrides) -> "RunConfig":
        return replace(cls(window=200.0), **overrides)

    @classmethod
    def sequential(cls, **overrides) -> "RunConfig":
        return replace(cls(window=32.0), **overrides)

    def describe(self, scenario: str) -> str:
        order = "auto" if self.order is None else str(self.order)
        window = "inf" if self.window == INF else f"{self.window:g}"
        volume = f"passes={self.passes}" if scenario == "stationary" else f"draws_per_phase={self.draws_per_phase}"
        return (
            f"seed={self.seed} {volume} window={window} order={order} "
            f"reserve={self.reserve:g} p_min={self.p_min:g} max_results={self.max_results}"
        )


@dataclass
class PhaseReport:
    phase: int
    model_size: int
    predictions: List[PathPrediction]
    graph: TaskGraph
    dot: str
    oracle_db: List[Optional[float]] = field(default_factory=list)


@dataclass
class RunReport:
    scenario: str
    config: RunConfig
    phases: List[PhaseReport]
    model: HabitModel

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_text(self, top: int = 3) -> str:
        lines = [f"scenario: {self.scenario}", f"config: {self.config.describe(self.scenario)}", ""]
        for ph in self.phases:
            lines.append(f"== phase {ph.phase} ==")
            lines.append(f"model_size: {ph.model_size}")
            lines.append(f"predicted sequences: {len(ph.predictions)}")
            for rank, (pred, oracle) in enumerate(zip(ph.predictions, ph.oracle_db), start=1):
                row = f"{rank}\t{pred.format()}"
                if oracle is None:
                    row += "\toracle: -"
                elif math.isnan(oracle):
                    row += "\toracle: NaN"
                else:
                    row += f"\toracle: ({display_db(oracle)} dB)"
                if rank <= top:
                    row += f"\t[{rank}]"
                lines.append(row)
            lines.append("")
        return "\n".join(lines)

    def to_tsv(self) -> str:
        lines = ["phase\trank\tpath\tjoint_probability\tevidence_db"]
        for ph in self.phases:
            for rank, pred in enumerate(ph.predictions, start=1):
                ev = pred.evidence
                ev_text = f"{ev:.4f}" if math.isfinite(ev) else ("inf" if ev > 0 else "-inf")
                lines.append(f"{ph.phase}\t{rank}\t{' '.join(pred.tokens)}\t{pred.joint:.17g}\t{ev_text}")
            lines.append(f"model_size\t{ph.phase}\t{ph.model_size}")
        return "\n".join(lines) + "\n"


def _phase_report(model: HabitModel, phase: int, config: RunConfig, multiset) -> PhaseReport:
    preds = model.predict((), config.max_results, config.p_min)
    graph = extract(model, (), config.p_min, config.max_results)
    oracle: List[Optional[float]] = []
    for pred in preds:
        try:
            oracle.append(oracle_evidence(multiset, pred.tokens))
        except KeyError:
            oracle.append(None)
    return PhaseReport(phase, model.model_size(), preds, graph, to_dot(graph), oracle)


def _new_model(config: RunConfig) -> HabitModel:
    return HabitModel(config.window, config.order, config.reserve)


def run_stationary(config: Optional[RunConfig] = None, scenario: Scenario = STATIONARY) -> RunReport:
    """Shuffled passes over a single multiset, then one prediction from the root."""
    config = config or RunConfig.stationary()
    if len(scenario.phases) != 1:
        raise ValueError("stationary run needs a single-phase scenario")
    rng = SplitMix64(config.seed)
    model = _new_model(config)
    deck = scenario.draws(0)
    for _ in range(config.passes):
        rng.shuffle(deck)
        for seq in deck:
            model.ingest(seq)
    report = _phase_report(model, 1, config, scenario.phases[0])
    return RunReport(scenario.name, config, [report], model)


def run_sequential(config: Optional[RunConfig] = None, scenario: Scenario = SEQUENTIAL) -> RunReport:
    """Phase after phase, i.i.d. uniform draws from the current phase only."""
    config = config or RunConfig.sequential()
    if len(scenario.phases) < 2:
        raise ValueError("sequential run needs at least two phases")
    rng = SplitMix64(config.seed)
    model = _new_model(config)
    reports = []
    for index in range(len(scenario.phases)):
        deck = scenario.draws(index)
        for _ in range(config.draws_per_phase):
            model.ingest(deck[rng.below(len(deck))])
        reports.append(_phase_report(model, index + 1, config, scenario.phases[index]))
    return RunReport(scenario.name, config, reports, model)

