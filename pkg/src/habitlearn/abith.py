"""Hierarchical sequence model: one rank instance per token position.

Whole sequences are ingested one at a time (one clock tick each) and
never stored.  Continuations of a prompt are scored with the chain rule
and the complete ones are enumerated and ranked by joint probability.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .abit import ContextKey, RankInstance, truncate_context
from .probcore import (
    INF,
    AdaptiveFrequencyEstimator,
    Vocabulary,
    display_db,
    evidence,
    validate_window,
)

FORMAT_VERSION = 1
DEFAULT_P_MIN = 0.001
DEFAULT_MAX_RESULTS = 16

_UNKNOWN = -1


class SnapshotError(ValueError):
    """A snapshot document could not be loaded."""


@dataclass(frozen=True)
class PathPrediction:
    prompt: Tuple[str, ...]
    tokens: Tuple[str, ...]
    step_probs: Tuple[float, ...]
    joint: float
    complete: bool = True

    @property
    def evidence(self) -> float:
        return evidence(self.joint)

    @property
    def evidence_db(self) -> int:
        return display_db(self.evidence)

    def format(self) -> str:
        """Row such as ``1a(0.62) 2a(0.87) 3b(0.57) 4c(0.75) -> (-5 dB)``."""
        steps = " ".join(f"{tok}({p:.2f})" for tok, p in zip(self.tokens, self.step_probs))
        return f"{steps} -> ({self.evidence_db} dB)"


def parse_order(value: Any) -> Optional[int]:
    """``None``/"auto"/"inf" mean unbounded; otherwise an integer >= 1."""
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("auto", "inf"):
            return None
        if not text.isdigit():
            raise ValueError(f"invalid order {value!r}")
        value = int(text)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"invalid order {value!r}")
    if value < 1:
        raise ValueError(f"order must be >= 1, got {value}")
    return value


class HabitModel:
    """Incremental variable-order model of a user's action sequences.

    Args:
        window: analysis window ``W`` (memory depth in ingested sequences),
            ``inf`` for plain counting.
        order: Markov order ``k``; ``None`` conditions on the whole prefix.
        reserve: novelty reserve mass added to every estimator's denominator.
    """

    def __init__(self, window: float = 200.0, order: Optional[int] = None, reserve: float = 0.5):
        self.window = validate_window(window)
        self.order = parse_order(order)
        if math.isnan(reserve) or reserve < 0:
            raise ValueError(f"reserve must be >= 0, got {reserve!r}")
        self.reserve = float(reserve)
        self.clock = 0
        self.vocab = Vocabulary()
        self.instances: List[RankInstance] = []

    # -- learning ----------------------------------------------------------

    def ingest(self, seq: Sequence[str]) -> None:
        if not seq:
            raise ValueError("cannot ingest an empty sequence")
        ids = [self.vocab.intern(tok) for tok in seq]
        self.clock += 1
        for n, outcome in enumerate(ids, start=1):
            if n > len(self.instances):
                self.instances.append(
                    RankInstance(n, self.order, self.window, self.reserve)
                )
            context = truncate_context(tuple(ids[: n - 1]), self.order)
            self.instances[n - 1].observe(context, outcome, self.clock)

    def ingest_many(self, seqs) -> int:
        count = 0
        for seq in seqs:
            self.ingest(seq)
            count += 1
        return count

    # -- queries -------------------------------------------------------------

    @property
    def max_length(self) -> int:
        return len(self.instances)

    def model_size(self) -> int:
        """Number of stored (context, outcome) weights."""
        return sum(inst.size() for inst in self.instances)

    def _ids(self, names: Sequence[str]) -> Tuple[int, ...]:
        out = []
        for name in names:
            tid = self.vocab.id(name)
            out.append(_UNKNOWN if tid is None else tid)
        return tuple(out)

    def _posterior(self, prefix: Tuple[int, ...]) -> Dict[int, float]:
        rank = len(prefix) + 1
        if rank > len(self.instances):
            return {}
        context = truncate_context(prefix, self.order)
        if _UNKNOWN in context:
            return {}
        return self.instances[rank - 1].posterior(context, self.clock)

    def next_distribution(self, prefix: Sequence[str]) -> Dict[str, float]:
        """Posterior over the token following ``prefix`` (empty if unknown)."""
        dist = self._posterior(self._ids(prefix))
        return {self.vocab.name(k): p for k, p in dist.items()}

    def context_of(self, prefix: Sequence[str]) -> Tuple[str, ...]:
        """Conditioning context used to predict the token after ``prefix``."""
        return truncate_context(tuple(prefix), self.order)

    def score(self, prompt: Sequence[str], continuation: Sequence[str]) -> PathPrediction:
        prefix = list(self._ids(prompt))
        steps: List[float] = []
        joint = 1.0
        for name in continuation:
            tid = self.vocab.id(name)
            p = self._posterior(tuple(prefix)).get(tid, 0.0) if tid is not None else 0.0
            steps.append(p)
            joint *= p
            prefix.append(_UNKNOWN if tid is None else tid)
        complete = bool(continuation) and not self._posterior(tuple(prefix))
        return PathPrediction(tuple(prompt), tuple(continuation), tuple(steps), joint, complete)

    def predict(
        self,
        prompt: Sequence[str] = (),
        max_results: int = DEFAULT_MAX_RESULTS,
        p_min: float = DEFAULT_P_MIN,
    ) -> List[PathPrediction]:
        """Complete continuations of ``prompt`` ranked by joint probability.

        Every stored branch whose step probability reaches ``p_min`` is
        followed; a path is complete once no continuation is known.
        """
        if max_results < 1:
            raise ValueError("max_results must be >= 1")
        if not 0.0 <= p_min < 1.0:
            raise ValueError("p_min must be in [0, 1)")
        name = self.vocab.name
        base = self._ids(prompt)
        found: List[PathPrediction] = []
        stack: List[Tuple[Tuple[int, ...], Tuple[float, ...], float]] = [((), (), 1.0)]
        while stack:
            tail, steps, joint = stack.pop()
            dist = self._posterior(base + tail)
            if not dist:
                if tail:
                    found.append(
                        PathPrediction(
                            tuple(prompt),
                            tuple(name(t) for t in tail),
                            steps,
                            joint,
                        )
                    )
                continue
            for tid, p in dist.items():
                if p >= p_min and p > 0.0:
                    stack.append((tail + (tid,), steps + (p,), joint * p))
        found.sort(key=lambda path: (-path.joint, path.tokens))
        return found[:max_results]

    def copy(self) -> "HabitModel":
        return copy.deepcopy(self)

    # -- persistence -------------------------------------------------------

    def to_document(self) -> Dict[str, Any]:
        instances = []
        for inst in self.instances:
            tables = []
            for context, est in inst:
                tables.append(
                    {
                        "context": list(context),
                        "counts": [[k, w] for k, w in est.counts.items()],
                        "total": est.total,
                        "last_event": est.last_event,
                    }
                )
            instances.append({"rank": inst.rank, "tables": tables})
        return {
            "format_version": FORMAT_VERSION,
            "window": "inf" if self.window == INF else self.window,
            "order": "inf" if self.order is None else self.order,
            "reserve": self.reserve,
            "clock": self.clock,
            "vocabulary": self.vocab.names(),
            "instances": instances,
        }

    def snapshot(self) -> str:
        return json.dumps(self.to_document(), indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_document(cls, doc: Any) -> "HabitModel":
        return _load(doc)

    @classmethod
    def restore(cls, text: str) -> "HabitModel":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"malformed snapshot at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return _load(doc)

    def __repr__(self) -> str:
        order = "auto" if self.order is None else self.order
        return (
            f"HabitModel(window={self.window}, order={order}, reserve={self.reserve}, "
            f"clock={self.clock}, L_max={self.max_length}, size={self.model_size()})"
        )


# ---------------------------------------------------------------------------
# snapshot loading
# ---------------------------------------------------------------------------


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise SnapshotError(f"{where or 'document'}: expected an object")
    if key not in obj:
        raise SnapshotError(f"missing field '{where + '.' if where else ''}{key}'")
    return obj[key]


def _number(value: Any, where: str, *, allow_inf: bool = False) -> float:
    if allow_inf and value == "inf":
        return INF
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SnapshotError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SnapshotError(f"{where}: expected an integer, got {value!r}")
    return value


def _load(doc: Any) -> HabitModel:
    version = _field(doc, "format_version", "")
    if version != FORMAT_VERSION:
        raise SnapshotError(f"format_version: unsupported version {version!r} (expected {FORMAT_VERSION})")
    window = _number(_field(doc, "window", ""), "window", allow_inf=True)
    order_raw = _field(doc, "order", "")
    reserve = _number(_field(doc, "reserve", ""), "reserve")
    try:
        model = HabitModel(window, order_raw, reserve)
    except ValueError as exc:
        raise SnapshotError(f"hyperparameters: {exc}") from None
    model.clock = _integer(_field(doc, "clock", ""), "clock")
    vocab = _field(doc, "vocabulary", "")
    if not isinstance(vocab, list):
        raise SnapshotError("vocabulary: expected an array")
    try:
        model.vocab = Vocabulary(vocab)
    except ValueError as exc:
        raise SnapshotError(f"vocabulary: {exc}") from None
    nvocab = len(vocab)

    def token(value: Any, where: str) -> int:
        tid = _integer(value, where)
        if not 0 <= tid < nvocab:
            raise SnapshotError(f"{where}: token index {tid} out of range")
        return tid

    instances = _field(doc, "instances", "")
    if not isinstance(instances, list):
        raise SnapshotError("instances: expected an array")
    for i, raw in enumerate(instances):
        where = f"instances[{i}]"
        rank = _integer(_field(raw, "rank", where), f"{where}.rank")
        if rank != i + 1:
            raise SnapshotError(f"{where}.rank: expected {i + 1}, got {rank}")
        inst = RankInstance(rank, model.order, model.window, model.reserve)
        tables = _field(raw, "tables", where)
        if not isinstance(tables, list):
            raise SnapshotError(f"{where}.tables: expected an array")
        for j, entry in enumerate(tables):
            ew = f"{where}.tables[{j}]"
            ctx_raw = _field(entry, "context", ew)
            if not isinstance(ctx_raw, list):
                raise SnapshotError(f"{ew}.context: expected an array")
            context: ContextKey = tuple(
                token(v, f"{ew}.context[{m}]") for m, v in enumerate(ctx_raw)
            )
            if len(context) > inst.max_context:
                raise SnapshotError(f"{ew}.context: too long for rank {rank}")
            counts_raw = _field(entry, "counts", ew)
            if not isinstance(counts_raw, list):
                raise SnapshotError(f"{ew}.counts: expected an array")
            counts: Dict[int, float] = {}
            for m, pair in enumerate(counts_raw):
                cw = f"{ew}.counts[{m}]"
                if not isinstance(pair, list) or len(pair) != 2:
                    raise SnapshotError(f"{cw}: expected [token index, weight]")
                weight = _number(pair[1], cw)
                if weight < 0 or math.isinf(weight):
                    raise SnapshotError(f"{cw}: invalid weight {weight!r}")
                counts[token(pair[0], cw)] = weight
            total = _number(_field(entry, "total", ew), f"{ew}.total")
            last_event = _integer(_field(entry, "last_event", ew), f"{ew}.last_event")
            if last_event > model.clock:
                raise SnapshotError(f"{ew}.last_event: {last_event} is ahead of clock {model.clock}")
            inst.tables[context] = AdaptiveFrequencyEstimator(
                model.window, model.reserve, counts, total, last_event
            )
        model.instances.append(inst)
    return model
