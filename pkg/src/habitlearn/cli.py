"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 IO error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from .abith import DEFAULT_MAX_RESULTS, DEFAULT_P_MIN, HabitModel, SnapshotError, parse_order
from .probcore import INF, validate_token_name
from .simlab import RunConfig, run_sequential, run_stationary
from .taskmodel import extract, to_dot

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3

DEFAULT_WINDOW = 200.0
DEFAULT_RESERVE = 0.5
DEFAULT_SEED = 42


class DataError(Exception):
    """Bad input data: unparsable trace, incompatible model, ..."""


class TraceParseError(DataError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


# ---------------------------------------------------------------------------
# trace files
# ---------------------------------------------------------------------------


def parse_trace(text: str) -> List[List[str]]:
    """One sequence per line, tokens separated by single spaces.

    Blank lines and lines starting with ``//`` are skipped.
    """
    seqs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("//"):
            continue
        tokens = line.split(" ")
        if "" in tokens:
            raise TraceParseError(lineno, "tokens must be separated by single spaces")
        for tok in tokens:
            try:
                validate_token_name(tok)
            except ValueError as exc:
                raise TraceParseError(lineno, str(exc)) from None
        seqs.append(tokens)
    return seqs


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path: Path) -> HabitModel:
    return HabitModel.restore(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def _window(text: str) -> float:
    if text.strip().lower() == "inf":
        return INF
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid window {text!r}") from None
    if math.isnan(value) or value < 1:
        raise argparse.ArgumentTypeError("window must be >= 1 or 'inf'")
    return value


AUTO = "auto"


def _order(text: str):
    """Integer order, or the string ``"auto"`` for unbounded."""
    try:
        order = parse_order(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return AUTO if order is None else order


def _order_value(arg) -> Optional[int]:
    return None if arg == AUTO else arg


def _reserve(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid reserve {text!r}") from None
    if not math.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError("reserve must be a finite value >= 0")
    return value


def _p_min(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid p-min {text!r}") from None
    if not 0 <= value < 1:
        raise argparse.ArgumentTypeError("p-min must be in [0, 1)")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prompt(text: Optional[str]) -> List[str]:
    return text.split() if text else []


def _fmt_window(w: float) -> str:
    return "inf" if w == INF else f"{w:g}"


def _fmt_order(k: Optional[int]) -> str:
    return "auto" if k is None else str(k)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_learn(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    seqs = parse_trace(text)
    model_path = Path(args.model)
    if model_path.exists():
        model = load_model(model_path)
        checks = [
            ("window", args.window, model.window, _fmt_window),
            ("order", args.order, model.order, _fmt_order),
            ("reserve", args.reserve, model.reserve, "{:g}".format),
        ]
        for name, given, have, fmt in checks:
            if given is None:
                continue
            want = _order_value(given) if name == "order" else given
            if want != have:
                raise DataError(
                    f"hyperparameter mismatch: --{name} {fmt(want)} but model has {fmt(have)}"
                )
    else:
        model = HabitModel(
            DEFAULT_WINDOW if args.window is None else args.window,
            None if args.order is None else _order_value(args.order),
            DEFAULT_RESERVE if args.reserve is None else args.reserve,
        )
    n = model.ingest_many(seqs)
    atomic_write(model_path, model.snapshot())
    print(f"{n} sequences ingested")
    print(f"L_max: {model.max_length}")
    print(f"model_size: {model.model_size()}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(Path(args.model))
    prompt = _prompt(args.prompt)
    unknown = [tok for tok in prompt if tok not in model.vocab]
    if unknown:
        print(f"note: unknown prompt token(s): {' '.join(unknown)}", file=sys.stderr)
    for rank, path in enumerate(model.predict(prompt, args.top, args.p_min), start=1):
        print(f"{rank}\t{path.format()}")
    return EXIT_OK


def cmd_export_dot(args) -> int:
    model = load_model(Path(args.model))
    graph = extract(model, _prompt(args.prompt), args.p_min, args.top)
    atomic_write(Path(args.out), to_dot(graph))
    print(f"wrote {args.out} ({len(graph.paths)} paths, {len(graph.nodes)} nodes)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    sequential = args.scenario == "sequential"
    base = RunConfig.sequential() if sequential else RunConfig.stationary()
    overrides = {
        "seed": args.seed,
        "window": args.window,
        "reserve": args.reserve,
        "p_min": args.p_min,
        "max_results": args.top,
        "passes": args.passes,
        "draws_per_phase": args.draws,
    }
    if args.order is not None:
        overrides["order"] = _order_value(args.order)
    config = replace(base, **{k: v for k, v in overrides.items() if v is not None})
    report = run_sequential(config) if sequential else run_stationary(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write(out / "report.txt", report.to_text())
    atomic_write(out / "report.tsv", report.to_tsv())
    for ph in report.phases:
        atomic_write(out / f"phase{ph.phase}.dot", ph.dot)
    sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_stats(args) -> int:
    model = load_model(Path(args.model))
    print(f"model_size: {model.model_size()}")
    print(f"L_max: {model.max_length}")
    print(f"clock: {model.clock}")
    print(f"vocabulary: {len(model.vocab)}")
    print(f"window: {_fmt_window(model.window)}")
    print(f"order: {_fmt_order(model.order)}")
    print(f"reserve: {model.reserve:g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_hyper(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=_window, default=None, help="analysis window W (number or 'inf')")
    p.add_argument("--order", type=_order, default=None, help="Markov order k (integer or 'auto')")
    p.add_argument("--reserve", type=_reserve, default=None, help="novelty reserve mass r")


def _add_query(p: argparse.ArgumentParser, top_default, p_min_default) -> None:
    p.add_argument("--top", type=_positive_int, default=top_default, help="maximum number of paths")
    p.add_argument("--p-min", dest="p_min", type=_p_min, default=p_min_default,
                   help="minimum step probability followed during enumeration")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="habitlearn", description="Online Bayesian learning of usage habits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("learn", help="ingest a trace file into a model snapshot")
    p.add_argument("--input", required=True, help="trace file, one sequence per line")
    p.add_argument("--model", required=True, help="snapshot path (created if missing)")
    _add_hyper(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("predict", help="rank likely continuations of a prompt")
    p.add_argument("--model", required=True)
    p.add_argument("--prompt", default="", help="space-separated token names")
    _add_query(p, DEFAULT_MAX_RESULTS, DEFAULT_P_MIN)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("export-dot", help="write the task model as a DOT file")
    p.add_argument("--model", required=True)
    p.add_argument("--prompt", default="")
    p.add_argument("--out", required=True)
    _add_query(p, DEFAULT_MAX_RESULTS, DEFAULT_P_MIN)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("simulate", help="run a built-in simulation")
    p.add_argument("scenario", choices=["stationary", "sequential"])
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--passes", type=_positive_int, default=None, help="stationary: shuffled passes")
    p.add_argument("--draws", type=_positive_int, default=None, help="sequential: draws per phase")
    p.add_argument("--out", default=".", help="output directory")
    _add_hyper(p)
    _add_query(p, None, None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="summarize a model snapshot")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
