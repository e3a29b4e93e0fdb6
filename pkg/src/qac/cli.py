"""Command-line entry point: ``qac <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
Log lines go to stderr as ``[qac:info] ...`` / ``[qac:error] ...``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench, bma, control, core, lang, osc, qasm
from .errors import QacError
from .registry import Session

log = logging.getLogger("qac")

DEFAULT_SHOTS = 1024
BMA_SHOTS = 100
BENCH_LEVELS = (2000, 20000, 1_000_000)


class _Formatter(logging.Formatter):
    def format(self, record):
        return f"[qac:{record.levelname.lower()}] {record.getMessage()}"


def setup_logging(quiet: bool, stream=None) -> None:
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(_Formatter())
    log.handlers[:] = [handler]
    log.setLevel(logging.WARNING if quiet else logging.INFO)
    log.propagate = False


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be >= 0")
    return value


def _shots_list(text: str) -> list[int]:
    return [_positive_int(part) for part in text.split(",") if part.strip()]


def _host_port(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise argparse.ArgumentTypeError(f"expected host:port, got {text!r}")
    try:
        return host, int(port)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad port in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted both before and after the subcommand.
    def global_flags(shots: bool = True) -> argparse.ArgumentParser:
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default: $QAC_SEED)")
        if shots:
            p.add_argument("--shots", type=_positive_int, default=argparse.SUPPRESS)
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="turn console output off")
        return p

    common = global_flags()

    parser = argparse.ArgumentParser(prog="qac", parents=[common], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("repl", parents=[common], help="interactive command language")

    p = sub.add_parser("run", parents=[common], help="run a command script, a QASM file or minified tokens")
    p.add_argument("target", nargs="+", help="script/QASM path, or minified tokens such as: 2 h0 cx01")

    p = sub.add_parser("bma", parents=[common], help="Grover-amplified Markov sequencer")
    p.add_argument("--table", required=True, help="transition table JSON")
    p.add_argument("--start", required=True, help="start label")
    p.add_argument("--loops", type=_nonneg_int, required=True)
    p.add_argument("--period-ms", type=_positive_int, default=150)
    p.add_argument("--realtime", action="store_true", help="emit events at their times")
    p.add_argument("--osc", type=_host_port, metavar="HOST:PORT", help="also send /note messages")

    p = sub.add_parser("serve", parents=[common], help="OSC circuit service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=_nonneg_int, default=9000)
    p.add_argument("--reply-port", type=_nonneg_int, default=9001)
    p.add_argument("--reply-to-source", action="store_true")

    p = sub.add_parser("bench", parents=[global_flags(shots=False)], help="shots-scaling benchmark")
    p.add_argument("--shots", type=_shots_list, default=argparse.SUPPRESS,
                   help="comma-separated shots levels (default: 2000,20000,1000000)")
    p.add_argument("--csv", default="bench.csv")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--qasm", help="benchmark this QASM file instead of the 1-qubit circuit")

    p = sub.add_parser("super", parents=[common], help="superposition knob demo")
    p.add_argument("--qubits", type=_positive_int, default=1)
    p.add_argument("--ramp", type=_nonneg_int, default=0, help="ramp length in ms")
    p.add_argument("--triggers", type=_positive_int, default=1)
    p.add_argument("--steps", type=_positive_int, default=4, help="ramp samples per trigger")
    return parser


def _seed_from_env() -> Optional[int]:
    raw = os.environ.get("QAC_SEED")
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"qac: QAC_SEED must be an integer, got {raw!r}") from None


def _print_replies(replies, out) -> None:
    for reply in replies:
        print(reply.text, file=out)


def cmd_repl(args, out) -> int:
    session = Session(console_output=not args.quiet, seed=args.seed)
    interactive = sys.stdin.isatty()
    while True:
        if interactive:
            print("qac> ", end="", file=out, flush=True)
        line = sys.stdin.readline()
        if not line:
            return 0
        line = line.split("#", 1)[0].strip()
        if line in ("quit", "exit"):
            return 0
        if not line:
            continue
        try:
            _print_replies(session.execute(line), out)
        except QacError:
            pass  # already logged by the session
        out.flush()


def _looks_like_qasm(text: str) -> bool:
    for line in text.splitlines():
        line = line.split("//", 1)[0].strip()
        if line:
            return line.startswith("OPENQASM")
    return False


def cmd_run(args, out) -> int:
    shots = args.shots or DEFAULT_SHOTS
    first = args.target[0]
    path = Path(first)
    if len(args.target) == 1 and path.is_file():
        text = path.read_text(encoding="utf-8")
        if _looks_like_qasm(text):
            qc = qasm.parse_qasm(text, name=path.stem)
            counts = core.sample_counts(qc, shots, args.seed)
            print(core.format_counts(counts), file=out)
            return 0
        session = Session(console_output=not args.quiet, seed=args.seed)
        _print_replies(session.run_script(text), out)
        return 0
    if len(args.target) == 1 and not first[:1].isdigit():
        raise QacError(f"{first!r} is neither a file nor a minified circuit")
    qc = lang.parse_minified(args.target).expand()
    print(core.format_counts(core.sample_counts(qc, shots, args.seed)), file=out)
    return 0


def cmd_bma(args, out) -> int:
    table = bma.TransitionTable.load(args.table)
    config = bma.SequencerConfig(
        args.start, args.loops, args.period_ms, args.shots or BMA_SHOTS, args.seed
    )
    client = osc.OscClient(args.osc) if args.osc else None

    def emit(event: bma.NoteEvent) -> None:
        print(event.csv(), file=out, flush=args.realtime)
        if client is not None:
            client.send("/note", event.midi_note, event.label, event.t_ms)

    print("t_ms,midi,label,state,count", file=out)
    try:
        events = bma.iter_sequencer(table, config)
        if args.realtime:
            bma.play(events, emit)
        else:
            for event in events:
                emit(event)
    finally:
        if client is not None:
            client.close()
    return 0


def cmd_serve(args, out) -> int:
    config = osc.ServiceConfig(
        listen_port=args.port,
        reply_port=args.reply_port,
        default_shots=args.shots or DEFAULT_SHOTS,
        host=args.host,
        seed=args.seed,
        reply_to_source=args.reply_to_source,
    )
    try:
        osc.serve(config)
    except KeyboardInterrupt:
        pass
    return 0


def cmd_bench(args, out) -> int:
    levels = args.shots or BENCH_LEVELS
    if isinstance(levels, int):
        levels = [levels]
    spec = bench.BenchSpec(tuple(levels), args.repetitions, args.csv, args.qasm, args.seed)
    rows = bench.run_bench(spec)
    bench.write_csv(out, rows)
    log.info("wrote %d row(s) to %s", len(rows), args.csv)
    return 0


def cmd_super(args, out) -> int:
    device = control.SuperpositionDevice(
        args.qubits, args.ramp, args.shots or DEFAULT_SHOTS, args.seed
    )
    print("trigger,t_ms,ket,value", file=out)
    for i in range(args.triggers):
        ket, _ = control.trigger_superposition(device)
        for k in range(args.steps + 1):
            t = args.ramp * k / args.steps
            value = control.step_interpolation(device, t)
            print(f"{i},{t:g},{ket},{value:.6f}", file=out)
    return 0


COMMANDS = {
    "repl": cmd_repl,
    "run": cmd_run,
    "bma": cmd_bma,
    "serve": cmd_serve,
    "bench": cmd_bench,
    "super": cmd_super,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "seed"):
            args.seed = _seed_from_env()
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    args.shots = getattr(args, "shots", None)
    args.quiet = getattr(args, "quiet", False)
    setup_logging(args.quiet)
    try:
        return COMMANDS[args.command](args, out)
    except (QacError, OSError) as exc:
        if not getattr(exc, "logged", False):  # sessions log their own errors
            log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
