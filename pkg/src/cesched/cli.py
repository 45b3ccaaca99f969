"""Command-line driver: analyze, transform, simulate, compare, corpus-test."""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Tuple

from . import data
from .errors import CesError, CompileError, ConfigError, InvariantViolation
from .frontend import nodes as n
from .frontend import parse, parse_file
from .frontend.emitter import emit_text
from .machine import CoreType, MachineConfig, default_machine, frequency_ok, load_machine
from .scheduler import SchedulePlan, analyze
from .simulator import POLICIES, compare, comparison_csv, simulate
from .simulator.report import Comparison, SimReport
from .transform import transform_program

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- argument handling -------------------------------------------------------------

def parse_freq(text: str) -> dict:
    """``big=1.9e9,little=1.0e9`` -> {CoreType.BIG: 1.9e9, CoreType.LITTLE: 1.0e9}."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, val = part.partition("=")
        try:
            ct = CoreType(key.strip().lower())
            hz = float(val)
        except ValueError:
            raise UsageError(f"bad --freq item {part!r}; expected big=<Hz>,little=<Hz>") from None
        if not sep or hz <= 0:
            raise UsageError(f"bad --freq item {part!r}; expected big=<Hz>,little=<Hz>")
        out[ct] = hz
    if not out:
        raise UsageError("--freq needs at least one of big=<Hz>, little=<Hz>")
    return out


def machine_for(args) -> MachineConfig:
    m = load_machine(args.machine) if args.machine else default_machine()
    if args.freq:
        freqs = parse_freq(args.freq)
        for ct, hz in freqs.items():
            if not frequency_ok(m.calibration.params(ct), hz):
                raise ConfigError(f"{ct.value} frequency {hz:g} Hz is outside the calibrated range")
        m = m.with_frequencies(freqs.get(CoreType.BIG), freqs.get(CoreType.LITTLE))
    if args.threads is not None and args.threads > len(m.cores):
        raise ConfigError(f"--threads {args.threads} exceeds the {len(m.cores)} cores of {m.name}")
    return m


def stem(path: str) -> str:
    name = os.path.basename(path)
    for suffix in (".c", ".comp", ".ces"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return name or "program"


def out_dir(args) -> str:
    d = args.out or "."
    os.makedirs(d, exist_ok=True)
    return d


def load_program(path: str) -> n.Program:
    try:
        return parse_file(path)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None


def write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- summaries -------------------------------------------------------------------

def plan_summary(name: str, plan: SchedulePlan) -> str:
    lines = [f"{name}: {len(plan.segments)} segment(s) on {plan.machine.name}"]
    for sp in plan.segments:
        head = f"  region {sp.region_id} segment {sp.segment.id} {sp.kind.value}"
        if sp.loop is not None:
            lp = sp.loop
            div = lp.division
            counts = div.counts if div.n_itrs is not None else "symbolic"
            mode = "fixed-size worklist" if lp.fixed_size else f"stealing, chunk {lp.chunk}"
            lines.append(f"{head}: loop {lp.loop_id}, {mode}, counts {counts}")
        elif sp.sections is not None:
            sa = sp.sections
            lines.append(f"{head}: owners {list(sa.thread_of)}, max/thread {sa.max_per_thread}, "
                         f"wl_im {sa.wl_im:.6g}")
        elif sp.migration is not None:
            mp = sp.migration
            pairs = ", ".join(f"mp {p.mp} -> mgp {p.mgp}" for p in mp.pairs) or "none"
            lines.append(f"{head}: exchange points {pairs}")
        else:
            lines.append(head)
    return "\n".join(lines)


def comparison_table(rows: List[Comparison]) -> str:
    lines = [f"{'BM':<12} {'policy':<6} {'Time':>12} {'Energy':>12}"]
    for c in rows:
        for rep in (c.hmp, c.ces):
            lines.append(f"{c.name:<12} {rep.policy:<6} {rep.makespan:>12.6g} {rep.energy:>12.6g}")
    return "\n".join(lines)


# -- commands ------------------------------------------------------------------

def cmd_analyze(args) -> int:
    m = machine_for(args)
    d = out_dir(args)
    for src in args.sources:
        plan = analyze(load_program(src), m, args.threads)
        path = os.path.join(d, stem(src) + ".plan.json")
        write(path, json.dumps(plan.to_dict(), indent=2) + "\n")
        print(plan_summary(stem(src), plan))
        print(f"  plan written to {path}")
    return EXIT_OK


def cmd_transform(args) -> int:
    m = machine_for(args)
    d = out_dir(args)
    for src in args.sources:
        prog = load_program(src)
        plan = analyze(prog, m, args.threads)
        text = emit_text(transform_program(prog, plan, src))
        parse(text, src)  # the output must stay inside the dialect
        path = os.path.join(d, stem(src) + ".ces.c")
        write(path, text)
        print(f"{src} -> {path}")
    return EXIT_OK


def _write_report(d: str, name: str, rep: SimReport, trace_csv: bool):
    write(os.path.join(d, f"{name}.{rep.policy}.json"), rep.to_json() + "\n")
    if trace_csv:
        with open(os.path.join(d, f"{name}.{rep.policy}.trace.csv"), "w", newline="") as fh:
            rep.write_trace_csv(fh)


def cmd_simulate(args) -> int:
    m = machine_for(args)
    d = out_dir(args)
    for src in args.sources:
        rep = simulate(load_program(src), m, args.policy, args.threads, trace=args.trace_csv)
        _write_report(d, stem(src), rep, args.trace_csv)
        print(f"{stem(src)}:")
        print(rep.summary_table())
        for w in rep.warnings:
            print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _emit_comparison(d: str, rows: List[Comparison], basename: str):
    from .plotting import plot_normalized

    write(os.path.join(d, basename + ".csv"), comparison_csv(rows))
    plot_normalized(rows, os.path.join(d, basename + ".png"))
    print(comparison_table(rows))
    print(f"normalized CSV and figure written to {os.path.join(d, basename)}.{{csv,png}}")


def cmd_compare(args) -> int:
    m = machine_for(args)
    d = out_dir(args)
    rows = []
    for src in args.sources:
        c = compare(load_program(src), m, stem(src), args.threads, trace=args.trace_csv)
        if args.trace_csv:
            _write_report(d, c.name, c.hmp, True)
            _write_report(d, c.name, c.ces, True)
        rows.append(c)
    _emit_comparison(d, rows, "compare")
    return EXIT_OK


def corpus_checks(name: str, source: str, machine: MachineConfig,
                  n_threads: Optional[int]) -> Tuple[Comparison, List[str]]:
    """Round-trip, transform, rejection and simulation checks for one kernel."""
    failures = []
    prog = parse(source, name)
    if parse(emit_text(prog), name) != prog:
        failures.append("parse/emit round trip changed the program")
    plan = analyze(prog, machine, n_threads)
    transformed = parse(emit_text(transform_program(prog, plan, name)), name + ".ces.c")
    try:
        transform_program(transformed, plan)
        failures.append("transformed output was accepted for a second transform")
    except CompileError as e:
        if "reserved identifiers present" not in str(e):
            failures.append(f"unexpected re-transform error: {e}")
    cmp = compare(prog, machine, name, n_threads)
    direct = simulate(transformed, machine, "ces", n_threads, trace=False)
    if direct.iterations != cmp.ces.iterations:
        failures.append("simulating the transformed file changed the executed iterations")
    return cmp, failures


def cmd_corpus_test(args) -> int:
    m = machine_for(args)
    d = out_dir(args)
    rows, bad = [], 0
    for name in data.corpus_names():
        cmp, failures = corpus_checks(name, data.corpus_source(name), m, args.threads)
        rows.append(cmp)
        status = "ok" if not failures else "FAIL"
        print(f"{status:<4} {name:<10} time x{cmp.time_ratio:.3f} energy x{cmp.energy_ratio:.3f}")
        for f in failures:
            print(f"     {f}")
        bad += bool(failures)
    _emit_comparison(d, rows, "corpus")
    if bad:
        raise InvariantViolation(f"{bad} corpus kernel(s) failed")
    return EXIT_OK


COMMANDS = {
    "analyze": (cmd_analyze, "write the scheduling plan as JSON and print a summary"),
    "transform": (cmd_transform, "write <name>.ces.c for each source"),
    "simulate": (cmd_simulate, "simulate one policy and write its report"),
    "compare": (cmd_compare, "simulate both policies and write normalized CSV and figures"),
    "corpus-test": (cmd_corpus_test, "run every check on the bundled corpus"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", metavar="JSON", help="machine configuration file")
    common.add_argument("--policy", choices=POLICIES, default="ces")
    common.add_argument("--threads", type=_positive_int, metavar="N",
                        help="team size (default: number of cores)")
    common.add_argument("--freq", metavar="big=HZ,little=HZ", help="core frequency overrides")
    common.add_argument("--out", metavar="DIR", help="output directory (default: .)")
    common.add_argument("--trace-csv", action="store_true", help="also write event traces as CSV")
    p = argparse.ArgumentParser(prog="cesched", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name != "corpus-test":
            sp.add_argument("sources", nargs="+", metavar="SOURCE")
    return p


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid thread count {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("thread count must be at least 1")
    return v


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return COMMANDS[args.command][0](args)
    except UsageError as e:
        print(f"cesched: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as e:
        print(f"cesched: invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (CesError, OSError) as e:
        print(f"cesched: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        print(f"cesched: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
