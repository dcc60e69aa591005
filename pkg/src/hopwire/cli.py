"""``hopwire`` command line: generate -> rewire -> encode -> stats/suggest-r -> train-toy.

Exit codes: 0 success, 2 input/output or dataset problem, 64 usage error,
70 internal numerical error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .encode import PE_KINDS, PaddingWarning, encode
from .errors import DatasetError, GraphError, HopwireError, NotRecoverableError, NumericalError
from .generate import FAMILIES, GeneratorSpec, generate
from .graph import component_diameter, density
from .io import _atomic_write, read_dataset, save_dataset
from .rewire import RewiredGraph, recover_original, rewire

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    """Parse ``"1,2,5"`` or a range ``"1..5"`` (inclusive)."""
    out: List[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def _float_list(text: str) -> List[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _str_list(text: str) -> List[str]:
    return [x.strip() for x in str(text).split(",") if x.strip()]


# --------------------------------------------------------------------------
# helpers


def _read(path) -> tuple:
    if path is None:
        raise UsageError("--input is required")
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"input not found: {p}")
    return read_dataset(p)


def _need_output(args) -> Path:
    if args.output is None:
        raise UsageError("--output is required")
    return Path(args.output)


def _base_graph(item):
    return recover_original(item) if isinstance(item, RewiredGraph) else item


def _plain(item):
    return item.graph if isinstance(item, RewiredGraph) else item


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else float("nan")


def _fully_connected(g) -> bool:
    n = g.num_nodes
    return g.num_edges == n * (n - 1)


# --------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    params = {}
    fam = args.family
    if fam == "erdos":
        params = {"n": args.n, "p": args.p, "retrieval": not args.no_retrieval}
    elif fam == "neighborsmatch":
        params = {"depth": args.depth}
    elif fam == "sbm":
        if args.blocks is None:
            raise UsageError("sbm needs --blocks")
        params = {"blocks": args.blocks, "p_in": args.p_in, "p_out": args.p_out}
    elif fam == "tree":
        params = {"n": args.n}
    try:
        spec = GeneratorSpec(fam, args.num, args.seed, params)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    header, graphs = generate(spec)
    save_dataset(graphs, _need_output(args), header=header)
    print(f"wrote {len(graphs)} {fam} graphs to {args.output}")
    return EXIT_OK


def cmd_rewire(args) -> int:
    if args.r < 1:
        raise UsageError("--r must be >= 1")
    header, items = _read(args.input)
    out = _need_output(args)
    base = [_base_graph(it) for it in items]
    c_e = np.asarray(args.ce_const, dtype=np.float64) if args.ce_const is not None else None
    c_v = np.asarray(args.cv_const, dtype=np.float64) if args.cv_const is not None else None
    rewired = [rewire(g, args.r, cls=args.cls, c_e=c_e, c_v=c_v) for g in base]
    save_dataset(rewired, out, header=header)
    before = _mean([density(g) for g in base])
    after = _mean([density(rw.graph) for rw in rewired])
    print(f"graphs={len(rewired)} mean_density_before={before:.4f} mean_density_after={after:.4f}")
    return EXIT_OK


def cmd_encode(args) -> int:
    if args.pe is None:
        raise UsageError("--pe is required")
    if args.q is not None and args.pe != "lp":
        raise UsageError("--q only applies to --pe lp")
    if args.sign_seed is not None and args.pe != "lp":
        raise UsageError("--sign-seed only applies to --pe lp")
    if args.num_powers is not None and args.pe != "adj":
        raise UsageError("--num-powers only applies to --pe adj")
    if args.pe == "lp" and args.q is None:
        raise UsageError("--pe lp needs --q")
    header, items = _read(args.input)
    out = _need_output(args)
    encoded = []
    padded = 0
    for it in items:
        if args.pe in ("short", "adj") and (not isinstance(it, RewiredGraph) or it.edge_provenance is None):
            raise UsageError("input has no edge provenance; run `hopwire rewire` first")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PaddingWarning)
            rw = encode(it.without_encodings() if isinstance(it, RewiredGraph) else it,
                        args.pe, q=args.q, sign_seed=args.sign_seed, num_powers=args.num_powers)
        if rw.node_pe is not None and rw.node_pe.padded:
            padded += 1
        if not args.keep_provenance:
            rw = RewiredGraph(
                graph=rw.graph,
                edge_provenance=None,
                r=rw.r,
                cls_node=rw.cls_node,
                constant_edge_feature=rw.constant_edge_feature,
                constant_node_feature=rw.constant_node_feature,
                edge_pe=rw.edge_pe,
                node_pe=rw.node_pe,
            )
        encoded.append(rw)
    if padded:
        print(
            f"warning: {padded} of {len(encoded)} graphs have fewer than q={args.q} non-trivial "
            "eigenvectors; their spectral encodings are zero-padded",
            file=sys.stderr,
        )
    save_dataset(encoded, out, header=header)
    print(f"graphs={len(encoded)} pe={args.pe}")
    return EXIT_OK


def cmd_recover(args) -> int:
    header, items = _read(args.input)
    out = _need_output(args)
    recovered = []
    for i, it in enumerate(items):
        if not isinstance(it, RewiredGraph):
            raise NotRecoverableError(f"record {i + 1} carries no rewiring information; not recoverable")
        recovered.append(recover_original(it))
    save_dataset(recovered, out, header=header)
    print(f"graphs={len(recovered)} recovered")
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.r_max < 1:
        raise UsageError("--r-max must be >= 1")
    _, items = _read(args.input)
    base = [_base_graph(it) for it in items]
    print("r\tmean_density\tfully_connected\tmedian_ms_per_graph")
    for r in range(1, args.r_max + 1):
        dens, full, times = [], [], []
        for g in base:
            t0 = time.perf_counter()
            rw = encode(rewire(g, r), "adj")
            times.append(time.perf_counter() - t0)
            dens.append(density(rw.graph))
            full.append(_fully_connected(rw.graph))
        # wall-clock times vary run to run; only this column is non-deterministic
        med = float(np.median(times)) * 1e3 if times else float("nan")
        print(f"{r}\t{_mean(dens):.4f}\t{_mean(full):.4f}\t{med:.3f}")
    return EXIT_OK


def suggest_r(graphs, threshold: float = 0.5):
    """Smallest r whose mean rewired density exceeds ``threshold``.

    Returns ``(r, curve, exceeded)`` where ``curve`` lists ``(r, mean density)``
    for every radius tried. If the density saturates without exceeding the
    threshold, ``r`` is the saturating radius and ``exceeded`` is False.
    """
    graphs = [_base_graph(g) for g in graphs]
    if not graphs or all(g.num_edges == 0 for g in graphs):
        raise DatasetError("all graphs are edgeless; no radius can raise density")
    r_top = max(component_diameter(g) for g in graphs)
    curve = []
    for r in range(1, r_top + 1):
        d = _mean([density(rewire(g, r).graph) for g in graphs])
        curve.append((r, d))
        if d > threshold:
            return r, curve, True
    return r_top, curve, False


def cmd_suggest_r(args) -> int:
    _, items = _read(args.input)
    r, curve, exceeded = suggest_r(items, args.threshold)
    for rr, d in curve:
        print(f"r={rr} mean_density={d:.4f}", file=sys.stderr)
    if not exceeded:
        print(
            f"warning: mean density never exceeds {args.threshold} (saturates at {curve[-1][1]:.4f}); "
            f"reporting the saturating radius",
            file=sys.stderr,
        )
    print(r)
    return EXIT_OK


def cmd_train_toy(args) -> int:
    from .toygnn.experiments import run_erdos_retrieval, run_neighborsmatch, to_csv
    from .toygnn.train import TrainConfig

    try:
        tc = TrainConfig(
            lr=args.lr,
            patience=args.patience,
            stop_lr=args.stop_lr,
            wall_clock=args.wall_clock,
            batch_size=args.batch_size,
            seed=args.seed,
            max_epochs=args.max_epochs,
            target_accuracy=args.target_accuracy,
        )
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    if args.task == "neighborsmatch":
        cells = run_neighborsmatch(args.r, args.rp, use_cls=args.cls, tc=tc, seed=args.seed, num_samples=args.samples)
    else:
        bad = [k for k in args.pe if k not in PE_KINDS + ("none",)]
        if bad:
            raise UsageError(f"unknown pe kinds {bad}")
        cells = run_erdos_retrieval(
            args.pe, args.adj_powers, tc=tc, seed=args.seed, num_graphs=args.num_graphs, n=args.n, p=args.p
        )
    text = to_csv(cells)
    if args.history_dir is not None:
        hdir = Path(args.history_dir)
        hdir.mkdir(parents=True, exist_ok=True)
        for cell in cells:
            name = "_".join(f"{k}{v}" for k, v in cell.key.items())
            lines = "".join(json.dumps(rec) + "\n" for rec in cell.result.history)
            _atomic_write(hdir / f"history_{name}.jsonl", lines)
    if args.output is None:
        sys.stdout.write(text)
    else:
        _atomic_write(args.output, text)
        print(f"wrote {len(cells)} rows to {args.output}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hopwire", description="Graph rewiring with lossless positional encodings.")
    parser.add_argument("--config", help="JSON object whose keys mirror the command-line flags")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("family", nargs="?", choices=FAMILIES)
    p.add_argument("--num", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--no-retrieval", action="store_true", help="erdos: skip the distinct-graph labelling")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--blocks", type=_int_list)
    p.add_argument("--p-in", type=float, default=0.5)
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rewire", help="expand receptive fields and/or add a CLS node")
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--cls", action="store_true")
    p.add_argument("--ce-const", type=_float_list, help="comma-separated edge feature for added edges")
    p.add_argument("--cv-const", type=_float_list, help="comma-separated node feature for the CLS node")
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("encode", help="attach positional encodings")
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--pe", choices=PE_KINDS)
    p.add_argument("--q", type=int)
    p.add_argument("--sign-seed", type=int)
    p.add_argument("--num-powers", type=int)
    p.add_argument("--keep-provenance", action="store_true", help="keep the edge provenance tags in the output")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("recover", help="reconstruct original graphs")
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("stats", help="density and cost per radius")
    p.add_argument("--input")
    p.add_argument("--r-max", type=int, default=4)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("suggest-r", help="smallest radius with mean density above a threshold")
    p.add_argument("--input")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_suggest_r)

    p = sub.add_parser("train-toy", help="run a synthetic training experiment")
    p.add_argument("task", nargs="?", choices=("neighborsmatch", "erdos"))
    p.add_argument("--r", type=_int_list, default=[1, 2])
    p.add_argument("--rp", type=_int_list, default=[2, 3])
    p.add_argument("--cls", action="store_true")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--pe", type=_str_list, default=["short", "adj"])
    p.add_argument("--adj-powers", type=_int_list, default=[5])
    p.add_argument("--num-graphs", type=int, default=30)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--stop-lr", type=float, default=1e-6)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--wall-clock", type=float, help="seconds per run")
    p.add_argument("--target-accuracy", type=float, default=1.0)
    p.add_argument("--history-dir", help="directory for per-run JSONL training logs")
    p.add_argument("--output", help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_train_toy)
    return parser


_POSITIONALS = {"generate": "family", "train-toy": "task"}


def _apply_config(parser: argparse.ArgumentParser, argv: List[str]) -> List[str]:
    """Merge a ``--config`` JSON object into ``argv``; explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    try:
        with open(known.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"input not found: {known.config}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = {str(k).replace("-", "_"): v for k, v in cfg.items()}
    command = cfg.pop("command", None)
    if not rest or rest[0].startswith("-"):
        if command is None:
            raise UsageError("no subcommand given on the command line or in the config")
        rest = [command] + rest
    command = rest[0]
    positional = _POSITIONALS.get(command)
    if positional and positional in cfg and (len(rest) < 2 or rest[1].startswith("-")):
        rest = [command, str(cfg.pop(positional))] + rest[1:]
    subparser = parser._subparsers._group_actions[0].choices.get(command)
    if subparser is None:
        return rest
    valid = {a.dest for a in subparser._actions}
    unknown = sorted(set(cfg) - valid)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {unknown}")
    for action in subparser._actions:
        if action.dest in cfg:
            value = cfg[action.dest]
            # let the flag's own type parse string-y values such as "1..5"
            if isinstance(value, str) and action.type is not None:
                value = action.type(value)
            action.default = value
    return rest


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # argparse exits on its own for --help and bad flags
            return int(exc.code or 0)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        if args.command in _POSITIONALS and getattr(args, _POSITIONALS[args.command]) is None:
            raise UsageError(f"{args.command} needs a {_POSITIONALS[args.command]}")
        return args.func(args)
    except UsageError as exc:
        print(f"hopwire: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, NotRecoverableError, DatasetError, OSError) as exc:
        msg = str(exc) if not isinstance(exc, FileNotFoundError) or "input not found" in str(exc) else f"input not found: {exc.filename}"
        print(f"hopwire: error: {msg}", file=sys.stderr)
        return EXIT_IO
    except GraphError as exc:
        print(f"hopwire: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, HopwireError) as exc:
        print(f"hopwire: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
