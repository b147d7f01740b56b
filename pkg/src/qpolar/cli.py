"""Command-line surface.

Subcommands: capacity, split, polarize, bounds, composite.  Channels are
given either as a builtin spec "name:key=val,key=val" (names: erasure,
noiseless, useless, subgroup, random) or as a path to a channel JSON file.

Exit codes: 0 on success, 1 when an experiment detects a bound violation
(which should never happen), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys

from . import __version__
from ._backend import kernel_backend
from .channels import (
    Channel,
    capacity,
    erasure_channel,
    load_channel,
    noiseless,
    random_channel,
    store_channel,
    subgroup_channel,
    useless,
)
from .dists import (
    Alphabet,
    sweep_convolution_gain,
    sweep_l1_uniform_bound,
    sweep_shift_separation,
)
from .polarize import (
    OutputBudgetError,
    build_tree,
    composite_search,
    epsilon_curve,
    leaf_table_rows,
    paths_as_dict,
    report_as_dict,
    sample_paths,
)
from .reduction import canonicalize
from .transform import Permutation, split, split_permuted, sweep_entropy_gain

CHAIN_RULE_TOL = 1e-9


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# channel specs
# ---------------------------------------------------------------------------

_BUILTIN_NAMES = ("erasure", "noiseless", "useless", "subgroup", "random")


def _parse_kv(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            out[key.strip()] = int(value)
        except ValueError:
            try:
                out[key.strip()] = float(value)
            except ValueError:
                raise UsageError(f"cannot parse value {value!r} for {key!r}")
    return out


def _build_builtin(name: str, kv: dict) -> Channel:
    if name == "erasure":
        return erasure_channel(kv.pop("q"), kv.pop("e"))
    if name == "noiseless":
        return noiseless(kv.pop("q"))
    if name == "useless":
        return useless(kv.pop("q"), kv.pop("m", 2))
    if name == "subgroup":
        return subgroup_channel(kv.pop("q"), kv.pop("d"))
    return random_channel(kv.pop("q"), kv.pop("m"), kv.pop("seed", 0))


def parse_channel_spec(spec: str) -> Channel:
    """Builtin channel grammar, or a file path for anything else."""
    name, _, rest = spec.partition(":")
    if name in _BUILTIN_NAMES:
        kv = _parse_kv(rest)
        try:
            channel = _build_builtin(name, kv)
        except KeyError as exc:
            raise UsageError(f"builtin {name!r} is missing parameter {exc}")
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad builtin channel {spec!r}: {exc}")
        if kv:
            extra = ", ".join(sorted(map(str, kv)))
            raise UsageError(f"builtin {name!r} got unknown parameters: {extra}")
        return channel
    try:
        return load_channel(spec)
    except OSError as exc:
        raise UsageError(f"cannot read channel file {spec!r}: {exc}")
    except ValueError as exc:
        raise UsageError(str(exc))


def _header(argv, seed=None) -> dict:
    doc = {
        "tool": "qpolar",
        "version": __version__,
        "kernels": kernel_backend(),
        "command": "qpolar " + " ".join(shlex.quote(a) for a in argv),
    }
    if seed is not None:
        doc["seed"] = seed
    return doc


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_capacity(args, argv) -> int:
    channel = parse_channel_spec(args.channel)
    print(f"{capacity(channel):.12f}")
    return 0


def _cmd_split(args, argv) -> int:
    channel = parse_channel_spec(args.channel)
    if args.pi is not None:
        try:
            pi = Permutation.from_string(args.pi, channel.alphabet)
        except ValueError as exc:
            raise UsageError(str(exc))
        pair = split_permuted(channel, pi)
    else:
        pair = split(channel)
    minus, plus = pair.minus, pair.plus
    if args.reduce:
        minus, plus = canonicalize(minus), canonicalize(plus)
    base = capacity(channel)
    c_minus = capacity(minus)
    c_plus = capacity(plus)
    residual = c_minus + c_plus - 2.0 * base
    print(f"I(W): {base:.12f}")
    print(f"I(W-): {c_minus:.12f}")
    print(f"I(W+): {c_plus:.12f}")
    print(f"minus_gap: {base - c_minus:.12f}")
    print(f"plus_gap: {c_plus - base:.12f}")
    print(f"chain_rule_residual: {residual:.12e}")
    if args.write is not None:
        store_channel(minus, f"{args.write}.minus.json")
        store_channel(plus, f"{args.write}.plus.json")
        print(f"written: {args.write}.minus.json {args.write}.plus.json")
    if abs(residual) > CHAIN_RULE_TOL:
        print(f"VIOLATION: chain rule residual exceeds {CHAIN_RULE_TOL}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_polarize(args, argv) -> int:
    channel = parse_channel_spec(args.channel)
    header = _header(argv, seed=args.seed)
    if args.paths is not None:
        if args.seed is None:
            raise UsageError("--paths requires --seed")
        traces, summary = sample_paths(
            channel, args.depth, args.paths, args.seed,
            max_outputs=args.budget, workers=args.threads,
        )
        doc = dict(header)
        doc["path_summary"] = paths_as_dict(summary)
        _write_json(f"{args.out}.json", doc)
        with open(f"{args.out}.csv", "w", encoding="utf-8") as fh:
            fh.write("path,signs,depth,capacity\n")
            for trace in traces:
                for k, cap in enumerate(trace.capacities):
                    fh.write(f"{trace.index},{trace.signs},{k},{cap!r}\n")
        print(f"paths: {args.paths} depth: {args.depth} seed: {args.seed}")
        print(f"final mean capacity: {summary.depth_mean_capacity[-1]:.12f}")
        print(f"written: {args.out}.json {args.out}.csv")
        return 0
    report = build_tree(
        channel, args.depth, max_outputs=args.budget, delta=args.delta,
        workers=args.threads,
    )
    doc = dict(header)
    doc["report"] = report_as_dict(report)
    _write_json(f"{args.out}.json", doc)
    with open(f"{args.out}.csv", "w", encoding="utf-8") as fh:
        fh.write("signs,capacity\n")
        for signs, cap in leaf_table_rows(report):
            fh.write(f"{signs},{cap!r}\n")
    print(f"depth: {report.depth} leaves: {len(report.leaf_capacities)}")
    print(f"root capacity: {report.root_capacity:.12f}")
    print(f"mean leaf capacity: {report.mean_capacity:.12f}")
    print(f"fraction_high: {report.fraction_high:.6f} "
          f"fraction_low: {report.fraction_low:.6f} (delta={report.delta})")
    print(f"written: {args.out}.json {args.out}.csv")
    return 0


def _format_mass(mass) -> list:
    return [float(v) for v in mass]


def _cmd_bounds(args, argv) -> int:
    try:
        qs = [int(tok) for tok in args.q.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse --q list {args.q!r}")
    header = _header(argv, seed=args.seed)
    results = []
    violations = 0
    for q in qs:
        alphabet = Alphabet(q)
        entry = {"q": q}
        l1 = sweep_l1_uniform_bound(q, args.samples, args.seed)
        entry["l1_uniform_bound"] = {
            "checked": l1.checked,
            "violations": l1.violations,
            "min_slack": l1.min_slack,
            "worst_distribution": _format_mass(l1.worst_mass),
        }
        violations += l1.violations
        if alphabet.is_prime:
            sep = sweep_shift_separation(q, args.samples, args.seed)
            entry["shift_separation_bound"] = {
                "checked": sep.checked,
                "violations": sep.violations,
                "min_slack": sep.min_slack,
                "worst_distribution": _format_mass(sep.worst_mass),
            }
            violations += sep.violations
            gain = sweep_convolution_gain(q, args.samples, args.seed, args.eta)
            entry["convolution_gain"] = {
                "checked": gain.checked,
                "eta": gain.eta,
                "violations": gain.violations,
                "strict_violations": gain.strict_violations,
                "hypothesis_pairs": gain.hypothesis_pairs,
                "min_gain": gain.min_gain,
                "min_hypothesis_gain": (
                    None if gain.min_hypothesis_gain == float("inf")
                    else gain.min_hypothesis_gain
                ),
                "worst_p": _format_mass(gain.worst_p),
                "worst_r": _format_mass(gain.worst_r),
            }
            violations += gain.violations + gain.strict_violations
            pair = sweep_entropy_gain(q, max(1, args.samples // 100), args.seed)
            entry["pair_entropy_gain"] = {
                "pairs": pair.pairs,
                "violations": pair.violations,
                "min_gain": pair.min_gain,
            }
            violations += pair.violations
        else:
            entry["shift_separation_bound"] = "skipped: requires prime q"
            entry["convolution_gain"] = "skipped: requires prime q"
            entry["pair_entropy_gain"] = "skipped: requires prime q"
            print(f"q={q}: composite, shift separation and gain checks skipped")
        results.append(entry)
        for name in ("l1_uniform_bound", "shift_separation_bound",
                     "convolution_gain", "pair_entropy_gain"):
            detail = entry[name]
            if isinstance(detail, str):
                continue
            bad = detail["violations"] + detail.get("strict_violations", 0)
            status = "ok" if bad == 0 else f"{bad} VIOLATIONS"
            floor = detail.get("min_slack", detail.get("min_gain"))
            print(f"q={q} {name}: {status} (min slack {floor:.3e})")
            worst = detail.get("worst_distribution") or detail.get("worst_p")
            if worst is not None:
                print(f"q={q} {name} worst case: {worst}")
    doc = dict(header)
    doc["samples"] = args.samples
    doc["eta"] = args.eta
    doc["results"] = results
    if args.out is not None:
        _write_json(f"{args.out}.json", doc)
        print(f"written: {args.out}.json")
    if violations:
        print(f"VIOLATIONS FOUND: {violations}", file=sys.stderr)
        return 1
    print("no violations")
    return 0


def _cmd_gapcurve(args, argv) -> int:
    try:
        deltas = [float(tok) for tok in args.deltas.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse --deltas list {args.deltas!r}")
    points = epsilon_curve(args.q, deltas, args.samples, args.seed)
    print("delta,empirical_min_gap,channels_in_band")
    for point in points:
        gap_text = "" if point.min_gap is None else repr(point.min_gap)
        print(f"{point.delta},{gap_text},{point.channels}")
        if point.min_gap is None:
            print(f"note: no sampled channel landed in the {point.delta} band",
                  file=sys.stderr)
    if args.out is not None:
        doc = _header(argv, seed=args.seed)
        doc["q"] = args.q
        doc["samples"] = args.samples
        doc["points"] = [
            {"delta": p.delta, "empirical_min_gap": p.min_gap,
             "channels_in_band": p.channels}
            for p in points
        ]
        _write_json(f"{args.out}.json", doc)
        print(f"written: {args.out}.json")
    return 0


def _cmd_composite(args, argv) -> int:
    alphabet_q = args.q
    if Alphabet(alphabet_q).is_prime:
        raise UsageError(
            f"q={alphabet_q} is prime: the plain transform polarizes it, "
            f"use `qpolar split`"
        )
    if args.channel is not None:
        channel = parse_channel_spec(args.channel)
        if channel.q != alphabet_q:
            raise UsageError(
                f"channel has q={channel.q} but --q {alphabet_q} was given"
            )
    else:
        d = next(d for d in range(2, alphabet_q) if alphabet_q % d == 0)
        channel = subgroup_channel(alphabet_q, d)
        print(f"channel: subgroup:q={alphabet_q},d={d} (default)")
    try:
        result = composite_search(
            alphabet_q, channel, args.min_gap,
            exhaustive=True if args.exhaustive else None,
            samples=args.samples, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    print(f"I(W): {capacity(channel):.12f}")
    print(f"identity_gap: {result.identity_gap:.12e}")
    print(f"searched: {result.searched} "
          f"({'exhaustive' if result.exhaustive else 'sampled'})")
    print(f"good permutations (gap >= {result.min_gap}): {len(result.good)}")
    for perm in result.good:
        print(str(perm))
    print(f"best: {result.best} gap {result.best_gap:.12f}")
    if args.out is not None:
        doc = _header(argv, seed=args.seed)
        doc["q"] = alphabet_q
        doc["min_gap"] = result.min_gap
        doc["identity_gap"] = result.identity_gap
        doc["searched"] = result.searched
        doc["exhaustive"] = result.exhaustive
        doc["good"] = [list(p.mapping) for p in result.good]
        doc["best"] = list(result.best.mapping)
        doc["best_gap"] = result.best_gap
        _write_json(f"{args.out}.json", doc)
        print(f"written: {args.out}.json")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpolar",
        description="q-ary channel polarization experiments",
    )
    parser.add_argument("--version", action="version",
                        version=f"qpolar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="print the capacity of a channel")
    p.add_argument("channel", help="builtin spec or channel file")
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("split", help="one transform step and its gaps")
    p.add_argument("channel")
    p.add_argument("--pi", help="input permutation for the second use, "
                                "e.g. 0,2,1,3")
    p.add_argument("--reduce", action="store_true",
                   help="canonicalize the child channels")
    p.add_argument("--write", metavar="PREFIX",
                   help="write child channel files PREFIX.{minus,plus}.json")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("polarize", help="full tree or sampled paths")
    p.add_argument("channel")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--paths", type=int, default=None,
                   help="sample this many paths instead of the full tree")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=20000,
                   help="output-alphabet cap per synthesized channel")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="polarization_report",
                   help="output prefix for the .json and .csv reports")
    p.set_defaults(func=_cmd_polarize)

    p = sub.add_parser("bounds", help="sweep the entropy-bound validators")
    p.add_argument("--q", default="2,3,5,7", help="comma-separated list")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--out", default=None, help="optional report prefix")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("gapcurve", help="empirical one-step gap vs delta band")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--deltas", default="0.05,0.1,0.2,0.3,0.4",
                   help="comma-separated list in (0, 0.5)")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gapcurve)

    p = sub.add_parser("composite", help="permutation search at composite q")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--channel", default=None)
    p.add_argument("--min-gap", type=float, default=0.01)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_composite)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, list(argv))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OutputBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
