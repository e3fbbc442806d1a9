"""Experiment harness: instance generation, algorithm runs, protocol trials,
and report aggregation.

All randomized commands require an explicit --seed (environment-variable
defaults are deliberately unsupported), and identical (config, seed) pairs
produce byte-identical outputs: JSON is emitted with sorted keys and
reports carry no timestamps.  A JSON config file may supply any long-option
value; explicit flags win over the config file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .blackboard import random_table_protocol, transcript_distribution
from .cleaning import clean_simulate, observation_probability
from .distributions import tv_distance
from .instances import (
    DisjInstance,
    adversarial_no_instance,
    adversarial_yes_instance,
    sample_eta,
    verify_promise,
)
from .lowrank import gen_lowrank_instance
from .reductions import (
    fp_reduction_params,
    hh_reduction_params,
    linear_sketch_adversary,
    powerlaw_reduction_params,
    to_fp_stream,
    to_hh_stream,
    to_powerlaw_stream,
)
from .setdisj import (
    deterministic_disj_protocol,
    epsilon_publish_protocol,
    pigeonhole_promise_protocol,
)
from .sketches import CountSketch, MisraGries
from .sparse_recovery import SyndromeSketch
from .streams import (
    StreamHeader,
    exact_heavy_hitters,
    read_stream_text,
    replay_updates,
    write_stream_text,
)
from .turnstile import BoundedTurnstileHH
from . import rng as rngmod

CSV_COLUMNS_DOC = """\
Report CSV columns (emitted by `report`, one row per collected JSON report):
  kind        report type (run-mg | run-countsketch | run-turnstile-hh |
              run-sparse-recovery | protocol-* | adversary)
  n           universe size of the underlying stream or instance
  param       main accuracy knob (eps for heavy hitters, sparsity for
              recovery, capacity for mg; empty otherwise)
  seed        seed the report was produced with (empty if deterministic)
  words       state size in machine words (empty when not applicable)
  bits        total communication in bits (protocol reports)
  max_player_bits  largest single-player communication (protocol reports)
  error_rate  measured error or failure rate (empty when not applicable)
  extra       JSON blob with the remaining report-specific fields
"""


def _emit(obj: dict, out: str | None) -> None:
    payload = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(payload)
    else:
        sys.stdout.write(payload)


def _fail(exc: Exception) -> int:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True)
        + "\n"
    )
    return 2


def _require_seed(args) -> int:
    if args.seed is None:
        raise ValueError("an explicit --seed is required for randomized commands")
    return args.seed


def _gen_instance(args) -> DisjInstance:
    seed = _require_seed(args)
    if args.source == "eta":
        sample = sample_eta(args.n, args.k, args.l, 1 if args.label == "yes" else 0, seed)
        return sample.instance
    if args.label == "yes":
        return adversarial_yes_instance(args.n, args.k, args.l, seed)
    return adversarial_no_instance(args.n, args.k, args.l, seed)


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "disj":
        inst = _gen_instance(args)
        report = verify_promise(inst)
        if not report.ok:
            raise ValueError(f"generated instance violates the promise: {report.violations}")
        Path(args.out).write_text(inst.to_json() + "\n")
        _emit({"kind": "gen-disj", "label": inst.label, "n": inst.n, "k": inst.k,
               "l": inst.l, "out": args.out}, None)
        return 0
    if kind == "lowrank":
        inst = gen_lowrank_instance(args.d, args.label.upper(), _require_seed(args))
        Path(args.out).write_text(json.dumps(inst.to_json_obj(), sort_keys=True) + "\n")
        _emit({"kind": "gen-lowrank", "label": inst.label, "d": inst.d,
               "out": args.out}, None)
        return 0
    # stream kinds share the instance -> stream -> file pipeline
    seed = _require_seed(args)
    if kind == "hh-stream":
        k, l = hh_reduction_params(args.n, args.p, args.eps)
    elif kind == "powerlaw":
        k, l = powerlaw_reduction_params(args.n, args.zeta)
    elif kind == "fp":
        k, l = fp_reduction_params(args.n, args.p)
    else:
        raise ValueError(f"unknown gen kind {kind!r}")
    if args.label == "yes":
        inst = adversarial_yes_instance(args.n, k, l, seed)
    else:
        inst = adversarial_no_instance(args.n, k, l, seed)
    if kind == "hh-stream":
        stream = to_hh_stream(inst, args.p, args.eps)
    elif kind == "powerlaw":
        stream = to_powerlaw_stream(inst, args.p, args.zeta)
    else:
        stream = to_fp_stream(inst, args.p)
    idx, sgn = stream.expanded_updates()
    with open(args.out, "w") as fh:
        write_stream_text(fh, stream.header, idx, sgn)
    sidecar = {
        "kind": f"gen-{kind}",
        "n": args.n,
        "k": k,
        "l": l,
        "p": args.p,
        "zeta": args.zeta,
        "eps": args.eps,
        "label": inst.label,
        "star": inst.star,
        "universe": stream.universe,
        "updates": int(idx.size),
        "out": args.out,
    }
    Path(args.out + ".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")
    _emit(sidecar, None)
    return 0


def _load_stream(path: str):
    with open(path) as fh:
        header, idx, sgn = read_stream_text(fh)
    universe = max(2 * header.n, int(idx.max()) + 1 if idx.size else 1)
    return header, idx, sgn, universe


def cmd_run(args) -> int:
    header, idx, sgn, universe = _load_stream(args.stream)
    x = replay_updates(universe, idx, sgn)
    if args.alg == "mg":
        if np.any(sgn < 0):
            raise ValueError("mg runs on positive streams only")
        mg = MisraGries(args.capacity)
        for i in idx.tolist():
            mg.update(int(i))
        worst = max(
            (int(x[i]) - mg.estimate(int(i)) for i in range(universe)), default=0
        )
        report = {
            "kind": "run-mg",
            "n": universe,
            "param": args.capacity,
            "processed": mg.processed,
            "tracked": len(mg),
            "worst_underestimate": worst,
            "bound": mg.error_bound(),
            "words": 2 * args.capacity + 2,
        }
    elif args.alg == "countsketch":
        seed = _require_seed(args)
        cs = CountSketch(args.width, args.depth, seed, universe=universe)
        for i, s in zip(idx.tolist(), sgn.tolist()):
            cs.update(int(i), int(s))
        est = cs.estimate_all(universe)
        err = np.abs(est - x)
        report = {
            "kind": "run-countsketch",
            "n": universe,
            "param": args.eps,
            "seed": seed,
            "width": args.width,
            "depth": args.depth,
            "max_error": int(err.max()),
            "mean_error": float(err.mean()),
            "heavy_hitters": sorted(cs.heavy_hitters(args.eps)),
            "words": args.width * args.depth,
        }
    elif args.alg == "turnstile-hh":
        bound = args.length_bound or int(idx.size)
        state = BoundedTurnstileHH(universe, args.eps, bound)
        runs_idx, runs_cnt, runs_sgn = _as_runs(idx, sgn)
        state.ingest_runs(runs_idx, runs_cnt, runs_sgn)
        truth = exact_heavy_hitters(x, args.eps)
        if args.strict:
            found = state.query_strict()
            ok = set(found) >= truth and all(
                i in exact_heavy_hitters(x, args.eps / 2) for i in found
            )
            report = {
                "kind": "run-turnstile-hh",
                "n": universe,
                "param": args.eps,
                "mode": "strict",
                "S": state.sparsity,
                "words": state.word_count(),
                "found": sorted(int(i) for i in found),
                "exact": sorted(truth),
                "guarantee_ok": bool(ok),
                "error_rate": 0.0 if ok else 1.0,
            }
        else:
            est, bound_val = state.query_linf()
            diff = {i: abs(est.get(i, 0) - int(x[i])) for i in range(universe)}
            worst = max(diff.values(), default=0)
            report = {
                "kind": "run-turnstile-hh",
                "n": universe,
                "param": args.eps,
                "mode": "linf",
                "S": state.sparsity,
                "words": state.word_count(),
                "linf_error": int(worst),
                "error_bound": bound_val,
                "guarantee_ok": bool(worst <= bound_val),
            }
    elif args.alg == "sparse-recovery":
        sk = SyndromeSketch(universe, args.sparsity)
        sk.update_bulk(idx, sgn)
        decoded = sk.decode()
        truth = {int(i): int(x[i]) for i in np.nonzero(x)[0]}
        report = {
            "kind": "run-sparse-recovery",
            "n": universe,
            "param": args.sparsity,
            "decoded": decoded is not None,
            "exact": decoded == truth if decoded is not None else False,
            "support": len(truth),
            "words": 2 * args.sparsity,
        }
    else:
        raise ValueError(f"unknown algorithm {args.alg!r}")
    _emit(report, args.out)
    return 0


def _as_runs(idx: np.ndarray, sgn: np.ndarray):
    if idx.size == 0:
        return idx, idx, sgn
    change = np.nonzero((np.diff(idx) != 0) | (np.diff(sgn) != 0))[0] + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [idx.size]])
    return idx[starts], (ends - starts).astype(np.int64), sgn[starts]


def cmd_protocol(args) -> int:
    seed = _require_seed(args)
    if args.name == "clean-sim":
        spec = random_table_protocol(args.players, args.rounds, seed)
        clean = clean_simulate(spec, args.player)
        worst = 0.0
        for bits in range(2 ** spec.players):
            inputs = [(bits >> j) & 1 for j in range(spec.players)]
            base = transcript_distribution(spec, inputs)
            sim = clean.transcript_distribution(inputs)
            atoms = base.support() | sim.support()
            worst = max(
                worst,
                max(abs(float(base.prob(a)) - float(sim.prob(a))) for a in atoms),
            )
        zeros = [0] * spec.players
        ei = list(zeros)
        ei[args.player] = 1
        tv = tv_distance(
            transcript_distribution(spec, zeros), transcript_distribution(spec, ei)
        )
        pstar = observation_probability(clean, args.player)
        report = {
            "kind": "protocol-clean-sim",
            "players": spec.players,
            "rounds": args.rounds,
            "seed": seed,
            "player": args.player,
            "max_atom_deviation": worst,
            "observation_probability": pstar,
            "tv_zero_vs_ei": tv,
            "agreement": abs(pstar - tv),
        }
        _emit(report, args.out)
        return 0
    inst = DisjInstance.from_json(Path(args.instance).read_text())
    truth = 1 if verify_promise(inst).label == "YES" else 0
    if args.name == "deterministic":
        proto = deterministic_disj_protocol(inst.n, inst.k)
    elif args.name == "eps-publish":
        proto = epsilon_publish_protocol(inst.n, inst.k, inst.l, args.eps)
    elif args.name == "pigeonhole":
        proto = pigeonhole_promise_protocol(inst.n, inst.k)
    else:
        raise ValueError(f"unknown protocol {args.name!r}")
    errors = 0
    bits = []
    per_player_max = 0
    for trial in range(args.trials):
        run = proto.run(inst, rngmod.trial_seed(seed, trial))
        errors += int(run.output != truth)
        bits.append(run.bit_cost)
        per_player_max = max(per_player_max, max(run.per_player_bits))
    report = {
        "kind": f"protocol-{args.name}",
        "n": inst.n,
        "k": inst.k,
        "l": inst.l,
        "label": inst.label,
        "seed": seed,
        "trials": args.trials,
        "bits": max(bits),
        "mean_bits": sum(bits) / len(bits),
        "max_player_bits": per_player_max,
        "error_rate": errors / args.trials,
    }
    _emit(report, args.out)
    return 0


def cmd_adversary(args) -> int:
    if args.matrix:
        m = np.load(args.matrix)
    else:
        seed = _require_seed(args)
        gen = rngmod.stream(seed, 0, 9)
        m = gen.standard_normal((args.r, args.n))
    adv = linear_sketch_adversary(m)
    x1, x2 = adv.x1, adv.x2
    q, _ = np.linalg.qr(np.asarray(m, dtype=np.float64).T)
    mo = q.T[: m.shape[0]]
    sketch_gap = float(np.linalg.norm(mo @ (x1 - x2)))
    checks = {
        "sketch_gap": sketch_gap,
        "x1_nonnegative": bool(np.all(x1 >= 0)),
        "star_mass": float(x1[adv.istar] ** 2),
        "x1_norm_sq": float(np.dot(x1, x1)),
        "star_heavy_in_x1": bool(adv.istar in exact_heavy_hitters(x1, 0.25)),
        "star_heavy_in_x2": bool(adv.istar in exact_heavy_hitters(x2, 0.25)),
    }
    report = {
        "kind": "adversary",
        "n": int(m.shape[1]),
        "r": int(m.shape[0]),
        "istar": adv.istar,
        "checks": checks,
        "x1": [round(float(v), 12) for v in x1.tolist()],
        "x2": [round(float(v), 12) for v in x2.tolist()],
    }
    _emit(report, args.out)
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in sorted(Path(args.results).glob("*.json")):
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict) or "kind" not in obj:
            continue
        core = {
            "kind": obj.get("kind", ""),
            "n": obj.get("n", ""),
            "param": obj.get("param", obj.get("eps", "")),
            "seed": obj.get("seed", ""),
            "words": obj.get("words", ""),
            "bits": obj.get("bits", ""),
            "max_player_bits": obj.get("max_player_bits", ""),
            "error_rate": obj.get("error_rate", ""),
        }
        extra = {k: v for k, v in obj.items() if k not in core}
        core["extra"] = json.dumps(extra, sort_keys=True)
        rows.append(core)
    out_csv = Path(args.out) / "report.csv"
    out_json = Path(args.out) / "report.json"
    os.makedirs(args.out, exist_ok=True)
    cols = ["kind", "n", "param", "seed", "words", "bits", "max_player_bits",
            "error_rate", "extra"]
    with open(out_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        writer.writerows(rows)
    out_json.write_text(json.dumps(rows, sort_keys=True, indent=2) + "\n")
    _emit({"kind": "report", "rows": len(rows), "csv": str(out_csv),
           "json": str(out_json)}, None)
    return 0


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if getattr(args, "config", None):
        conf = json.loads(Path(args.config).read_text())
        for key, value in conf.items():
            attr = key.replace("-", "_")
            if getattr(args, attr, None) is None:
                setattr(args, attr, value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchlab",
        description=__doc__,
        epilog=CSV_COLUMNS_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate instances and streams")
    g.add_argument("kind", choices=["disj", "hh-stream", "powerlaw", "fp", "lowrank"])
    g.add_argument("--config")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--l", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--eps", type=float)
    g.add_argument("--zeta", type=float)
    g.add_argument("--label", choices=["yes", "no"], default=None)
    g.add_argument("--source", choices=["eta", "adversarial"], default=None)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run an algorithm over a stream file")
    r.add_argument("alg", choices=["mg", "countsketch", "turnstile-hh", "sparse-recovery"])
    r.add_argument("--config")
    r.add_argument("--stream", required=True)
    r.add_argument("--capacity", type=int)
    r.add_argument("--width", type=int)
    r.add_argument("--depth", type=int)
    r.add_argument("--eps", type=float)
    r.add_argument("--sparsity", type=int)
    r.add_argument("--length-bound", type=int, default=None)
    r.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("protocol", help="run protocol trials")
    p.add_argument("name", choices=["deterministic", "eps-publish", "pigeonhole", "clean-sim"])
    p.add_argument("--config")
    p.add_argument("--instance")
    p.add_argument("--eps", type=float)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--players", type=int, default=3)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--player", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_protocol)

    a = sub.add_parser("adversary", help="linear-sketch adversarial pair")
    a.add_argument("--config")
    a.add_argument("--matrix", help=".npy file with the sketch matrix")
    a.add_argument("--r", type=int)
    a.add_argument("--n", type=int)
    a.add_argument("--seed", type=int)
    a.add_argument("--out")
    a.set_defaults(func=cmd_adversary)

    rep = sub.add_parser("report", help="aggregate JSON reports into CSV + JSON")
    rep.add_argument("--results", required=True)
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        if getattr(args, "label", None) is None and args.command == "gen":
            args.label = "no"
        if getattr(args, "source", None) is None and args.command == "gen":
            args.source = "adversarial"
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - uniform machine-readable failures
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
