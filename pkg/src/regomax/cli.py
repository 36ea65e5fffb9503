"""Command-line entry point: rank, reduce, sens, aggregate, friends, overlap."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .editions import average_reduced, embed_in_basis, pagerank_of_average, presence_from_mapping, theta_scores
from .friendship import build_network, effective_matrix, to_dot, to_json
from .google import (DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL, ConvergenceError, ConvergenceWarning,
                     GoogleOperator,
                     cheirank, overlap_curve, pagerank, two_d_rank)
from .graph import read_graph, read_subset_file, resolve_subset
from .io import (rank_tsv, read_edition_tables, read_groups, read_presence,
                 read_rank_list, read_reduced, theta_tsv, write_matrix_csv, write_reduced)
from .reduced import SERIES_TOL, compute_components, default_series_max
from .sensitivity import DEFAULT_DELTA, SCHEMES, sensitivity_table

log = logging.getLogger("regomax")

EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_UNCONVERGED = 3


def _ranged(kind, lo=None, hi=None, lo_open=False, hi_open=False):
    def parse(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value {text!r}") from None
        if lo is not None and (x < lo or (lo_open and x == lo)):
            raise argparse.ArgumentTypeError(f"{x} must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (x > hi or (hi_open and x == hi)):
            raise argparse.ArgumentTypeError(f"{x} must be {'<' if hi_open else '<='} {hi}")
        return x
    return parse


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_files(paths):
    out = []
    for p in paths:
        if os.path.isdir(p):
            out.extend(os.path.join(p, f) for f in sorted(os.listdir(p)))
        else:
            out.append(p)
    return out


def write_manifest(outdir: str, command: str, inputs, params: dict) -> None:
    manifest = {
        "command": command,
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in _input_files(inputs)],
        "parameters": params,
        "version": __version__,
    }
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write(outdir: str, name: str, text: str | bytes) -> None:
    mode = "wb" if isinstance(text, bytes) else "w"
    with open(os.path.join(outdir, name), mode) as fh:
        fh.write(text)


def _names_list(text: str) -> list[str]:
    if os.path.isfile(text):
        return read_subset_file(text)
    return [t for t in text.split(",") if t]


def _resolve_in(names, entry: str) -> int:
    if entry in names:
        return names.index(entry)
    try:
        idx = int(entry)
    except ValueError:
        raise SystemExit(f"error: {entry!r} is not in the reduced basis") from None
    if not 0 <= idx < len(names):
        raise SystemExit(f"error: index {idx} outside reduced basis of size {len(names)}")
    return idx


def cmd_rank(args) -> int:
    g = read_graph(args.graph, args.labels)
    op = GoogleOperator(g, args.alpha, args.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.algorithm == "pagerank":
            rv = pagerank(op, args.tol, args.max_iter)
            converged, printed = rv.converged, None
        elif args.algorithm == "cheirank":
            rv = cheirank(g, args.alpha, args.tol, args.max_iter, args.threads)
            converged, printed = rv.converged, None
        else:
            pr = pagerank(op, args.tol, args.max_iter)
            cr = cheirank(g, args.alpha, args.tol, args.max_iter, args.threads)
            order = two_d_rank(pr.ordering, cr.ordering)
            rv = type(pr)(pr.probabilities, order, max(pr.residual, cr.residual),
                          pr.iterations + cr.iterations, pr.converged and cr.converged)
            converged, printed = rv.converged, pr.probabilities
    _write(args.output_dir, "rank.tsv", rank_tsv(rv, g.name_of, printed))
    params = {"algorithm": args.algorithm, "alpha": args.alpha, "tol": args.tol,
              "max_iter": args.max_iter, "threads": args.threads}
    write_manifest(args.output_dir, "rank", [p for p in (args.graph, args.labels) if p], params)
    log.info("%s: N=%d iterations=%d residual=%.3e", args.algorithm, g.node_count, rv.iterations, rv.residual)
    if not converged:
        log.error("not converged within %d iterations", args.max_iter)
        return EXIT_UNCONVERGED
    return 0


def cmd_reduce(args) -> int:
    g = read_graph(args.graph, args.labels)
    subset = resolve_subset(g, read_subset_file(args.subset))
    series_max = args.series_max or default_series_max(args.alpha)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = compute_components(g, subset, args.alpha, args.tol, args.max_iter, args.series_tol,
                               series_max, threads=args.threads)
    extra = {"edition": args.edition} if args.edition else None
    write_reduced(args.output_dir, m, extra)
    params = {"alpha": args.alpha, "tol": args.tol, "max_iter": args.max_iter, "series_tol": args.series_tol,
              "series_max": series_max, "threads": args.threads, "edition": args.edition}
    write_manifest(args.output_dir, "reduce", [p for p in (args.graph, args.labels, args.subset) if p], params)
    w = m.weights
    log.info("lambda_c=%.12f W_rr=%.6g W_pr=%.6g W_qr=%.6g", m.lambda_c, w["W_rr"], w["W_pr"], w["W_qr"])
    if any(issubclass(w.category, ConvergenceWarning) for w in caught) or m.info.get("unconverged_columns"):
        return EXIT_UNCONVERGED
    return 0


def cmd_sens(args) -> int:
    m = read_reduced(args.reduced)
    names = list(m.names)
    u = _resolve_in(names, args.source)
    targets = [_resolve_in(names, t) for t in _names_list(args.targets)]
    if args.diagonal_only:
        rows = []
        for c in targets:
            rows.extend(sensitivity_table(m, u, [c], [c], args.delta, args.scheme))
    else:
        observe = targets if args.observe is None else [_resolve_in(names, t) for t in _names_list(args.observe)]
        rows = sensitivity_table(m, u, targets, observe, args.delta, args.scheme)
    lines = [f"{names[r.source]}\t{names[r.target_link]}\t{names[k]}\t{v:.10g}"
             for r in rows for k, v in r.values.items()]
    _write(args.output_dir, "sensitivity.tsv", "".join(line + "\n" for line in lines))
    params = {"source": args.source, "targets": args.targets, "observe": args.observe, "delta": args.delta,
              "scheme": args.scheme, "diagonal_only": args.diagonal_only}
    write_manifest(args.output_dir, "sens", [args.reduced], params)
    return 0


def cmd_aggregate(args) -> int:
    if args.mode == "theta":
        tables = read_edition_tables(_input_files(args.inputs))
        scores = theta_scores(tables, args.k_top)
        _write(args.output_dir, "theta.tsv", theta_tsv(scores))
        params = {"mode": "theta", "k_top": args.k_top}
        write_manifest(args.output_dir, "aggregate", args.inputs, params)
        return 0

    matrices = [read_reduced(d) for d in args.inputs]
    editions = args.editions.split(",") if args.editions else [
        m.info.get("edition") or os.path.basename(os.path.normpath(d)) for m, d in zip(matrices, args.inputs)]
    if len(editions) != len(matrices):
        raise SystemExit("error: --editions must name one edition per reduced directory")
    order = list(dict.fromkeys(name for m in matrices for name in m.names))
    embedded, member = zip(*(embed_in_basis(m, order) for m in matrices))
    mask = read_presence(args.presence) if args.presence else {}
    presence = presence_from_mapping(editions, order, mask) & np.array(member)
    avg = average_reduced(embedded, presence, editions)
    rv = pagerank_of_average(avg, args.tol)
    for key, a in (("G_R", avg.matrix), ("G_rr", avg.g_rr), ("G_pr", avg.g_pr), ("G_qr", avg.g_qr)):
        write_matrix_csv(os.path.join(args.output_dir, f"{key}.csv"), order, a)
    side = {"names": order, "editions": editions, "weights": avg.weights,
            "presence": presence.astype(int).tolist(),
            "pagerank": [float(x) for x in rv.probabilities]}
    _write(args.output_dir, "averaged.json", json.dumps(side, indent=1) + "\n")
    _write(args.output_dir, "rank.tsv", rank_tsv(rv, order))
    params = {"mode": "average", "editions": editions, "tol": args.tol}
    inputs = [os.path.join(d, f) for d in args.inputs for f in sorted(os.listdir(d))]
    write_manifest(args.output_dir, "aggregate", inputs + ([args.presence] if args.presence else []), params)
    return 0


def cmd_friends(args) -> int:
    m = read_reduced(args.reduced)
    names = list(m.names)
    rows = read_groups(args.groups)
    groups, leaders = {}, []
    for name, group, leader in rows:
        idx = _resolve_in(names, name)
        groups[idx] = group
        if leader:
            leaders.append(idx)
    net = build_network(effective_matrix(m), leaders, groups, args.f, direct=m.g_rr,
                        floor=m.teleport_floor, names=names)
    if args.format in ("json", "both"):
        _write(args.output_dir, "friendship.json", to_json(net))
    if args.format in ("dot", "both"):
        _write(args.output_dir, "friendship.dot", to_dot(net))
    write_manifest(args.output_dir, "friends", [args.reduced, args.groups], {"f": args.f, "format": args.format})
    return 0


def cmd_overlap(args) -> int:
    a, b = read_rank_list(args.list_a), read_rank_list(args.list_b)
    eta = overlap_curve(a, b, args.j_max)
    _write(args.output_dir, "overlap.tsv", "".join(f"{j}\t{e:.12g}\n" for j, e in enumerate(eta, 1)))
    write_manifest(args.output_dir, "overlap", [args.list_a, args.list_b], {"j_max": len(eta)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_ranged(float, 0.5, 1.0, True, True), default=DEFAULT_ALPHA,
                        help="damping factor in (0.5, 1) (default 0.85)")
    common.add_argument("--tol", type=_ranged(float, 0.0, lo_open=True), default=DEFAULT_TOL,
                        help="L1 residual bound (default 1e-12)")
    common.add_argument("--max-iter", type=_ranged(int, 1), default=DEFAULT_MAX_ITER)
    common.add_argument("--threads", type=_ranged(int, 1), default=os.cpu_count() or 1)
    common.add_argument("--output-dir", "-o", default="out")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="regomax", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rank", parents=[common], help="PageRank / CheiRank / 2DRank of an edge list")
    r.add_argument("graph")
    r.add_argument("--labels")
    r.add_argument("--algorithm", choices=("pagerank", "cheirank", "2drank"), default="pagerank")
    r.set_defaults(func=cmd_rank)

    r = sub.add_parser("reduce", parents=[common], help="reduced Google matrix of a node subset")
    r.add_argument("graph")
    r.add_argument("subset")
    r.add_argument("--labels")
    r.add_argument("--series-tol", type=_ranged(float, 0.0, lo_open=True), default=SERIES_TOL)
    r.add_argument("--series-max", type=_ranged(int, 1), default=None)
    r.add_argument("--edition", default=None, help="edition code stored in the sidecar")
    r.set_defaults(func=cmd_reduce)

    r = sub.add_parser("sens", parents=[common], help="link sensitivity on an exported reduced matrix")
    r.add_argument("reduced")
    r.add_argument("--source", required=True)
    r.add_argument("--targets", required=True, help="comma list or file of link targets")
    r.add_argument("--observe", default=None, help="comma list or file of observed nodes (default: targets)")
    r.add_argument("--delta", type=_ranged(float, 0.0, 1.0, True, True), default=DEFAULT_DELTA)
    r.add_argument("--scheme", choices=SCHEMES, default="central")
    r.add_argument("--diagonal-only", action="store_true")
    r.set_defaults(func=cmd_sens)

    r = sub.add_parser("aggregate", parents=[common], help="theta score or averaged reduced matrix")
    r.add_argument("inputs", nargs="+", help="edition table files/dirs (theta) or reduced dirs (average)")
    r.add_argument("--mode", choices=("theta", "average"), default="theta")
    r.add_argument("--k-top", type=_ranged(int, 1), default=100)
    r.add_argument("--presence", default=None)
    r.add_argument("--editions", default=None, help="comma list of edition codes for the reduced dirs")
    r.set_defaults(func=cmd_aggregate)

    r = sub.add_parser("friends", parents=[common], help="friendship network from an exported reduced matrix")
    r.add_argument("reduced")
    r.add_argument("groups")
    r.add_argument("--f", type=_ranged(int, 1), default=4)
    r.add_argument("--format", choices=("dot", "json", "both"), default="both")
    r.set_defaults(func=cmd_friends)

    r = sub.add_parser("overlap", parents=[common], help="top-j overlap curve of two rank lists")
    r.add_argument("list_a")
    r.add_argument("list_b")
    r.add_argument("--j-max", type=_ranged(int, 1), default=None)
    r.set_defaults(func=cmd_overlap)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    os.makedirs(args.output_dir, exist_ok=True)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, IndexError, ConvergenceError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
