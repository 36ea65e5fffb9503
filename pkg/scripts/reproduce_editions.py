"""Multi-edition pipeline: per-edition ranking and reduction, then aggregation.

Expected layout of ``data_dir``::

    <EDITION>/graph.tsv     edge list of the edition's network
    <EDITION>/labels.tsv    id<TAB>name for the entities of interest
    entities.txt            candidate entity names, one per line
    groups.tsv              optional: name<TAB>group<TAB>leader(0/1)
    external_top100.txt     optional: an external ranking to compare with

Outputs go to ``out_dir``: per-edition ``rank/`` and ``reduced/`` folders,
``edition_tables.tsv``, ``theta/``, ``average/``, ``friends/<EDITION>/``
and ``overlap/``. ``--synthetic`` first fabricates a small data directory
with the same layout, which is useful for smoke-testing the pipeline.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from regomax.cli import main as cli
from regomax.graph import load_labels
from regomax.io import read_rank_list

K_TOP = 100


def run(argv):
    rc = cli(argv)
    if rc:
        raise SystemExit(f"regomax {' '.join(argv)} exited with {rc}")


def edition_dirs(data_dir):
    return sorted(p for p in Path(data_dir).iterdir() if (p / "graph.tsv").exists())


def process_edition(ed, entities, out, threads):
    code = ed.name
    with open(ed / "labels.tsv", "rb") as fh:
        present = [n for n in load_labels(fh).values() if n in entities]
    present.sort(key=entities.index)
    run(["rank", str(ed / "graph.tsv"), "--labels", str(ed / "labels.tsv"), "--threads", str(threads),
         "-o", str(out / code / "rank")])
    ranked = []
    with open(out / code / "rank" / "rank.tsv") as fh:
        for line in fh:
            name = line.split("\t")[2]
            if name in entities:
                ranked.append(name)
    subset = out / code / "subset.txt"
    subset.write_text("".join(n + "\n" for n in present))
    run(["reduce", str(ed / "graph.tsv"), str(subset), "--labels", str(ed / "labels.tsv"),
         "--edition", code, "--threads", str(threads), "-o", str(out / code / "reduced")])
    return [f"{code}\t{r}\t{name}\n" for r, name in enumerate(ranked[:K_TOP], 1)], present


def pipeline(data_dir, out_dir, threads=1, f=4):
    data_dir, out = Path(data_dir), Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entities = read_rank_list(str(data_dir / "entities.txt"))
    editions = edition_dirs(data_dir)
    if not editions:
        raise SystemExit(f"no <EDITION>/graph.tsv folders under {data_dir}")
    rows, present = [], {}
    for ed in editions:
        r, present[ed.name] = process_edition(ed, entities, out, threads)
        rows.extend(r)
    (out / "edition_tables.tsv").write_text("".join(rows))
    run(["aggregate", str(out / "edition_tables.tsv"), "--mode", "theta", "-o", str(out / "theta")])
    run(["aggregate", *(str(out / ed.name / "reduced") for ed in editions), "--mode", "average",
         "-o", str(out / "average")])

    groups = data_dir / "groups.tsv"
    if groups.exists():
        for ed in editions:
            keep = [ln for ln in groups.read_text().splitlines() if ln.split("\t")[0] in present[ed.name]]
            gfile = out / ed.name / "groups.tsv"
            gfile.write_text("".join(ln + "\n" for ln in keep))
            run(["friends", str(out / ed.name / "reduced"), str(gfile), "--f", str(f),
                 "-o", str(out / "friends" / ed.name)])

    external = data_dir / "external_top100.txt"
    if external.exists():
        theta_list = out / "theta" / "top.txt"
        with open(out / "theta" / "theta.tsv") as fh:
            names = [line.rstrip("\n").split("\t")[3] for line in fh][:K_TOP]
        theta_list.write_text("".join(n + "\n" for n in names))
        run(["overlap", str(theta_list), str(external), "-o", str(out / "overlap")])
        eta = (out / "overlap" / "overlap.tsv").read_text().splitlines()
        print(f"overlap at j={len(eta)}: {eta[-1].split()[1]}")
    print(f"done: {len(editions)} editions -> {out}")


def make_synthetic(data_dir, n_editions=3, nodes=3000, n_entities=40, seed=0):
    """Random editions sharing a pool of named entities, some missing per edition."""
    rng = np.random.default_rng(seed)
    data_dir = Path(data_dir)
    names = [f"Entity{i:03d}" for i in range(n_entities)]
    for e in range(n_editions):
        ed = data_dir / f"E{e}"
        ed.mkdir(parents=True, exist_ok=True)
        src = rng.integers(0, nodes, 8 * nodes)
        popular = rng.zipf(1.5, 8 * nodes) % nodes
        with open(ed / "graph.tsv", "w") as fh:
            fh.write(f"#N={nodes}\n")
            fh.writelines(f"{a}\t{b}\n" for a, b in zip(src.tolist(), popular.tolist()) if a != b)
        keep = rng.random(n_entities) > (0.1 if e else 0.0)
        ids = rng.choice(nodes, n_entities, replace=False)
        with open(ed / "labels.tsv", "w") as fh:
            fh.writelines(f"{i}\t{n}\n" for i, n, k in zip(ids.tolist(), names, keep) if k)
    (data_dir / "entities.txt").write_text("".join(n + "\n" for n in names))
    groups = ["north", "south", "east"]
    (data_dir / "groups.tsv").write_text("".join(
        f"{n}\t{groups[i % 3]}\t{int(i < 3)}\n" for i, n in enumerate(names)))
    (data_dir / "external_top100.txt").write_text("".join(n + "\n" for n in rng.permutation(names)))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("data_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--synthetic", action="store_true", help="fabricate a small data_dir first")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--f", type=int, default=4)
    args = ap.parse_args()
    if args.synthetic:
        make_synthetic(args.data_dir)
    pipeline(args.data_dir, args.out_dir, args.threads, args.f)
    sys.exit(0)
