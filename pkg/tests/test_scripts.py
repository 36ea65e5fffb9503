import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parents[1] / "scripts"))

from make_synthetic_graph import synthetic_edges, synthetic_graph, write_tsv  # noqa: E402
from regomax.graph import read_graph  # noqa: E402
import reproduce_editions  # noqa: E402


def test_synthetic_edges_exact_and_distinct(tmp_path):
    src, dst = synthetic_edges(500, 3000, seed=2)
    keys = src * 500 + dst
    assert len(np.unique(keys)) == 3000 and not np.any(src == dst)
    write_tsv(tmp_path / "g.tsv", 500, src, dst, chunk=1000)
    assert read_graph(str(tmp_path / "g.tsv")) == synthetic_graph(500, 3000, seed=2)


def test_synthetic_dangling_fraction():
    g = synthetic_graph(2000, 10000, dangling=0.3, seed=1)
    assert 0.25 < np.mean(g.out_degree() == 0) < 0.35


def test_edition_pipeline_on_synthetic_data(tmp_path):
    data, out = tmp_path / "data", tmp_path / "out"
    reproduce_editions.make_synthetic(data, n_editions=2, nodes=400, n_entities=12)
    reproduce_editions.pipeline(data, out, f=2)
    side = json.loads((out / "average" / "averaged.json").read_text())
    assert len(side["names"]) == 12 and side["editions"] == ["E0", "E1"]
    assert (out / "friends" / "E0" / "friendship.dot").exists()
    assert (out / "overlap" / "overlap.tsv").read_text().count("\n") == 12
