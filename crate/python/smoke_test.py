"""Builds the extension module and exercises every binding once.

Run from anywhere: python3 python/smoke_test.py
"""

import importlib
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module(dest: Path) -> None:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "firedes-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libfiredes.so"
    shutil.copy(lib, dest / "firedes.so")


def close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def main() -> None:
    tmp = Path(tempfile.mkdtemp())
    build_module(tmp)
    sys.path.insert(0, str(tmp))
    fd = importlib.import_module("firedes")

    toy = fd.parse_keel((ROOT / "fixtures" / "toy_noisy.dat").read_text())
    assert len(toy) == 9 and toy.n_features == 2
    assert toy.class_names == ["circle", "square"] and toy.minority == 0

    filtered = fd.filter_dataset(toy, "enn", 3)
    assert filtered.removed == [4], filtered.removed
    assert len(filtered.dataset) == 8
    assert fd.filter_dataset(toy, "rng").kept
    assert all(i < j for i, j in fd.proximity_graph(toy))

    pool = fd.Pool.from_members([([-2.0, -1.0], -3.25), ([0.15, 1.0], 0.33), ([1.0, 0.0], -5.0)])
    assert pool.predict([0.0, 0.0]) == [0, 1, 0]
    assert len(fd.Pool.from_json(pool.to_json())) == 3

    one = fd.classify_query([0.0, 0.0], pool, toy, "I", "OLA", k=4)
    eight = fd.classify_query([0.0, 0.0], pool, toy, "VIII", "OLA", k=2)
    assert one.selected == [0] and one.label == 0
    assert eight.selected == [1] and eight.label == 1

    region = fd.knne_region(filtered.dataset, [0.0, 0.0], 2)
    assert sorted(region.labels) == [0, 0, 1, 1]
    assert len(fd.frienemy_pairs(region)) == 4
    assert fd.dfp_prune(region, pool) == ([1], False)
    d = fd.decide("KNE", pool, region, [0.0, 0.0], minority=toy.minority)
    assert 0.0 <= d.positive_score <= 1.0 and d.selected
    assert len(fd.knn_region(toy, [0.0, 0.0], 4)) == 4

    assert fd.auc([0.9, 0.4, 0.6, 0.2], [1, 1, 0, 0]) == 0.75
    assert close(fd.nemenyi_cd(8, 320, 0.10), 0.5383, 0.005)
    assert close(fd.sign_test_critical(40, 0.05), 25.20, 0.01)
    _, p = fd.wilcoxon([0.9, 0.8, 0.85, 0.7, 0.95, 0.88, 0.91], [0.5, 0.6, 0.55, 0.4, 0.45, 0.52, 0.48])
    assert p < 0.05
    stat, p = fd.friedman([[0.9, 0.5, 0.1], [0.8, 0.6, 0.2], [0.7, 0.4, 0.3], [0.95, 0.5, 0.2]])
    assert stat > 0 and p < 0.05
    assert fd.cliques([1.0, 1.2, 3.0], 0.5) == [[0, 1]]

    iris = fd.Dataset.from_keel((ROOT / "data" / "keel" / "iris0.dat").read_text())
    assert iris.class_counts == (50, 100) and iris.imbalance_ratio == 2.0
    big = fd.generate_pool(iris, 10, 3)
    assert len(big) == 10 and len(big.members[0][0]) == 4
    rows, failures = fd.run_experiment([iris], ["I", "VIII"], ["KNE"], seed=1, pool_size=10)
    assert not failures and len(rows) == 40
    assert all(0.0 <= r[4] <= 1.0 for r in rows)

    try:
        fd.Dataset([[0.0], [1.0]], [0, 2])
    except ValueError:
        pass
    else:
        raise AssertionError("bad label accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
