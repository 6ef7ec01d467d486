"""Compare the numba kernels against the pure-numpy fallback.

Run from the repository root:

    python benchmarks/bench_backends.py [--repeats N]

Each workload is timed under both backends after a warmup call, so numba
JIT compilation is excluded from the figures.
"""

import argparse
import time

import numpy as np

from pepslab import backend
from pepslab.contraction import peps_nev, peps_norm
from pepslab.network import observable_from_matrix, random_network
from pepslab.tiling import WangTileSet, count_tilings_exhaustive


def timed(fn, repeats):
    fn()  # warmup (JIT, caches)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    net = random_network(8, 8, bond_dim=2, delta=0.95, seed=0)
    site = net.graph.vertex_at(3, 3)
    rng = np.random.default_rng(1)
    d = net.phys_dim(site)
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    obs = observable_from_matrix((site,), (m + m.conj().T) / 2)
    tiles = WangTileSet(
        2, ((0, 0, 0, 1), (0, 1, 1, 0), (1, 0, 0, 0), (1, 1, 0, 1))
    )
    a = rng.standard_normal((512, 512)) + 1j * rng.standard_normal((512, 512))
    b = rng.standard_normal((512, 512)) + 1j * rng.standard_normal((512, 512))
    return [
        ("peps_norm 8x8 D=2", lambda: peps_norm(net)),
        ("peps_nev 8x8 D=2", lambda: peps_nev(net, obs)),
        ("tiling count 3x3 t=4", lambda: count_tilings_exhaustive(tiles, 3, 3)),
        ("matmul 512x512", lambda: backend.matmul(a, b)),
    ]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rows = []
    for name, fn in workloads():
        entry = {"workload": name}
        for be in ("numba", "numpy"):
            backend.set_backend(be)
            entry[be] = timed(fn, args.repeats)
        rows.append(entry)
    backend.set_backend("auto")

    print(f"{'workload':<24} {'numba':>10} {'numpy':>10} {'ratio':>7}")
    for r in rows:
        ratio = r["numpy"] / r["numba"]
        print(f"{r['workload']:<24} {r['numba']*1e3:>8.1f}ms {r['numpy']*1e3:>8.1f}ms {ratio:>6.2f}x")


if __name__ == "__main__":
    main()
