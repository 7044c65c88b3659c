"""Compare the compiled and pure-Python trial kernels.

Runs every forwarding model on a mid-sized topology with both backends,
checks that the hit counts are identical (they follow the same draw
contract), and reports wall time plus speedup.

Usage: python benchmarks/bench_kernels.py [--trials N]
"""

from __future__ import annotations

import argparse
import time

from meshrel import available_backends, ladder
from meshrel.simulate import MODELS, TrialConfig, simulate


def bench(trials: int) -> None:
    g = ladder(4, 12, 0.8)
    backends = [b for b in available_backends() if b != "auto"]
    print(f"topology: width-4 length-12 ladder ({g.node_count} nodes, "
          f"{len(g.edges)} links), {trials} trials per run")
    print(f"{'model':8s} " + " ".join(f"{b:>12s}" for b in backends) + "  speedup")
    for model in MODELS:
        cfg = TrialConfig(model=model, trials=trials, seed=2024)
        times: dict[str, float] = {}
        tables = {}
        for backend in backends:
            start = time.perf_counter()
            tables[backend] = simulate(g, cfg, backend=backend)
            times[backend] = time.perf_counter() - start
        hits = {backend: table.hits for backend, table in tables.items()}
        first = hits[backends[0]]
        if any(h != first for h in hits.values()):
            raise SystemExit(f"FAIL: backends disagree on {model} hit counts")
        cells = " ".join(f"{times[b]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            speedup = times["python"] / times["cython"]
            print(f"{model:8s} {cells}  {speedup:6.1f}x")
        else:
            print(f"{model:8s} {cells}  (compiled lane not built)")
    print("hit counts identical across backends")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200_000,
                        help="trials per model per backend (default 200000)")
    args = parser.parse_args()
    bench(args.trials)


if __name__ == "__main__":
    main()
