#!/usr/bin/env python3
"""Benchmark the numba-jitted hot kernels against the pure-numpy fallback.

Runs the same workloads in two subprocesses (SCREENLAB_NUMBA=1 / 0), prints
a timing table, and cross-checks that both paths produce matching results:
bit-identical bootstrap indices and Leiden partitions, gamma draws equal to
within a few ulps.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time


def _workload():
    import numpy as np

    from screenlab import accel, rng
    from screenlab.emotion_stats import _fit_from_suff, smooth_simplex, DEFAULT_TOL, DEFAULT_MAX_ITER
    from screenlab.phrase_graph import leiden_partition
    from screenlab.synthgen import planted_partition, sample_dirichlet_matrix

    results = {"numba": accel.NUMBA_ENABLED, "timings": {}, "checks": {}}

    def bench(name, fn, repeat=1):
        fn()  # warm-up (includes JIT compilation on the numba path)
        t0 = time.perf_counter()
        out = None
        for _ in range(repeat):
            out = fn()
        results["timings"][name] = (time.perf_counter() - t0) / repeat
        return out

    key = rng.seed_key(99, 0)

    g = bench("gamma_draws_1M", lambda: rng.gammas(np.full(1_000_000, 2.5), key))
    results["checks"]["gamma_digest"] = [float(g[:5].sum()), float(g.sum())]

    idx = bench("bootstrap_idx_2000x1000", lambda: rng.bootstrap_index_matrix(key, 2000, 1000))
    results["checks"]["bootstrap_digest"] = int(idx.sum())

    samples = sample_dirichlet_matrix(np.array([2.0, 1.0, 1.0, 1.0, 5.0, 1.0, 1.0]), 500, seed=3)
    sm = smooth_simplex(samples)
    suff = (np.log(sm).mean(0), sm.mean(0), (sm * sm).mean(0))

    def fits():
        params = None
        for _ in range(500):
            params = _fit_from_suff(*suff, 500, DEFAULT_TOL, DEFAULT_MAX_ITER)
        return params

    params = bench("dirichlet_mle_500fits", fits)
    results["checks"]["alpha0"] = params.alpha0

    graphs = [planted_partition((32, 32, 32, 32), 0.3, 0.02, seed=s)[0] for s in range(10)]

    def leidens():
        out = []
        for s, gg in enumerate(graphs):
            p = leiden_partition(gg, seed=s)
            out.append(tuple(sorted(p.community_of.items())))
        return out

    parts = bench("leiden_10x_planted_128n", leidens)
    import hashlib

    blob = json.dumps(parts, sort_keys=True).encode()
    results["checks"]["leiden_digest"] = hashlib.sha256(blob).hexdigest()

    print(json.dumps(results))


def main():
    if "--worker" in sys.argv:
        _workload()
        return

    rows = {}
    for mode, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, SCREENLAB_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        rows[mode] = json.loads(proc.stdout.strip().splitlines()[-1])
        assert rows[mode]["numba"] == (flag == "1"), "accel flag did not take effect"

    print(f"{'kernel':32s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for name in rows["numba"]["timings"]:
        a = rows["numba"]["timings"][name]
        b = rows["numpy"]["timings"][name]
        print(f"{name:32s} {a * 1e3:9.1f}ms {b * 1e3:9.1f}ms {b / a:8.1f}x")

    ck_a, ck_b = rows["numba"]["checks"], rows["numpy"]["checks"]
    assert ck_a["bootstrap_digest"] == ck_b["bootstrap_digest"], "bootstrap indices diverged"
    assert ck_a["leiden_digest"] == ck_b["leiden_digest"], "leiden partitions diverged"
    ga, gb = ck_a["gamma_digest"], ck_b["gamma_digest"]
    assert abs(ga[1] - gb[1]) / gb[1] < 1e-9, "gamma draws diverged"
    assert abs(ck_a["alpha0"] - ck_b["alpha0"]) / ck_b["alpha0"] < 1e-9, "MLE diverged"
    print("cross-path checks: bootstrap indices and leiden partitions identical; "
          "gamma draws and MLE agree to <1e-9 relative")


if __name__ == "__main__":
    main()
