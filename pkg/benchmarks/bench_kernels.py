"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on inputs shaped like one query of the default pipeline
(50-document initial list, clusters of 5, a 2000-document corpus).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from clustrank import _kernels_py, kernels


def _inputs(rng):
    n_terms = 3000
    # 50 docs x 50 docs similarity: x side CSR, y side dense counts
    indptr, indices, weights = [0], [], []
    y = np.zeros((50, n_terms))
    for i in range(50):
        terms = rng.choice(n_terms, size=300, replace=True)
        uniq, cnt = np.unique(terms, return_counts=True)
        y[i, uniq] = cnt
        indices.extend(uniq.tolist())
        weights.extend((cnt / cnt.sum()).tolist())
        indptr.append(len(indices))
    bg = rng.dirichlet(np.ones(n_terms))
    sim = (np.array(indptr), np.array(indices), np.array(weights), y, y.sum(axis=1), bg,
           2000.0)

    n_docs = 2000
    post_docs, post_tf, post_ptr = [], [], [0]
    for _ in range(n_terms):
        df = int(rng.integers(1, 60))
        post_docs.extend(np.sort(rng.choice(n_docs, size=df, replace=False)).tolist())
        post_tf.extend(rng.integers(1, 5, size=df).astype(float).tolist())
        post_ptr.append(len(post_docs))
    lengths = rng.integers(100, 600, size=n_docs).astype(float)
    ret = (np.array(post_ptr), np.array(post_docs), np.array(post_tf),
           np.array([1, 20, 300, 2999]), np.full(4, 0.25), bg, lengths, 2000.0)

    T = rng.uniform(size=(50, 50))
    T /= T.sum(axis=1, keepdims=True)
    W = rng.uniform(size=(50, 50)) * (rng.uniform(size=(50, 50)) < 0.1)
    W[:, 0] += 0.01
    return {
        "cross_logsim (50x50)": (kernels.cross_logsim, sim),
        "accumulate_scores (2000 docs)": (kernels.accumulate_scores, ret),
        "stationary (50 nodes)": (kernels.stationary, (T, 1e-10, 10_000)),
        "hits (50x50)": (kernels.hits, (W, 1e-10, 10_000)),
    }


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    cases = _inputs(rng)
    impls = [("python", _kernels_py)]
    if kernels._native is not None:
        impls.append(("cython", kernels._native))
    else:
        print("compiled extension not built; timing the Python fallback only")
    print(f"{'kernel':32s} " + " ".join(f"{n:>12s}" for n, _ in impls) + "     speedup")
    for name, (fn, fn_args) in cases.items():
        times = []
        for _, impl in impls:
            number = 1 if impl is _kernels_py else 20
            t = min(timeit.repeat(lambda: fn(*fn_args, impl=impl), number=number,
                                  repeat=args.repeat)) / number
            times.append(t)
        speed = f"{times[0] / times[1]:10.1f}x" if len(times) == 2 else ""
        print(f"{name:32s} " + " ".join(f"{t * 1e3:10.3f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
