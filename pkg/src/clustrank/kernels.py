"""Kernel backend selection.

The compiled extension is used when importable; set ``CLUSTRANK_PURE_PYTHON=1``
to force the pure-Python fallback.
"""

import os

import numpy as np

from clustrank import _kernels_py

if os.environ.get("CLUSTRANK_PURE_PYTHON", "") not in ("", "0"):
    _native = None
else:
    try:
        from clustrank import _kernels as _native
    except ImportError:  # extension not built
        _native = None

BACKEND = "cython" if _native is not None else "python"
_impl = _native if _native is not None else _kernels_py


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def cross_logsim(x_indptr, x_indices, x_weights, y_counts, y_lengths, background, mu,
                 impl=None):
    impl = impl or _impl
    return impl.cross_logsim(
        _i64(x_indptr), _i64(x_indices), _f64(x_weights), _f64(y_counts),
        _f64(y_lengths), _f64(background), float(mu),
    )


def accumulate_scores(post_indptr, post_docs, post_tf, term_ids, weights, background,
                      doc_lengths, mu, impl=None):
    impl = impl or _impl
    return impl.accumulate_scores(
        _i64(post_indptr), _i64(post_docs), _f64(post_tf), _i64(term_ids),
        _f64(weights), _f64(background), _f64(doc_lengths), float(mu),
    )


def stationary(transition, tol, max_iters, impl=None):
    impl = impl or _impl
    return impl.stationary(_f64(transition), float(tol), int(max_iters))


def hits(weights, tol, max_iters, impl=None):
    impl = impl or _impl
    return impl.hits(_f64(weights), float(tol), int(max_iters))
