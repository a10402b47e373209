# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels. See ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, sqrt, fabs, INFINITY

cnp.import_array()


def cross_logsim(const cnp.int64_t[::1] x_indptr, const cnp.int64_t[::1] x_indices,
                 const double[::1] x_weights, const double[:, ::1] y_counts,
                 const double[::1] y_lengths, const double[::1] background, double mu):
    cdef Py_ssize_t n_x = x_indptr.shape[0] - 1
    cdef Py_ssize_t n_y = y_counts.shape[0]
    out_arr = np.empty((n_x, n_y), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, lo, hi
    cdef cnp.int64_t t
    cdef double w, num, total, neg_entropy
    cdef bint finite
    with nogil:
        for i in range(n_x):
            lo = x_indptr[i]
            hi = x_indptr[i + 1]
            neg_entropy = 0.0
            for k in range(lo, hi):
                w = x_weights[k]
                neg_entropy = neg_entropy + w * log(w)
            for j in range(n_y):
                total = 0.0
                finite = True
                for k in range(lo, hi):
                    t = x_indices[k]
                    num = y_counts[j, t] + mu * background[t]
                    if num <= 0.0:
                        finite = False
                        break
                    total = total + x_weights[k] * log(num)
                if finite:
                    out[i, j] = total - log(y_lengths[j] + mu) - neg_entropy
                else:
                    out[i, j] = -INFINITY
    return out_arr


def accumulate_scores(const cnp.int64_t[::1] post_indptr, const cnp.int64_t[::1] post_docs,
                      const double[::1] post_tf, const cnp.int64_t[::1] term_ids,
                      const double[::1] weights, const double[::1] background,
                      const double[::1] doc_lengths, double mu):
    cdef Py_ssize_t n_docs = doc_lengths.shape[0]
    cdef Py_ssize_t n_q = term_ids.shape[0]
    scores_arr = np.empty(n_docs, dtype=np.float64)
    cdef double[::1] scores = scores_arr
    cdef double total_weight = 0.0, w, prior
    cdef Py_ssize_t d, q, k
    cdef cnp.int64_t t
    with nogil:
        for q in range(n_q):
            total_weight = total_weight + weights[q]
        for d in range(n_docs):
            scores[d] = -total_weight * log(doc_lengths[d] + mu)
        for q in range(n_q):
            t = term_ids[q]
            w = weights[q]
            prior = mu * background[t]
            for k in range(post_indptr[t], post_indptr[t + 1]):
                d = post_docs[k]
                scores[d] = scores[d] + w * log1p(post_tf[k] / prior)
    return scores_arr


def stationary(const double[:, ::1] transition, double tol, Py_ssize_t max_iters):
    cdef Py_ssize_t n = transition.shape[0]
    pi_arr = np.full(n, 1.0 / n)
    nxt_arr = np.empty(n)
    cdef double[::1] pi = pi_arr
    cdef double[::1] nxt = nxt_arr
    cdef double residual = INFINITY, s, p
    cdef Py_ssize_t it, i, j
    for it in range(1, max_iters + 1):
        with nogil:
            for j in range(n):
                nxt[j] = 0.0
            for i in range(n):
                p = pi[i]
                for j in range(n):
                    nxt[j] = nxt[j] + p * transition[i, j]
            s = 0.0
            for j in range(n):
                s = s + nxt[j]
            residual = 0.0
            for j in range(n):
                nxt[j] = nxt[j] / s
                residual = residual + fabs(nxt[j] - pi[j])
                pi[j] = nxt[j]
        if residual < tol:
            return pi_arr, residual, it
    return pi_arr, residual, max_iters


cdef void _l2_normalize(double[::1] v) noexcept nogil:
    cdef double norm = 0.0
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        norm = norm + v[i] * v[i]
    norm = sqrt(norm)
    if norm == 0.0:
        return
    for i in range(v.shape[0]):
        v[i] = v[i] / norm


def hits(const double[:, ::1] weights, double tol, Py_ssize_t max_iters):
    cdef Py_ssize_t n_hub = weights.shape[0]
    cdef Py_ssize_t n_auth = weights.shape[1]
    auth_arr = np.full(n_auth, 1.0 / np.sqrt(n_auth))
    hub_arr = np.full(n_hub, 1.0 / np.sqrt(n_hub))
    new_auth_arr = np.empty(n_auth)
    new_hub_arr = np.empty(n_hub)
    cdef double[::1] auth = auth_arr
    cdef double[::1] hub = hub_arr
    cdef double[::1] new_auth = new_auth_arr
    cdef double[::1] new_hub = new_hub_arr
    cdef double residual = INFINITY, acc, h, diff
    cdef Py_ssize_t it, i, j
    for it in range(1, max_iters + 1):
        with nogil:
            for j in range(n_auth):
                new_auth[j] = 0.0
            for i in range(n_hub):
                h = hub[i]
                for j in range(n_auth):
                    new_auth[j] = new_auth[j] + weights[i, j] * h
            _l2_normalize(new_auth)
            for i in range(n_hub):
                acc = 0.0
                for j in range(n_auth):
                    acc = acc + weights[i, j] * new_auth[j]
                new_hub[i] = acc
            _l2_normalize(new_hub)
            residual = 0.0
            for j in range(n_auth):
                diff = new_auth[j] - auth[j]
                residual = residual + diff * diff
                auth[j] = new_auth[j]
            for i in range(n_hub):
                diff = new_hub[i] - hub[i]
                residual = residual + diff * diff
                hub[i] = new_hub[i]
            residual = sqrt(residual)
        if residual < tol:
            return auth_arr, hub_arr, residual, it
    return auth_arr, hub_arr, residual, max_iters
