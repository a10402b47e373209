"""Pure-Python implementations of the numeric kernels.

Same signatures and semantics as the compiled ``_kernels`` extension; used
when the extension is not built or when ``CLUSTRANK_PURE_PYTHON=1``.
"""

import math

import numpy as np


def cross_logsim(x_indptr, x_indices, x_weights, y_counts, y_lengths, background, mu):
    """log exp(-KL(x || Dir[mu](y))) for every (x row, y row) pair.

    ``x`` is CSR over local term ids with MLE weights summing to 1 per row;
    ``y_counts`` is dense (n_y, n_terms). Pairs where ``y`` assigns zero
    probability to one of ``x``'s terms get ``-inf``.
    """
    n_x = len(x_indptr) - 1
    n_y = y_counts.shape[0]
    out = np.empty((n_x, n_y), dtype=np.float64)
    counts = y_counts.tolist()
    lengths = [float(v) for v in y_lengths]
    for i in range(n_x):
        lo, hi = int(x_indptr[i]), int(x_indptr[i + 1])
        terms = [int(t) for t in x_indices[lo:hi]]
        weights = [float(w) for w in x_weights[lo:hi]]
        prior = [mu * float(background[t]) for t in terms]
        neg_entropy = 0.0
        for w in weights:
            neg_entropy += w * math.log(w)
        for j in range(n_y):
            row = counts[j]
            total = 0.0
            finite = True
            for w, t, p in zip(weights, terms, prior):
                num = row[t] + p
                if num <= 0.0:
                    finite = False
                    break
                total += w * math.log(num)
            if finite:
                out[i, j] = total - math.log(lengths[j] + mu) - neg_entropy
            else:
                out[i, j] = -math.inf
    return out


def accumulate_scores(post_indptr, post_docs, post_tf, term_ids, weights, background,
                      doc_lengths, mu):
    """Document-dependent part of the cross entropy under Dirichlet[mu > 0].

    score[d] = sum_t w_t * log(1 + tf(t, d) / (mu * p(t|C))) - (sum_t w_t) * log(|d| + mu)
    """
    n_docs = len(doc_lengths)
    total_weight = 0.0
    for w in weights:
        total_weight += float(w)
    scores = [-total_weight * math.log(float(n) + mu) for n in doc_lengths]
    for t, w in zip(term_ids, weights):
        t = int(t)
        w = float(w)
        prior = mu * float(background[t])
        for k in range(int(post_indptr[t]), int(post_indptr[t + 1])):
            d = int(post_docs[k])
            scores[d] += w * math.log1p(float(post_tf[k]) / prior)
    return np.asarray(scores, dtype=np.float64).reshape(n_docs)


def stationary(transition, tol, max_iters):
    """Power iteration ``pi <- pi T`` from uniform. Returns (pi, residual, iters)."""
    t = transition.tolist()
    n = len(t)
    pi = [1.0 / n] * n
    residual = math.inf
    for it in range(1, max_iters + 1):
        nxt = [0.0] * n
        for i in range(n):
            p = pi[i]
            row = t[i]
            for j in range(n):
                nxt[j] += p * row[j]
        s = sum(nxt)
        nxt = [v / s for v in nxt]
        residual = sum(abs(a - b) for a, b in zip(nxt, pi))
        pi = nxt
        if residual < tol:
            return np.array(pi), residual, it
    return np.array(pi), residual, max_iters


def hits(weights, tol, max_iters):
    """Weighted HITS on a bipartite hub x authority matrix.

    Returns (authority, hub, residual, iters); vectors are L2-normalized.
    """
    w = weights.tolist()
    n_hub = len(w)
    n_auth = len(w[0]) if n_hub else 0
    auth = [1.0 / math.sqrt(n_auth)] * n_auth
    hub = [1.0 / math.sqrt(n_hub)] * n_hub
    residual = math.inf
    for it in range(1, max_iters + 1):
        new_auth = [0.0] * n_auth
        for i in range(n_hub):
            h = hub[i]
            row = w[i]
            for j in range(n_auth):
                new_auth[j] += row[j] * h
        new_auth = _l2_normalize(new_auth)
        new_hub = [0.0] * n_hub
        for i in range(n_hub):
            row = w[i]
            acc = 0.0
            for j in range(n_auth):
                acc += row[j] * new_auth[j]
            new_hub[i] = acc
        new_hub = _l2_normalize(new_hub)
        residual = math.sqrt(
            sum((a - b) ** 2 for a, b in zip(new_auth, auth))
            + sum((a - b) ** 2 for a, b in zip(new_hub, hub))
        )
        auth, hub = new_auth, new_hub
        if residual < tol:
            return np.array(auth), np.array(hub), residual, it
    return np.array(auth), np.array(hub), residual, max_iters


def _l2_normalize(v):
    norm = math.sqrt(sum(x * x for x in v))
    if norm == 0.0:
        return v
    return [x / norm for x in v]
