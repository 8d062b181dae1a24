"""Pure-Python kernels: token span scanning and logistic-regression training.

This module is the fallback twin of the compiled ``_kernels`` extension.
Both implement the same functions with the same operation order, so their
results are bit-identical; tests assert that equivalence whenever the
extension is available.
"""

from math import exp, log1p

IMPL = "pure"

_APOSTROPHES = ("'", "’")


def tokenize_spans(text):
    """Return [(start, end), ...] for maximal alphanumeric token runs.

    A token is a maximal run of Unicode alphanumeric characters; an
    apostrophe joins a run only when both neighbours are alphanumeric.
    Offsets count Unicode code points.
    """
    spans = []
    n = len(text)
    i = 0
    while i < n:
        if text[i].isalnum():
            start = i
            i += 1
            while i < n:
                c = text[i]
                if c.isalnum():
                    i += 1
                elif c in _APOSTROPHES and i + 1 < n and text[i + 1].isalnum():
                    i += 2
                else:
                    break
            spans.append((start, i))
        else:
            i += 1
    return spans


def _softplus(t):
    # log(1 + exp(t)) without overflow for large |t|
    if t > 0.0:
        return t + log1p(exp(-t))
    return log1p(exp(t))


def _sigmoid(z):
    # C exp() saturates to inf instead of raising; mirror that here so
    # the compiled twin stays bit-identical.
    try:
        return 1.0 / (1.0 + exp(-z))
    except OverflowError:
        return 0.0


def logistic_loss_grad(indptr, indices, counts, labels, weights, bias, l1):
    """Loss and gradient of L1-penalized mean cross-entropy.

    The design matrix is CSR over token counts: row i uses
    indices/counts[indptr[i]:indptr[i+1]].  The bias is not penalized.
    Returns (loss, grad_weights list, grad_bias).
    """
    n_rows = len(indptr) - 1
    n_feat = len(weights)
    gw = [0.0] * n_feat
    gb = 0.0
    loss = 0.0
    for i in range(n_rows):
        lo = indptr[i]
        hi = indptr[i + 1]
        z = bias
        for k in range(lo, hi):
            z += weights[indices[k]] * counts[k]
        y = labels[i]
        if y == 1.0:
            loss += _softplus(-z)
        else:
            loss += _softplus(z)
        d = _sigmoid(z) - y
        gb += d
        for k in range(lo, hi):
            gw[indices[k]] += d * counts[k]
    inv_n = 1.0 / n_rows
    loss *= inv_n
    gb *= inv_n
    for j in range(n_feat):
        w = weights[j]
        loss += l1 * (w if w >= 0.0 else -w)
        g = gw[j] * inv_n
        if w > 0.0:
            g += l1
        elif w < 0.0:
            g -= l1
        gw[j] = g
    return loss, gw, gb


def logistic_train(indptr, indices, counts, labels, weights, bias, l1, lr, epochs):
    """Full-batch gradient descent; mutates ``weights`` in place.

    Returns the final bias.  Deterministic: fixed iteration order, no
    shuffling, plain subgradient step for the L1 term.
    """
    n_rows = len(indptr) - 1
    n_feat = len(weights)
    gw = [0.0] * n_feat
    inv_n = 1.0 / n_rows
    for _ in range(epochs):
        for j in range(n_feat):
            gw[j] = 0.0
        gb = 0.0
        for i in range(n_rows):
            lo = indptr[i]
            hi = indptr[i + 1]
            z = bias
            for k in range(lo, hi):
                z += weights[indices[k]] * counts[k]
            d = _sigmoid(z) - labels[i]
            gb += d
            for k in range(lo, hi):
                gw[indices[k]] += d * counts[k]
        for j in range(n_feat):
            w = weights[j]
            g = gw[j] * inv_n
            if w > 0.0:
                g += l1
            elif w < 0.0:
                g -= l1
            weights[j] = w - lr * g
        bias -= lr * (gb * inv_n)
    return bias
