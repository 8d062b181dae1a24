# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: token span scanning and logistic-regression training.

Bit-identical twin of ``_pure``; keep loop structure and operation order
in sync with that module when editing either.
"""

from cpython.unicode cimport Py_UNICODE_ISALNUM
from libc.math cimport exp, log1p
from libc.stdlib cimport calloc, free

IMPL = "compiled"

DEF APOS = 0x27       # '
DEF APOS_CURLY = 0x2019


def tokenize_spans(unicode text):
    """Return [(start, end), ...] for maximal alphanumeric token runs."""
    cdef list spans = []
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, start
    cdef Py_UCS4 c
    while i < n:
        c = text[i]
        if Py_UNICODE_ISALNUM(c):
            start = i
            i += 1
            while i < n:
                c = text[i]
                if Py_UNICODE_ISALNUM(c):
                    i += 1
                elif (c == APOS or c == APOS_CURLY) and i + 1 < n \
                        and Py_UNICODE_ISALNUM(<Py_UCS4>text[i + 1]):
                    i += 2
                else:
                    break
            spans.append((start, i))
        else:
            i += 1
    return spans


cdef inline double _softplus(double t) noexcept:
    if t > 0.0:
        return t + log1p(exp(-t))
    return log1p(exp(t))


def logistic_loss_grad(long long[:] indptr, long long[:] indices,
                       double[:] counts, double[:] labels,
                       double[:] weights, double bias, double l1):
    """Loss and gradient of L1-penalized mean cross-entropy (CSR input)."""
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t n_feat = weights.shape[0]
    cdef double* gw = <double*>calloc(n_feat if n_feat > 0 else 1, sizeof(double))
    if gw == NULL:
        raise MemoryError()
    cdef double gb = 0.0, loss = 0.0
    cdef double z, y, p, d, w, g, inv_n
    cdef Py_ssize_t i, k, j
    cdef long long lo, hi
    try:
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
            p = 1.0 / (1.0 + exp(-z))
            d = p - y
            gb += d
            for k in range(lo, hi):
                gw[indices[k]] += d * counts[k]
        inv_n = 1.0 / n_rows
        loss *= inv_n
        gb *= inv_n
        out = [0.0] * n_feat
        for j in range(n_feat):
            w = weights[j]
            loss += l1 * (w if w >= 0.0 else -w)
            g = gw[j] * inv_n
            if w > 0.0:
                g += l1
            elif w < 0.0:
                g -= l1
            out[j] = g
        return loss, out, gb
    finally:
        free(gw)


def logistic_train(long long[:] indptr, long long[:] indices,
                   double[:] counts, double[:] labels,
                   double[:] weights, double bias,
                   double l1, double lr, long long epochs):
    """Full-batch gradient descent; mutates ``weights`` in place."""
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t n_feat = weights.shape[0]
    cdef double* gw = <double*>calloc(n_feat if n_feat > 0 else 1, sizeof(double))
    if gw == NULL:
        raise MemoryError()
    cdef double inv_n = 1.0 / n_rows
    cdef double gb, z, p, d, w, g
    cdef Py_ssize_t i, k, j
    cdef long long e, lo, hi
    try:
        for e in range(epochs):
            for j in range(n_feat):
                gw[j] = 0.0
            gb = 0.0
            for i in range(n_rows):
                lo = indptr[i]
                hi = indptr[i + 1]
                z = bias
                for k in range(lo, hi):
                    z += weights[indices[k]] * counts[k]
                p = 1.0 / (1.0 + exp(-z))
                d = p - labels[i]
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
    finally:
        free(gw)
