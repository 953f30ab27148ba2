"""Inner SGD loops, compiled with numba when available.

The epoch functions visit rating entries one at a time in the given order;
all per-pair coefficients are computed from a snapshot of the pair's factors
taken before any of its planes are touched.
"""

import math

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on minimal installs
    numba = None
    HAVE_NUMBA = False


def _bemf_epoch_impl(P, Q, users, items, kidx, xvals, order, eta, alpha, beta, exact_mode):
    s = P.shape[1]
    D = P.shape[2]
    coef = np.empty(s)
    sig = np.empty(s)
    sm = np.empty(s)
    eta_beta = eta * beta
    for oi in range(order.shape[0]):
        n = order[oi]
        u = users[n]
        i = items[n]
        k0 = kidx[n]
        total = 0.0
        for k in range(s):
            dot = 0.0
            for j in range(D):
                dot += P[u, k, j] * Q[i, k, j]
            if dot >= 0.0:
                sg = 1.0 / (1.0 + math.exp(-dot))
            else:
                ex = math.exp(dot)
                sg = ex / (1.0 + ex)
            sig[k] = sg
            total += sg
        if alpha != 0.0:
            e1 = 0.0
            e2 = 0.0
            if total > 0.0:
                for k in range(s):
                    sm[k] = sig[k] / total
                    e1 += xvals[k] * sm[k]
                    e2 += xvals[k] * xvals[k] * sm[k]
            else:
                # every activation underflowed: poison the pair so the
                # divergence check after the epoch fires
                for k in range(s):
                    sm[k] = math.nan
            for k in range(s):
                like = (1.0 - sig[k]) if k == k0 else -sig[k]
                spread = (xvals[k] * xvals[k] - e2) - 2.0 * e1 * (xvals[k] - e1)
                grad_v = sm[k] * spread
                if exact_mode:
                    grad_v *= 1.0 - sig[k]
                coef[k] = eta * (like + alpha * grad_v)
        else:
            for k in range(s):
                like = (1.0 - sig[k]) if k == k0 else -sig[k]
                coef[k] = eta * like
        for k in range(s):
            c = coef[k]
            for j in range(D):
                pv = P[u, k, j]
                qv = Q[i, k, j]
                P[u, k, j] = pv + c * qv - eta_beta * pv
                Q[i, k, j] = qv + c * pv - eta_beta * qv


def _pmf_epoch_impl(P, Q, users, items, raw, order, eta, lam):
    D = P.shape[1]
    for oi in range(order.shape[0]):
        n = order[oi]
        u = users[n]
        i = items[n]
        dot = 0.0
        for j in range(D):
            dot += P[u, j] * Q[i, j]
        err = raw[n] - dot
        for j in range(D):
            pv = P[u, j]
            qv = Q[i, j]
            P[u, j] = pv + eta * (2.0 * err * qv - 2.0 * lam * pv)
            Q[i, j] = qv + eta * (2.0 * err * pv - 2.0 * lam * qv)


if HAVE_NUMBA:
    bemf_epoch = numba.njit(cache=True)(_bemf_epoch_impl)
    pmf_epoch = numba.njit(cache=True)(_pmf_epoch_impl)
else:  # pragma: no cover
    bemf_epoch = _bemf_epoch_impl
    pmf_epoch = _pmf_epoch_impl
