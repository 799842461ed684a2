"""Pure numpy kernels; same contracts and arithmetic as ``_ckernels``."""

import math

import numpy as np

LN2 = math.log(2.0)


def js_pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("length mismatch")
    keep = (p > 0) | (q > 0)
    a = p[keep]
    b = q[keep]
    m = 0.5 * (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log(a / m), 0.0)
        tb = np.where(b > 0, b * np.log(b / m), 0.0)
    # ta + tb is commutative, so js_pair(p, q) == js_pair(q, p) bit for bit
    acc = 0.5 * math.fsum((ta + tb).tolist())
    return min(max(acc, 0.0), LN2)


def js_matrix(probs):
    probs = np.ascontiguousarray(probs, dtype=float)
    n = probs.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = js_pair(probs[i], probs[j])
    return out


def agglomerate(dist, method):
    d = np.array(dist, dtype=float, copy=True)
    n = d.shape[0]
    ids = np.arange(n, dtype=np.int64)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    children = np.zeros((max(n - 1, 0), 2), dtype=np.int64)
    heights = np.zeros(max(n - 1, 0))
    iu, ju = np.triu_indices(n, 1)
    for step in range(n - 1):
        live = active[iu] & active[ju]
        ci, cj = iu[live], ju[live]
        vals = d[ci, cj]
        best = vals.min()
        hit = vals == best
        lo = np.minimum(ids[ci[hit]], ids[cj[hit]])
        hi = np.maximum(ids[ci[hit]], ids[cj[hit]])
        k = np.lexsort((hi, lo))[0]
        bi, bj = ci[hit][k], cj[hit][k]
        children[step] = lo[k], hi[k]
        heights[step] = best
        others = active.copy()
        others[[bi, bj]] = False
        da, db = d[bi, others], d[bj, others]
        if method == 0:
            new = np.minimum(da, db)
        elif method == 1:
            new = np.maximum(da, db)
        else:
            new = (size[bi] * da + size[bj] * db) / (size[bi] + size[bj])
        d[bi, others] = new
        d[others, bi] = new
        size[bi] += size[bj]
        active[bj] = False
        ids[bi] = n + step
    return children, heights
