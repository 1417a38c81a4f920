"""JIT-compiled kernels. Signatures mirror ``_kernels_numpy`` exactly."""

import numpy as np
from numba import njit

SEG = 8
PROBE_LIMIT = 64
EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True, nogil=True)
def cantor(j, k):
    s = j + k
    return np.uint64(s * (s + 1) // 2 + k)


@njit(cache=True, nogil=True)
def _mix(key):
    z = key
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def poly_mul(a, b, block, out_len, p):
    out = np.zeros(out_len, dtype=np.int64)
    for x in range(a.shape[0]):
        ax = a[x]
        if ax == 0:
            continue
        for y in range(b.shape[0]):
            by = b[y]
            if by == 0:
                continue
            t = block[x, y]
            out[t] = (out[t] + ax * by % p) % p
    return out


@njit(cache=True, nogil=True)
def _upsert(keys, vals, okeys, ovals, ocount, key, val, p):
    nseg = keys.shape[0] // SEG
    mask = np.uint64(nseg - 1)
    home = _mix(key) & mask
    for s in range(PROBE_LIMIT):
        seg = (home + np.uint64(s * (s + 1) // 2)) & mask
        base = np.int64(seg) * SEG
        for slot in range(base, base + SEG):
            kk = keys[slot]
            if kk == key:
                vals[slot] = (vals[slot] + val) % p
                return 0
            if kk == EMPTY:
                keys[slot] = key
                vals[slot] = val % p
                return 0
    n = ocount[0]
    for t in range(n):
        if okeys[t] == key:
            ovals[t] = (ovals[t] + val) % p
            return 0
    if n >= okeys.shape[0]:
        return 1
    okeys[n] = key
    ovals[n] = val % p
    ocount[0] = n + 1
    return 0


@njit(cache=True, nogil=True)
def ht_upsert_many(keys, vals, okeys, ovals, ocount, qkeys, qvals, p):
    for t in range(qkeys.shape[0]):
        if _upsert(keys, vals, okeys, ovals, ocount, qkeys[t], qvals[t], p):
            return 1
    return 0


@njit(cache=True, nogil=True)
def ht_lookup_many(keys, vals, okeys, ovals, ocount, qkeys):
    nseg = keys.shape[0] // SEG
    mask = np.uint64(nseg - 1)
    found = np.zeros(qkeys.shape[0], dtype=np.bool_)
    out = np.zeros(qkeys.shape[0], dtype=np.int64)
    for q in range(qkeys.shape[0]):
        key = qkeys[q]
        home = _mix(key) & mask
        done = False
        for s in range(PROBE_LIMIT):
            seg = (home + np.uint64(s * (s + 1) // 2)) & mask
            base = np.int64(seg) * SEG
            for slot in range(base, base + SEG):
                kk = keys[slot]
                if kk == key:
                    found[q] = True
                    out[q] = vals[slot]
                    done = True
                    break
                if kk == EMPTY:
                    done = True
                    break
            if done:
                break
        if not done:
            for t in range(ocount[0]):
                if okeys[t] == key:
                    found[q] = True
                    out[q] = ovals[t]
                    break
    return found, out


@njit(cache=True, nogil=True)
def accumulate_records(keys, vals, okeys, ovals, ocount, r, rec_off, idx, val, i, lengths, d, min_index, trivial, p):
    cap = d + 2 - lengths[i]
    for rec in range(r.shape[0]):
        lo = rec_off[rec]
        hi = rec_off[rec + 1]
        pos = lo + np.searchsorted(idx[lo:hi], i)
        if pos == hi or idx[pos] != i:
            continue
        w = r[rec] * val[pos] % p
        for a in range(lo, hi):
            j = idx[a]
            if j < min_index or j == trivial:
                continue
            lj = lengths[j]
            if lj + 1 > cap:
                continue
            wj = w * val[a] % p
            for b in range(a, hi):
                k = idx[b]
                if k == trivial:
                    continue
                s = lj + lengths[k]
                if s > cap or (cap - s) & 1:
                    continue
                if _upsert(keys, vals, okeys, ovals, ocount, cantor(j, k), wj * val[b] % p, p):
                    return 1
    return 0
