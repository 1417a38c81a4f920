"""Vectorized numpy kernels, used when numba is disabled or unavailable.

Hash-table updates are applied a whole batch at a time: duplicate keys are
folded first, then all pending keys probe in lock step.  When several keys
race for the same empty slot the first one wins and the rest retry the same
segment.  The resulting key/value map is identical to sequential insertion;
only slot placement may differ.
"""

import numpy as np

SEG = 8
PROBE_LIMIT = 64
EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LANES = np.arange(SEG, dtype=np.int64)


def cantor(j, k):
    j = np.asarray(j, dtype=np.uint64)
    k = np.asarray(k, dtype=np.uint64)
    s = j + k
    return s * (s + np.uint64(1)) // np.uint64(2) + k


def _mix(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _tri(step):
    return (step * (step + 1) // 2).astype(np.uint64)


def poly_mul(a, b, block, out_len, p):
    out = np.zeros(out_len, dtype=np.int64)
    xa = np.flatnonzero(a)
    yb = np.flatnonzero(b)
    if xa.size == 0 or yb.size == 0:
        return out
    terms = (a[xa][:, None] * b[yb][None, :]) % p
    # each term < 2**31, so the int64 sum cannot overflow for any sane block
    np.add.at(out, block[np.ix_(xa, yb)].ravel(), terms.ravel())
    return out % p


def _overflow_upsert(okeys, ovals, ocount, key, val, p):
    n = int(ocount[0])
    hit = np.flatnonzero(okeys[:n] == key)
    if hit.size:
        ovals[hit[0]] = (ovals[hit[0]] + val) % p
        return 0
    if n >= okeys.shape[0]:
        return 1
    okeys[n] = key
    ovals[n] = val % p
    ocount[0] = n + 1
    return 0


def ht_upsert_many(keys, vals, okeys, ovals, ocount, qkeys, qvals, p):
    if qkeys.shape[0] == 0:
        return 0
    uk, inv = np.unique(np.asarray(qkeys, dtype=np.uint64), return_inverse=True)
    agg = np.zeros(uk.shape[0], dtype=np.int64)
    np.add.at(agg, inv, np.asarray(qvals, dtype=np.int64) % p)
    agg %= p

    mask = np.uint64(keys.shape[0] // SEG - 1)
    home = _mix(uk) & mask
    step = np.zeros(uk.shape[0], dtype=np.int64)
    pend = np.arange(uk.shape[0])
    while pend.size:
        over = step[pend] >= PROBE_LIMIT
        if over.any():
            for q in pend[over]:
                if _overflow_upsert(okeys, ovals, ocount, uk[q], agg[q], p):
                    return 1
            pend = pend[~over]
            if not pend.size:
                break
        seg = (home[pend] + _tri(step[pend])) & mask
        slots = seg.astype(np.int64)[:, None] * SEG + _LANES
        rows = keys[slots]
        match = rows == uk[pend][:, None]
        hit = match.any(axis=1)
        if hit.any():
            hs = slots[hit, match[hit].argmax(axis=1)]
            vals[hs] = (vals[hs] + agg[pend[hit]]) % p
        empty = rows == EMPTY
        has_empty = ~hit & empty.any(axis=1)
        settled = hit.copy()
        if has_empty.any():
            cand = np.flatnonzero(has_empty)
            cslot = slots[cand, empty[cand].argmax(axis=1)]
            _, first = np.unique(cslot, return_index=True)
            winners = cand[first]
            wslot = cslot[first]
            keys[wslot] = uk[pend[winners]]
            vals[wslot] = agg[pend[winners]]
            settled[winners] = True
        full = ~hit & ~has_empty
        step[pend[full]] += 1
        pend = pend[~settled]
    return 0


def ht_lookup_many(keys, vals, okeys, ovals, ocount, qkeys):
    qkeys = np.asarray(qkeys, dtype=np.uint64)
    found = np.zeros(qkeys.shape[0], dtype=np.bool_)
    out = np.zeros(qkeys.shape[0], dtype=np.int64)
    mask = np.uint64(keys.shape[0] // SEG - 1)
    home = _mix(qkeys) & mask
    pend = np.arange(qkeys.shape[0])
    for s in range(PROBE_LIMIT):
        if not pend.size:
            break
        seg = (home[pend] + np.uint64(s * (s + 1) // 2)) & mask
        slots = seg.astype(np.int64)[:, None] * SEG + _LANES
        rows = keys[slots]
        match = rows == qkeys[pend][:, None]
        hit = match.any(axis=1)
        found[pend[hit]] = True
        out[pend[hit]] = vals[slots[hit, match[hit].argmax(axis=1)]]
        stop = hit | (rows == EMPTY).any(axis=1)
        pend = pend[~stop]
    n = int(ocount[0])
    for q in pend:
        h = np.flatnonzero(okeys[:n] == qkeys[q])
        if h.size:
            found[q] = True
            out[q] = ovals[h[0]]
    return found, out


def _pair_positions(i, lengths, d, min_index, trivial):
    P = lengths.shape[0]
    cap = d + 2 - lengths[i]
    j, k = np.triu_indices(P)
    s = lengths[j] + lengths[k]
    ok = (j >= min_index) & (j != trivial) & (k != trivial) & (s <= cap) & ((cap - s) % 2 == 0)
    pos = np.full((P, P), -1, dtype=np.int64)
    pos[j[ok], k[ok]] = np.arange(int(ok.sum()))
    return pos, j[ok], k[ok]


def accumulate_records(keys, vals, okeys, ovals, ocount, r, rec_off, idx, val, i, lengths, d, min_index, trivial, p):
    counts = np.diff(rec_off)
    owner = np.repeat(np.arange(r.shape[0]), counts)
    recs = owner[idx == i]
    if not recs.size:
        return 0
    pos, pj, pk = _pair_positions(i, lengths, d, min_index, trivial)
    staged = np.zeros(pj.shape[0], dtype=np.int64)
    touched = np.zeros(pj.shape[0], dtype=np.bool_)
    for rec in recs:
        lo, hi = rec_off[rec], rec_off[rec + 1]
        ix = idx[lo:hi]
        cv = val[lo:hi]
        w = int(r[rec]) * int(cv[np.searchsorted(ix, i)]) % p
        ta, tb = np.triu_indices(hi - lo)
        where = pos[ix[ta], ix[tb]]
        keep = where >= 0
        where = where[keep]
        terms = (w * cv[ta[keep]] % p) * cv[tb[keep]] % p
        staged[where] = (staged[where] + terms) % p
        touched[where] = True
    hit = np.flatnonzero(touched)
    return ht_upsert_many(keys, vals, okeys, ovals, ocount, cantor(pj[hit], pk[hit]), staged[hit], p)
