"""JIT-compiled inner loops for the particle simulators.

Randomness is drawn in bulk by numpy outside the kernels and consumed here:
each event uses one standard exponential (waiting time) and one uniform that
selects both the event kind and the individuals involved (the family chain
uses a second uniform for the replaced individual). When a block runs dry the
kernel returns early and the caller refills it.

Event kinds: 0 resample, 1 select, 2 mutate 0->1, 3 mutate 1->0.
"""

import numpy as np
from numba import njit

RESAMPLE = 0
SELECT = 1
MUTATE_0TO1 = 2
MUTATE_1TO0 = 3


@njit(cache=True)
def moran_events(types, alpha, theta0, theta1, t, horizon, w, u, record,
                 times, kinds, src, tgt, eff):
    """Advance the type process from ``t`` towards ``horizon``.

    ``types`` is modified in place; when ``record`` the events are written
    to the log arrays. Returns ``(t, consumed, done)``; ``done`` is False when
    the random block or the log capacity ran out first.
    """
    N = types.shape[0]
    pairs = N * (N - 1)
    r_res = 0.5 * pairs
    r_sel = alpha * (N - 1)
    r_m0 = N * theta0
    total = r_res + r_sel + r_m0 + N * theta1
    scale = 1.0 / total
    limit = w.shape[0]
    if record and times.shape[0] < limit:
        limit = times.shape[0]
    for k in range(limit):
        t_next = t + w[k] * scale
        if t_next > horizon:
            return horizon, k, True
        t = t_next
        v = u[k] * total
        if v < r_res + r_sel:
            if v < r_res:
                kind = RESAMPLE
                idx = int(v / r_res * pairs)
            else:
                kind = SELECT
                idx = int((v - r_res) / r_sel * pairs)
            if idx >= pairs:
                idx = pairs - 1
            a = idx // (N - 1)
            b = idx % (N - 1)
            if b >= a:
                b += 1
            ok = kind == RESAMPLE or types[a] == 1
            if ok:
                types[b] = types[a]
        else:
            a = -1
            if v < r_res + r_sel + r_m0:
                kind = MUTATE_0TO1
                b = int((v - r_res - r_sel) / r_m0 * N)
                if b >= N:
                    b = N - 1
                ok = types[b] == 0
                if ok:
                    types[b] = 1
            else:
                kind = MUTATE_1TO0
                b = int((v - r_res - r_sel - r_m0) / (total - r_res - r_sel - r_m0) * N)
                if b >= N:
                    b = N - 1
                ok = types[b] == 1
                if ok:
                    types[b] = 0
        if record:
            times[k] = t
            kinds[k] = kind
            src[k] = a
            tgt[k] = b
            eff[k] = ok
    return t, limit, False


@njit(cache=True)
def trace_coalescence(times, kinds, src, tgt, eff, N, sample):
    """Coalescence times among ``sample`` by merging lineages backwards.

    Pairs whose lineages do not meet inside the log get 0 (the start of the
    logged window). Cost is linear in the log length plus the number of pairs.
    """
    K = sample.shape[0]
    coal = np.zeros((K, K))
    holder = -np.ones(N, np.int64)
    first = np.arange(K)
    last = np.arange(K)
    nxt = -np.ones(K, np.int64)
    for k in range(K):
        holder[sample[k]] = k
    groups = K
    for e in range(times.shape[0] - 1, -1, -1):
        if groups <= 1:
            break
        if kinds[e] > SELECT or not eff[e]:
            continue
        g = holder[tgt[e]]
        if g < 0:
            continue
        holder[tgt[e]] = -1
        h = holder[src[e]]
        if h < 0:
            holder[src[e]] = g
            continue
        s = times[e]
        a = first[h]
        while a >= 0:
            b = first[g]
            while b >= 0:
                coal[a, b] = s
                coal[b, a] = s
                b = nxt[b]
            a = nxt[a]
        nxt[last[h]] = first[g]
        last[h] = last[g]
        groups -= 1
    return coal


@njit(cache=True)
def replay_coalescence(times, kinds, src, tgt, eff, coal):
    """Apply the log to ``coal`` in place by forward row copies (O(N) per birth)."""
    N = coal.shape[0]
    for e in range(times.shape[0]):
        if kinds[e] > SELECT or not eff[e]:
            continue
        s = src[e]
        g = tgt[e]
        for k in range(N):
            coal[g, k] = coal[s, k]
            coal[k, g] = coal[k, s]
        coal[s, g] = times[e]
        coal[g, s] = times[e]
        coal[g, g] = times[e]
    return coal


@njit(cache=True)
def _locate(counts, r, skip, m):
    # coordinate of the r-th of m individuals; one individual of counts[skip] is excluded
    if r >= m:
        r = m - 1
    acc = 0
    for c in range(counts.shape[0]):
        acc += counts[c]
        if c == skip:
            acc -= 1
        if r < acc:
            return c
    return counts.shape[0] - 1


@njit(cache=True)
def family_events(counts, famtot, alpha, theta0, theta1, t, horizon, w, u,
                  stop_at_fixation):
    """Advance the fit/unfit family-count chain from ``t`` towards ``horizon``.

    ``counts`` holds fit counts of the n families followed by unfit counts;
    ``famtot`` the family totals. Both are modified in place. Returns
    ``(t, consumed, done, fixed_at)``; ``fixed_at`` is the time a single
    family first held every particle during this call, else ``inf``.
    """
    n = famtot.shape[0]
    N = 0
    for i in range(n):
        N += famtot[i]
    r_res = 0.5 * N * (N - 1)
    r_sel = alpha * (N - 1)
    r_m0 = N * theta0
    r_m1 = N * theta1
    total = r_res + r_sel + r_m0 + r_m1
    scale = 1.0 / total
    fixed_at = np.inf
    limit = w.shape[0]
    for k in range(limit):
        t_next = t + w[k] * scale
        if t_next > horizon:
            return horizon, k, True, fixed_at
        t = t_next
        v = u[2 * k] * total
        if v < r_res + r_sel:
            if v < r_res:
                p = _locate(counts, int(v / r_res * N), -1, N)
            else:
                p = _locate(counts, int((v - r_res) / r_sel * N), -1, N)
                if p >= n:
                    continue
            c = _locate(counts, int(u[2 * k + 1] * (N - 1)), p, N - 1)
            if p == c:
                continue
            counts[c] -= 1
            counts[p] += 1
            fp = p % n
            fc = c % n
            if fp != fc:
                famtot[fc] -= 1
                famtot[fp] += 1
                if famtot[fp] == N and fixed_at == np.inf:
                    fixed_at = t
                    if stop_at_fixation:
                        return t, k + 1, True, fixed_at
        elif v < r_res + r_sel + r_m0:
            c = _locate(counts, int((v - r_res - r_sel) / r_m0 * N), -1, N)
            if c >= n:
                counts[c] -= 1
                counts[c - n] += 1
        else:
            c = _locate(counts, int((v - r_res - r_sel - r_m0) / r_m1 * N), -1, N)
            if c < n:
                counts[c] -= 1
                counts[c + n] += 1
    return t, limit, False, fixed_at
