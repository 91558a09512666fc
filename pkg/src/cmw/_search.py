"""Numba kernels behind the synthesis oracle.

Circuits are explored at the level of node functions. A gate is
``AND(node_i ^ p_i, node_j ^ p_j)`` with ``j < i``; choosing AND or OR for
the realised gate only decides which of the two complementary values the
node carries, so functions are stored modulo complement as the
representative with row 0 cleared ("rep"). Node reps must be pairwise
distinct and non-constant, which holds in every normalized optimal circuit.

Gate sequences are explored depth first in a canonical order: a gate that
does not read its predecessor must carry a larger (i, j, p) key than it.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _rep(v, mask):
    return v ^ mask if v & 1 else v


@njit(cache=True)
def _has_rep(node, n, rep, mask):
    for q in range(n):
        if _rep(node[q], mask) == rep:
            return True
    return False


@njit(cache=True)
def _init_nodes(nvars, nmax):
    W = 1 << nvars
    node = np.zeros(nmax, np.int64)
    for v in range(nvars):
        t = 0
        for r in range(W):
            if (r >> (nvars - 1 - v)) & 1:
                t |= 1 << r
        node[v] = t
    return node


@njit(cache=True)
def _finish2(nvars, n, node, used, mask, want, best, K, sup):
    """Place the last two gates (ids n and n+1); the last must read gate n."""
    dang = np.empty(4, np.int64)
    nd = 0
    for q in range(nvars, n):
        if used[q] == 0:
            if nd == 3:
                return
            dang[nd] = q
            nd += 1
    filt = sup.shape[0] > 1
    for i in range(1, n):
        for j in range(i):
            miss = -1
            nm = 0
            for d in range(nd):
                q = dang[d]
                if q != i and q != j:
                    miss = q
                    nm += 1
            if nm > 1:
                continue
            for p in range(4):
                a = node[i] ^ mask if p & 1 else node[i]
                b = node[j] ^ mask if p & 2 else node[j]
                w = a & b
                rw = _rep(w, mask)
                if rw == 0:
                    continue
                rec = nm == 0 and want[rw] != 0 and best[rw] > K - 1
                ext = not filt or sup[w] != 0 or sup[w ^ mask] != 0
                if not (rec or ext) or _has_rep(node, n, rw, mask):
                    continue
                if rec:
                    best[rw] = K - 1
                if not ext:
                    continue
                zlo = 0
                zhi = n
                if nm == 1:
                    zlo = miss
                    zhi = miss + 1
                for z in range(zlo, zhi):
                    for s in range(4):
                        ww = w ^ mask if s & 1 else w
                        zz = node[z] ^ mask if s & 2 else node[z]
                        rf = _rep(ww & zz, mask)
                        if rf == 0 or want[rf] == 0 or best[rf] <= K:
                            continue
                        if rf == rw or _has_rep(node, n, rf, mask):
                            continue
                        best[rf] = K


@njit(cache=True)
def search_levels(nvars, K, want, best, fix_first, ok2, ok3, sup):
    """Record in ``best[rep]`` the least gate count <= K reaching each wanted rep.

    With ``fix_first`` the first gate is AND(x1, x2), the second gate key
    must satisfy ``ok2`` and the third ``ok3[second, third]``; callers then
    close the result under input permutations, input negations and
    complement. ``sup`` (length ``2**W`` or 1 to disable) flags values that
    contain some wanted function; the last gate can only reach a target when
    the gate before it is flagged.
    """
    W = 1 << nvars
    mask = (1 << W) - 1
    node = _init_nodes(nvars, nvars + K + 1)
    used = np.zeros(nvars + K + 1, np.int64)
    key = np.zeros(K + 1, np.int64)
    pi = np.zeros(K + 1, np.int64)
    pj = np.zeros(K + 1, np.int64)
    pp = np.zeros(K + 1, np.int64)
    if K < 1:
        return 0
    t = 0
    pi[0] = 1
    pj[0] = 0
    pp[0] = -1
    states = 0
    while t >= 0:
        n = nvars + t
        i = pi[t]
        j = pj[t]
        p = pp[t] + 1
        if p == 4:
            p = 0
            j += 1
            if j == i:
                j = 0
                i += 1
        if i >= n or (fix_first and t == 0 and (i > 1 or p > 0)):
            t -= 1
            if t >= 0:
                used[pi[t]] -= 1
                used[pj[t]] -= 1
            continue
        pi[t] = i
        pj[t] = j
        pp[t] = p
        k = (i * 64 + j) * 4 + p
        if t > 0 and i != n - 1 and j != n - 1 and k <= key[t - 1]:
            continue
        if fix_first and t == 1 and ok2[k] == 0:
            continue
        if fix_first and t == 2 and ok3[key[1], k] == 0:
            continue
        a = node[i] ^ mask if p & 1 else node[i]
        b = node[j] ^ mask if p & 2 else node[j]
        v = a & b
        rep = _rep(v, mask)
        if rep == 0 or _has_rep(node, n, rep, mask):
            continue
        used[i] += 1
        used[j] += 1
        u = 1
        for q in range(nvars, n):
            if used[q] == 0:
                u += 1
        rem = K - (t + 1)
        if u > rem + 1:
            used[i] -= 1
            used[j] -= 1
            continue
        states += 1
        if u == 1 and want[rep] != 0 and best[rep] > t + 1:
            best[rep] = t + 1
        node[n] = v
        key[t] = k
        if rem == 2:
            _finish2(nvars, n + 1, node, used, mask, want, best, K, sup)
            used[i] -= 1
            used[j] -= 1
            continue
        if rem == 0:
            used[i] -= 1
            used[j] -= 1
            continue
        t += 1
        pi[t] = 1
        pj[t] = 0
        pp[t] = -1
    return states


@njit(cache=True)
def superset_flags(want, W):
    """Flag every value containing some wanted function or its complement."""
    M = (1 << W) - 1
    targets = []
    for f in range(want.shape[0]):
        if want[f] != 0:
            targets.append(f)
            targets.append(f ^ M)
    sup = np.zeros(1 << W, np.int8)
    for v in range(1 << W):
        for f in targets:
            if f & ~v == 0:
                sup[v] = 1
                break
    return sup


@njit(cache=True)
def close_under_group(best, rowmaps, W, complement=True):
    """Propagate minimum values along the given row maps (and complement)."""
    M = (1 << W) - 1
    out = best.copy()
    for f in range(best.shape[0]):
        c = best[f]
        if c >= 127:
            continue
        for g in range(rowmaps.shape[0]):
            h = 0
            for r in range(W):
                if (f >> rowmaps[g, r]) & 1:
                    h |= 1 << r
            if out[h] > c:
                out[h] = c
            if complement and out[h ^ M] > c:
                out[h ^ M] = c
    return out


@njit(cache=True)
def compose_bounds(cc, M, limit):
    """Upper bounds from f = u op v with disjoint subcircuits.

    ``op`` is any AND/OR with input and output negations (one gate) or XOR
    built from three gates.
    """
    ub = cc.copy()
    idx = np.nonzero(cc < 127)[0]
    for a in range(idx.shape[0]):
        u = idx[a]
        if u & 1:
            continue
        cu = cc[u]
        for b in range(a, idx.shape[0]):
            v = idx[b]
            if v & 1:
                continue
            s = cu + cc[v]
            if s + 1 <= limit:
                for p in range(4):
                    uu = u ^ M if p & 1 else u
                    vv = v ^ M if p & 2 else v
                    h = uu & vv
                    if ub[h] > s + 1:
                        ub[h] = s + 1
                    if ub[h ^ M] > s + 1:
                        ub[h ^ M] = s + 1
            if s + 3 <= limit:
                h = u ^ v
                if ub[h] > s + 3:
                    ub[h] = s + 3
                if ub[h ^ M] > s + 3:
                    ub[h ^ M] = s + 3
    return ub


@njit(cache=True)
def enumerate_exact(nvars, K, want, out, counts_only):
    """Every canonical gate sequence of exactly K gates whose top rep is wanted.

    Each sequence consumes every gate; rows of ``out`` hold the top rep
    followed by K (i, j, p) triples. Returns the number of sequences found;
    if it exceeds ``out.shape[0]`` only the first rows are written.
    """
    W = 1 << nvars
    mask = (1 << W) - 1
    node = _init_nodes(nvars, nvars + K + 1)
    used = np.zeros(nvars + K + 1, np.int64)
    key = np.zeros(K + 1, np.int64)
    pi = np.zeros(K + 1, np.int64)
    pj = np.zeros(K + 1, np.int64)
    pp = np.zeros(K + 1, np.int64)
    t = 0
    pi[0] = 1
    pj[0] = 0
    pp[0] = -1
    found = 0
    cap = out.shape[0]
    while t >= 0:
        n = nvars + t
        i = pi[t]
        j = pj[t]
        p = pp[t] + 1
        if p == 4:
            p = 0
            j += 1
            if j == i:
                j = 0
                i += 1
        if i >= n:
            t -= 1
            if t >= 0:
                used[pi[t]] -= 1
                used[pj[t]] -= 1
            continue
        pi[t] = i
        pj[t] = j
        pp[t] = p
        k = (i * 64 + j) * 4 + p
        if t > 0 and i != n - 1 and j != n - 1 and k <= key[t - 1]:
            continue
        a = node[i] ^ mask if p & 1 else node[i]
        b = node[j] ^ mask if p & 2 else node[j]
        v = a & b
        rep = _rep(v, mask)
        if rep == 0 or _has_rep(node, n, rep, mask):
            continue
        used[i] += 1
        used[j] += 1
        u = 1
        for q in range(nvars, n):
            if used[q] == 0:
                u += 1
        rem = K - (t + 1)
        if u > rem + 1 or (rem == 0 and (u != 1 or want[rep] == 0)):
            used[i] -= 1
            used[j] -= 1
            continue
        node[n] = v
        key[t] = k
        if rem == 0:
            if not counts_only and found < cap:
                out[found, 0] = rep
                for q in range(K):
                    out[found, 1 + 3 * q] = pi[q]
                    out[found, 2 + 3 * q] = pj[q]
                    out[found, 3 + 3 * q] = pp[q]
            found += 1
            used[i] -= 1
            used[j] -= 1
            continue
        t += 1
        pi[t] = 1
        pj[t] = 0
        pp[t] = -1
    return found


@njit(cache=True)
def _r_costs(nvars, t, node, pi, pj, pp, mask, best):
    """Cost every AND/OR realisation of the complete sequence gates 0..t.

    A gate in OR form carries the complement of its AND value and reads
    its inputs complemented. A node read against its carried polarity
    needs one (shared) NOT.
    """
    n = nvars + t + 1
    v = node[n - 1]
    wp = np.zeros(n, np.int64)
    wn = np.zeros(n, np.int64)
    for km in range(1 << (t + 1)):
        for q in range(n):
            wp[q] = 0
            wn[q] = 0
        for g in range(t + 1):
            kap = (km >> g) & 1
            a = (pp[g] & 1) ^ kap
            b = ((pp[g] >> 1) & 1) ^ kap
            if a:
                wn[pi[g]] = 1
            else:
                wp[pi[g]] = 1
            if b:
                wn[pj[g]] = 1
            else:
                wp[pj[g]] = 1
        nots = 0
        for q in range(n):
            c = 0
            if q >= nvars:
                c = (km >> (q - nvars)) & 1
            if (c == 0 and wn[q]) or (c == 1 and wp[q]):
                nots += 1
        cost = t + 1 + nots
        out = v ^ mask if (km >> t) & 1 else v
        if best[out] > cost:
            best[out] = cost
        if best[out ^ mask] > cost + 1:
            best[out ^ mask] = cost + 1


@njit(cache=True)
def search_r(nvars, K, best):
    """Least AND/OR/NOT gate count per function over circuits with <= K binary gates.

    The first gate reads (x2, x1) in any polarity; callers close the result
    under input permutations only.
    """
    W = 1 << nvars
    mask = (1 << W) - 1
    nmax = nvars + K + 1
    node = _init_nodes(nvars, nmax)
    used = np.zeros(nmax, np.int64)
    key = np.zeros(K + 1, np.int64)
    pi = np.zeros(K + 1, np.int64)
    pj = np.zeros(K + 1, np.int64)
    pp = np.zeros(K + 1, np.int64)
    t = 0
    pi[0] = 1
    pj[0] = 0
    pp[0] = -1
    states = 0
    while t >= 0:
        n = nvars + t
        i = pi[t]
        j = pj[t]
        p = pp[t] + 1
        if p == 4:
            p = 0
            j += 1
            if j == i:
                j = 0
                i += 1
        if i >= n or (t == 0 and i > 1):
            t -= 1
            if t >= 0:
                used[pi[t]] -= 1
                used[pj[t]] -= 1
            continue
        pi[t] = i
        pj[t] = j
        pp[t] = p
        k = (i * 64 + j) * 4 + p
        if t > 0 and i != n - 1 and j != n - 1 and k <= key[t - 1]:
            continue
        a = node[i] ^ mask if p & 1 else node[i]
        b = node[j] ^ mask if p & 2 else node[j]
        v = a & b
        rep = _rep(v, mask)
        if rep == 0 or _has_rep(node, n, rep, mask):
            continue
        used[i] += 1
        used[j] += 1
        u = 1
        for q in range(nvars, n):
            if used[q] == 0:
                u += 1
        rem = K - (t + 1)
        if u > rem + 1:
            used[i] -= 1
            used[j] -= 1
            continue
        states += 1
        node[n] = v
        key[t] = k
        if u == 1:
            _r_costs(nvars, t, node, pi, pj, pp, mask, best)
        if rem == 0:
            used[i] -= 1
            used[j] -= 1
            continue
        t += 1
        pi[t] = 1
        pj[t] = 0
        pp[t] = -1
    return states
