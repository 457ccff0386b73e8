"""Compiled phase kernels.

Each ``*_worker`` function is the whole body of one worker thread for one
phase: it claims chunks of the active range from a shared cursor (atomic
fetch-add) and processes them until the range is exhausted.  The coloring
array is shared and written without locks; every other mutable argument
(marker array, stamp box, local queue, balancer state) is private to the
calling worker.

Forbidden sets are stamped marker arrays: color ``c`` is forbidden iff
``mark[c] == stamp``; bumping the stamp clears the set.  The arrays are
never reset.  When a color would be marked or picked at or beyond the
marker capacity the kernel parks the unfinished chunk in ``pend``, reports
the required capacity in ``err[0]`` and returns ``GROW``; the driver
reallocates and re-enters, and re-running a chunk is harmless for every
phase.
"""

import numpy as np
from numba import njit

from ._atomics import atomic_fetch_add

OK = 0
GROW = 1
NEGATIVE = 2  # reverse first-fit ran out of colors; unreachable by construction

FIRST_FIT = 0
BAL_B1 = 1
BAL_B2 = 2

UNCOLORED = -1


@njit(nogil=True, cache=True)
def _pick_first_fit(mark, s, cap):
    col = 0
    while col < cap and mark[col] == s:
        col += 1
    return col


@njit(nogil=True, cache=True)
def _pick_b1(mark, s, cap, item_id, col_max):
    # even ids descend from col_max, odd ids first-fit; descent falling off
    # the bottom restarts ascending above col_max
    if item_id % 2 == 0:
        col = col_max
        while col >= 0 and mark[col] == s:
            col -= 1
        if col == -1:
            col = col_max + 1
            while col < cap and mark[col] == s:
                col += 1
    else:
        col = _pick_first_fit(mark, s, cap)
    return col


@njit(nogil=True, cache=True)
def _pick_b2(mark, s, cap, col_max, col_next):
    col = col_next
    while col < cap and mark[col] == s:
        col += 1
    if col > col_max:
        col = 0
        while col < cap and mark[col] == s:
            col += 1
    return col


@njit(nogil=True, cache=True)
def _select(policy, mark, s, cap, item_id, bal):
    if policy == FIRST_FIT:
        return _pick_first_fit(mark, s, cap)
    if policy == BAL_B1:
        return _pick_b1(mark, s, cap, item_id, bal[0])
    return _pick_b2(mark, s, cap, bal[0], bal[1])


@njit(nogil=True, cache=True)
def _after_select(policy, col, bal):
    if policy != FIRST_FIT:
        if col > bal[0]:
            bal[0] = col
        if policy == BAL_B2:
            nxt = col + 1
            third = bal[0] // 3 + 1
            if third < nxt:
                nxt = third
            bal[1] = nxt


@njit(nogil=True, cache=True)
def bgpc_color_vertex_worker(cursor, chunk, W, wlen,
                             vtx_off, vtx_net, net_off, net_mem,
                             colors, mark, stampbox, cap, policy, bal,
                             pend, err):
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= wlen:
                return OK
            hi = min(lo + chunk, wlen)
        for idx in range(lo, hi):
            w = W[idx]
            stampbox[0] += 1
            s = stampbox[0]
            for j in range(vtx_off[w], vtx_off[w + 1]):
                v = vtx_net[j]
                for e in range(net_off[v], net_off[v + 1]):
                    u = net_mem[e]
                    if u != w:
                        cu = colors[u]
                        if cu >= 0:
                            if cu >= cap:
                                err[0] = cu + 1
                                pend[0] = lo
                                pend[1] = hi
                                return GROW
                            mark[cu] = s
            col = _select(policy, mark, s, cap, w, bal)
            if col >= cap:
                err[0] = cap + 1
                pend[0] = lo
                pend[1] = hi
                return GROW
            colors[w] = col
            _after_select(policy, col, bal)
        lo = hi


@njit(nogil=True, cache=True)
def d2gc_color_vertex_worker(cursor, chunk, W, wlen, off, adj,
                             colors, mark, stampbox, cap, policy, bal,
                             pend, err):
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= wlen:
                return OK
            hi = min(lo + chunk, wlen)
        for idx in range(lo, hi):
            w = W[idx]
            stampbox[0] += 1
            s = stampbox[0]
            for j in range(off[w], off[w + 1]):
                u = adj[j]
                cu = colors[u]
                if cu >= 0:
                    if cu >= cap:
                        err[0] = cu + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    mark[cu] = s
                for e in range(off[u], off[u + 1]):
                    x = adj[e]
                    if x != w:
                        cx = colors[x]
                        if cx >= 0:
                            if cx >= cap:
                                err[0] = cx + 1
                                pend[0] = lo
                                pend[1] = hi
                                return GROW
                            mark[cx] = s
            col = _select(policy, mark, s, cap, w, bal)
            if col >= cap:
                err[0] = cap + 1
                pend[0] = lo
                pend[1] = hi
                return GROW
            colors[w] = col
            _after_select(policy, col, bal)
        lo = hi


@njit(nogil=True, cache=True)
def bgpc_remove_vertex_worker(cursor, chunk, W, wlen,
                              vtx_off, vtx_net, net_off, net_mem,
                              colors, out, tail):
    while True:
        lo = atomic_fetch_add(cursor, chunk)
        if lo >= wlen:
            return OK
        hi = min(lo + chunk, wlen)
        for idx in range(lo, hi):
            w = W[idx]
            cw = colors[w]
            hit = False
            for j in range(vtx_off[w], vtx_off[w + 1]):
                v = vtx_net[j]
                for e in range(net_off[v], net_off[v + 1]):
                    u = net_mem[e]
                    if u != w and colors[u] == cw and w > u:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                pos = atomic_fetch_add(tail, 1)
                out[pos] = w


@njit(nogil=True, cache=True)
def d2gc_remove_vertex_worker(cursor, chunk, W, wlen, off, adj,
                              colors, out, tail):
    while True:
        lo = atomic_fetch_add(cursor, chunk)
        if lo >= wlen:
            return OK
        hi = min(lo + chunk, wlen)
        for idx in range(lo, hi):
            w = W[idx]
            cw = colors[w]
            hit = False
            for j in range(off[w], off[w + 1]):
                u = adj[j]
                if colors[u] == cw and w > u:
                    hit = True
                    break
                for e in range(off[u], off[u + 1]):
                    x = adj[e]
                    if x != w and colors[x] == cw and w > x:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                pos = atomic_fetch_add(tail, 1)
                out[pos] = w


@njit(nogil=True, cache=True)
def bgpc_color_net_v1_worker(cursor, chunk, num_nets, net_off, net_mem,
                             colors, mark, stampbox, cap, pend, err):
    # most optimistic net sweep: forward first-fit with a per-net cursor
    # that is never reset within the net
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= num_nets:
                return OK
            hi = min(lo + chunk, num_nets)
        for v in range(lo, hi):
            stampbox[0] += 1
            s = stampbox[0]
            col = 0
            for e in range(net_off[v], net_off[v + 1]):
                u = net_mem[e]
                cu = colors[u]
                if cu < 0 or (cu < cap and mark[cu] == s):
                    while col < cap and mark[col] == s:
                        col += 1
                    if col >= cap:
                        err[0] = cap + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    colors[u] = col
                    cu = col
                if cu >= cap:
                    err[0] = cu + 1
                    pend[0] = lo
                    pend[1] = hi
                    return GROW
                mark[cu] = s
        lo = hi


@njit(nogil=True, cache=True)
def bgpc_color_net_worker(cursor, chunk, num_nets, net_off, net_mem,
                          colors, mark, stampbox, cap, wlocal, policy, bal,
                          pend, err):
    # two-pass net sweep: mark kept colors, then recolor the rest by
    # reverse first-fit descending from |vtxs(v)|-1 (or a balancing policy)
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= num_nets:
                return OK
            hi = min(lo + chunk, num_nets)
        for v in range(lo, hi):
            stampbox[0] += 1
            s = stampbox[0]
            wl = 0
            start = net_off[v]
            end = net_off[v + 1]
            for e in range(start, end):
                u = net_mem[e]
                cu = colors[u]
                if cu >= 0 and not (cu < cap and mark[cu] == s):
                    if cu >= cap:
                        err[0] = cu + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    mark[cu] = s
                else:
                    wlocal[wl] = u
                    wl += 1
            if policy == FIRST_FIT:
                col = end - start - 1
                for i in range(wl):
                    while col >= 0 and mark[col] == s:
                        col -= 1
                    if col < 0:
                        return NEGATIVE
                    colors[wlocal[i]] = col
                    col -= 1
            else:
                for i in range(wl):
                    u = wlocal[i]
                    col = _select(policy, mark, s, cap, u, bal)
                    if col >= cap:
                        err[0] = cap + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    colors[u] = col
                    mark[col] = s
                    _after_select(policy, col, bal)
        lo = hi


@njit(nogil=True, cache=True)
def d2gc_color_net_worker(cursor, chunk, n, off, adj,
                          colors, mark, stampbox, cap, wlocal, policy, bal,
                          pend, err):
    # like the net sweep, but seeded with the visited vertex itself and
    # descending from |nbor(v)| so the extra self slot is available
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= n:
                return OK
            hi = min(lo + chunk, n)
        for v in range(lo, hi):
            stampbox[0] += 1
            s = stampbox[0]
            wl = 0
            cv = colors[v]
            if cv >= 0:
                if cv >= cap:
                    err[0] = cv + 1
                    pend[0] = lo
                    pend[1] = hi
                    return GROW
                mark[cv] = s
            else:
                wlocal[0] = v
                wl = 1
            start = off[v]
            end = off[v + 1]
            for e in range(start, end):
                u = adj[e]
                cu = colors[u]
                if cu >= 0 and not (cu < cap and mark[cu] == s):
                    if cu >= cap:
                        err[0] = cu + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    mark[cu] = s
                else:
                    wlocal[wl] = u
                    wl += 1
            if policy == FIRST_FIT:
                col = end - start
                for i in range(wl):
                    while col >= 0 and mark[col] == s:
                        col -= 1
                    if col < 0:
                        return NEGATIVE
                    colors[wlocal[i]] = col
                    col -= 1
            else:
                for i in range(wl):
                    u = wlocal[i]
                    col = _select(policy, mark, s, cap, u, bal)
                    if col >= cap:
                        err[0] = cap + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    colors[u] = col
                    mark[col] = s
                    _after_select(policy, col, bal)
        lo = hi


@njit(nogil=True, cache=True)
def bgpc_remove_net_worker(cursor, chunk, num_nets, net_off, net_mem,
                           colors, mark, stampbox, cap, pend, err):
    # first holder of each color within a net keeps it, later ones reset
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= num_nets:
                return OK
            hi = min(lo + chunk, num_nets)
        for v in range(lo, hi):
            stampbox[0] += 1
            s = stampbox[0]
            for e in range(net_off[v], net_off[v + 1]):
                u = net_mem[e]
                cu = colors[u]
                if cu >= 0:
                    if cu >= cap:
                        err[0] = cu + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    if mark[cu] == s:
                        colors[u] = UNCOLORED
                    else:
                        mark[cu] = s
        lo = hi


@njit(nogil=True, cache=True)
def d2gc_remove_net_worker(cursor, chunk, n, off, adj,
                           colors, mark, stampbox, cap, pend, err):
    lo = pend[0]
    hi = pend[1]
    pend[0] = 0
    pend[1] = 0
    while True:
        if lo >= hi:
            lo = atomic_fetch_add(cursor, chunk)
            if lo >= n:
                return OK
            hi = min(lo + chunk, n)
        for v in range(lo, hi):
            stampbox[0] += 1
            s = stampbox[0]
            cv = colors[v]
            if cv >= 0:
                if cv >= cap:
                    err[0] = cv + 1
                    pend[0] = lo
                    pend[1] = hi
                    return GROW
                mark[cv] = s
            for e in range(off[v], off[v + 1]):
                u = adj[e]
                cu = colors[u]
                if cu >= 0:
                    if cu >= cap:
                        err[0] = cu + 1
                        pend[0] = lo
                        pend[1] = hi
                        return GROW
                    if mark[cu] == s:
                        colors[u] = UNCOLORED
                    else:
                        mark[cu] = s
        lo = hi


@njit(nogil=True, cache=True)
def gather_uncolored_worker(cursor, chunk, n, colors, out, tail):
    while True:
        lo = atomic_fetch_add(cursor, chunk)
        if lo >= n:
            return OK
        hi = min(lo + chunk, n)
        for i in range(lo, hi):
            if colors[i] < 0:
                pos = atomic_fetch_add(tail, 1)
                out[pos] = i


@njit(cache=True)
def dedup_ids(ids, count, seen, epoch, out):
    """Copy the first occurrence of each id into ``out``, preserving order."""
    k = 0
    for i in range(count):
        u = ids[i]
        if seen[u] != epoch:
            seen[u] = epoch
            out[k] = u
            k += 1
    return k
