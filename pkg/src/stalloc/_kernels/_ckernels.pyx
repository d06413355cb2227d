# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled proposal kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np

ctypedef long long i64


def reversed_gs(const i64[::1] sizes, const i64[::1] caps, const i64[::1] m_ptr,
                const i64[::1] m_adj, const i64[::1] m_jrank, bint record=False):
    cdef Py_ssize_t n_jobs = sizes.shape[0]
    cdef Py_ssize_t n_machines = caps.shape[0]
    cdef i64[::1] assigned = np.full(n_jobs, -1, dtype=np.int64)
    cdef i64[::1] arank = np.full(n_jobs, m_adj.shape[0] + 1, dtype=np.int64)
    cdef i64[::1] load = np.zeros(n_machines, dtype=np.int64)
    cdef i64[::1] nxt = np.array(m_ptr[:n_machines], dtype=np.int64)
    cdef i64[::1] queued = np.zeros(n_machines, dtype=np.int64)
    # ring buffer: each machine is queued at most once at a time
    cdef i64[::1] ring = np.zeros(n_machines + 1, dtype=np.int64)
    cdef Py_ssize_t head = 0, tail = 0, cap_ring = n_machines + 1
    cdef i64 m, j, r, p, end, old
    cdef i64 proposals = 0, rejections = 0
    cdef bint accepted
    events = [] if record else None

    for m in range(n_machines):
        if caps[m] > 0 and m_ptr[m] < m_ptr[m + 1]:
            ring[tail] = m
            tail = (tail + 1) % cap_ring
            queued[m] = 1

    while head != tail:
        m = ring[head]
        head = (head + 1) % cap_ring
        queued[m] = 0
        p = nxt[m]
        end = m_ptr[m + 1]
        while load[m] < caps[m] and p < end:
            j = m_adj[p]
            r = m_jrank[p]
            p += 1
            proposals += 1
            accepted = r < arank[j]
            if accepted:
                old = assigned[j]
                if old >= 0:
                    load[old] -= sizes[j]
                    if not queued[old] and load[old] < caps[old] and nxt[old] < m_ptr[old + 1]:
                        ring[tail] = old
                        tail = (tail + 1) % cap_ring
                        queued[old] = 1
                assigned[j] = m
                arank[j] = r
                load[m] += sizes[j]
            else:
                rejections += 1
            if record:
                events.append((m, j, accepted))
        nxt[m] = p
    return np.asarray(assigned).tolist(), proposals, rejections, events


cdef inline void fw_add(i64[::1] tree, i64 base, i64 n, i64 i, i64 delta) noexcept nogil:
    while i <= n:
        tree[base + i - 1] += delta
        i += i & -i


cdef inline i64 fw_prefix(i64[::1] tree, i64 base, i64 i) noexcept nogil:
    cdef i64 s = 0
    while i > 0:
        s += tree[base + i - 1]
        i -= i & -i
    return s


cdef inline i64 fw_lower_bound(i64[::1] tree, i64 base, i64 n, i64 target) noexcept nogil:
    cdef i64 pos = 0, step = 1, nx
    if n == 0:
        return 1
    while step * 2 <= n:
        step *= 2
    while step:
        nx = pos + step
        if nx <= n and tree[base + nx - 1] < target:
            pos = nx
            target -= tree[base + nx - 1]
        step >>= 1
    return pos + 1


def job_gs(const i64[::1] sizes, const i64[::1] caps, const i64[::1] m_ptr,
           const i64[::1] m_adj, const i64[::1] j_ptr, const i64[::1] j_adj,
           const i64[::1] j_mpos, bint record=False):
    cdef Py_ssize_t n_jobs = sizes.shape[0]
    cdef Py_ssize_t n_machines = caps.shape[0]
    cdef i64[::1] tree = np.zeros(m_adj.shape[0], dtype=np.int64)
    cdef i64[::1] total = np.zeros(n_machines, dtype=np.int64)
    cdef i64[::1] assigned = np.full(n_jobs, -1, dtype=np.int64)
    cdef i64[::1] nxt = np.array(j_ptr[:n_jobs], dtype=np.int64)
    # every job sits in the queue at most once at a time
    cdef i64[::1] ring = np.zeros(n_jobs + 1, dtype=np.int64)
    cdef Py_ssize_t head = 0, tail = 0, cap_ring = n_jobs + 1
    cdef i64 j, e, end, m, base, n, i, w, wj
    cdef i64 proposals = 0, rejections = 0, evictions = 0
    events = [] if record else None

    for j in range(n_jobs):
        ring[tail] = j
        tail += 1

    while head != tail:
        j = ring[head]
        head = (head + 1) % cap_ring
        end = j_ptr[j + 1]
        while nxt[j] < end:
            e = nxt[j]
            nxt[j] = e + 1
            m = j_adj[e]
            base = m_ptr[m]
            n = m_ptr[m + 1] - base
            i = j_mpos[e] - base + 1
            proposals += 1
            if fw_prefix(tree, base, i - 1) >= caps[m]:
                rejections += 1
                if record:
                    events.append((j, m, False))
                continue
            fw_add(tree, base, n, i, sizes[j])
            total[m] += sizes[j]
            assigned[j] = m
            if record:
                events.append((j, m, True))
            while True:
                w = fw_lower_bound(tree, base, n, total[m])
                wj = m_adj[base + w - 1]
                if total[m] - sizes[wj] < caps[m]:
                    break
                fw_add(tree, base, n, w, -sizes[wj])
                total[m] -= sizes[wj]
                assigned[wj] = -1
                evictions += 1
                ring[tail] = wj
                tail = (tail + 1) % cap_ring
            break
    return np.asarray(assigned).tolist(), proposals, rejections, evictions, events
