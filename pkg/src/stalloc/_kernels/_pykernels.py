"""Pure-Python proposal kernels. Semantics match ``_ckernels.pyx`` exactly.

Both kernels work on the flat arrays of :class:`stalloc.model.CSR`; machine and
job identities are plain indices, and ``-1`` means unassigned.
"""

from __future__ import annotations

from collections import deque


def _ints(a) -> list[int]:
    # plain ints index and add much faster than numpy scalars
    return a.tolist() if hasattr(a, "tolist") else [int(v) for v in a]


def reversed_gs(sizes, caps, m_ptr, m_adj, m_jrank, record=False):
    """Machine-proposing relaxed unsplit Gale-Shapley.

    Returns ``(assigned, proposals, rejections, events)`` where ``events`` is a
    list of ``(machine, job, accepted)`` when ``record`` is set.
    """
    sizes, caps, m_ptr, m_adj, m_jrank = map(_ints, (sizes, caps, m_ptr, m_adj, m_jrank))
    n_jobs, n_machines = len(sizes), len(caps)
    unassigned_rank = len(m_adj) + 1
    assigned = [-1] * n_jobs
    arank = [unassigned_rank] * n_jobs
    load = [0] * n_machines
    nxt = m_ptr[:-1]
    queued = [False] * n_machines
    queue = deque()
    for m in range(n_machines):
        if caps[m] > 0 and m_ptr[m] < m_ptr[m + 1]:
            queue.append(m)
            queued[m] = True
    proposals = rejections = 0
    events = [] if record else None

    while queue:
        m = queue.popleft()
        queued[m] = False
        p, end = nxt[m], m_ptr[m + 1]
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
                        queue.append(old)
                        queued[old] = True
                assigned[j] = m
                arank[j] = r
                load[m] += sizes[j]
            else:
                rejections += 1
            if record:
                events.append((m, j, accepted))
        nxt[m] = p
    return assigned, proposals, rejections, events


def _fw_add(tree, base, n, i, delta):
    while i <= n:
        tree[base + i - 1] += delta
        i += i & -i


def _fw_prefix(tree, base, i):
    s = 0
    while i > 0:
        s += tree[base + i - 1]
        i -= i & -i
    return s


def _fw_lower_bound(tree, base, n, target):
    # smallest 1-based i with prefix(i) >= target
    pos = 0
    step = 1 << (n.bit_length() - 1) if n else 0
    while step:
        nxt = pos + step
        if nxt <= n and tree[base + nxt - 1] < target:
            pos = nxt
            target -= tree[base + nxt - 1]
        step >>= 1
    return pos + 1


def job_gs(sizes, caps, m_ptr, m_adj, j_ptr, j_adj, j_mpos, record=False):
    """Job-proposing relaxed unsplit Gale-Shapley.

    A machine accepts a job when the load it holds from jobs it prefers is
    below capacity, then evicts its worst holder while the rest still reach
    capacity. Per-machine Fenwick trees over the machine's preference order
    give the preferred load and the worst holder in logarithmic time.

    Returns ``(assigned, proposals, rejections, evictions, events)``.
    """
    sizes, caps, m_ptr, m_adj, j_ptr, j_adj, j_mpos = map(
        _ints, (sizes, caps, m_ptr, m_adj, j_ptr, j_adj, j_mpos))
    n_jobs, n_machines = len(sizes), len(caps)
    tree = [0] * len(m_adj)
    total = [0] * n_machines
    assigned = [-1] * n_jobs
    nxt = j_ptr[:-1]
    queue = deque(range(n_jobs))
    proposals = rejections = evictions = 0
    events = [] if record else None

    while queue:
        j = queue.popleft()
        end = j_ptr[j + 1]
        while nxt[j] < end:
            e = nxt[j]
            nxt[j] = e + 1
            m = j_adj[e]
            base = m_ptr[m]
            n = m_ptr[m + 1] - base
            i = j_mpos[e] - base + 1
            proposals += 1
            if _fw_prefix(tree, base, i - 1) >= caps[m]:
                rejections += 1
                if record:
                    events.append((j, m, False))
                continue
            _fw_add(tree, base, n, i, sizes[j])
            total[m] += sizes[j]
            assigned[j] = m
            if record:
                events.append((j, m, True))
            while True:
                w = _fw_lower_bound(tree, base, n, total[m])
                wj = m_adj[base + w - 1]
                if total[m] - sizes[wj] < caps[m]:
                    break
                _fw_add(tree, base, n, w, -sizes[wj])
                total[m] -= sizes[wj]
                assigned[wj] = -1
                evictions += 1
                queue.append(wj)
            break
    return assigned, proposals, rejections, evictions, events
