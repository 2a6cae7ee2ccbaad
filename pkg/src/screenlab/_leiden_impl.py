"""Array kernels for the Leiden phases (local move, refinement).

Written in nopython-compatible style and compiled through
:func:`screenlab.accel.jit_kernel`; the same source runs un-jitted on the
numpy fallback path. Graphs arrive as symmetric CSR without self-loops;
self-loop weight (from aggregation) is carried separately by the driver and
cancels out of all move comparisons, so it never appears here.

Quality function: weighted modularity with resolution gamma,
Q = sum_c [ w_c/W - gamma (s_c / 2W)^2 ].
"""

from __future__ import annotations

import math

import numpy as np

from .accel import jit_kernel


@jit_kernel
def _local_move(indptr, nbr, w, strength, total_w, gamma, comm, order):
    """Queue-based local move; mutates comm in place, returns move count.

    Candidate score for node i and community c is
    k_ic/W - gamma * s_i * (S_c - [c == c_i] s_i) / (2 W^2); one designated
    empty community competes as a candidate so nodes can split out.
    Ties break to the lowest community id.
    """
    n = indptr.shape[0] - 1
    inv_w = 1.0 / total_w
    half_inv_w2 = 0.5 * inv_w * inv_w

    comm_strength = np.zeros(n, dtype=np.float64)
    csize = np.zeros(n, dtype=np.int64)
    for i in range(n):
        comm_strength[comm[i]] += strength[i]
        csize[comm[i]] += 1

    empty_stack = np.empty(n, dtype=np.int64)
    top = 0
    for c in range(n - 1, -1, -1):
        if csize[c] == 0:
            empty_stack[top] = c
            top += 1

    queue = np.empty(n, dtype=np.int64)
    in_queue = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        queue[i] = order[i]
        in_queue[order[i]] = True
    head = 0
    count = n

    k_to = np.zeros(n, dtype=np.float64)
    stamps = np.full(n, -1, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    step = 0
    moves = 0

    while count > 0:
        i = queue[head]
        head += 1
        if head == n:
            head = 0
        count -= 1
        in_queue[i] = False

        ci = comm[i]
        si = strength[i]
        step += 1
        ntouch = 0
        for e in range(indptr[i], indptr[i + 1]):
            cj = comm[nbr[e]]
            if stamps[cj] != step:
                stamps[cj] = step
                k_to[cj] = 0.0
                touched[ntouch] = cj
                ntouch += 1
            k_to[cj] += w[e]

        if stamps[ci] != step:
            stamps[ci] = step
            k_to[ci] = 0.0

        base = k_to[ci] * inv_w - gamma * si * (comm_strength[ci] - si) * half_inv_w2
        best_c = ci
        best_score = base
        for t in range(ntouch):
            c = touched[t]
            if c == ci:
                continue
            score = k_to[c] * inv_w - gamma * si * comm_strength[c] * half_inv_w2
            if score > best_score or (score == best_score and c < best_c):
                best_c = c
                best_score = score
        # splitting out to an empty community scores exactly 0
        if top > 0 and csize[ci] > 1:
            c = empty_stack[top - 1]
            if 0.0 > best_score or (0.0 == best_score and c < best_c):
                best_c = c
                best_score = 0.0
        if best_c != ci and best_score > base:
            if csize[best_c] == 0:
                top -= 1  # consumed the designated empty community
            comm_strength[ci] -= si
            csize[ci] -= 1
            if csize[ci] == 0:
                empty_stack[top] = ci
                top += 1
            comm_strength[best_c] += si
            csize[best_c] += 1
            comm[i] = best_c
            moves += 1
            for e in range(indptr[i], indptr[i + 1]):
                j = nbr[e]
                if comm[j] != best_c and not in_queue[j]:
                    queue[(head + count) % n] = j
                    in_queue[j] = True
                    count += 1
    return moves


@jit_kernel
def _refine(indptr, nbr, w, strength, total_w, gamma, comm_parent, order, unis, theta):
    """Randomized refinement inside each parent community.

    Starts from singletons; a still-singleton node merges into an adjacent
    refined community of its parent community, chosen with probability
    proportional to exp(gain/theta) among non-negative-gain candidates that
    are well-connected within the parent. Consumes at most one uniform per
    node. Returns the refined membership.
    """
    n = indptr.shape[0] - 1
    inv_w = 1.0 / total_w
    half_inv_w2 = 0.5 * inv_w * inv_w

    rcomm = np.arange(n)
    rsize = np.ones(n, dtype=np.int64)
    rstrength = strength.copy()

    pstrength = np.zeros(n, dtype=np.float64)
    for i in range(n):
        pstrength[comm_parent[i]] += strength[i]

    # rcut[c]: weight from refined community c to the rest of its parent
    rcut = np.zeros(n, dtype=np.float64)
    for i in range(n):
        p = comm_parent[i]
        acc = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            if comm_parent[nbr[e]] == p:
                acc += w[e]
        rcut[i] = acc

    k_to = np.zeros(n, dtype=np.float64)
    stamps = np.full(n, -1, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    cand = np.empty(n + 1, dtype=np.int64)
    cand_gain = np.empty(n + 1, dtype=np.float64)
    step = 0
    u_cursor = 0

    for idx in range(n):
        i = order[idx]
        own = rcomm[i]
        if rsize[own] > 1:
            continue
        p = comm_parent[i]
        sp = pstrength[p]
        si = strength[i]
        cut_i = rcut[own]
        # node must itself be well-connected within its parent subset
        if cut_i < gamma * si * (sp - si) * 0.5 * inv_w:
            continue

        step += 1
        ntouch = 0
        for e in range(indptr[i], indptr[i + 1]):
            j = nbr[e]
            if comm_parent[j] != p:
                continue
            c = rcomm[j]
            if stamps[c] != step:
                stamps[c] = step
                k_to[c] = 0.0
                touched[ntouch] = c
                ntouch += 1
            k_to[c] += w[e]

        ncand = 1
        cand[0] = own
        cand_gain[0] = 0.0
        max_gain = 0.0
        for t in range(ntouch):
            c = touched[t]
            if c == own:
                continue
            sc = rstrength[c]
            if rcut[c] < gamma * sc * (sp - sc) * 0.5 * inv_w:
                continue
            gain = k_to[c] * inv_w - gamma * si * sc * half_inv_w2
            if gain < 0.0:
                continue
            cand[ncand] = c
            cand_gain[ncand] = gain
            ncand += 1
            if gain > max_gain:
                max_gain = gain

        u = unis[u_cursor]
        u_cursor += 1
        if ncand == 1:
            continue
        total = 0.0
        for t in range(ncand):
            total += math.exp((cand_gain[t] - max_gain) / theta)
        target = u * total
        acc = 0.0
        chosen = own
        for t in range(ncand):
            acc += math.exp((cand_gain[t] - max_gain) / theta)
            if acc >= target:
                chosen = cand[t]
                break
        if chosen == own:
            continue

        kc = 0.0
        if stamps[chosen] == step:
            kc = k_to[chosen]
        rcut[chosen] = rcut[chosen] + cut_i - 2.0 * kc
        rstrength[chosen] += si
        rsize[chosen] += 1
        rsize[own] = 0
        rcomm[i] = chosen
    return rcomm
