"""Internal min-cost-flow engine: primal network simplex, uncapacitated arcs.

Every exact optimization in the transport layer (1-Wasserstein plans, norms
of signed measures against bounded-Lipschitz test functions, projections
onto the probability simplex) reduces to a min-cost flow on a small graph,
so one solver serves them all and each solve carries a dual certificate.

The spanning-tree basis is kept explicitly (parent / entering-arc /
orientation arrays plus doubly-linked children lists). After a pivot the
potentials of the regrafted subtree shift by the entering arc's reduced
cost, so updates touch only that subtree; a full refresh runs periodically
to keep rounding drift bounded. Entering arcs are found with a wrap-around
block search; a long run of degenerate pivots switches the solver to
Bland's rule (lowest eligible arc index in and out), which cannot cycle.
"""
from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_UNBOUNDED = 2
STATUS_ITER_LIMIT = 3

STATUS_NAMES = {
    STATUS_OPTIMAL: "optimal",
    STATUS_INFEASIBLE: "infeasible",
    STATUS_UNBOUNDED: "unbounded",
    STATUS_ITER_LIMIT: "iteration limit reached",
}

REFRESH_INTERVAL = 4096


class SolverError(RuntimeError):
    """Raised when a solve does not finish with a certified optimum."""


@njit(cache=True)
def _unlink(x, parent, child_head, child_next, child_prev):
    p = parent[x]
    if p >= 0:
        prv = child_prev[x]
        nxt = child_next[x]
        if prv >= 0:
            child_next[prv] = nxt
        else:
            child_head[p] = nxt
        if nxt >= 0:
            child_prev[nxt] = prv


@njit(cache=True)
def _set_parent(x, new_parent, parent, child_head, child_next, child_prev):
    _unlink(x, parent, child_head, child_next, child_prev)
    parent[x] = new_parent
    if new_parent >= 0:
        h = child_head[new_parent]
        child_next[x] = h
        child_prev[x] = -1
        if h >= 0:
            child_prev[h] = x
        child_head[new_parent] = x
    else:
        child_next[x] = -1
        child_prev[x] = -1


@njit(cache=True)
def _refresh_all(n_all, root, parent, pred, up, acost, pi, depth,
                 stack, child_head, child_next, child_prev):
    """Rebuild children lists and recompute all potentials and depths."""
    for i in range(n_all):
        child_head[i] = -1
        child_next[i] = -1
        child_prev[i] = -1
    for i in range(n_all):
        if i != root:
            p = parent[i]
            nxt = child_head[p]
            child_next[i] = nxt
            if nxt >= 0:
                child_prev[nxt] = i
            child_head[p] = i
    pi[root] = 0.0
    depth[root] = 0
    top = 0
    stack[top] = root
    top += 1
    while top > 0:
        top -= 1
        x = stack[top]
        c = child_head[x]
        while c != -1:
            a = pred[c]
            if up[c]:
                # Tree arc points child -> parent: cost + pi[c] - pi[x] = 0.
                pi[c] = pi[x] - acost[a]
            else:
                pi[c] = pi[x] + acost[a]
            depth[c] = depth[x] + 1
            stack[top] = c
            top += 1
            c = child_next[c]


@njit(cache=True)
def _shift_subtree(w, delta, parent, pi, depth, stack, child_head, child_next):
    """Add delta to potentials below w (inclusive) and fix depths."""
    depth[w] = depth[parent[w]] + 1
    pi[w] += delta
    top = 0
    stack[top] = w
    top += 1
    while top > 0:
        top -= 1
        x = stack[top]
        c = child_head[x]
        while c != -1:
            pi[c] += delta
            depth[c] = depth[x] + 1
            stack[top] = c
            top += 1
            c = child_next[c]


@njit(cache=True)
def _solve(n_nodes, src, dst, cost, supply, max_iters):
    n_real_arcs = src.shape[0]
    root = n_nodes
    n_all = n_nodes + 1
    n_arcs = n_real_arcs + n_nodes

    asrc = np.empty(n_arcs, np.int64)
    adst = np.empty(n_arcs, np.int64)
    acost = np.empty(n_arcs, np.float64)
    flow = np.zeros(n_arcs, np.float64)
    state = np.ones(n_arcs, np.int8)  # 1 = nonbasic at zero, 0 = in tree

    cmax = 0.0
    for k in range(n_real_arcs):
        asrc[k] = src[k]
        adst[k] = dst[k]
        acost[k] = cost[k]
        if abs(cost[k]) > cmax:
            cmax = abs(cost[k])
    big = 1.0 + (cmax + 1.0) * n_all

    parent = np.full(n_all, -1, np.int64)
    pred = np.full(n_all, -1, np.int64)
    up = np.zeros(n_all, np.bool_)
    pi = np.zeros(n_all, np.float64)
    depth = np.zeros(n_all, np.int64)
    stack = np.empty(n_all, np.int64)
    child_head = np.full(n_all, -1, np.int64)
    child_next = np.full(n_all, -1, np.int64)
    child_prev = np.full(n_all, -1, np.int64)

    # Initial basis: one artificial arc per node, oriented by supply sign.
    for i in range(n_nodes):
        a = n_real_arcs + i
        if supply[i] >= 0.0:
            asrc[a] = i
            adst[a] = root
            flow[a] = supply[i]
            up[i] = True
        else:
            asrc[a] = root
            adst[a] = i
            flow[a] = -supply[i]
            up[i] = False
        acost[a] = big
        state[a] = 0
        parent[i] = root
        pred[i] = a
    _refresh_all(n_all, root, parent, pred, up, acost, pi, depth,
                 stack, child_head, child_next, child_prev)

    opt_tol = 1e-10 * (1.0 + cmax)
    block = int(np.sqrt(n_arcs)) + 1
    if block < 64:
        block = 64
    next_arc = 0
    bland = False
    degen_run = 0
    degen_limit = 100 * n_all + 10000
    iters = 0
    e_in = 0

    while iters < max_iters:
        # ---- pricing ----
        e_in = -1
        if not bland:
            best = -opt_tol
            cnt = block
            scanned = 0
            e = next_arc
            while scanned < n_arcs:
                if state[e] == 1:
                    rc = acost[e] + pi[asrc[e]] - pi[adst[e]]
                    if rc < best:
                        best = rc
                        e_in = e
                scanned += 1
                e += 1
                if e == n_arcs:
                    e = 0
                cnt -= 1
                if cnt == 0:
                    if e_in >= 0:
                        break
                    cnt = block
            next_arc = e
        else:
            for e in range(n_arcs):
                if state[e] == 1:
                    rc = acost[e] + pi[asrc[e]] - pi[adst[e]]
                    if rc < -opt_tol:
                        e_in = e
                        break
        if e_in < 0:
            break  # no improving arc: optimal basis

        u = asrc[e_in]
        v = adst[e_in]
        rc_in = acost[e_in] + pi[u] - pi[v]

        # ---- join (lowest common ancestor) ----
        x = u
        y = v
        while depth[x] > depth[y]:
            x = parent[x]
        while depth[y] > depth[x]:
            y = parent[y]
        while x != y:
            x = parent[x]
            y = parent[y]
        join = x

        # ---- ratio test over the cycle ----
        # Pushing theta along u -> v returns through the tree path
        # v -> join -> u. Opposing arcs: up[x] on the u side (arc points
        # against the travel direction), not-up[x] on the v side.
        theta = np.inf
        e_out = -1
        out_node = -1
        out_on_u_side = False
        x = u
        while x != join:
            a = pred[x]
            if up[x]:
                f = flow[a]
                take = f < theta
                if bland and (not take) and f <= theta and e_out >= 0 and a < e_out:
                    take = True
                if take:
                    theta = f
                    e_out = a
                    out_node = x
                    out_on_u_side = True
            x = parent[x]
        x = v
        while x != join:
            a = pred[x]
            if not up[x]:
                f = flow[a]
                take = f < theta
                if bland and (not take) and f <= theta and e_out >= 0 and a < e_out:
                    take = True
                if take:
                    theta = f
                    e_out = a
                    out_node = x
                    out_on_u_side = False
            x = parent[x]
        if e_out < 0:
            return flow, pi, STATUS_UNBOUNDED, iters

        # ---- apply flow change around the cycle ----
        if theta > 0.0:
            flow[e_in] += theta
            x = u
            while x != join:
                a = pred[x]
                if up[x]:
                    flow[a] -= theta
                else:
                    flow[a] += theta
                x = parent[x]
            x = v
            while x != join:
                a = pred[x]
                if up[x]:
                    flow[a] += theta
                else:
                    flow[a] -= theta
                x = parent[x]

        # ---- basis exchange ----
        # Removing e_out cuts the subtree rooted at out_node; the entering
        # arc's endpoint inside that subtree becomes its new local root.
        w = u if out_on_u_side else v
        z = v if out_on_u_side else u
        a_node = w
        ap = parent[a_node]
        apred = pred[a_node]
        aup = up[a_node]
        while a_node != out_node:
            b = ap
            bp = parent[b]
            bpred = pred[b]
            bup = up[b]
            _set_parent(b, a_node, parent, child_head, child_next, child_prev)
            pred[b] = apred
            up[b] = not aup
            a_node = b
            ap = bp
            apred = bpred
            aup = bup
        _set_parent(w, z, parent, child_head, child_next, child_prev)
        pred[w] = e_in
        up[w] = out_on_u_side

        state[e_in] = 0
        state[e_out] = 1
        flow[e_out] = 0.0

        # Potentials below w shift by a constant so the entering arc's
        # reduced cost becomes zero; everything else is untouched.
        delta = -rc_in if out_on_u_side else rc_in
        _shift_subtree(w, delta, parent, pi, depth, stack,
                       child_head, child_next)

        iters += 1
        if iters % REFRESH_INTERVAL == 0:
            _refresh_all(n_all, root, parent, pred, up, acost, pi, depth,
                         stack, child_head, child_next, child_prev)

        if theta <= 0.0:
            degen_run += 1
            if degen_run > degen_limit and not bland:
                bland = True
        else:
            degen_run = 0

    if e_in >= 0:
        return flow, pi, STATUS_ITER_LIMIT, iters

    # Any residual flow on artificial arcs means the balanced problem was
    # not actually routable through real arcs.
    sscale = 1.0
    for i in range(n_nodes):
        if abs(supply[i]) > sscale:
            sscale = abs(supply[i])
    for a in range(n_real_arcs, n_arcs):
        if flow[a] > 1e-9 * sscale * n_nodes:
            return flow, pi, STATUS_INFEASIBLE, iters

    return flow, pi, STATUS_OPTIMAL, iters


def min_cost_flow(
    n_nodes: int,
    src: np.ndarray,
    dst: np.ndarray,
    cost: np.ndarray,
    supply: np.ndarray,
    max_iters: int | None = None,
):
    """Solve min sum(cost*flow) s.t. node balance = supply, flow >= 0.

    Supplies must sum to zero (enforce exactly before calling). Returns
    ``(flow, potentials)`` where ``flow`` covers the real arcs only and
    reduced costs ``cost[a] + pi[src[a]] - pi[dst[a]]`` are nonnegative at
    optimality. Raises SolverError on any non-optimal status.
    """
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    supply = np.ascontiguousarray(supply, dtype=np.float64)
    if not (src.shape == dst.shape == cost.shape) or src.ndim != 1:
        raise ValueError("src, dst, cost must be equal-length vectors")
    if supply.shape != (n_nodes,):
        raise ValueError("supply must have one entry per node")
    if src.size == 0:
        raise ValueError("problem has no arcs")
    if abs(float(supply.sum())) > 1e-9 * max(1.0, float(np.abs(supply).sum())):
        raise ValueError("supplies must sum to zero")
    if max_iters is None:
        max_iters = max(400_000, 60 * n_nodes * (int(np.log2(n_nodes + 2)) + 2))

    flow, pi, status, iters = _solve(n_nodes, src, dst, cost, supply, max_iters)
    if status != STATUS_OPTIMAL:
        raise SolverError(
            f"network simplex failed: {STATUS_NAMES[status]} after {iters} pivots"
        )
    return flow[: src.size].copy(), pi[:n_nodes].copy()
