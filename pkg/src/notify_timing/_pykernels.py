"""Pure-Python implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module; selected
automatically when the extension is unavailable. Encoding shared by both:
delays and notify times are plain int sequences with ``-1`` for
"non-responder" / "not notified"; preferences are 0-based shift ids.
"""
from __future__ import annotations

import time
from bisect import bisect_right, insort

NAME = "python"

# policy kind codes understood by simulate_core
POLICY_NA = 0
POLICY_NAW = 1
POLICY_ONP = 2
POLICY_REPLAY = 3
POLICY_CALLBACK = 4

# search status codes
OPTIMAL = 0
TIME_LIMIT = 1
INFEASIBLE = 2
TIME_LIMIT_NO_INCUMBENT = 3

MODE_NTP = 0
MODE_NTP2 = 1

_CLOCK_STRIDE = 2048


def potential_counts(s, r, horizon, cutoff, enforce_cutoff, in_horizon_only=True):
    """Count pairs i < j with e_i > e_j (both finite).

    Returns ``(total, per_employee)`` where ``per_employee[i]`` counts the
    pairs initiated by i.
    """
    M = len(s)
    e = [-1] * M
    for i in range(M):
        if s[i] >= 0 and r[i] >= 0:
            ei = s[i] + r[i]
            if not in_horizon_only or ei <= horizon:
                e[i] = ei
    per = [0] * M
    total = 0
    for i in range(M):
        ei = e[i]
        if ei < 0:
            continue
        if enforce_cutoff and r[i] > cutoff:
            continue
        c = 0
        for j in range(i + 1, M):
            ej = e[j]
            if 0 <= ej < ei:
                c += 1
        per[i] = c
        total += c
    return total, per


def resolve_chain(occ, held, cursor, prefs, i, may_bump):
    """Seat responder ``i``, cascading bumps down the seniority order.

    ``occ[l]`` is the employee holding shift l (or -1), ``held[j]`` the shift
    held by j (or -1), ``cursor[j]`` the position in ``prefs[j]`` where j's
    search resumes. All three are mutated in place.

    Returns ``(chain, filled)``: the displaced employees in order and whether
    a previously vacant shift became occupied.
    """
    chain = []
    cur = i
    bump_ok = may_bump
    L = len(occ)
    while True:
        row = prefs[cur]
        p = cursor[cur]
        target = -1
        victim = -1
        while p < L:
            l = row[p]
            o = occ[l]
            if o < 0:
                target = l
                break
            if bump_ok and o > cur:
                target = l
                victim = o
                break
            p += 1
        if target < 0:
            cursor[cur] = L
            held[cur] = -1
            return chain, False
        cursor[cur] = p
        occ[target] = cur
        held[cur] = target
        if victim < 0:
            return chain, True
        chain.append(victim)
        held[victim] = -1
        cursor[victim] += 1
        cur = victim
        # displaced employees may always displace juniors
        bump_ok = True


def _round_half_away(x):
    if x >= 0:
        return int(x + 0.5)
    return -int(-x + 0.5)


def _decide(kind, k, notified, M, p_int, p_float, callback):
    if kind == POLICY_NA:
        return M - notified
    if kind == POLICY_NAW:
        return p_int[0] if k % p_int[1] == 0 else 0
    if kind == POLICY_ONP:
        if k >= len(p_float):
            return 0
        a = _round_half_away(p_float[k] - notified)
        if a < 0:
            return 0
        return min(a, M - notified)
    if kind == POLICY_REPLAY:
        return p_int[k] if k < len(p_int) else 0
    return callback(k, notified)


def simulate_core(r, prefs, horizon, cutoff, cap, num_shifts, kind, p_int, p_float, callback=None):
    """Epoch loop of the notification system.

    At each epoch t = 0..H: deliver responses due at t in seniority order, then
    ask the policy how many to notify (capped by W, by the employees left, and
    only while some shift is still vacant).

    Returns ``(s, realized_per, bumped_count, occ, occupied)``.
    """
    M = len(r)
    L = num_shifts
    occ = [-1] * L
    held = [-1] * M
    cursor = [0] * M
    s = [-1] * M
    realized = [0] * M
    bumped = [0] * M
    buckets = [[] for _ in range(horizon + 1)]
    notified = 0
    occupied = 0
    for t in range(horizon + 1):
        for i in buckets[t]:
            chain, filled = resolve_chain(occ, held, cursor, prefs, i, r[i] <= cutoff)
            realized[i] += len(chain)
            for j in chain:
                bumped[j] += 1
            if filled:
                occupied += 1
        if occupied < L and notified < M:
            n = _decide(kind, t, notified, M, p_int, p_float, callback)
            if n > cap:
                n = cap
            if n > M - notified:
                n = M - notified
            for _ in range(max(n, 0)):
                i = notified
                s[i] = t
                if r[i] >= 0 and t + r[i] <= horizon:
                    buckets[t + r[i]].append(i)
                notified += 1
    return s, realized, bumped, occ, occupied


def search(r, horizon, num_shifts, cutoff, cap, penalty, mode, time_limit, latest=False):
    """Depth-first branch and bound over integer notification times.

    ``mode`` selects the objective: MODE_NTP minimizes potential bumps with
    every employee responding by H (no cutoff, no cap); MODE_NTP2 minimizes
    ``penalty * vacancies + bumps`` with cutoff-gated bumps, the per-epoch cap
    and employees allowed to fall outside the horizon.

    Values are tried in ascending order, so among optimal schedules the
    lexicographically smallest is returned; with ``latest`` (MODE_NTP2 only)
    they are tried in descending order and the lexicographically largest
    optimum is returned. Nodes repeating an already
    explored state (employee, last notify time, relevant pending response
    times, ...) at no lower cost are pruned.

    Returns ``(status, objective, schedule, nodes)``.
    """
    M = len(r)
    H = horizon
    deadline = time.perf_counter() + time_limit if time_limit and time_limit > 0 else None
    BIG = 1 << 60
    state = {"best": BIG, "best_s": None, "nodes": 0, "timed_out": False}
    s = [0] * M
    table = {}

    if mode == MODE_NTP:
        ub = [0] * M
        mx = -1
        for i in range(M - 1, -1, -1):
            if r[i] < 0:
                return INFEASIBLE, None, None, 0
            mx = max(mx, r[i])
            ub[i] = H - mx
        if ub[0] < 0:
            return INFEASIBLE, None, None, 0
        minr_after = [BIG] * (M + 1)
        for i in range(M - 1, -1, -1):
            minr_after[i] = min(minr_after[i + 1], r[i])
        reach = [ub[j] + r[j] for j in range(M)]

        def dfs(i, sprev, rel, g):
            state["nodes"] += 1
            if deadline is not None and state["nodes"] % _CLOCK_STRIDE == 0:
                if time.perf_counter() > deadline:
                    state["timed_out"] = True
            if state["timed_out"]:
                return
            if i == M:
                if g < state["best"]:
                    state["best"] = g
                    state["best_s"] = list(s)
                return
            best = state["best"]
            lb = g
            if rel:
                n_rel = len(rel)
                for j in range(i, M):
                    lb += n_rel - bisect_right(rel, reach[j])
                    if lb >= best:
                        return
            elif g >= best:
                return
            key = (i, sprev, rel)
            old = table.get(key)
            if old is not None and old <= g:
                return
            table[key] = g
            thr = minr_after[i + 1]
            ri = r[i]
            n_rel = len(rel)
            for v in range(sprev, ub[i] + 1):
                e = v + ri
                inc = n_rel - bisect_right(rel, e)
                if g + inc >= state["best"]:
                    continue
                s[i] = v
                lim = v + thr
                nr = list(rel)
                insort(nr, e)
                dfs(i + 1, v, tuple(x for x in nr if x > lim), g + inc)

        dfs(0, 0, (), 0)
    else:
        L = num_shifts
        minr_fin = [BIG] * (M + 1)
        for i in range(M - 1, -1, -1):
            minr_fin[i] = min(minr_fin[i + 1], r[i]) if r[i] >= 0 else minr_fin[i + 1]

        def dfs(i, sprev, c, cnt, rel, g):
            state["nodes"] += 1
            if deadline is not None and state["nodes"] % _CLOCK_STRIDE == 0:
                if time.perf_counter() > deadline:
                    state["timed_out"] = True
            if state["timed_out"]:
                return
            if i == M:
                total = g + (penalty * (L - cnt) if cnt < L else 0)
                if total < state["best"]:
                    state["best"] = total
                    state["best_s"] = list(s)
                return
            lo = sprev if c < cap else sprev + 1
            if i == 0:
                lo = 0
            if lo > H:
                # no notification time left within the horizon
                return
            lb = g
            if cnt < L:
                possible = cnt
                for j in range(i, M):
                    if r[j] >= 0 and lo + r[j] <= H:
                        possible += 1
                        if possible >= L:
                            break
                if possible < L:
                    lb += penalty * (L - possible)
            if lb >= state["best"]:
                return
            key = (i, sprev, c, cnt, rel)
            old = table.get(key)
            if old is not None and old <= g:
                return
            table[key] = g
            ri = r[i]
            thr = minr_fin[i + 1]
            n_rel = len(rel)
            values = range(H, lo - 1, -1) if latest else range(lo, H + 1)
            for v in values:
                inside = ri >= 0 and v + ri <= H
                inc = 0
                e = 0
                if inside:
                    e = v + ri
                    inc = n_rel - bisect_right(rel, e)
                    if g + inc >= state["best"]:
                        continue
                s[i] = v
                nc = c + 1 if (v == sprev and i > 0) else 1
                ncnt = cnt + 1 if (inside and cnt < L) else cnt
                if thr >= BIG:
                    nrel = ()
                else:
                    lim = v + thr
                    if inside and ri <= cutoff:
                        nr = list(rel)
                        insort(nr, e)
                    else:
                        nr = rel
                    nrel = tuple(x for x in nr if x > lim)
                dfs(i + 1, v, nc, ncnt, nrel, g + inc)

        dfs(0, 0, 0, 0, (), 0)

    if state["best_s"] is None:
        status = TIME_LIMIT_NO_INCUMBENT if state["timed_out"] else INFEASIBLE
        return status, None, None, state["nodes"]
    status = TIME_LIMIT if state["timed_out"] else OPTIMAL
    return status, state["best"], state["best_s"], state["nodes"]
