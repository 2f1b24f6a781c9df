# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see ``_pykernels`` for the reference)."""

from libc.stdlib cimport malloc, free
from time import perf_counter

NAME = "cython"

cdef enum:
    POLICY_NA = 0
    POLICY_NAW = 1
    POLICY_ONP = 2
    POLICY_REPLAY = 3
    OPTIMAL = 0
    TIME_LIMIT = 1
    INFEASIBLE = 2
    TIME_LIMIT_NO_INCUMBENT = 3
    MODE_NTP = 0
    CLOCK_STRIDE = 2048

cdef long long BIG = 1LL << 60


def potential_counts(s, r, long horizon, long cutoff, bint enforce_cutoff, bint in_horizon_only=True):
    cdef Py_ssize_t M = len(s), i, j
    cdef long *e = <long *> malloc(M * sizeof(long))
    cdef long *rr = <long *> malloc(M * sizeof(long))
    cdef long ei, si, ri, c, total = 0
    per = [0] * M
    try:
        for i in range(M):
            si = s[i]
            ri = r[i]
            rr[i] = ri
            e[i] = -1
            if si >= 0 and ri >= 0:
                ei = si + ri
                if not in_horizon_only or ei <= horizon:
                    e[i] = ei
        for i in range(M):
            ei = e[i]
            if ei < 0:
                continue
            if enforce_cutoff and rr[i] > cutoff:
                continue
            c = 0
            for j in range(i + 1, M):
                if 0 <= e[j] < ei:
                    c += 1
            per[i] = c
            total += c
    finally:
        free(e)
        free(rr)
    return total, per


cdef inline long _round_half_away(double x):
    if x >= 0:
        return <long> (x + 0.5)
    return -(<long> (-x + 0.5))


def resolve_chain(occ, held, cursor, prefs, long i, bint may_bump):
    chain = []
    cdef long cur = i, p, l, o, target, victim
    cdef long L = len(occ)
    cdef bint bump_ok = may_bump
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
        cursor[victim] = cursor[victim] + 1
        cur = victim
        bump_ok = True


def simulate_core(r, prefs, long horizon, long cutoff, long cap, long num_shifts,
                  long kind, p_int, p_float, callback=None):
    cdef long M = len(r), L = num_shifts, H = horizon
    cdef long t, i, n, k, idx, cur, p, l, o, target, victim, head, ri, et
    cdef long notified = 0, occupied = 0
    cdef bint bump_ok
    cdef long *rr = <long *> malloc(M * sizeof(long))
    cdef long *ss = <long *> malloc(M * sizeof(long))
    cdef long *occ = <long *> malloc(L * sizeof(long))
    cdef long *cursor = <long *> malloc(M * sizeof(long))
    cdef long *realized = <long *> malloc(M * sizeof(long))
    cdef long *bumped = <long *> malloc(M * sizeof(long))
    cdef long *pref = <long *> malloc(M * L * sizeof(long))
    # responses due per epoch as linked lists in seniority order
    cdef long *first = <long *> malloc((H + 1) * sizeof(long))
    cdef long *last = <long *> malloc((H + 1) * sizeof(long))
    cdef long *nxt = <long *> malloc(M * sizeof(long))
    cdef long n_pi = len(p_int), n_pf = len(p_float)
    cdef long *pi = <long *> malloc((n_pi + 1) * sizeof(long))
    cdef double *pf = <double *> malloc((n_pf + 1) * sizeof(double))
    try:
        for i in range(M):
            rr[i] = r[i]
            ss[i] = -1
            cursor[i] = 0
            realized[i] = 0
            bumped[i] = 0
            nxt[i] = -1
            row = prefs[i]
            for p in range(L):
                pref[i * L + p] = row[p]
        for l in range(L):
            occ[l] = -1
        for t in range(H + 1):
            first[t] = -1
            last[t] = -1
        for k in range(n_pi):
            pi[k] = p_int[k]
        for k in range(n_pf):
            pf[k] = p_float[k]

        for t in range(H + 1):
            head = first[t]
            while head >= 0:
                cur = head
                bump_ok = rr[head] <= cutoff
                while True:
                    p = cursor[cur]
                    target = -1
                    victim = -1
                    while p < L:
                        l = pref[cur * L + p]
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
                        break
                    cursor[cur] = p
                    occ[target] = cur
                    if victim < 0:
                        occupied += 1
                        break
                    realized[head] += 1
                    bumped[victim] += 1
                    cursor[victim] += 1
                    cur = victim
                    bump_ok = True
                head = nxt[head]
            if occupied < L and notified < M:
                if kind == POLICY_NA:
                    n = M - notified
                elif kind == POLICY_NAW:
                    n = pi[0] if t % pi[1] == 0 else 0
                elif kind == POLICY_ONP:
                    if t < n_pf:
                        n = _round_half_away(pf[t] - notified)
                        if n < 0:
                            n = 0
                        if n > M - notified:
                            n = M - notified
                    else:
                        n = 0
                elif kind == POLICY_REPLAY:
                    n = pi[t] if t < n_pi else 0
                else:
                    n = callback(t, notified)
                if n > cap:
                    n = cap
                if n > M - notified:
                    n = M - notified
                for idx in range(n):
                    i = notified
                    ss[i] = t
                    ri = rr[i]
                    if ri >= 0 and t + ri <= H:
                        et = t + ri
                        if last[et] < 0:
                            first[et] = i
                        else:
                            nxt[last[et]] = i
                        last[et] = i
                    notified += 1
        s_out = [ss[i] for i in range(M)]
        realized_out = [realized[i] for i in range(M)]
        bumped_out = [bumped[i] for i in range(M)]
        occ_out = [occ[l] for l in range(L)]
    finally:
        free(rr); free(ss); free(occ); free(cursor); free(realized); free(bumped)
        free(pref); free(first); free(last); free(nxt); free(pi); free(pf)
    return s_out, realized_out, bumped_out, occ_out, occupied


cdef inline long _count_above(tuple rel, long x):
    # rel is sorted ascending
    cdef Py_ssize_t n = len(rel), k
    cdef long c = 0
    for k in range(n - 1, -1, -1):
        if <long> rel[k] > x:
            c += 1
        else:
            break
    return c


cdef tuple _insert_filter(tuple rel, long e, bint add, long lim):
    cdef list out = []
    cdef Py_ssize_t n = len(rel), k
    cdef long x
    cdef bint placed = not add
    for k in range(n):
        x = rel[k]
        if not placed and e <= x:
            if e > lim:
                out.append(e)
            placed = True
        if x > lim:
            out.append(x)
    if not placed and e > lim:
        out.append(e)
    return tuple(out)


cdef class _Search:
    cdef long M, H, L, D, W, mode
    cdef bint latest
    cdef double G
    cdef long *r
    cdef long *ub
    cdef long *reach
    cdef long *minr
    cdef long *s
    cdef long *best_s
    cdef double best
    cdef bint have_best, timed_out
    cdef long long nodes
    cdef double deadline
    cdef bint use_deadline
    cdef dict table

    def __cinit__(self, r, long H, long L, long D, long W, double G, long mode, double time_limit,
                  bint latest=False):
        cdef long i
        self.M = len(r)
        self.H = H
        self.L = L
        self.D = D
        self.W = W
        self.G = G
        self.mode = mode
        self.latest = latest
        self.r = <long *> malloc(self.M * sizeof(long))
        self.ub = <long *> malloc(self.M * sizeof(long))
        self.reach = <long *> malloc(self.M * sizeof(long))
        self.minr = <long *> malloc((self.M + 1) * sizeof(long))
        self.s = <long *> malloc(self.M * sizeof(long))
        self.best_s = <long *> malloc(self.M * sizeof(long))
        for i in range(self.M):
            self.r[i] = r[i]
            self.s[i] = 0
        self.best = <double> BIG
        self.have_best = False
        self.timed_out = False
        self.nodes = 0
        self.use_deadline = time_limit > 0
        self.deadline = perf_counter() + time_limit if time_limit > 0 else 0.0
        self.table = {}

    def __dealloc__(self):
        free(self.r); free(self.ub); free(self.reach); free(self.minr)
        free(self.s); free(self.best_s)

    cdef inline bint _tick(self):
        self.nodes += 1
        if self.use_deadline and self.nodes % CLOCK_STRIDE == 0:
            if perf_counter() > self.deadline:
                self.timed_out = True
        return self.timed_out

    cdef void _record(self, double value):
        cdef long k
        self.best = value
        self.have_best = True
        for k in range(self.M):
            self.best_s[k] = self.s[k]

    cdef bint prepare_ntp(self):
        cdef long i, mx = -1
        for i in range(self.M - 1, -1, -1):
            if self.r[i] < 0:
                return False
            if self.r[i] > mx:
                mx = self.r[i]
            self.ub[i] = self.H - mx
        if self.ub[0] < 0:
            return False
        self.minr[self.M] = BIG
        for i in range(self.M - 1, -1, -1):
            self.minr[i] = self.minr[i + 1] if self.minr[i + 1] < self.r[i] else self.r[i]
        for i in range(self.M):
            self.reach[i] = self.ub[i] + self.r[i]
        return True

    cdef void prepare_ntp2(self):
        cdef long i
        self.minr[self.M] = BIG
        for i in range(self.M - 1, -1, -1):
            if self.r[i] >= 0 and self.r[i] < self.minr[i + 1]:
                self.minr[i] = self.r[i]
            else:
                self.minr[i] = self.minr[i + 1]

    cdef void dfs_ntp(self, long i, long sprev, tuple rel, long g):
        cdef long j, v, e, inc, lim, n_rel, lb
        if self._tick():
            return
        if i == self.M:
            if g < self.best:
                self._record(g)
            return
        n_rel = len(rel)
        lb = g
        if n_rel:
            for j in range(i, self.M):
                lb += _count_above(rel, self.reach[j])
                if lb >= self.best:
                    return
        elif g >= self.best:
            return
        key = (i, sprev, rel)
        old = self.table.get(key)
        if old is not None and <long> old <= g:
            return
        self.table[key] = g
        for v in range(sprev, self.ub[i] + 1):
            e = v + self.r[i]
            inc = _count_above(rel, e)
            if g + inc >= self.best:
                continue
            self.s[i] = v
            lim = v + self.minr[i + 1]
            self.dfs_ntp(i + 1, v, _insert_filter(rel, e, True, lim), g + inc)
            if self.timed_out:
                return

    cdef void dfs_ntp2(self, long i, long sprev, long c, long cnt, tuple rel, long g):
        cdef long j, v, e, inc, lim, lo, possible, nc, ncnt, ri, idx
        cdef double lb, total
        cdef bint inside
        if self._tick():
            return
        if i == self.M:
            total = g
            if cnt < self.L:
                total += self.G * (self.L - cnt)
            if total < self.best:
                self._record(total)
            return
        lo = sprev if c < self.W else sprev + 1
        if i == 0:
            lo = 0
        if lo > self.H:
            # no notification time left within the horizon
            return
        lb = g
        if cnt < self.L:
            possible = cnt
            for j in range(i, self.M):
                if self.r[j] >= 0 and lo + self.r[j] <= self.H:
                    possible += 1
                    if possible >= self.L:
                        break
            if possible < self.L:
                lb += self.G * (self.L - possible)
        if lb >= self.best:
            return
        key = (i, sprev, c, cnt, rel)
        old = self.table.get(key)
        if old is not None and <long> old <= g:
            return
        self.table[key] = g
        ri = self.r[i]
        for idx in range(self.H + 1 - lo):
            v = self.H - idx if self.latest else lo + idx
            inside = ri >= 0 and v + ri <= self.H
            inc = 0
            e = 0
            if inside:
                e = v + ri
                inc = _count_above(rel, e)
                if g + inc >= self.best:
                    continue
            self.s[i] = v
            nc = c + 1 if (v == sprev and i > 0) else 1
            ncnt = cnt + 1 if (inside and cnt < self.L) else cnt
            if self.minr[i + 1] >= BIG:
                nrel = ()
            else:
                lim = v + self.minr[i + 1]
                nrel = _insert_filter(rel, e, inside and ri <= self.D, lim)
            self.dfs_ntp2(i + 1, v, nc, ncnt, nrel, g + inc)
            if self.timed_out:
                return

    def run(self):
        cdef long k
        cdef object value
        if self.mode == MODE_NTP:
            if not self.prepare_ntp():
                return INFEASIBLE, None, None, 0
            self.dfs_ntp(0, 0, (), 0)
        else:
            self.prepare_ntp2()
            self.dfs_ntp2(0, 0, 0, 0, (), 0)
        if not self.have_best:
            status = TIME_LIMIT_NO_INCUMBENT if self.timed_out else INFEASIBLE
            return status, None, None, self.nodes
        status = TIME_LIMIT if self.timed_out else OPTIMAL
        value = self.best
        if value == int(value):
            value = int(value)
        return status, value, [self.best_s[k] for k in range(self.M)], self.nodes


def search(r, long horizon, long num_shifts, long cutoff, long cap, double penalty,
           long mode, double time_limit, bint latest=False):
    return _Search(r, horizon, num_shifts, cutoff, cap, penalty, mode,
                   time_limit if time_limit else 0.0, latest).run()
