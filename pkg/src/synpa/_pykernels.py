"""Pure-Python implementations of the hot kernels.

This module is the fallback used when the compiled ``_kernels`` extension is
not available (or when ``SYNPA_PURE_PYTHON=1``).  The compiled module follows
the same structure statement by statement, so both must be kept in sync.

Kernels
-------
max_weight_matching
    Edmonds' weighted blossom algorithm (primal-dual, O(n**3)) on a dense
    complete graph with non-negative integer weights.
invert_category
    Solve the symmetric bilinear pair system of one stack category for the
    two isolated-execution values.
slowdown_matrix
    Dispatch-ratio slowdown of every ordered application pair.
stack_slowdown_matrix
    The same ratio taken on the normalised predicted co-run stack.
"""

from __future__ import annotations

import math

BACKEND = "python"


class _DenseMatcher:
    """Maximum-weight matching on a complete graph with integer weights.

    ``dualvar[v]`` holds twice the vertex dual, ``dualvar[b]`` (b >= n) the
    blossom dual, so that edge slack is ``dualvar[i] + dualvar[j] - 2 * w``
    and all arithmetic stays integral.
    """

    def __init__(self, weights):
        n = len(weights)
        self.n = n
        ei, ej, ew = [], [], []
        for i in range(n):
            row = weights[i]
            for j in range(i + 1, n):
                ei.append(i)
                ej.append(j)
                ew.append(int(row[j]))
        self.ei, self.ej, self.ew = ei, ej, ew
        nedge = len(ew)
        self.nedge = nedge
        # endpoint p of edge k: vertex ei[k] for p = 2k, ej[k] for p = 2k+1
        self.endpoint = [0] * (2 * nedge)
        for k in range(nedge):
            self.endpoint[2 * k] = ei[k]
            self.endpoint[2 * k + 1] = ej[k]
        self.neighbend = [[] for _ in range(n)]
        for k in range(nedge):
            self.neighbend[ei[k]].append(2 * k + 1)
            self.neighbend[ej[k]].append(2 * k)
        maxweight = max(ew) if ew else 0
        maxweight = max(0, maxweight)
        self.mate = [-1] * n
        self.label = [0] * (2 * n)
        self.labelend = [-1] * (2 * n)
        self.inblossom = list(range(n))
        self.blossomparent = [-1] * (2 * n)
        self.blossomchilds = [None] * (2 * n)
        self.blossombase = list(range(n)) + [-1] * n
        self.blossomendps = [None] * (2 * n)
        self.bestedge = [-1] * (2 * n)
        self.blossombestedges = [None] * (2 * n)
        self.unusedblossoms = list(range(n, 2 * n))
        self.dualvar = [maxweight] * n + [0] * n
        self.allowedge = [False] * nedge
        self.queue = []

    def slack(self, k):
        return (self.dualvar[self.ei[k]] + self.dualvar[self.ej[k]]
                - 2 * self.ew[k])

    def leaves(self, b):
        n = self.n
        if b < n:
            return [b]
        out = []
        stack = [b]
        while stack:
            t = stack.pop()
            if t < n:
                out.append(t)
            else:
                stack.extend(reversed(self.blossomchilds[t]))
        return out

    def assign_label(self, w, t, p):
        while True:
            b = self.inblossom[w]
            self.label[w] = self.label[b] = t
            self.labelend[w] = self.labelend[b] = p
            self.bestedge[w] = self.bestedge[b] = -1
            if t == 1:
                self.queue.extend(self.leaves(b))
                return
            base = self.blossombase[b]
            mb = self.mate[base]
            w = self.endpoint[mb]
            t = 1
            p = mb ^ 1

    def scan_blossom(self, v, w):
        label, labelend = self.label, self.labelend
        path = []
        base = -1
        while v != -1 or w != -1:
            b = self.inblossom[v]
            if label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = self.endpoint[labelend[b]]
                b = self.inblossom[v]
                v = self.endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(self, base, k):
        n = self.n
        inblossom, label, labelend = self.inblossom, self.label, self.labelend
        v = self.ei[k]
        w = self.ej[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = self.unusedblossoms.pop()
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        path = []
        endps = []
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = self.endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            endps.append(labelend[bw] ^ 1)
            w = self.endpoint[labelend[bw]]
            bw = inblossom[w]
        self.blossomchilds[b] = path
        self.blossomendps[b] = endps
        label[b] = 1
        labelend[b] = labelend[bb]
        self.dualvar[b] = 0
        for v in self.leaves(b):
            if label[inblossom[v]] == 2:
                self.queue.append(v)
            inblossom[v] = b
        bestedgeto = [-1] * (2 * n)
        for bv in path:
            if self.blossombestedges[bv] is None:
                nblist = [p // 2 for v in self.leaves(bv)
                          for p in self.neighbend[v]]
            else:
                nblist = self.blossombestedges[bv]
            for kk in nblist:
                i = self.ei[kk]
                j = self.ej[kk]
                if inblossom[j] == b:
                    i, j = j, i
                bj = inblossom[j]
                if (bj != b and label[bj] == 1
                        and (bestedgeto[bj] == -1
                             or self.slack(kk) < self.slack(bestedgeto[bj]))):
                    bestedgeto[bj] = kk
            self.blossombestedges[bv] = None
            self.bestedge[bv] = -1
        best = [kk for kk in bestedgeto if kk != -1]
        self.blossombestedges[b] = best
        self.bestedge[b] = -1
        for kk in best:
            if self.bestedge[b] == -1 or self.slack(kk) < self.slack(self.bestedge[b]):
                self.bestedge[b] = kk

    def expand_blossom(self, b, endstage):
        n = self.n
        inblossom, label, labelend = self.inblossom, self.label, self.labelend
        for s in self.blossomchilds[b]:
            self.blossomparent[s] = -1
            if s < n:
                inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for v in self.leaves(s):
                    inblossom[v] = s
        if not endstage and label[b] == 2:
            childs = self.blossomchilds[b]
            endps = self.blossomendps[b]
            entrychild = inblossom[self.endpoint[labelend[b] ^ 1]]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[self.endpoint[p ^ 1]] = 0
                label[self.endpoint[endps[j - endptrick] ^ endptrick ^ 1]] = 0
                self.assign_label(self.endpoint[p ^ 1], 2, p)
                self.allowedge[endps[j - endptrick] // 2] = True
                j += jstep
                p = endps[j - endptrick] ^ endptrick
                self.allowedge[p // 2] = True
                j += jstep
            bv = childs[j]
            label[self.endpoint[p ^ 1]] = label[bv] = 2
            labelend[self.endpoint[p ^ 1]] = labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if label[bv] == 1:
                    j += jstep
                    continue
                reached = -1
                for v in self.leaves(bv):
                    if label[v] != 0:
                        reached = v
                        break
                if reached != -1:
                    v = reached
                    label[v] = 0
                    label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0
                    self.assign_label(v, 2, labelend[v])
                j += jstep
        label[b] = labelend[b] = -1
        self.blossomchilds[b] = self.blossomendps[b] = None
        self.blossombase[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unusedblossoms.append(b)

    def augment_blossom(self, b, v):
        n = self.n
        t = v
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= n:
            self.augment_blossom(t, v)
        childs = self.blossomchilds[b]
        endps = self.blossomendps[b]
        i = j = childs.index(t)
        if i & 1:
            j -= len(childs)
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[j]
            p = endps[j - endptrick] ^ endptrick
            if t >= n:
                self.augment_blossom(t, self.endpoint[p])
            j += jstep
            t = childs[j]
            if t >= n:
                self.augment_blossom(t, self.endpoint[p ^ 1])
            self.mate[self.endpoint[p]] = p ^ 1
            self.mate[self.endpoint[p ^ 1]] = p
        self.blossomchilds[b] = childs[i:] + childs[:i]
        self.blossomendps[b] = endps[i:] + endps[:i]
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]]

    def augment_matching(self, k):
        n = self.n
        inblossom, labelend = self.inblossom, self.labelend
        for s, p in ((self.ei[k], 2 * k + 1), (self.ej[k], 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= n:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if labelend[bs] == -1:
                    break
                t = self.endpoint[labelend[bs]]
                bt = inblossom[t]
                s = self.endpoint[labelend[bt]]
                j = self.endpoint[labelend[bt] ^ 1]
                if bt >= n:
                    self.augment_blossom(bt, j)
                self.mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    def solve(self):
        n = self.n
        label, inblossom, dualvar = self.label, self.inblossom, self.dualvar
        for _stage in range(n):
            for i in range(2 * n):
                label[i] = 0
                self.bestedge[i] = -1
            for i in range(n, 2 * n):
                self.blossombestedges[i] = None
            for k in range(self.nedge):
                self.allowedge[k] = False
            self.queue = []
            for v in range(n):
                if self.mate[v] == -1 and label[inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)
            augmented = False
            while True:
                while self.queue and not augmented:
                    v = self.queue.pop()
                    for p in self.neighbend[v]:
                        k = p // 2
                        w = self.endpoint[p]
                        if inblossom[v] == inblossom[w]:
                            continue
                        kslack = 0
                        if not self.allowedge[k]:
                            kslack = self.slack(k)
                            if kslack <= 0:
                                self.allowedge[k] = True
                        if self.allowedge[k]:
                            if label[inblossom[w]] == 0:
                                self.assign_label(w, 2, p ^ 1)
                            elif label[inblossom[w]] == 1:
                                base = self.scan_blossom(v, w)
                                if base >= 0:
                                    self.add_blossom(base, k)
                                else:
                                    self.augment_matching(k)
                                    augmented = True
                                    break
                            elif label[w] == 0:
                                label[w] = 2
                                self.labelend[w] = p ^ 1
                        elif label[inblossom[w]] == 1:
                            b = inblossom[v]
                            if self.bestedge[b] == -1 or kslack < self.slack(self.bestedge[b]):
                                self.bestedge[b] = k
                        elif label[w] == 0:
                            if self.bestedge[w] == -1 or kslack < self.slack(self.bestedge[w]):
                                self.bestedge[w] = k
                if augmented:
                    break
                # dual adjustment
                deltatype = 1
                delta = min(dualvar[:n])
                deltaedge = -1
                deltablossom = -1
                for v in range(n):
                    if label[inblossom[v]] == 0 and self.bestedge[v] != -1:
                        d = self.slack(self.bestedge[v])
                        if d < delta:
                            delta = d
                            deltatype = 2
                            deltaedge = self.bestedge[v]
                for b in range(2 * n):
                    if (self.blossomparent[b] == -1 and label[b] == 1
                            and self.bestedge[b] != -1):
                        d = self.slack(self.bestedge[b]) // 2
                        if d < delta:
                            delta = d
                            deltatype = 3
                            deltaedge = self.bestedge[b]
                for b in range(n, 2 * n):
                    if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                            and label[b] == 2 and dualvar[b] < delta):
                        delta = dualvar[b]
                        deltatype = 4
                        deltablossom = b
                for v in range(n):
                    lb = label[inblossom[v]]
                    if lb == 1:
                        dualvar[v] -= delta
                    elif lb == 2:
                        dualvar[v] += delta
                for b in range(n, 2 * n):
                    if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                        if label[b] == 1:
                            dualvar[b] += delta
                        elif label[b] == 2:
                            dualvar[b] -= delta
                if deltatype == 1:
                    break
                elif deltatype == 2:
                    self.allowedge[deltaedge] = True
                    i = self.ei[deltaedge]
                    if label[inblossom[i]] == 0:
                        i = self.ej[deltaedge]
                    self.queue.append(i)
                elif deltatype == 3:
                    self.allowedge[deltaedge] = True
                    self.queue.append(self.ei[deltaedge])
                else:
                    self.expand_blossom(deltablossom, False)
            if not augmented:
                break
            for b in range(n, 2 * n):
                if (self.blossomparent[b] == -1 and self.blossombase[b] >= 0
                        and label[b] == 1 and dualvar[b] == 0):
                    self.expand_blossom(b, True)
        mate = [self.endpoint[p] if p >= 0 else -1 for p in self.mate]
        return mate, list(dualvar), list(self.blossomparent)


def max_weight_matching(weights):
    """Maximum-weight matching of the complete graph on ``len(weights)`` vertices.

    ``weights`` is a symmetric n x n matrix of integers (only the upper
    triangle is read).  Returns ``(mate, dualvar, blossomparent)`` where
    ``mate[v]`` is the partner of v or -1; the two other lists describe the
    final dual solution (see ``matching.tight_edges``).
    """
    if len(weights) == 0:
        return [], [], []
    return _DenseMatcher(weights).solve()


def _residual(a, b, g, r, x, y, mi, mj):
    return (a + b * x + g * y + r * x * y - mi,
            a + b * y + g * x + r * x * y - mj)


def _newton(a, b, g, r, mi, mj, tol, max_iter):
    x = min(max(mi, 0.0), 1.0)
    y = min(max(mj, 0.0), 1.0)
    f1, f2 = _residual(a, b, g, r, x, y, mi, mj)
    norm = max(abs(f1), abs(f2))
    for _ in range(max_iter):
        if norm < tol:
            return x, y, True
        j11 = b + r * y
        j12 = g + r * x
        j21 = g + r * y
        j22 = b + r * x
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            return x, y, False
        dx = (f1 * j22 - f2 * j12) / det
        dy = (j11 * f2 - j21 * f1) / det
        step = 1.0
        while step > 1e-6:
            nx = x - step * dx
            ny = y - step * dy
            g1, g2 = _residual(a, b, g, r, nx, ny, mi, mj)
            nnorm = max(abs(g1), abs(g2))
            if nnorm < norm:
                break
            step *= 0.5
        else:
            return x, y, False
        x, y, f1, f2, norm = nx, ny, g1, g2, nnorm
    return x, y, norm < tol


def _box_distance(x, y):
    return (max(0.0, -x) + max(0.0, x - 1.0)
            + max(0.0, -y) + max(0.0, y - 1.0))


def invert_category(a, b, g, r, mi, mj, tol=1e-9, max_iter=100):
    """Isolated values ``(x, y, ok)`` reproducing the co-run pair ``(mi, mj)``.

    Solves ``mi = a + b*x + g*y + r*x*y`` and ``mj = a + b*y + g*x + r*x*y``.
    """
    if g == 0.0 and r == 0.0:
        if b == 0.0:
            return mi, mj, False
        return (mi - a) / b, (mj - a) / b, True
    if b != g:
        d = (mi - mj) / (b - g)
        qa = r
        qb = b + g - r * d
        qc = a - g * d - mi
        roots = []
        if qa == 0.0:
            if qb != 0.0:
                roots.append(-qc / qb)
        else:
            disc = qb * qb - 4.0 * qa * qc
            if disc >= 0.0:
                q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
                if q != 0.0:
                    roots.append(q / qa)
                    roots.append(qc / q)
                else:
                    roots.append(-qb / (2.0 * qa))
        best_x = 0.0
        best_key = None
        for x in roots:
            y = x - d
            key = (_box_distance(x, y), abs(x - mi) + abs(y - mj))
            if best_key is None or key < best_key:
                best_key = key
                best_x = x
        if best_key is not None:
            return best_x, best_x - d, True
    return _newton(a, b, g, r, mi, mj, tol, max_iter)


def slowdown_matrix(alpha, beta, gamma, rho, dispatch, cap, clamp):
    """``out[i][j]`` = slowdown of app i when co-running with app j.

    Slowdown is isolated dispatch over predicted co-run dispatch, capped at
    ``cap``; the diagonal is left at 0.
    """
    n = len(dispatch)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        x = dispatch[i]
        for j in range(n):
            if i == j:
                continue
            y = dispatch[j]
            m = alpha + beta * x + gamma * y + rho * x * y
            if clamp:
                m = min(max(m, 0.0), 1.0)
            if m <= 0.0:
                s = cap
            else:
                s = min(x / m, cap)
            out[i][j] = s
    return out


def stack_slowdown_matrix(coefficients, stacks, cap, clamp):
    """Like ``slowdown_matrix`` but on the normalised predicted co-run stack.

    ``coefficients`` holds one ``(alpha, beta, gamma, rho)`` row per
    category, dispatch first; ``stacks`` one row of category values per app.
    """
    n = len(stacks)
    k = len(coefficients)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        xi = stacks[i]
        for j in range(n):
            if i == j:
                continue
            xj = stacks[j]
            total = 0.0
            disp = 0.0
            for c in range(k):
                a, b, g, r = coefficients[c]
                m = a + b * xi[c] + g * xj[c] + r * xi[c] * xj[c]
                if clamp:
                    m = min(max(m, 0.0), 1.0)
                if c == 0:
                    disp = m
                total += m
            if disp <= 0.0 or total <= 0.0:
                s = cap
            else:
                s = min(xi[0] * total / disp, cap)
            out[i][j] = s
    return out
