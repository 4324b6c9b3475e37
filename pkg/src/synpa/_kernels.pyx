# cython: language_level=3, cdivision=True
"""Compiled hot kernels; statement-for-statement twin of ``_pykernels``."""

from libc.math cimport sqrt, copysign, fabs
from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

BACKEND = "cython"


cdef class _DenseMatcher:
    cdef int n, nedge
    cdef int *ei
    cdef int *ej
    cdef int64_t *ew
    cdef int *endpoint
    cdef int *neighbend      # n x (n-1) endpoints
    cdef int *mate
    cdef int *label
    cdef int *labelend
    cdef int *inblossom
    cdef int *blossomparent
    cdef int *blossombase
    cdef int *bestedge
    cdef char *allowedge
    cdef int64_t *dualvar
    cdef list blossomchilds, blossomendps, blossombestedges, unusedblossoms, queue

    def __cinit__(self, weights):
        cdef int n = len(weights)
        cdef int i, j, k, c
        cdef int64_t maxweight = 0
        self.n = n
        self.nedge = n * (n - 1) // 2
        cdef int nedge = self.nedge
        self.ei = <int *> malloc(max(nedge, 1) * sizeof(int))
        self.ej = <int *> malloc(max(nedge, 1) * sizeof(int))
        self.ew = <int64_t *> malloc(max(nedge, 1) * sizeof(int64_t))
        self.endpoint = <int *> malloc(max(2 * nedge, 1) * sizeof(int))
        self.neighbend = <int *> malloc(max(n * (n - 1), 1) * sizeof(int))
        self.mate = <int *> malloc(n * sizeof(int))
        self.label = <int *> malloc(2 * n * sizeof(int))
        self.labelend = <int *> malloc(2 * n * sizeof(int))
        self.inblossom = <int *> malloc(n * sizeof(int))
        self.blossomparent = <int *> malloc(2 * n * sizeof(int))
        self.blossombase = <int *> malloc(2 * n * sizeof(int))
        self.bestedge = <int *> malloc(2 * n * sizeof(int))
        self.allowedge = <char *> malloc(max(nedge, 1) * sizeof(char))
        self.dualvar = <int64_t *> malloc(2 * n * sizeof(int64_t))
        k = 0
        for i in range(n):
            row = weights[i]
            for j in range(i + 1, n):
                self.ei[k] = i
                self.ej[k] = j
                self.ew[k] = <int64_t> int(row[j])
                if self.ew[k] > maxweight:
                    maxweight = self.ew[k]
                k += 1
        for k in range(nedge):
            self.endpoint[2 * k] = self.ei[k]
            self.endpoint[2 * k + 1] = self.ej[k]
        cdef int *fill = <int *> malloc(max(n, 1) * sizeof(int))
        for i in range(n):
            fill[i] = 0
        for k in range(nedge):
            i = self.ei[k]
            j = self.ej[k]
            self.neighbend[i * (n - 1) + fill[i]] = 2 * k + 1
            fill[i] += 1
            self.neighbend[j * (n - 1) + fill[j]] = 2 * k
            fill[j] += 1
        free(fill)
        for i in range(n):
            self.mate[i] = -1
            self.inblossom[i] = i
            self.dualvar[i] = maxweight
            self.blossombase[i] = i
        for i in range(n, 2 * n):
            self.blossombase[i] = -1
            self.dualvar[i] = 0
        for i in range(2 * n):
            self.label[i] = 0
            self.labelend[i] = -1
            self.blossomparent[i] = -1
            self.bestedge[i] = -1
        for k in range(nedge):
            self.allowedge[k] = 0
        self.blossomchilds = [None] * (2 * n)
        self.blossomendps = [None] * (2 * n)
        self.blossombestedges = [None] * (2 * n)
        self.unusedblossoms = list(range(n, 2 * n))
        self.queue = []

    def __dealloc__(self):
        free(self.ei)
        free(self.ej)
        free(self.ew)
        free(self.endpoint)
        free(self.neighbend)
        free(self.mate)
        free(self.label)
        free(self.labelend)
        free(self.inblossom)
        free(self.blossomparent)
        free(self.blossombase)
        free(self.bestedge)
        free(self.allowedge)
        free(self.dualvar)

    cdef inline int64_t slack(self, int k):
        return self.dualvar[self.ei[k]] + self.dualvar[self.ej[k]] - 2 * self.ew[k]

    cdef list leaves(self, int b):
        cdef int n = self.n
        cdef int t
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

    cdef void assign_label(self, int w, int t, int p):
        cdef int b, base, mb
        while True:
            b = self.inblossom[w]
            self.label[w] = t
            self.label[b] = t
            self.labelend[w] = p
            self.labelend[b] = p
            self.bestedge[w] = -1
            self.bestedge[b] = -1
            if t == 1:
                self.queue.extend(self.leaves(b))
                return
            base = self.blossombase[b]
            mb = self.mate[base]
            w = self.endpoint[mb]
            t = 1
            p = mb ^ 1

    cdef int scan_blossom(self, int v, int w):
        cdef int b, base = -1, tmp
        path = []
        while v != -1 or w != -1:
            b = self.inblossom[v]
            if self.label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            self.label[b] = 5
            if self.labelend[b] == -1:
                v = -1
            else:
                v = self.endpoint[self.labelend[b]]
                b = self.inblossom[v]
                v = self.endpoint[self.labelend[b]]
            if w != -1:
                tmp = v
                v = w
                w = tmp
        for b in path:
            self.label[b] = 1
        return base

    cdef void add_blossom(self, int base, int k):
        cdef int n = self.n
        cdef int v = self.ei[k]
        cdef int w = self.ej[k]
        cdef int bb = self.inblossom[base]
        cdef int bv = self.inblossom[v]
        cdef int bw = self.inblossom[w]
        cdef int b, i, j, bj, kk, p
        b = self.unusedblossoms.pop()
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        path = []
        endps = []
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            endps.append(self.labelend[bv])
            v = self.endpoint[self.labelend[bv]]
            bv = self.inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            endps.append(self.labelend[bw] ^ 1)
            w = self.endpoint[self.labelend[bw]]
            bw = self.inblossom[w]
        self.blossomchilds[b] = path
        self.blossomendps[b] = endps
        self.label[b] = 1
        self.labelend[b] = self.labelend[bb]
        self.dualvar[b] = 0
        for v in self.leaves(b):
            if self.label[self.inblossom[v]] == 2:
                self.queue.append(v)
            self.inblossom[v] = b
        cdef int *bestedgeto = <int *> malloc(2 * n * sizeof(int))
        for i in range(2 * n):
            bestedgeto[i] = -1
        for bv in path:
            if self.blossombestedges[bv] is None:
                nblist = []
                for v in self.leaves(bv):
                    for i in range(n - 1):
                        nblist.append(self.neighbend[v * (n - 1) + i] // 2)
            else:
                nblist = self.blossombestedges[bv]
            for kk in nblist:
                i = self.ei[kk]
                j = self.ej[kk]
                if self.inblossom[j] == b:
                    j = i
                bj = self.inblossom[j]
                if (bj != b and self.label[bj] == 1
                        and (bestedgeto[bj] == -1
                             or self.slack(kk) < self.slack(bestedgeto[bj]))):
                    bestedgeto[bj] = kk
            self.blossombestedges[bv] = None
            self.bestedge[bv] = -1
        best = []
        for i in range(2 * n):
            if bestedgeto[i] != -1:
                best.append(bestedgeto[i])
        free(bestedgeto)
        self.blossombestedges[b] = best
        self.bestedge[b] = -1
        for kk in best:
            if self.bestedge[b] == -1 or self.slack(kk) < self.slack(self.bestedge[b]):
                self.bestedge[b] = kk

    cdef void expand_blossom(self, int b, bint endstage):
        cdef int n = self.n
        cdef int s, v, j, jstep, endptrick, p, bv, entrychild, reached
        for s in self.blossomchilds[b]:
            self.blossomparent[s] = -1
            if s < n:
                self.inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for v in self.leaves(s):
                    self.inblossom[v] = s
        if not endstage and self.label[b] == 2:
            childs = self.blossomchilds[b]
            endps = self.blossomendps[b]
            entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = self.labelend[b]
            while j != 0:
                self.label[self.endpoint[p ^ 1]] = 0
                self.label[self.endpoint[(<int> endps[j - endptrick]) ^ endptrick ^ 1]] = 0
                self.assign_label(self.endpoint[p ^ 1], 2, p)
                self.allowedge[(<int> endps[j - endptrick]) // 2] = 1
                j += jstep
                p = (<int> endps[j - endptrick]) ^ endptrick
                self.allowedge[p // 2] = 1
                j += jstep
            bv = childs[j]
            self.label[self.endpoint[p ^ 1]] = 2
            self.label[bv] = 2
            self.labelend[self.endpoint[p ^ 1]] = p
            self.labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                reached = -1
                for v in self.leaves(bv):
                    if self.label[v] != 0:
                        reached = v
                        break
                if reached != -1:
                    v = reached
                    self.label[v] = 0
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0
                    self.assign_label(v, 2, self.labelend[v])
                j += jstep
        self.label[b] = -1
        self.labelend[b] = -1
        self.blossomchilds[b] = None
        self.blossomendps[b] = None
        self.blossombase[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unusedblossoms.append(b)

    cdef void augment_blossom(self, int b, int v):
        cdef int n = self.n
        cdef int t = v
        cdef int i, j, jstep, endptrick, p
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= n:
            self.augment_blossom(t, v)
        childs = self.blossomchilds[b]
        endps = self.blossomendps[b]
        i = childs.index(t)
        j = i
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
            p = (<int> endps[j - endptrick]) ^ endptrick
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
        self.blossombase[b] = self.blossombase[<int> self.blossomchilds[b][0]]

    cdef void augment_matching(self, int k):
        cdef int n = self.n
        cdef int s, p, bs, t, bt, j, side
        for side in range(2):
            if side == 0:
                s = self.ei[k]
                p = 2 * k + 1
            else:
                s = self.ej[k]
                p = 2 * k
            while True:
                bs = self.inblossom[s]
                if bs >= n:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if self.labelend[bs] == -1:
                    break
                t = self.endpoint[self.labelend[bs]]
                bt = self.inblossom[t]
                s = self.endpoint[self.labelend[bt]]
                j = self.endpoint[self.labelend[bt] ^ 1]
                if bt >= n:
                    self.augment_blossom(bt, j)
                self.mate[j] = self.labelend[bt]
                p = self.labelend[bt] ^ 1

    def solve(self):
        cdef int n = self.n
        cdef int stage, i, v, p, k, w, b, base, lb
        cdef int deltatype, deltaedge, deltablossom
        cdef int64_t delta, d, kslack
        cdef bint augmented
        for stage in range(n):
            for i in range(2 * n):
                self.label[i] = 0
                self.bestedge[i] = -1
            for i in range(n, 2 * n):
                self.blossombestedges[i] = None
            for k in range(self.nedge):
                self.allowedge[k] = 0
            self.queue = []
            for v in range(n):
                if self.mate[v] == -1 and self.label[self.inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)
            augmented = False
            while True:
                while self.queue and not augmented:
                    v = self.queue.pop()
                    for i in range(n - 1):
                        p = self.neighbend[v * (n - 1) + i]
                        k = p // 2
                        w = self.endpoint[p]
                        if self.inblossom[v] == self.inblossom[w]:
                            continue
                        kslack = 0
                        if not self.allowedge[k]:
                            kslack = self.slack(k)
                            if kslack <= 0:
                                self.allowedge[k] = 1
                        if self.allowedge[k]:
                            if self.label[self.inblossom[w]] == 0:
                                self.assign_label(w, 2, p ^ 1)
                            elif self.label[self.inblossom[w]] == 1:
                                base = self.scan_blossom(v, w)
                                if base >= 0:
                                    self.add_blossom(base, k)
                                else:
                                    self.augment_matching(k)
                                    augmented = True
                                    break
                            elif self.label[w] == 0:
                                self.label[w] = 2
                                self.labelend[w] = p ^ 1
                        elif self.label[self.inblossom[w]] == 1:
                            b = self.inblossom[v]
                            if self.bestedge[b] == -1 or kslack < self.slack(self.bestedge[b]):
                                self.bestedge[b] = k
                        elif self.label[w] == 0:
                            if self.bestedge[w] == -1 or kslack < self.slack(self.bestedge[w]):
                                self.bestedge[w] = k
                if augmented:
                    break
                deltatype = 1
                delta = self.dualvar[0]
                for v in range(1, n):
                    if self.dualvar[v] < delta:
                        delta = self.dualvar[v]
                deltaedge = -1
                deltablossom = -1
                for v in range(n):
                    if self.label[self.inblossom[v]] == 0 and self.bestedge[v] != -1:
                        d = self.slack(self.bestedge[v])
                        if d < delta:
                            delta = d
                            deltatype = 2
                            deltaedge = self.bestedge[v]
                for b in range(2 * n):
                    if (self.blossomparent[b] == -1 and self.label[b] == 1
                            and self.bestedge[b] != -1):
                        d = self.slack(self.bestedge[b]) // 2
                        if d < delta:
                            delta = d
                            deltatype = 3
                            deltaedge = self.bestedge[b]
                for b in range(n, 2 * n):
                    if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                            and self.label[b] == 2 and self.dualvar[b] < delta):
                        delta = self.dualvar[b]
                        deltatype = 4
                        deltablossom = b
                for v in range(n):
                    lb = self.label[self.inblossom[v]]
                    if lb == 1:
                        self.dualvar[v] -= delta
                    elif lb == 2:
                        self.dualvar[v] += delta
                for b in range(n, 2 * n):
                    if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                        if self.label[b] == 1:
                            self.dualvar[b] += delta
                        elif self.label[b] == 2:
                            self.dualvar[b] -= delta
                if deltatype == 1:
                    break
                elif deltatype == 2:
                    self.allowedge[deltaedge] = 1
                    i = self.ei[deltaedge]
                    if self.label[self.inblossom[i]] == 0:
                        i = self.ej[deltaedge]
                    self.queue.append(i)
                elif deltatype == 3:
                    self.allowedge[deltaedge] = 1
                    self.queue.append(self.ei[deltaedge])
                else:
                    self.expand_blossom(deltablossom, False)
            if not augmented:
                break
            for b in range(n, 2 * n):
                if (self.blossomparent[b] == -1 and self.blossombase[b] >= 0
                        and self.label[b] == 1 and self.dualvar[b] == 0):
                    self.expand_blossom(b, True)
        mate = [self.endpoint[self.mate[v]] if self.mate[v] >= 0 else -1
                for v in range(n)]
        dual = [self.dualvar[i] for i in range(2 * n)]
        parent = [self.blossomparent[i] for i in range(2 * n)]
        return mate, dual, parent


def max_weight_matching(weights):
    if len(weights) == 0:
        return [], [], []
    return _DenseMatcher(weights).solve()


cdef inline void _residual(double a, double b, double g, double r, double x,
                           double y, double mi, double mj,
                           double *f1, double *f2):
    f1[0] = a + b * x + g * y + r * x * y - mi
    f2[0] = a + b * y + g * x + r * x * y - mj


cdef tuple _newton(double a, double b, double g, double r, double mi,
                   double mj, double tol, int max_iter):
    cdef double x = min(max(mi, 0.0), 1.0)
    cdef double y = min(max(mj, 0.0), 1.0)
    cdef double f1, f2, g1 = 0.0, g2 = 0.0, norm, nnorm = 0.0
    cdef double j11, j12, j21, j22, det, dx, dy, step, nx = 0.0, ny = 0.0
    cdef int it
    cdef bint improved
    _residual(a, b, g, r, x, y, mi, mj, &f1, &f2)
    norm = max(fabs(f1), fabs(f2))
    for it in range(max_iter):
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
        improved = False
        while step > 1e-6:
            nx = x - step * dx
            ny = y - step * dy
            _residual(a, b, g, r, nx, ny, mi, mj, &g1, &g2)
            nnorm = max(fabs(g1), fabs(g2))
            if nnorm < norm:
                improved = True
                break
            step *= 0.5
        if not improved:
            return x, y, False
        x = nx
        y = ny
        f1 = g1
        f2 = g2
        norm = nnorm
    return x, y, norm < tol


cdef inline double _box_distance(double x, double y):
    return (max(0.0, -x) + max(0.0, x - 1.0)
            + max(0.0, -y) + max(0.0, y - 1.0))


def invert_category(double a, double b, double g, double r, double mi,
                    double mj, double tol=1e-9, int max_iter=100):
    cdef double d, qa, qb, qc, disc, q, x, y
    cdef double roots[2]
    cdef int nroots = 0, i
    cdef double best_x = 0.0, key0, key1, best0 = 0.0, best1 = 0.0
    cdef bint have = False
    if g == 0.0 and r == 0.0:
        if b == 0.0:
            return mi, mj, False
        return (mi - a) / b, (mj - a) / b, True
    if b != g:
        d = (mi - mj) / (b - g)
        qa = r
        qb = b + g - r * d
        qc = a - g * d - mi
        if qa == 0.0:
            if qb != 0.0:
                roots[0] = -qc / qb
                nroots = 1
        else:
            disc = qb * qb - 4.0 * qa * qc
            if disc >= 0.0:
                q = -0.5 * (qb + copysign(sqrt(disc), qb))
                if q != 0.0:
                    roots[0] = q / qa
                    roots[1] = qc / q
                    nroots = 2
                else:
                    roots[0] = -qb / (2.0 * qa)
                    nroots = 1
        for i in range(nroots):
            x = roots[i]
            y = x - d
            key0 = _box_distance(x, y)
            key1 = fabs(x - mi) + fabs(y - mj)
            if (not have or key0 < best0 or (key0 == best0 and key1 < best1)):
                have = True
                best0 = key0
                best1 = key1
                best_x = x
        if have:
            return best_x, best_x - d, True
    return _newton(a, b, g, r, mi, mj, tol, max_iter)


def slowdown_matrix(double alpha, double beta, double gamma, double rho,
                    dispatch, double cap, bint clamp):
    cdef int n = len(dispatch)
    cdef int i, j
    cdef double x, y, m, s
    cdef double *vals = <double *> malloc(max(n, 1) * sizeof(double))
    for i in range(n):
        vals[i] = dispatch[i]
    out = []
    for i in range(n):
        x = vals[i]
        row = [0.0] * n
        for j in range(n):
            if i == j:
                continue
            y = vals[j]
            m = alpha + beta * x + gamma * y + rho * x * y
            if clamp:
                m = min(max(m, 0.0), 1.0)
            if m <= 0.0:
                s = cap
            else:
                s = min(x / m, cap)
            row[j] = s
        out.append(row)
    free(vals)
    return out


def stack_slowdown_matrix(coefficients, stacks, double cap, bint clamp):
    cdef int n = len(stacks)
    cdef int k = len(coefficients)
    cdef int i, j, c
    cdef double m, total, disp, s, x, y
    cdef double *coef = <double *> malloc(max(4 * k, 1) * sizeof(double))
    cdef double *vals = <double *> malloc(max(n * k, 1) * sizeof(double))
    for c in range(k):
        row = coefficients[c]
        for j in range(4):
            coef[4 * c + j] = row[j]
    for i in range(n):
        row = stacks[i]
        for c in range(k):
            vals[i * k + c] = row[c]
    out = []
    for i in range(n):
        orow = [0.0] * n
        for j in range(n):
            if i == j:
                continue
            total = 0.0
            disp = 0.0
            for c in range(k):
                x = vals[i * k + c]
                y = vals[j * k + c]
                m = coef[4 * c] + coef[4 * c + 1] * x + coef[4 * c + 2] * y + coef[4 * c + 3] * x * y
                if clamp:
                    m = min(max(m, 0.0), 1.0)
                if c == 0:
                    disp = m
                total += m
            if disp <= 0.0 or total <= 0.0:
                s = cap
            else:
                s = min(vals[i * k] * total / disp, cap)
            orow[j] = s
        out.append(orow)
    free(coef)
    free(vals)
    return out
