"""Period matrices of plane algebraic curves.

Given an affine plane curve f(x, y) = 0 (degree m in y) and a list of
holomorphic differentials h_i(x, y) dx / f_y, compute the a- and b-periods
over a symplectic homology basis.

Method: pick a spanning tree T of the finite branch points with straight
edges.  P^1 minus T is a disk without branch points, so the curve is a CW
complex whose 1-cells are the m lifts of each tree edge.  H_1 is the integer
kernel of the boundary map modulo the (period-free) image of the 2-cells.
Intersection numbers of cycles built from edge lifts are computed from the
cyclic order of the lifted rays at every ramification point.

All arithmetic on roots and integrals is done with mpmath.
"""

import functools
import math
from fractions import Fraction

import mpmath as mp
import sympy as sp

mp.mp.dps = 40

X, Y = sp.symbols("X Y")


class PlaneCurve:
    def __init__(self, f, x, y, diffs, x0=None):
        """f: sympy polynomial in x, y. diffs: numerators h_i.

        If x0 is given, the integration plane coordinate X is x = x0 + 1/X,
        which moves x = infinity to X = 0.
        """
        fy = sp.diff(f, y)
        if x0 is None:
            xsub = X
            dxdX = sp.Integer(1)
        else:
            xsub = sp.Rational(x0) + 1 / X
            dxdX = -1 / X**2
        F = sp.together(f.subs({x: xsub, y: Y}))
        F = sp.numer(F)
        self.F = sp.Poly(sp.expand(F), Y)
        self.m = self.F.degree()
        self.ycoeffs = [sp.lambdify(X, c, "mpmath") for c in self.F.all_coeffs()]
        self.g = len(diffs)
        self.integrands = [
            sp.lambdify(
                (X, Y),
                sp.together(h.subs({x: xsub, y: Y}) / fy.subs({x: xsub, y: Y}) * dxdX),
                "mpmath",
            )
            for h in diffs
        ]
        disc = sp.discriminant(self.F.as_expr(), Y) * self.F.LC()
        disc = sp.Poly(sp.sqf_part(sp.Poly(disc, X)), X)
        roots = disc.nroots(n=45, maxsteps=500)
        self.branch = [mp.mpc(complex(r.evalf(45)).real, complex(r.evalf(45)).imag) for r in roots]
        # polish in full precision
        dpoly = [mp.mpf(int(c.p)) / mp.mpf(int(c.q)) for c in (sp.Rational(c) for c in disc.all_coeffs())]
        polished = []
        for r in self.branch:
            polished.append(mp.findroot(lambda t: mp.polyval(dpoly, t), r))
        self.branch = polished

    def yroots(self, xv):
        cs = [mp.mpc(c(xv)) for c in self.ycoeffs]
        return mp.polyroots(cs, maxsteps=400, extraprec=200)

    def integrand(self, xv, yv):
        return [fn(xv, yv) for fn in self.integrands]


def min_sep(rs):
    best = mp.inf
    for i in range(len(rs)):
        for j in range(i + 1, len(rs)):
            best = min(best, abs(rs[i] - rs[j]))
    return best


def match(old, new):
    """Return permutation p with new[p[i]] continuing old[i], or None."""
    sep = min_sep(old)
    perm = []
    for o in old:
        d = [abs(o - n) for n in new]
        j = min(range(len(new)), key=lambda k: d[k])
        if d[j] > 0.3 * sep:
            return None
        perm.append(j)
    if len(set(perm)) != len(perm):
        return None
    return perm


class Tracker:
    """Analytic continuation of the y-roots along a path x = path(t)."""

    def __init__(self, curve, path, t0):
        self.curve = curve
        self.path = path
        self.cache = {t0: curve.yroots(path(t0))}

    def _step(self, t1, r1, t2, depth=0):
        r2 = self.curve.yroots(self.path(t2))
        p = match(r1, r2)
        if p is not None:
            return [r2[k] for k in p]
        if depth > 60:
            raise RuntimeError("continuation failed")
        tm = (t1 + t2) / 2
        rm = self._step(t1, r1, tm, depth + 1)
        return self._step(tm, rm, t2, depth + 1)

    def at(self, t):
        if t in self.cache:
            return self.cache[t]
        t1 = min(self.cache, key=lambda s: abs(s - t))
        r = self._step(t1, self.cache[t1], t)
        self.cache[t] = r
        return r


@functools.lru_cache(maxsize=None)
def gauss_nodes(n):
    def leg(t):
        p0, p1 = mp.mpf(1), t
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * t * p1 - (k - 1) * p0) / k
        dp = n * (t * p1 - p0) / (t * t - 1)
        return p1, dp
    xs, ws = [], []
    for k in range(1, n + 1):
        t = mp.cos(mp.pi * (k - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
        for _ in range(100):
            p, dp = leg(t)
            dt = p / dp
            t -= dt
            if abs(dt) < mp.mpf(10) ** (-mp.mp.dps + 2):
                break
        p, dp = leg(t)
        xs.append(t)
        ws.append(2 / ((1 - t**2) * dp**2))
    return xs, ws


def gauss_panel(fn, lo, hi, n):
    xs, ws = gauss_nodes(n)
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    acc = None
    for xk, wk in zip(xs, ws):
        v = fn(mid + half * xk)
        v = [wk * half * c for c in v]
        acc = v if acc is None else [a + b for a, b in zip(acc, v)]
    return acc


def adaptive(fn, lo, hi, tol, n=24, depth=0):
    a = gauss_panel(fn, lo, hi, n)
    b = gauss_panel(fn, lo, hi, n + 12)
    err = max(abs(u - v) for u, v in zip(a, b))
    if err < tol or depth > 30:
        return b
    m = (lo + hi) / 2
    left = adaptive(fn, lo, m, tol, n, depth + 1)
    right = adaptive(fn, m, hi, tol, n, depth + 1)
    return [u + v for u, v in zip(left, right)]


def prim_mst(pts):
    n = len(pts)
    inside = {0}
    edges = []
    while len(inside) < n:
        best = None
        for i in inside:
            for j in range(n):
                if j in inside:
                    continue
                d = abs(pts[i] - pts[j])
                if best is None or d < best[0]:
                    best = (d, i, j)
        edges.append((best[1], best[2]))
        inside.add(best[2])
    return edges


def cycles_of(perm):
    seen, out = set(), []
    for s in range(len(perm)):
        if s in seen:
            continue
        c = [s]
        seen.add(s)
        t = perm[s]
        while t != s:
            c.append(t)
            seen.add(t)
            t = perm[t]
        out.append(c)
    return out


def lcm(a, b):
    return a * b // math.gcd(a, b)


class Periods:
    def __init__(self, curve, tol=mp.mpf(10) ** -30, verbose=True):
        self.c = curve
        self.tol = tol
        self.verbose = verbose
        B = curve.branch
        self.B = B
        nb = len(B)
        m = curve.m
        self.edges = prim_mst(B)
        self.mids = [(B[a] + B[b]) / 2 for a, b in self.edges]
        self.mid_roots = [curve.yroots(p) for p in self.mids]
        self.check_infinity()
        # incident edges per vertex
        self.inc = {v: [] for v in range(nb)}
        for ei, (a, b) in enumerate(self.edges):
            self.inc[a].append(ei)
            self.inc[b].append(ei)
        self.rho = {}
        for v in range(nb):
            d = min(abs(B[v] - B[w]) for w in range(nb) if w != v)
            self.rho[v] = d * mp.mpf("0.4")
        self.local = {}
        for v in range(nb):
            if self.inc[v]:
                self.local[v] = self.vertex_structure(v)
        self.compute_half_integrals()

    def log(self, *a):
        if self.verbose:
            print(*a, flush=True)

    def check_infinity(self):
        Rbig = 2 * max(abs(b) for b in self.B) + 1
        tr = Tracker(self.c, lambda t: Rbig * mp.expj(2 * mp.pi * t), mp.mpf(0))
        start = tr.at(mp.mpf(0))
        pts = [mp.mpf(k) / 64 for k in range(1, 65)]
        for t in pts:
            end = tr.at(t)
        perm = match(start, end)
        assert perm == list(range(self.c.m)), f"infinity is a branch point: {perm}"

    def half_edge_path(self, ei, v, R):
        a = self.B[v]
        p = self.mids[ei]
        return lambda s: a + (p - a) * s**R

    def vertex_structure(self, v):
        """Local monodromy and ray angles at vertex v."""
        a = self.B[v]
        rho = self.rho[v]
        inc = self.inc[v]
        ang = {}
        for ei in inc:
            p = self.mids[ei]
            ang[ei] = mp.arg(p - a)
        e0 = inc[0]
        delta = {ei: (ang[ei] - ang[e0]) % (2 * mp.pi) for ei in inc}
        circ = lambda t: a + rho * mp.expj(ang[e0] + t)
        tr = Tracker(self.c, circ, mp.mpf(0))
        start = tr.at(mp.mpf(0))
        # sample circle densely then read off positions at each edge angle
        n = 96
        for k in range(1, n + 1):
            tr.at(2 * mp.pi * k / n)
        at_edge = {}
        for ei in inc:
            at_edge[ei] = tr.at(delta[ei])
        end = tr.at(2 * mp.pi)
        # end[i] is root i continued once around; sigma(i) = index of end[i] in start
        sigma = match(end, start)
        assert sigma is not None
        # edge labels -> circle index at the edge angle.  Edge labels come from
        # continuing the midpoint roots along the (linear) half-edge to distance rho.
        label_to_circ = {}
        for ei in inc:
            p = self.mids[ei]
            lin = lambda s, p=p: a + (p - a) * s
            tre = Tracker(self.c, lin, mp.mpf(1))
            tre.cache[mp.mpf(1)] = self.mid_roots[ei]
            srho = rho / abs(p - a)
            roots_e = tre.at(srho)
            perm = match(roots_e, at_edge[ei])
            assert perm is not None
            label_to_circ[ei] = perm
        cyc = cycles_of(sigma)
        pos = {}
        for ci, c in enumerate(cyc):
            for k, s in enumerate(c):
                pos[s] = (ci, k, len(c))
        R = 1
        for c in cyc:
            R = lcm(R, len(c))
        self.log(f"vertex {v}: cycles {[len(c) for c in cyc]}")
        return dict(sigma=sigma, cycles=cyc, pos=pos, delta=delta,
                    label_to_circ=label_to_circ, R=R)

    def point_of(self, v, ei, s):
        loc = self.local[v]
        c = loc["label_to_circ"][ei][s]
        return (v, loc["pos"][c][0])

    def ray_key(self, v, ei, s):
        loc = self.local[v]
        c = loc["label_to_circ"][ei][s]
        ci, k, r = loc["pos"][c]
        return (loc["delta"][ei] + 2 * mp.pi * k) / r

    def compute_half_integrals(self):
        """J[(ei, v)][s] = vector of integrals from the midpoint to vertex v on sheet s."""
        self.J = {}
        g, m = self.c.g, self.c.m
        for ei, (a, b) in enumerate(self.edges):
            for v in (a, b):
                R = self.local[v]["R"]
                path = self.half_edge_path(ei, v, R)
                tr = Tracker(self.c, path, mp.mpf(1))
                tr.cache[mp.mpf(1)] = self.mid_roots[ei]
                av = self.B[v]
                p = self.mids[ei]

                def fn(s, tr=tr, R=R, av=av, p=p):
                    xs = av + (p - av) * s**R
                    dx = (p - av) * R * s ** (R - 1)
                    rs = tr.at(s)
                    out = []
                    for yv in rs:
                        out.extend(w * dx for w in self.c.integrand(xs, yv))
                    return out

                # integrate from s=1 (midpoint) to s=0 (vertex)
                vals = adaptive(fn, mp.mpf(1), mp.mpf(0), self.tol)
                self.J[(ei, v)] = [vals[s * g:(s + 1) * g] for s in range(m)]
                self.log(f"edge {ei} half {v}: {len(tr.cache)} evaluations")

    # --- topology ---
    def boundary_matrix(self):
        m = self.c.m
        points = sorted({self.point_of(v, ei, s)
                         for ei, (a, b) in enumerate(self.edges)
                         for v in (a, b) for s in range(m)})
        idx = {p: i for i, p in enumerate(points)}
        cols = []
        for ei, (a, b) in enumerate(self.edges):
            for s in range(m):
                col = [0] * len(points)
                col[idx[self.point_of(b, ei, s)]] += 1
                col[idx[self.point_of(a, ei, s)]] -= 1
                cols.append(col)
        D = [[cols[j][i] for j in range(len(cols))] for i in range(len(points))]
        return D

    def lift_index(self, ei, s):
        return ei * self.c.m + s

    def intersection(self, alpha, beta):
        m = self.c.m
        total = 0
        for v, loc in self.local.items():
            # group rays by ramification point
            rays = {}
            for ei in self.inc[v]:
                a, b = self.edges[ei]
                sign = 1 if v == a else -1
                for s in range(m):
                    pt = self.point_of(v, ei, s)
                    j = self.lift_index(ei, s)
                    rays.setdefault(pt, []).append(
                        (self.ray_key(v, ei, s), sign * alpha[j], sign * beta[j]))
            for pt, lst in rays.items():
                lst.sort(key=lambda r: r[0])
                acc = 0
                for _, aa, bb in lst:
                    acc += aa
                    total += bb * acc
        for j in range(len(alpha)):
            total -= alpha[j] * beta[j]
        return total

    def period(self, chain):
        g, m = self.c.g, self.c.m
        out = [mp.mpc(0)] * g
        for ei, (a, b) in enumerate(self.edges):
            for s in range(m):
                n = chain[self.lift_index(ei, s)]
                if n == 0:
                    continue
                for i in range(g):
                    out[i] += n * (self.J[(ei, b)][s][i] - self.J[(ei, a)][s][i])
        return out

    def symplectic_basis(self):
        D = self.boundary_matrix()
        ker = integer_kernel(D)
        self.log(f"kernel rank {len(ker)}")
        N = len(ker)
        K = [[self.intersection(ker[i], ker[j]) for j in range(N)] for i in range(N)]
        for i in range(N):
            for j in range(N):
                assert K[i][j] == -K[j][i]
        # radical and complement
        U, r = column_reduce(K)
        rad = [[U[i][c] for i in range(N)] for c in range(r, N)]
        comp = [[U[i][c] for i in range(N)] for c in range(r)]
        for v in rad:
            ch = combo(v, ker)
            per = self.period(ch)
            assert max(abs(z) for z in per) < mp.mpf(10) ** -20, "radical cycle with nonzero period"
        Kc = [[sum(comp[i][p] * K[p][q] * comp[j][q] for p in range(N) for q in range(N))
               for j in range(len(comp))] for i in range(len(comp))]
        dt = sp.Matrix(Kc).det()
        assert abs(dt) == 1, f"intersection form not unimodular: det {dt}"
        T = symplectic_reduce(Kc)
        n2 = len(Kc)
        g = n2 // 2
        assert g == self.c.g, f"genus mismatch {g} vs {self.c.g}"
        cyc = []
        for c in range(n2):
            coeffs = [sum(T[i][c] * comp[i][p] for i in range(n2)) for p in range(N)]
            cyc.append(combo(coeffs, ker))
        a_cycles = [cyc[2 * i] for i in range(g)]
        b_cycles = [cyc[2 * i + 1] for i in range(g)]
        for i in range(g):
            for j in range(g):
                assert self.intersection(a_cycles[i], b_cycles[j]) == (1 if i == j else 0)
                assert self.intersection(a_cycles[i], a_cycles[j]) == 0
                assert self.intersection(b_cycles[i], b_cycles[j]) == 0
        return a_cycles, b_cycles

    def period_matrices(self):
        a, b = self.symplectic_basis()
        g = self.c.g
        pa = [self.period(c) for c in a]
        pb = [self.period(c) for c in b]
        # Pi_a[i][j] = int_{a_j} omega_i
        Pa = mp.matrix(g, g)
        Pb = mp.matrix(g, g)
        for i in range(g):
            for j in range(g):
                Pa[i, j] = pa[j][i]
                Pb[i, j] = pb[j][i]
        return Pa, Pb


def combo(coeffs, vecs):
    n = len(vecs[0])
    out = [0] * n
    for c, v in zip(coeffs, vecs):
        if c:
            for k in range(n):
                out[k] += c * v[k]
    return out


def column_reduce(A):
    """Unimodular U with A*U = [H | 0]; returns (U, rank)."""
    rows = len(A)
    n = len(A[0])
    M = [row[:] for row in A]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def colop(dst, src, q):  # col dst -= q*col src
        for i in range(rows):
            M[i][dst] -= q * M[i][src]
        for i in range(n):
            U[i][dst] -= q * U[i][src]

    def swap(c1, c2):
        for i in range(rows):
            M[i][c1], M[i][c2] = M[i][c2], M[i][c1]
        for i in range(n):
            U[i][c1], U[i][c2] = U[i][c2], U[i][c1]

    piv = 0
    for r in range(rows):
        if piv >= n:
            break
        while True:
            nz = [c for c in range(piv, n) if M[r][c] != 0]
            if not nz:
                break
            c = min(nz, key=lambda c: abs(M[r][c]))
            swap(piv, c)
            done = True
            for c2 in range(piv + 1, n):
                if M[r][c2] != 0:
                    colop(c2, piv, M[r][c2] // M[r][piv])
                    if M[r][c2] != 0:
                        done = False
            if done:
                break
        if any(M[r][c] != 0 for c in range(piv, n)):
            piv += 1
    return U, piv


def integer_kernel(A):
    U, r = column_reduce(A)
    n = len(A[0])
    return [[U[i][c] for i in range(n)] for c in range(r, n)]


def symplectic_reduce(K):
    """Unimodular T with T^t K T = diag([[0,1],[-1,0]], ...)."""
    n = len(K)
    A = [row[:] for row in K]
    T = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def add(dst, src, q):  # basis_dst += q * basis_src (congruence)
        for i in range(n):
            A[i][dst] += q * A[i][src]
        for i in range(n):
            A[dst][i] += q * A[src][i]
        for i in range(n):
            T[i][dst] += q * T[i][src]

    def swap(c1, c2):
        if c1 == c2:
            return
        for i in range(n):
            A[i][c1], A[i][c2] = A[i][c2], A[i][c1]
        A[c1], A[c2] = A[c2], A[c1]
        for i in range(n):
            T[i][c1], T[i][c2] = T[i][c2], T[i][c1]

    for j in range(0, n, 2):
        while True:
            cand = [(abs(A[p][q]), p, q) for p in range(j, n) for q in range(j, n) if A[p][q] != 0]
            _, p, q = min(cand)
            swap(j, p)
            if q == j:
                q = p
            swap(j + 1, q)
            if A[j][j + 1] < 0:
                swap(j, j + 1)
            clean = True
            for c in range(j + 2, n):
                if A[j][c] != 0:
                    add(c, j + 1, -(A[j][c] // A[j][j + 1]))
                    if A[j][c] != 0:
                        clean = False
                if A[j + 1][c] != 0:
                    add(c, j, -(A[j + 1][c] // A[j + 1][j]))
                    if A[j + 1][c] != 0:
                        clean = False
            if clean:
                break
        assert A[j][j + 1] == 1, f"pivot {A[j][j+1]}"
    return T


def riemann_matrix(Pa, Pb):
    return mp.inverse(Pa) * Pb
