"""Generate the bundled Riemann-matrix fixtures.

Usage: python3 make_fixtures.py OUTDIR
"""
import itertools, json, os, random, sys
import mpmath as mp
import sympy as sp
from periods import PlaneCurve, Periods, riemann_matrix
from lll import lll

x, y = sp.symbols("x y")


def cmat(M, g):
    return {"re": [[float(mp.re(M[i, j])) for j in range(g)] for i in range(g)],
            "im": [[float(mp.im(M[i, j])) for j in range(g)] for i in range(g)]}


def sample_points(f, diffs, Pa, g, n, seed):
    rng = random.Random(seed)
    Pinv = mp.inverse(Pa)
    fpoly = sp.Poly(f, y)
    pts = []
    while len(pts) < n:
        xv = mp.mpc(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        coeffs = [sp.lambdify(x, c, "mpmath")(xv) for c in fpoly.all_coeffs()]
        roots = mp.polyroots(coeffs, maxsteps=200, extraprec=100)
        yv = roots[rng.randrange(len(roots))]
        ut = mp.matrix([sp.lambdify((x, y), h, "mpmath")(xv, yv) for h in diffs])
        u = Pinv * ut
        nrm = mp.sqrt(sum(abs(u[i]) ** 2 for i in range(g)))
        u = u / nrm
        pts.append({"re": [float(mp.re(u[i])) for i in range(g)],
                    "im": [float(mp.im(u[i])) for i in range(g)]})
    return pts


def build(label, f, diffs, x0=None, npts=0):
    c = PlaneCurve(f, x, y, diffs, x0=x0)
    P = Periods(c, tol=mp.mpf(10) ** -28, verbose=True)
    Pa, Pb = P.period_matrices()
    tau = riemann_matrix(Pa, Pb)
    g = c.g
    asym = mp.mnorm(tau - tau.T, 1)
    eig = mp.eigsy(mp.matrix([[mp.im(tau[i, j]) for j in range(g)] for i in range(g)]))[0]
    print(label, "asym", asym, "min Im eig", min(eig))
    assert asym < mp.mpf(10) ** -20 and min(eig) > 0
    tau = (tau + tau.T) / 2
    out = {"label": label, "genus": g}
    t = cmat(tau, g)
    out["re"], out["im"] = t["re"], t["im"]
    out["pi_a"] = cmat(Pa, g)
    out["pi_b"] = cmat(Pb, g)
    if npts:
        out["sample_points"] = sample_points(f, diffs, Pa, g, npts, 7)
    return out


TROTT_TAU = """1.06848368471179 + 0.723452867814272i & -0.305886633614305 + 0.123618182281837i & -0.160517941389541 - 0.206682546926085i
-0.305886633614305 + 0.123618182281837i & 0.776859918461210 + 1.25292663517205i & -0.626922516393387 - 0.289746911570334i
-0.160517941389541 - 0.206682546926085i & -0.626922516393387 - 0.289746911570334i & 0.376235735801471 + 0.484440302728207i"""


def reference_trott_tau():
    tp = mp.matrix(3, 3)
    for i, line in enumerate(TROTT_TAU.splitlines()):
        for j, ent in enumerate(line.split("&")):
            tp[i, j] = mp.mpmathify(ent.replace(" ", "").replace("i", "j"))
    return tp


def symplectic_match(Pa, Pb, tp, g):
    """Find M in Sp(2g, Z) with [Pa Pb] M = Pa' [I tp]; return (Pa', Pb')."""
    Om = mp.matrix(g, 2 * g)
    for i in range(g):
        for j in range(g):
            Om[i, j] = Pa[i, j]
            Om[i, g + j] = Pb[i, j]
    Xm = mp.matrix(2 * g, g)
    for i in range(g):
        for j in range(g):
            Xm[i, j] = tp[i, j]
            Xm[g + i, j] = -1 if i == j else 0
    W = mp.mpf(10) ** 9
    n = 4 * g * g
    rows = []
    for k in range(n):
        M = mp.matrix(2 * g, 2 * g)
        M[k // (2 * g), k % (2 * g)] = 1
        L = Om * M * Xm
        vals = []
        for i in range(g):
            for j in range(g):
                vals += [mp.re(L[i, j]), mp.im(L[i, j])]
        rows.append([1 if t == k else 0 for t in range(n)] + [int(mp.nint(W * v)) for v in vals])
    sols = [r[:n] for r in lll(rows) if max(abs(v) for v in r[n:]) < 1000]
    J = sp.Matrix(sp.BlockMatrix([[sp.zeros(g), sp.eye(g)], [-sp.eye(g), sp.zeros(g)]]))
    for cs in itertools.product(range(-3, 4), repeat=len(sols)):
        v = [sum(c * s[t] for c, s in zip(cs, sols)) for t in range(n)]
        if not any(v):
            continue
        M = sp.Matrix(2 * g, 2 * g, v)
        if M.T * J * M == J:
            Mm = mp.matrix([[int(M[i, j]) for j in range(2 * g)] for i in range(2 * g)])
            Pn = Om * Mm
            Pan, Pbn = Pn[:, 0:g], Pn[:, g:2 * g]
            err = mp.mnorm(mp.inverse(Pan) * Pbn - tp, 1)
            print("symplectic match, tau error", err)
            assert err < 1e-12
            return Pan, Pbn
    raise RuntimeError("no symplectic match")


def build_trott():
    f = 144 * (x**4 + y**4) - 225 * (x**2 + y**2) + 350 * x**2 * y**2 + 81
    diffs = [sp.Integer(1), x, y]
    c = PlaneCurve(f, x, y, diffs)
    P = Periods(c, tol=mp.mpf(10) ** -28, verbose=False)
    Pa, Pb = P.period_matrices()
    tp = reference_trott_tau()
    Pa, Pb = symplectic_match(Pa, Pb, tp, 3)
    out = {"label": "genus 3: Trott curve 144(x^4+y^4) - 225(x^2+y^2) + 350x^2y^2 + 81", "genus": 3}
    t = cmat(tp, 3)
    out["re"], out["im"] = t["re"], t["im"]
    out["pi_a"] = cmat(Pa, 3)
    out["pi_b"] = cmat(Pb, 3)
    out["sample_points"] = sample_points(f, diffs, Pa, 3, 20, 3)
    return out


def main(outdir):
    os.makedirs(outdir, exist_ok=True)
    tr = build_trott()
    json.dump(tr, open(os.path.join(outdir, "trott_tau.json"), "w"), indent=1)
    g4 = build("genus 4: 1 - x^3 - y^3 - x^3 y^3",
               1 - x**3 - y**3 - x**3 * y**3,
               [sp.Integer(-1), -x, -y, -x * y], npts=50)
    json.dump(g4, open(os.path.join(outdir, "genus4_tau.json"), "w"), indent=1)
    g5 = build("genus 5: x^2 y^4 + x^4 + x + 3",
               x**2 * y**4 + x**4 + x + 3,
               [sp.Integer(1), x, x * y, x * y**2, x**2], x0=1, npts=50)
    json.dump(g5, open(os.path.join(outdir, "genus5_tau.json"), "w"), indent=1)


if __name__ == "__main__":
    main(sys.argv[1])
