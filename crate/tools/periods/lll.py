"""Textbook LLL on integer row vectors (exact basis, float Gram-Schmidt)."""
import numpy as np


def gso(B):
    Bf = np.array([[float(v) for v in row] for row in B])
    n = len(B)
    mu = np.zeros((n, n))
    bstar = np.zeros_like(Bf)
    nrm = np.zeros(n)
    for i in range(n):
        v = Bf[i].copy()
        for j in range(i):
            mu[i, j] = Bf[i] @ bstar[j] / nrm[j]
            v -= mu[i, j] * bstar[j]
        bstar[i] = v
        nrm[i] = v @ v
    return mu, nrm


def lll(B, delta=0.99):
    B = [list(r) for r in B]
    n = len(B)
    mu, nrm = gso(B)
    k = 1
    it = 0
    while k < n:
        it += 1
        for j in range(k - 1, -1, -1):
            q = int(round(mu[k, j]))
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                mu, nrm = gso(B)
        if nrm[k] >= (delta - mu[k, k - 1] ** 2) * nrm[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            mu, nrm = gso(B)
            k = max(k - 1, 1)
    return B
