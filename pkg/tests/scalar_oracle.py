"""Independent scalar (d = 1) reference for every reported quantity.

Plain float formulas over explicit interval lists and Haar matrices; no
code is shared with the package. Generalized eigenproblems are reduced
with a Cholesky factor and solved with ``numpy.linalg.eigvalsh``.
"""
import math

import numpy as np


def nodes(levels):
    """(j, k) for every interval with level < levels, heap order."""
    return [(j, k) for j in range(levels) for k in range(2 ** j)]


def block(vals, j, k):
    n = len(vals)
    span = n // 2 ** j
    return vals[k * span:(k + 1) * span]


def avg(vals, j, k):
    b = block(vals, j, k)
    return sum(b) / len(b)


def depth_of(vals):
    return int(round(math.log2(len(vals))))


def haar_matrix(levels, depth):
    """Rows are h_I sampled on the 2^depth leaves."""
    n = 2 ** depth
    rows = []
    for j, k in nodes(levels):
        h = np.zeros(n)
        span = n // 2 ** j
        amp = 2 ** (j / 2)
        h[k * span:k * span + span // 2] = -amp
        h[k * span + span // 2:(k + 1) * span] = amp
        rows.append(h)
    return np.array(rows)


def pencil_max(a, b):
    """Largest λ with a x = λ b x, b positive definite."""
    low = np.linalg.cholesky(b)
    li = np.linalg.inv(low)
    return float(np.linalg.eigvalsh(li @ a @ li.T)[-1])


def a2(w):
    n = depth_of(w)
    inv = [1.0 / x for x in w]
    return max(avg(w, j, k) * avg(inv, j, k) for j in range(n + 1) for k in range(2 ** j))


def log_floor(x):
    return max(1.0, math.log(x))


def coefficient_form(w, levels=None):
    """Gram matrix of h_I in L^2(w) on the first `levels` levels."""
    n = depth_of(w)
    levels = n if levels is None else levels
    h = haar_matrix(levels, n)
    return (h * np.array(w)) @ h.T / len(w)


def square_constants(w):
    n = depth_of(w)
    d = np.diag([avg(w, j, k) for j, k in nodes(n)])
    m = coefficient_form(w)
    return pencil_max(d, m), pencil_max(m, d)


def refine(w):
    return [x for x in w for _ in range(2)]


def shift_norm(w):
    n = depth_of(w)
    size = 2 ** n - 1
    s = np.zeros((2 ** (n + 1) - 1, size))
    for i in range(size):
        s[2 * i + 1, i] = 1 / math.sqrt(2)
        s[2 * i + 2, i] = -1 / math.sqrt(2)
    m_fine = coefficient_form(refine(w))
    return math.sqrt(pencil_max(s.T @ m_fine @ s, coefficient_form(w)))


def multiplier_norm(w, sigma):
    m = coefficient_form(w)
    s = np.diag(sigma)
    return math.sqrt(pencil_max(s @ m @ s, m))


def sigma_norm(sigma):
    return max(abs(x) for x in sigma)


def tv_embedding(w, f):
    n = depth_of(w)
    g = [math.sqrt(a) * b for a, b in zip(w, f)]
    lhs = 0.0
    for j, k in nodes(n):
        m = avg(w, j, k)
        jump = (avg(w, j + 1, 2 * k) - avg(w, j + 1, 2 * k + 1)) / m
        lhs += 2.0 ** -j * jump ** 2 * avg(g, j, k) ** 2 / m
    a = a2(w)
    return lhs, lhs / (a * log_floor(a) * sum(x * x for x in f) / len(f))


def weight_haar(w, j, k):
    return 0.5 * 2 ** (-j / 2) * (avg(w, j + 1, 2 * k + 1) - avg(w, j + 1, 2 * k))


def testing_ratio(w):
    n = depth_of(w)
    best = 0.0
    for jj, kk in nodes(n):
        total = 0.0
        for j, k in nodes(n):
            if j >= jj and k >> (j - jj) == kk:
                total += weight_haar(w, j, k) ** 2 / avg(w, j, k)
        best = max(best, total * 2 ** jj / avg(w, jj, kk))
    return best / a2(w) ** 2


def haar_coeffs(f):
    n = depth_of(f)
    return [0.5 * 2 ** (-j / 2) * (avg(f, j + 1, 2 * k + 1) - avg(f, j + 1, 2 * k))
            for j, k in nodes(n)]


def s123(w, f):
    n = depth_of(w)
    fh = haar_coeffs(f)
    total = s1 = s3 = 0.0
    for (j, k), c in zip(nodes(n), fh):
        m = avg(w, j, k)
        a = 0.5 * 2 ** (-j / 2) * (avg(w, j + 1, 2 * k) - avg(w, j + 1, 2 * k + 1)) / m ** 1.5
        flat = a * avg(f, j, k)
        total += c * c / m
        s1 += (c / math.sqrt(m) + flat) ** 2
        s3 += flat ** 2
    return s1, 2 * math.sqrt(s1 * s3), s3, total


def dw_dominance(w):
    n = depth_of(w)
    inv = [1.0 / x for x in w]
    return max(avg(w, j, k) * avg(inv, j, k) for j, k in nodes(n)) / a2(w)


def carleson(w, seq):
    """(c_embed, c_test) for scalars seq[i] >= 0 on internal nodes."""
    n = depth_of(w)
    size = len(w)
    p = np.zeros((size, size))
    for (j, k), a in zip(nodes(n), seq):
        u = np.zeros(size)
        span = size // 2 ** j
        u[k * span:(k + 1) * span] = 1.0 / span
        p += a * np.outer(u, u)
    b = np.diag([1.0 / x for x in w]) / size
    c_embed = pencil_max(p, b)
    c_test = 0.0
    for jj, kk in nodes(n):
        total = sum(avg(w, j, k) ** 2 * a for (j, k), a in zip(nodes(n), seq)
                    if j >= jj and k >> (j - jj) == kk)
        c_test = max(c_test, total * 2 ** jj / avg(w, jj, kk))
    return c_embed, c_test


def maximal(f, w):
    n = depth_of(w)
    out = []
    for x in range(len(w)):
        best = 0.0
        for j in range(n + 1):
            k = x >> (n - j)
            vals = [math.sqrt(w[x] / wy) * abs(fy) for wy, fy in zip(block(w, j, k), block(f, j, k))]
            best = max(best, sum(vals) / len(vals))
        out.append(best)
    return out
