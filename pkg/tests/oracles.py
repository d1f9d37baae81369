"""Independent brute-force oracles for canceler SNR checks.

Everything here is coded from the defining formulas with its own matrix
primitives (Gauss-Jordan inverse, classical Gram-Schmidt QR, Cholesky),
deliberately avoiding the library code paths under test.
"""

import numpy as np


def gauss_jordan_inv(a):
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    aug = np.hstack([a, np.eye(n, dtype=complex)])
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[pivot, col]) == 0:
            raise ZeroDivisionError("singular matrix")
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] = aug[row] - aug[row, col] * aug[col]
    return aug[:, n:]


def gram_schmidt_qr(a):
    """Classical Gram-Schmidt QR with real positive triangular diagonal."""
    a = np.array(a, dtype=complex)
    m, n = a.shape
    q = np.zeros((m, n), dtype=complex)
    r = np.zeros((n, n), dtype=complex)
    for j in range(n):
        v = a[:, j].copy()
        for i in range(j):
            r[i, j] = np.vdot(q[:, i], v)
            v = v - r[i, j] * q[:, i]
        r[j, j] = np.sqrt(np.vdot(v, v).real)
        q[:, j] = v / r[j, j]
    return q, r


def cholesky_lower(a):
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    low = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1):
            s = sum(low[i, k] * np.conj(low[j, k]) for k in range(j))
            if i == j:
                low[i, j] = np.sqrt((a[i, i] - s).real)
            else:
                low[i, j] = (a[i, j] - s) / low[j, j]
    return low


def _col_norms(p):
    return [np.sqrt(sum(abs(p[i, j]) ** 2 for i in range(p.shape[0])))
            for j in range(p.shape[1])]


def oracle_none(h, sigma2, p):
    k = h.shape[0]
    out = []
    for i in range(k):
        interf = sum(abs(h[i, j]) ** 2 for j in range(k) if j != i)
        out.append(p * abs(h[i, i]) ** 2 / (p * interf + sigma2))
    return np.array(out)


def oracle_zf_down(h, sigma2, p):
    k = h.shape[0]
    prec = gauss_jordan_inv(h) @ np.diag(np.diag(h))
    beta = min(1.0, 1.0 / max(_col_norms(prec)))
    return np.array(
        [beta**2 * p * abs(h[i, i]) ** 2 / sigma2 for i in range(k)]
    )


def oracle_zf_up(h, sigma2, p):
    gram_inv = gauss_jordan_inv(h.conj().T @ h)
    return np.array(
        [p / (sigma2 * gram_inv[i, i].real) for i in range(h.shape[0])]
    )


def oracle_mmse_up(h, sigma2, p):
    k = h.shape[0]
    w = p * h.conj().T @ gauss_jordan_inv(p * h @ h.conj().T + sigma2 * np.eye(k))
    g = w @ h
    out = []
    for i in range(k):
        interf = sum(abs(g[i, j]) ** 2 for j in range(k) if j != i)
        noise = sigma2 * sum(abs(w[i, j]) ** 2 for j in range(k))
        out.append(p * abs(g[i, i]) ** 2 / (p * interf + noise))
    return np.array(out)


def oracle_mmse_down(h, sigma2, p):
    k = h.shape[0]
    p0 = h.conj().T @ gauss_jordan_inv(h @ h.conj().T + (sigma2 / p) * np.eye(k))
    u = h @ p0
    d = np.diag([h[j, j] / u[j, j] for j in range(k)])
    prec = p0 @ d
    heff = u @ d
    beta = min(1.0, 1.0 / max(_col_norms(prec)))
    out = []
    for i in range(k):
        interf = sum(abs(heff[i, j]) ** 2 for j in range(k) if j != i)
        out.append(
            beta**2 * p * abs(heff[i, i]) ** 2
            / (beta**2 * p * interf + sigma2)
        )
    return np.array(out)


def oracle_thp_down(h, sigma2, p):
    _, r = gram_schmidt_qr(h.conj().T)
    return np.array(
        [abs(r[i, i]) ** 2 * p / sigma2 for i in range(h.shape[0])]
    )


def oracle_dfe_up(h, sigma2, p):
    k = h.shape[0]
    low = cholesky_lower(p * h.conj().T @ h + sigma2 * np.eye(k))
    return np.array(
        [max(abs(low[i, i]) ** 2 / sigma2 - 1.0, 0.0) for i in range(k)]
    )


def oracle_mfb(h, sigma2, p, direction):
    k = h.shape[0]
    if direction == "upstream":
        return np.array(
            [p * sum(abs(h[j, i]) ** 2 for j in range(k)) / sigma2 for i in range(k)]
        )
    return np.array(
        [p * sum(abs(h[i, j]) ** 2 for j in range(k)) / sigma2 for i in range(k)]
    )


def random_channel(rng, k, cond_limit=1e6):
    """Well-conditioned random complex matrix (re-drawn if badly conditioned)."""
    while True:
        h = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
        if np.linalg.cond(h) < cond_limit:
            return h
