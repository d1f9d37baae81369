"""Per-tone crosstalk cancellation ladder.

Every design is a pure function of the channel matrix (plus noise/power
parameters) and works on a single K x K matrix or a stacked (T, K, K)
tensor. ``effective_snr`` is the single entry point the rate engine uses;
the ``design_*`` functions expose the underlying matrices for inspection
and testing.

Conventions:
  - H[i, j] couples transmitter j to receiver i.
  - Downstream precoders carry a per-tone scalar beta that rescales the
    whole precoder so no precoding column exceeds unit gain (transmit PSD
    normalization without breaking zero-forcing exactness).
  - THP factors the conjugate transpose of H with a QR decomposition; the
    unitary factor is the feedforward precoder and the triangular factor's
    unit-diagonal version is the feedback matrix.
  - The matched filter bound collects every coupling available to one
    line's signal: column energy of H upstream (all receive paths at the
    DPU), row energy downstream (all transmit paths toward one CPE).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularDesignError

VARIANTS = ("none", "diag", "zf", "mmse", "thp", "dfe", "mfb")

#: Condition-number limit above which designs refuse to invert.
COND_LIMIT = 1e12

#: Ladder order used by the harness presets (DFE is the upstream twin of THP).
SCHEME_LADDER = ("none", "diag", "zf", "mmse", "thp", "mfb")


@dataclass(frozen=True)
class Scheme:
    """A canceler variant bound to a direction plus THP/DFE options."""

    variant: str
    direction: str = "downstream"
    ordering: str = "natural"
    modulo: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown scheme variant '{self.variant}'")
        if self.direction not in ("downstream", "upstream"):
            raise ConfigError(f"unknown direction '{self.direction}'")
        if self.ordering not in ("natural", "best_first"):
            raise ConfigError(f"unknown ordering '{self.ordering}'")
        if self.variant == "thp" and self.direction != "downstream":
            raise ConfigError("THP is a downstream-only scheme")
        if self.variant == "dfe" and self.direction != "upstream":
            raise ConfigError("DFE is an upstream-only scheme")
        if self.modulo <= 0:
            raise ConfigError("modulo half-width must be positive")


@dataclass
class CancelerDesign:
    """Matrices produced by one design for one tone (or a tone stack)."""

    variant: str
    direction: str
    feedforward: np.ndarray
    beta: float | np.ndarray = 1.0
    feedback: np.ndarray | None = None
    order: np.ndarray | None = None
    gains: np.ndarray | None = None


def _diag(h):
    return np.diagonal(h, axis1=-2, axis2=-1)


def _check_square(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ConfigError("channel matrix must be square")
    return h


def _check_cond(h, tone_offset=0):
    cond = np.linalg.cond(h)
    bad = np.asarray(cond > COND_LIMIT)
    if bad.any():
        if bad.ndim == 0:
            raise SingularDesignError("channel matrix is ill-conditioned")
        tone = int(np.argmax(bad)) + tone_offset
        raise SingularDesignError("channel matrix is ill-conditioned", tone=tone)


def _max_column_norm(p):
    return np.linalg.norm(p, axis=-2).max(axis=-1)


def _psd_beta(p):
    return np.minimum(1.0, 1.0 / _max_column_norm(p))


# ---------------------------------------------------------------------------
# linear designs
# ---------------------------------------------------------------------------

def design_diag(h):
    """Per-line frequency-domain equalization only (no crosstalk removal)."""
    h = _check_square(h)
    d = _diag(h)
    if np.any(d == 0):
        raise SingularDesignError("zero diagonal entry in channel matrix")
    eye = np.broadcast_to(np.eye(h.shape[-1], dtype=complex), h.shape)
    return CancelerDesign(
        variant="diag",
        direction="downstream",
        feedforward=eye.copy(),
        beta=np.ones(h.shape[:-2]) if h.ndim > 2 else 1.0,
        order=np.arange(h.shape[-1]),
        gains=np.abs(d),
    )


def _zf_matrices(h, direction):
    hinv = np.linalg.inv(h)
    d = _diag(h)
    if direction == "downstream":
        p = hinv * d[..., None, :]          # H^-1 diag(H): column j scaled by H_jj
        return p, _psd_beta(p)
    w = d[..., :, None] * hinv              # diag(H) H^-1: row i scaled by H_ii
    return w, np.ones(h.shape[:-2]) if h.ndim > 2 else 1.0


def design_zf(h, direction="downstream"):
    """Zero-forcing: channel inversion with diagonal restoration.

    Downstream emits the precoder H^-1 diag(H) with PSD scalar beta;
    upstream emits the receive matrix diag(H) H^-1.
    """
    h = _check_square(h)
    _check_cond(h)
    m, beta = _zf_matrices(h, direction)
    return CancelerDesign(
        variant="zf",
        direction=direction,
        feedforward=m,
        beta=beta,
        order=np.arange(h.shape[-1]),
    )


def _as_noise_cov(noise_cov, k, shape):
    """Normalize a scalar/vector/matrix noise spec to a covariance matrix."""
    c = np.asarray(noise_cov, dtype=complex)
    if c.ndim == 0 or (c.ndim == 1 and c.shape[0] != k):
        # scalar, possibly per-tone
        return np.asarray(noise_cov, dtype=float)[..., None, None] * np.eye(k)
    if c.ndim == 1:
        return np.diag(c)
    return c


def _mmse_downstream(h, sigma2, p):
    """Regularized precoder with ZF-target diagonal restoration.

    The diagonal scaling D is chosen so the effective direct gain equals
    H_ii exactly; as sigma2 -> 0 the design converges to the ZF precoder.
    """
    k = h.shape[-1]
    c = np.asarray(sigma2 / p, dtype=float)
    m = h @ h.conj().swapaxes(-1, -2) + c[..., None, None] * np.eye(k)
    p0 = h.conj().swapaxes(-1, -2) @ np.linalg.inv(m)
    u = h @ p0
    udiag = _diag(u)
    if np.any(udiag == 0):
        raise SingularDesignError("degenerate MMSE design (zero effective gain)")
    dscale = _diag(h) / udiag
    prec = p0 * dscale[..., None, :]
    heff = u * dscale[..., None, :]
    beta = _psd_beta(prec)
    return prec, beta, heff


def _mmse_upstream(h, noise_cov, p):
    k = h.shape[-1]
    cov = _as_noise_cov(noise_cov, k, h.shape)
    ph = np.asarray(p, dtype=float)[..., None, None]
    m = ph * (h @ h.conj().swapaxes(-1, -2)) + cov
    return ph * (h.conj().swapaxes(-1, -2) @ np.linalg.inv(m))


def design_mmse(h, noise_cov, tone_power, direction="upstream"):
    """Wiener canceler: receive matrix upstream, regularized precoder downstream."""
    h = _check_square(h)
    cov = np.asarray(noise_cov)
    if cov.ndim >= 2:
        eig = np.linalg.eigvalsh(cov)
        if np.any(eig <= 0):
            raise ConfigError("noise covariance must be positive definite")
    elif np.any(cov <= 0):
        raise ConfigError("noise power must be positive")
    if direction == "upstream":
        w = _mmse_upstream(h, noise_cov, tone_power)
        return CancelerDesign(
            variant="mmse", direction=direction, feedforward=w,
            order=np.arange(h.shape[-1]),
        )
    if cov.ndim >= 2:
        sigma2 = np.mean(np.diagonal(cov, axis1=-2, axis2=-1).real, axis=-1)
    else:
        sigma2 = cov
    prec, beta, _ = _mmse_downstream(h, sigma2, tone_power)
    return CancelerDesign(
        variant="mmse", direction=direction, feedforward=prec, beta=beta,
        order=np.arange(h.shape[-1]),
    )


# ---------------------------------------------------------------------------
# triangular (THP / DFE) designs
# ---------------------------------------------------------------------------

def _phase_normalized_qr(a):
    """QR with the triangular factor's diagonal made real positive."""
    q, r = np.linalg.qr(a)
    d = _diag(r)
    mag = np.abs(d)
    if np.any(mag == 0):
        raise SingularDesignError("rank-deficient matrix in QR factorization")
    phase = d / mag
    q = q * phase[..., None, :]
    r = r * np.conj(phase)[..., :, None]
    return q, r


def _sorted_qr(a):
    """Greedy best-first QR: each step takes the remaining column with the
    largest residual norm. Returns (q, r, perm) with a[..., :, perm] = q @ r
    per batch element."""
    a = np.asarray(a, dtype=complex)
    lead = a.shape[:-2]
    m, k = a.shape[-2:]
    cols = a.reshape(-1, m, k).copy()
    b = cols.shape[0]
    q = np.zeros((b, m, k), dtype=complex)
    rfull = np.zeros((b, k, k), dtype=complex)   # rows: step, cols: original index
    perm = np.zeros((b, k), dtype=int)
    avail = np.ones((b, k), dtype=bool)
    bidx = np.arange(b)
    for step in range(k):
        norms = np.linalg.norm(cols, axis=1)
        norms = np.where(avail, norms, -1.0)
        pick = norms.argmax(axis=1)
        perm[:, step] = pick
        avail[bidx, pick] = False
        nrm = norms[bidx, pick]
        if np.any(nrm <= 0):
            raise SingularDesignError("rank-deficient matrix in sorted QR")
        qcol = cols[bidx, :, pick] / nrm[:, None]
        q[:, :, step] = qcol
        proj = np.einsum("bm,bmk->bk", qcol.conj(), cols)
        proj = np.where(avail, proj, 0.0)
        rfull[:, step, :] = proj
        rfull[bidx, step, pick] = nrm
        cols -= qcol[:, :, None] * proj[:, None, :]
    r = np.take_along_axis(rfull, perm[:, None, :], axis=2)
    return (
        q.reshape(*lead, m, k),
        r.reshape(*lead, k, k),
        perm.reshape(*lead, k),
    )


def _triangular_factor(a, ordering):
    if ordering == "best_first":
        return _sorted_qr(a)
    q, r = _phase_normalized_qr(a)
    k = a.shape[-1]
    perm = np.broadcast_to(np.arange(k), a.shape[:-2] + (k,))
    return q, r, perm


def design_thp(h, ordering="natural"):
    """Tomlinson-Harashima precoder design (downstream only).

    Factors the conjugate transpose of H; the unitary factor feeds forward,
    the unit-diagonal lower-triangular factor feeds back, and the triangular
    diagonal magnitudes are the per-line effective gains (in encoding order
    ``order``). The modulo operation lives in :func:`apply_thp`.
    """
    h = _check_square(h)
    _check_cond(h)
    a = h.conj().swapaxes(-1, -2)
    q, r, perm = _triangular_factor(a, ordering)
    lower = r.conj().swapaxes(-1, -2)
    gains = np.abs(_diag(r))
    feedback = lower / _diag(lower)[..., :, None]
    return CancelerDesign(
        variant="thp",
        direction="downstream",
        feedforward=q,
        beta=np.ones(h.shape[:-2]) if h.ndim > 2 else 1.0,
        feedback=feedback,
        order=perm,
        gains=gains,
    )


def design_dfe(h, noise_cov, tone_power, ordering="natural"):
    """Genie-aided MMSE-DFE design (upstream only).

    Factors the noise-regularized augmented channel; unbiased per-line SNR
    is gains_i^2 * p / sigma^2 - 1 in the detection order ``order``.
    """
    h = _check_square(h)
    k = h.shape[-1]
    sigma2 = np.asarray(noise_cov, dtype=float)
    p = np.asarray(tone_power, dtype=float)
    if np.any(sigma2 <= 0) or np.any(p <= 0):
        raise ConfigError("noise power and tone power must be positive")
    eye = np.broadcast_to(np.eye(k, dtype=complex), h.shape)
    a = np.concatenate(
        [np.sqrt(p)[..., None, None] * h, np.sqrt(sigma2)[..., None, None] * eye],
        axis=-2,
    )
    q, r, perm = _triangular_factor(a, ordering)
    gains = np.abs(_diag(r))
    feedback = r / _diag(r)[..., :, None]
    w = q[..., : h.shape[-2], :].conj().swapaxes(-1, -2)
    return CancelerDesign(
        variant="dfe",
        direction="upstream",
        feedforward=w,
        feedback=feedback,
        order=perm,
        gains=gains,
    )


def apply_thp(symbols, design: CancelerDesign, modulo_m: float) -> np.ndarray:
    """Feedback precoding with symmetric modulo reduction.

    Encodes in ``design.order``; the output vector (still in encoding order)
    is what the feedforward matrix then transmits. Real and imaginary parts
    are wrapped into the half-open square [-modulo_m, modulo_m).
    """
    if modulo_m <= 0:
        raise ConfigError("modulo half-width must be positive")
    if design.feedback is None:
        raise ConfigError("design has no feedback matrix (not a THP design)")
    s = np.asarray(symbols, dtype=complex)
    b = design.feedback
    k = b.shape[-1]
    if s.shape[-1] != k:
        raise ConfigError("symbol vector length does not match design")
    order = np.asarray(design.order)
    s_enc = s[..., order] if order.ndim == 1 else np.take_along_axis(s, order, -1)
    x = np.zeros_like(s_enc)
    width = 2.0 * modulo_m

    def wrap(z):
        re = np.mod(z.real + modulo_m, width) - modulo_m
        im = np.mod(z.imag + modulo_m, width) - modulo_m
        return re + 1j * im

    for i in range(k):
        fb = np.einsum("...j,...j->...", b[..., i, :i], x[..., :i])
        x[..., i] = wrap(s_enc[..., i] - fb)
    return x


# ---------------------------------------------------------------------------
# effective SNR
# ---------------------------------------------------------------------------

def _snr_none(h, sigma2, p):
    absh2 = np.abs(h) ** 2
    d2 = _diag(absh2)
    interference = absh2.sum(axis=-1) - d2
    return p[..., None] * d2 / (p[..., None] * interference + sigma2[..., None])


def _snr_zf(h, sigma2, p, direction):
    if direction == "downstream":
        prec, beta = _zf_matrices(h, "downstream")
        d2 = np.abs(_diag(h)) ** 2
        return (np.asarray(beta) ** 2)[..., None] * p[..., None] * d2 / sigma2[..., None]
    hinv = np.linalg.inv(h)
    noise_amp = (np.abs(hinv) ** 2).sum(axis=-1)   # diag of (H^H H)^-1
    return p[..., None] / (sigma2[..., None] * noise_amp)


def _snr_mmse(h, sigma2, p, direction):
    if direction == "downstream":
        _, beta, heff = _mmse_downstream(h, sigma2, p)
        b2 = (np.asarray(beta) ** 2)[..., None]
        g2 = np.abs(heff) ** 2
        d2 = _diag(g2)
        interference = g2.sum(axis=-1) - d2
        return b2 * p[..., None] * d2 / (
            b2 * p[..., None] * interference + sigma2[..., None]
        )
    w = _mmse_upstream(h, sigma2, p)
    g = w @ h
    g2 = np.abs(g) ** 2
    d2 = _diag(g2)
    interference = g2.sum(axis=-1) - d2
    noise = sigma2[..., None] * (np.abs(w) ** 2).sum(axis=-1)
    return p[..., None] * d2 / (p[..., None] * interference + noise)


def _snr_thp(h, sigma2, p, ordering):
    design = design_thp(h, ordering=ordering)
    k = h.shape[-1]
    snr_enc = design.gains**2 * p[..., None] / sigma2[..., None]
    order = np.asarray(design.order)
    out = np.empty_like(snr_enc)
    if order.ndim == 1:
        out[..., order] = snr_enc
    else:
        np.put_along_axis(out, order, snr_enc, axis=-1)
    return out


def _snr_dfe(h, sigma2, p, ordering):
    design = design_dfe(h, sigma2, p, ordering=ordering)
    snr_enc = np.maximum(design.gains**2 / sigma2[..., None] - 1.0, 0.0)
    order = np.asarray(design.order)
    out = np.empty_like(snr_enc)
    if order.ndim == 1:
        out[..., order] = snr_enc
    else:
        np.put_along_axis(out, order, snr_enc, axis=-1)
    return out


def _snr_mfb(h, sigma2, p, direction):
    absh2 = np.abs(h) ** 2
    # Upstream: all receive paths of one transmitter (column energy).
    # Downstream: all transmit paths toward one receiver (row energy).
    energy = absh2.sum(axis=-2) if direction == "upstream" else absh2.sum(axis=-1)
    return p[..., None] * energy / sigma2[..., None]


def effective_snr(scheme: Scheme, h, noise_power, tone_power, cond_check=True):
    """Per-line effective SNR (linear) for one scheme.

    ``h`` is (K, K) or stacked (T, K, K); ``noise_power`` and ``tone_power``
    are in mW per tone, scalar or per-tone arrays. Returns (K,) or (T, K).
    """
    h = _check_square(h)
    single = h.ndim == 2
    if single:
        h = h[None]
    sigma2 = np.broadcast_to(np.asarray(noise_power, dtype=float), h.shape[:-2])
    p = np.broadcast_to(np.asarray(tone_power, dtype=float), h.shape[:-2])
    if np.any(sigma2 <= 0):
        raise ConfigError("noise power must be positive")
    if np.any(p <= 0):
        raise ConfigError("tone power must be positive")
    v = scheme.variant
    if cond_check and v in ("zf", "thp"):
        _check_cond(h)
    if v in ("none", "diag"):
        snr = _snr_none(h, sigma2, p)
    elif v == "zf":
        snr = _snr_zf(h, sigma2, p, scheme.direction)
    elif v == "mmse":
        snr = _snr_mmse(h, sigma2, p, scheme.direction)
    elif v == "thp":
        snr = _snr_thp(h, sigma2, p, scheme.ordering)
    elif v == "dfe":
        snr = _snr_dfe(h, sigma2, p, scheme.ordering)
    elif v == "mfb":
        snr = _snr_mfb(h, sigma2, p, scheme.direction)
    else:  # pragma: no cover
        raise ConfigError(f"unknown scheme variant '{v}'")
    return snr[0] if single else snr
