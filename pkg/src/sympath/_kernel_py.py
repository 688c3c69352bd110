"""Pure-Python (numpy) implementations of the hot dense kernels.

Same API as the compiled extension `_kernel`; everything is batched over
the leading axis and restricted to small matrices (d <= 8).  The
algorithms are fixed by contract:

* characteristic polynomials by the Faddeev-LeVerrier recurrence,
* polynomial roots by Aberth-Ehrlich iteration plus one Newton polish,
* symmetric eigenvalues by cyclic Jacobi sweeps,
* matrix exponentials by scaling-and-squaring of a truncated series.
"""

import numpy as np

BACKEND = "python"

_TAYLOR_ORDER = 18


def charpoly_batch(mats):
    """Monic characteristic polynomial coefficients, descending powers.

    mats: (m, d, d) float64 -> (m, d+1) with column 0 equal to 1.
    """
    a = np.ascontiguousarray(mats, dtype=np.float64)
    m, d, _ = a.shape
    coeffs = np.zeros((m, d + 1))
    coeffs[:, 0] = 1.0
    work = a.copy()
    eye = np.eye(d)
    for k in range(1, d + 1):
        ck = -np.einsum("mii->m", work) / k
        coeffs[:, k] = ck
        if k < d:
            work = a @ (work + ck[:, None, None] * eye)
    return coeffs


def _polyval_batch(coeffs, z):
    # coeffs (m, d+1) complex, z (m, r) -> p(z), p'(z)
    m, dp1 = coeffs.shape
    p = np.broadcast_to(coeffs[:, 0:1], z.shape).astype(np.complex128).copy()
    dp = np.zeros_like(z)
    for k in range(1, dp1):
        dp = dp * z + p
        p = p * z + coeffs[:, k : k + 1]
    return p, dp


def polyroots_batch(coeffs, maxiter=120, tol=1e-14):
    """All roots of each monic polynomial via Aberth-Ehrlich.

    coeffs: (m, d+1) real or complex, leading column nonzero.
    Returns (m, d) complex roots, unordered.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    c = c / c[:, 0:1]
    m, dp1 = c.shape
    d = dp1 - 1
    if d == 0:
        return np.zeros((m, 0), dtype=np.complex128)
    if d == 1:
        return (-c[:, 1:2]).copy()

    radius = 1.0 + np.max(np.abs(c[:, 1:]), axis=1)
    angles = 2.0 * np.pi * (np.arange(d) + 0.5) / d + 0.4
    z = radius[:, None] * np.exp(1j * angles)[None, :]

    for _ in range(maxiter):
        p, dp = _polyval_batch(c, z)
        small = np.abs(dp) < 1e-300
        dp = np.where(small, 1e-300 + 0j, dp)
        w = p / dp
        diff = z[:, :, None] - z[:, None, :]
        np.einsum("mii->mi", diff)[:] = 1.0  # avoid 0 on the diagonal
        s = (1.0 / diff).sum(axis=2) - 1.0   # remove the injected diagonal 1/1
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300 + 0j, denom)
        corr = w / denom
        z = z - corr
        if np.max(np.abs(corr)) < tol * (1.0 + np.max(np.abs(z))):
            break
    # one Newton polish
    p, dp = _polyval_batch(c, z)
    safe = np.abs(dp) > 1e-120
    z = np.where(safe, z - p / np.where(safe, dp, 1.0), z)
    return z


def polyresidual_batch(coeffs, roots):
    """|p(root)| for each returned root, shape (m, d)."""
    c = np.asarray(coeffs, dtype=np.complex128)
    p, _ = _polyval_batch(c / c[:, 0:1], roots)
    return np.abs(p) * np.abs(c[:, 0:1])


def sym_eigvals_batch(mats, sweeps=30, tol=1e-15):
    """Eigenvalues (ascending) of symmetric matrices via cyclic Jacobi.

    The caller is responsible for symmetrizing; no check is performed.
    """
    a = np.array(mats, dtype=np.float64, copy=True)
    m, d, _ = a.shape
    if d == 1:
        return a[:, :, 0].copy()
    scale = np.maximum(np.abs(a).max(axis=(1, 2)), 1e-300)
    for _ in range(sweeps):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                off = max(off, np.max(np.abs(apq) / scale))
                app = a[:, p, p]
                aqq = a[:, q, q]
                rotate = np.abs(apq) > 1e-300
                theta = np.where(rotate, 0.5 * np.arctan2(2.0 * apq, aqq - app), 0.0)
                c = np.cos(theta)
                s = np.sin(theta)
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * rowp - s[:, None] * rowq
                a[:, q, :] = s[:, None] * rowp + c[:, None] * rowq
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * colp - s[:, None] * colq
                a[:, :, q] = s[:, None] * colp + c[:, None] * colq
        if off < tol:
            break
    vals = np.einsum("mii->mi", a).copy()
    vals.sort(axis=1)
    return vals


def expm_batch(mats):
    """exp(A) for a batch of small real matrices, scaling-and-squaring."""
    a = np.ascontiguousarray(mats, dtype=np.float64)
    m, d, _ = a.shape
    norm = np.abs(a).sum(axis=2).max(axis=1)  # inf-norm per matrix
    nmax = float(norm.max()) if m else 0.0
    s = max(0, int(np.ceil(np.log2(max(nmax, 1e-300) / 0.25))))
    t = a / float(2 ** s)
    eye = np.broadcast_to(np.eye(d), (m, d, d))
    out = eye + t / _TAYLOR_ORDER
    for k in range(_TAYLOR_ORDER - 1, 0, -1):
        out = eye + (t @ out) / k
    for _ in range(s):
        out = out @ out
    return out
