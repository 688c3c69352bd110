"""Dense real linear algebra for matrices up to 8x8.

Eigenvalues go through characteristic polynomial coefficients
(Faddeev-LeVerrier) and simultaneous root iteration rather than a QR
stack; symmetric spectra come from Jacobi sweeps.  numpy handles the
plumbing (products, inverses, determinants).
"""

import numpy as np

from . import kernel
from .config import get_tols
from .errors import ConvergenceError, DimensionError, OverflowLimitError

MAX_EIG_DIM = 8


def as_square(M, name="matrix"):
    a = np.asarray(M, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError(f"{name} has non-finite entries")
    return a


def _check_eig_dim(a, name):
    if a.shape[0] > MAX_EIG_DIM:
        raise DimensionError(
            f"{name}: dimension {a.shape[0]} exceeds the eigen-kernel limit {MAX_EIG_DIM}"
        )


def char_poly(M):
    """Monic characteristic polynomial of M, coefficients in descending powers."""
    a = as_square(M)
    _check_eig_dim(a, "char_poly")
    return kernel.charpoly_batch(a[None])[0]


def eigenvalues(M, tols=None):
    """All eigenvalues of a real square matrix (with multiplicity).

    Roots of the characteristic polynomial, refined by Newton polishing;
    the residual |p(lambda)| is checked against
    eig_residual * max(1, |M|_F^n).
    """
    t = get_tols(tols)
    a = as_square(M)
    _check_eig_dim(a, "eigenvalues")
    coeffs = kernel.charpoly_batch(a[None])
    roots = kernel.polyroots_batch(coeffs)
    res = kernel.polyresidual_batch(coeffs, roots)
    scale = max(1.0, float(np.linalg.norm(a)) ** a.shape[0])
    worst = float(res.max()) if res.size else 0.0
    if worst > t.eig_residual * scale:
        raise ConvergenceError(
            f"eigenvalue residual {worst:.3e} exceeds {t.eig_residual * scale:.3e}",
            worst_residual=worst,
        )
    return sort_eigs(roots[0])


def eigenvalues_batch(mats, tols=None):
    """Batched version of `eigenvalues` for (m, d, d) input."""
    t = get_tols(tols)
    a = np.asarray(mats, dtype=np.float64)
    _check_eig_dim(a[0], "eigenvalues")
    coeffs = kernel.charpoly_batch(a)
    roots = kernel.polyroots_batch(coeffs)
    res = kernel.polyresidual_batch(coeffs, roots)
    scale = np.maximum(1.0, np.linalg.norm(a, axis=(1, 2)) ** a.shape[1])
    worst = float((res.max(axis=1) / (t.eig_residual * scale)).max())
    if worst > 1.0:
        raise ConvergenceError("batched eigenvalue residual too large", worst_residual=worst)
    return roots


def sort_eigs(vals):
    """Canonical eigenvalue order: by real part, then imaginary part.

    Keys are rounded so that conjugate pairs with real parts equal up to
    roundoff order deterministically.
    """
    v = np.asarray(vals)
    key_re = np.round(v.real, 10)
    key_im = np.round(v.imag, 10)
    return v[np.lexsort((v.imag, key_im, key_re))]


def sym_min_eig(S, tols=None):
    """Smallest eigenvalue of the symmetrization (S + S^T)/2, Jacobi sweeps."""
    a = as_square(S)
    sym = 0.5 * (a + a.T)
    return float(kernel.sym_eigvals_batch(sym[None])[0, 0])


def sym_min_eig_batch(mats):
    """Row of smallest eigenvalues for a stack of (already) symmetric matrices."""
    a = np.asarray(mats, dtype=np.float64)
    sym = 0.5 * (a + np.swapaxes(a, 1, 2))
    return kernel.sym_eigvals_batch(sym)[:, 0]


def mat_exp(A, tols=None):
    """Matrix exponential via scaling-and-squaring of a truncated series."""
    t = get_tols(tols)
    a = as_square(A)
    norm = float(np.abs(a).sum(axis=1).max())
    if norm > t.exp_norm_cap:
        raise OverflowLimitError(f"mat_exp: |A| = {norm:.2f} exceeds cap {t.exp_norm_cap}")
    return kernel.expm_batch(a[None])[0]


def mat_exp_batch(mats, tols=None):
    t = get_tols(tols)
    a = np.asarray(mats, dtype=np.float64)
    norm = float(np.abs(a).sum(axis=2).max()) if a.size else 0.0
    if norm > t.exp_norm_cap:
        raise OverflowLimitError(f"mat_exp: |A| = {norm:.2f} exceeds cap {t.exp_norm_cap}")
    return kernel.expm_batch(a)


def herm_eig(H, sweeps=60, tol=1e-14):
    """Eigen-decomposition of a Hermitian (or real symmetric) matrix.

    Complex Jacobi with accumulated vectors; returns (vals ascending,
    vecs) with H @ vecs[:, k] = vals[k] * vecs[:, k].  Cold-path tool for
    rank decisions, null spaces and unitary logarithms.
    """
    a = np.array(H, dtype=np.complex128, copy=True)
    d = a.shape[0]
    if a.shape != (d, d):
        raise DimensionError("herm_eig expects a square matrix")
    a = 0.5 * (a + a.conj().T)
    V = np.eye(d, dtype=np.complex128)
    scale = max(float(np.abs(a).max()), 1e-300)
    for _ in range(sweeps):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= tol * scale * 1e-2:
                    continue
                off = max(off, abs(apq))
                # unitary plane rotation U = [[c, -conj(s)], [s, c]],
                # s = sin(theta) e^{-i arg(apq)}, annihilates the pivot
                phase = apq / abs(apq)
                app = a[p, p].real
                aqq = a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * abs(apq), app - aqq)
                c = np.cos(theta)
                s = np.sin(theta) * np.conj(phase)
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp + np.conj(s) * rowq
                a[q, :] = -s * rowp + c * rowq
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp + s * colq
                a[:, q] = -np.conj(s) * colp + c * colq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp + s * vq
                V[:, q] = -np.conj(s) * vp + c * vq
        if off <= tol * scale:
            break
    vals = np.real(np.diag(a)).copy()
    order = np.argsort(vals)
    return vals[order], V[:, order]


def sym_eig(S):
    """Real symmetric eigen-decomposition (vals ascending, real vectors)."""
    a = as_square(S)
    vals, V = herm_eig(0.5 * (a + a.T))
    return vals, V.real


def singular_values(A):
    """Singular values (descending) of a real or complex matrix."""
    a = np.asarray(A, dtype=np.complex128)
    vals, _ = herm_eig(a.conj().T @ a)
    return np.sqrt(np.clip(vals, 0.0, None))[::-1]


def null_rank(A, rel_threshold, scale=None):
    """Number of singular values of A below rel_threshold * scale."""
    s = singular_values(A)
    ref = float(scale) if scale is not None else max(float(s[0]) if s.size else 0.0, 1.0)
    return int(np.sum(s < rel_threshold * ref))


def range_basis(A, dim):
    """Orthonormal basis (columns) of the leading `dim`-dimensional range of A."""
    a = np.asarray(A, dtype=np.float64)
    vals, V = sym_eig(a @ a.T)
    return V[:, ::-1][:, :dim], vals[::-1]


def spd_log(S):
    """Logarithm of a symmetric positive definite matrix."""
    vals, V = sym_eig(S)
    if vals[0] <= 0:
        raise ConvergenceError("spd_log: matrix is not positive definite")
    return (V * np.log(vals)) @ V.T


def spd_sqrt(S):
    vals, V = sym_eig(S)
    return (V * np.sqrt(np.clip(vals, 0.0, None))) @ V.T
