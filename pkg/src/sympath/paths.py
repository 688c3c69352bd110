"""Construction, integration, certification and transformation of
positive symplectic paths.

A positive path solves gamma' = J P(t) gamma with P(t) symmetric
positive definite.  Sampled paths store the grid, the group elements and
the generator P per sample; the certificate is the minimum eigenvalue of
the symmetrized generator over the grid together with the worst
symplectic defect.

The integrator is the midpoint-exponential update
    gamma_{k+1} = exp(h J P(t_k + h/2)) gamma_k,
which is exactly symplectic per step because J P lies in the Lie
algebra.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg, symplectic
from .config import get_tols
from .errors import (
    ConditioningError,
    DimensionError,
    GeneratorInconsistency,
    GridMismatch,
    MonotonicityError,
    NotDecomposable,
    PositivityViolation,
    SympathError,
)


# ---------------------------------------------------------------------------
# sampled paths
# ---------------------------------------------------------------------------

@dataclass
class PathSamples:
    """A sampled symplectic path with per-sample generators (no
    positivity requirement)."""

    n: int
    t: np.ndarray
    gamma: np.ndarray        # (m, 2n, 2n)
    P: np.ndarray            # (m, 2n, 2n), symmetric
    min_eig_P: float = 0.0
    symp_defect: float = 0.0
    ode_residual: float = 0.0  # constant C in |midpoint fd residual| <= C h^2
    meta: dict = field(default_factory=dict)

    @property
    def start(self):
        return self.gamma[0]

    @property
    def end(self):
        return self.gamma[-1]

    @property
    def m(self):
        return len(self.t)

    def is_loop(self, tol=1e-8):
        return bool(np.max(np.abs(self.start - self.end)) <= tol)

    def to_json(self):
        return {
            "n": self.n,
            "t": [float(x) for x in self.t],
            "gamma": [[list(map(float, r)) for r in g] for g in self.gamma],
            "P": [[list(map(float, r)) for r in p] for p in self.P],
            "min_eig_P": float(self.min_eig_P),
            "symp_defect": float(self.symp_defect),
            "positive": bool(self.min_eig_P > 0.0),
        }

    @classmethod
    def from_json(cls, obj):
        t = np.asarray(obj["t"], dtype=float)
        gamma = np.asarray(obj["gamma"], dtype=float)
        P = np.asarray(obj["P"], dtype=float)
        return _certify(t, gamma, P, require_positive=obj.get("positive", False))


class PositivePath(PathSamples):
    """PathSamples whose generator is certified positive definite on the
    whole grid (interior samples for paths with degenerate endpoints)."""


def _stats(t, gamma, P, tols=None):
    tt = get_tols(tols)
    m, d, _ = gamma.shape
    n = d // 2
    J = symplectic.standard_J(n)
    sym = 0.5 * (P + np.swapaxes(P, 1, 2))
    min_eig = float(np.min(linalg.sym_min_eig_batch(sym))) if m else 0.0
    defect = float(np.max(np.abs(np.swapaxes(gamma, 1, 2) @ J @ gamma - J)))
    ode_c = 0.0
    if m >= 3:
        dt = t[2:] - t[:-2]
        lhs = gamma[2:] - gamma[:-2]
        rhs = dt[:, None, None] * (J @ (sym[1:-1] @ gamma[1:-1]))
        h = np.maximum(np.diff(t).max(), 1e-300)
        ode_c = float(np.max(np.abs(lhs - rhs)) / (h * h))
    return min_eig, defect, ode_c


def _certify(t, gamma, P, tols=None, require_positive=True, interior_only=False,
             meta=None):
    tt = get_tols(tols)
    t = np.asarray(t, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    P = 0.5 * (np.asarray(P, dtype=float) + np.swapaxes(np.asarray(P, dtype=float), 1, 2))
    if np.any(np.diff(t) <= 0):
        raise MonotonicityError("time grid must be strictly increasing")
    min_eig, defect, ode_c = _stats(t, gamma, P, tt)
    if interior_only and len(t) >= 3:
        min_eig = float(np.min(linalg.sym_min_eig_batch(P[1:-1])))
    n = gamma.shape[1] // 2
    kw = dict(n=n, t=t, gamma=gamma, P=P, min_eig_P=min_eig,
              symp_defect=defect, ode_residual=ode_c, meta=meta or {})
    if require_positive:
        if min_eig <= 0.0:
            k = int(np.argmin(linalg.sym_min_eig_batch(P)))
            raise PositivityViolation(
                f"generator not positive definite at t = {t[k]:.6g} "
                f"(min eig {min_eig:.3e})", t=float(t[k]), min_eig=min_eig)
        if defect > tt.path_defect * max(1.0, float(np.abs(gamma).max()) ** 2):
            raise PositivityViolation(
                f"symplectic defect {defect:.3e} along the path", min_eig=min_eig)
        return PositivePath(**kw)
    cls = PositivePath if min_eig > 0.0 else PathSamples
    return cls(**kw)


@dataclass
class Certificate:
    ok: bool
    min_eig: float
    worst_t: float
    max_asym: float
    symp_defect: float
    message: str = ""

    def to_json(self):
        return {
            "ok": self.ok, "min_eig": float(self.min_eig),
            "worst_t": float(self.worst_t), "max_asym": float(self.max_asym),
            "symp_defect": float(self.symp_defect), "message": self.message,
        }


def verify_positive(path, tol=None, tols=None):
    """Recompute P from central differences of the samples and certify.

    P_hat(t) = J^-1 gamma'(t) gamma(t)^-1 at interior samples; checks the
    symmetry defect and positive definiteness, reporting the worst
    offender.
    """
    tt = get_tols(tols)
    sym_tol = tol if tol is not None else 1e-6
    if path.m < 3:
        raise DimensionError("need at least 3 samples to verify")
    J = symplectic.standard_J(path.n)
    g = path.gamma
    dt = (path.t[2:] - path.t[:-2])[:, None, None]
    dgamma = (g[2:] - g[:-2]) / dt
    inv = np.linalg.inv(g[1:-1])
    P_hat = -J @ (dgamma @ inv)
    asym = float(np.max(np.abs(P_hat - np.swapaxes(P_hat, 1, 2))))
    sym = 0.5 * (P_hat + np.swapaxes(P_hat, 1, 2))
    eigs = linalg.sym_min_eig_batch(sym)
    k = int(np.argmin(eigs))
    min_eig = float(eigs[k])
    scale = max(1.0, float(np.abs(sym).max()))
    ok = (min_eig > 0.0) and (asym <= sym_tol * scale)
    msg = "" if ok else (
        f"min eig {min_eig:.3e} at t = {path.t[k + 1]:.6g}, asymmetry {asym:.3e}")
    return Certificate(ok=ok, min_eig=min_eig, worst_t=float(path.t[k + 1]),
                       max_asym=asym, symp_defect=path.symp_defect, message=msg)


# ---------------------------------------------------------------------------
# path specs and constructors
# ---------------------------------------------------------------------------

PATH_KINDS = ("samples", "rotation_loop", "alpha_family", "join", "product",
              "conjugated", "retimed", "concat")


@dataclass
class PathSpec:
    kind: str
    payload: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.kind, **self.payload}

    @staticmethod
    def from_json(obj):
        obj = dict(obj)
        kind = obj.pop("kind")
        if kind not in PATH_KINDS:
            raise SympathError(f"unknown path spec kind {kind!r}")
        return PathSpec(kind, obj)


def _grid(t0, t1, samples, tols=None):
    tt = get_tols(tols)
    if samples is None:
        samples = max(int(tt.samples_per_unit * (t1 - t0)), tt.min_samples) + 1
    if samples < 3:
        raise DimensionError("need at least 3 samples")
    return np.linspace(t0, t1, samples)


def integrate_generator(P_func, gamma0, t_grid, tols=None, require_positive=True):
    """Midpoint-exponential integration of gamma' = J P(t) gamma."""
    t = np.asarray(t_grid, dtype=float)
    g0 = np.asarray(gamma0, dtype=float)
    n = g0.shape[0] // 2
    J = symplectic.standard_J(n)
    m = len(t)
    P = np.empty((m, 2 * n, 2 * n))
    for k in range(m):
        P[k] = P_func(t[k])
    mids = 0.5 * (t[:-1] + t[1:])
    Pm = np.empty((m - 1, 2 * n, 2 * n))
    for k in range(m - 1):
        Pm[k] = P_func(mids[k])
    steps = linalg.mat_exp_batch(np.diff(t)[:, None, None] * (J @ Pm), tols)
    gam = np.empty((m, 2 * n, 2 * n))
    gam[0] = g0
    for k in range(m - 1):
        gam[k + 1] = steps[k] @ gam[k]
    return _certify(t, gam, P, tols, require_positive=require_positive)


def rotation_loop(ks, samples=None, tols=None):
    """diag of uniform-speed rotation blocks, winding k_i each."""
    ks = [int(k) for k in ks]
    n = len(ks)
    t = _grid(0.0, 1.0, samples, tols)
    m = len(t)
    gam = np.zeros((m, 2 * n, 2 * n))
    P = np.zeros((m, 2 * n, 2 * n))
    for i, k in enumerate(ks):
        sl = slice(2 * i, 2 * i + 2)
        for j, tj in enumerate(t):
            gam[j, sl, sl] = symplectic.rot2(2 * np.pi * k * tj)
            P[j, sl, sl] = 2 * np.pi * k * np.eye(2)
    return _certify(t, gam, P, tols, require_positive=all(k >= 1 for k in ks))


def alpha_family_path(base, alpha0, alpha1, samples=None, tols=None):
    """t -> base . diag(R(alpha(t)), ...) with alpha affine increasing.

    Positive whenever alpha1 > alpha0; the generator is
    alpha' . base^-T base^-1, constant in t.
    """
    B = base.mat if isinstance(base, symplectic.SymplecticMatrix) else np.asarray(base, float)
    n = B.shape[0] // 2
    if alpha1 <= alpha0:
        raise MonotonicityError("alpha range must increase for a positive family")
    t = _grid(0.0, 1.0, samples, tols)
    rate = alpha1 - alpha0
    Binv = np.linalg.inv(B)
    P0 = rate * (Binv.T @ Binv)
    m = len(t)
    gam = np.empty((m, 2 * n, 2 * n))
    P = np.broadcast_to(P0, (m, 2 * n, 2 * n)).copy()
    for j, tj in enumerate(t):
        gam[j] = B @ symplectic.rot_block(n, alpha0 + rate * tj)
    return _certify(t, gam, P, tols)


def path_eval(path, s):
    """gamma(s) between samples: one midpoint-exponential step from the
    nearest grid point using linearly interpolated generators."""
    t = path.t
    s = float(np.clip(s, t[0], t[-1]))
    k = int(np.clip(np.searchsorted(t, s) - 1, 0, path.m - 2))
    h = s - t[k]
    if h == 0.0:
        return path.gamma[k]
    frac = (s - t[k]) / (t[k + 1] - t[k])
    P_mid = (1 - 0.5 * frac) * path.P[k] + 0.5 * frac * path.P[k + 1]
    J = symplectic.standard_J(path.n)
    return linalg.mat_exp(h * (J @ P_mid)) @ path.gamma[k]


def resample(path, new_t, tols=None):
    """Re-integrate the stored generator on a new grid."""
    tt = get_tols(tols)
    new_t = np.asarray(new_t, dtype=float)
    if new_t[0] < path.t[0] - 1e-12 or new_t[-1] > path.t[-1] + 1e-12:
        raise GridMismatch("new grid exceeds the path interval")

    def P_func(s):
        j = int(np.clip(np.searchsorted(path.t, s) - 1, 0, path.m - 2))
        w = (s - path.t[j]) / (path.t[j + 1] - path.t[j])
        return (1 - w) * path.P[j] + w * path.P[j + 1]

    out = integrate_generator(P_func, path_eval(path, new_t[0]), new_t, tols,
                              require_positive=False)
    drift = float(np.max(np.abs(out.end - path_eval(path, new_t[-1]))))
    if drift > 1e-6 * max(1.0, float(np.abs(path.gamma).max())):
        raise GridMismatch(f"resampling drift {drift:.3e} too large")
    out.meta["resample_drift"] = drift
    return out


# ---------------------------------------------------------------------------
# the positivity calculus
# ---------------------------------------------------------------------------

def product(p1, p2, tols=None):
    """Pointwise product path; P = P1 + gamma1^-T P2 gamma1^-1."""
    for p in (p1, p2):
        if p.min_eig_P <= 0.0:
            raise PositivityViolation("product requires two certified positive paths",
                                      min_eig=p.min_eig_P)
    if p1.n != p2.n:
        raise DimensionError("product requires equal half-dimension")
    if p1.m != p2.m or not np.allclose(p1.t, p2.t, atol=1e-12):
        p2 = resample(p2, p1.t, tols)
    g1, g2 = p1.gamma, p2.gamma
    inv1 = np.linalg.inv(g1)
    P = p1.P + np.swapaxes(inv1, 1, 2) @ p2.P @ inv1
    return _certify(p1.t, g1 @ g2, P, tols)


def perturb_rotation(path, theta, tols=None):
    """Multiply by the uniform rotation R_{2n}(theta s), s the normalized
    time; P gains theta/T . gamma^-T gamma^-1."""
    n = path.n
    T = path.t[-1] - path.t[0]
    s = (path.t - path.t[0]) / T
    gam = np.empty_like(path.gamma)
    for k in range(path.m):
        gam[k] = path.gamma[k] @ symplectic.rot_block(n, theta * s[k])
    inv = np.linalg.inv(path.gamma)
    P = path.P + (theta / T) * (np.swapaxes(inv, 1, 2) @ inv)
    return _certify(path.t, gam, P, tols)


def rotation_margin(path, theta):
    """min eig of the would-be generator of perturb_rotation(path, theta)."""
    T = path.t[-1] - path.t[0]
    inv = np.linalg.inv(path.gamma)
    P = path.P + (theta / T) * (np.swapaxes(inv, 1, 2) @ inv)
    return float(np.min(linalg.sym_min_eig_batch(P)))


def find_epsilon(path, hi=64.0, rel=1e-3):
    """Largest symmetric twist |theta| keeping positivity, by bisection.

    Returns (eps, theta_minus, theta_plus): the admissible interval is
    open and contains (-eps, eps).
    """
    def largest(direction):
        lo, up = 0.0, hi
        if rotation_margin(path, direction * up) > 0:
            return up
        while up - lo > rel * max(1.0, up):
            mid = 0.5 * (lo + up)
            if rotation_margin(path, direction * mid) > 0:
                lo = mid
            else:
                up = mid
        return lo

    plus = largest(+1.0)
    minus = largest(-1.0)
    return min(plus, minus), -minus, plus


@dataclass
class XPath:
    """Differentiable conjugating family X(t) with X' = J Y(t) X."""

    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray

    @staticmethod
    def constant(X, t_grid):
        t = np.asarray(t_grid, dtype=float)
        X = np.asarray(X, dtype=float)
        m, d = len(t), X.shape[0]
        return XPath(t=t, X=np.broadcast_to(X, (m, d, d)).copy(),
                     Y=np.zeros((m, d, d)))

    @staticmethod
    def exponential(Y, t_grid, tols=None):
        """X(t) = exp((t - t0) J Y) for a constant symmetric Y."""
        t = np.asarray(t_grid, dtype=float)
        Y = 0.5 * (np.asarray(Y, dtype=float) + np.asarray(Y, dtype=float).T)
        n = Y.shape[0] // 2
        J = symplectic.standard_J(n)
        X = linalg.mat_exp_batch((t - t[0])[:, None, None] * (J @ Y)[None], tols)
        m = len(t)
        return XPath(t=t, X=X, Y=np.broadcast_to(Y, (m, 2 * n, 2 * n)).copy())

    def check_generator(self, tol=1e-6):
        if len(self.t) < 3:
            return 0.0
        J = symplectic.standard_J(self.X.shape[1] // 2)
        dt = (self.t[2:] - self.t[:-2])[:, None, None]
        dX = (self.X[2:] - self.X[:-2]) / dt
        resid = dX - (J @ self.Y[1:-1]) @ self.X[1:-1]
        worst = float(np.max(np.abs(resid)))
        scale = max(1.0, float(np.abs(self.X).max()))
        if worst > tol * scale * 10:
            raise GeneratorInconsistency(
                f"family derivative residual {worst:.3e} exceeds tolerance")
        return worst


def conjugate_path(path, xpath, tols=None):
    """X^-1 gamma X with the exact transported generator.

    P_new = X^T (P - Y + gamma^-T Y gamma^-1) X.  Positivity is not
    guaranteed; returns a PositivePath when the certificate holds and a
    plain PathSamples otherwise.
    """
    if len(xpath.t) != path.m or not np.allclose(xpath.t, path.t, atol=1e-12):
        raise GridMismatch("conjugating family must share the path grid")
    xpath.check_generator()
    Xi = np.linalg.inv(xpath.X)
    gi = np.linalg.inv(path.gamma)
    inner = path.P - xpath.Y + np.swapaxes(gi, 1, 2) @ xpath.Y @ gi
    P = np.swapaxes(xpath.X, 1, 2) @ inner @ xpath.X
    gam = Xi @ path.gamma @ xpath.X
    return _certify(path.t, gam, P, tols, require_positive=False)


# ---------------------------------------------------------------------------
# joining two group elements
# ---------------------------------------------------------------------------

def _complex_from_real(Q):
    n = Q.shape[0] // 2
    return Q[0::2, 0::2] + 1j * Q[1::2, 0::2]


def _real_from_complex(u):
    n = u.shape[0]
    Q = np.zeros((2 * n, 2 * n))
    Q[0::2, 0::2] = u.real
    Q[0::2, 1::2] = -u.imag
    Q[1::2, 0::2] = u.imag
    Q[1::2, 1::2] = u.real
    return Q


def _unitary_log(Q):
    """Skew generator K with exp(K) = Q for orthogonal symplectic Q.

    Q commutes with J, hence represents a unitary matrix in the complex
    structure; its angles come from the characteristic polynomial and its
    eigenvectors from Hermitian null-space computations.
    """
    u = _complex_from_real(Q)
    n = u.shape[0]
    coeffs = np.empty(n + 1, dtype=np.complex128)
    # complex Faddeev-LeVerrier
    coeffs[0] = 1.0
    work = u.copy()
    for k in range(1, n + 1):
        coeffs[k] = -np.trace(work) / k
        if k < n:
            work = u @ (work + coeffs[k] * np.eye(n))
    roots = linalg.kernel.polyroots_batch(coeffs[None])[0]
    # cluster equal angles
    angles = np.angle(roots)
    used = np.zeros(n, dtype=bool)
    K_c = np.zeros((n, n), dtype=np.complex128)
    remaining = list(range(n))
    while remaining:
        i = remaining[0]
        group = [j for j in remaining if abs(roots[j] - roots[i]) < 1e-6]
        lam = np.exp(1j * np.median(angles[group]))
        shifted = u - lam * np.eye(n)
        vals, vecs = linalg.herm_eig(shifted.conj().T @ shifted)
        basis = vecs[:, : len(group)]
        K_c += 1j * np.angle(lam) * (basis @ basis.conj().T)
        remaining = [j for j in remaining if j not in group]
    K_c = 0.5 * (K_c - K_c.conj().T)
    return _real_from_complex(K_c)


def chart_factors(A):
    """A = exp(H) exp(K): symmetric-Hamiltonian polar log H and skew
    rotation log K, both in the Lie algebra."""
    a = A.mat if isinstance(A, symplectic.SymplecticMatrix) else np.asarray(A, float)
    H = 0.5 * linalg.spd_log(a @ a.T)
    Q = linalg.mat_exp(-H) @ a
    K = _unitary_log(Q)
    resid = float(np.max(np.abs(linalg.mat_exp(H) @ linalg.mat_exp(K) - a)))
    if resid > 1e-8 * max(1.0, float(np.abs(a).max())):
        raise ConditioningError(f"chart factorization residual {resid:.3e}")
    return H, K


def _smoothstep(u):
    return u * u * (3.0 - 2.0 * u)


def _dsmoothstep(u):
    return 6.0 * u * (1.0 - u)


def join(A, B, k="auto", samples=None, tols=None):
    """Positive path from A to B: a C^1 two-chart base path through the
    identity, multiplied by the uniform twist R_{2n}(2 k pi t).

    The twist size is the smallest k >= 1 whose generator is positive on
    the whole grid; endpoints are exact.
    """
    tt = get_tols(tols)
    a = A.mat if isinstance(A, symplectic.SymplecticMatrix) else np.asarray(A, float)
    b = B.mat if isinstance(B, symplectic.SymplecticMatrix) else np.asarray(B, float)
    if a.shape != b.shape:
        raise DimensionError("join endpoints must share a dimension")
    n = a.shape[0] // 2
    J = symplectic.standard_J(n)
    HA, KA = chart_factors(a)
    HB, KB = chart_factors(b)
    t = _grid(0.0, 1.0, samples, tols)
    m = len(t)

    def base_and_S(s):
        if s <= 0.5:
            u = _smoothstep(1.0 - 2.0 * s)
            du = -2.0 * _dsmoothstep(1.0 - 2.0 * s)
            H, K = HA, KA
        else:
            u = _smoothstep(2.0 * s - 1.0)
            du = 2.0 * _dsmoothstep(2.0 * s - 1.0)
            H, K = HB, KB
        EK = linalg.mat_exp(u * K)
        beta = linalg.mat_exp(u * H) @ EK
        xi = du * (EK.T @ H @ EK + K)   # left-trivialized velocity
        S = -J @ xi                      # gamma^T P gamma for the base path
        return beta, 0.5 * (S + S.T)

    betas = np.empty((m, 2 * n, 2 * n))
    Ss = np.empty((m, 2 * n, 2 * n))
    for i, s in enumerate(t):
        betas[i], Ss[i] = base_and_S(s)
    need = max(0.0, -float(np.min(linalg.sym_min_eig_batch(Ss))))
    if k == "auto":
        k_use = max(1, int(np.ceil(need / (2.0 * np.pi) + 0.05)))
    else:
        k_use = int(k)
    while k_use <= tt.k_max:
        margins = linalg.sym_min_eig_batch(Ss + 2.0 * np.pi * k_use * np.eye(2 * n))
        if float(np.min(margins)) > 0.0:
            break
        if k != "auto":
            raise PositivityViolation(f"twist k = {k_use} is not positive")
        k_use += 1
    else:
        raise PositivityViolation(f"no positive twist below k_max = {tt.k_max}")

    gam = np.empty_like(betas)
    P = np.empty_like(betas)
    binv = np.linalg.inv(betas)
    for i, s in enumerate(t):
        R = symplectic.rot_block(n, 2.0 * np.pi * k_use * s)
        gam[i] = betas[i] @ R
        # P = P_base + 2 k pi beta^-T beta^-1, with beta^T P_base beta = S
        P[i] = binv[i].T @ (Ss[i] + 2.0 * np.pi * k_use * np.eye(2 * n)) @ binv[i]
    gam[0], gam[-1] = a, b  # chart endpoints are exact to ~1e-12; snap
    out = _certify(t, gam, P, tols)
    out.meta["k"] = k_use
    return out


# ---------------------------------------------------------------------------
# reparametrization
# ---------------------------------------------------------------------------

@dataclass
class TauSpec:
    """Strictly increasing piecewise-cubic reparametrization.

    Monotone cubic Hermite data on [t0, t1] with tau(t0) = t0,
    tau(t1) = t1; `end_slope_one` pins tau'(t0) = tau'(t1) = 1 (the
    variant whose retimed path keeps the end derivatives).
    """

    knots_t: np.ndarray
    knots_tau: np.ndarray
    end_slope_one: bool = False

    def __post_init__(self):
        self.knots_t = np.asarray(self.knots_t, dtype=float)
        self.knots_tau = np.asarray(self.knots_tau, dtype=float)
        if np.any(np.diff(self.knots_t) <= 0) or np.any(np.diff(self.knots_tau) < 0):
            raise MonotonicityError("tau knots must increase")
        if abs(self.knots_tau[0] - self.knots_t[0]) > 1e-12 or \
           abs(self.knots_tau[-1] - self.knots_t[-1]) > 1e-12:
            raise MonotonicityError("tau must fix the endpoints")
        self._slopes = self._monotone_slopes()

    @staticmethod
    def identity(t0=0.0, t1=1.0):
        return TauSpec(np.array([t0, t1]), np.array([t0, t1]), end_slope_one=True)

    @staticmethod
    def from_function(f, t0=0.0, t1=1.0, knots=33, end_slope_one=False):
        ts = np.linspace(t0, t1, knots)
        vals = np.array([f(x) for x in ts], dtype=float)
        vals = t0 + (vals - vals[0]) * (t1 - t0) / (vals[-1] - vals[0])
        return TauSpec(ts, vals, end_slope_one=end_slope_one)

    def _monotone_slopes(self):
        t, y = self.knots_t, self.knots_tau
        h = np.diff(t)
        d = np.diff(y) / h
        k = len(t)
        s = np.empty(k)
        if k == 2:
            s[:] = d[0]
        else:
            s[1:-1] = 0.5 * (d[:-1] + d[1:])
            s[0] = d[0]
            s[-1] = d[-1]
            # Fritsch-Carlson limiter
            for i in range(k - 1):
                if d[i] == 0:
                    s[i] = s[i + 1] = 0.0
                else:
                    a_, b_ = s[i] / d[i], s[i + 1] / d[i]
                    r = np.hypot(a_, b_)
                    if r > 3.0:
                        s[i] = 3.0 * a_ / r * d[i]
                        s[i + 1] = 3.0 * b_ / r * d[i]
        if self.end_slope_one:
            s[0] = 1.0
            s[-1] = 1.0
        return s

    def __call__(self, x):
        return self._eval(np.asarray(x, dtype=float), deriv=False)

    def deriv(self, x):
        return self._eval(np.asarray(x, dtype=float), deriv=True)

    def _eval(self, x, deriv):
        t, y, s = self.knots_t, self.knots_tau, self._slopes
        idx = np.clip(np.searchsorted(t, x) - 1, 0, len(t) - 2)
        h = t[idx + 1] - t[idx]
        u = (x - t[idx]) / h
        h00 = 2 * u ** 3 - 3 * u ** 2 + 1
        h10 = u ** 3 - 2 * u ** 2 + u
        h01 = -2 * u ** 3 + 3 * u ** 2
        h11 = u ** 3 - u ** 2
        if not deriv:
            return h00 * y[idx] + h10 * h * s[idx] + h01 * y[idx + 1] + h11 * h * s[idx + 1]
        d00 = 6 * u ** 2 - 6 * u
        d10 = 3 * u ** 2 - 4 * u + 1
        d01 = -d00
        d11 = 3 * u ** 2 - 2 * u
        return (d00 * y[idx] + d10 * h * s[idx] + d01 * y[idx + 1] + d11 * h * s[idx + 1]) / h

    def check_strict(self, samples=512):
        xs = np.linspace(self.knots_t[0], self.knots_t[-1], samples)
        dv = self.deriv(xs)
        if np.any(dv[1:-1] <= 0) or dv[0] < 0 or dv[-1] < 0:
            raise MonotonicityError("tau' must be positive")
        return float(dv.min())


def retime(path, tau, tols=None, homotopy_slices=0):
    """gamma(tau(t)) with the generator scaled by tau'.

    Returns a PositivePath when tau' > 0 on the whole grid; with a
    degenerate endpoint slope the certificate covers interior samples
    and a PathSamples is returned if an endpoint generator vanishes.
    Optionally also emits slices of the straight-line homotopy
    (1-s) t + s tau(t).
    """
    min_slope = tau.check_strict()
    gam = np.empty_like(path.gamma)
    P = np.empty_like(path.P)
    taut = tau(path.t)
    dtau = tau.deriv(path.t)
    for k in range(path.m):
        gam[k] = path_eval(path, taut[k])
        j = int(np.clip(np.searchsorted(path.t, taut[k]) - 1, 0, path.m - 2))
        w = (taut[k] - path.t[j]) / (path.t[j + 1] - path.t[j])
        P[k] = dtau[k] * ((1 - w) * path.P[j] + w * path.P[j + 1])
    out = _certify(path.t, gam, P, tols, require_positive=False,
                   interior_only=min_slope <= 0)
    if homotopy_slices:
        slices = []
        for s in np.linspace(0.0, 1.0, homotopy_slices + 2)[1:-1]:
            mix = TauSpec(tau.knots_t,
                          (1 - s) * tau.knots_t + s * tau.knots_tau,
                          end_slope_one=tau.end_slope_one)
            slices.append(retime(path, mix, tols))
        return out, slices
    return out


# ---------------------------------------------------------------------------
# block decomposition
# ---------------------------------------------------------------------------

def _track_eigenvalues(path, tols=None):
    """Eigenvalues per sample, matched for continuity (with linear
    prediction across crossings)."""
    roots = linalg.eigenvalues_batch(path.gamma, tols)
    m, d = roots.shape
    out = np.empty_like(roots)
    out[0] = linalg.sort_eigs(roots[0])
    for k in range(1, m):
        pred = out[k - 1] if k < 2 else 2 * out[k - 1] - out[k - 2]
        avail = list(roots[k])
        row = np.empty(d, dtype=complex)
        for i in range(d):
            j = int(np.argmin([abs(pred[i] - z) for z in avail]))
            row[i] = avail.pop(j)
        out[k] = row
    return out


def _symplectic_pairs(traj):
    """Partition trajectory indices into inverse-closed, conjugation-closed
    groups, read off at the best-resolved sample."""
    m, d = traj.shape
    spread = np.empty(m)
    for s in range(m):
        v = traj[s]
        dist = np.abs(v[:, None] - v[None, :]) + np.eye(d)
        spread[s] = dist.min()
    first = traj[int(np.argmax(spread))]
    unused = set(range(d))
    groups = []
    while unused:
        i = min(unused)
        group = {i}
        # inverse partner
        cands = [j for j in unused if j != i]
        j = min(cands, key=lambda j: abs(first[i] * first[j] - 1.0))
        group.add(j)
        # conjugate partners (for genuинely complex quadruples)
        for x in list(group):
            if abs(first[x].imag) > 1e-9:
                rest = [y for y in unused - group]
                if rest:
                    y = min(rest, key=lambda y: abs(first[y] - np.conj(first[x])))
                    if abs(first[y] - np.conj(first[x])) < 1e-6 * max(1.0, abs(first[x])):
                        group.add(y)
                        z = [w for w in unused - group]
                        if z:
                            w = min(z, key=lambda w: abs(first[y] * first[w] - 1.0))
                            group.add(w)
        groups.append(sorted(group))
        unused -= group
    return groups


def _group_separation(traj, g1, g2, exempt_pm_one=True):
    """Closest cross-group approach, ignoring meetings at +-1.

    Coincidences at the fixed points +-1 do not obstruct the invariant
    splitting (loops based at the identity meet there by construction).
    """
    a = traj[:, g1]
    b = traj[:, g2]
    dist = np.abs(a[:, :, None] - b[:, None, :])
    if exempt_pm_one:
        mid = 0.5 * (a[:, :, None] + b[:, None, :])
        at_pm1 = np.minimum(np.abs(mid - 1.0), np.abs(mid + 1.0)) < 1e-3
        dist = np.where(at_pm1, np.inf, dist)
    d = dist.min(axis=(1, 2))
    return float(d.min()), int(np.argmin(d))


def _eig_direction(mat, lam):
    """Unit eigendirection for the eigenvalue of `mat` nearest lam."""
    d = mat.shape[0]
    shifted = mat.astype(np.complex128) - complex(lam) * np.eye(d)
    _, vecs = linalg.herm_eig(shifted.conj().T @ shifted)
    return vecs[:, 0]


def _genuine_collision(path, traj, g1, g2, s_min):
    """Distinguish a transversal eigenvalue crossing from a collision.

    At a crossing the two eigendirections stay separated; at a
    non-diagonalizable coincidence they coalesce.  Tested at the samples
    flanking the closest approach.
    """
    m = path.m
    checks = []
    for s in {max(0, s_min - 2), s_min, min(m - 1, s_min + 2)}:
        a = traj[s, g1]
        b = traj[s, g2]
        i, j = np.unravel_index(np.argmin(np.abs(a[:, None] - b[None, :])),
                                (len(a), len(b)))
        u = _eig_direction(path.gamma[s], a[i])
        v = _eig_direction(path.gamma[s], b[j])
        overlap = abs(np.vdot(u, v))
        checks.append(overlap)
    # coalescing directions have overlap -> 1; crossings stay bounded away
    return min(checks) > 0.85


def _frame_from_sample(path, traj, g1, g2, s, tol):
    """Symplectic frame adapted to the two invariant subspaces at sample s."""
    n = path.n
    J = symplectic.standard_J(n)
    cols = []
    for g, other in ((g1, g2), (g2, g1)):
        q = _poly_from_roots(traj[s, other])
        Qm = q[0] * np.eye(2 * n)
        for c in q[1:]:
            Qm = Qm @ path.gamma[s] + c * np.eye(2 * n)
        basis, _ = linalg.range_basis(Qm, len(g))
        cols.append(_darboux_basis(basis, J, tol))
    return np.column_stack(cols)


def _try_constant_frame(path, traj, g1, g2, tol):
    """A single frame valid along the whole path (exact for block loops
    and their constant conjugates)."""
    seps = np.abs(traj[:, g1][:, :, None] - traj[:, g2][:, None, :]).min(axis=(1, 2))
    s_best = int(np.argmax(seps))
    try:
        X = _frame_from_sample(path, traj, g1, g2, s_best, tol)
    except ConditioningError:
        return None
    Xi = np.linalg.inv(X)
    blocks = Xi @ path.gamma @ X
    k1 = len(g1) // 2
    off = blocks.copy()
    off[:, :2 * k1, :2 * k1] = 0.0
    off[:, 2 * k1:, 2 * k1:] = 0.0
    resid = float(np.max(np.abs(off)))
    if resid > 1e-8 * max(1.0, float(np.abs(path.gamma).max())):
        return None
    return X, blocks, resid


def _poly_from_roots(root_row):
    c = np.array([1.0 + 0.0j])
    for r in root_row:
        c = np.convolve(c, np.array([1.0, -r]))
    return c.real  # conjugate-closed multiset -> real coefficients


def _darboux_basis(cols, J, tol):
    """Symplectic Gram-Schmidt: orthonormal-ish columns -> Darboux pairs
    (u_i, w_i) with u_i^T J w_i = -1, interleaved."""
    basis = []
    work = [cols[:, i].copy() for i in range(cols.shape[1])]
    while work:
        u = work.pop(0)
        nu = np.linalg.norm(u)
        if nu < 1e-12:
            continue
        u = u / nu
        pair_vals = [abs(u @ J @ w) for w in work]
        if not pair_vals:
            raise ConditioningError("odd symplectic subspace dimension")
        j = int(np.argmax(pair_vals))
        om = u @ J @ work[j]
        if abs(om) < tol:
            raise ConditioningError(f"symplectic pairing too small ({om:.3e})")
        w = work.pop(j) / (-om)   # u^T J w = -1
        rest = []
        for v in work:
            v = v - (v @ J @ w) / (u @ J @ w) * u
            v = v - (v @ J @ u) / (w @ J @ u) * w
            rest.append(v)
        work = rest
        basis.extend([u, w])
    return np.column_stack(basis)


def block_decompose(path, split=None, tols=None):
    """Split a path into two invariant blocks when its eigenvalue groups
    stay disjoint.

    Tracks the spectrum, forms the two invariant subspaces through
    polynomial spectral projectors, builds a continuously varying
    symplectic frame X(t) by Darboux Gram-Schmidt, and returns
    (block1, block2, frame) with gamma(t) = X(t) diag(b1, b2) X(t)^-1.
    """
    tt = get_tols(tols)
    n, m = path.n, path.m
    J = symplectic.standard_J(n)
    traj = _track_eigenvalues(path, tols)
    groups = _symplectic_pairs(traj)
    if len(groups) < 2:
        raise NotDecomposable("spectrum forms a single symplectic group")

    # merge groups only at genuine (non-diagonalizable) coincidences;
    # transversal crossings of distinct invariant subspaces are fine
    merged = [set(g) for g in groups]
    changed = True
    while changed:
        changed = False
        for i in range(len(merged)):
            for j in range(i + 1, len(merged)):
                sep, s_min = _group_separation(traj, sorted(merged[i]), sorted(merged[j]))
                if sep < 1e-6 or (
                    sep < 1e-3 and _genuine_collision(
                        path, traj, sorted(merged[i]), sorted(merged[j]), s_min)):
                    merged[i] |= merged[j]
                    del merged[j]
                    changed = True
                    break
            if changed:
                break
    if len(merged) < 2:
        raise NotDecomposable("eigenvalue groups collide along the path")
    if split is None:
        g1 = sorted(merged[0])
    else:
        g1 = sorted(set().union(*[merged[i] for i in split]))
    g2 = sorted(set(range(2 * n)) - set(g1))
    k1 = len(g1) // 2

    const = _try_constant_frame(path, traj, g1, g2, tt.subspace_cond)
    if const is not None:
        X0, blocks, off_resid = const
        X = np.broadcast_to(X0, (m, 2 * n, 2 * n)).copy()
    else:
        X = np.empty((m, 2 * n, 2 * n))
        seps = np.abs(traj[:, g1][:, :, None] - traj[:, g2][:, None, :]).min(axis=(1, 2))
        s0 = int(np.argmax(seps))
        order = list(range(s0, m)) + list(range(s0 - 1, -1, -1))
        prev = None
        done = {}
        for s in order:
            prev = done.get(s + 1) if s < s0 else (done.get(s - 1) if s > s0 else None)
            if seps[s] < 1e-4 and prev is not None:
                done[s] = prev  # degenerate sample: carry the frame
                continue
            Xs = _frame_from_sample(path, traj, g1, g2, s, tt.subspace_cond)
            if prev is not None:
                # align Darboux pairs with the neighbor frame (sign/order)
                Xs = _align_frame(Xs, prev, k1, J)
            done[s] = Xs
        for s in range(m):
            X[s] = done[s]
        Xi = np.linalg.inv(X)
        blocks = Xi @ path.gamma @ X
        off = blocks.copy()
        off[:, :2 * k1, :2 * k1] = 0.0
        off[:, 2 * k1:, 2 * k1:] = 0.0
        off_resid = float(np.max(np.abs(off)))
        if off_resid > 1e-5 * max(1.0, float(np.abs(path.gamma).max())):
            raise ConditioningError(f"off-block residual {off_resid:.3e}")

    b1 = _samples_to_path(path.t, blocks[:, :2 * k1, :2 * k1].copy(), tols)
    b2 = _samples_to_path(path.t, blocks[:, 2 * k1:, 2 * k1:].copy(), tols)
    frame = XPath(t=path.t.copy(), X=X, Y=_estimate_Y(path.t, X, J))
    b1.meta["off_block_residual"] = off_resid
    b1.meta["constant_frame"] = const is not None
    return b1, b2, frame


def _align_frame(Xs, prev, k1, J):
    """Match the new frame's Darboux pairs to the previous frame."""
    d = Xs.shape[0]
    out = Xs.copy()
    for blk_start, blk_end in ((0, 2 * k1), (2 * k1, d)):
        pairs = [(Xs[:, i], Xs[:, i + 1]) for i in range(blk_start, blk_end, 2)]
        used = [False] * len(pairs)
        cols = []
        for i in range(blk_start, blk_end, 2):
            ref = prev[:, i]
            scores = []
            for pidx, (u, w) in enumerate(pairs):
                if used[pidx]:
                    scores.append(-1.0)
                else:
                    scores.append(max(abs(ref @ u), abs(ref @ w)) /
                                  max(np.linalg.norm(ref), 1e-300))
            pidx = int(np.argmax(scores))
            used[pidx] = True
            u, w = pairs[pidx]
            # choose the in-pair rotation closest to the reference pair
            best, best_score = (u, w), -np.inf
            for cand in ((u, w), (-u, -w), (w, -u), (-w, u)):
                score = cand[0] @ prev[:, i] + cand[1] @ prev[:, i + 1]
                if score > best_score:
                    best, best_score = cand, score
            cols.extend(best)
        for j, col in enumerate(cols):
            out[:, blk_start + j] = col
    return out


def _estimate_Y(t, X, J):
    m = len(t)
    Y = np.zeros_like(X)
    if m < 3:
        return Y
    dt = (t[2:] - t[:-2])[:, None, None]
    dX = (X[2:] - X[:-2]) / dt
    Y[1:-1] = -J @ (dX @ np.linalg.inv(X[1:-1]))
    Y[0], Y[-1] = Y[1], Y[-2]
    return 0.5 * (Y + np.swapaxes(Y, 1, 2))


def _samples_to_path(t, gam, tols=None):
    """Wrap raw samples: generator from central differences, certificate
    over interior samples."""
    m = len(t)
    n = gam.shape[1] // 2
    J = symplectic.standard_J(n)
    P = np.zeros_like(gam)
    if m >= 3:
        dt = (t[2:] - t[:-2])[:, None, None]
        dg = (gam[2:] - gam[:-2]) / dt
        P[1:-1] = -J @ (dg @ np.linalg.inv(gam[1:-1]))
        P[0], P[-1] = P[1], P[-2]
    P = 0.5 * (P + np.swapaxes(P, 1, 2))
    return _certify(t, gam, P, tols, require_positive=False, interior_only=True)


def part_retime(path, tau, split=None, tols=None):
    """Retime the second block of a decomposable path and recombine."""
    b1, b2, frame = block_decompose(path, split=split, tols=tols)
    b2r = retime(b2, tau, tols)
    m = path.m
    k1 = b1.gamma.shape[1] // 2
    gam = np.empty_like(path.gamma)
    for s in range(m):
        blk = np.zeros((2 * path.n, 2 * path.n))
        blk[: 2 * k1, : 2 * k1] = b1.gamma[s]
        blk[2 * k1 :, 2 * k1 :] = b2r.gamma[s]
        gam[s] = frame.X[s] @ blk @ np.linalg.inv(frame.X[s])
    return _samples_to_path(path.t, gam, tols)


# ---------------------------------------------------------------------------
# concatenation with smoothing
# ---------------------------------------------------------------------------

def smooth_concat(p1, p2, window, tols=None):
    """Concatenate two positive paths meeting at a common matrix and blend
    their generators inside the window for a C^1 result.

    The generators are mixed by a smoothstep partition of unity (the
    positive cone is convex), and the path is re-integrated from the
    start of the window onward.  Reports the C^0 distance to the raw
    concatenation.
    """
    tt = get_tols(tols)
    jump = float(np.max(np.abs(p1.end - p2.start)))
    if jump > tt.junction * max(1.0, float(np.abs(p1.end).max())):
        raise GridMismatch(f"junction mismatch {jump:.3e}")
    shift = p1.t[-1] - p2.t[0]
    t2 = p2.t + shift
    t_j = p1.t[-1]
    t = np.concatenate([p1.t, t2[1:]])
    gam_raw = np.concatenate([p1.gamma, p2.gamma[1:]])
    P1_end = p1.P[-1]
    P2_start = p2.P[0]

    def P_func(s):
        if s <= t_j - window:
            return _interp_P(p1, s)
        if s >= t_j + window:
            return _interp_P(p2, s - shift)
        u = (s - (t_j - window)) / (2.0 * window)
        w = _smoothstep(u)
        left = _interp_P(p1, min(s, t_j)) if s <= t_j else P1_end
        right = _interp_P(p2, max(s, t_j) - shift) if s >= t_j else P2_start
        return (1.0 - w) * left + w * right

    # keep p1 samples before the window, integrate through and after
    mask_pre = t <= t_j - window
    pre_end = int(np.sum(mask_pre)) - 1
    gam = gam_raw.copy()
    P = np.empty_like(gam)
    for i, s in enumerate(t):
        P[i] = P_func(s)
    J = symplectic.standard_J(p1.n)
    g = gam_raw[pre_end]
    for i in range(pre_end, len(t) - 1):
        h = t[i + 1] - t[i]
        Pm = P_func(0.5 * (t[i] + t[i + 1]))
        g = linalg.mat_exp(h * (J @ Pm)) @ g
        gam[i + 1] = g
    out = _certify(t, gam, P, tols)
    out.meta["c0_distance"] = float(np.max(np.abs(gam - gam_raw)))
    out.meta["junction_jump"] = jump
    return out


def _interp_P(path, s):
    j = int(np.clip(np.searchsorted(path.t, s) - 1, 0, path.m - 2))
    w = (s - path.t[j]) / (path.t[j + 1] - path.t[j])
    w = float(np.clip(w, 0.0, 1.0))
    return (1 - w) * path.P[j] + w * path.P[j + 1]


# ---------------------------------------------------------------------------
# integrate() dispatch over specs
# ---------------------------------------------------------------------------

def integrate(spec, samples=None, tols=None):
    """Build a certified path from a declarative spec."""
    if isinstance(spec, PathSpec):
        kind, p = spec.kind, spec.payload
    else:
        obj = dict(spec)
        kind = obj.pop("kind")
        p = obj
    if kind == "rotation_loop":
        return rotation_loop(p["ks"], samples=samples, tols=tols)
    if kind == "alpha_family":
        base = p.get("base")
        if isinstance(base, dict):
            base = symplectic.make_normal(symplectic.NormalFormSpec.from_json(base))
        return alpha_family_path(base, p["alpha0"], p["alpha1"],
                                 samples=samples, tols=tols)
    if kind == "join":
        A = symplectic.load_matrix_json(p["A"])
        B = symplectic.load_matrix_json(p["B"])
        return join(A, B, k=p.get("k", "auto"), samples=samples, tols=tols)
    if kind == "samples":
        t = np.asarray(p["t"], dtype=float)
        gam = np.asarray(p["gamma"], dtype=float)
        return _samples_to_path(t, gam, tols)
    if kind == "product":
        return product(integrate(p["first"], samples, tols),
                       integrate(p["second"], samples, tols), tols)
    if kind == "conjugated":
        base = integrate(p["base"], samples, tols)
        X = np.asarray(p["X"], dtype=float)
        return conjugate_path(base, XPath.constant(X, base.t), tols)
    if kind == "retimed":
        base = integrate(p["base"], samples, tols)
        tau = TauSpec(np.asarray(p["knots_t"], float), np.asarray(p["knots_tau"], float),
                      end_slope_one=p.get("end_slope_one", False))
        return retime(base, tau, tols)
    if kind == "concat":
        parts = [integrate(q, samples, tols) for q in p["parts"]]
        out = parts[0]
        for nxt in parts[1:]:
            out = smooth_concat(out, nxt, window=p.get("window", 0.02), tols=tols)
        return out
    raise SympathError(f"unknown path spec kind {kind!r}")
