"""Eigenvalue grouping, trace-coordinate reduction, discriminants and
stratum classification for half-dimensions 1, 2 and 3.

Spectra of symplectic matrices come in quadruples {lam, 1/lam, conj(lam),
1/conj(lam)} that collapse to pairs on the unit circle and on the real
axis.  For n = 2 (n = 3) the substitution mu = lam + 1/lam reduces the
palindromic characteristic polynomial to a quadratic (cubic) in mu whose
discriminant separates the open regions.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg, symplectic
from .config import get_tols
from .errors import AmbiguousStratum, DimensionError, RealnessError

# stratum labels; `detail` carries the sign/location refinements
STRATA = (
    "O_C", "O_U", "O_R", "O_UR",
    "B_U_plus", "B_U_minus", "B_R",
    "B_U_pm1", "B_R_pm1", "B_pm1",
    "B_UD", "B_RD",
    "O_CU", "O_CR", "B_U2", "B_U3",
    "generic_other",
)


@dataclass
class EigGroup:
    """Cluster of algebraically equal eigenvalues."""

    value: complex
    alg: int
    geo: int
    location: str   # "U" | "R" | "plus_one" | "minus_one" | "C"

    def to_json(self):
        return {
            "value": [float(self.value.real), float(self.value.imag)],
            "alg": self.alg, "geo": self.geo, "location": self.location,
        }


@dataclass
class SpectrumReport:
    n: int
    eigenvalues: np.ndarray
    groups: list
    mu: list
    sigma: list
    delta: float | None
    stratum: str
    detail: str = ""

    def to_json(self):
        return {
            "n": self.n,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "quadruples": [g.to_json() for g in self.groups],
            "mu": [[float(np.real(m)), float(np.imag(m))] for m in self.mu],
            "sigma": [float(s) for s in self.sigma],
            "delta": None if self.delta is None else float(self.delta),
            "stratum": self.stratum,
            "detail": self.detail,
        }


def _mat(M):
    return M.mat if isinstance(M, symplectic.SymplecticMatrix) else linalg.as_square(M)


def cluster_eigs(eigs, tols=None):
    """Single-linkage clusters of numerically coincident eigenvalues."""
    t = get_tols(tols)
    vals = np.asarray(eigs, dtype=np.complex128)
    m = len(vals)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            r = t.alg_cluster_rel * max(1.0, abs(vals[i]), abs(vals[j]))
            if abs(vals[i] - vals[j]) <= r:
                parent[find(i)] = find(j)
    byroot = {}
    for i in range(m):
        byroot.setdefault(find(i), []).append(i)
    clusters = []
    for idx in byroot.values():
        vv = vals[idx]
        clusters.append((complex(vv.mean()), len(idx)))
    clusters.sort(key=lambda c: (round(c[0].real, 9), round(c[0].imag, 9)))
    return clusters


def locate(z, tols=None):
    """Band test: which region of the complex plane hosts eigenvalue z."""
    t = get_tols(tols)
    if abs(z - 1.0) <= t.pm_one_band:
        return "plus_one"
    if abs(z + 1.0) <= t.pm_one_band:
        return "minus_one"
    on_u = abs(abs(z) - 1.0) <= t.unit_band
    on_r = abs(z.imag) <= t.real_band
    if on_u and on_r:
        # within both bands but outside the wider +-1 band: contradictory
        raise AmbiguousStratum(f"eigenvalue {z} sits in both U and R bands",
                               candidates=["U", "R"])
    if on_u:
        return "U"
    if on_r:
        return "R"
    return "C"


def _poly_deriv(coeffs):
    d = len(coeffs) - 1
    return coeffs[:-1] * np.arange(d, 0, -1)


def _refine_cluster_center(coeffs, z0, mult, iters=8):
    """Polish a size-`mult` root-cluster center.

    The center of an m-fold root is a simple root of the (m-1)-th
    derivative, so Newton there converges to machine precision even
    though the individual roots carry eps**(1/m) fuzz.
    """
    q = np.asarray(coeffs, dtype=np.complex128)
    for _ in range(mult - 1):
        q = _poly_deriv(q)
    dq = _poly_deriv(q)
    z = complex(z0)
    for _ in range(iters):
        qv = np.polyval(q, z)
        dv = np.polyval(dq, z)
        if abs(dv) < 1e-300:
            break
        step = qv / dv
        z -= step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    # keep the polish only if it stayed inside the cluster's fuzz zone
    if abs(z - z0) < 10.0 * max(1.0, abs(z0)) * 1e-3:
        return z
    return complex(z0)


def geometric_multiplicity(M, z, tols=None):
    """dim ker(M - z I) via the singular-value rank threshold."""
    t = get_tols(tols)
    a = _mat(M)
    scale = max(1.0, float(np.linalg.norm(a)))
    shifted = a.astype(np.complex128) - complex(z) * np.eye(a.shape[0])
    return linalg.null_rank(shifted, t.rank_svd_rel, scale=scale)


def spectrum_groups(M, tols=None):
    """Clustered eigenvalues with algebraic/geometric multiplicity and location."""
    t = get_tols(tols)
    a = _mat(M)
    eigs = linalg.eigenvalues(a, tols=t)
    coeffs = linalg.char_poly(a)
    groups = []
    for value, alg in cluster_eigs(eigs, t):
        if alg > 1:
            value = _refine_cluster_center(coeffs, value, alg)
        loc = locate(value, t)
        if loc in ("plus_one", "minus_one"):
            value = complex(1.0 if loc == "plus_one" else -1.0)
        elif loc == "U":
            value = complex(np.exp(1j * np.angle(value)))
        elif loc == "R":
            value = complex(value.real)
        geo = geometric_multiplicity(a, value, t) if alg > 1 else 1
        groups.append(EigGroup(value=value, alg=alg, geo=geo, location=loc))
    return eigs, groups


def mu_reduce(M, tols=None):
    """Trace coordinates: sigma from the characteristic polynomial and the
    roots mu of the reduced half-degree polynomial (n = 2 or 3 only)."""
    a = _mat(M)
    n = a.shape[0] // 2
    if n not in (2, 3):
        raise DimensionError("mu reduction is defined for half-dimension 2 or 3")
    c = linalg.char_poly(a)
    # palindromic: average the mirrored coefficients
    if n == 2:
        s1 = -0.5 * (c[1] + c[3])
        s2 = float(c[2])
        sigma = [s1, s2]
        # x^2 - s1 x + (s2 - 2)
        disc = s1 * s1 - 4.0 * (s2 - 2.0)
        root = np.sqrt(complex(disc))
        mu = [(s1 + root) / 2.0, (s1 - root) / 2.0]
    else:
        s1 = -0.5 * (c[1] + c[5])
        s2 = 0.5 * (c[2] + c[4])
        s3 = -float(c[3])
        sigma = [s1, s2, s3]
        mu = _cubic_roots(1.0, -s1, s2 - 3.0, -(s3 - 2.0 * s1))
    mu = [complex(z) for z in mu]
    mu = [z.real if abs(z.imag) <= 1e-9 * max(1.0, abs(z)) else z for z in mu]
    return mu, sigma


def _cubic_roots(a, b, c, d):
    roots = linalg.kernel.polyroots_batch(np.array([[a, b, c, d]], dtype=np.complex128))[0]
    return sorted(roots, key=lambda z: (round(z.real, 12), z.imag))


def discriminant(M, tols=None):
    """Sign-separating discriminant in the trace coordinates.

    n = 2:  s1^2 - 4 s2 + 8, positive exactly when the two mu are real
    and distinct.  n = 3:  B^2 - 4AC with
        A = -3 (s2 - s1^2/3 - 3)
        B = 9 s3 - 15 s1 - s1 s2
        C = (s2 - 3)^2 - 3 s1 (s3 - 2 s1),
    negative exactly when all three mu are real.
    """
    a = _mat(M)
    n = a.shape[0] // 2
    if n == 2:
        _, (s1, s2) = mu_reduce(a, tols)
        return s1 * s1 - 4.0 * s2 + 8.0
    if n == 3:
        _, (s1, s2, s3) = mu_reduce(a, tols)
        A = -3.0 * (s2 - s1 * s1 / 3.0 - 3.0)
        B = 9.0 * s3 - 15.0 * s1 - s1 * s2
        C = (s2 - 3.0) ** 2 - 3.0 * s1 * (s3 - 2.0 * s1)
        return B * B - 4.0 * A * C
    raise DimensionError("discriminant is defined for half-dimension 2 or 3")


def d_omega(M, omega, tols=None):
    """Real-valued unit-circle determinant function.

    (-1)^(n-1) omega^(-n) det(M - omega I); the imaginary residue is
    checked and discarded.
    """
    t = get_tols(tols)
    a = _mat(M)
    n = a.shape[0] // 2
    w = complex(omega)
    if abs(abs(w) - 1.0) > 1e-10:
        raise DimensionError("omega must lie on the unit circle")
    val = (-1.0) ** (n - 1) * w ** (-n) * np.linalg.det(a - w * np.eye(2 * n))
    scale = max(1.0, abs(val))
    if abs(val.imag) > 1e-7 * scale:
        raise RealnessError(f"imaginary residue {val.imag:.3e} too large")
    return float(val.real)


def is_truly_hyperbolic(M, tols=None):
    """No eigenvalue within the unit-circle band."""
    t = get_tols(tols)
    a = _mat(M)
    eigs = linalg.eigenvalues(a, tols=t)
    return bool(np.all(np.abs(np.abs(eigs) - 1.0) > t.unit_band))


def unit_circle_witness(eigs, tols=None):
    t = get_tols(tols)
    return bool(np.any(np.abs(np.abs(np.asarray(eigs)) - 1.0) <= t.unit_band))


def _perturbation_sign(M, tols=None, alphas=(1e-4, 3e-4, 1e-3)):
    """Sign of the discriminant along the standard rotation perturbation.

    M -> M diag(R(alpha), ...) for small alpha > 0; the path is positive,
    so the sign tells which open region a boundary matrix feeds into.
    """
    a = _mat(M)
    n = a.shape[0] // 2
    for al in alphas:
        d_plus = discriminant(a @ symplectic.rot_block(n, al), tols)
        d_minus = discriminant(a @ symplectic.rot_block(n, -al), tols)
        if abs(d_plus) > 1e-10 and abs(d_minus) > 1e-10 and np.sign(d_plus) != np.sign(d_minus):
            return int(np.sign(d_plus))
    return 0


def _real_sign_detail(groups):
    # one tag per (lam, 1/lam) pair
    pos = sum(g.alg for g in groups if g.location == "R" and g.value.real > 0)
    neg = sum(g.alg for g in groups if g.location == "R" and g.value.real < 0)
    return "R+" * (pos // 2) + "R-" * (neg // 2)


def classify(M, tols=None):
    """Stratum of a symplectic matrix from eigenvalue locations, algebraic
    and geometric multiplicity, and (for the codimension-1 unit-circle
    wall in half-dimension 2) the rotation-perturbation sign test."""
    t = get_tols(tols)
    a = _mat(M)
    n = a.shape[0] // 2
    if n not in (1, 2, 3):
        raise DimensionError("classification supports half-dimension 1, 2, 3")
    eigs, groups = spectrum_groups(a, t)
    mu, sigma, delta = [], [], None
    if n in (2, 3):
        mu, sigma = mu_reduce(a, t)
        delta = discriminant(a, t)

    # tallies by location
    count = {"U": 0, "R": 0, "plus_one": 0, "minus_one": 0, "C": 0}
    for g in groups:
        count[g.location] += g.alg
    simple = all(g.alg == 1 for g in groups)
    detail = ""

    if np.max(np.abs(a - np.eye(2 * n))) < t.pm_one_band:
        stratum, detail = "generic_other", "identity; isolated boundary point"
    elif np.max(np.abs(a + np.eye(2 * n))) < t.pm_one_band:
        stratum, detail = "generic_other", "minus identity; isolated boundary point"
    elif n == 1:
        stratum, detail = _classify_sp2(groups)
    elif n == 2:
        stratum, detail = _classify_sp4(a, groups, count, simple, t)
    else:
        stratum, detail = _classify_sp6(groups, count, simple)

    return SpectrumReport(
        n=n, eigenvalues=eigs, groups=groups, mu=mu, sigma=sigma,
        delta=delta, stratum=stratum, detail=detail,
    )


def _classify_sp2(groups):
    g = groups[0]
    if len(groups) == 2:
        if all(h.location == "U" for h in groups):
            return "O_U", ""
        if all(h.location == "R" for h in groups):
            return "O_R", _real_sign_detail(groups)
        return "generic_other", "mixed pair"
    if g.location in ("plus_one", "minus_one"):
        if g.geo < 2:
            return "B_pm1", g.location
        return "generic_other", f"diagonalizable at {g.location}"
    return "generic_other", "unexpected double point"


def _classify_sp4(a, groups, count, simple, t):
    # open regions
    if count["C"] == 4:
        return "O_C", ""
    if simple and count["U"] == 4:
        return "O_U", ""
    if simple and count["R"] == 4:
        return "O_R", _real_sign_detail(groups)
    if simple and count["U"] == 2 and count["R"] == 2:
        return "O_UR", ""

    doubles = [g for g in groups if g.alg == 2]
    quads = [g for g in groups if g.alg == 4]
    pm = count["plus_one"] + count["minus_one"]

    if quads and quads[0].location in ("plus_one", "minus_one"):
        g = quads[0]
        if g.geo == 1:
            return "B_pm1", g.location
        return "generic_other", f"multiplicity 4 at {g.location}, geo {g.geo}"
    if len(doubles) == 2 and all(g.location == "U" for g in doubles):
        if all(g.geo == 1 for g in doubles):
            s = _perturbation_sign(a, t)
            if s < 0:
                return "B_U_minus", "feeds O_C"
            if s > 0:
                return "B_U_plus", "feeds O_U"
            return "B_U_minus", "perturbation sign indeterminate"
        if all(g.geo == 2 for g in doubles):
            return "B_UD", "diagonalizable double pair on U; " + _splitting_note()
        return "generic_other", "mixed Jordan structure on U"
    if len(doubles) == 2 and all(g.location == "R" for g in doubles):
        if all(g.geo == 1 for g in doubles):
            return "B_R", _real_sign_detail(groups)
        return "B_RD", "diagonalizable double pair on R"
    if pm == 2 and count["U"] == 2:
        g = [h for h in groups if h.location in ("plus_one", "minus_one")][0]
        tag = g.location
        if g.geo == 1:
            return "B_U_pm1", tag
        return "generic_other", f"diagonalizable pair at {tag} with U pair"
    if pm == 2 and count["R"] == 2:
        g = [h for h in groups if h.location in ("plus_one", "minus_one")][0]
        if g.geo == 1:
            return "B_R_pm1", g.location
        return "generic_other", f"diagonalizable pair at {g.location} with R pair"
    if count["plus_one"] == 2 and count["minus_one"] == 2:
        return "generic_other", "pairs at both +1 and -1"
    return "generic_other", "unlisted multiplicity pattern"


def _classify_sp6(groups, count, simple):
    if simple and count["C"] == 4 and count["U"] == 2:
        return "O_CU", ""
    if simple and count["C"] == 4 and count["R"] == 2:
        return "O_CR", ""
    if simple and count["U"] == 6:
        return "O_U", ""
    if simple and count["R"] == 6:
        return "O_R", _real_sign_detail(groups)
    if simple and count["U"] == 4 and count["R"] == 2:
        return "O_UR", ""
    triples = [g for g in groups if g.alg == 3 and g.location == "U"]
    if len(triples) == 2:
        if all(g.geo == 1 for g in triples):
            return "B_U3", ""
        return "generic_other", f"triple on U with geo {triples[0].geo}"
    doubles_u = [g for g in groups if g.alg == 2 and g.location == "U"]
    singles_u = [g for g in groups if g.alg == 1 and g.location == "U"]
    if len(doubles_u) == 2 and len(singles_u) == 2 and all(g.geo == 1 for g in doubles_u):
        return "B_U2", ""
    return "generic_other", "unlisted half-dimension-3 pattern"


def _splitting_note():
    return ("splitting-number refinement not computed; "
            "classification of diagonalizable double points on U uses the "
            "perturbation test only")
