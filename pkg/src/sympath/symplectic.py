"""Symplectic matrices, the standard form J, normal forms, sums and
conjugation.

Conventions: coordinates are interleaved as (x1, y1, ..., xn, yn), so
J is the block diagonal of n copies of [[0, -1], [1, 0]] and Darboux
pairs occupy adjacent columns.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .config import get_tols
from .errors import ConstraintError, DimensionError, SingularityError, SymplecticDefect

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def standard_J(n):
    """Block-diagonal standard form: n copies of [[0,-1],[1,0]]."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DimensionError(f"half-dimension must be a positive integer, got {n!r}")
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = _J2
    return J


def rot2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rot_block(n, theta):
    """diag(R(theta), ..., R(theta)) on 2n coordinates."""
    out = np.zeros((2 * n, 2 * n))
    r = rot2(theta)
    for i in range(n):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = r
    return out


def symplectic_defect(M):
    """max |M^T J M - J| for a square even-dimensional matrix."""
    a = linalg.as_square(M)
    if a.shape[0] % 2:
        raise DimensionError("symplectic matrices have even dimension")
    J = standard_J(a.shape[0] // 2)
    return float(np.max(np.abs(a.T @ J @ a - J)))


def pairing_residual(eigs, tols=None):
    """Worst residual of the inverse-closedness pairing lambda -> 1/lambda.

    Minimum-weight greedy matching; only meaningful for well-separated
    spectra (multiple roots carry the root-finding fuzz, so `validate`
    gates on the palindromic-coefficient form of the same property).
    """
    t = get_tols(tols)
    vals = list(np.asarray(eigs, dtype=np.complex128))
    worst = 0.0
    while vals:
        lam = vals.pop()
        if not vals:
            return abs(lam * lam - 1.0)
        j = int(np.argmin([abs(lam * mu - 1.0) for mu in vals]))
        worst = max(worst, abs(lam * vals[j] - 1.0))
        vals.pop(j)
    return worst


def palindromy_residual(M):
    """Deviation of the characteristic polynomial from self-reciprocality.

    The spectrum of a symplectic matrix is closed under inversion with
    matching multiplicities, which for det = 1 is equivalent to the
    coefficient symmetry c_k = c_(2n-k); this form stays exact at
    multiple eigenvalues.
    """
    c = linalg.char_poly(M)
    return float(np.max(np.abs(c - c[::-1]))), float(np.max(np.abs(c)))


@dataclass(frozen=True)
class SymplecticMatrix:
    """A certified element of the 2n x 2n symplectic group."""

    n: int
    mat: np.ndarray
    defect: float = 0.0

    @property
    def dim(self):
        return 2 * self.n

    def __matmul__(self, other):
        other_m = other.mat if isinstance(other, SymplecticMatrix) else other
        return validate(self.mat @ other_m)

    def inv(self):
        # M^-1 = J^-1 M^T J, exact up to the defect
        J = standard_J(self.n)
        return validate(-J @ self.mat.T @ J)

    def to_json(self):
        return {"n": self.n, "rows": [list(map(float, r)) for r in self.mat]}

    @staticmethod
    def from_json(obj, tols=None):
        rows = np.array(obj["rows"], dtype=np.float64)
        m = validate(rows, tols=tols)
        if int(obj.get("n", m.n)) != m.n:
            raise DimensionError("declared half-dimension does not match the matrix")
        return m


def validate(M, tols=None, tol=None):
    """Certify M as symplectic; raise SymplecticDefect with a report otherwise.

    Checks the structure equation, the determinant, and closedness of the
    spectrum under inversion (paired with relative tolerance).
    """
    t = get_tols(tols)
    a = linalg.as_square(M)
    if a.shape[0] % 2:
        raise DimensionError("symplectic matrices have even dimension")
    n = a.shape[0] // 2
    tol_symp = t.symp if tol is None else float(tol)
    scale = max(1.0, float(np.abs(a).max()) ** 2)
    defect = symplectic_defect(a)
    if defect > tol_symp * scale:
        raise SymplecticDefect(
            f"structure equation fails: |M^T J M - J| = {defect:.3e}", defect=defect
        )
    det = float(np.linalg.det(a))
    if abs(det - 1.0) > t.det * scale:
        raise SymplecticDefect(f"det(M) = {det!r} is not 1", defect=defect, det=det)
    if 2 * n <= linalg.MAX_EIG_DIM:
        pair, cscale = palindromy_residual(a)
        if pair > t.pairing_rel * max(1.0, cscale):
            raise SymplecticDefect(
                f"spectrum not closed under inversion (residual {pair:.3e})",
                defect=defect, det=det, pairing=pair,
            )
    return SymplecticMatrix(n=n, mat=a, defect=defect)


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------

NORMAL_KINDS = ("D", "R", "N1", "N2", "M2", "N3", "N3tilde")


@dataclass
class NormalFormSpec:
    """Parameters for one of the catalogued normal forms.

    params:
      D: [lambda];  R: [theta];  N1: [lambda, a];  M2: [lambda, c1, c2]
      N2/N3/N3tilde: [theta, b1, b2, b3(, b4)] - b4 is completed from the
      linear structure constraint when omitted.
    """

    kind: str
    params: list = field(default_factory=list)

    def to_json(self):
        p = list(map(float, self.params))
        if self.kind == "D":
            return {"kind": "D", "lam": p[0]}
        if self.kind == "R":
            return {"kind": "R", "theta": p[0]}
        if self.kind == "N1":
            return {"kind": "N1", "lam": p[0], "a": p[1]}
        if self.kind == "M2":
            return {"kind": "M2", "lam": p[0], "c": p[1:3]}
        return {"kind": self.kind, "theta": p[0], "b": p[1:]}

    @staticmethod
    def from_json(obj):
        kind = obj["kind"]
        if kind == "D":
            return NormalFormSpec("D", [obj["lam"]])
        if kind == "R":
            return NormalFormSpec("R", [obj["theta"]])
        if kind == "N1":
            return NormalFormSpec("N1", [obj["lam"], obj["a"]])
        if kind == "M2":
            return NormalFormSpec("M2", [obj["lam"], *obj["c"]])
        if kind in ("N2", "N3", "N3tilde"):
            return NormalFormSpec(kind, [obj["theta"], *obj["b"]])
        raise ConstraintError(f"unknown normal form kind {kind!r}")


def complete_b(theta, b, target):
    """Solve the linear constraint (b2-b3)cos + (b1+b4)sin = target for b4."""
    s, c = np.sin(theta), np.cos(theta)
    if len(b) == 4:
        b1, b2, b3, b4 = b
        if abs((b2 - b3) * c + (b1 + b4) * s - target) > 1e-9:
            raise ConstraintError("b does not satisfy the structure constraint")
        return (b1, b2, b3, b4)
    b1, b2, b3 = b
    if abs(s) < 1e-12:
        raise ConstraintError("sin(theta) = 0: cannot complete b4")
    b4 = (target - (b2 - b3) * c) / s - b1
    return (b1, b2, b3, b4)


def _n2_entries(theta, b):
    c, s = np.cos(theta), np.sin(theta)
    b1, b2, b3, b4 = b
    return np.array(
        [
            [c, b1, -s, b2],
            [0, c, 0, -s],
            [s, b3, c, b4],
            [0, s, 0, c],
        ]
    )


def _m2_entries(lam, c1, c2):
    return np.array(
        [
            [lam, c1, 1.0, 0.0],
            [0.0, 1.0 / lam, 0.0, 0.0],
            [0.0, c2, lam, -lam * c2],
            [0.0, -(lam ** -2), 0.0, 1.0 / lam],
        ]
    )


def _n3_entries(theta, b, tilde):
    c, s = np.cos(theta), np.sin(theta)
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    b1, b2, b3, b4 = b
    M = np.zeros((6, 6))
    M[0, :4] = [c, b1, -s, b2]
    M[1, :4] = [0, c, 0, -s]
    M[2, :4] = [s, b3, c, b4]
    M[3, :4] = [0, s, 0, c]
    if not tilde:
        f1, f2, g1, g2 = s2, c2, -c2, s2
        M[0, 4:] = [1, 0]
        M[2, 4:] = [0, 1]
        M[4, 4:] = [c, -s]
        M[5, 4:] = [s, c]
    else:
        f1, f2, g1, g2 = c2, -s2, -s2, -c2
        M[0, 4:] = [0, 1]
        M[2, 4:] = [1, 0]
        M[4, 4:] = [c, s]
        M[5, 4:] = [-s, c]
    M[4, 1], M[4, 3] = f1, f2
    M[5, 1], M[5, 3] = g1, g2
    return M


def make_normal(spec, tols=None):
    """Build the catalogued normal form and certify it."""
    kind, p = spec.kind, list(spec.params)
    if kind == "D":
        lam = p[0]
        if lam == 0:
            raise ConstraintError("D requires lambda != 0")
        mat = np.diag([lam, 1.0 / lam])
    elif kind == "R":
        mat = rot2(p[0])
    elif kind == "N1":
        lam, a = p
        if lam == 0:
            raise ConstraintError("N1 requires lambda != 0")
        mat = np.array([[lam, a], [0.0, lam]])
    elif kind == "M2":
        lam, c1, c2 = p
        if lam == 0:
            raise ConstraintError("M2 requires lambda != 0")
        mat = _m2_entries(lam, c1, c2)
    elif kind == "N2":
        b = complete_b(p[0], tuple(p[1:]), 0.0)
        mat = _n2_entries(p[0], b)
    elif kind == "N3":
        b = complete_b(p[0], tuple(p[1:]), 1.0)
        mat = _n3_entries(p[0], b, tilde=False)
    elif kind == "N3tilde":
        b = complete_b(p[0], tuple(p[1:]), -1.0)
        mat = _n3_entries(p[0], b, tilde=True)
    else:
        raise ConstraintError(f"unknown normal form kind {kind!r}")
    return validate(mat, tols=tols)


# ---------------------------------------------------------------------------
# sums and conjugation
# ---------------------------------------------------------------------------

def diamond_paper_layout(M1, M2):
    """Verbatim interleaved-quarter sum of two square block matrices.

    This is the printed layout [[A1,0,B1,0],[0,A2,0,B2],[C1,0,D1,0],
    [0,C2,0,D2]]; it is a permutation similarity of the direct sum (so
    the spectrum is the union) but it is symplectic w.r.t. the
    split-column convention, not in general w.r.t. the interleaved J
    used here.  Kept for the identities it satisfies verbatim, e.g.
    N2(theta, 0) against R(theta) with itself.
    """
    A = M1.mat if isinstance(M1, SymplecticMatrix) else np.asarray(M1, dtype=float)
    B = M2.mat if isinstance(M2, SymplecticMatrix) else np.asarray(M2, dtype=float)
    ma, mb = A.shape[0] // 2, B.shape[0] // 2
    m = ma + mb
    out = np.zeros((2 * m, 2 * m))
    out[:ma, :ma] = A[:ma, :ma]
    out[:ma, m : m + ma] = A[:ma, ma:]
    out[m : m + ma, :ma] = A[ma:, :ma]
    out[m : m + ma, m : m + ma] = A[ma:, ma:]
    out[ma:m, ma:m] = B[:mb, :mb]
    out[ma:m, m + ma :] = B[:mb, mb:]
    out[m + ma :, ma:m] = B[mb:, :mb]
    out[m + ma :, m + ma :] = B[mb:, mb:]
    return out


def diamond(M1, M2, tols=None):
    """Symplectic direct sum keeping Darboux pairs adjacent.

    Block-diagonal in the interleaved convention; always certified, with
    spectrum equal to the union of the factor spectra and entrywise
    associativity.
    """
    A = M1.mat if isinstance(M1, SymplecticMatrix) else np.asarray(M1, dtype=float)
    B = M2.mat if isinstance(M2, SymplecticMatrix) else np.asarray(M2, dtype=float)
    da, db = A.shape[0], B.shape[0]
    out = np.zeros((da + db, da + db))
    out[:da, :da] = A
    out[da:, da:] = B
    return validate(out, tols=tols)


def conjugate(M, X, tols=None):
    """X^-1 M X with spectrum preserved; X must be well conditioned."""
    a = M.mat if isinstance(M, SymplecticMatrix) else np.asarray(M, dtype=float)
    x = X.mat if isinstance(X, SymplecticMatrix) else np.asarray(X, dtype=float)
    if a.shape != x.shape:
        raise DimensionError("conjugation requires matching shapes")
    try:
        out = np.linalg.solve(x, a @ x)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(str(exc)) from exc
    if np.linalg.cond(x) > 1e12:
        raise SingularityError("conjugating matrix is numerically singular")
    return validate(out, tols=tols)


def random_symplectic(n, seed, tols=None):
    """Seeded random element: exp(J S1) exp(J S2), S_i symmetric in [-1, 1]."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    J = standard_J(n)
    mats = []
    for _ in range(2):
        S = rng.uniform(-1.0, 1.0, (2 * n, 2 * n))
        S = 0.5 * (S + S.T)
        mats.append(linalg.mat_exp(J @ S))
    return validate(mats[0] @ mats[1], tols=tols)


def load_matrix_json(path_or_obj, tols=None):
    if isinstance(path_or_obj, dict):
        return SymplecticMatrix.from_json(path_or_obj, tols=tols)
    with open(path_or_obj) as fh:
        return SymplecticMatrix.from_json(json.load(fh), tols=tols)
