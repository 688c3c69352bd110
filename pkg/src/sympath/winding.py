"""Polar coordinates on the 2x2 group, angle lifting, winding numbers and
loop indices.

Every 2x2 symplectic matrix factors uniquely as M(r, z) R(theta) with
M(r, z) = [[r, z], [z, (1 + z^2)/r]], r > 0: a positive-definite
unit-determinant factor times a rotation.  Along a positive path the
rotation angle is strictly increasing, which makes the lifted angle a
winding certificate; a loop's index is twice its winding number, and
block-decomposable loops sum their block indices.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg, paths, symplectic
from .config import get_tols
from .errors import DimensionError, NotDecomposable, SympathError


@dataclass
class PolarSp2:
    r: float
    z: float
    theta: float  # in [0, 2 pi)

    def reconstruct(self):
        M = np.array([[self.r, self.z],
                      [self.z, (1.0 + self.z ** 2) / self.r]])
        return M @ symplectic.rot2(self.theta)

    def to_json(self):
        return {"r": self.r, "z": self.z, "theta": self.theta}


def sp2_polar(M, tols=None):
    """Unique (r, z, theta) with M = [[r, z], [z, (1+z^2)/r]] R(theta)."""
    a = M.mat if isinstance(M, symplectic.SymplecticMatrix) else np.asarray(M, float)
    if a.shape != (2, 2):
        raise DimensionError("polar coordinates are defined on the 2x2 group")
    if abs(np.linalg.det(a) - 1.0) > 1e-8:
        raise DimensionError("matrix is not symplectic (det != 1)")
    G = a @ a.T
    # closed-form spd square root of a 2x2 with det 1
    s = np.sqrt(max(np.linalg.det(G), 0.0))
    trace = G[0, 0] + G[1, 1]
    denom = np.sqrt(max(trace + 2.0 * s, 1e-300))
    sqrtG = (G + s * np.eye(2)) / denom
    R = np.linalg.solve(sqrtG, a)
    theta = float(np.arctan2(R[1, 0], R[0, 0]) % (2.0 * np.pi))
    out = PolarSp2(r=float(sqrtG[0, 0]), z=float(sqrtG[0, 1]), theta=theta)
    resid = float(np.max(np.abs(out.reconstruct() - a)))
    if resid > 1e-10 * max(1.0, float(np.abs(a).max())):
        raise DimensionError(f"polar reconstruction residual {resid:.3e}")
    return out


@dataclass
class WindingRecord:
    lifted_theta: np.ndarray
    winding: float
    index: int | None      # 2 * winding for integer-winding loops
    strictly_increasing: bool

    def to_json(self):
        return {
            "lifted_theta": [float(x) for x in self.lifted_theta],
            "winding": float(self.winding),
            "index": self.index,
            "strictly_increasing": self.strictly_increasing,
        }


def sp2_winding(path, tols=None):
    """Continuous angle lift of a sampled 2x2 path.

    The step between consecutive samples must stay below pi/2 for the
    lift to be valid (grid density check).  For certified positive paths
    the lift must be strictly increasing; a loop gets an integer winding
    and index 2k.
    """
    if path.n != 1:
        raise DimensionError("winding is computed on 2x2 paths")
    thetas = np.array([sp2_polar(g).theta for g in path.gamma])
    lift = np.empty_like(thetas)
    lift[0] = thetas[0]
    for k in range(1, len(thetas)):
        step = (thetas[k] - thetas[k - 1] + np.pi) % (2.0 * np.pi) - np.pi
        if abs(step) >= np.pi / 2:
            raise SympathError(
                f"angle step {step:.3f} at sample {k} too large; refine the grid")
        lift[k] = lift[k - 1] + step
    increasing = bool(np.all(np.diff(lift) > 0))
    winding = float((lift[-1] - lift[0]) / (2.0 * np.pi))
    index = None
    if path.is_loop(1e-6):
        k = int(round(winding))
        if abs(winding - k) < 1e-6:
            index = 2 * k
    if path.min_eig_P > 0 and not increasing:
        raise SympathError("certified positive 2x2 path with non-increasing angle")
    return WindingRecord(lifted_theta=lift, winding=winding, index=index,
                         strictly_increasing=increasing)


def loop_index(loop, split=None, tols=None):
    """Index of a loop decomposable into 2x2 blocks: sum of block indices."""
    if not loop.is_loop(1e-6):
        raise SympathError("loop_index requires a closed path")
    return _index_rec(loop, split, tols)


def _index_rec(path, split, tols):
    if path.n == 1:
        rec = sp2_winding(path, tols)
        if rec.index is None:
            raise NotDecomposable("block winding is not an integer")
        return rec.index
    b1, b2, _ = paths.block_decompose(path, split=split, tols=tols)
    return _index_rec(b1, None, tols) + _index_rec(b2, None, tols)


@dataclass
class Unrealizable:
    n: int
    m: int
    reason: str

    def to_json(self):
        return {"n": self.n, "m": self.m, "unrealizable": True, "reason": self.reason}


def realize_index(n, m, samples=None, tols=None):
    """A certified positive loop in half-dimension n with winding m.

    For m >= n the loop is the block rotation with winding vector
    (m - n + 1, 1, ..., 1); below n no positive loop exists because every
    2x2 block factor of a positive loop winds at least once.
    """
    if n < 1 or m < 1:
        raise DimensionError("need n >= 1 and m >= 1")
    if m < n:
        return Unrealizable(
            n=n, m=m,
            reason="every 2x2 block of a positive loop has winding >= 1, "
                   f"so total winding is at least n = {n}")
    ks = [m - n + 1] + [1] * (n - 1)
    loop = paths.rotation_loop(ks, samples=samples, tols=tols)
    loop.meta["ks"] = ks
    loop.meta["winding"] = m
    loop.meta["index"] = 2 * m
    return loop
