"""Central tolerance and sampling defaults.

All numerical gates in the package read from one `Tolerances` record so
that a single override propagates consistently.  Tolerances tied to a
matrix scale are documented as relative; the rest are absolute.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # symplectic certification
    symp: float = 1e-9            # max |M^T J M - J|
    det: float = 1e-8             # |det M - 1|
    pairing_rel: float = 1e-6     # eigenvalue inverse-pairing, relative

    # dense kernels
    eig_residual: float = 1e-9    # |p(lambda)| <= eig_residual * max(1, |M|^n)
    sym_eig_abs: float = 1e-10    # absolute, times |S|
    mat_exp_rel: float = 1e-12
    exp_norm_cap: float = 50.0

    # spectrum location bands
    unit_band: float = 1e-7       # | |lambda| - 1 |
    real_band: float = 1e-7       # | Im lambda |
    pm_one_band: float = 1e-6     # | lambda -+ 1 |
    rank_svd_rel: float = 1e-7    # singular values below this * |M| count as zero
    # algebraic-multiplicity clustering; wide enough to absorb the
    # eps**(1/m) fuzz of an m-fold root of the characteristic polynomial
    alg_cluster_rel: float = 3e-4

    # paths
    path_defect: float = 1e-9
    endpoint: float = 1e-9
    deriv_match: float = 1e-6
    collision_t_res: float = 1e-10
    subspace_cond: float = 1e-6
    junction: float = 1e-8

    # sampling
    samples_per_unit: int = 2048
    min_samples: int = 64
    k_max: int = 64

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT_TOLS = Tolerances()


def get_tols(tols=None) -> Tolerances:
    return DEFAULT_TOLS if tols is None else tols
