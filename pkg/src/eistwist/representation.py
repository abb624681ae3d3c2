"""The twist chi: Gamma -> GL(V): word evaluation, unitarity at the cusps,
fixed-space projections, cusp eigendata, and the norm-growth exponent.

Twists are stored as one invertible complex matrix per generator index.  The
library accepts twists that are non-unitary in the bulk; what downstream
convergence needs is unitarity of the cusp stabilizer images, and the
growth-fit abscissa sigma0 produced here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .group import GroupData, Word, enumerate_ball, _scan, _word_of_node
from .hyperbolic import frobenius_mu

UNITARY_TOL = 1e-9
INVERSE_TOL = 1e-10
EIG_GROUP_TOL = 1e-9


@dataclass(frozen=True)
class Representation:
    """dim and one complex (dim x dim) matrix per generator index."""

    dim: int
    images: tuple

    def __post_init__(self):
        imgs = tuple(np.asarray(m, dtype=complex) for m in self.images)
        object.__setattr__(self, "images", imgs)
        for i, m in enumerate(imgs):
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"image {i} has shape {m.shape}, expected "
                                 f"({self.dim}, {self.dim})")

    def image(self, i: int) -> np.ndarray:
        return self.images[i]


def make_representation(group: GroupData, images) -> Representation:
    """Validated constructor: images consistent with the inverse pairing."""
    images = [np.asarray(m, dtype=complex) for m in images]
    if len(images) != len(group.generators):
        raise ValueError("need one image per generator")
    dim = images[0].shape[0]
    rep = Representation(dim, tuple(images))
    eye = np.eye(dim)
    for i, j in enumerate(group.invmap):
        if np.max(np.abs(images[i] @ images[j] - eye)) > INVERSE_TOL:
            raise ValueError(f"image({j}) is not the inverse of image({i})")
    return rep


def trivial_representation(group: GroupData, dim: int = 1) -> Representation:
    return Representation(dim, tuple(np.eye(dim, dtype=complex)
                                     for _ in group.generators))


def representation_from_config(group: GroupData, cfg: dict) -> Representation:
    """Build a twist from a config block: dim + row-major [re, im] matrices.

    Matrices may be given for a subset of generator indices; a missing index
    is filled with the inverse of its partner's matrix.
    """
    dim = int(cfg["dim"])
    given = {}
    for key, rows in cfg["images"].items():
        m = np.array([[complex(re, im) for (re, im) in row] for row in rows])
        if m.shape != (dim, dim):
            raise ValueError(f"config image {key} has wrong shape")
        given[int(key)] = m
    images = []
    for i in range(len(group.generators)):
        if i in given:
            images.append(given[i])
        elif group.invmap[i] in given:
            images.append(np.linalg.inv(given[group.invmap[i]]))
        else:
            raise ValueError(f"no config matrix for generator {i} or its inverse")
    rep = make_representation(group, images)
    ok, report = check_unitary_at_cusps(group, rep)
    if not ok:
        raise ValueError(f"twist is not unitary at the cusps: {report}")
    return rep


# ----------------------------------------------------------------------
# word evaluation
# ----------------------------------------------------------------------

def rep_of_word(rep: Representation, w: Word) -> np.ndarray:
    out = np.eye(rep.dim, dtype=complex)
    for l in w:
        if not 0 <= l < len(rep.images):
            raise ValueError(f"invalid generator index {l}")
        out = out @ rep.images[l]
    return out


def rep_of_word_inverse(group: GroupData, rep: Representation, w: Word) -> np.ndarray:
    """chi(gamma^-1) for gamma = eval(w), via the reversed inverted word."""
    out = np.eye(rep.dim, dtype=complex)
    for l in reversed(tuple(w)):
        out = out @ rep.images[group.invmap[l]]
    return out


def rep_stack(group: GroupData, rep: Representation, scan_arrays, inverse=False):
    """chi(gamma) (or chi(gamma^-1)) for every node of a word scan, computed
    incrementally along the tree; returns an (N, n, n) array."""
    mats, parent, letter, depth = scan_arrays
    n = rep.dim
    out = np.empty((len(mats), n, n), dtype=complex)
    out[0] = np.eye(n)
    for i in range(1, len(mats)):
        p = parent[i]
        l = int(letter[i])
        if inverse:
            out[i] = rep.images[group.invmap[l]] @ out[p]
        else:
            out[i] = out[p] @ rep.images[l]
    return out


# ----------------------------------------------------------------------
# unitarity at the cusps, projections and eigendata
# ----------------------------------------------------------------------

def stabilizer_image(group: GroupData, rep: Representation, cusp: int) -> np.ndarray:
    return rep_of_word(rep, group.cusps[cusp].stabilizer_word)


def check_unitary_at_cusps(group: GroupData, rep: Representation):
    """True iff chi of every cusp stabilizer generator is unitary (1e-9)."""
    eye = np.eye(rep.dim)
    report = {}
    ok = True
    for k in range(len(group.cusps)):
        U = stabilizer_image(group, rep, k)
        defect = float(np.max(np.abs(U.conj().T @ U - eye)))
        report[k] = defect
        ok = ok and defect <= UNITARY_TOL
    return ok, report


@dataclass(frozen=True)
class CuspEigenData:
    """Eigenvalues e(nu_j) of chi(gamma_b) with spectral projections P_j.

    nu[0] = 0 always, possibly with projections[0] = 0: the trivial
    eigenvalue is listed even when it does not occur.
    """

    nu: tuple
    projections: tuple

    @property
    def fixed_projection(self) -> np.ndarray:
        return self.projections[0]


def cusp_eigendata(group: GroupData, rep: Representation, cusp: int) -> CuspEigenData:
    U = stabilizer_image(group, rep, cusp)
    n = rep.dim
    if np.max(np.abs(U.conj().T @ U - np.eye(n))) > UNITARY_TOL:
        raise ValueError(f"chi(stabilizer) at cusp {cusp} is not unitary")
    vals, vecs = np.linalg.eig(U)
    nus = np.angle(vals) / (2.0 * math.pi)
    nus = np.mod(nus, 1.0)
    nus[nus > 1.0 - EIG_GROUP_TOL] = 0.0
    order = np.argsort(nus)
    nus = nus[order]
    vecs = vecs[:, order]
    groups = []
    start = 0
    for i in range(1, n + 1):
        if i == n or nus[i] - nus[start] > EIG_GROUP_TOL:
            groups.append((start, i))
            start = i
    nu_list, proj_list = [], []
    for (s, e) in groups:
        q, _ = np.linalg.qr(vecs[:, s:e])
        proj_list.append(q @ q.conj().T)
        nu_list.append(float(np.mean(nus[s:e])))
    if nu_list[0] > EIG_GROUP_TOL:
        nu_list.insert(0, 0.0)
        proj_list.insert(0, np.zeros((n, n), dtype=complex))
    data = CuspEigenData(tuple(nu_list), tuple(proj_list))
    _check_eigendata(U, data)
    return data


def _check_eigendata(U, data: CuspEigenData):
    n = U.shape[0]
    total = sum(data.projections)
    if np.max(np.abs(total - np.eye(n))) > 1e-9:
        raise RuntimeError("spectral projections do not sum to the identity")
    recon = sum(np.exp(2j * math.pi * nu) * P
                for nu, P in zip(data.nu, data.projections))
    if np.max(np.abs(recon - U)) > 1e-9:
        raise RuntimeError("eigendecomposition does not reconstruct chi(gamma_b)")


def fixed_space_projection(group: GroupData, rep: Representation, cusp: int) -> np.ndarray:
    """Orthogonal projection onto the chi(Gamma_a)-fixed subspace (maybe 0)."""
    return cusp_eigendata(group, rep, cusp).fixed_projection


# ----------------------------------------------------------------------
# operator norm and the growth exponent
# ----------------------------------------------------------------------

def operator_norm(M, rel_tol: float = 1e-12, max_iter: int = 20000) -> float:
    """Largest singular value by power iteration on M* M."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[1]
    if not np.any(M):
        return 0.0
    H = M.conj().T @ M
    v = np.ones(n) / math.sqrt(n) + np.arange(n) * (1e-3 / max(n, 1))
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = H @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(np.real(np.vdot(v, w)))
        v = w / nw
        if abs(lam_new - lam) <= rel_tol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    return math.sqrt(max(lam, 0.0))


@dataclass(frozen=True)
class GrowthFit:
    """Empirical abscissa: ||chi(gamma)|| <= constant * mu(gamma)^(sigma0-1)
    for every gamma in the fitted ball."""

    sigma0: float
    constant: float
    max_word_length_used: int
    slope: float = 0.0
    proof_sigma0: float = float("nan")
    gen_norm_max: float = 1.0
    tranche_ratio: float = float("nan")


def fit_growth_exponent(group: GroupData, rep: Representation, L: int,
                        tranche_L: int = 5, include_proof_bound: bool = True) -> GrowthFit:
    """Least-squares upper envelope of log||chi|| against log mu on the ball.

    The intercept is lifted to dominate every sample, so the returned pair
    (sigma0, constant) is a certified bound on the fitted ball.  Degenerate
    (unitary) twists return sigma0 = 1 + 1e-6 so downstream half-plane
    checks stay meaningful.  The proof-driven bound sigma0 - 1 = C log K uses
    the empirical tranche-count ratio C on a smaller ball.
    """
    ok, report = check_unitary_at_cusps(group, rep)
    if not ok:
        raise ValueError(f"twist not unitary at the cusps: {report}")
    arrays = _scan(group, L, np.inf)
    mats = arrays[0]
    chis = rep_stack(group, rep, arrays)
    mus = np.einsum("ij,ij->i", mats, mats)
    norms = np.linalg.svd(chis, compute_uv=False)[:, 0]
    x = np.log(mus)
    y = np.log(np.maximum(norms, 1e-300))
    slope = float(np.polyfit(x, y, 1)[0]) if len(x) > 1 else 0.0
    slope = max(slope, 0.0)
    intercept = float(np.max(y - slope * x))
    sigma0 = max(1.0 + slope, 1.0 + 1e-6)
    K = max(float(np.linalg.svd(np.asarray(m), compute_uv=False)[0])
            for m in rep.images)
    ratio = float("nan")
    proof = float("nan")
    if include_proof_bound:
        from .group import tranche_bound_check

        ratio, _, _ = tranche_bound_check(group, min(tranche_L, L))
        proof = 1.0 + ratio * math.log(max(K, 1.0))
    return GrowthFit(sigma0=sigma0, constant=math.exp(intercept),
                     max_word_length_used=int(L), slope=slope,
                     proof_sigma0=proof, gen_norm_max=K, tranche_ratio=ratio)
