"""Monte Carlo integration over the symmetric cones of rank 1, 2, 3.

The integration variable is parameterized through its triangular square
root: y is the Jordan image of T T* with T lower-triangular, positive
diagonal.  Proposals are standard-Laplace in the log of the diagonal and
standard normal on the strictly-lower coordinates; the change-of-variables
factor is the exact determinant of the assembled linear differential of
T -> T T* in the orthonormal coordinate basis (n x n, computed per sample),
which removes any exponent bookkeeping from the weights.

Estimates are pure functions of (seed, n): samples are generated in fixed
chunks from per-chunk counter-based streams and reduced in chunk order, so
thread counts cannot change results.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtri

from . import rng as _rng
from .algebra import (
    AlgebraDescriptor,
    Element,
    det,
    embed_rank2,
    half_space_basis,
    inverse,
    jordan_mul,
    rho_matrix,
    spectral,
    to_matrix,
    trace,
    unit,
)
from .errors import ConeBesselError, DomainError, UsageError

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ConeSample:
    y: Element
    log_weight: float


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int


def _is_complex(desc):
    return desc.rank > 1 and float(desc.d) == 2.0


def _tri_coord_dirs(desc):
    """Basis matrices of the lower-triangular parameter space, in the same
    order as the coordinate draws: diagonal first, then per pair."""
    r = desc.rank
    cx = _is_complex(desc)
    dirs = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex if cx else float)
        e[i, i] = 1.0
        dirs.append(e)
    for (i, j) in desc.pairs:  # entry sits at (j, i), below the diagonal
        e = np.zeros((r, r), dtype=complex if cx else float)
        e[j, i] = 1.0
        dirs.append(e)
        if cx:
            e2 = np.zeros((r, r), dtype=complex)
            e2[j, i] = 1.0j
            dirs.append(e2)
    return dirs


def _extract_coords(desc, ms):
    """Vectorized orthonormal-basis coordinates of a batch of matrices."""
    r = desc.rank
    cols = [ms[:, i, i].real for i in range(r)]
    for (i, j) in desc.pairs:
        cols.append(math.sqrt(2.0) * ms[:, i, j].real)
        if _is_complex(desc):
            cols.append(math.sqrt(2.0) * ms[:, i, j].imag)
    return np.stack(cols, axis=1)


def _assemble_matrices(desc, coords):
    """Vectorized inverse of _extract_coords."""
    r = desc.rank
    m = coords.shape[0]
    cx = _is_complex(desc)
    out = np.zeros((m, r, r), dtype=complex if cx else float)
    for i in range(r):
        out[:, i, i] = coords[:, i]
    k = r
    inv_sq2 = 1.0 / math.sqrt(2.0)
    for (i, j) in desc.pairs:
        if cx:
            v = (coords[:, k] + 1j * coords[:, k + 1]) * inv_sq2
            k += 2
        else:
            v = coords[:, k] * inv_sq2
            k += 1
        out[:, i, j] = v
        out[:, j, i] = np.conj(v)
    return out


def _cone_kernel(desc, u):
    """Transform a (m, n) uniform block into cone samples with weights.

    Returns per-sample arrays: y coordinates, log det y, tr(y^{-1}),
    and log_weight = log|det D(T -> TT*)| - log q(T).
    """
    r, n = desc.rank, desc.n
    m = u.shape[0]
    # diag: standard Laplace in ln t.  A Gaussian in ln t cannot dominate the
    # target's power-law boundary factor det(y)^a -- the weight tail grows
    # like exp(c ln t + (ln t)^2 / 2) as t -> 0 -- while the Laplace tail
    # keeps every weight with det-power above -1/2 bounded and square-
    # integrable, so the reported standard errors stay trustworthy.
    ln_diag = _rng.laplace_from_uniform(u[:, :r])
    diag = np.exp(ln_diag)
    off = ndtri(u[:, r:])
    log_q = np.sum(-np.abs(ln_diag) - math.log(2.0) - ln_diag, axis=1)
    if n > r:
        log_q += np.sum(-0.5 * off**2 - 0.5 * _LOG_2PI, axis=1)

    cx = _is_complex(desc)
    t = np.zeros((m, r, r), dtype=complex if cx else float)
    for i in range(r):
        t[:, i, i] = diag[:, i]
    k = 0
    for (i, j) in desc.pairs:
        if cx:
            t[:, j, i] = off[:, k] + 1j * off[:, k + 1]
            k += 2
        else:
            t[:, j, i] = off[:, k]
            k += 1

    th = np.conj(np.transpose(t, (0, 2, 1)))
    y = t @ th

    jac = np.empty((m, n, n))
    for col, e in enumerate(_tri_coord_dirs(desc)):
        dy = np.einsum("ab,mbc->mac", e, th) + np.einsum("mab,bc->mac", t, np.conj(e.T))
        jac[:, :, col] = _extract_coords(desc, dy)
    _sign, log_jac = np.linalg.slogdet(jac)

    tinv = np.linalg.inv(t)
    tr_y_inv = np.sum(np.abs(tinv) ** 2, axis=(1, 2))
    log_det_y = 2.0 * np.sum(ln_diag, axis=1)

    return {
        "y_coords": _extract_coords(desc, y),
        "y_mats": y,
        "log_det_y": log_det_y,
        "tr_y_inv": tr_y_inv,
        "log_weight": log_jac - log_q,
    }


def sample_cone(desc, rng):
    """Draw one weighted sample of the open cone from a numpy Generator."""
    u = np.clip(rng.random((1, desc.n)), 1e-300, 1.0 - 1e-16)
    k = _cone_kernel(desc, u)
    return ConeSample(y=Element(desc, k["y_coords"][0]), log_weight=float(k["log_weight"][0]))


def triangular_map_jacobian(desc, t_coords):
    """y-coordinates and log|det| of the differential of T -> T T* at one
    lower-triangular parameter point (diagonal first, then pair entries)."""
    t_coords = np.asarray(t_coords, dtype=float)
    if t_coords.shape != (desc.n,):
        raise UsageError(f"expected {desc.n} triangular coordinates")
    r = desc.rank
    cx = _is_complex(desc)
    t = np.zeros((1, r, r), dtype=complex if cx else float)
    for i in range(r):
        t[0, i, i] = t_coords[i]
    k = r
    for (i, j) in desc.pairs:
        if cx:
            t[0, j, i] = t_coords[k] + 1j * t_coords[k + 1]
            k += 2
        else:
            t[0, j, i] = t_coords[k]
            k += 1
    th = np.conj(np.transpose(t, (0, 2, 1)))
    y = t @ th
    jac = np.empty((1, desc.n, desc.n))
    for col, e in enumerate(_tri_coord_dirs(desc)):
        dy = np.einsum("ab,mbc->mac", e, th) + np.einsum("mab,bc->mac", t, np.conj(e.T))
        jac[:, :, col] = _extract_coords(desc, dy)
    _sign, log_jac = np.linalg.slogdet(jac)
    return _extract_coords(desc, y)[0], float(log_jac[0])


def _chunked_mean(seed, n, n_uniform, chunk_fn, threads=1):
    """Deterministic chunked mean/stderr of a weight function.

    chunk_fn(uniform_block, chunk_index) -> per-sample weights.  Chunks are
    reduced in index order regardless of the worker count.
    """
    jobs = list(_rng.chunk_ranges(n))

    def run(job):
        c, lo, hi = job
        u = _rng.uniforms(seed, c, (hi - lo, n_uniform))
        w = chunk_fn(u, c)
        if not np.all(np.isfinite(w)):
            bad = int(np.argmax(~np.isfinite(w)))
            raise ConeBesselError(
                f"non-finite integrand weight at sample {lo + bad} (chunk {c}): w = {w[bad]}")
        return c, float(np.sum(w)), float(np.sum(w * w))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    parts.sort(key=lambda p: p[0])
    s1 = s2 = 0.0
    for _c, a, b in parts:
        s1 += a
        s2 += b
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) / n
    return mean, math.sqrt(var)


def k_integral_mc(desc, nu, x, n, seed, threads=1):
    """Importance-sampled cone integral of exp(-tr(y^-1) - (x,y)) det(y)^(nu - n/r).

    x must lie in the closed cone; on the boundary the integral only
    converges for nu < 0.  Rank-3 boundary points are refused here — use the
    dedicated boundary pipeline, whose proposals are matched to the boundary
    integrand.
    """
    if x.algebra != desc:
        raise UsageError("x does not belong to the descriptor's algebra")
    if n < 10**4:
        raise UsageError("n must be at least 10^4")
    lam_min = min(spectral(x).eigenvalues)
    scale = max(1.0, x.norm())
    if lam_min < -1e-10 * scale:
        raise DomainError(f"x is outside the closed cone (eigenvalue {lam_min:.3e})")
    if lam_min <= 1e-10 * scale:
        if desc.rank == 3:
            raise DomainError(
                "rank-3 boundary points are not handled by the generic sampler; "
                "use the boundary pipeline (k3_boundary_direct / _semi_analytic)")
        if nu >= 0:
            raise DomainError("boundary argument requires nu < 0 for convergence")
    expo = nu - desc.n / desc.rank
    xc = np.asarray(x.coords)

    def chunk_fn(u, _c):
        k = _cone_kernel(desc, u)
        log_f = -k["tr_y_inv"] - k["y_coords"] @ xc + expo * k["log_det_y"]
        return np.exp(log_f + k["log_weight"])

    mean, se = _chunked_mean(seed, n, desc.n, chunk_fn, threads)
    return McEstimate(value=mean, std_error=se, n_samples=n, seed=seed)


def gamma_cone(desc, s):
    """Closed form of the cone normalization integral
    (2 pi)^((n-r)/2) * prod_j Gamma(s - (j-1) d/2)."""
    r, d = desc.rank, desc.d
    if s <= (r - 1) * d / 2.0:
        raise DomainError(f"need s > (r-1)d/2 = {(r - 1) * d / 2:g}, got {s:g}")
    out = (2.0 * math.pi) ** ((desc.n - r) / 2.0)
    for j in range(r):
        out *= math.gamma(s - j * d / 2.0)
    return out


def gamma_cone_mc(desc, s, n, seed, threads=1):
    """MC estimate of the same integral, for cross-checking gamma_cone."""
    expo = s - desc.n / desc.rank

    def chunk_fn(u, _c):
        k = _cone_kernel(desc, u)
        tr_y = np.sum(k["y_coords"][:, : desc.rank], axis=1)
        return np.exp(-tr_y + expo * k["log_det_y"] + k["log_weight"])

    mean, se = _chunked_mean(seed, n, desc.n, chunk_fn, threads)
    return McEstimate(value=mean, std_error=se, n_samples=n, seed=seed)


def k3_boundary_semi_analytic(nu, d, x1, x2, n, seed, threads=1):
    """Rank-3 K at the boundary point diag(x1, x2, 0) after integrating out
    the half-space and corner directions analytically: a Gamma prefactor
    times the rank-2 K at shifted order."""
    if nu >= 0:
        raise DomainError("boundary evaluation requires nu < 0")
    if x1 <= 0 or x2 <= 0:
        raise DomainError("x1, x2 must be positive")
    desc2 = AlgebraDescriptor(2, d)
    x = Element(desc2, np.array([x1, x2] + [0.0] * (desc2.n - 2)))
    base = k_integral_mc(desc2, nu + d / 2.0, x, n, seed, threads)
    c = (2.0 * math.pi) ** d * math.gamma(-nu)
    return McEstimate(value=c * base.value, std_error=c * base.std_error,
                      n_samples=n, seed=seed)


# --- direct boundary integral ------------------------------------------------

def _half_action_tensor(d):
    """S[c, a, b] = (E_c o e_a, e_b): the action of rank-2 coordinate
    directions on the rank-3 half space, precomputed once per d, plus the
    map from half-space coordinates to the matrix corner column."""
    desc3 = AlgebraDescriptor(3, d)
    desc2 = AlgebraDescriptor(2, d)
    half = half_space_basis(desc3)
    idx = [int(np.argmax(b.coords)) for b in half]
    n2, p = desc2.n, len(half)
    s = np.zeros((n2, p, p))
    for c in range(n2):
        coords = np.zeros(n2)
        coords[c] = 1.0
        u3 = embed_rank2(desc3, Element(desc2, coords))
        for a in range(p):
            prod = jordan_mul(u3, half[a])
            s[c, a, :] = prod.coords[idx]
    blk = np.stack([np.asarray(to_matrix(b), dtype=complex)[:2, 2] for b in half])
    return s, idx, blk


_half_tensor_cache = {}


def _half_tensor(d):
    if d not in _half_tensor_cache:
        _half_tensor_cache[d] = _half_action_tensor(d)
    return _half_tensor_cache[d]


def _boundary_chunk(u, nu, d, x1, x2, collect_v=False):
    """Weights for the boundary integrand over (z, xi, t).

    The proposal is matched: z from the cone kernel, xi multivariate-t with
    the exact shape matrix of the integrand's xi-marginal, and the remaining
    t-offset inverse-gamma with the exact essential-singularity scale; the
    weight then varies only through the z-marginal.  The integrand itself is
    evaluated from the assembled rank-3 element (batched determinant and
    inverse), not from any reduced formula, so this pipeline genuinely
    exercises the algebraic identities it is compared against -- except on
    the negligible-weight fringe whose conditioning double precision cannot
    resolve, where the exact Schur-split values stand in.
    """
    desc2 = AlgebraDescriptor(2, d)
    desc3 = AlgebraDescriptor(3, d)
    n2 = desc2.n
    p = 2 * int(d)  # half-space dimension
    m = u.shape[0]

    kz = _cone_kernel(desc2, u[:, :n2])
    z_mats = kz["y_mats"]
    z_coords = kz["y_coords"]
    det_z = np.exp(kz["log_det_y"])
    tr_z = z_coords[:, 0] + z_coords[:, 1]

    # 2x2 inverse through the adjugate and the closed-form determinant:
    # det z stays exactly positive, with no LU rounding at the extreme
    # conditioning the kernel's boundary tail now reaches
    z11 = z_mats[:, 0, 0].real
    z22 = z_mats[:, 1, 1].real
    z12 = z_mats[:, 0, 1]
    zinv_mats = np.empty_like(z_mats)
    zinv_mats[:, 0, 0] = z22 / det_z
    zinv_mats[:, 1, 1] = z11 / det_z
    zinv_mats[:, 0, 1] = -z12 / det_z
    zinv_mats[:, 1, 0] = np.conj(-z12) / det_z
    zinv_coords = _extract_coords(desc2, zinv_mats)
    tr_zinv = zinv_coords[:, 0] + zinv_coords[:, 1]

    s_tensor, half_idx, blk = _half_tensor(d)
    # quadratic form of xi -> (z^-1 o xi, xi) on half-space coordinates
    kq = np.einsum("cab,mc->mab", s_tensor, zinv_coords)

    a_mat = 2.0 * tr_z[:, None, None] * kq - np.eye(p)[None, :, :]
    # A is positive definite by construction, but its condition number blows
    # up when z nears the cone boundary, so factor A itself (never its
    # inverse) and add a tiny relative ridge.  Every density below is written
    # for the ridged proposal exactly, so the estimator stays unbiased.
    ridge = 1e-10 * (1.0 + 2.0 * tr_z * np.einsum("mii->mi", kq).max(axis=1))
    a_mat += ridge[:, None, None] * np.eye(p)[None, :, :]
    chol_a = np.linalg.cholesky(a_mat)

    df = -2.0 * nu
    eta = ndtri(u[:, n2:n2 + p])
    eta_sq = np.sum(eta * eta, axis=1)
    chi2 = _rng.chi2_from_uniform(u[:, n2 + p], df)
    # xi ~ Student-t with shape (det z / -nu) A^-1: solve the triangular
    # system instead of forming A^-1, which keeps xi' A xi exactly equal to
    # (det z / -nu) (df / chi2) |eta|^2 with no cancellation
    w_dirs = np.linalg.solve(np.swapaxes(chol_a, 1, 2), eta[:, :, None])[:, :, 0]
    xi = np.sqrt(det_z / (-nu))[:, None] * w_dirs * np.sqrt(df / chi2)[:, None]

    # corner quantities through the Schur split of y = [[Z, v], [v*, t]]:
    # with v the matrix block of xi, choosing t = (v, Z^-1 v) + s makes the
    # Schur complement exactly s, and both (v, Z^-1 v) (through the closed
    # 2x2 Cholesky factor of Z) and the singularity scale 1 + |Z^-1 v|^2
    # are sums of squares, so they stay positive at any conditioning, where
    # the structure-tensor quadratic forms would cancel to garbage signs
    v_blk = xi.astype(complex) @ blk
    c1 = v_blk[:, 0] / np.sqrt(z11)
    c2 = (v_blk[:, 1] - np.conj(z12) / z11 * v_blk[:, 0]) * np.sqrt(z11 / det_z)
    u_quad = np.abs(c1) ** 2 + np.abs(c2) ** 2
    g1 = (z22 * v_blk[:, 0] - z12 * v_blk[:, 1]) / det_z
    g2 = (z11 * v_blk[:, 1] - np.conj(z12) * v_blk[:, 0]) / det_z
    beta0 = 1.0 + np.abs(g1) ** 2 + np.abs(g2) ** 2

    alpha = d - nu
    s_off = _rng.inverse_gamma_from_uniform(u[:, n2 + p + 1], alpha, beta0)
    t_corner = u_quad + s_off

    # proposal log-densities
    log_det_a = 2.0 * np.sum(np.log(np.einsum("mii->mi", chol_a)), axis=1)
    log_det_sigma = p * np.log(det_z / (-nu)) - log_det_a
    q_form = (df / chi2) * eta_sq  # xi' Sigma^-1 xi, exact by construction
    log_q_xi = (gammaln((df + p) / 2.0) - gammaln(df / 2.0)
                - 0.5 * p * math.log(df * math.pi) - 0.5 * log_det_sigma
                - 0.5 * (df + p) * np.log1p(q_form / df))
    log_q_s = (alpha * np.log(beta0) - gammaln(alpha)
               - (alpha + 1.0) * np.log(s_off) - beta0 / s_off)

    # assemble y = z + xi + t*c3 and evaluate the integrand from it directly
    y_coords = np.zeros((m, desc3.n))
    y_coords[:, 0] = z_coords[:, 0]
    y_coords[:, 1] = z_coords[:, 1]
    y_coords[:, 2] = t_corner
    y_coords[:, 3:3 + int(d)] = z_coords[:, 2:]
    for a, col in enumerate(half_idx):
        y_coords[:, col] = xi[:, a]
    y_mats = _assemble_matrices(desc3, y_coords)
    det_y = np.linalg.det(y_mats).real
    # the Schur split gives det y = det z * s and tr y^-1 = tr z^-1 +
    # beta0 / s exactly, both positive by construction.  The estimator must
    # stand on the assembled route wherever double precision can resolve
    # it; the split only replaces it on the fringe where the assembled
    # determinant's sign is rounding noise against the sample's own scale
    # cubed (weights there are ~ exp(-huge) anyway)
    det_y_split = det_z * s_off
    resolvable = det_y_split > 1e-10 * (tr_z + t_corner) ** 3
    if np.any(det_y[resolvable] <= 0):
        sub = np.flatnonzero(resolvable)
        bad = int(sub[int(np.argmax(det_y[sub] <= 0))])
        raise ConeBesselError(f"assembled boundary sample left the cone "
                              f"(det y = {det_y[bad]:.3e})")
    log_det_y = np.log(np.where(resolvable, det_y, det_y_split))
    tr_y_inv = tr_zinv + beta0 / s_off
    idx_res = np.flatnonzero(resolvable)
    if idx_res.size:
        tr_y_inv[idx_res] = np.trace(np.linalg.inv(y_mats[idx_res]),
                                     axis1=1, axis2=2).real

    log_f = (-tr_y_inv - (x1 * z_coords[:, 0] + x2 * z_coords[:, 1])
             + (nu - (1.0 + d)) * log_det_y)
    w = np.exp(log_f + kz["log_weight"] - log_q_xi - log_q_s)

    if not collect_v:
        return w
    # positivity scan of the quadratic-form generator v used by the
    # half-space Gaussian step.  v factors as c * w with c = 1/(2t det z)
    # carrying the whole scale and w = tr(z) z^-1 - e the shape, whose two
    # eigenvalues are exactly q and 1/q for q the eigenvalue ratio of z.
    # Three robust observables: c (closed-form positive), tr(w) (a sum of
    # two positive terms, safe at every conditioning), and -- only on
    # samples whose conditioning double precision can resolve -- the
    # assembled w's smallest eigenvalue against its exact value q.
    scale = 1.0 / (2.0 * t_corner * det_z)
    w_mats = tr_z[:, None, None] * zinv_mats - np.eye(2)
    tr_w = np.einsum("mii->m", w_mats).real
    aa = zinv_mats[:, 0, 0].real
    cc = zinv_mats[:, 1, 1].real
    disc = np.sqrt((aa - cc) ** 2 + 4.0 * np.abs(zinv_mats[:, 0, 1]) ** 2)
    lam_hi = 0.5 * ((aa + cc) + disc)
    q_exact = 1.0 / (det_z * lam_hi ** 2)  # lam_min/lam_max of z, no subtraction
    resolvable = q_exact > 1e-4
    eig_min = np.linalg.eigvalsh(w_mats)[:, 0]
    rel = np.abs(eig_min[resolvable] / q_exact[resolvable] - 1.0)
    worst_rel = float(np.max(rel)) if rel.size else 0.0
    return w, float(np.min(scale)), float(np.min(tr_w)), worst_rel


def k3_boundary_direct(nu, d, x1, x2, n, seed, threads=1):
    """Rank-3 K at diag(x1, x2, 0) by direct MC over the split variables."""
    if nu >= 0:
        raise DomainError("boundary evaluation requires nu < 0")
    if x1 <= 0 or x2 <= 0:
        raise DomainError("x1, x2 must be positive")
    desc2 = AlgebraDescriptor(2, d)
    n_uni = desc2.n + 2 * int(d) + 2

    def chunk_fn(u, _c):
        return _boundary_chunk(u, nu, d, x1, x2)

    mean, se = _chunked_mean(seed, n, n_uni, chunk_fn, threads)
    return McEstimate(value=mean, std_error=se, n_samples=n, seed=seed)


def boundary_positivity_scan(nu, d, x1, x2, n, seed):
    """Scan the Gaussian-step generator v = c (tr(z) z^-1 - e) with
    c = 1/(2 t det z) over a boundary-sampler run.

    Returns (min c, min trace of tr(z) z^-1 - e, worst relative error of the
    assembled generator's smallest eigenvalue against its exact closed form)
    over the run.  v lies in the open cone exactly when the first two are
    positive; both stay resolvable in double precision at any conditioning,
    unlike det(v), whose scale c^2 sinks below the rounding floor near the
    corner.  The eigenvalue comparison is restricted to samples whose
    conditioning double precision can resolve."""
    desc2 = AlgebraDescriptor(2, d)
    n_uni = desc2.n + 2 * int(d) + 2
    min_scale, min_tr, worst_rel = math.inf, math.inf, 0.0
    for c, lo, hi in _rng.chunk_ranges(n):
        u = _rng.uniforms(seed, c, (hi - lo, n_uni))
        _w, sc, tr_w, rel = _boundary_chunk(u, nu, d, x1, x2, collect_v=True)
        min_scale = min(min_scale, sc)
        min_tr = min(min_tr, tr_w)
        worst_rel = max(worst_rel, rel)
    return min_scale, min_tr, worst_rel


def gaussian_half_space_integral(z, t, n, seed):
    """MC the Gaussian integral over the half space for fixed (z, t) and
    return (estimate, closed_form, v).

    The integrand is exp(-(B xi, xi)) with B the half-space action of
    v = tr(z)/(2 t det z) z^-1 - 1/(2 t det z) e; the closed form is
    pi^d (det B)^(-1/2).  The proposal is a deliberately mismatched
    isotropic Gaussian so the check is non-trivial.
    """
    desc2 = z.algebra
    if desc2.rank != 2:
        raise UsageError("z must be a rank-2 element")
    d = desc2.d
    desc3 = AlgebraDescriptor(3, d)
    dz = det(z)
    zinv = inverse(z)
    scale = 1.0 / (2.0 * t * dz)
    v = trace(z) * scale * zinv - scale * unit(desc2)
    b = rho_matrix(embed_rank2(desc3, v))
    p = b.shape[0]
    lam_max = float(np.max(np.linalg.eigvalsh(0.5 * (b + b.T))))
    s2 = 1.0 / (2.5 * lam_max)  # wider than the integrand: bounded weights

    def chunk_fn(u, _c):
        xi = math.sqrt(s2) * ndtri(u)
        quad = np.einsum("ab,ma,mb->m", b, xi, xi)
        log_q = np.sum(-0.5 * xi**2 / s2, axis=1) - 0.5 * p * math.log(2 * math.pi * s2)
        return np.exp(-quad - log_q)

    mean, se = _chunked_mean(seed, n, p, chunk_fn)
    exact = math.pi ** d / math.sqrt(float(np.linalg.det(b)))
    return McEstimate(value=mean, std_error=se, n_samples=n, seed=seed), exact, v
