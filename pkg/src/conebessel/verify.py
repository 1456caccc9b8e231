"""Numerical self-verification registry.

Every named check re-derives one identity the package relies on and probes
it with fresh seeded draws.  Exact algebraic identities get tight absolute
or relative bounds; Monte Carlo comparisons are judged at two combined
standard errors with a single automatic retry at four times the sample
size.  Reports are plain dicts that serialize to byte-identical JSON for a
fixed (suite, seed) regardless of thread count.
"""

import json
import math
import time
import zlib
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import kv

from . import algebra as alg
from . import cone_integral as ci
from . import series as se
from .errors import ConeBesselError, NoConvergenceError, UsageError

DEFAULT_SEED = 101

_CONCRETE = [alg.AlgebraDescriptor(1, 1), alg.AlgebraDescriptor(2, 1),
             alg.AlgebraDescriptor(2, 2), alg.AlgebraDescriptor(3, 1),
             alg.AlgebraDescriptor(3, 2)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    anchor: str
    passed: bool
    observed: float
    bound: float
    work: int
    wall_time: float
    note: str = ""


_REGISTRY = []  # (name, anchor, fn, defaults)


def _check(name, anchor, **defaults):
    def wrap(fn):
        _REGISTRY.append((name, anchor, fn, defaults))
        return fn
    return wrap


def _sub_seed(seed, name):
    return (int(seed) ^ zlib.crc32(name.encode("utf-8"))) & ((1 << 63) - 1)


def _gen(seed, *salt):
    return np.random.default_rng([int(seed)] + [int(round(8 * s)) for s in salt])


def _rel(a, b):
    return abs(a - b) / (abs(a) + abs(b) + 1e-300)


def _generic_nu(rng, d, lo, hi, margin=0.02):
    """Draw nu with every base the series/coefficients form kept away from
    the integers (all affine forms c_nu*nu + c_d*d with small coefficients)."""
    for _ in range(500):
        nu = float(rng.uniform(lo, hi))
        ok = True
        for cn in (1.0, -1.0, 2.0, -2.0):
            for cd in (0.0, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5, 2.0, -2.0):
                v = cn * nu + cd * d
                if abs(v - round(v)) < margin:
                    ok = False
        if ok:
            return nu
    raise ConeBesselError("could not draw a generic order")


def _random_half(desc, rng, scale=1.0):
    xi = alg.zero(desc)
    for b in alg.half_space_basis(desc):
        xi = xi + float(rng.normal(0.0, scale)) * b
    return xi


def _mc_points(runs, n0):
    """Worst |difference| in combined-sigma units over a list of MC
    comparisons.  A comparison outside 2 sigma is retried once with 4x the
    samples on a fresh substream (the tag argument salts the seed), so the
    two trials are independent and a false alarm needs two unlucky draws in
    a row rather than one unlucky prefix shared by both.

    Each entry of `runs` is a callable (n, tag) -> (diff, sigma, work)."""
    worst = 0.0
    work = 0
    for run in runs:
        diff, sigma, w = run(int(n0), "")
        work += w
        if abs(diff) > 2.0 * sigma:
            diff, sigma, w = run(4 * int(n0), "r")
            work += w
        worst = max(worst, abs(diff) / max(sigma, 1e-300))
    return worst, 2.0, work


# --- algebra identities -------------------------------------------------------

@_check("jordan-identity", "x^2 o (x o y) = x o (x^2 o y) in every backed algebra",
        draws=1000)
def _jordan_identity(seed, threads, draws):
    worst, work = 0.0, 0
    for desc in _CONCRETE:
        rng = _gen(seed, desc.rank, desc.d)
        for _ in range(draws):
            x = alg.random_element(desc, rng)
            y = alg.random_element(desc, rng)
            x2 = alg.jordan_mul(x, x)
            lhs = alg.jordan_mul(x2, alg.jordan_mul(x, y))
            rhs = alg.jordan_mul(x, alg.jordan_mul(x2, y))
            scale = (1.0 + x.norm()) ** 3 * (1.0 + y.norm())
            worst = max(worst, (lhs - rhs).norm() / scale)
            work += 1
    return worst, 1e-10, work


@_check("cayley-hamilton", "x^r - a1 x^(r-1) + a2 x^(r-2) - ... annihilates x",
        draws=1000)
def _cayley_hamilton(seed, threads, draws):
    worst, work = 0.0, 0
    for desc in _CONCRETE:
        rng = _gen(seed, desc.rank, desc.d)
        e = alg.unit(desc)
        for _ in range(draws):
            x = alg.random_element(desc, rng)
            a = alg.char_coeffs(x)
            if desc.rank == 1:
                resid = (x - a[0] * e).norm()
            elif desc.rank == 2:
                resid = (alg.jordan_mul(x, x) - a[0] * x + a[1] * e).norm()
            else:
                x2 = alg.jordan_mul(x, x)
                x3 = alg.jordan_mul(x2, x)
                resid = (x3 - a[0] * x2 + a[1] * x - a[2] * e).norm()
            worst = max(worst, resid / (1.0 + x.norm()) ** desc.rank)
            work += 1
    return worst, 1e-10, work


@_check("spectral-reconstruction",
        "sum(lam_i c_i) = x with an orthonormal complete idempotent frame",
        draws=1000)
def _spectral_reconstruction(seed, threads, draws):
    worst, work = 0.0, 0
    for desc in _CONCRETE:
        rng = _gen(seed, desc.rank, desc.d)
        e = alg.unit(desc)
        for _ in range(draws):
            x = alg.random_element(desc, rng)
            dec = alg.spectral(x)
            recon = alg.zero(desc)
            for lam, c in zip(dec.eigenvalues, dec.frame):
                recon = recon + lam * c
            resid = (recon - x).norm()
            comp = alg.zero(desc)
            for c in dec.frame:
                resid = max(resid, (alg.jordan_mul(c, c) - c).norm())
                comp = comp + c
            resid = max(resid, (comp - e).norm())
            for i in range(desc.rank):
                for j in range(i + 1, desc.rank):
                    resid = max(resid, alg.jordan_mul(dec.frame[i], dec.frame[j]).norm())
            worst = max(worst, resid / (1.0 + x.norm()))
            work += 1
    return worst, 1e-9, work


@_check("det-split-unit-block",
        "det(e2 + xi + t c) = t - |xi|^2 / 2 for the embedded rank-2 unit",
        draws=1000)
def _det_split_unit(seed, threads, draws):
    worst, work = 0.0, 0
    for d in (1, 2):
        desc = alg.AlgebraDescriptor(3, d)
        rng = _gen(seed, d)
        e2 = alg.embed_rank2(desc, alg.unit(alg.AlgebraDescriptor(2, d)))
        c3 = alg.corner_idempotent(desc)
        for _ in range(draws):
            xi = _random_half(desc, rng)
            t = float(rng.uniform(-2.0, 2.0))
            y = e2 + xi + t * c3
            target = t - 0.5 * alg.inner(xi, xi)
            worst = max(worst, abs(alg.det(y) - target) / (1.0 + xi.norm()) ** 2 / (1.0 + abs(t)))
            work += 1
    return worst, 1e-10, work


@_check("det-split-general-block",
        "det(z + xi + t c) = det2(z) (t - (z^-1 o xi, xi)) for cone z",
        draws=1000)
def _det_split_general(seed, threads, draws):
    worst, work = 0.0, 0
    for d in (1, 2):
        desc = alg.AlgebraDescriptor(3, d)
        sub = alg.AlgebraDescriptor(2, d)
        rng = _gen(seed, d)
        c3 = alg.corner_idempotent(desc)
        for _ in range(draws):
            z2 = alg.random_cone_element(sub, rng)
            xi = _random_half(desc, rng)
            t = float(rng.uniform(-2.0, 2.0))
            y = alg.embed_rank2(desc, z2) + xi + t * c3
            u = alg.inner(alg.jordan_mul(alg.embed_rank2(desc, alg.inverse(z2)), xi), xi)
            target = alg.det(z2) * (t - u)
            scale = (1.0 + z2.norm()) ** 3 * (1.0 + xi.norm()) ** 2 * (1.0 + abs(t))
            worst = max(worst, abs(alg.det(y) - target) / scale)
            work += 1
    return worst, 1e-9, work


@_check("inverse-trace-formula",
        "tr((z + xi + t c)^-1) = b0 / (2 det2(z) s) + tr(z)/det2(z), s = t - (z^-1 o xi, xi)",
        draws=1000)
def _inverse_trace(seed, threads, draws):
    worst, work = 0.0, 0
    for d in (1, 2):
        desc = alg.AlgebraDescriptor(3, d)
        sub = alg.AlgebraDescriptor(2, d)
        rng = _gen(seed, d)
        c3 = alg.corner_idempotent(desc)
        for _ in range(draws):
            z2 = alg.random_cone_element(sub, rng)
            xi = _random_half(desc, rng, scale=0.6)
            u = alg.inner(alg.jordan_mul(alg.embed_rank2(desc, alg.inverse(z2)), xi), xi)
            s = float(rng.uniform(0.2, 2.5))
            y = alg.embed_rank2(desc, z2) + xi + (u + s) * c3
            dz, tz = alg.det(z2), alg.trace(z2)
            b0 = 2.0 * dz + 2.0 * u * tz - alg.inner(xi, xi)
            rhs = b0 / (2.0 * dz * s) + tz / dz
            lhs = alg.trace(alg.inverse(y))
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
            work += 1
    return worst, 1e-9, work


@_check("xi-facts",
        "half-space elements: tr xi = det xi = 0 and xi^3 = |xi|^2 xi / 2",
        draws=1000)
def _xi_facts(seed, threads, draws):
    worst, work = 0.0, 0
    for d in (1, 2):
        desc = alg.AlgebraDescriptor(3, d)
        rng = _gen(seed, d)
        for _ in range(draws):
            xi = _random_half(desc, rng)
            cube = alg.jordan_mul(xi, alg.jordan_mul(xi, xi))
            scale = (1.0 + xi.norm()) ** 3
            resid = max(abs(alg.trace(xi)), abs(alg.det(xi)),
                        (cube - 0.5 * alg.inner(xi, xi) * xi).norm())
            worst = max(worst, resid / scale)
            work += 1
    return worst, 1e-10, work


@_check("pdet-identity", "det(P(x) y) = det(x)^2 det(y)", draws=1000)
def _pdet_identity(seed, threads, draws):
    worst, work = 0.0, 0
    for desc in _CONCRETE:
        rng = _gen(seed, desc.rank, desc.d)
        for _ in range(draws):
            x = alg.random_element(desc, rng)
            y = alg.random_element(desc, rng)
            lhs = alg.det(alg.quadratic_rep(x, y))
            rhs = alg.det(x) ** 2 * alg.det(y)
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs)))
            work += 1
    return worst, 1e-9, work


@_check("peirce-rules",
        "corner Peirce blocks recompose x and multiply into the right blocks",
        draws=500)
def _peirce_rules(seed, threads, draws):
    worst, work = 0.0, 0
    for desc in _CONCRETE:
        if desc.rank == 1:
            continue
        rng = _gen(seed, desc.rank, desc.d)
        c = alg.corner_idempotent(desc)
        for _ in range(draws):
            x = alg.random_element(desc, rng)
            sp = alg.peirce_split(x, c)
            scale = 1.0 + x.norm()
            resid = (sp.a0 + sp.a_half + sp.a1 - x).norm()
            resid = max(resid, alg.jordan_mul(c, sp.a0).norm())
            resid = max(resid, (alg.jordan_mul(c, sp.a1) - sp.a1).norm())
            resid = max(resid, (alg.jordan_mul(c, sp.a_half) - 0.5 * sp.a_half).norm())
            # block multiplication rules
            resid = max(resid, alg.jordan_mul(sp.a0, sp.a1).norm() / scale)
            for part in (sp.a0, sp.a1):
                prod = alg.peirce_split(alg.jordan_mul(part, sp.a_half), c)
                resid = max(resid, prod.a0.norm() / scale, prod.a1.norm() / scale)
            hh = alg.peirce_split(alg.jordan_mul(sp.a_half, sp.a_half), c)
            resid = max(resid, hh.a_half.norm() / scale)
            worst = max(worst, resid / scale)
            work += 1
    return worst, 1e-9, work


# --- series identities --------------------------------------------------------

_REDUCTION_MAP = {1: (1, False), 2: (2, False), 3: (1, True), 4: (2, True)}


def _reduction_check(jnum):
    def fn(seed, threads, draws):
        rng = _gen(seed, jnum)
        worst, work = 0.0, 0
        done = 0
        while done < draws:
            d = float(rng.choice([1.0, 2.0, 1.0 + rng.uniform(0.0, 1.0)]))
            nu = _generic_nu(rng, d, -1.9, -0.25)
            t1 = float(rng.uniform(0.5, 3.0))
            t2 = float(rng.uniform(0.05, 0.8 * t1 * t1 / 4.0))
            p = se.SeriesParams(nu=nu, d=d)
            j2num, partner = _REDUCTION_MAP[jnum]
            nu2 = nu + d / 2.0
            lhs = se.j3(jnum, p, (t1, t2, 0.0)).value
            if partner:
                q = se.SeriesParams(nu=-nu2, d=d)
                rhs = t2 ** (-nu2) * se.j2(j2num, q, (t1, t2)).value
            else:
                rhs = se.j2(j2num, se.SeriesParams(nu=nu2, d=d), (t1, t2)).value
            worst = max(worst, _rel(lhs, rhs))
            done += 1
            work += 1
        return worst, 1e-10, work
    return fn


for _jn in (1, 2, 3, 4):
    _check(f"reduction-r3j{_jn}",
           f"rank-3 solution {_jn} at t3 = 0 equals a rank-2 solution at order nu + d/2",
           draws=40)(_reduction_check(_jn))


def _ratio_point(rng, rank):
    # geometric spacing keeps both separation ratios equal and comfortably
    # inside the series domain; the modest top eigenvalue keeps the internal
    # cancellation of the oscillatory sums far above the FD jitter floor
    a = float(rng.uniform(0.1, 0.3))
    rho = float(rng.uniform(3.6, 4.6))
    if rank == 2:
        return (a, a * rho)
    return (a, a * rho, a * rho * rho)


def _annihilation_t(rank):
    def fn(seed, threads, points):
        js = (1, 2) if rank == 2 else (1, 2, 3, 4)
        sols = [(j, partner) for j in js for partner in (False, True)]
        worst, work = 0.0, 0
        for j, partner in sols:
            for d in (1.0, 2.0):
                rng = _gen(seed, rank, j, 2 * partner, d)
                nu = _generic_nu(rng, d, -1.9, -0.3)
                # tight series tol: truncation jitter is amplified ~1/h^2 by
                # the second-derivative stencils
                p = se.SeriesParams(nu=nu, d=d, tol=1e-15)
                f = se.j_solution(rank, j, p, partner=partner)
                for _ in range((points + 1) // 2):
                    t = se.elem_sym(_ratio_point(rng, rank))
                    scale = 1.0 + abs(f(t.t))
                    for resid in se.z_residuals(f, p, t):
                        worst = max(worst, abs(resid) / scale)
                    work += 1
        return worst, 1e-5, work
    return fn


_check("annihilation-t-r2",
       "all 4 rank-2 series solutions satisfy the t-space system (FD residuals)",
       points=6)(_annihilation_t(2))
_check("annihilation-t-r3",
       "all 8 rank-3 series solutions satisfy the t-space system (FD residuals)",
       points=6)(_annihilation_t(3))


def _annihilation_x(rank):
    def fn(seed, threads, points):
        sols = [(j, partner) for j in range(1, 5 if rank == 3 else 3)
                for partner in (False, True)]
        worst, work = 0.0, 0
        for j, partner in sols:
            for d in (1.0, 2.0):
                rng = _gen(seed, rank, j, 2 * partner, d)
                nu = _generic_nu(rng, d, -1.9, -0.3)
                p = se.SeriesParams(nu=nu, d=d, tol=1e-15)
                f = se.j_solution(rank, j, p, partner=partner)
                fx = se.on_eigenvalues(f)
                for _ in range((points + 1) // 2):
                    x = _ratio_point(rng, rank)
                    scale = 1.0 + abs(fx(x))
                    for resid in se.muirhead_residuals(fx, p, x):
                        worst = max(worst, abs(resid) / scale)
                    work += 1
        return worst, 1e-5, work
    return fn


_check("annihilation-x-r2",
       "rank-2 solutions satisfy the eigenvalue-space operators (FD residuals)",
       points=4)(_annihilation_x(2))
_check("annihilation-x-r3",
       "rank-3 solutions satisfy the eigenvalue-space operators (FD residuals)",
       points=4)(_annihilation_x(3))


@_check("fd-controls",
        "the FD residual engine reproduces hand-computed images of polynomials")
def _fd_controls(seed, threads):
    p = se.SeriesParams(nu=0.37, d=1.3)
    t = (1.1, 0.6, 0.3)
    worst = 0.0
    r = se.z_residuals(lambda v: v[0], p, t)
    worst = max(worst, abs(r[0] - (p.nu + 1 + p.d + t[0])), abs(r[1]), abs(r[2]))
    r = se.z_residuals(lambda v: 1.0, p, t)
    worst = max(worst, abs(r[0] - 1.0), abs(r[1]), abs(r[2]))
    r = se.z_residuals(lambda v: v[1] ** 2, p, t)
    worst = max(worst, abs(r[1] - 2.0 * t[1] * (p.nu + 2 + p.d / 2.0)))
    r = se.z_residuals(lambda v: v[0] * v[1], p, t)
    worst = max(worst, abs(r[2] - (-2.0)))
    m = se.muirhead_residuals(lambda x: 1.0, p, (0.4, 1.1, 2.3))
    worst = max(worst, max(abs(mi - 1.0) for mi in m))
    return worst, 1e-7, 5


@_check("coeff-symmetry", "the second coefficient row is the first one at -nu",
        draws=50)
def _coeff_symmetry(seed, threads, draws):
    rng = _gen(seed)
    worst, work = 0.0, 0
    for _ in range(draws):
        d = float(rng.choice([1.0, 2.0, 1.0 + rng.uniform(0.0, 1.0)]))
        nu = _generic_nu(rng, d, -1.9, -0.15)
        tab = se.coeffs3(nu, d)
        mirrored = se.coeffs3(-nu, d)
        for x, y in zip(tab.b, mirrored.a):
            worst = max(worst, _rel(x, y))
        c = se.k2_coeffs(nu, d)
        cm = se.k2_coeffs(-nu, d)
        for x, y in zip(c[2:], cm[:2]):
            worst = max(worst, _rel(x, y))
        work += 1
    return worst, 1e-12, work


@_check("coeff-chain",
        "rank-3 combination weights factor through rank-2 ones at nu + d/2",
        draws=50)
def _coeff_chain(seed, threads, draws):
    rng = _gen(seed)
    worst, work = 0.0, 0
    for _ in range(draws):
        d = float(rng.choice([1.0, 2.0, 1.0 + rng.uniform(0.0, 1.0)]))
        nu = _generic_nu(rng, d, -1.9, -0.15)
        a = se.coeffs3(nu, d).a
        c = se.k2_coeffs(nu + d / 2.0, d)
        pref = (2.0 * math.pi) ** d * math.gamma(-nu)
        for j in range(4):
            worst = max(worst, _rel(a[j], pref * c[j]))
        work += 1
    return worst, 1e-12, work


def _inversion_series(rank):
    def fn(seed, threads, points):
        rng = _gen(seed, rank)
        worst, work = 0.0, 0
        for _ in range(points):
            d = float(rng.choice([1.0, 2.0]))
            nu = _generic_nu(rng, d, -1.9 if rank == 3 else -1.3, -0.2, margin=0.05)
            # moderate eigenvalues: the combination cancels like
            # exp(4 sum sqrt(x_i)), and the two sides must stay resolvable
            # in double precision for the comparison to mean anything
            a = float(rng.uniform(0.35, 0.7))
            rho = float(rng.uniform(3.4, 4.2))
            x = (a, a * rho) if rank == 2 else (a, a * rho, a * rho * rho)
            t = se.elem_sym(x)
            p = se.SeriesParams(nu=nu, d=d)
            q = replace(p, nu=-nu)
            k = se.k2_series if rank == 2 else se.k3_series
            lhs = k(p, t)
            rhs = k(q, t)
            det_pow = t[rank - 1] ** (-nu)
            budget = lhs.err + det_pow * rhs.err + 1e-11 * abs(lhs.value)
            worst = max(worst, abs(lhs.value - det_pow * rhs.value) / budget)
            work += 1
        return worst, 5.0, work
    return fn


_check("series-inversion-symmetry-r2",
       "K_nu(t) = t2^-nu K_-nu(t) for the rank-2 combination (series side), "
       "within the reported evaluation error",
       points=20)(_inversion_series(2))
_check("series-inversion-symmetry-r3",
       "K_nu(t) = t3^-nu K_-nu(t) for the rank-3 combination (series side), "
       "within the reported evaluation error",
       points=20)(_inversion_series(3))


# --- Monte Carlo checks -------------------------------------------------------

@_check("mc-jacobian-fd",
        "assembled differential of T -> T T* matches finite differences")
def _mc_jacobian_fd(seed, threads):
    worst, work = 0.0, 0
    for desc in _CONCRETE[1:]:
        rng = _gen(seed, desc.rank, desc.d)
        coords = np.concatenate([rng.uniform(0.4, 1.6, desc.rank),
                                 rng.normal(0.0, 1.0, desc.n - desc.rank)])
        _y, log_jac = ci.triangular_map_jacobian(desc, coords)
        h = 1e-6
        fd = np.empty((desc.n, desc.n))
        for b in range(desc.n):
            cp, cm = coords.copy(), coords.copy()
            cp[b] += h
            cm[b] -= h
            yp, _ = ci.triangular_map_jacobian(desc, cp)
            ym, _ = ci.triangular_map_jacobian(desc, cm)
            fd[:, b] = (yp - ym) / (2.0 * h)
        _s, fd_log = np.linalg.slogdet(fd)
        worst = max(worst, abs(math.expm1(log_jac - fd_log)))
        work += 1
    return worst, 1e-6, work


@_check("mc-thread-invariance",
        "estimates are bitwise independent of the worker count", n=70000)
def _mc_thread_invariance(seed, threads, n):
    desc = alg.AlgebraDescriptor(2, 1)
    x = alg.from_diag(desc, (1.0, 2.0))
    e1 = ci.k_integral_mc(desc, -0.5, x, n, _sub_seed(seed, "ti"), threads=1)
    e3 = ci.k_integral_mc(desc, -0.5, x, n, _sub_seed(seed, "ti"), threads=3)
    observed = abs(e1.value - e3.value) + abs(e1.std_error - e3.std_error)
    return observed, 0.0, 2 * n


@_check("gamma-cone-closed-form",
        "the cone normalization integral equals its Gamma-product closed form")
def _gamma_cone_closed_form(seed, threads):
    worst, work = 0.0, 0
    for desc in _CONCRETE:
        for s in (2.6, 3.4):
            prod = (2.0 * math.pi) ** ((desc.n - desc.rank) / 2.0)
            for j in range(desc.rank):
                prod *= math.gamma(s - j * desc.d / 2.0)
            worst = max(worst, _rel(ci.gamma_cone(desc, s), prod))
            work += 1
    return worst, 1e-14, work


def _gamma_mc_check(desc, s_values):
    def fn(seed, threads, n):
        runs = []
        for i, s in enumerate(s_values):
            def run(m, tag, s=s, i=i):
                est = ci.gamma_cone_mc(desc, s, m, _sub_seed(seed, f"g{i}{tag}"),
                                       threads)
                return est.value - ci.gamma_cone(desc, s), est.std_error, m
            runs.append(run)
        return _mc_points(runs, n)
    return fn


_check("gamma-cone-mc-r1", "rank-1 MC normalization integral matches Gamma(s)",
       n=100000)(_gamma_mc_check(_CONCRETE[0], (0.7, 1.8)))
_check("gamma-cone-mc-r2d1", "rank-2 real MC normalization matches the Gamma product",
       n=100000)(_gamma_mc_check(_CONCRETE[1], (1.1, 2.0)))
_check("gamma-cone-mc-r2d2", "rank-2 complex MC normalization matches the Gamma product",
       n=100000)(_gamma_mc_check(_CONCRETE[2], (1.6, 2.5)))
_check("gamma-cone-mc-r3d1", "rank-3 real MC normalization matches the Gamma product",
       n=100000)(_gamma_mc_check(_CONCRETE[3], (1.6, 2.5)))
_check("gamma-cone-mc-r3d2", "rank-3 complex MC normalization matches the Gamma product",
       n=100000)(_gamma_mc_check(_CONCRETE[4], (2.6, 3.4)))


@_check("macdonald-limit",
        "the rank-1 integral equals 2 x^(-nu/2) K_nu(2 sqrt x)", n=100000)
def _macdonald_limit(seed, threads, n):
    desc = _CONCRETE[0]
    cases = ((-0.4, 0.5), (0.8, 2.0), (-1.3, 1.0))
    runs = []
    for i, (nu, xv) in enumerate(cases):
        def run(m, tag, nu=nu, xv=xv, i=i):
            est = ci.k_integral_mc(desc, nu, alg.from_diag(desc, (xv,)), m,
                                   _sub_seed(seed, f"m{i}{tag}"), threads)
            exact = 2.0 * xv ** (-nu / 2.0) * float(kv(nu, 2.0 * math.sqrt(xv)))
            return est.value - exact, est.std_error, m
        runs.append(run)
    return _mc_points(runs, n)


def _k2_series_vs_mc(d, nu):
    def fn(seed, threads, n):
        desc = alg.AlgebraDescriptor(2, d)
        pts = ((0.6, 2.4), (0.5, 3.0), (1.0, 5.0))
        p = se.SeriesParams(nu=nu, d=float(d), max_degree=400)
        runs = []
        for i, xv in enumerate(pts):
            def run(m, tag, xv=xv, i=i):
                sv = se.k2_series(p, se.elem_sym(xv))
                est = ci.k_integral_mc(desc, nu, alg.from_diag(desc, xv), m,
                                       _sub_seed(seed, f"k{i}{tag}"), threads)
                return est.value - sv.value, est.std_error + 0.5 * sv.err, m
            runs.append(run)
        return _mc_points(runs, n)
    return fn


_check("k2-series-vs-mc-d1",
       "the rank-2 series combination equals the cone integral (d = 1)",
       n=100000)(_k2_series_vs_mc(1, -0.7))
_check("k2-series-vs-mc-d2",
       "the rank-2 series combination equals the cone integral (d = 2)",
       n=100000)(_k2_series_vs_mc(2, -1.1))


@_check("mc-inversion-symmetry-r3",
        "K_nu(x) = det(x)^-nu K_-nu(x) for the rank-3 integral (MC side)",
        n=100000)
def _mc_inversion_symmetry(seed, threads, n):
    cases = ((1, -0.9, (0.5, 1.0, 2.0)), (1, -1.3, (0.8, 1.5, 0.6)),
             (2, -0.9, (1.0, 2.0, 0.7)))
    runs = []
    for i, (d, nu, xv) in enumerate(cases):
        def run(m, tag, d=d, nu=nu, xv=xv, i=i):
            desc = alg.AlgebraDescriptor(3, d)
            x = alg.from_diag(desc, xv)
            e1 = ci.k_integral_mc(desc, nu, x, m,
                                  _sub_seed(seed, f"i{i}a{tag}"), threads)
            e2 = ci.k_integral_mc(desc, -nu, x, m,
                                  _sub_seed(seed, f"i{i}b{tag}"), threads)
            detp = alg.det(x) ** (-nu)
            diff = e1.value - detp * e2.value
            sigma = math.hypot(e1.std_error, detp * e2.std_error)
            return diff, sigma, 2 * m
        runs.append(run)
    return _mc_points(runs, n)


def _gaussian_substep(d, z_coords, t):
    def fn(seed, threads, n):
        z = alg.Element(alg.AlgebraDescriptor(2, d), np.asarray(z_coords))

        def run(m, tag):
            est, exact, v = ci.gaussian_half_space_integral(z, t, m,
                                                            _sub_seed(seed, f"gs{tag}"))
            if alg.trace(v) <= 0 or alg.det(v) <= 0:
                raise ConeBesselError("Gaussian-step generator left the cone")
            return est.value - exact, est.std_error, m

        return _mc_points([run], n)
    return fn


_check("gaussian-substep-d1",
       "half-space Gaussian step: MC matches pi^d det(B)^-1/2 (d = 1)",
       n=100000)(_gaussian_substep(1, (1.0, 1.3, 0.25), 0.7))
_check("gaussian-substep-d2",
       "half-space Gaussian step: MC matches pi^d det(B)^-1/2 (d = 2)",
       n=100000)(_gaussian_substep(2, (1.0, 1.3, 0.25, -0.15), 0.55))


@_check("boundary-positivity",
        "the Gaussian-step generator stays inside the rank-2 cone along runs",
        n=30000)
def _boundary_positivity(seed, threads, n):
    worst = -math.inf
    for d, nu in ((1, -0.8), (2, -1.2)):
        scale_min, tr_min, rel = ci.boundary_positivity_scan(
            nu, d, 1.0, 1.5, n, _sub_seed(seed, f"bp{d}"))
        # strict positivity of the scale and trace, and agreement of the
        # assembled generator's spectrum with its closed form where
        # double precision can resolve it
        worst = max(worst, -scale_min, -tr_min, rel - 1e-4)
    return worst, 0.0, 2 * n


def _boundary_vs_semi(d, nu):
    def fn(seed, threads, n):
        pts = ((1.0, 1.5), (0.8, 2.2))
        runs = []
        for i, (x1, x2) in enumerate(pts):
            def run(m, tag, x1=x1, x2=x2, i=i):
                direct = ci.k3_boundary_direct(nu, d, x1, x2, m,
                                               _sub_seed(seed, f"bd{i}{tag}"), threads)
                semi = ci.k3_boundary_semi_analytic(nu, d, x1, x2, m,
                                                    _sub_seed(seed, f"bs{i}{tag}"), threads)
                diff = direct.value - semi.value
                return diff, math.hypot(direct.std_error, semi.std_error), 2 * m
            runs.append(run)
        return _mc_points(runs, n)
    return fn


_check("boundary-chain-direct-vs-semi-d1",
       "direct boundary MC equals the semi-analytic reduction (d = 1)",
       n=100000)(_boundary_vs_semi(1, -0.7))
_check("boundary-chain-direct-vs-semi-d2",
       "direct boundary MC equals the semi-analytic reduction (d = 2)",
       n=100000)(_boundary_vs_semi(2, -1.1))


def _boundary_vs_series(d, nu):
    def fn(seed, threads, n):
        x1, x2 = 1.0, 1.5
        p = se.SeriesParams(nu=nu + d / 2.0, d=float(d), tol=1e-9, max_degree=700)
        sv = se.k2_series(p, se.elem_sym((x1, x2)))
        target = (2.0 * math.pi) ** d * math.gamma(-nu) * sv.value
        slack = (2.0 * math.pi) ** d * math.gamma(-nu) * sv.err

        def run(m, tag):
            direct = ci.k3_boundary_direct(nu, d, x1, x2, m,
                                           _sub_seed(seed, f"bv{tag}"), threads)
            return direct.value - target, direct.std_error + 0.5 * slack, m

        return _mc_points([run], n)
    return fn


_check("boundary-chain-vs-series-d1",
       "boundary MC equals the Gamma-prefactored rank-2 series (d = 1)",
       n=100000)(_boundary_vs_series(1, -0.7))
_check("boundary-chain-vs-series-d2",
       "boundary MC equals the Gamma-prefactored rank-2 series (d = 2)",
       n=100000)(_boundary_vs_series(2, -1.1))


def _interior_match(d):
    def fn(seed, threads, n):
        nu = -1.7
        desc = alg.AlgebraDescriptor(3, d)
        xv = (0.2, 1.0, 5.0)
        p = se.SeriesParams(nu=nu, d=float(d), tol=1e-12, max_degree=400)
        sv = se.k3_series(p, se.elem_sym(xv))

        def run(m, tag):
            est = ci.k_integral_mc(desc, nu, alg.from_diag(desc, xv), m,
                                   _sub_seed(seed, f"im{tag}"), threads)
            return est.value - sv.value, est.std_error + 0.5 * sv.err, m

        return _mc_points([run], n)
    return fn


_check("interior-match-d1",
       "rank-3 series combination equals the cone integral at a separated interior point (d = 1)",
       n=200000)(_interior_match(1))
_check("interior-match-d2",
       "rank-3 series combination equals the cone integral at a separated interior point (d = 2)",
       n=200000)(_interior_match(2))


@_check("interior-divergence-pinned",
        "series evaluation reports divergence outside its t-domain instead of returning a value")
def _interior_divergence_pinned(seed, threads):
    p = se.SeriesParams(nu=-1.7, d=1.0)
    try:
        res = se.k3_series(p, se.elem_sym((1.0, 1.3, 1.7)))
    except NoConvergenceError:
        return 0.0, 0.5, 1
    raise ConeBesselError(
        f"expected a divergence diagnosis, got value {res.value!r}")


# --- runner -------------------------------------------------------------------

_BY_NAME = {name: (anchor, fn, defaults) for name, anchor, fn, defaults in _REGISTRY}


def registry_names():
    return [name for name, _a, _f, _d in _REGISTRY]


def run_check(name, seed=DEFAULT_SEED, threads=1, params=None):
    if name not in _BY_NAME:
        raise UsageError(f"unknown check {name!r}; see registry_names()")
    anchor, fn, defaults = _BY_NAME[name]
    kwargs = dict(defaults)
    if params:
        unknown = set(params) - set(defaults)
        if unknown:
            raise UsageError(f"check {name!r} takes no parameters {sorted(unknown)}")
        kwargs.update(params)
    start = time.perf_counter()
    note = ""
    try:
        out = fn(_sub_seed(seed, name), threads, **kwargs)
        observed, bound, work = out[:3]
        if len(out) > 3:
            note = out[3]
        passed = bool(observed <= bound)
    except Exception as exc:  # a failed check, not a crashed suite
        observed, bound, work = math.inf, 0.0, 0
        passed = False
        note = f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - start
    return CheckResult(name=name, anchor=anchor, passed=passed,
                       observed=float(observed), bound=float(bound),
                       work=int(work), wall_time=wall, note=note)


def run_suite(names="all", seed=DEFAULT_SEED, threads=1, progress=None):
    if names == "all" or names == ["all"]:
        selected = registry_names()
        label = "all"
    else:
        selected = list(names)
        for name in selected:
            if name not in _BY_NAME:
                raise UsageError(f"unknown check {name!r}")
        label = ",".join(selected)
    results = []
    for name in selected:
        res = run_check(name, seed=seed, threads=threads)
        results.append(res)
        if progress is not None:
            progress(res)
    n_pass = sum(1 for r in results if r.passed)
    return {
        "suite": label,
        "seed": int(seed),
        "results": [
            {
                "name": r.name,
                "anchor": r.anchor,
                "passed": r.passed,
                "observed": r.observed,
                "bound": r.bound,
                "work": r.work,
                **({"note": r.note} if r.note else {}),
            }
            for r in results
        ],
        "summary": {"pass": n_pass, "fail": len(results) - n_pass},
    }


def report_json(report):
    """Canonical JSON for a suite report (stable bytes for fixed seed/suite)."""
    return json.dumps(report, indent=2) + "\n"
