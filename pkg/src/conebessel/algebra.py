"""Euclidean Jordan algebras of rank 1, 2, 3 backed by symmetric/Hermitian
matrices.

Elements are stored as coordinate vectors in an orthonormal basis for the
trace form (x, y) = tr(xy): first the diagonal matrix units, then for each
index pair i<j the off-diagonal generators (E_ij + E_ji)/sqrt(2) (plus the
imaginary one for the complex case).  With that convention the inner product
is the plain dot product of coordinates.

Supported concrete algebras: rank 1 (the reals), rank 2 and 3 over the reals
(d = 1, symmetric matrices) and the complexes (d = 2, Hermitian matrices).
Other values of d have no matrix backing here and are series-only.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlgebraMismatchError,
    DomainError,
    SingularElementError,
    UnsupportedAlgebraError,
    UsageError,
)

_CONCRETE_D = (1, 2)


@dataclass(frozen=True)
class AlgebraDescriptor:
    rank: int
    d: float = 1.0

    def __post_init__(self):
        if self.rank not in (1, 2, 3):
            raise UsageError(f"rank must be 1, 2 or 3, got {self.rank}")
        if self.d <= 0:
            raise UsageError(f"d must be positive, got {self.d}")

    @property
    def n(self):
        """Real dimension r + r(r-1)d/2."""
        return int(round(self.rank + self.rank * (self.rank - 1) * self.d / 2))

    @property
    def concrete(self):
        """Whether a matrix backing exists (rank 1: always; else d in {1,2})."""
        return self.rank == 1 or (float(self.d) in (1.0, 2.0))

    @property
    def pairs(self):
        return [(i, j) for i in range(self.rank) for j in range(i + 1, self.rank)]


def _require_concrete(desc):
    if not desc.concrete:
        raise UnsupportedAlgebraError(
            f"no matrix backing for rank {desc.rank}, d = {desc.d}; "
            "this descriptor supports series evaluation only"
        )


def _require_same(x, y):
    if x.algebra != y.algebra:
        raise AlgebraMismatchError(f"mixed algebras: {x.algebra} vs {y.algebra}")


@dataclass(frozen=True)
class Element:
    algebra: AlgebraDescriptor
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).copy()
        if c.shape != (self.algebra.n,):
            raise UsageError(f"expected {self.algebra.n} coordinates, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __add__(self, other):
        _require_same(self, other)
        return Element(self.algebra, self.coords + other.coords)

    def __sub__(self, other):
        _require_same(self, other)
        return Element(self.algebra, self.coords - other.coords)

    def __mul__(self, scalar):
        return Element(self.algebra, self.coords * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Element(self.algebra, -self.coords)

    def norm(self):
        return float(np.linalg.norm(self.coords))


def zero(desc):
    return Element(desc, np.zeros(desc.n))


def unit(desc):
    c = np.zeros(desc.n)
    c[: desc.rank] = 1.0
    return Element(desc, c)


def from_diag(desc, values):
    if len(values) != desc.rank:
        raise UsageError(f"need {desc.rank} diagonal values")
    c = np.zeros(desc.n)
    c[: desc.rank] = values
    return Element(desc, c)


def diag_unit(desc, i):
    """The i-th diagonal matrix unit as an element (a primitive idempotent)."""
    c = np.zeros(desc.n)
    c[i] = 1.0
    return Element(desc, c)


def corner_idempotent(desc):
    """The distinguished idempotent (last diagonal unit) all Peirce-block
    conventions in this package refer to."""
    return diag_unit(desc, desc.rank - 1)


# --- matrix picture ---------------------------------------------------------

_SQ2 = math.sqrt(2.0)


def to_matrix(x):
    """Matrix representation: real symmetric (d=1) or complex Hermitian (d=2)."""
    desc = x.algebra
    _require_concrete(desc)
    r = desc.rank
    complex_case = desc.rank > 1 and float(desc.d) == 2.0
    m = np.zeros((r, r), dtype=complex if complex_case else float)
    c = x.coords
    for i in range(r):
        m[i, i] = c[i]
    k = r
    for (i, j) in desc.pairs:
        if complex_case:
            v = (c[k] + 1j * c[k + 1]) / _SQ2
            k += 2
        else:
            v = c[k] / _SQ2
            k += 1
        m[i, j] = v
        m[j, i] = np.conj(v)
    return m


def from_matrix(desc, m):
    """Inverse of to_matrix; symmetrizes away rounding noise in the input."""
    _require_concrete(desc)
    r = desc.rank
    m = np.asarray(m)
    m = 0.5 * (m + np.conj(m.T))
    c = np.zeros(desc.n)
    for i in range(r):
        c[i] = m[i, i].real
    k = r
    for (i, j) in desc.pairs:
        if desc.rank > 1 and float(desc.d) == 2.0:
            c[k] = _SQ2 * m[i, j].real
            c[k + 1] = _SQ2 * m[i, j].imag
            k += 2
        else:
            c[k] = _SQ2 * m[i, j].real
            k += 1
    return Element(desc, c)


# --- basic operations -------------------------------------------------------

def jordan_mul(x, y):
    """Jordan product x o y = (XY + YX)/2 in the matrix picture."""
    _require_same(x, y)
    _require_concrete(x.algebra)
    if x.algebra.rank == 1:
        return Element(x.algebra, x.coords * y.coords)
    mx, my = to_matrix(x), to_matrix(y)
    return from_matrix(x.algebra, 0.5 * (mx @ my + my @ mx))


def inner(x, y):
    _require_same(x, y)
    return float(np.dot(x.coords, y.coords))


def trace(x):
    return float(np.sum(x.coords[: x.algebra.rank]))


def det(x):
    _require_concrete(x.algebra)
    if x.algebra.rank == 1:
        return float(x.coords[0])
    return float(np.linalg.det(to_matrix(x)).real)


def char_coeffs(x):
    """Elementary symmetric functions of the eigenvalues.

    Rank 3 returns (a1, a2, a3) with a1 = tr x, a2 = (tr(x)^2 - tr(x^2))/2,
    a3 = det x, so that x^3 - a1 x^2 + a2 x - a3 e = 0.  Rank 2 returns
    (tr, det), rank 1 just (x,).
    """
    _require_concrete(x.algebra)
    r = x.algebra.rank
    if r == 1:
        return (float(x.coords[0]),)
    t1 = trace(x)
    if r == 2:
        return (t1, det(x))
    tr_sq = inner(x, x)  # tr(x^2) = (x, x)
    return (t1, 0.5 * (t1 * t1 - tr_sq), det(x))


def inverse(x):
    """Jordan inverse via the adjugate identity x^{-1} = (x^2 - a1 x + a2 e)/a3."""
    _require_concrete(x.algebra)
    r = x.algebra.rank
    dx = det(x)
    if abs(dx) <= 1e-12 * max(1.0, x.norm()) ** r:
        raise SingularElementError(abs(dx))
    if r == 1:
        return Element(x.algebra, 1.0 / x.coords)
    if r == 2:
        t1, _ = char_coeffs(x)
        return (1.0 / dx) * (t1 * unit(x.algebra) - x)
    a1, a2, _ = char_coeffs(x)
    x2 = jordan_mul(x, x)
    return (1.0 / dx) * (x2 - a1 * x + a2 * unit(x.algebra))


# --- spectral decomposition -------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple
    frame: tuple  # primitive idempotents, same order as eigenvalues


def _jacobi_eigh(m, tol_scale):
    """Cyclic Jacobi for a small symmetric/Hermitian matrix.

    Returns (eigenvalues, unitary V with eigenvectors as columns).  Stops
    when the off-diagonal Frobenius norm drops below 1e-14 * tol_scale.
    """
    a = np.array(m, dtype=complex)
    r = a.shape[0]
    v = np.eye(r, dtype=complex)
    threshold = 1e-14 * max(tol_scale, 1e-300)
    for _sweep in range(60):
        off = math.sqrt(sum(abs(a[p, q]) ** 2 for p in range(r) for q in range(r) if p != q))
        if off < threshold:
            break
        for p in range(r - 1):
            for q in range(p + 1, r):
                apq = a[p, q]
                b = abs(apq)
                if b == 0.0:
                    continue
                phase = apq / b
                tau = (a[q, q].real - a[p, p].real) / (2.0 * b)
                # stable tangent of the rotation angle
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g = np.eye(r, dtype=complex)
                g[p, p] = c
                g[q, q] = c
                g[p, q] = s * phase
                g[q, p] = -s * np.conj(phase)
                a = np.conj(g.T) @ a @ g
                v = v @ g
    return np.real(np.diag(a)), v


def spectral(x):
    """Eigenvalues (descending) and a frame of primitive idempotents."""
    _require_concrete(x.algebra)
    if x.algebra.rank == 1:
        return SpectralDecomposition((float(x.coords[0]),), (unit(x.algebra),))
    m = to_matrix(x)
    lam, v = _jacobi_eigh(m, float(np.linalg.norm(x.coords)))
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    v = v[:, order]
    frame = tuple(
        from_matrix(x.algebra, np.outer(v[:, i], np.conj(v[:, i])))
        for i in range(x.algebra.rank)
    )
    return SpectralDecomposition(tuple(float(l) for l in lam), frame)


def sqrt_cone(x, tol=1e-12):
    """Square root inside of the open cone (all eigenvalues > 0)."""
    dec = spectral(x)
    lam_min = min(dec.eigenvalues)
    if lam_min <= tol * max(1.0, x.norm()):
        raise DomainError(f"element not in the open cone (smallest eigenvalue {lam_min:.3e})")
    out = zero(x.algebra)
    for lam, c in zip(dec.eigenvalues, dec.frame):
        out = out + math.sqrt(lam) * c
    return out


def in_cone(x, tol=0.0):
    return min(spectral(x).eigenvalues) > tol


# --- quadratic representation and Peirce decomposition ----------------------

def quadratic_rep(x, y):
    """P(x)y = 2 x o (x o y) - x^2 o y (the matrix sandwich XYX)."""
    _require_same(x, y)
    x2 = jordan_mul(x, x)
    return 2.0 * jordan_mul(x, jordan_mul(x, y)) - jordan_mul(x2, y)


@dataclass(frozen=True)
class PeirceSplit:
    a0: Element
    a_half: Element
    a1: Element
    idempotent: Element


def peirce_split(x, c):
    """Split x along the eigenspaces of L(c) for an idempotent c.

    a1 = P(c)x lives where L(c) = 1, a0 = P(e-c)x where L(c) = 0, and the
    remainder is the half space.
    """
    _require_same(x, c)
    cc = jordan_mul(c, c)
    if (cc - c).norm() > 1e-10:
        raise DomainError("c is not an idempotent")
    if abs(trace(c) - 1.0) > 1e-8:
        raise DomainError(f"c is not primitive (trace {trace(c):.6g})")
    a1 = quadratic_rep(c, x)
    a0 = quadratic_rep(unit(x.algebra) - c, x)
    a_half = x - a1 - a0
    return PeirceSplit(a0=a0, a_half=a_half, a1=a1, idempotent=c)


def _half_space_indices(desc):
    """Coordinate indices of the half Peirce space of the corner idempotent."""
    idx = []
    k = desc.rank
    step = 2 if (desc.rank > 1 and float(desc.d) == 2.0) else 1
    for (i, j) in desc.pairs:
        if j == desc.rank - 1:
            idx.extend(range(k, k + step))
        k += step
    return idx


def _zero_space_indices(desc):
    half = set(_half_space_indices(desc))
    return [k for k in range(desc.n) if k not in half and k != desc.rank - 1]


def half_space_basis(desc):
    """Orthonormal basis elements spanning the corner half space."""
    out = []
    for k in _half_space_indices(desc):
        c = np.zeros(desc.n)
        c[k] = 1.0
        out.append(Element(desc, c))
    return out


def embed_rank2(desc, u2):
    """Embed an element of the rank-2 subalgebra (upper-left block) into the
    rank-3 algebra's zero Peirce space."""
    if desc.rank != 3:
        raise UsageError("embed_rank2 targets a rank-3 algebra")
    sub = AlgebraDescriptor(2, desc.d)
    if u2.algebra != sub:
        raise AlgebraMismatchError("u2 must belong to the rank-2 subalgebra")
    m3 = np.zeros((3, 3), dtype=complex)
    m3[:2, :2] = to_matrix(u2)
    return from_matrix(desc, m3)


def restrict_rank2(u):
    """Inverse of embed_rank2 for elements supported on the zero space."""
    desc = u.algebra
    if desc.rank != 3:
        raise UsageError("restrict_rank2 takes a rank-3 element")
    return from_matrix(AlgebraDescriptor(2, desc.d), to_matrix(u)[:2, :2])


def _check_component(x, indices, what):
    # for the corner idempotent the Peirce projections are coordinate masks,
    # so membership is a support check
    mask = np.ones(x.algebra.n, dtype=bool)
    mask[indices] = False
    resid = float(np.linalg.norm(x.coords[mask]))
    if resid > 1e-10 * (1.0 + x.norm()):
        raise DomainError(f"element is not in the {what} Peirce component (residual {resid:.3e})")


def rho_apply(u, xi):
    """Action of the zero-space element u on the half space: rho(u) xi = 2 u o xi."""
    _require_same(u, xi)
    desc = u.algebra
    if desc.rank != 3:
        raise UsageError("rho_apply is defined on the rank-3 corner split")
    _check_component(u, _zero_space_indices(desc), "zero")
    _check_component(xi, _half_space_indices(desc), "half")
    return 2.0 * jordan_mul(u, xi)


def rho_matrix(u):
    """Matrix of rho(u) on the half space in its orthonormal coordinate basis."""
    desc = u.algebra
    idx = _half_space_indices(desc)
    cols = []
    for b in half_space_basis(desc):
        cols.append(rho_apply(u, b).coords[idx])
    return np.array(cols).T


def det_rho(u):
    """Determinant of rho(u); equals the rank-2 determinant of u to the power d."""
    return float(np.linalg.det(rho_matrix(u)))


def random_element(desc, rng, scale=1.0):
    return Element(desc, scale * rng.standard_normal(desc.n))


def random_cone_element(desc, rng, jitter=0.1):
    """A random element of the open cone (Gram matrix plus a small ridge)."""
    _require_concrete(desc)
    r = desc.rank
    if r == 1:
        return Element(desc, np.array([math.exp(rng.standard_normal())]))
    if float(desc.d) == 2.0:
        g = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    else:
        g = rng.standard_normal((r, r))
    m = g @ np.conj(g.T) / r + jitter * np.eye(r)
    return from_matrix(desc, m)


def element_to_json(x):
    return {"rank": x.algebra.rank, "d": x.algebra.d, "coords": list(map(float, x.coords))}


def element_from_json(obj):
    desc = AlgebraDescriptor(int(obj["rank"]), float(obj["d"]))
    return Element(desc, np.asarray(obj["coords"], dtype=float))
