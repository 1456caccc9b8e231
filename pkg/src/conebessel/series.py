"""Series evaluators for the multivariate Bessel functions on rank-1/2/3
cones, their coefficient tables, and finite-difference residuals of the
defining differential systems.

Every series here is a power sum over an integer lattice.  The headline
subtlety is the summation support: the reciprocal-Pochhammer coefficient of
each term stays meaningful (and nonzero) on lattice points where some
indices are negative, as long as the composite indices feeding plain
factorials remain non-negative.  Those "extension" terms are required —
with them each series satisfies its differential system to machine
precision; without them the second-order operators leave boundary residue.
The price is a genuine convergence domain for the extended sums:

  * the m1-extensions converge iff 4 t2 / t1^2 < 1,
  * the m2-extensions converge iff 4 t1 t3 / t2^2 < 1,

i.e. the underlying eigenvalues must be well separated (a geometric spacing
ratio above ~2.62 suffices; we test at >= 4).  Inside the domain the layer
sums decay geometrically and truncation is clean; outside, evaluation fails
honestly with NoConvergenceError.

Terms are assembled in sign/log space from log-gamma differences, so
individual Pochhammer factors may reach 1e300 without overflowing.
"""

import math
from collections import OrderedDict
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import (
    DomainError,
    IllConditionedPointError,
    NoConvergenceError,
    NonGenericParameterError,
    UsageError,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SeriesParams:
    nu: float
    d: float
    tol: float = 1e-13
    max_degree: int = 200
    pole_guard: float = 1e-6

    def __post_init__(self):
        if self.d <= 0:
            raise UsageError(f"d must be positive, got {self.d}")
        if not (0 < self.tol < 1):
            raise UsageError("tol must be in (0, 1)")
        if self.max_degree < 4:
            raise UsageError("max_degree too small")


@dataclass(frozen=True)
class SymmetricPoint:
    t: tuple

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))

    def __iter__(self):
        return iter(self.t)

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i):
        return self.t[i]


@dataclass(frozen=True)
class EvalResult:
    value: float
    err: float
    work: int


@dataclass(frozen=True)
class CoefficientTable:
    a: tuple
    b: tuple
    nu: float
    d: float


def elem_sym(x):
    """Elementary symmetric functions (t1, ..., tr) of up to three values."""
    x = tuple(float(v) for v in x)
    r = len(x)
    if not 1 <= r <= 3:
        raise UsageError("elem_sym takes 1 to 3 values")
    if r == 1:
        return SymmetricPoint((x[0],))
    if r == 2:
        return SymmetricPoint((x[0] + x[1], x[0] * x[1]))
    t1 = x[0] + x[1] + x[2]
    t2 = x[0] * x[1] + x[0] * x[2] + x[1] * x[2]
    t3 = x[0] * x[1] * x[2]
    return SymmetricPoint((t1, t2, t3))


def pochhammer(a, k):
    """Rising factorial (a)_k = a(a+1)...(a+k-1) as (sign, log-magnitude).

    Sign 0 encodes an exact zero (a at a non-positive integer swallowed by
    the product).  k must be non-negative.
    """
    if k < 0 or int(k) != k:
        raise UsageError("pochhammer is defined here for non-negative integer k")
    k = int(k)
    if k == 0:
        return (1, 0.0)
    a = float(a)
    ai = round(a)
    if a == ai and ai <= 0:
        if ai + k >= 1:
            return (0, -math.inf)  # the product crosses zero
        # product of negative integers: compute via positive factorials
        sign = 1 if k % 2 == 0 else -1
        mag = math.lgamma(1 - a) - math.lgamma(1 - a - k)
        return (sign, mag)
    s = gammasgn(a + k) * gammasgn(a)
    return (int(s), float(gammaln(a + k) - gammaln(a)))


# --- series catalogue --------------------------------------------------------
#
# Each factor is ((c0, c_nu, c_d), weights): the Pochhammer base is
# c0 + c_nu*nu + c_d*d and the index is the weighted sum of the lattice
# indices.  "dens" divide, "nums" multiply.  Prefactors are extra real
# powers of the variables, again affine in (nu, d).

_SERIES = {
    "r2j1": dict(
        rank=2,
        dens=[((1, 0, 0), (1, 0)), ((1, 0, 0), (0, 1)),
              ((1, 1, 0), (0, 1)), ((1, 1, 0.5), (1, 2))],
        nums=[],
        prefactor={},
    ),
    "r2j2": dict(
        rank=2,
        dens=[((1, -1, -0.5), (1, 0)), ((1, 0, 0), (0, 1)),
              ((1, 1, 0), (0, 1)), ((1, 0, 0), (1, 2))],
        nums=[],
        prefactor={0: (0, -1, -0.5)},
    ),
    "r3j1": dict(
        rank=3,
        dens=[((1, 0, 0), (1, 0, 0)), ((1, 0, 0), (0, 1, 0)), ((1, 0, 0), (0, 0, 1)),
              ((1, 1, 0), (0, 0, 1)), ((1, 1, 0.5), (0, 1, 2)),
              ((1, 1, 1), (1, 2, 3)), ((1, 2, 1), (1, 2, 3))],
        nums=[((1, 2, 1), (1, 2, 4))],
        prefactor={},
    ),
    "r3j2": dict(
        rank=3,
        dens=[((1, -1, -1), (1, 0, 0)), ((1, 0, 0), (0, 1, 0)), ((1, 0, 0), (0, 0, 1)),
              ((1, 1, 0), (0, 0, 1)), ((1, 1, 0.5), (0, 1, 2)),
              ((1, 0, 0), (1, 2, 3)), ((1, 1, 0), (1, 2, 3))],
        nums=[((1, 1, 0), (1, 2, 4))],
        prefactor={0: (0, -1, -1)},
    ),
    "r3j3": dict(
        rank=3,
        dens=[((1, 0, 0), (1, 0, 0)), ((1, -1, -0.5), (0, 1, 0)), ((1, 0, 0), (0, 0, 1)),
              ((1, 1, 0), (0, 0, 1)), ((1, 0, 0), (0, 1, 2)),
              ((1, -1, 0), (1, 2, 3)), ((1, 0, 0), (1, 2, 3))],
        nums=[((1, 0, 0), (1, 2, 4))],
        prefactor={1: (0, -1, -0.5)},
    ),
    "r3j4": dict(
        rank=3,
        dens=[((1, 1, 0), (1, 0, 0)), ((1, -1, -0.5), (0, 1, 0)), ((1, 0, 0), (0, 0, 1)),
              ((1, 1, 0), (0, 0, 1)), ((1, 0, 0), (0, 1, 2)),
              ((1, 0, 0), (1, 2, 3)), ((1, 1, 0), (1, 2, 3))],
        nums=[((1, 1, 0), (1, 2, 4))],
        prefactor={0: (0, 1, 0), 1: (0, -1, -0.5)},
    ),
}

# Weighted layer functional used for truncation.  The weights are chosen so
# that every admissible lattice direction — including the negative-index
# extension rays — strictly increases the layer, keeping layers finite.
_LAYER_W = {2: (2, 5), 3: (2, 5, 9)}

# factorial-type composite constraints that define the admissible lattice
_SUPPORT = {
    "r2j1": lambda m: (m[0] >= 0) & (m[1] >= 0),
    "r2j2": lambda m: (m[1] >= 0) & (m[0] + 2 * m[1] >= 0),
    "r3j1": lambda m: (m[0] >= 0) & (m[1] >= 0) & (m[2] >= 0),
    "r3j2": lambda m: (m[1] >= 0) & (m[2] >= 0) & (m[0] + 2 * m[1] + 3 * m[2] >= 0),
    "r3j3": lambda m: (m[0] >= 0) & (m[2] >= 0) & (m[1] + 2 * m[2] >= 0)
                      & (m[0] + 2 * m[1] + 3 * m[2] >= 0),
    "r3j4": lambda m: (m[2] >= 0) & (m[1] + 2 * m[2] >= 0)
                      & (m[0] + 2 * m[1] + 3 * m[2] >= 0),
}

# smallest exponent each variable can take over the support: a 0 means the
# variable may vanish at the evaluation point, a negative entry means it
# must stay away from zero
_MIN_EXPONENT = {
    "r2j1": (0, 0), "r2j2": (None, 0),
    "r3j1": (0, 0, 0), "r3j2": (None, 0, 0),
    "r3j3": (0, None, 0), "r3j4": (None, None, 0),
}


def _affine(coeffs, nu, d):
    c0, cn, cd = coeffs
    return c0 + cn * nu + cd * d


def _base_label(coeffs):
    c0, cn, cd = coeffs
    parts = [f"{c0:g}"]
    if cn:
        parts.append(("+" if cn > 0 else "-") + (f"{abs(cn):g}" if abs(cn) != 1 else "") + "nu")
    if cd:
        parts.append(("+" if cd > 0 else "-") + (f"{abs(cd):g}" if abs(cd) != 1 else "") + "d")
    return "(" + "".join(parts) + ")"


def _check_generic(tag, nu, d, pole_guard):
    info = _SERIES[tag]
    for coeffs, _w in info["dens"] + info["nums"]:
        if coeffs[1] == 0:
            continue  # plain factorial base, handled by the support
        a = _affine(coeffs, nu, d)
        if abs(a - round(a)) <= pole_guard:
            raise NonGenericParameterError(_base_label(coeffs), a)


class _LRU(OrderedDict):
    def __init__(self, maxitems):
        super().__init__()
        self.maxitems = maxitems

    def put(self, key, value):
        self[key] = value
        self.move_to_end(key)
        while len(self) > self.maxitems:
            self.popitem(last=False)


# large caps can reach a few million lattice points, so keep these small
_lattice_cache = _LRU(8)
_coeff_cache = _LRU(16)

# admissible floors of the leading indices on each extended support
_M1_FLOOR = {
    "r2j1": lambda m2, m3=0: np.zeros_like(m2),
    "r2j2": lambda m2, m3=0: -2 * m2,
    "r3j1": lambda m2, m3: np.zeros_like(m2),
    "r3j2": lambda m2, m3: -2 * m2 - 3 * m3,
    "r3j3": lambda m2, m3: np.maximum(0, -2 * m2 - 3 * m3),
    "r3j4": lambda m2, m3: -2 * m2 - 3 * m3,
}
_M2_FLOOR = {"r3j1": 0, "r3j2": 0, "r3j3": -2, "r3j4": -2}  # times m3

# smallest layer increment bought by one unit of the trailing index when the
# leading indices sit on their support floors; this bounds how deep the
# enumeration must walk (e.g. on the r3j4 ray m1 = -2 m2 - 3 m3, m2 = -2 m3
# the layer grows by just 1 per unit of m3)
_M3_COST = {"r3j1": 9, "r3j2": 3, "r3j3": 1, "r3j4": 1}
_M2_COST = {"r2j1": 5, "r2j2": 1}

# lattices and coefficient tables beyond this size are recomputed rather than
# cached; a handful of deep-cap entries would otherwise pin gigabytes
_CACHE_POINT_LIMIT = 4_000_000


def _ranges(lo, hi):
    """Concatenate inclusive integer ranges [lo_i, hi_i]; empty where hi < lo."""
    lengths = np.maximum(hi - lo + 1, 0).astype(np.int64)
    total = int(lengths.sum())
    idx = np.arange(total, dtype=np.int64)
    starts = np.cumsum(lengths) - lengths
    vals = np.repeat(lo, lengths) + idx - np.repeat(starts, lengths)
    return vals, lengths


def _lattice(tag, cap):
    """All admissible lattice points with layer <= cap, plus layer index and
    the (-1)^(m1+m3) sign used by the oscillatory variant.

    The extension rays make the sets genuinely non-rectangular: m1 runs down
    to its support floor (which depends on m2, m3), and m2/m3 can climb to
    O(cap) along the low-layer edges, so the points are enumerated exactly
    instead of boxed.
    """
    key = (tag, cap)
    hit = _lattice_cache.get(key)
    if hit is not None:
        return hit
    info = _SERIES[tag]
    w = _LAYER_W[info["rank"]]
    if info["rank"] == 2:
        m2 = np.arange(0, cap // _M2_COST[tag] + 1, dtype=np.int64)
        lo = _M1_FLOOR[tag](m2)
        hi = (cap - 5 * m2) // 2
        m1, lengths = _ranges(lo, hi)
        M = (m1, np.repeat(m2, lengths))
    else:
        parts = ([], [], [])
        for m3v in range(0, cap // _M3_COST[tag] + 1):
            m2_hi = (cap - 9 * m3v) // 5 if tag == "r3j1" else cap - 3 * m3v
            m2 = np.arange(_M2_FLOOR[tag] * m3v, m2_hi + 1, dtype=np.int64)
            m3 = np.full_like(m2, m3v)
            lo = _M1_FLOOR[tag](m2, m3)
            hi = (cap - 5 * m2 - 9 * m3v) // 2
            m1, lengths = _ranges(lo, hi)
            if len(m1):
                parts[0].append(m1)
                parts[1].append(np.repeat(m2, lengths))
                parts[2].append(np.repeat(m3, lengths))
        M = tuple(np.concatenate(p) if p else np.zeros(0, np.int64) for p in parts)
    L = sum(wi * Mi for wi, Mi in zip(w, M))
    keep = _SUPPORT[tag](M) & (L >= 0) & (L <= cap)
    M = tuple(Mi[keep] for Mi in M)
    L = L[keep]
    alt = np.where((M[0] + (M[2] if len(M) == 3 else 0)) % 2 == 0, 1.0, -1.0)
    out = (M, L, alt)
    if len(L) <= _CACHE_POINT_LIMIT:
        _lattice_cache.put(key, out)
    return out


def _coeffs(tag, nu, d, cap):
    """Sign and log-magnitude of the lattice coefficients (no variant sign)."""
    key = (tag, float(nu), float(d), cap)
    hit = _coeff_cache.get(key)
    if hit is not None:
        return hit
    M, L, alt = _lattice(tag, cap)
    info = _SERIES[tag]
    logc = np.zeros(len(L))
    sign = np.ones(len(L))
    for where, factors in (("num", info["nums"]), ("den", info["dens"])):
        for coeffs, w in factors:
            a = _affine(coeffs, nu, d)
            k = sum(wi * Mi for wi, Mi in zip(w, M))
            arg = a + k
            piece = gammaln(arg) - gammaln(a)
            s = gammasgn(arg) * gammasgn(a)
            if where == "num":
                logc += piece
            else:
                logc -= piece
            sign *= s
    out = (M, L, alt, logc, sign)
    if len(L) <= _CACHE_POINT_LIMIT:
        _coeff_cache.put(key, out)
    return out


def _caps_schedule(max_degree):
    # The layer functional is at least twice the composite degree
    # m1 + 2 m2 + 3 m3 on the admissible set, so capping layers at
    # 2*max_degree enforces the documented degree cap.
    hard = 2 * max_degree
    caps, c = [], 48
    while c < hard:
        caps.append(c)
        c *= 2
    caps.append(hard)
    return caps


# quiet layers demanded before the tail is declared settled: 3 to rule out a
# single sign-cancellation dip, plus a lookahead margin against a shallow
# valley between two humps of the envelope
_QUIET_LAYERS = 11


def _scan_layers(layers, has_pts, tol):
    """Walk layer sums; stop once _QUIET_LAYERS consecutive occupied layers
    stay below tol * |partial|.  Returns (value, err, stop_layer) or None."""
    partial = 0.0
    consec = 0
    run_max = 0.0
    for i in range(len(layers)):
        if not has_pts[i]:
            continue
        li = layers[i]
        if not math.isfinite(li):
            return None
        partial += li
        if abs(li) <= tol * max(abs(partial), 1e-300):
            consec += 1
            run_max = max(run_max, abs(li))
            if consec == _QUIET_LAYERS:
                return partial, run_max, i
        else:
            consec = 0
            run_max = 0.0
    return None


def _eval_series(tag, nu, d, t, tol, max_degree, pole_guard, variant):
    info = _SERIES[tag]
    _check_generic(tag, nu, d, pole_guard)
    rank = info["rank"]
    t = tuple(float(v) for v in t)
    if len(t) != rank:
        raise UsageError(f"expected {rank} variables, got {len(t)}")

    pref_exp = {i: _affine(c, nu, d) for i, c in info["prefactor"].items()}
    for i, v in enumerate(t):
        alpha = pref_exp.get(i, 0.0)
        if alpha != 0.0 and v <= 0.0:
            raise DomainError(
                f"variable t{i + 1} = {v:g} must be positive (real power {alpha:g})")
        if v == 0.0 and _MIN_EXPONENT[tag][i] is None:
            raise DomainError(f"t{i + 1} = 0 is a singular point of this series")

    log_pref = sum(alpha * math.log(t[i]) for i, alpha in pref_exp.items() if alpha != 0.0)
    pref = math.exp(log_pref)

    last_partial, last_layers = None, None
    for cap in _caps_schedule(max_degree):
        M, L, alt, logc, sign = _coeffs(tag, nu, d, cap)
        logt = np.zeros(len(L))
        tsign = np.ones(len(L))
        dead = np.zeros(len(L), dtype=bool)
        for i in range(rank):
            v, Mi = t[i], M[i]
            if v == 0.0:
                dead |= Mi != 0
            else:
                logt += Mi * math.log(abs(v))
                if v < 0.0:
                    tsign *= np.where(Mi % 2 == 0, 1.0, -1.0)
        with np.errstate(over="ignore"):
            terms = sign * tsign * np.exp(logc + logt)
        if variant == "alternating":
            terms = terms * alt
        terms[dead] = 0.0
        layers = np.bincount(L, weights=terms, minlength=cap + 1)
        has_pts = np.bincount(L, minlength=cap + 1) > 0
        hit = _scan_layers(layers, has_pts, tol)
        if hit is not None:
            value, err, stop = hit
            work = int(np.count_nonzero(L <= stop))
            return EvalResult(pref * value, abs(pref) * err, work)
        finite = layers[np.isfinite(layers)]
        last_partial = pref * float(np.sum(finite))
        last_layers = layers

    occupied = np.abs(last_layers[has_pts & np.isfinite(last_layers)])
    tail = occupied[-10:]
    head = occupied[len(occupied) // 2: len(occupied) // 2 + 10]
    growing = len(tail) and len(head) and np.mean(tail) > np.mean(head)
    raise NoConvergenceError(
        partial=last_partial,
        err=abs(pref) * float(tail[-1]) if len(tail) else math.inf,
        work=len(last_layers),
        message=(
            "series did not settle within the degree cap"
            + (" and the layer sums are growing — the point is outside the "
               "convergence domain (it needs better-separated eigenvalues: "
               "t1^2 > 4 t2 for the m1-extended series, t2^2 > 4 t1 t3 for "
               "the m2-extended ones)" if growing else
               "; raise max_degree or loosen tol")
            + f" (partial sum {last_partial:.6g})"
        ),
    )


def _as_t(t):
    if isinstance(t, SymmetricPoint):
        return t.t
    return tuple(float(v) for v in t)


def j2(j, p, t, variant="alternating"):
    """Rank-2 series solution j in {1, 2} at t = (t1, t2).

    `variant` selects the sign pattern: "alternating" is the solution of the
    differential system proper ((-1)^m1 signs); "positive" is its companion
    with all-plus terms, which is what the cone-integral combinations use.
    """
    if j not in (1, 2):
        raise UsageError("rank-2 series index must be 1 or 2")
    if variant not in ("alternating", "positive"):
        raise UsageError("variant must be 'alternating' or 'positive'")
    return _eval_series(f"r2j{j}", p.nu, p.d, _as_t(t), p.tol, p.max_degree,
                        p.pole_guard, variant)


def j3(j, p, t, variant="alternating"):
    """Rank-3 series solution j in {1..4} at t = (t1, t2, t3); see j2."""
    if j not in (1, 2, 3, 4):
        raise UsageError("rank-3 series index must be 1..4")
    if variant not in ("alternating", "positive"):
        raise UsageError("variant must be 'alternating' or 'positive'")
    return _eval_series(f"r3j{j}", p.nu, p.d, _as_t(t), p.tol, p.max_degree,
                        p.pole_guard, variant)


def j_solution(rank, j, p, partner=False, variant="alternating"):
    """A plain t -> value callable for one of the 2r series solutions.

    With partner=True this is the second family: t_r^(-nu) times the series
    of order -nu.
    """
    ev = {2: j2, 3: j3}[rank]

    def f(t):
        t = _as_t(t)
        if partner:
            q = replace(p, nu=-p.nu)
            return t[-1] ** (-p.nu) * ev(j, q, t, variant=variant).value
        return ev(j, p, t, variant=variant).value

    return f


# --- coefficient tables and K combinations -----------------------------------

def _gamma_checked(label, x, pole_guard):
    if abs(x - round(x)) <= pole_guard and round(x) <= 0:
        raise NonGenericParameterError(label, x)
    return math.gamma(x)


def k2_coeffs(nu, d, pole_guard=1e-6):
    """The four weights of the rank-2 combination, ordered to match
    (J1_nu, J2_nu, t2^-nu J1_-nu, t2^-nu J2_-nu)."""
    g = lambda lbl, x: _gamma_checked(lbl, x, pole_guard)
    pref = TWO_PI ** (d / 2.0)
    return (
        pref * g("(-nu)", -nu) * g("(-nu-d/2)", -nu - d / 2),
        pref * g("(-nu)", -nu) * g("(nu+d/2)", nu + d / 2),
        pref * g("(nu)", nu) * g("(nu-d/2)", nu - d / 2),
        pref * g("(nu)", nu) * g("(-nu+d/2)", -nu + d / 2),
    )


def coeffs3(nu, d, pole_guard=1e-6):
    """The eight rank-3 combination weights; the b row is the a row at -nu."""

    def row(v):
        g = lambda lbl, x: _gamma_checked(lbl, x, pole_guard)
        pref = TWO_PI ** (1.5 * d)
        return (
            pref * g("(-nu)", -v) * g("(-nu-d/2)", -v - d / 2) * g("(-nu-d)", -v - d),
            pref * g("(-nu)", -v) * g("(-nu-d/2)", -v - d / 2) * g("(nu+d)", v + d),
            pref * g("(-nu)", -v) * g("(nu+d/2)", v + d / 2) * g("(nu)", v),
            pref * g("(-nu)", -v) * g("(nu+d/2)", v + d / 2) * g("(-nu)", -v),
        )

    return CoefficientTable(a=row(nu), b=row(-nu), nu=nu, d=d)


_TOL_FLOOR = 3e-16


def _combine(weights, evaluate, tol):
    """Weighted sum of series evaluations, resolved to the accuracy the sum
    itself needs.

    The weighted parts are exponentially larger than the combination they
    cancel down to, so each part must be resolved relative to the *sum*, not
    to itself.  A first pass at the requested tolerance measures the
    cancellation; if it is heavy, the parts are re-evaluated tighter (the
    lattice/coefficient caches make the second pass cheap).  The reported err
    includes the floating-point floor eps * sum(|weighted parts|), which is
    irreducible in double precision.
    """
    def one_pass(tol_eff):
        value = err = gross = 0.0
        work = 0
        for w, ev in zip(weights, evaluate):
            r = ev(tol_eff)
            value += w * r.value
            err += abs(w) * r.err
            gross += abs(w) * abs(r.value)
            work += r.work
        return value, err, gross, work

    value, err, gross, work = one_pass(tol)
    cond = gross / max(abs(value), 1e-300)
    tol_needed = max(tol / cond, _TOL_FLOOR)
    if tol_needed < tol:
        value, err, gross, work = one_pass(tol_needed)
    return EvalResult(value, err + 2.3e-16 * gross, work)


def k2_series(p, t):
    """K-function on the rank-2 cone as the four-series combination.

    Uses the positive-sign companion series; the combination equals the cone
    integral with overall constant exactly 1 (pinned against quadrature).
    """
    t = _as_t(t)
    if len(t) != 2:
        raise UsageError("k2_series takes t = (t1, t2)")
    if t[0] <= 0 or t[1] <= 0:
        raise DomainError("k2_series needs t1, t2 > 0")
    c = k2_coeffs(p.nu, p.d, p.pole_guard)
    q = replace(p, nu=-p.nu)
    det_pow = t[1] ** (-p.nu)
    weights = (c[0], c[1], c[2] * det_pow, c[3] * det_pow)
    evaluate = [
        lambda tol, pp=pp, jj=jj: j2(jj, replace(pp, tol=tol), t, variant="positive")
        for pp, jj in ((p, 1), (p, 2), (q, 1), (q, 2))
    ]
    return _combine(weights, evaluate, p.tol)


def k3_series(p, t):
    """K-function on the rank-3 cone as the eight-series combination."""
    t = _as_t(t)
    if len(t) != 3:
        raise UsageError("k3_series takes t = (t1, t2, t3)")
    if min(t) <= 0:
        raise DomainError("k3_series needs t1, t2, t3 > 0")
    table = coeffs3(p.nu, p.d, p.pole_guard)
    q = replace(p, nu=-p.nu)
    det_pow = t[2] ** (-p.nu)
    weights = []
    evaluate = []
    for jj in range(1, 5):
        weights += [table.a[jj - 1], table.b[jj - 1] * det_pow]
        evaluate += [
            lambda tol, jj=jj: j3(jj, replace(p, tol=tol), t, variant="positive"),
            lambda tol, jj=jj: j3(jj, replace(q, tol=tol), t, variant="positive"),
        ]
    return _combine(weights, evaluate, p.tol)


# --- finite-difference residuals ---------------------------------------------

class _GridEval:
    """Caching evaluator on a regular stencil grid around a base point.

    Offsets are integer multiples of half the step vector, so every stencil
    shares evaluations between the coarse and fine Richardson passes.
    """

    def __init__(self, f, base, h):
        self.f = f
        self.base = np.asarray(base, dtype=float)
        self.h = np.asarray(h, dtype=float)
        self.cache = {}

    def at(self, mults):
        v = self.cache.get(mults)
        if v is None:
            pt = self.base + 0.5 * self.h * np.asarray(mults)
            v = float(self.f(tuple(pt)))
            self.cache[mults] = v
        return v

    def _offset(self, i, u):
        m = [0] * len(self.base)
        m[i] = u
        return tuple(m)

    def _d1_once(self, i, scale):
        u = int(2 * scale)
        s = scale * self.h[i]
        return (-self.at(self._offset(i, 2 * u)) + 8 * self.at(self._offset(i, u))
                - 8 * self.at(self._offset(i, -u)) + self.at(self._offset(i, -2 * u))) / (12 * s)

    def _d2_once(self, i, scale):
        u = int(2 * scale)
        s = scale * self.h[i]
        return (-self.at(self._offset(i, 2 * u)) + 16 * self.at(self._offset(i, u))
                - 30 * self.at(self._offset(i, 0)) + 16 * self.at(self._offset(i, -u))
                - self.at(self._offset(i, -2 * u))) / (12 * s * s)

    def _dmix_once(self, i, j, scale):
        u = int(2 * scale)
        si, sj = scale * self.h[i], scale * self.h[j]
        wts = ((2 * u, -1.0), (u, 8.0), (-u, -8.0), (-2 * u, 1.0))
        acc = 0.0
        for oi, wi in wts:
            for oj, wj in wts:
                m = [0] * len(self.base)
                m[i] += oi
                m[j] += oj
                acc += wi * wj * self.at(tuple(m))
        return acc / (144 * si * sj)

    @staticmethod
    def _richardson(stencil):
        # one step of extrapolation on 4th-order stencils
        return (16.0 * stencil(0.5) - stencil(1.0)) / 15.0

    def value(self):
        return self.at(tuple([0] * len(self.base)))

    def d1(self, i):
        return self._richardson(lambda s: self._d1_once(i, s))

    def d2(self, i, j):
        if i == j:
            return self._richardson(lambda s: self._d2_once(i, s))
        return self._richardson(lambda s: self._dmix_once(i, j, s))


def _fd_step(point):
    return np.maximum(1e-3 * np.abs(point), 1e-4)


def _t_lookup(t, p):
    """t_p with the boundary convention t_0 = 1, t_p = 0 outside 0..r."""
    r = len(t)
    if p == 0:
        return 1.0
    if 1 <= p <= r:
        return t[p - 1]
    return 0.0


def _symmetric_coeff(t, k, i, j):
    # the second-order coefficient table of the t-space system
    if i >= k and j >= k:
        return _t_lookup(t, i + j - k)
    if i < k and j < k and i + j >= k:
        return -_t_lookup(t, i + j - k)
    return 0.0


def _z_residuals_grid(f, p, t):
    """Shared-stencil evaluation of all r t-space operator residuals at t."""
    t = _as_t(t)
    r = len(t)
    grid = _GridEval(f, t, _fd_step(t))
    f0 = grid.value()
    d1 = [grid.d1(i) for i in range(r)]
    need = {}
    for k in range(1, r + 1):
        for i in range(1, r + 1):
            for j in range(1, r + 1):
                if _symmetric_coeff(t, k, i, j) != 0.0:
                    need[(i - 1, j - 1)] = None
    for (i, j) in list(need):
        need[(i, j)] = grid.d2(i, j) if i <= j else None
    out = []
    for k in range(1, r + 1):
        acc = (1.0 if k == 1 else 0.0) * f0
        acc += (p.nu + 1 + (r - k) * p.d / 2.0) * d1[k - 1]
        for i in range(1, r + 1):
            for j in range(1, r + 1):
                a = _symmetric_coeff(t, k, i, j)
                if a != 0.0:
                    key = (min(i, j) - 1, max(i, j) - 1)
                    acc += a * need[key]
        out.append(acc)
    return out


def z_residuals(f, p, t):
    """Residuals of all r t-space operators at t, sharing one stencil grid.

    Derivatives are 4th-order central differences with one Richardson step;
    t must be interior to f's domain of validity (the stencil steps a few
    multiples of max(1e-3|t|, 1e-4) in every direction).
    """
    return _z_residuals_grid(f, p, _as_t(t))


def z_residual(k, f, p, t):
    """Residual of the k-th t-space operator applied to a scalar function f(t)."""
    t = _as_t(t)
    r = len(t)
    if not 1 <= k <= r:
        raise UsageError(f"operator index k must be in 1..{r}")
    return _z_residuals_grid(f, p, t)[k - 1]


def muirhead_residuals(f, p, x):
    """Residuals of all r eigenvalue-space operators at x, sharing one grid.

    f takes the eigenvalue vector directly; compose with elem_sym (see
    on_eigenvalues) to test a t-space series.  The x_i must be pairwise
    separated (the operators divide by their differences).
    """
    x = tuple(float(v) for v in x)
    r = len(x)
    for a in range(r):
        for b in range(a + 1, r):
            if abs(x[a] - x[b]) <= 1e-3:
                raise IllConditionedPointError(
                    f"x{a + 1} and x{b + 1} differ by {abs(x[a] - x[b]):.2e} <= 1e-3")
    grid = _GridEval(f, x, _fd_step(x))
    f0 = grid.value()
    d1 = [grid.d1(j) for j in range(r)]
    out = []
    for ii in range(r):
        acc = x[ii] * grid.d2(ii, ii) + (p.nu + 1) * d1[ii] + f0
        for jj in range(r):
            if jj != ii:
                acc += (p.d / 2.0) * (x[ii] * d1[ii] - x[jj] * d1[jj]) / (x[ii] - x[jj])
        out.append(acc)
    return out


def muirhead_residual(i, f, p, x):
    """Residual of the i-th eigenvalue-space operator applied to f(x)."""
    if not 1 <= i <= len(tuple(x)):
        raise UsageError(f"operator index i must be in 1..{len(tuple(x))}")
    return muirhead_residuals(f, p, x)[i - 1]


def on_eigenvalues(f):
    """Lift a t-space callable to eigenvalue space: x -> f(elem_sym(x))."""
    return lambda x: f(elem_sym(x).t)
