"""Unit tests for the Jordan-algebra layer.

Ground truth throughout is the dense matrix picture: numpy's linear algebra
applied to to_matrix images.  Every structured operation (characteristic
coefficients, inverse, spectral frame, quadratic representation, Peirce
projections) must reproduce what the dense computation says.
"""

import math

import numpy as np
import pytest

from conebessel import algebra as al
from conebessel.errors import (
    AlgebraMismatchError,
    DomainError,
    SingularElementError,
    UnsupportedAlgebraError,
    UsageError,
)

R1 = al.AlgebraDescriptor(1, 1.0)
R2D1 = al.AlgebraDescriptor(2, 1.0)
R2D2 = al.AlgebraDescriptor(2, 2.0)
R3D1 = al.AlgebraDescriptor(3, 1.0)
R3D2 = al.AlgebraDescriptor(3, 2.0)
CONCRETE = (R1, R2D1, R2D2, R3D1, R3D2)
MATRIX_RANKS = (R2D1, R2D2, R3D1, R3D2)


# --- dense-matrix oracles -----------------------------------------------------

def eig_oracle(x):
    """Eigenvalues of the matrix picture, descending."""
    lam = np.linalg.eigvalsh(al.to_matrix(x))
    return lam[::-1]


def esym_oracle(lam):
    """Elementary symmetric functions of an eigenvalue vector."""
    r = len(lam)
    if r == 1:
        return (lam[0],)
    if r == 2:
        return (lam[0] + lam[1], lam[0] * lam[1])
    return (
        lam[0] + lam[1] + lam[2],
        lam[0] * lam[1] + lam[0] * lam[2] + lam[1] * lam[2],
        lam[0] * lam[1] * lam[2],
    )


def sandwich_oracle(x, y):
    mx, my = al.to_matrix(x), al.to_matrix(y)
    return al.from_matrix(x.algebra, mx @ my @ mx)


# --- coordinates and the matrix picture ---------------------------------------

def test_descriptor_dimension():
    assert R1.n == 1
    assert R2D1.n == 3
    assert R2D2.n == 4
    assert R3D1.n == 6
    assert R3D2.n == 9
    # series-only multiplicities still get a consistent dimension count
    assert al.AlgebraDescriptor(3, 4.0).n == 15
    assert al.AlgebraDescriptor(3, 8.0).n == 27
    assert al.AlgebraDescriptor(2, 8.0).n == 10


def test_descriptor_validation():
    with pytest.raises(UsageError):
        al.AlgebraDescriptor(4, 1.0)
    with pytest.raises(UsageError):
        al.AlgebraDescriptor(2, -1.0)


def test_series_only_descriptor_has_no_matrix_backing():
    desc = al.AlgebraDescriptor(3, 4.0)
    assert not desc.concrete
    x = al.unit(desc)
    with pytest.raises(UnsupportedAlgebraError):
        al.to_matrix(x)
    with pytest.raises(UnsupportedAlgebraError):
        al.jordan_mul(x, x)
    with pytest.raises(UnsupportedAlgebraError):
        al.det(x)


def test_element_coordinate_validation():
    with pytest.raises(UsageError):
        al.Element(R2D1, np.zeros(4))
    with pytest.raises(AlgebraMismatchError):
        al.unit(R2D1) + al.unit(R2D2)
    with pytest.raises(AlgebraMismatchError):
        al.inner(al.unit(R3D1), al.unit(R3D2))


def test_coordinates_are_trace_orthonormal():
    # the coordinate dot product must equal the matrix trace form
    rng = np.random.default_rng(41)
    for desc in MATRIX_RANKS:
        for _ in range(200):
            x = al.random_element(desc, rng)
            y = al.random_element(desc, rng)
            tr_form = np.trace(al.to_matrix(x) @ al.to_matrix(y)).real
            assert abs(al.inner(x, y) - tr_form) < 1e-12 * (1 + x.norm() * y.norm())


def test_matrix_round_trip():
    rng = np.random.default_rng(42)
    for desc in MATRIX_RANKS:
        for _ in range(100):
            x = al.random_element(desc, rng)
            back = al.from_matrix(desc, al.to_matrix(x))
            assert np.allclose(back.coords, x.coords, atol=1e-14)


def test_from_matrix_symmetrizes_noise():
    m = np.array([[1.0, 0.5 + 1e-13], [0.5 - 1e-13, 2.0]])
    x = al.from_matrix(R2D1, m)
    assert abs(x.coords[2] - 0.5 * math.sqrt(2.0)) < 1e-12


# --- product, trace, determinant ----------------------------------------------

def test_jordan_product_basics():
    rng = np.random.default_rng(43)
    for desc in CONCRETE:
        e = al.unit(desc)
        for _ in range(50):
            x = al.random_element(desc, rng)
            y = al.random_element(desc, rng)
            assert (al.jordan_mul(e, x) - x).norm() < 1e-13 * (1 + x.norm())
            # commutativity
            assert (al.jordan_mul(x, y) - al.jordan_mul(y, x)).norm() < 1e-13


def test_jordan_identity():
    # x^2 o (x o y) = x o (x^2 o y): the defining non-associative axiom
    rng = np.random.default_rng(44)
    for desc in MATRIX_RANKS:
        for _ in range(300):
            x = al.random_element(desc, rng)
            y = al.random_element(desc, rng)
            x2 = al.jordan_mul(x, x)
            lhs = al.jordan_mul(x2, al.jordan_mul(x, y))
            rhs = al.jordan_mul(x, al.jordan_mul(x2, y))
            scale = 1.0 + x.norm() ** 3 * y.norm()
            assert (lhs - rhs).norm() < 1e-12 * scale


def test_rank1_product_is_scalar_multiplication():
    x = al.Element(R1, np.array([3.0]))
    y = al.Element(R1, np.array([-2.0]))
    assert al.jordan_mul(x, y).coords[0] == -6.0
    assert al.det(x) == 3.0
    assert al.trace(x) == 3.0


def test_trace_and_det_against_matrix():
    rng = np.random.default_rng(45)
    for desc in MATRIX_RANKS:
        for _ in range(100):
            x = al.random_element(desc, rng)
            m = al.to_matrix(x)
            assert abs(al.trace(x) - np.trace(m).real) < 1e-12 * (1 + x.norm())
            assert abs(al.det(x) - np.linalg.det(m).real) < 1e-10 * (1 + x.norm()) ** 3


# --- characteristic coefficients ------------------------------------------------

def test_char_coeffs_literals():
    # determinants go through an LU factorization, so allow an ulp of slack
    assert np.allclose(al.char_coeffs(al.unit(R3D1)), (3.0, 3.0, 1.0), atol=1e-14)
    got = al.char_coeffs(al.from_diag(R3D1, (1.0, 2.0, 3.0)))
    assert np.allclose(got, (6.0, 11.0, 6.0), atol=1e-13)
    assert np.allclose(al.char_coeffs(al.from_diag(R2D2, (2.0, 5.0))), (7.0, 10.0), atol=1e-13)
    assert al.char_coeffs(al.Element(R1, np.array([4.0]))) == (4.0,)


def test_char_coeffs_match_eigenvalue_symmetrics():
    rng = np.random.default_rng(46)
    for desc in MATRIX_RANKS:
        for _ in range(300):
            x = al.random_element(desc, rng)
            got = al.char_coeffs(x)
            want = esym_oracle(eig_oracle(x))
            for g, w in zip(got, want):
                assert abs(g - w) < 1e-10 * (1 + x.norm()) ** 3


def test_cayley_hamilton():
    rng = np.random.default_rng(47)
    for desc in (R3D1, R3D2):
        for _ in range(300):
            x = al.random_element(desc, rng)
            a1, a2, a3 = al.char_coeffs(x)
            x2 = al.jordan_mul(x, x)
            x3 = al.jordan_mul(x2, x)
            resid = x3 - a1 * x2 + a2 * x - a3 * al.unit(desc)
            assert resid.norm() < 1e-11 * (1 + x.norm()) ** 3


# --- inverse --------------------------------------------------------------------

def test_inverse_matches_dense_inverse():
    rng = np.random.default_rng(48)
    for desc in MATRIX_RANKS:
        for _ in range(300):
            x = al.random_cone_element(desc, rng)
            inv = al.inverse(x)
            want = np.linalg.inv(al.to_matrix(x))
            assert np.allclose(al.to_matrix(inv), want, atol=1e-9, rtol=1e-9)
            # x o x^-1 = e as well
            assert (al.jordan_mul(x, inv) - al.unit(desc)).norm() < 1e-9


def test_inverse_literals():
    x = al.from_diag(R3D1, (1.0, 2.0, 4.0))
    assert np.allclose(al.inverse(x).coords[:3], [1.0, 0.5, 0.25], atol=1e-14)
    e = al.unit(R2D2)
    assert (al.inverse(e) - e).norm() < 1e-14


def test_inverse_of_indefinite_invertible_element():
    # invertibility does not require positivity
    x = al.from_diag(R2D1, (2.0, -3.0))
    assert np.allclose(al.inverse(x).coords[:2], [0.5, -1.0 / 3.0], atol=1e-14)


def test_singular_inverse_raises():
    x = al.from_diag(R3D1, (1.0, 0.0, 2.0))
    with pytest.raises(SingularElementError) as exc:
        al.inverse(x)
    assert exc.value.abs_det <= 1e-12
    assert math.isfinite(exc.value.abs_det)  # the payload is a number, never NaN


# --- spectral decomposition -----------------------------------------------------

def test_spectral_matches_dense_eigensolver():
    rng = np.random.default_rng(49)
    for desc in MATRIX_RANKS:
        for _ in range(200):
            x = al.random_element(desc, rng)
            dec = al.spectral(x)
            want = eig_oracle(x)
            assert np.allclose(dec.eigenvalues, want, atol=1e-10 * (1 + x.norm()))


def test_spectral_frame_properties():
    rng = np.random.default_rng(50)
    for desc in MATRIX_RANKS:
        for _ in range(100):
            x = al.random_element(desc, rng)
            dec = al.spectral(x)
            recon = al.zero(desc)
            for lam, c in zip(dec.eigenvalues, dec.frame):
                assert (al.jordan_mul(c, c) - c).norm() < 1e-10
                assert abs(al.trace(c) - 1.0) < 1e-10
                recon = recon + lam * c
            for i in range(desc.rank):
                for j in range(i + 1, desc.rank):
                    assert al.jordan_mul(dec.frame[i], dec.frame[j]).norm() < 1e-9
            assert (recon - x).norm() < 1e-9 * (1 + x.norm())


def test_spectral_with_repeated_eigenvalues():
    x = al.from_diag(R3D2, (3.0, 3.0, 1.0))
    dec = al.spectral(x)
    assert np.allclose(dec.eigenvalues, [3.0, 3.0, 1.0], atol=1e-12)
    recon = al.zero(R3D2)
    for lam, c in zip(dec.eigenvalues, dec.frame):
        recon = recon + lam * c
    assert (recon - x).norm() < 1e-10


# --- cone membership and square root --------------------------------------------

def test_sqrt_in_cone():
    rng = np.random.default_rng(51)
    for desc in MATRIX_RANKS:
        for _ in range(200):
            x = al.random_cone_element(desc, rng)
            s = al.sqrt_cone(x)
            assert (al.jordan_mul(s, s) - x).norm() < 1e-9 * (1 + x.norm())
            assert al.in_cone(s)


def test_sqrt_literal():
    s = al.sqrt_cone(al.from_diag(R3D1, (4.0, 9.0, 16.0)))
    assert np.allclose(s.coords[:3], [2.0, 3.0, 4.0], atol=1e-12)


def test_sqrt_rejects_non_cone_elements():
    with pytest.raises(DomainError):
        al.sqrt_cone(al.from_diag(R3D1, (1.0, -1.0, 1.0)))
    with pytest.raises(DomainError):
        al.sqrt_cone(al.from_diag(R2D2, (1.0, 0.0)))  # boundary is excluded


def test_in_cone_threshold():
    assert al.in_cone(al.unit(R3D1))
    assert not al.in_cone(-1.0 * al.unit(R3D1))
    assert not al.in_cone(al.from_diag(R2D1, (1.0, 0.0)))
    assert al.in_cone(al.unit(R2D1), tol=0.5)
    assert not al.in_cone(0.4 * al.unit(R2D1), tol=0.5)


# --- quadratic representation ----------------------------------------------------

def test_quadratic_rep_is_matrix_sandwich():
    rng = np.random.default_rng(52)
    for desc in MATRIX_RANKS:
        for _ in range(300):
            x = al.random_element(desc, rng)
            y = al.random_element(desc, rng)
            got = al.quadratic_rep(x, y)
            want = sandwich_oracle(x, y)
            assert (got - want).norm() < 1e-10 * (1 + x.norm()) ** 2 * (1 + y.norm())


def test_quadratic_rep_unit_and_inverse():
    rng = np.random.default_rng(53)
    for desc in MATRIX_RANKS:
        e = al.unit(desc)
        for _ in range(50):
            y = al.random_element(desc, rng)
            assert (al.quadratic_rep(e, y) - y).norm() < 1e-12 * (1 + y.norm())
            x = al.random_cone_element(desc, rng)
            # P(x) x^-1 = x
            assert (al.quadratic_rep(x, al.inverse(x)) - x).norm() < 1e-8 * (1 + x.norm())


def test_quadratic_rep_determinant_multiplicativity():
    # det(P(x) y) = det(x)^2 det(y)
    rng = np.random.default_rng(54)
    for desc in MATRIX_RANKS:
        for _ in range(200):
            x = al.random_element(desc, rng)
            y = al.random_element(desc, rng)
            lhs = al.det(al.quadratic_rep(x, y))
            rhs = al.det(x) ** 2 * al.det(y)
            assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))


# --- Peirce decomposition ---------------------------------------------------------

def test_peirce_split_is_an_eigenspace_split():
    rng = np.random.default_rng(55)
    for desc in (R2D1, R2D2, R3D1, R3D2):
        c = al.corner_idempotent(desc)
        for _ in range(200):
            x = al.random_element(desc, rng)
            sp = al.peirce_split(x, c)
            assert (sp.a0 + sp.a_half + sp.a1 - x).norm() < 1e-12 * (1 + x.norm())
            # L(c) eigenvalues 0, 1/2, 1 on the three components
            assert al.jordan_mul(c, sp.a0).norm() < 1e-10 * (1 + x.norm())
            h = al.jordan_mul(c, sp.a_half) - 0.5 * sp.a_half
            assert h.norm() < 1e-10 * (1 + x.norm())
            o = al.jordan_mul(c, sp.a1) - sp.a1
            assert o.norm() < 1e-10 * (1 + x.norm())


def test_peirce_split_along_a_random_primitive_idempotent():
    rng = np.random.default_rng(56)
    for desc in (R3D1, R3D2):
        for _ in range(50):
            x = al.random_element(desc, rng)
            c = al.spectral(al.random_element(desc, rng)).frame[1]
            sp = al.peirce_split(x, c)
            assert (sp.a0 + sp.a_half + sp.a1 - x).norm() < 1e-9 * (1 + x.norm())
            assert al.jordan_mul(c, sp.a0).norm() < 1e-8 * (1 + x.norm())


def test_peirce_split_rejects_bad_idempotents():
    x = al.unit(R3D1)
    with pytest.raises(DomainError):
        al.peirce_split(x, al.from_diag(R3D1, (0.3, 0.0, 0.0)))  # not idempotent
    with pytest.raises(DomainError):
        al.peirce_split(x, al.unit(R3D1))  # idempotent but not primitive


def test_peirce_component_dimensions():
    # split each coordinate direction and count where it lands
    for desc in (R3D1, R3D2):
        c = al.corner_idempotent(desc)
        d = int(desc.d)
        dims = [0, 0, 0]
        for k in range(desc.n):
            coords = np.zeros(desc.n)
            coords[k] = 1.0
            sp = al.peirce_split(al.Element(desc, coords), c)
            for slot, comp in enumerate((sp.a0, sp.a_half, sp.a1)):
                if comp.norm() > 0.5:
                    dims[slot] += 1
        assert dims == [2 + d, 2 * d, 1]


def test_peirce_multiplication_rules():
    rng = np.random.default_rng(57)
    for desc in (R3D1, R3D2):
        c = al.corner_idempotent(desc)
        for _ in range(100):
            x = al.random_element(desc, rng)
            y = al.random_element(desc, rng)
            sx, sy = al.peirce_split(x, c), al.peirce_split(y, c)
            scale = 1e-10 * (1 + x.norm()) * (1 + y.norm())
            # orthogonal extremes annihilate
            assert al.jordan_mul(sx.a0, sy.a1).norm() < scale
            # extreme times half stays in the half space
            for prod in (al.jordan_mul(sx.a0, sy.a_half), al.jordan_mul(sx.a1, sy.a_half)):
                back = al.peirce_split(prod, c)
                assert back.a0.norm() < scale and back.a1.norm() < scale
            # half times half has no half component
            hh = al.peirce_split(al.jordan_mul(sx.a_half, sy.a_half), c)
            assert hh.a_half.norm() < scale


def test_half_space_basis_orthonormal_and_halved():
    for desc in (R2D1, R2D2, R3D1, R3D2):
        c = al.corner_idempotent(desc)
        basis = al.half_space_basis(desc)
        assert len(basis) == (desc.rank - 1) * int(desc.d)
        for i, b in enumerate(basis):
            assert (al.jordan_mul(c, b) - 0.5 * b).norm() < 1e-13
            for j, b2 in enumerate(basis):
                assert abs(al.inner(b, b2) - (1.0 if i == j else 0.0)) < 1e-13


def test_corner_idempotent_is_primitive():
    for desc in MATRIX_RANKS:
        c = al.corner_idempotent(desc)
        assert (al.jordan_mul(c, c) - c).norm() < 1e-14
        assert al.trace(c) == 1.0


def test_half_space_cube_identity():
    # xi^3 = (|xi|^2 / 2) xi for half-space elements, and tr xi = det xi = 0
    rng = np.random.default_rng(58)
    for desc in (R3D1, R3D2):
        basis = al.half_space_basis(desc)
        for _ in range(200):
            xi = al.zero(desc)
            for b in basis:
                xi = xi + rng.standard_normal() * b
            assert abs(al.trace(xi)) < 1e-14
            assert abs(al.det(xi)) < 1e-12 * (1 + xi.norm()) ** 3
            xi3 = al.jordan_mul(xi, al.jordan_mul(xi, xi))
            want = 0.5 * al.inner(xi, xi) * xi
            assert (xi3 - want).norm() < 1e-11 * (1 + xi.norm()) ** 3


# --- rank-2 embedding and the half-space action -----------------------------------

def test_embed_restrict_round_trip():
    rng = np.random.default_rng(59)
    for d in (1.0, 2.0):
        desc3 = al.AlgebraDescriptor(3, d)
        desc2 = al.AlgebraDescriptor(2, d)
        for _ in range(100):
            u = al.random_element(desc2, rng)
            v = al.random_element(desc2, rng)
            eu = al.embed_rank2(desc3, u)
            assert (al.restrict_rank2(eu) - u).norm() < 1e-13
            # isometric and multiplicative
            assert abs(al.inner(eu, al.embed_rank2(desc3, v)) - al.inner(u, v)) < 1e-12
            puv = al.embed_rank2(desc3, al.jordan_mul(u, v))
            assert (al.jordan_mul(eu, al.embed_rank2(desc3, v)) - puv).norm() < 1e-12


def test_embed_validation():
    with pytest.raises(UsageError):
        al.embed_rank2(R2D1, al.unit(R2D1))
    with pytest.raises(AlgebraMismatchError):
        al.embed_rank2(R3D1, al.unit(R2D2))


def test_rho_action_basics():
    rng = np.random.default_rng(60)
    for d in (1.0, 2.0):
        desc3 = al.AlgebraDescriptor(3, d)
        desc2 = al.AlgebraDescriptor(2, d)
        basis = al.half_space_basis(desc3)
        e2 = al.embed_rank2(desc3, al.unit(desc2))
        # the embedded rank-2 unit acts as the identity on the half space
        assert np.allclose(al.rho_matrix(e2), np.eye(len(basis)), atol=1e-13)
        for _ in range(100):
            u = al.embed_rank2(desc3, al.random_element(desc2, rng))
            xi = al.zero(desc3)
            for b in basis:
                xi = xi + rng.standard_normal() * b
            got = al.rho_apply(u, xi)
            assert (got - 2.0 * al.jordan_mul(u, xi)).norm() < 1e-13
            # the action closes on the half space
            idx = [int(np.argmax(b.coords)) for b in basis]
            mask = np.ones(desc3.n, dtype=bool)
            mask[idx] = False
            assert np.linalg.norm(got.coords[mask]) < 1e-12


def test_rho_anticommutation():
    # 2 rho(u o v) = rho(u) rho(v) + rho(v) rho(u)
    rng = np.random.default_rng(61)
    for d in (1.0, 2.0):
        desc3 = al.AlgebraDescriptor(3, d)
        desc2 = al.AlgebraDescriptor(2, d)
        for _ in range(200):
            u = al.embed_rank2(desc3, al.random_element(desc2, rng))
            v = al.embed_rank2(desc3, al.random_element(desc2, rng))
            ru, rv = al.rho_matrix(u), al.rho_matrix(v)
            lhs = 2.0 * al.rho_matrix(al.jordan_mul(u, v))
            assert np.allclose(lhs, ru @ rv + rv @ ru, atol=1e-10)


def test_rho_apply_validates_components():
    desc3 = R3D1
    xi = al.half_space_basis(desc3)[0]
    with pytest.raises(DomainError):
        al.rho_apply(al.unit(desc3), xi)  # unit is not in the zero space
    u = al.embed_rank2(desc3, al.unit(R2D1))
    with pytest.raises(DomainError):
        al.rho_apply(u, al.unit(desc3))  # unit is not in the half space


def test_det_rho_power_identity():
    # det rho(u) = (rank-2 determinant of u)^d
    rng = np.random.default_rng(62)
    for d in (1.0, 2.0):
        desc3 = al.AlgebraDescriptor(3, d)
        desc2 = al.AlgebraDescriptor(2, d)
        for _ in range(200):
            u2 = al.random_element(desc2, rng)
            got = al.det_rho(al.embed_rank2(desc3, u2))
            want = al.det(u2) ** int(d)
            assert abs(got - want) < 1e-9 * (1 + abs(want))


def test_det_rho_literal():
    for d in (1.0, 2.0):
        desc3 = al.AlgebraDescriptor(3, d)
        u = 2.0 * al.diag_unit(desc3, 0) + 3.0 * al.diag_unit(desc3, 1)
        assert abs(al.det_rho(u) - 6.0 ** d) < 1e-11


# --- random draws and serialization ------------------------------------------------

def test_random_cone_element_lands_in_cone():
    rng = np.random.default_rng(63)
    for desc in CONCRETE:
        for _ in range(100):
            assert al.in_cone(al.random_cone_element(desc, rng))


def test_element_json_round_trip():
    rng = np.random.default_rng(64)
    for desc in CONCRETE:
        x = al.random_element(desc, rng)
        obj = al.element_to_json(x)
        assert set(obj) == {"rank", "d", "coords"}
        assert obj["rank"] == desc.rank and obj["d"] == desc.d
        y = al.element_from_json(obj)
        assert y.algebra == desc
        assert np.array_equal(y.coords, x.coords)


def test_element_json_rejects_bad_payloads():
    with pytest.raises(UsageError):
        al.element_from_json({"rank": 5, "d": 1.0, "coords": [1.0] * 5})
    with pytest.raises(UsageError):
        al.element_from_json({"rank": 2, "d": 1.0, "coords": [1.0, 2.0]})
