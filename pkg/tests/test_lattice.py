"""Grid calculus tests: derivatives, wedge/bracket, integration, links, gauge."""
import numpy as np
import pytest

from caloron import lattice as lat
from caloron.errors import BranchCutError, ConfigError, DegreeError, ShapeError
from caloron.lattice import SU2, U1, FormField, Grid, LinkField

TWO_PI = 2.0 * np.pi


def _grid2(n=32, base=1):
    return Grid(sizes=(n, n), base_axes=tuple(range(base)))


def test_grid_validation():
    with pytest.raises(ConfigError):
        Grid(sizes=(3, 8))
    with pytest.raises(ConfigError):
        Grid(sizes=(8, 8), base_axes=(1,))
    with pytest.raises(ConfigError):
        Grid(sizes=(8,), lengths=(1.0, 2.0))


def test_grid_geometry():
    g = Grid(sizes=(8, 16), lengths=(2.0, 4.0), base_axes=(0,))
    assert g.spacings == (0.25, 0.25)
    assert g.volume() == pytest.approx(8.0)
    assert g.fiber_axes == (1,)
    assert g.base_grid().sizes == (8,)
    assert g.refine(2).sizes == (16, 32)


def test_su2_coords_round_trip():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 3))
    X = lat.su2_from_coords(a)
    assert lat.alg_violation(SU2, X) < 1e-14
    assert np.allclose(lat.su2_coords(X), a)


def test_group_exp_log_round_trip():
    rng = np.random.default_rng(1)
    a = 0.8 * rng.standard_normal((50, 3))
    X = lat.su2_from_coords(a)
    U = lat.group_exp(SU2, X)
    assert lat.group_violation(SU2, U) < 1e-13
    assert np.max(np.abs(lat.group_log(SU2, U) - X)) < 1e-12
    # abelian
    z = 1j * rng.uniform(-3.0, 3.0, size=20)
    assert np.max(np.abs(lat.group_log(U1, lat.group_exp(U1, z)) - z)) < 1e-14


def test_group_exp_matches_scipy_style_series():
    # oracle: dense matrix exponential by scaling and squaring via numpy eig
    rng = np.random.default_rng(2)
    X = lat.su2_from_coords(rng.standard_normal(3))
    w, V = np.linalg.eig(X)
    dense = V @ np.diag(np.exp(w)) @ np.linalg.inv(V)
    assert np.max(np.abs(lat.group_exp(SU2, X) - dense)) < 1e-12


def test_group_log_guard_band():
    U = np.array(np.exp(1j * (np.pi - 1e-9)))
    with pytest.raises(BranchCutError):
        lat.group_log(U1, U)


def test_central_difference_harmonic():
    # [DERIVED] analytic oracle with O(h^2) error decay
    errs = []
    for n in (32, 64):
        g = Grid(sizes=(n,))
        x = g.coordinate(0)
        d = lat.central_difference(np.sin(x), 0, g.spacings[0])
        errs.append(np.max(np.abs(d - np.cos(x))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_ext_deriv_analytic():
    errs = []
    for n in (32, 64):
        g = Grid(sizes=(n, n))
        x, y = g.coordinate(0), g.coordinate(1)
        f = FormField(g, U1, 1, {(0,): 1j * np.sin(y) + 0 * x,
                                 (1,): 1j * np.cos(2 * x) + 0 * y})
        df = lat.ext_deriv(f)
        exact = -2j * np.sin(2 * x) - 1j * np.cos(y) + 0 * (x + y)
        errs.append(np.max(np.abs(df.comps[(0, 1)] - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_ext_deriv_nilpotent():
    # rolls commute, so d of d cancels to rounding on arbitrary data
    rng = np.random.default_rng(3)
    g = Grid(sizes=(8, 8, 8))
    f = FormField(g, U1, 0, {(): 1j * rng.standard_normal(g.sizes)})
    ddf = lat.ext_deriv(lat.ext_deriv(f))
    assert ddf.max_norm() < 1e-13


def test_ext_deriv_top_degree_guard():
    g = _grid2(8)
    top = FormField.zero(g, U1, 2)
    with pytest.raises(DegreeError):
        lat.ext_deriv(top)


def test_shuffle_sign():
    assert lat.shuffle_sign((0,), (1,)) == 1
    assert lat.shuffle_sign((1,), (0,)) == -1
    assert lat.shuffle_sign((0, 2), (1, 3)) == -1
    assert lat.shuffle_sign((2, 3), (0, 1)) == 1


def test_wedge_scalar_oracle():
    # [DERIVED] (f dx) ^ (g dy) = f g dx^dy and antisymmetry of the cross term
    g = _grid2(8)
    rng = np.random.default_rng(4)
    F, G = rng.standard_normal(g.sizes), rng.standard_normal(g.sizes)
    a = FormField(g, lat.SCALAR, 1, {(0,): F})
    b = FormField(g, lat.SCALAR, 1, {(1,): G})
    assert np.array_equal(lat.wedge(a, b).comps[(0, 1)], F * G)
    assert np.array_equal(lat.wedge(b, a).comps[(0, 1)], -G * F)


def test_wedge_one_forms_antisymmetric():
    g = _grid2(8)
    rng = np.random.default_rng(5)
    a = FormField(g, lat.SCALAR, 1, {(0,): rng.standard_normal(g.sizes),
                                     (1,): rng.standard_normal(g.sizes)})
    s = lat.wedge(a, a)
    assert s.max_norm() == 0.0


def test_bracket_pointwise_oracle():
    # compare against a hand-evaluated commutator at one site
    g = _grid2(4)
    rng = np.random.default_rng(6)
    X = lat.su2_from_coords(rng.standard_normal(g.sizes + (3,)))
    Y = lat.su2_from_coords(rng.standard_normal(g.sizes + (3,)))
    a = FormField(g, SU2, 1, {(0,): X})
    b = FormField(g, SU2, 1, {(1,): Y})
    br = lat.bracket(a, b)
    site = (2, 3)
    expect = X[site] @ Y[site] - Y[site] @ X[site]
    assert np.array_equal(br.comps[(0, 1)][site], expect)


def test_bracket_graded_antisymmetry_degree_one():
    # [a, b] - [b, a] vanishes for two 1-forms (Koszul sign (+1)*(-1)^{1*1})
    g = _grid2(6)
    rng = np.random.default_rng(7)
    mk = lambda seed: FormField(  # noqa: E731
        g, SU2, 1,
        {(a,): lat.su2_from_coords(
            np.random.default_rng(seed + a).standard_normal(g.sizes + (3,)))
         for a in range(2)})
    a, b = mk(10), mk(20)
    diff = lat.bracket(a, b) - lat.bracket(b, a)
    assert diff.max_norm() == 0.0


def test_bracket_abelian_zero():
    g = _grid2(6)
    a = FormField(g, U1, 1, {(0,): 1j * np.ones(g.sizes)})
    assert lat.bracket(a, a).max_norm() == 0.0


def test_integrate_harmonic_exact():
    # trapezoid = mean * volume is exact on resolved harmonics
    g = _grid2(16)
    x, y = g.coordinate(0), g.coordinate(1)
    f = FormField(g, lat.SCALAR, 2, {(0, 1): 1.5 + np.cos(3 * x) * np.sin(y)})
    assert lat.integrate(f) == pytest.approx(1.5 * TWO_PI ** 2, abs=1e-12)


def test_integrate_partial_axes():
    g = Grid(sizes=(8, 16), base_axes=(0,))
    x = g.coordinate(0)
    f = FormField(g, lat.SCALAR, 1, {(1,): np.broadcast_to(np.sin(x), g.sizes)})
    out = lat.integrate(f, axes=(1,))
    assert out.shape == (8,)
    assert np.allclose(out, TWO_PI * np.sin(x[:, 0]))


def test_stokes_total_integral_vanishes():
    # integral of an exact top form over the closed grid is zero to rounding
    g = Grid(sizes=(12, 12))
    rng = np.random.default_rng(8)
    a = FormField(g, U1, 1, {(0,): 1j * rng.standard_normal(g.sizes),
                             (1,): 1j * rng.standard_normal(g.sizes)})
    assert abs(lat.integrate(lat.ext_deriv(a))) < 1e-12


def test_plaquette_identity_links():
    g = _grid2(8)
    u = LinkField.identity(g, U1)
    assert lat.plaquette_curvature(u).max_norm() == 0.0


def test_plaquette_constant_curvature_oracle():
    # [DERIVED] twist-c configuration has exactly constant curvature
    g = Grid(sizes=(16, 16))
    c = 2
    u = lat.constant_curvature_torus(g, c)
    F = lat.plaquette_curvature(u)
    expect = -1j * TWO_PI * c / (TWO_PI * TWO_PI)
    assert np.max(np.abs(F.comps[(0, 1)] - expect)) < 1e-13


def test_total_flux_quantized():
    g = Grid(sizes=(16, 16))
    for c in (-2, -1, 0, 1, 2):
        flux = lat.total_flux(lat.constant_curvature_torus(g, c))
        assert abs(flux - (-1j * TWO_PI * c)) < 1e-12
        pairing = (1j / TWO_PI) * flux
        assert pairing.real == pytest.approx(c, abs=1e-12)


def test_flux_gauge_invariant():
    g = Grid(sizes=(16, 16))
    rng = np.random.default_rng(9)
    u = lat.constant_curvature_torus(g, 1)
    psi = np.exp(1j * rng.uniform(-3, 3, size=g.sizes))
    v = lat.gauge_transform_links(u, psi)
    assert abs(lat.total_flux(v) - lat.total_flux(u)) < 1e-12


def test_gauge_transform_links_su2_plaquette_conjugates():
    g = _grid2(6)
    rng = np.random.default_rng(10)
    u = LinkField(g, SU2, {
        a: lat.group_exp(SU2, lat.su2_from_coords(
            0.3 * rng.standard_normal(g.sizes + (3,))))
        for a in range(2)})
    psi = lat.group_exp(SU2, lat.su2_from_coords(rng.standard_normal(g.sizes + (3,))))
    P = lat.plaquette_holonomy(u, 0, 1)
    Q = lat.plaquette_holonomy(lat.gauge_transform_links(u, psi), 0, 1)
    conj = psi @ P @ lat.group_inverse(SU2, psi)
    assert np.max(np.abs(Q - conj)) < 1e-12


def test_gauge_transform_connection_curvature_covariant():
    # dA' + A'^A' conjugates under a constant gauge change, exactly
    g = _grid2(8)
    rng = np.random.default_rng(11)
    A = lat.sample("su2_band_limited", g, SU2, {"max_mode": 1}, seed=12)
    psi0 = lat.group_exp(SU2, lat.su2_from_coords(rng.standard_normal(3)))
    psi = np.broadcast_to(psi0, g.sizes + (2, 2)).copy()
    curv = lambda B: lat.ext_deriv(B) + 0.5 * lat.bracket(B, B)  # noqa: E731
    F = curv(A)
    Fp = curv(lat.gauge_transform_connection(A, psi))
    diff = Fp - lat.gauge_transform_form(F, psi)
    assert diff.max_norm() < 1e-12


def test_links_from_connection_twist_flux():
    g = Grid(sizes=(4, 32, 32), base_axes=(0,))
    A = FormField.zero(g, U1, 1)
    u = lat.links_from_connection(A, twist=3)
    flux = lat.total_flux(u, 1, 2)
    # per-site flux summed over the repeated base axis: divide it back out
    assert abs(flux / g.sizes[0] - (-1j * TWO_PI * 3)) < 1e-10


def test_sample_deterministic():
    g = _grid2(8)
    a = lat.sample("u1_harmonic", g, U1, {"max_mode": 2}, seed=5)
    b = lat.sample("u1_harmonic", g, U1, {"max_mode": 2}, seed=5)
    c = lat.sample("u1_harmonic", g, U1, {"max_mode": 2}, seed=6)
    assert all(np.array_equal(a.comps[k], b.comps[k]) for k in a.comps)
    assert any(not np.array_equal(a.comps[k], c.comps[k]) for k in a.comps)


def test_sample_unknown_family():
    with pytest.raises(ConfigError):
        lat.sample("nope", _grid2(8))


def test_form_shape_validation():
    g = _grid2(8)
    with pytest.raises(ShapeError):
        FormField(g, U1, 1, {(0,): np.zeros((4, 4))})
    with pytest.raises(ShapeError):
        FormField(g, U1, 1) + FormField(_grid2(16), U1, 1)
