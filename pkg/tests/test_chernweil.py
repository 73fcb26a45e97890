"""Invariant-polynomial evaluation, fiber integration and class computations."""
import numpy as np
import pytest

from caloron import lattice as lat
from caloron.chernweil import (
    CaloronClassReport,
    InvariantPolynomial,
    caloron_class,
    chern_weil_form,
    closedness_residual,
    eval_invariant,
    fiber_integrate,
    pair_with_cycle,
    string_class,
)
from caloron.errors import ArityError, DegreeError, DomainError, ParityError
from caloron.lattice import SCALAR, SU2, U1, FormField, Grid
from caloron.transform import ProductConnection, forward_transform

TWO_PI = 2.0 * np.pi


def _su2_one_form(grid, seed):
    return lat.sample("su2_band_limited", grid, SU2, {"max_mode": 1}, seed=seed)


def test_invariant_polynomial_validation():
    with pytest.raises(DegreeError):
        InvariantPolynomial(0)
    with pytest.raises(DegreeError):
        InvariantPolynomial(7)
    with pytest.raises(DomainError):
        InvariantPolynomial(2, "bogus")
    assert InvariantPolynomial(2).normalization == pytest.approx(
        (1j / TWO_PI) ** 2)
    assert InvariantPolynomial(3, "sym_trace").normalization == 1.0


def test_eval_invariant_arity_guard():
    g = Grid(sizes=(6, 6))
    F = FormField.zero(g, U1, 2)
    with pytest.raises(ArityError):
        eval_invariant(InvariantPolynomial(2, "sym_trace"), [F])


def test_eval_invariant_abelian_is_product():
    g = Grid(sizes=(8, 8, 8, 8))
    rng = np.random.default_rng(0)
    a = FormField(g, U1, 2, {k: 1j * rng.standard_normal(g.sizes)
                             for k in lat.form_components(4, 2)})
    b = FormField(g, U1, 2, {k: 1j * rng.standard_normal(g.sizes)
                             for k in lat.form_components(4, 2)})
    out = eval_invariant(InvariantPolynomial(2, "sym_trace"), [a, b])
    oracle = lat.wedge(a, b)
    for k in out.comps:
        assert np.max(np.abs(out.comps[k] - oracle.comps[k])) < 1e-13


def test_eval_invariant_symmetric_in_arguments():
    g = Grid(sizes=(6, 6, 6, 6))
    a = FormField(g, SU2, 2, {k: lat.su2_from_coords(
        np.random.default_rng(1).standard_normal(g.sizes + (3,)))
        for k in lat.form_components(4, 2)})
    b = FormField(g, SU2, 2, {k: lat.su2_from_coords(
        np.random.default_rng(2).standard_normal(g.sizes + (3,)))
        for k in lat.form_components(4, 2)})
    f = InvariantPolynomial(2, "sym_trace")
    ab = eval_invariant(f, [a, b])
    ba = eval_invariant(f, [b, a])
    assert (ab - ba).max_norm() < 1e-12


def test_eval_invariant_conjugation_invariant():
    # ad-invariance: conjugating every argument by a fixed group element
    # leaves the trace form unchanged
    g = Grid(sizes=(6, 6, 6, 6))
    rng = np.random.default_rng(3)
    a = FormField(g, SU2, 2, {k: lat.su2_from_coords(rng.standard_normal(g.sizes + (3,)))
                              for k in lat.form_components(4, 2)})
    psi = lat.group_exp(SU2, lat.su2_from_coords(rng.standard_normal(3)))
    conj = FormField(g, SU2, 2, {k: psi @ v @ lat.group_inverse(SU2, psi)
                                 for k, v in a.comps.items()})
    f = InvariantPolynomial(2, "sym_trace")
    diff = eval_invariant(f, [a, a]) - eval_invariant(f, [conj, conj])
    assert diff.max_norm() < 1e-12


def test_eval_invariant_su2_trace_oracle():
    # k = 1 trace on a single site: compare with a hand trace
    g = Grid(sizes=(4, 4))
    X = lat.su2_from_coords(np.random.default_rng(4).standard_normal(g.sizes + (3,)))
    a = FormField(g, SU2, 2, {(0, 1): X})
    out = eval_invariant(InvariantPolynomial(1, "sym_trace"), [a])
    site = (1, 2)
    assert out.comps[(0, 1)][site] == pytest.approx(np.trace(X[site]))


def test_eval_invariant_degree_overflow_is_zero():
    g = Grid(sizes=(6, 6))
    F = FormField(g, U1, 2, {(0, 1): 1j * np.ones(g.sizes)})
    out = eval_invariant(InvariantPolynomial(2, "sym_trace"), [F, F])
    assert out.degree == 4 and out.max_norm() == 0.0


def test_chern_weil_degree_guard():
    g = Grid(sizes=(6, 6))
    with pytest.raises(DegreeError):
        chern_weil_form(InvariantPolynomial(1), FormField.zero(g, U1, 1))


def test_chern_number_of_twist_configuration():
    # [DERIVED] constant curvature -2*pi*i*c/(2*pi)^2 pairs to +c
    for c in (-1, 2):
        g = Grid(sizes=(16, 16))
        F = FormField(g, U1, 2, {(0, 1): np.full(
            g.sizes, -1j * TWO_PI * c / (TWO_PI ** 2))})
        w = chern_weil_form(InvariantPolynomial(1), F)
        val = lat.integrate(w)
        assert val.real == pytest.approx(c, abs=1e-12)
        assert abs(val.imag) < 1e-12


def test_fiber_integrate_constant_in_fiber():
    # [DERIVED] (1,1) component c * sin(x_base) integrates to 2*pi*c*sin(x_base)
    g = Grid(sizes=(12, 16), base_axes=(0,))
    x = g.coordinate(0)
    w = FormField(g, SCALAR, 2, {(0, 1): np.broadcast_to(2.5 * np.sin(x), g.sizes)})
    out = fiber_integrate(w)
    assert out.grid == g.base_grid()
    assert np.allclose(out.comps[(0,)], TWO_PI * 2.5 * np.sin(x[:, 0]))


def test_fiber_integrate_drops_low_fiber_components():
    # a 2-form with only base indices integrates to zero over a 1-dim fiber
    g = Grid(sizes=(8, 8, 8), base_axes=(0, 1))
    w = FormField(g, SCALAR, 2, {(0, 1): np.ones(g.sizes)})
    assert fiber_integrate(w).max_norm() == 0.0


def test_fiber_integrate_exact_fiber_form_vanishes():
    # the fiber derivative of a periodic function sums to zero exactly
    g = Grid(sizes=(8, 16), base_axes=(0,))
    rng = np.random.default_rng(5)
    lam = rng.standard_normal(g.sizes)
    d_lam = lat.central_difference(lam, 1, g.spacings[1])
    w = FormField(g, SCALAR, 1, {(1,): d_lam})
    assert fiber_integrate(w).max_norm() < 1e-14


def test_pair_with_cycle_basepoint():
    g = Grid(sizes=(6, 8), base_axes=(0, 1))
    arr = np.outer(np.arange(6), np.ones(8))
    w = FormField(g, SCALAR, 1, {(1,): arr})
    v0 = pair_with_cycle(w, (1,), {0: 0})
    v3 = pair_with_cycle(w, (1,), {0: 3})
    assert v0 == pytest.approx(0.0)
    assert v3 == pytest.approx(3.0 * TWO_PI)


def test_caloron_class_parity_and_arity_guards():
    g = Grid(sizes=(6, 6, 6), base_axes=(0,))
    w = ProductConnection.zero(g, U1)
    with pytest.raises(ParityError):
        caloron_class(w, InvariantPolynomial(1), 1)
    with pytest.raises(ArityError):
        caloron_class(w, InvariantPolynomial(1), 2)


def test_twist_class_pairing_and_invariance():
    # topological pairing is +twist, exactly stable under smooth deformation
    g = Grid(sizes=(4, 24, 24), base_axes=(0,))
    f = InvariantPolynomial(1)
    for c in (-2, -1, 0, 1, 2):
        w = ProductConnection.zero(g, U1, twist=c)
        rep = caloron_class(w, f, 0, cycles=[("pt", (), {})])
        assert rep.pairings[0][1].real == pytest.approx(c, abs=1e-10)
        # perturb by a random band-limited 1-form: pairing unchanged
        pert = lat.sample("u1_harmonic", g, U1, {"max_mode": 2}, seed=10 + c)
        wp = ProductConnection.from_one_form(w.one_form() + pert, twist=c)
        rep2 = caloron_class(wp, f, 0, cycles=[("pt", (), {})])
        assert abs(rep2.pairings[0][1] - rep.pairings[0][1]) < 1e-8


@pytest.mark.parametrize("group,seed", [(U1, 11), (U1, 12), (SU2, 13), (SU2, 14)])
def test_symbolic_and_numeric_paths_agree(group, seed):
    g = Grid(sizes=(8, 8, 8, 8), base_axes=(0, 1))
    fam = "u1_harmonic" if group == U1 else "su2_band_limited"
    A = lat.sample(fam, g, group, {"max_mode": 1}, seed=seed)
    w = ProductConnection.from_one_form(A)
    f = InvariantPolynomial(2)
    num = caloron_class(w, f, 2, cycles=[("base", (0, 1), {})])
    sym = caloron_class(w, f, 2, cycles=[("base", (0, 1), {})], symbolic_path=True)
    assert (num.class_form - sym.class_form).max_norm() < 1e-10
    assert abs(num.pairings[0][1] - sym.pairings[0][1]) < 1e-10


def test_pair_input_matches_connection_input():
    g = Grid(sizes=(8, 8, 8, 8), base_axes=(0, 1))
    A = lat.sample("su2_band_limited", g, SU2, {"max_mode": 1}, seed=15)
    w = ProductConnection.from_one_form(A)
    f = InvariantPolynomial(2)
    rep_w = caloron_class(w, f, 2, cycles=[("base", (0, 1), {})])
    rep_pair = caloron_class(forward_transform(w), f, 2, cycles=[("base", (0, 1), {})])
    assert (rep_w.class_form - rep_pair.class_form).max_norm() < 1e-12


def test_string_class_matches_generic_class():
    # circle fiber: k * f(F_A^{k-1} NablaPhi) equals the generic route
    g = Grid(sizes=(8, 8, 8, 8), base_axes=(0, 1, 2))
    A = lat.sample("su2_band_limited", g, SU2, {"max_mode": 1}, seed=16)
    w = ProductConnection.from_one_form(A)
    f = InvariantPolynomial(2)
    generic = caloron_class(w, f, 3, cycles=[("c", (0, 1, 2), {})])
    string = string_class(w, f, 2, cycles=[("c", (0, 1, 2), {})])
    assert (generic.class_form - string.class_form).max_norm() < 1e-12
    assert abs(generic.pairings[0][1] - string.pairings[0][1]) < 1e-12


def test_string_class_needs_circle_fiber():
    g = Grid(sizes=(6, 6, 6), base_axes=(0,))
    with pytest.raises(DomainError):
        string_class(ProductConnection.zero(g, U1), InvariantPolynomial(2), 2)


def test_closedness_residual_top_degree_convention():
    g = Grid(sizes=(6, 6))
    w = FormField(g, SCALAR, 2, {(0, 1): np.random.default_rng(17).standard_normal(g.sizes)})
    assert closedness_residual(w) == 0.0


def test_closedness_residual_converges():
    # [DERIVED] the class 2-form on a 3-torus base closes at O(h^2)
    residuals = []
    for n in (16, 32):
        g = Grid(sizes=(n, n, 4, n, 4), base_axes=(0, 1, 2))
        rng = np.random.default_rng(21)
        comps = {}
        for a in range(g.dim):
            s = lat.band_limited_scalar(Grid(sizes=(n, n, n)), 1, rng)
            comps[(a,)] = 1j * s[:, :, None, :, None] * np.ones(g.sizes)
        A = FormField(g, U1, 1, comps)
        w = ProductConnection.from_one_form(A)
        rep = caloron_class(w, InvariantPolynomial(2), 2)
        residuals.append(rep.closedness_residual)
    assert residuals[0] / residuals[1] > 3.4


def test_report_fields():
    g = Grid(sizes=(4, 8, 8), base_axes=(0,))
    rep = caloron_class(ProductConnection.zero(g, U1, twist=1),
                        InvariantPolynomial(1), 0)
    assert isinstance(rep, CaloronClassReport)
    assert (rep.r, rep.d, rep.k) == (0, 2, 1)
    assert rep.metadata["group"] == U1
    assert rep.degree_overflow is False
