import numpy as np
import pytest

from vxsim.beams import xi_ratios
from vxsim.diagnostics import LoopSpec, loop_integral
from vxsim.errors import MaskError, TrapSolveError
from vxsim.gauge import (
    effective_potentials,
    fill_masked,
    gauge_potentials,
    solve_traps,
    vortex_gauge_field,
)
from vxsim.grid import make_grid


def vec_mag(v):
    return np.hypot(v[0], v[1])


@pytest.fixture(scope="module")
def synthetic_ring_ratios(grid128):
    # conjugate-phase ratio pair with distinct radial envelopes; narrow
    # enough that the amplitudes reach machine zero inside the box, so the
    # spectral gradients are Gibbs-free up to roundoff
    r, ph = grid128.r_map, grid128.phi_map
    f1 = 0.20 * (r / 1.2) * np.exp(-((r / 1.2) ** 2))
    f2 = 0.35 * (r / 1.5) * np.exp(-((r / 1.5) ** 2))
    return f1, f2, f1 * np.exp(1j * ph), f2 * np.exp(-1j * ph)


def test_symbolic_phase_gradient_closed_forms():
    """The pole-free expressions reduce, for xi1 = a e^{il phi} and
    xi2 = b e^{-il phi} with constant moduli, to azimuthal fields

        Im A1 = l (a^2 - b^2) / (r Xi1),
        Im A2 = l (1 + 2 a^2) / (r Xi1),
        Im A3 = -l (1 + 2 b^2) / (r Xi1),

    whose combination Im(A2 + A3 - 2 A1) vanishes identically.  Verified
    symbolically on the positive x axis (phi = 0, r = x); radial envelopes
    only add real radial terms that the imaginary part drops, and are
    covered by the numeric closed-form test below.
    """
    sp = pytest.importorskip("sympy")
    x, y = sp.symbols("x y", real=True)
    a, b = sp.symbols("a b", positive=True)
    l = sp.Symbol("l", integer=True)
    phi = sp.atan2(y, x)
    xi1 = a * sp.exp(sp.I * l * phi)
    xi2 = b * sp.exp(-sp.I * l * phi)
    big1 = 1 + a**2 + b**2
    grad = lambda f: sp.Matrix([sp.diff(f, x), sp.diff(f, y)])
    g1, g2 = grad(xi1), grad(xi2)
    a1 = (sp.conjugate(xi1) * g1 + sp.conjugate(xi2) * g2) / big1
    a2 = (-g2 + sp.conjugate(xi1) * (xi2 * g1 - xi1 * g2)) / (big1 * xi2)
    a3 = (-g1 + sp.conjugate(xi2) * (xi1 * g2 - xi2 * g1)) / (big1 * xi1)
    # on y = 0, x > 0 the y component is the phi-hat projection and the x
    # component is radial
    on_axis = lambda expr: sp.simplify(expr.subs(y, 0))
    assert on_axis(sp.im(a1[1]) - l * (a**2 - b**2) / (x * big1)) == 0
    assert on_axis(sp.im(a2[1]) - l * (1 + 2 * a**2) / (x * big1)) == 0
    assert on_axis(sp.im(a3[1]) + l * (1 + 2 * b**2) / (x * big1)) == 0
    assert on_axis(sp.im(a1[0])) == 0
    assert on_axis(sp.im(a2[0])) == 0
    assert on_axis(sp.im(a2[1] + a3[1] - 2 * a1[1])) == 0


def test_numeric_closed_forms_independent_envelopes(grid128, synthetic_ring_ratios):
    f1, f2, xi1, xi2 = synthetic_ring_ratios
    g = gauge_potentials(xi1, xi2, grid128)
    r = grid128.r_map
    inner = g.mask & (r < 3.5)
    denom = r[inner] * g.big_xi1[inner]
    pred1 = np.abs(f1**2 - f2**2)[inner] / denom
    pred2 = (1.0 + 2.0 * f1**2)[inner] / denom
    pred3 = (1.0 + 2.0 * f2**2)[inner] / denom
    assert np.max(np.abs(vec_mag(g.a2)[inner] / pred2 - 1.0)) < 1e-10
    assert np.max(np.abs(vec_mag(g.a3)[inner] / pred3 - 1.0)) < 1e-10
    assert np.max(np.abs(vec_mag(g.a1)[inner] - pred1)) < 1e-12 * np.max(pred1)
    # all three fields are azimuthal: radial projections vanish
    rhatx = grid128.xm / np.where(r == 0, 1.0, r)
    rhaty = grid128.ym / np.where(r == 0, 1.0, r)
    for a in g:
        rad = np.abs(a[0] * rhatx + a[1] * rhaty)
        assert np.nanmax(rad[inner]) < 1e-10 * np.nanmax(vec_mag(a)[inner] + 1.0)


def test_combination_identity_general_amplitudes(grid128, synthetic_ring_ratios):
    # Im(A2 + A3 - 2 A1) = -grad(R1 + R2) for any moduli, which vanishes
    # for opposite phase windings; held to the 1/|xi| roundoff
    # amplification at the mask floor
    _, _, xi1, xi2 = synthetic_ring_ratios
    g = gauge_potentials(xi1, xi2, grid128)
    comb = vec_mag(g.a2 + g.a3 - 2.0 * g.a1)
    assert np.nanmax(comb[g.mask]) < 1e-8 * np.nanmax(vec_mag(g.a2))


def test_degenerate_ratios_collapse(weak_beams64, grid64):
    """For pointwise-equal ratio moduli with opposite windings, A1 = 0 and
    A2 = -A3 = l grad(phi).  The cancellations survive at the mask floor
    because conjugate-pair inputs get conjugate-pair spectral gradients."""
    xi1, xi2 = xi_ratios(weak_beams64)
    g = gauge_potentials(xi1, xi2, grid64)
    scale = np.nanmax(vec_mag(g.a2))
    assert np.nanmax(vec_mag(g.a1)) < 1e-15 * scale
    assert np.nanmax(vec_mag(g.a2 + g.a3)) < 1e-10 * scale
    inner = g.mask & (grid64.r_map < 5.0)
    assert np.max(np.abs(vec_mag(g.a2)[inner] * grid64.r_map[inner] - 1.0)) < 1e-4
    assert np.max(np.abs(vec_mag(g.a3)[inner] * grid64.r_map[inner] - 1.0)) < 1e-4


def test_gauge_flux_quantized(weak_beams64, grid64):
    xi1, xi2 = xi_ratios(weak_beams64)
    g = gauge_potentials(xi1, xi2, grid64)
    loop = LoopSpec(center=(0.0, 0.0), radius=3.0)
    flux = loop_integral(fill_masked(g.a2), grid64, loop)
    assert flux == pytest.approx(2.0 * np.pi, rel=1e-3)


def test_non_hermitian_mode_keeps_complex(grid128, synthetic_ring_ratios):
    _, _, xi1, xi2 = synthetic_ring_ratios
    g = gauge_potentials(xi1, xi2, grid128, hermitian_mode=False)
    gh = gauge_potentials(xi1, xi2, grid128)
    assert np.iscomplexobj(g.a2) and not np.iscomplexobj(gh.a2)
    assert not g.hermitian_mode and gh.hermitian_mode
    np.testing.assert_array_equal(g.a2.imag, gh.a2)


def test_mask_geometry_and_xi_floor(grid128, synthetic_ring_ratios):
    _, _, xi1, xi2 = synthetic_ring_ratios
    g = gauge_potentials(xi1, xi2, grid128)
    assert not g.mask[grid128.r_map <= 2.0 * grid128.dx].any()
    assert np.isnan(g.a2[:, ~g.mask]).all()
    assert np.isfinite(g.a2[:, g.mask]).all()
    floor = 1e-6 * np.abs(xi1).max()
    assert np.abs(xi1[g.mask]).min() > floor
    # big_xi fields: Xi1 >= 1 everywhere, Xi2/Xi3 >= 1 on the mask
    assert g.big_xi1.min() >= 1.0
    assert np.nanmin(g.big_xi2[g.mask]) >= 1.0
    assert np.nanmin(g.big_xi3[g.mask]) >= 1.0


def test_mask_error_when_nothing_survives(grid128, synthetic_ring_ratios):
    _, _, xi1, xi2 = synthetic_ring_ratios
    with pytest.raises(MaskError, match="no evaluable points"):
        gauge_potentials(xi1, xi2, grid128, r_core=100.0)


def test_shape_validation(grid128):
    bad = np.ones((4, 4), dtype=complex)
    with pytest.raises(ValueError, match="grid shape"):
        gauge_potentials(bad, bad, grid128)


def test_gauge_iteration_and_with_veff(grid128, synthetic_ring_ratios):
    _, _, xi1, xi2 = synthetic_ring_ratios
    g = gauge_potentials(xi1, xi2, grid128)
    a1, a2, a3 = g
    assert a1 is g.a1 and a2 is g.a2 and a3 is g.a3
    v = np.zeros(grid128.shape)
    g2 = g.with_veff(v, v, v)
    assert g2.veff1 is v and g.veff1 is None


def test_fill_masked():
    field = np.array([[1.0, np.nan], [np.inf, -2.0]])
    out = fill_masked(field)
    np.testing.assert_array_equal(out, [[1.0, 0.0], [0.0, -2.0]])
    out5 = fill_masked(field, fill=5.0)
    assert out5[0, 1] == 5.0 and out5[1, 0] == 5.0
    assert np.isnan(field[0, 1])  # input untouched


def test_vortex_gauge_field_values_and_flux(grid64):
    vg = vortex_gauge_field(grid64, 2)
    i = grid64.nx // 2 + 8  # x = +2 on the 16-box
    j = grid64.ny // 2  # y = 0
    assert vg[0][i, j] == pytest.approx(0.0, abs=1e-14)
    assert vg[1][i, j] == pytest.approx(1.0)  # l*x/r^2 = 2*2/4
    origin = grid64.nx // 2
    assert vg[0][origin, origin] == 0.0 and vg[1][origin, origin] == 0.0
    loop = LoopSpec(center=(0.0, 0.0), radius=3.0)
    assert loop_integral(vg, grid64, loop) == pytest.approx(4.0 * np.pi, rel=1e-3)


# --- trap engineering ---------------------------------------------------


@pytest.fixture(scope="module")
def consistent_gauge(grid128):
    # zero-winding gaussian ratios: all phase gradients vanish, so the
    # Veff2 = Veff3 = 0 conditions are compatible whenever eps31 = -eps21
    r = grid128.r_map
    env1 = 0.05 * np.exp(-(r**2) / (2.0 * 2.0**2))
    env2 = 0.20 * np.exp(-(r**2) / (2.0 * 3.0**2))
    return env1, env2, gauge_potentials(env1 + 0j, env2 + 0j, grid128)


def test_solve_traps_consistent_case(grid128, consistent_gauge):
    env1, env2, g = consistent_gauge
    v1 = np.zeros(grid128.shape)
    sol = solve_traps(v1, g, eps21=0.4, eps31=-0.4)
    assert sol.max_residual < 1e-12
    s1, s2 = env1**2, env2**2
    c = s1 / s2
    # with A = 0 and V1 = 0 the minimum-norm solution has the closed form
    # V2 = -eps21 / (s2 (1 + c^2)), V3 = -c V2
    pred = -0.4 / (s2 * (1.0 + c**2))
    m = g.mask
    assert np.max(np.abs(sol.v2[m] / pred[m] - 1.0)) < 1e-12
    np.testing.assert_allclose(sol.v3[m], -c[m] * sol.v2[m], rtol=0, atol=1e-9 * np.abs(sol.v2[m]).max())
    v2, v3 = sol
    assert v2 is sol.v2 and v3 is sol.v3
    assert (v2[~m] == 0.0).all() and (v3[~m] == 0.0).all()


def test_solved_traps_zero_effective_potentials(grid128, consistent_gauge):
    _, _, g = consistent_gauge
    v1 = np.zeros(grid128.shape)
    sol = solve_traps(v1, g, eps21=0.4, eps31=-0.4)
    _, veff2, veff3 = effective_potentials(None, v1, sol.v2, sol.v3, g, eps21=0.4, eps31=-0.4)
    scale = np.abs(sol.v2[g.mask]).max()
    assert np.nanmax(np.abs(veff2)) < 1e-12 * scale
    assert np.nanmax(np.abs(veff3)) < 1e-12 * scale


def test_solve_traps_decoupled_limit(grid128):
    # |xi1| << |xi2|: flavor 3 decouples, V2 -> -eps21/s2 and V3 -> 0
    r = grid128.r_map
    env1 = 0.01 * np.exp(-(r**2) / (2.0 * 2.0**2))
    env2 = 0.30 * np.exp(-(r**2) / (2.0 * 2.0**2))
    g = gauge_potentials(env1 + 0j, env2 + 0j, grid128)
    sol = solve_traps(np.zeros(grid128.shape), g, eps21=0.4, eps31=-0.4)
    m = g.mask
    s2 = env2[m] ** 2
    assert np.max(np.abs(sol.v2[m] * s2 / (-0.4) - 1.0)) < 1e-5
    assert np.abs(sol.v3[m]).max() < 2e-3 * np.abs(sol.v2[m]).max()


def test_solve_traps_inconsistent_vortex_pair(weak_beams64, grid64):
    # equal moduli with opposite windings make c = 1 and b2 = b3 > 0, so
    # b2 + c b3 > 0: the two zero conditions cannot hold at once
    xi1, xi2 = xi_ratios(weak_beams64)
    g = gauge_potentials(xi1, xi2, grid64)
    v1 = np.zeros(grid64.shape)
    with pytest.raises(TrapSolveError, match="inconsistent") as info:
        solve_traps(v1, g)
    assert "grid point" in str(info.value)
    sol = solve_traps(v1, g, rtol=np.inf)
    assert sol.max_residual == pytest.approx(1.0, rel=1e-6)


def test_solve_traps_shape_validation(grid128, consistent_gauge):
    _, _, g = consistent_gauge
    with pytest.raises(ValueError, match="grid shape"):
        solve_traps(np.zeros((3, 3)), g)


# --- effective potentials ------------------------------------------------


def test_constant_potential_identity(weak_beams64, grid64):
    """Equal constant traps V0 on all three levels give Veff1 = V0 up to
    the |A1|^2 term, which vanishes for degenerate ratios."""
    xi1, xi2 = xi_ratios(weak_beams64)
    g = gauge_potentials(xi1, xi2, grid64)
    v0 = 0.7 * np.ones(grid64.shape)
    veff1, _, _ = effective_potentials(weak_beams64, v0, v0, v0, g)
    assert np.nanmax(np.abs(veff1[g.mask] - 0.7)) < 1e-14


def test_constant_potential_identity_uniform_ratios(grid64):
    xu1 = 0.2 * np.ones(grid64.shape, dtype=complex)
    xu2 = 0.25 * np.ones(grid64.shape, dtype=complex)
    g = gauge_potentials(xu1, xu2, grid64)
    v0 = -1.3 * np.ones(grid64.shape)
    veff1, veff2, veff3 = effective_potentials(None, v0, v0, v0, g, eps21=0.0, eps31=0.0)
    assert np.nanmax(np.abs(veff1[g.mask] + 1.3)) == 0.0
    assert np.isfinite(veff2[g.mask]).all() and np.isfinite(veff3[g.mask]).all()


def test_effective_potentials_defaults_from_beams(weak_beams64, grid64):
    xi1, xi2 = xi_ratios(weak_beams64)
    g = gauge_potentials(xi1, xi2, grid64)
    z = np.zeros(grid64.shape)
    explicit = effective_potentials(
        None, z, z, z, g, eps21=-weak_beams64.eps12, eps31=-weak_beams64.eps13
    )
    defaulted = effective_potentials(weak_beams64, z, z, z, g)
    for a, b in zip(explicit, defaulted):
        np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError, match="eps21"):
        effective_potentials(None, z, z, z, g)


def test_effective_potentials_nan_off_mask(weak_beams64, grid64):
    xi1, xi2 = xi_ratios(weak_beams64)
    g = gauge_potentials(xi1, xi2, grid64)
    z = np.zeros(grid64.shape)
    veff1, veff2, veff3 = effective_potentials(weak_beams64, z, z, z, g)
    for v in (veff1, veff2, veff3):
        assert np.isnan(v[~g.mask]).all()
