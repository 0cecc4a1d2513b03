import numpy as np
import pytest

from vxsim.beams import xi_ratios
from vxsim.errors import AdiabaticityWarning, DivergenceError
from vxsim.evolution import (
    MatterState,
    Ramp,
    advisory_dt,
    dark_state_error,
    initial_state,
    local_step,
    qp_cancel_potential,
    run_adiabatic_loading,
    step,
    thomas_fermi_density,
)


def _blank_state(grid, u=0.0):
    return MatterState(
        grid=grid,
        phi=np.zeros((5,) + grid.shape, dtype=complex),
        traps=np.zeros((5,) + grid.shape),
        u=u,
    )


def test_state_shape_validation(grid16):
    with pytest.raises(ValueError, match="phi"):
        MatterState(grid=grid16, phi=np.zeros((4,) + grid16.shape),
                    traps=np.zeros((5,) + grid16.shape), u=0.0)
    with pytest.raises(ValueError, match="traps"):
        MatterState(grid=grid16, phi=np.zeros((5,) + grid16.shape),
                    traps=np.zeros(grid16.shape), u=0.0)


def test_initial_state_population(grid64):
    rho = thomas_fermi_density(grid64, 1.0, 5.0)
    state = initial_state(grid64, rho, np.zeros((5,) + grid64.shape), 0.0)
    pops = state.populations()
    assert pops[0] == pytest.approx(grid64.integrate(rho))
    assert np.all(pops[1:] == 0.0)
    assert state.norm() == pytest.approx(np.sqrt(pops[0]))


def test_rabi_oscillation_single_control(uniform_beams, grid16):
    # control 1 couples the first meta-stable component to its excited
    # partner: a clean two-level Rabi flop P_e = sin^2(omega t)
    omega = 0.8
    beams = uniform_beams(grid16, c1=omega)
    state = _blank_state(grid16)
    state.phi[1] = 1.0
    dt = 0.01
    for _ in range(125):
        step(state, beams, dt)
    t = state.t
    pops = state.populations()
    p_e = pops[3] / np.sum(pops)
    assert t == pytest.approx(1.25)
    assert p_e == pytest.approx(np.sin(omega * t) ** 2, abs=1e-10)


def test_lambda_system_bright_state_oracle(uniform_beams, grid16):
    # probe + control from the ground component: the bright-state flop
    # P_e = (op/oeff)^2 sin^2(oeff t), oeff = sqrt(op^2 + oc^2)
    op, oc = 0.09, 1.0
    oeff = np.hypot(op, oc)
    beams = uniform_beams(grid16, p1=op, c1=oc)
    state = _blank_state(grid16)
    state.phi[0] = 1.0
    dt = 0.005
    for _ in range(200):
        step(state, beams, dt)
    pops = state.populations()
    p_e = pops[3] / np.sum(pops)
    assert p_e == pytest.approx((op / oeff) ** 2 * np.sin(oeff * state.t) ** 2, abs=1e-10)


def test_engines_agree(weak_beams64, grid64):
    rho = thomas_fermi_density(grid64, 1.0, 5.0)
    a = initial_state(grid64, rho, np.zeros((5,) + grid64.shape), 0.4)
    b = a.copy()
    for _ in range(5):
        step(a, weak_beams64, 0.004, engine="series")
        step(b, weak_beams64, 0.004, engine="eigh")
    assert np.max(np.abs(a.phi - b.phi)) < 1e-12


def test_dark_state_is_local_fixed_point(weak_beams64, grid64):
    xi1, xi2 = xi_ratios(weak_beams64)
    f = np.sqrt(thomas_fermi_density(grid64, 1.0, 5.0))
    state = _blank_state(grid64)
    state.phi[0] = f
    state.phi[1] = -xi1 * f
    state.phi[2] = -xi2 * f
    before = state.phi.copy()
    local_step(state, weak_beams64, dt=0.05)
    assert np.max(np.abs(state.phi - before)) < 1e-14
    assert dark_state_error(state, weak_beams64) < 1e-12


def test_free_gaussian_spreading(grid64, uniform_beams):
    # <r^2>(t) = a^2 (1 + t^2/a^4) for psi0 = exp(-r^2/(2 a^2)); with no
    # potential at all the split evolution is exactly spectral
    beams = uniform_beams(grid64)
    state = _blank_state(grid64)
    state.phi[0] = np.exp(-0.5 * grid64.r_map**2)
    for _ in range(50):
        step(state, beams, 0.004)
    t = state.t
    dens = np.abs(state.phi[0]) ** 2
    m2 = grid64.integrate(grid64.r_map**2 * dens) / grid64.integrate(dens)
    assert m2 == pytest.approx(1.0 + t**2, rel=1e-9)


def test_norm_conservation_during_loading(weak_beams64, grid64):
    rho = thomas_fermi_density(grid64, 1.0, 5.0)
    state = initial_state(grid64, rho, np.zeros((5,) + grid64.shape), 0.4)
    # 50 steps cover 2% of the ramp, so the final fidelity check warns
    with pytest.warns(AdiabaticityWarning):
        result = run_adiabatic_loading(
            state, weak_beams64, dt=0.004, n_steps=50, ramp=Ramp(10.0)
        )
    assert result.norm_drift < 1e-12
    assert result.n_steps == 50


def test_asymmetric_mean_field_breaks_unitarity(uniform_beams, grid16):
    beams = uniform_beams(grid16, c1=1.0)
    state = _blank_state(grid16, u=1.0)
    state.phi[0] = 1.0
    state.phi[1] = 0.5j
    n0 = state.norm()
    hermitian = state.copy()
    local_step(state, beams, dt=0.01, asymmetric_mean_field=True)
    assert abs(state.norm() - n0) / n0 > 1e-4
    local_step(hermitian, beams, dt=0.01, asymmetric_mean_field=False)
    assert abs(hermitian.norm() - n0) / n0 < 1e-13


def test_asymmetric_mean_field_refuses_eigh(uniform_beams, grid16):
    beams = uniform_beams(grid16, c1=1.0)
    state = _blank_state(grid16)
    state.phi[0] = 1.0
    with pytest.raises(ValueError, match="non-Hermitian"):
        local_step(state, beams, dt=0.01, engine="eigh", asymmetric_mean_field=True)


def test_series_divergence_reported(uniform_beams, grid16):
    beams = uniform_beams(grid16, c1=10.0)
    state = _blank_state(grid16)
    state.phi[1] = 1.0
    with pytest.raises(DivergenceError, match="advisory"):
        local_step(state, beams, dt=100.0)


def test_step_flags_nonfinite(uniform_beams, grid16):
    beams = uniform_beams(grid16)
    state = _blank_state(grid16)
    state.phi[0] = 1.0
    state.phi[0, 3, 3] = np.nan
    with pytest.raises(DivergenceError, match="non-finite"):
        step(state, beams, 0.01)


def test_unknown_engine(uniform_beams, grid16):
    beams = uniform_beams(grid16)
    state = _blank_state(grid16)
    with pytest.raises(ValueError, match="engine"):
        local_step(state, beams, 0.01, engine="cayley")


def test_ramp_profile():
    ramp = Ramp(4.0)
    assert ramp.envelope(-1.0) == 0.0
    assert ramp.envelope(0.0) == 0.0
    assert ramp.envelope(2.0) == pytest.approx(0.5)
    assert ramp.envelope(4.0) == 1.0
    assert ramp.envelope(9.0) == 1.0
    ts = np.linspace(0.0, 4.0, 100)
    vals = [ramp.envelope(t) for t in ts]
    assert np.all(np.diff(vals) >= 0.0)
    assert Ramp(0.0).envelope(0.0) == 1.0


def test_advisory_dt(grid128):
    assert advisory_dt(grid128) == pytest.approx(0.125**2 / np.pi)
    assert 0.004 < advisory_dt(grid128)


def test_thomas_fermi_profile(grid64):
    rho = thomas_fermi_density(grid64, 2.0, 5.0, rim=0.05)
    c = grid64.nx // 2
    assert rho[c, c] == pytest.approx(2.0, rel=1e-8)
    k_edge = int(round(5.0 / grid64.dx))
    assert rho[c + k_edge, c] == pytest.approx(2.0 * 0.05 * np.log(2.0), rel=1e-6)
    assert rho[c, c] > rho[c + 8, c] > rho[c + 16, c] > rho[c + 24, c]
    assert rho[c + 28, c] < 1e-9
    with pytest.raises(ValueError):
        thomas_fermi_density(grid64, 1.0, -5.0)
    with pytest.raises(ValueError):
        thomas_fermi_density(grid64, -1.0, 5.0)


def test_qp_cancel_exact_on_smooth_density(grid64, uniform_beams):
    # strictly positive periodic density: the engineered trap makes
    # sqrt(rho) an exact zero-energy eigenstate, so the residual motion is
    # pure Strang splitting error and must shrink as dt^2
    k = 2.0 * np.pi / grid64.lx
    rho = 1.0 + 0.3 * np.cos(k * grid64.xm) * np.cos(k * grid64.ym)
    v1 = qp_cancel_potential(grid64, rho)
    base = np.sqrt(rho)
    beams = uniform_beams(grid64)

    def deviation(dt, n):
        state = _blank_state(grid64)
        state.phi[0] = base
        state.traps[0] = v1
        for _ in range(n):
            step(state, beams, dt)
        diff = np.abs(state.phi[0]) ** 2 - rho
        return float(np.max(np.abs(diff)))

    d1 = deviation(0.016, 25)
    d2 = deviation(0.008, 50)
    assert d2 < 1e-6
    assert 3.0 < d1 / d2 < 5.0


def test_qp_cancel_holds_thomas_fermi(grid64, uniform_beams):
    rho = thomas_fermi_density(grid64, 1.0, 5.0)
    v1 = qp_cancel_potential(grid64, rho)
    beams = uniform_beams(grid64)

    def density_change(trap):
        state = _blank_state(grid64)
        state.phi[0] = np.sqrt(rho)
        state.traps[0] = trap
        for _ in range(50):
            step(state, beams, 0.004)
        return float(np.max(np.abs(np.abs(state.phi[0]) ** 2 - rho)) / rho.max())

    held = density_change(v1)
    free = density_change(np.zeros(grid64.shape))
    assert held < 1e-3
    assert held < free / 50.0


def test_fast_ramp_warns(uniform_beams, grid16):
    # c2 live so the final dark-state check can form both ratios
    beams = uniform_beams(grid16, p1=0.2, c1=2.0, c2=2.0)
    state = _blank_state(grid16)
    state.phi[0] = 1.0
    with pytest.warns(AdiabaticityWarning):
        run_adiabatic_loading(state, beams, dt=0.01, n_steps=5, ramp=Ramp(0.05))
