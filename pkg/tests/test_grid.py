import numpy as np
import pytest

from vxsim.errors import GridSizeError
from vxsim.grid import Field, gradient, laplacian, make_grid


def test_wavenumber_layout_4pt():
    g = make_grid(4, 4, 2.0 * np.pi, 2.0 * np.pi)
    # fftfreq layout times 2*pi/L: Nyquist carries the negative wavenumber
    assert np.allclose(g.kx, [0.0, 1.0, -2.0, -1.0])
    assert np.allclose(g.kx_grad, [0.0, 1.0, 0.0, -1.0])


def test_coordinates_center_on_grid_point(grid16):
    assert grid16.x[grid16.nx // 2] == 0.0
    assert grid16.r_map[grid16.nx // 2, grid16.ny // 2] == 0.0
    # azimuth of the +x axis is 0, of the +y axis pi/2
    assert grid16.phi_map[grid16.nx // 2 + 3, grid16.ny // 2] == 0.0
    assert grid16.phi_map[grid16.nx // 2, grid16.ny // 2 + 3] == pytest.approx(np.pi / 2)


def test_spectral_derivatives_exact_on_modes(grid16):
    f = np.sin(grid16.xm) * np.cos(2.0 * grid16.ym)
    fx, fy = gradient(f, grid16)
    assert np.allclose(fx.real, np.cos(grid16.xm) * np.cos(2.0 * grid16.ym), atol=1e-12)
    assert np.allclose(fy.real, -2.0 * np.sin(grid16.xm) * np.sin(2.0 * grid16.ym), atol=1e-12)
    lap = laplacian(f, grid16)
    assert np.allclose(lap.real, -5.0 * f, atol=1e-11)


def test_gradient_of_real_field_stays_real(grid16):
    # any real field, Nyquist content included: the zeroed derivative bin
    # keeps the spectrum conjugate-symmetric
    f = np.random.default_rng(0).standard_normal(grid16.shape)
    fx, fy = gradient(f, grid16)
    assert np.max(np.abs(fx.imag)) < 1e-12
    assert np.max(np.abs(fy.imag)) < 1e-12


def test_nyquist_mode_has_zero_gradient(grid16):
    # the +-1 checkerboard is pure Nyquist content; its first derivative is
    # deliberately zeroed while the Laplacian keeps the full spectrum
    f = np.cos(np.pi * grid16.xm / grid16.dx)
    fx, _ = gradient(f, grid16)
    assert np.max(np.abs(fx)) < 1e-12
    knyq = np.pi / grid16.dx
    assert np.allclose(laplacian(f, grid16).real, -(knyq**2) * f, atol=1e-9)


def test_integrate_and_cell_area(grid64):
    assert grid64.cell_area == pytest.approx(0.0625)
    assert grid64.integrate(np.ones(grid64.shape)) == pytest.approx(256.0)


def test_grid_equality_ignores_arrays():
    assert make_grid(8, 8, 1.0, 2.0) == make_grid(8, 8, 1.0, 2.0)
    assert make_grid(8, 8, 1.0, 2.0) != make_grid(8, 8, 1.0, 3.0)
    assert make_grid(8, 8, 1.0, 2.0) != make_grid(16, 8, 1.0, 2.0)


@pytest.mark.parametrize("nx,ny,lx,ly", [
    (12, 16, 1.0, 1.0),
    (2, 16, 1.0, 1.0),
    (16, 16, 0.0, 1.0),
    (16, 16, 1.0, -2.0),
])
def test_sizing_contract(nx, ny, lx, ly):
    with pytest.raises(GridSizeError):
        make_grid(nx, ny, lx, ly)


def test_field_binds_shape(grid16):
    with pytest.raises(ValueError):
        Field(grid=grid16, values=np.zeros((8, 8)))
    f = Field(grid=grid16, values=np.ones(grid16.shape))
    assert f.norm_sq() == pytest.approx((2.0 * np.pi) ** 2)
    assert f.norm() == pytest.approx(2.0 * np.pi)
