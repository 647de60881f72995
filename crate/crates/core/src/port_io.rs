//! Cavity/port overlap couplings and the two-port input-output response of a single mode.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::cavity_em::{coax_tem_unchecked, CavityMode, CoaxProbe, ModeIndex};
use crate::constants::C0;
use crate::quadrature::{periodic, trapezoid};
use crate::{Error, Result};

pub const DEFAULT_N_RHO: usize = 64;
pub const DEFAULT_N_PHI: usize = 64;
pub const DEFAULT_R_OUTER: f64 = 2.5e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortCoupling {
    /// Coupling rate, (rad/s)^(1/2).
    pub g: f64,
    pub port_id: usize,
    pub mode_index: ModeIndex,
}

/// `g = (c0/2) √(ω_p/ω_k) ∬ H_k · (E_TEM × ñ) dS` over the coax aperture, with `ñ` the wall
/// normal pointing into the cavity. Trapezoidal in `ρ`, periodic trapezoidal in `φ`.
pub fn port_coupling(
    mode: &CavityMode,
    probe: &CoaxProbe,
    port_id: usize,
    omega_p: f64,
    n_rho: usize,
    n_phi: usize,
) -> Result<PortCoupling> {
    if n_rho < 2 || n_phi < 4 {
        return Err(Error::domain(format!("need n_rho >= 2 and n_phi >= 4, got {n_rho}, {n_phi}")));
    }
    if !(omega_p > 0.0) {
        return Err(Error::domain(format!("port frequency must be positive, got {omega_p}")));
    }
    let geom = &mode.geometry;
    probe.validate(geom)?;
    let base = probe.base(geom);
    let normal = probe.wall.inward_normal();

    let phis: Vec<(f64, f64)> = periodic(n_phi).collect();
    let mut overlap = 0.0;
    for (rho, wr) in trapezoid(probe.r_inner, probe.r_outer, n_rho) {
        for &(phi, wp) in &phis {
            let (s, c) = phi.sin_cos();
            let r = base + nalgebra::Vector3::new(rho * c, 0.0, rho * s);
            let (_, h) = mode.fields_unchecked(&r);
            let e = coax_tem_unchecked(probe, rho, phi);
            overlap += wr * wp * rho * h.dot(&e.cross(&normal));
        }
    }
    let g = 0.5 * C0 * (omega_p / mode.omega).sqrt() * overlap;
    Ok(PortCoupling { g, port_id, mode_index: mode.index })
}

/// Single-mode two-port cavity seen through its couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResponse {
    /// Perturbed resonance (rad/s).
    pub omega0: f64,
    pub g1: f64,
    pub g2: f64,
}

impl ScatteringResponse {
    pub fn new(omega0: f64, g1: f64, g2: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::domain(format!("omega0 must be positive, got {omega0}")));
        }
        if !(g1.is_finite() && g2.is_finite()) {
            return Err(Error::domain("couplings must be finite"));
        }
        Ok(Self { omega0, g1, g2 })
    }

    /// `π (g1² + g2²)`, the amplitude decay rate.
    pub fn half_width(&self) -> f64 {
        std::f64::consts::PI * (self.g1 * self.g1 + self.g2 * self.g2)
    }

    pub(crate) fn check_coupled(&self) -> Result<()> {
        if self.g1 == 0.0 && self.g2 == 0.0 {
            return Err(Error::Degenerate("both port couplings vanish".into()));
        }
        Ok(())
    }

    /// `[[R1, T12], [T21, R2]]` at `omega`.
    pub fn transfer(&self, omega: f64) -> Matrix2<Complex64> {
        self.transfer_detuned(omega - self.omega0)
    }

    /// Transfer matrix at detuning `delta = ω − ω0`.
    pub fn transfer_detuned(&self, delta: f64) -> Matrix2<Complex64> {
        use std::f64::consts::PI;
        let den = Complex64::new(self.half_width(), -delta);
        let (g1s, g2s) = (self.g1 * self.g1, self.g2 * self.g2);
        let r1 = Complex64::new(PI * (g2s - g1s), -delta) / den;
        let r2 = Complex64::new(PI * (g1s - g2s), -delta) / den;
        let t = Complex64::from(-2.0 * PI * self.g1 * self.g2) / den;
        Matrix2::new(r1, t, t, r2)
    }
}

/// Transfer matrix `[[R1, T12], [T21, R2]]` at angular frequency `omega`.
pub fn transfer_functions(resp: &ScatteringResponse, omega: f64) -> Result<Matrix2<Complex64>> {
    resp.check_coupled()?;
    Ok(resp.transfer(omega))
}

/// Full width at half maximum of `|T12(ω)|²`, `2π (g1² + g2²)`.
pub fn half_power_bandwidth(resp: &ScatteringResponse) -> Result<f64> {
    resp.check_coupled()?;
    Ok(2.0 * resp.half_width())
}
