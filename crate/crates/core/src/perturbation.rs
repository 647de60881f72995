//! First-order shape perturbation of a cavity resonance by protruding coax inner conductors.
//!
//! `ω = ω₀ (1 + Σ_probes ∫_ΔV (|H₀|² − eps_r |E₀|²) dV / ∫_V (|H₀|² + eps_r |E₀|²) dV)`
//!
//! With unit-normalised mode profiles the denominator is exactly
//! [`CavityMode::STORED_ENERGY`] (= 2).

use nalgebra::Vector3;

use crate::cavity_em::{CavityGeometry, CavityMode, CoaxProbe};
use crate::quadrature::midpoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationResult {
    pub omega_unperturbed: f64,
    pub omega_perturbed: f64,
    /// `Σ ∫_ΔV (|H|² − eps_r|E|²) dV` in normalised-mode units (dimensionless).
    pub delta_energy_numerator: f64,
    pub total_energy_denominator: f64,
}

impl PerturbationResult {
    fn from_numerator(mode: &CavityMode, numerator: f64) -> Self {
        let den = CavityMode::STORED_ENERGY;
        Self {
            omega_unperturbed: mode.omega,
            omega_perturbed: mode.omega * (1.0 + numerator / den),
            delta_energy_numerator: numerator,
            total_energy_denominator: den,
        }
    }

    /// `(ω − ω₀)/ω₀`
    pub fn relative_shift(&self) -> f64 {
        self.delta_energy_numerator / self.total_energy_denominator
    }
}

/// Node counts for the cylinder quadrature over each probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CylinderGrid {
    pub n_rho: usize,
    pub n_phi: usize,
    pub n_axial: usize,
}

impl Default for CylinderGrid {
    fn default() -> Self {
        Self { n_rho: 16, n_phi: 32, n_axial: 32 }
    }
}

impl CylinderGrid {
    pub fn refined(self) -> Self {
        Self { n_rho: 2 * self.n_rho, n_phi: 2 * self.n_phi, n_axial: 2 * self.n_axial }
    }
}

fn check_probes(geom: &CavityGeometry, probes: &[CoaxProbe]) -> Result<()> {
    for (i, p) in probes.iter().enumerate() {
        p.validate(geom)?;
        for (j, q) in probes.iter().enumerate().skip(i + 1) {
            if p.overlaps(q, geom) {
                return Err(Error::domain(format!("probes {i} and {j} overlap")));
            }
        }
    }
    Ok(())
}

fn energy_density_difference(mode: &CavityMode, r: &Vector3<f64>) -> f64 {
    let (e, h) = mode.fields_unchecked(r);
    h.norm_squared() - mode.geometry.eps_r * e.norm_squared()
}

/// Tip-sampling approximation: the integrand is evaluated once at the free end of each inner
/// conductor and multiplied by the cylinder volume.
pub fn perturbed_frequency_tip(mode: &CavityMode, probes: &[CoaxProbe]) -> Result<PerturbationResult> {
    let geom = &mode.geometry;
    check_probes(geom, probes)?;
    let numerator = probes.iter().map(|p| energy_density_difference(mode, &p.tip(geom)) * p.volume()).sum();
    Ok(PerturbationResult::from_numerator(mode, numerator))
}

/// Midpoint quadrature of the unperturbed energy-density difference over each probe cylinder.
pub fn perturbed_frequency_quadrature(
    mode: &CavityMode,
    probes: &[CoaxProbe],
    grid: CylinderGrid,
) -> Result<PerturbationResult> {
    let geom = &mode.geometry;
    check_probes(geom, probes)?;
    if grid.n_rho == 0 || grid.n_phi == 0 || grid.n_axial == 0 {
        return Err(Error::domain("cylinder grid needs at least one node per axis"));
    }
    let mut numerator = 0.0;
    for p in probes {
        if p.h == 0.0 {
            continue;
        }
        let base = p.base(geom);
        let normal = p.wall.inward_normal();
        let dphi = std::f64::consts::TAU / grid.n_phi as f64;
        for (s, ws) in midpoint(0.0, p.h, grid.n_axial) {
            for (rho, wr) in midpoint(0.0, p.r_inner, grid.n_rho) {
                for k in 0..grid.n_phi {
                    let phi = (k as f64 + 0.5) * dphi;
                    let r = base + normal * s + Vector3::new(rho * phi.cos(), 0.0, rho * phi.sin());
                    numerator += ws * wr * rho * dphi * energy_density_difference(mode, &r);
                }
            }
        }
    }
    Ok(PerturbationResult::from_numerator(mode, numerator))
}
