//! Transmon characterisation: dipole capacitance, charging and Josephson energies, and the
//! charge-basis spectrum with nearest-neighbour charge matrix elements.

use log::warn;
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use crate::constants::{C0, E_CHARGE, HBAR};
use crate::{Error, Result};

/// Relative eigenvalue change tolerated between cutoffs `N` and `N + 4`.
pub const CUTOFF_TOLERANCE: f64 = 1e-10;
const MAX_CUTOFF: usize = 400;

/// A short thin-wire dipole antenna forming the transmon pads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSpec {
    /// Total length `ℓ` (m).
    pub length: f64,
    /// Wire radius (m).
    pub radius: f64,
    /// Feed gap holding the junction (m).
    pub gap: f64,
    /// Centre position in cavity coordinates (m).
    pub center: Vector3<f64>,
    /// Unit orientation `ℓ̂`.
    pub orientation: Vector3<f64>,
}

impl DipoleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.radius > 0.0) {
            return Err(Error::domain("dipole length and radius must be positive"));
        }
        if !(self.length / (2.0 * self.radius) > std::f64::consts::E) {
            return Err(Error::domain(format!(
                "dipole too thick: ln(l/2r) - 1 must be positive (l = {}, r = {})",
                self.length, self.radius
            )));
        }
        if !(self.gap >= 0.0 && self.gap < self.length) {
            return Err(Error::domain("dipole gap must lie in [0, length)"));
        }
        if (self.orientation.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "dipole orientation must be a unit vector, |l| = {}",
                self.orientation.norm()
            )));
        }
        Ok(())
    }

    /// The two wire ends.
    pub fn endpoints(&self) -> (Vector3<f64>, Vector3<f64>) {
        let half = self.orientation * (0.5 * self.length);
        (self.center - half, self.center + half)
    }
}

/// Geometric capacitance of a short dipole, `tan(kℓ/2) / (120 ω (ln(ℓ/2r) − 1))`, with the
/// free-space wave number `k = ω/c0`.
pub fn dipole_capacitance(dipole: &DipoleSpec, omega0: f64) -> Result<f64> {
    dipole.validate()?;
    if !(omega0 > 0.0) {
        return Err(Error::domain(format!("frequency must be positive, got {omega0}")));
    }
    let x = 0.5 * omega0 / C0 * dipole.length;
    if x >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::OutOfValidity(format!("k l / 2 = {x:.4} reaches the pole of the short-dipole capacitance")));
    }
    Ok(x.tan() / (120.0 * omega0 * ((dipole.length / (2.0 * dipole.radius)).ln() - 1.0)))
}

/// `e² / (2C)` (J).
pub fn charging_energy(c_sigma: f64) -> f64 {
    E_CHARGE * E_CHARGE / (2.0 * c_sigma)
}

/// Inverse of [`charging_energy`].
pub fn capacitance_from_charging_energy(e_c: f64) -> f64 {
    E_CHARGE * E_CHARGE / (2.0 * e_c)
}

/// `(ħ/2e)² / L_J` (J).
pub fn josephson_energy(l_j: f64) -> f64 {
    let phi0 = HBAR / (2.0 * E_CHARGE);
    phi0 * phi0 / l_j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonParams {
    pub e_c: f64,
    pub e_j: f64,
    pub c_ant: f64,
    pub c_l: f64,
    pub c_sigma: f64,
    pub l_j: f64,
}

impl TransmonParams {
    pub fn new(c_ant: f64, c_l: f64, l_j: f64) -> Result<Self> {
        if !(c_ant >= 0.0 && c_l >= 0.0 && c_ant + c_l > 0.0) {
            return Err(Error::domain(format!(
                "capacitances must be non-negative with positive sum, got {c_ant}, {c_l}"
            )));
        }
        if !(l_j > 0.0) {
            return Err(Error::domain(format!("junction inductance must be positive, got {l_j}")));
        }
        let c_sigma = c_ant + c_l;
        let p = Self { e_c: charging_energy(c_sigma), e_j: josephson_energy(l_j), c_ant, c_l, c_sigma, l_j };
        if !p.in_transmon_regime() {
            warn!("E_J/E_C = {:.2} is below the transmon regime (< 20)", p.ratio());
        }
        Ok(p)
    }

    pub fn ratio(&self) -> f64 {
        self.e_j / self.e_c
    }

    pub fn in_transmon_regime(&self) -> bool {
        self.ratio() >= 20.0
    }

    /// Cutoff heuristic `4⌈(E_J/8E_C)^{1/4}⌉ + n_levels`.
    pub fn heuristic_cutoff(&self, n_levels: usize) -> usize {
        4 * (self.e_j / (8.0 * self.e_c)).powf(0.25).ceil() as usize + n_levels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmonSpectrum {
    /// Ground-referenced level frequencies (rad/s), `omega[0] = 0`.
    pub omega: Vec<f64>,
    /// `⟨j|n̂|j+1⟩` for `j = 0..n_levels-1`, each `−i |·|`.
    pub n_elems: Vec<Complex64>,
    /// Charge cutoff `N` (basis `−N..=N`).
    pub cutoff: usize,
}

impl TransmonSpectrum {
    /// Spectrum with the cutoff raised from the heuristic in steps of 4 until converged.
    pub fn solve(params: &TransmonParams, n_levels: usize) -> Result<Self> {
        let mut n = params.heuristic_cutoff(n_levels).max(n_levels);
        let mut prev = diagonalize(params, n_levels, n)?;
        while n <= MAX_CUTOFF {
            let next = diagonalize(params, n_levels, n + 4)?;
            if converged(&prev, &next) {
                return Ok(prev);
            }
            prev = next;
            n += 4;
        }
        Err(Error::Convergence(format!("charge cutoff exceeded {MAX_CUTOFF}")))
    }

    pub fn omega01(&self) -> f64 {
        self.omega[1]
    }

    /// `ω12 − ω01` (rad/s).
    pub fn anharmonicity(&self) -> f64 {
        self.omega[2] - 2.0 * self.omega[1]
    }

    pub fn n_levels(&self) -> usize {
        self.omega.len()
    }
}

fn converged(a: &TransmonSpectrum, b: &TransmonSpectrum) -> bool {
    a.omega.iter().zip(&b.omega).skip(1).all(|(x, y)| (x - y).abs() <= CUTOFF_TOLERANCE * y.abs())
}

/// Lowest `n_levels` of `4E_C n̂² − E_J cos φ̂` in the charge basis `−N..=N`, checked against
/// cutoff `N + 4`.
pub fn transmon_spectrum(params: &TransmonParams, n_levels: usize, n_cutoff: usize) -> Result<TransmonSpectrum> {
    let s = diagonalize(params, n_levels, n_cutoff)?;
    let t = diagonalize(params, n_levels, n_cutoff + 4)?;
    if !converged(&s, &t) {
        return Err(Error::Convergence(format!(
            "transmon levels change by more than {CUTOFF_TOLERANCE:e} between cutoffs {n_cutoff} and {}",
            n_cutoff + 4
        )));
    }
    Ok(s)
}

fn diagonalize(params: &TransmonParams, n_levels: usize, cutoff: usize) -> Result<TransmonSpectrum> {
    if n_levels < 2 {
        return Err(Error::domain("need at least two transmon levels"));
    }
    let dim = 2 * cutoff + 1;
    if dim < n_levels + 1 {
        return Err(Error::domain(format!("charge cutoff {cutoff} too small for {n_levels} levels")));
    }
    // Work in units of E_C for conditioning.
    let ej = params.e_j / params.e_c;
    let charge = |i: usize| i as f64 - cutoff as f64;
    let h = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            4.0 * charge(r).powi(2)
        } else if r.abs_diff(c) == 1 {
            -0.5 * ej
        } else {
            0.0
        }
    });
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = params.e_c / HBAR;
    let e0 = eig.eigenvalues[order[0]];
    let omega = order[..n_levels].iter().map(|&i| (eig.eigenvalues[i] - e0) * scale).collect();

    let n_elems = order[..n_levels]
        .windows(2)
        .map(|w| {
            let (u, v) = (eig.eigenvectors.column(w[0]), eig.eigenvectors.column(w[1]));
            let m: f64 = (0..dim).map(|i| u[i] * charge(i) * v[i]).sum();
            Complex64::new(0.0, -m.abs())
        })
        .collect();
    Ok(TransmonSpectrum { omega, n_elems, cutoff })
}

/// `−i (E_J/8E_C)^{1/4} √((j+1)/2)`
pub fn charge_matrix_element_asymptotic(e_c: f64, e_j: f64, j: usize) -> Complex64 {
    Complex64::new(0.0, -(e_j / (8.0 * e_c)).powf(0.25) * ((j as f64 + 1.0) / 2.0).sqrt())
}

/// Large-`E_J/E_C` level energy `−E_J + √(8E_C E_J)(j+½) − (E_C/12)(6j²+6j+3)` (J).
pub fn asymptotic_level_energy(e_c: f64, e_j: f64, j: usize) -> f64 {
    let j = j as f64;
    -e_j + (8.0 * e_c * e_j).sqrt() * (j + 0.5) - e_c / 12.0 * (6.0 * j * j + 6.0 * j + 3.0)
}
