//! Eigenmodes of an air-filled (or uniformly filled) rectangular PEC cavity, and the
//! delta-normalised TEM continuum mode of a semi-infinite coaxial port.
//!
//! Coordinates: the cavity occupies `0 <= x <= a`, `0 <= y <= b`, `0 <= z <= d`, with `a`
//! the broad transverse width, `b` the narrow height and `d` the length. Coaxial probes enter
//! through one of the two broad walls (`y = 0` or `y = b`).
//!
//! Mode profiles are normalised so that `∫ eps_r E_k·E_k dV = 1` and `∫ H_k·H_k dV = 1`, with
//! `H_k = (c0 / ω_k) ∇×E_k`. The normalisation constants come from the closed-form
//! `sin²`/`cos²` integrals, not from quadrature.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::constants::{C0, TWO_PI};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Broad transverse width (m).
    pub a: f64,
    /// Narrow transverse height (m).
    pub b: f64,
    /// Longitudinal length (m).
    pub d: f64,
    /// Relative permittivity of the filling.
    pub eps_r: f64,
}

impl CavityGeometry {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        Self::with_permittivity(a, b, d, 1.0)
    }

    pub fn with_permittivity(a: f64, b: f64, d: f64, eps_r: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && d > 0.0) || !(a.is_finite() && b.is_finite() && d.is_finite()) {
            return Err(Error::domain(format!(
                "cavity dimensions must be positive and finite, got a={a}, b={b}, d={d}"
            )));
        }
        if !(eps_r >= 1.0) || !eps_r.is_finite() {
            return Err(Error::domain(format!("eps_r must be >= 1, got {eps_r}")));
        }
        Ok(Self { a, b, d, eps_r })
    }

    pub fn volume(&self) -> f64 {
        self.a * self.b * self.d
    }

    pub fn contains(&self, r: &Vector3<f64>) -> bool {
        (0.0..=self.a).contains(&r.x) && (0.0..=self.b).contains(&r.y) && (0.0..=self.d).contains(&r.z)
    }

    /// Phase velocity of the filling medium.
    pub fn wave_speed(&self) -> f64 {
        C0 / self.eps_r.sqrt()
    }
}

/// Broad wall through which a coaxial probe enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    /// `y = 0`
    Bottom,
    /// `y = b`
    Top,
}

impl Wall {
    /// Unit normal of the wall pointing into the cavity.
    pub fn inward_normal(self) -> Vector3<f64> {
        match self {
            Wall::Bottom => Vector3::y(),
            Wall::Top => -Vector3::y(),
        }
    }

    pub fn opposite(self) -> Wall {
        match self {
            Wall::Bottom => Wall::Top,
            Wall::Top => Wall::Bottom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoaxProbe {
    /// Axis position on the broad wall (m).
    pub x0: f64,
    pub z0: f64,
    pub wall: Wall,
    /// Inner conductor radius (m).
    pub r_inner: f64,
    /// Outer conductor radius (m); bounds the port aperture.
    pub r_outer: f64,
    /// Protrusion of the inner conductor into the cavity (m).
    pub h: f64,
}

impl CoaxProbe {
    pub fn validate(&self, geom: &CavityGeometry) -> Result<()> {
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer) {
            return Err(Error::domain(format!(
                "coax radii must satisfy 0 < r_inner < r_outer, got {} and {}",
                self.r_inner, self.r_outer
            )));
        }
        if !(self.h >= 0.0 && self.h < geom.b) {
            return Err(Error::domain(format!("probe length must satisfy 0 <= h < b = {}, got {}", geom.b, self.h)));
        }
        let ro = self.r_outer;
        if self.x0 - ro < 0.0 || self.x0 + ro > geom.a || self.z0 - ro < 0.0 || self.z0 + ro > geom.d {
            return Err(Error::domain(format!(
                "coax aperture of radius {ro} at (x={}, z={}) leaves the {:?} wall",
                self.x0, self.z0, self.wall
            )));
        }
        Ok(())
    }

    /// Point where the aperture plane meets the probe axis.
    pub fn base(&self, geom: &CavityGeometry) -> Vector3<f64> {
        let y = match self.wall {
            Wall::Bottom => 0.0,
            Wall::Top => geom.b,
        };
        Vector3::new(self.x0, y, self.z0)
    }

    /// Centre of the free end of the inner conductor.
    pub fn tip(&self, geom: &CavityGeometry) -> Vector3<f64> {
        self.base(geom) + self.wall.inward_normal() * self.h
    }

    /// Volume of the protruding inner conductor.
    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.r_inner * self.r_inner * self.h
    }

    /// Mirror image through the plane `z = d/2`.
    pub fn mirrored_z(&self, geom: &CavityGeometry) -> CoaxProbe {
        CoaxProbe { z0: geom.d - self.z0, ..*self }
    }

    /// Whether the two inner-conductor cylinders intersect.
    pub fn overlaps(&self, other: &CoaxProbe, geom: &CavityGeometry) -> bool {
        let dist = (self.x0 - other.x0).hypot(self.z0 - other.z0);
        if dist >= self.r_inner + other.r_inner {
            return false;
        }
        if self.wall == other.wall {
            self.h > 0.0 && other.h > 0.0
        } else {
            self.h + other.h > geom.b
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    TE,
    TM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub family: Family,
    pub m: u32,
    pub n: u32,
    pub p: u32,
}

impl ModeIndex {
    pub const fn te(m: u32, n: u32, p: u32) -> Self {
        Self { family: Family::TE, m, n, p }
    }

    pub const fn tm(m: u32, n: u32, p: u32) -> Self {
        Self { family: Family::TM, m, n, p }
    }

    /// TE (to z) needs `(m, n) != (0, 0)` and `p >= 1`; TM needs `m, n >= 1`.
    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::TE if self.m == 0 && self.n == 0 => {
                Err(Error::domain(format!("{self}: TE modes require m and n not both zero")))
            }
            Family::TE if self.p == 0 => {
                Err(Error::domain(format!("{self}: TE modes require p >= 1 (field vanishes)")))
            }
            Family::TM if self.m == 0 || self.n == 0 => {
                Err(Error::domain(format!("{self}: TM modes require m >= 1 and n >= 1")))
            }
            _ => Ok(()),
        }
    }

    fn wavenumbers(&self, geom: &CavityGeometry) -> (f64, f64, f64) {
        use std::f64::consts::PI;
        (self.m as f64 * PI / geom.a, self.n as f64 * PI / geom.b, self.p as f64 * PI / geom.d)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::TE => "TE",
            Family::TM => "TM",
        };
        if self.m < 10 && self.n < 10 && self.p < 10 {
            write!(f, "{fam}{}{}{}", self.m, self.n, self.p)
        } else {
            write!(f, "{fam}_{}_{}_{}", self.m, self.n, self.p)
        }
    }
}

impl FromStr for ModeIndex {
    type Err = Error;

    /// Accepts `TE101` (single digits) or `TE_1_0_12`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("cannot parse mode label {s:?}"));
        let upper = s.trim().to_ascii_uppercase();
        let (family, rest) = if let Some(r) = upper.strip_prefix("TE") {
            (Family::TE, r)
        } else if let Some(r) = upper.strip_prefix("TM") {
            (Family::TM, r)
        } else {
            return Err(bad());
        };
        let idx: Vec<u32> = if let Some(r) = rest.strip_prefix('_') {
            r.split('_').map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?
        } else {
            rest.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<_>>()?
        };
        let [m, n, p] = idx[..] else { return Err(bad()) };
        let index = ModeIndex { family, m, n, p };
        index.validate()?;
        Ok(index)
    }
}

/// Resonant angular frequency `(c0/√eps_r) π √((m/a)² + (n/b)² + (p/d)²)`.
pub fn resonant_frequency(index: ModeIndex, geom: &CavityGeometry) -> Result<f64> {
    index.validate()?;
    let (kx, ky, kz) = index.wavenumbers(geom);
    Ok(geom.wave_speed() * (kx * kx + ky * ky + kz * kz).sqrt())
}

// ∫_0^L cos²(mπx/L) dx and ∫_0^L sin²(mπx/L) dx
fn int_cos2(m: u32, len: f64) -> f64 {
    if m == 0 {
        len
    } else {
        0.5 * len
    }
}

fn int_sin2(m: u32, len: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        0.5 * len
    }
}

/// A normalised cavity eigenmode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    pub index: ModeIndex,
    pub geometry: CavityGeometry,
    /// Unperturbed resonance (rad/s).
    pub omega: f64,
    /// Amplitude of the normalised E field (m^-3/2); for TE_m0p and TM_mn0 modes this is the
    /// field maximum.
    pub norm_e: f64,
    /// Amplitude of the normalised H field (m^-3/2).
    pub norm_h: f64,
    kx: f64,
    ky: f64,
    kz: f64,
    // component shape coefficients, E = norm_e * (ce ⊙ trig factors)
    ce: [f64; 3],
}

impl CavityMode {
    pub fn new(index: ModeIndex, geom: &CavityGeometry) -> Result<Self> {
        let omega = resonant_frequency(index, geom)?;
        let (kx, ky, kz) = index.wavenumbers(geom);
        let kt = kx.hypot(ky);
        let k = (kt * kt + kz * kz).sqrt();
        let (m, n, p) = (index.m, index.n, index.p);
        let (a, b, d) = (geom.a, geom.b, geom.d);
        // Integrals of the squared trig products multiplying each component.
        let ix = int_cos2(m, a) * int_sin2(n, b) * int_sin2(p, d);
        let iy = int_sin2(m, a) * int_cos2(n, b) * int_sin2(p, d);
        let iz = int_sin2(m, a) * int_sin2(n, b) * int_cos2(p, d);
        let ce = match index.family {
            // E_x = -N (ky/kt) cos sin sin,  E_y = N (kx/kt) sin cos sin,  E_z = 0
            Family::TE => [-ky / kt, kx / kt, 0.0],
            // E_x = -N kx kz/(k kt) cos sin sin, E_y = -N ky kz/(k kt) sin cos sin,
            // E_z = N kt/k sin sin cos
            Family::TM => [-kx * kz / (k * kt), -ky * kz / (k * kt), kt / k],
        };
        let energy = ce[0] * ce[0] * ix + ce[1] * ce[1] * iy + ce[2] * ce[2] * iz;
        let norm_e = 1.0 / (geom.eps_r * energy).sqrt();
        Ok(Self { index, geometry: *geom, omega, norm_e, norm_h: norm_e * geom.eps_r.sqrt(), kx, ky, kz, ce })
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / TWO_PI
    }

    /// Normalised `(E_k(r), H_k(r))` at a point inside the cavity.
    pub fn fields(&self, r: &Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>)> {
        if !self.geometry.contains(r) {
            return Err(Error::domain(format!(
                "point ({:.6e}, {:.6e}, {:.6e}) m lies outside the cavity",
                r.x, r.y, r.z
            )));
        }
        Ok(self.fields_unchecked(r))
    }

    pub(crate) fn fields_unchecked(&self, r: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        let (sx, cx) = (self.kx * r.x).sin_cos();
        let (sy, cy) = (self.ky * r.y).sin_cos();
        let (sz, cz) = (self.kz * r.z).sin_cos();
        let n = self.norm_e;
        let [ax, ay, az] = self.ce;
        let e = Vector3::new(n * ax * cx * sy * sz, n * ay * sx * cy * sz, n * az * sx * sy * cz);

        // ∇×E evaluated in closed form, then H = (√eps_r / k) ∇×E.
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let curl = Vector3::new(
            n * (az * ky * sx * cy * cz - ay * kz * sx * cy * cz),
            n * (ax * kz * cx * sy * cz - az * kx * cx * sy * cz),
            n * (ay * kx * cx * cy * sz - ax * ky * cx * cy * sz),
        );
        let k = (kx * kx + ky * ky + kz * kz).sqrt();
        let h = curl * (self.geometry.eps_r.sqrt() / k);
        (e, h)
    }

    /// `∫ (|H_k|² + eps_r |E_k|²) dV` for the normalised profiles.
    pub const STORED_ENERGY: f64 = 2.0;
}

/// `eval_fields` with the cavity geometry carried by the mode.
pub fn eval_fields(mode: &CavityMode, r: &Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>)> {
    mode.fields(r)
}

/// All valid TE/TM modes resonating at or below `f_max` (Hz), ascending in frequency, ties
/// broken by `(family, m, n, p)`.
pub fn mode_list(geom: &CavityGeometry, f_max: f64) -> Vec<CavityMode> {
    if !(f_max > 0.0) {
        return Vec::new();
    }
    // (m/a)² <= (2 f_max / v)²  bounds each index independently.
    let kmax = 2.0 * f_max / geom.wave_speed();
    let bound = |len: f64| (kmax * len).floor() as u32;
    let (mm, nm, pm) = (bound(geom.a), bound(geom.b), bound(geom.d));
    let omega_max = TWO_PI * f_max;

    let mut modes = Vec::new();
    for family in [Family::TE, Family::TM] {
        for m in 0..=mm {
            for n in 0..=nm {
                for p in 0..=pm {
                    let index = ModeIndex { family, m, n, p };
                    if index.validate().is_err() {
                        continue;
                    }
                    let mode = CavityMode::new(index, geom).expect("validated index");
                    if mode.omega <= omega_max * (1.0 + 1e-14) {
                        modes.push(mode);
                    }
                }
            }
        }
    }
    modes.sort_by(|l, r| match l.omega.partial_cmp(&r.omega).unwrap_or(Ordering::Equal) {
        Ordering::Equal => l.index.cmp(&r.index),
        o => o,
    });
    modes
}

/// `√(2/(π c0))`: prefactor making `cos(ωz/c0)` standing waves on a PMC-terminated
/// semi-infinite line delta-normalised in ω.
pub fn tem_continuum_prefactor() -> f64 {
    (2.0 / (std::f64::consts::PI * C0)).sqrt()
}

/// Cross-section integral `∬ |E_T|² dS` of the delta-normalised TEM mode at the port
/// reference plane, `2/(π c0)` (s/m). The transverse profile carries unit power, so this is
/// the per-unit-length normalisation left after the continuum factor.
pub fn tem_cross_section_norm() -> f64 {
    2.0 / (std::f64::consts::PI * C0)
}

/// Transverse E of the delta-normalised TEM mode at the port reference plane, in cavity
/// coordinates (units s^1/2 m^-3/2). `phi` is measured from `+x` towards `+z`.
///
/// `E = √(2/(π c0)) ρ̂ / (ρ √(2π ln(r_outer/r_inner)))`
pub fn coax_tem_profile(probe: &CoaxProbe, rho: f64, phi: f64) -> Result<Vector3<f64>> {
    if !(rho >= probe.r_inner && rho <= probe.r_outer) {
        return Err(Error::domain(format!(
            "rho = {rho} outside the coax annulus [{}, {}]",
            probe.r_inner, probe.r_outer
        )));
    }
    Ok(coax_tem_unchecked(probe, rho, phi))
}

pub(crate) fn coax_tem_unchecked(probe: &CoaxProbe, rho: f64, phi: f64) -> Vector3<f64> {
    let ln = (probe.r_outer / probe.r_inner).ln();
    let mag = tem_continuum_prefactor() / (rho * (std::f64::consts::TAU * ln).sqrt());
    let (s, c) = phi.sin_cos();
    Vector3::new(mag * c, 0.0, mag * s)
}
