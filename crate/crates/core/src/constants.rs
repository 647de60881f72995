//! CODATA 2018 exact / recommended values in SI units.

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
