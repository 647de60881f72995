//! Hong-Ou-Mandel second-order correlation of two single photons scattered by the two-port
//! cavity, from discretised frequency sums.
//!
//! Photon 1 enters port 1 and is centred in time at `t0`; photon 2 enters port 2 centred at
//! `t0 + τ`. Port 1 is read at `t0` and port 2 at `t0 + τ`:
//!
//! ```text
//! A = | Σ W1 R1 e^{-iω t0} · Σ W2 R2 e^{-iω(t0+τ)} + Σ W1 T21 e^{-iω(t0+τ)} · Σ W2 T12 e^{-iω t0} |²
//! B = | Σ W2 T12 e^{-iω t0} |² Σ|W1|² + | Σ W1 R1 e^{-iω t0} |² Σ|W2|²
//! C = | Σ W1 T21 e^{-iω(t0+τ)} |² Σ|W2|² + | Σ W2 R2 e^{-iω(t0+τ)} |² Σ|W1|²
//! g²(τ) = A / (B C)
//! ```

use log::warn;
use num_complex::Complex64;

use crate::port_io::ScatteringResponse;
use crate::{Error, Result};

/// Half-width of the default grid around each packet, in units of `1/σ`.
const GRID_HALF_SPAN_SIGMAS: f64 = 12.0;
/// Minimum spectral coverage, in units of `1/σ`, before a truncation warning.
const COVERAGE_SIGMAS: f64 = 6.0;
pub const DEFAULT_N_BINS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonWavepacket {
    /// Carrier (rad/s).
    pub omega_in: f64,
    /// Temporal standard deviation (s).
    pub sigma: f64,
    pub port: Port,
}

impl PhotonWavepacket {
    pub fn new(omega_in: f64, sigma: f64, port: Port) -> Result<Self> {
        if !(omega_in > 0.0 && sigma > 0.0) || !(omega_in.is_finite() && sigma.is_finite()) {
            return Err(Error::domain(format!("wavepacket needs omega_in > 0 and sigma > 0, got {omega_in}, {sigma}")));
        }
        Ok(Self { omega_in, sigma, port })
    }
}

/// Uniform frequency grid `ω_m = omega_min + m Δω`, `m = 0..n_bins`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_bins: usize,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, n_bins: usize) -> Result<Self> {
        if !(omega_min < omega_max) || n_bins < 2 || !(omega_min.is_finite() && omega_max.is_finite()) {
            return Err(Error::domain(format!(
                "frequency grid needs omega_min < omega_max and n_bins >= 2, got [{omega_min}, {omega_max}] x {n_bins}"
            )));
        }
        Ok(Self { omega_min, omega_max, n_bins })
    }

    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_bins - 1) as f64
    }

    pub fn omega(&self, m: usize) -> f64 {
        self.omega_min + m as f64 * self.step()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_bins).map(|m| self.omega(m))
    }

    /// The discrete sums are periodic in the delay with this period (s).
    pub fn alias_period(&self) -> f64 {
        std::f64::consts::TAU / self.step()
    }

    /// Same span with twice the density.
    pub fn refined(&self) -> Self {
        Self { n_bins: 2 * self.n_bins - 1, ..*self }
    }

    /// Default grid for a pair of packets and the delays to be evaluated: spans
    /// `±12/σ` around the packet carriers, and uses at least [`DEFAULT_N_BINS`] bins and enough
    /// bins that the delay alias period exceeds `2 max|τ| + 20 σ_max`.
    pub fn for_packets(pkts: &[PhotonWavepacket], max_abs_tau: f64) -> Result<Self> {
        let Some(first) = pkts.first() else {
            return Err(Error::domain("no wavepackets"));
        };
        let sigma_min = pkts.iter().map(|p| p.sigma).fold(first.sigma, f64::min);
        let sigma_max = pkts.iter().map(|p| p.sigma).fold(first.sigma, f64::max);
        let lo = pkts.iter().map(|p| p.omega_in).fold(first.omega_in, f64::min);
        let hi = pkts.iter().map(|p| p.omega_in).fold(first.omega_in, f64::max);
        let half = GRID_HALF_SPAN_SIGMAS / sigma_min;
        let (omega_min, omega_max) = (lo - half, hi + half);
        let period = 2.0 * max_abs_tau.abs() + 20.0 * sigma_max;
        let needed = ((omega_max - omega_min) * period / std::f64::consts::TAU).ceil() as usize + 1;
        Self::new(omega_min, omega_max, needed.max(DEFAULT_N_BINS))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights {
    pub values: Vec<Complex64>,
    /// The grid does not cover `±6/σ` around the carrier.
    pub truncated: bool,
}

/// `W(ω_m) ∝ exp(−(σ(ω_m − ω_in))²/2) exp(iω_m t_ref)`, normalised to `Σ|W|² = 1`.
pub fn spectral_weights(pkt: &PhotonWavepacket, grid: &FrequencyGrid, t_ref: f64) -> Result<SpectralWeights> {
    let mut values: Vec<Complex64> = grid
        .omegas()
        .map(|w| {
            let x = pkt.sigma * (w - pkt.omega_in);
            Complex64::from_polar((-0.5 * x * x).exp(), w * t_ref)
        })
        .collect();
    let norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::domain("wavepacket has no support on the frequency grid"));
    }
    values.iter_mut().for_each(|v| *v /= norm);
    let cover = COVERAGE_SIGMAS / pkt.sigma;
    let truncated = grid.omega_min > pkt.omega_in - cover || grid.omega_max < pkt.omega_in + cover;
    if truncated {
        warn!(
            "frequency grid [{:.6e}, {:.6e}] rad/s does not cover ±{COVERAGE_SIGMAS}/σ around {:.6e} rad/s",
            grid.omega_min, grid.omega_max, pkt.omega_in
        );
    }
    Ok(SpectralWeights { values, truncated })
}

/// Numerator and the two detector normalisations of g².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CorrelationTerms {
    pub fn g2(&self) -> Result<f64> {
        let bc = self.b * self.c;
        if !(bc > 0.0) {
            return Err(Error::UndefinedCorrelation(format!("detector normalisation B·C = {bc:e} vanishes")));
        }
        Ok(self.a / bc)
    }
}

fn check_ports(pkt1: &PhotonWavepacket, pkt2: &PhotonWavepacket) -> Result<()> {
    if pkt1.port != Port::One || pkt2.port != Port::Two {
        return Err(Error::domain("photon 1 must enter port 1 and photon 2 port 2"));
    }
    Ok(())
}

/// `A`, `B`, `C` with an explicit reference time `t0`. The result does not depend on `t0`.
pub fn correlation_terms(
    resp: &ScatteringResponse,
    pkt1: &PhotonWavepacket,
    pkt2: &PhotonWavepacket,
    tau: f64,
    t0: f64,
    grid: &FrequencyGrid,
) -> Result<CorrelationTerms> {
    check_ports(pkt1, pkt2)?;
    resp.check_coupled()?;
    let w1 = spectral_weights(pkt1, grid, t0)?;
    let w2 = spectral_weights(pkt2, grid, t0 + tau)?;
    let t1 = t0 + tau;

    let zero = Complex64::new(0.0, 0.0);
    let (mut s_r1, mut s_r2, mut s_t21, mut s_t12) = (zero, zero, zero, zero);
    let (mut n1, mut n2) = (0.0, 0.0);
    for (m, w) in grid.omegas().enumerate() {
        let s = resp.transfer(w);
        let (r1, t12, t21, r2) = (s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
        let (a, b) = (w1.values[m], w2.values[m]);
        let p0 = Complex64::from_polar(1.0, -w * t0);
        let p1 = Complex64::from_polar(1.0, -w * t1);
        s_r1 += a * r1 * p0;
        s_t12 += b * t12 * p0;
        s_r2 += b * r2 * p1;
        s_t21 += a * t21 * p1;
        n1 += a.norm_sqr();
        n2 += b.norm_sqr();
    }
    Ok(CorrelationTerms {
        a: (s_r1 * s_r2 + s_t21 * s_t12).norm_sqr(),
        b: s_t12.norm_sqr() * n1 + s_r1.norm_sqr() * n2,
        c: s_t21.norm_sqr() * n2 + s_r2.norm_sqr() * n1,
    })
}

/// `g²(τ) = A/(B·C)` with `t0 = 0`.
pub fn g2(
    resp: &ScatteringResponse,
    pkt1: &PhotonWavepacket,
    pkt2: &PhotonWavepacket,
    tau: f64,
    grid: &FrequencyGrid,
) -> Result<f64> {
    correlation_terms(resp, pkt1, pkt2, tau, 0.0, grid)?.g2()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomCurve {
    pub taus: Vec<f64>,
    /// `None` where g² is undefined at that delay.
    pub g2_values: Vec<Option<f64>>,
}

/// g² over a list of delays. Per-point failures are recorded as `None`; invalid inputs that
/// affect every point are returned as errors.
pub fn hom_curve(
    resp: &ScatteringResponse,
    pkt1: &PhotonWavepacket,
    pkt2: &PhotonWavepacket,
    taus: &[f64],
    grid: &FrequencyGrid,
) -> Result<HomCurve> {
    check_ports(pkt1, pkt2)?;
    resp.check_coupled()?;
    let g2_values = taus
        .iter()
        .map(|&tau| match g2(resp, pkt1, pkt2, tau, grid) {
            Ok(v) => Some(v),
            Err(e) => {
                warn!("g2 undefined at tau = {tau:e}: {e}");
                None
            }
        })
        .collect();
    Ok(HomCurve { taus: taus.to_vec(), g2_values })
}

/// Carrier detuned by `π(g1² + g2²)` above `ω0`, where `|R| = |T|` with a `π/2` relative phase
/// for symmetric couplings.
pub fn balanced_center_frequency(resp: &ScatteringResponse) -> Result<f64> {
    if resp.g1 == 0.0 || resp.g2 == 0.0 {
        return Err(Error::Degenerate("balanced point needs both ports coupled".into()));
    }
    Ok(resp.omega0 + resp.half_width())
}

/// Brute-force minimiser of `g²(0)` for matched packets of width `sigma` whose common carrier
/// is scanned over `n` equally spaced points of `[lo, hi]`. Returns `(carrier, g²(0))`.
pub fn scan_balanced_frequency(
    resp: &ScatteringResponse,
    sigma: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if !(lo < hi) || n < 2 {
        return Err(Error::domain("scan window needs lo < hi and at least two points"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n {
        let w = lo + i as f64 * step;
        let p1 = PhotonWavepacket::new(w, sigma, Port::One)?;
        let p2 = PhotonWavepacket::new(w, sigma, Port::Two)?;
        let grid = FrequencyGrid::for_packets(&[p1, p2], 0.0)?;
        let v = g2(resp, &p1, &p2, 0.0, &grid)?;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((w, v));
        }
    }
    Ok(best.expect("n >= 2"))
}
