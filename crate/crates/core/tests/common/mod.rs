#![allow(dead_code)]

use std::collections::BTreeMap;

use cqed::cavity_em::{CavityGeometry, CoaxProbe, Wall};
use cqed::hom::{spectral_weights, CorrelationTerms, FrequencyGrid, PhotonWavepacket};
use cqed::port_io::ScatteringResponse;
use cqed::transmon::DipoleSpec;
use cqed::{Complex64, Vector3};

pub fn reference_geometry() -> CavityGeometry {
    CavityGeometry::new(22.86e-3, 10.16e-3, 40e-3).unwrap()
}

/// Probes on opposite broad walls, a quarter length from each end.
pub fn reference_probes(h: f64) -> [CoaxProbe; 2] {
    let g = reference_geometry();
    [
        CoaxProbe { x0: g.a / 2.0, z0: 10e-3, wall: Wall::Top, r_inner: 0.05e-3, r_outer: 2.5e-3, h },
        CoaxProbe { x0: g.a / 2.0, z0: 30e-3, wall: Wall::Bottom, r_inner: 0.05e-3, r_outer: 2.5e-3, h },
    ]
}

pub fn reference_dipole(center: Vector3<f64>) -> DipoleSpec {
    DipoleSpec { length: 1e-3, radius: 0.04e-3, gap: 0.102e-3, center, orientation: Vector3::y() }
}

/// Fock state over `2 n_bins` single-frequency modes: port 1 modes `0..n`, port 2 `n..2n`.
type Ket = Vec<u8>;

#[derive(Clone, Debug, Default)]
struct State(BTreeMap<Ket, Complex64>);

impl State {
    fn vacuum(n_modes: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert(vec![0; n_modes], Complex64::new(1.0, 0.0));
        State(m)
    }

    fn add(&mut self, ket: Ket, amp: Complex64) {
        *self.0.entry(ket).or_insert(Complex64::new(0.0, 0.0)) += amp;
    }

    /// Apply `Σ_i c_i a_i†`.
    fn create(&self, coeffs: &[(usize, Complex64)]) -> State {
        let mut out = State::default();
        for (ket, amp) in &self.0 {
            for &(i, c) in coeffs {
                let mut k = ket.clone();
                let n = k[i] as f64;
                k[i] += 1;
                out.add(k, amp * c * (n + 1.0).sqrt());
            }
        }
        out
    }

    /// Apply `Σ_i c_i a_i`.
    fn annihilate(&self, coeffs: &[(usize, Complex64)]) -> State {
        let mut out = State::default();
        for (ket, amp) in &self.0 {
            for &(i, c) in coeffs {
                if ket[i] == 0 {
                    continue;
                }
                let mut k = ket.clone();
                let n = k[i] as f64;
                k[i] -= 1;
                out.add(k, amp * c * n.sqrt());
            }
        }
        out
    }

    fn norm_sqr(&self) -> f64 {
        self.0.values().map(|a| a.norm_sqr()).sum()
    }
}

/// A, B, C by building the two-photon input state explicitly and applying the output field
/// operators mode by mode with bosonic ladder rules.
pub fn brute_force_terms(
    resp: &ScatteringResponse,
    pkt1: &PhotonWavepacket,
    pkt2: &PhotonWavepacket,
    tau: f64,
    t0: f64,
    grid: &FrequencyGrid,
) -> CorrelationTerms {
    let n = grid.n_bins;
    let w1 = spectral_weights(pkt1, grid, t0).unwrap().values;
    let w2 = spectral_weights(pkt2, grid, t0 + tau).unwrap().values;
    let psi = State::vacuum(2 * n)
        .create(&w1.iter().enumerate().map(|(m, &w)| (m, w)).collect::<Vec<_>>())
        .create(&w2.iter().enumerate().map(|(m, &w)| (n + m, w)).collect::<Vec<_>>());

    // E_1^(+)(t) ∝ Σ_m e^{-iω_m t} (R1 a_{1,m} + T12 a_{2,m}), E_2^(+) with T21, R2.
    let field = |port: usize, t: f64| -> Vec<(usize, Complex64)> {
        let mut c = Vec::with_capacity(2 * n);
        for m in 0..n {
            let w = grid.omega(m);
            let s = resp.transfer(w);
            let ph = Complex64::from_polar(1.0, -w * t);
            let (from1, from2) = if port == 1 { (s[(0, 0)], s[(0, 1)]) } else { (s[(1, 0)], s[(1, 1)]) };
            c.push((m, from1 * ph));
            c.push((n + m, from2 * ph));
        }
        c
    };
    let e1 = field(1, t0);
    let e2 = field(2, t0 + tau);
    CorrelationTerms {
        a: psi.annihilate(&e1).annihilate(&e2).norm_sqr(),
        b: psi.annihilate(&e1).norm_sqr(),
        c: psi.annihilate(&e2).norm_sqr(),
    }
}
