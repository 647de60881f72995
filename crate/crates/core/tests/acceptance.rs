//! Acceptance suite: one line per criterion, non-zero exit if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{brute_force_terms, reference_dipole, reference_geometry, reference_probes};
use cqed::cavity_em::{resonant_frequency, ModeIndex};
use cqed::constants::TWO_PI;
use cqed::hom::{balanced_center_frequency, correlation_terms, g2, FrequencyGrid, PhotonWavepacket, Port};
use cqed::port_io::{transfer_functions, ScatteringResponse};
use cqed::sweep::{
    fundamental_frequency, inductance_sweep, linspace, quadrant_grid, reliable_mean, AnalyticScene, FrequencyChoice,
    GridPlacement, QubitSpec,
};
use cqed::system_hamiltonian::{
    assemble_hamiltonian, dressed_spectrum, CouplingMatrix, Selection, SystemBasis, DEFAULT_LABEL_THRESHOLD,
};
use cqed::transmon::{dipole_capacitance, TransmonParams, TransmonSpectrum};
use cqed::{Complex64, Vector3};
use nalgebra::Matrix2;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] {id:>2} {name}: {} ({:.2} s, budget {:.0} s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    pass
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn single_qubit_scene(center: Vector3<f64>, m: usize) -> AnalyticScene {
    AnalyticScene {
        geometry: reference_geometry(),
        probes: reference_probes(0.75e-3).to_vec(),
        modes: vec![ModeIndex::te(1, 0, 1), ModeIndex::te(1, 0, 2)],
        qubits: vec![QubitSpec { dipole: reference_dipole(center), c_l: 50.34e-15, l_j: 9.4e-9, c_ant_override: None }],
        m,
        threshold: DEFAULT_LABEL_THRESHOLD,
        mode_frequency: FrequencyChoice::Perturbed,
        capacitance_frequency: FrequencyChoice::Perturbed,
    }
}

fn mode_frequencies() -> Outcome {
    let g = reference_geometry();
    let f1 = resonant_frequency(ModeIndex::te(1, 0, 1), &g).unwrap() / TWO_PI;
    let f2 = resonant_frequency(ModeIndex::te(1, 0, 2), &g).unwrap() / TWO_PI;
    Outcome {
        pass: rel(f1, 7.55e9) <= 2e-3 && rel(f2, 9.96e9) <= 2e-3,
        detail: format!("TE101 {:.4} GHz, TE102 {:.4} GHz (targets 7.55, 9.96 ±0.2%)", f1 / 1e9, f2 / 1e9),
    }
}

fn capacitance() -> Outcome {
    let g = reference_geometry();
    let w = fundamental_frequency(&g, &reference_probes(0.75e-3), FrequencyChoice::Perturbed).unwrap();
    let c = dipole_capacitance(&reference_dipole(Vector3::new(g.a / 2.0, g.b / 2.0, g.d / 2.0)), w).unwrap();
    Outcome { pass: rel(c, 9.091e-15) <= 0.01, detail: format!("C_ant = {:.4} fF (target 9.091 ±1%)", c * 1e15) }
}

fn transmon_parameters() -> Outcome {
    let g = reference_geometry();
    let w = fundamental_frequency(&g, &reference_probes(0.75e-3), FrequencyChoice::Perturbed).unwrap();
    let c = dipole_capacitance(&reference_dipole(Vector3::new(g.a / 2.0, g.b / 2.0, g.d / 2.0)), w).unwrap();
    let s = TransmonSpectrum::solve(&TransmonParams::new(c, 50.34e-15, 9.4e-9).unwrap(), 4).unwrap();
    let f01 = s.omega01() / TWO_PI;
    let alpha = s.anharmonicity() / TWO_PI;
    Outcome {
        pass: rel(f01, 6.39e9) <= 0.01 && rel(alpha, -371.72e6) <= 0.02,
        detail: format!(
            "omega01/2pi = {:.4} GHz (6.39 ±1%), alpha/2pi = {:.2} MHz (-371.72 ±2%)",
            f01 / 1e9,
            alpha / 1e6
        ),
    }
}

fn averaged_chi() -> Outcome {
    let g = reference_geometry();
    let grid = quadrant_grid(&g, 11, 11, 0.0, GridPlacement::CellCentred).unwrap();
    let base = single_qubit_scene(grid[0], 8);
    let sel = Selection { qubit: 0, cavity_mode: 0, other_qubit: None };
    let chis = grid.iter().map(|&r| {
        let p = base.with_qubit_at(0, r).setup().and_then(|s| s.evaluate(sel)).ok()?;
        p.report.chi.is_reliable().then_some(p.report.chi.value / TWO_PI)
    });
    let (mean, skipped) = reliable_mean(chis);
    let mean = mean.unwrap_or(f64::NAN);
    Outcome {
        pass: rel(mean, -0.028e6) <= 0.15,
        detail: format!("<chi>/2pi = {:.5} MHz over 121 points, {skipped} unreliable (target -0.028 ±15%)", mean / 1e6),
    }
}

fn fock_convergence() -> Outcome {
    let g = reference_geometry();
    let centre = Vector3::new(g.a / 2.0, g.b / 2.0, g.d / 2.0);
    let sel = Selection { qubit: 0, cavity_mode: 0, other_qubit: None };
    let eval = |m| single_qubit_scene(centre, m).setup().unwrap().evaluate(sel).unwrap().report;
    let (lo, hi) = (eval(3), eval(15));
    let (a3, a15) = (lo.alpha.unwrap().value, hi.alpha.unwrap().value);
    let d01 = rel(lo.omega01.value, hi.omega01.value);
    let da = rel(a3, a15);
    Outcome {
        pass: d01 <= 1e-3 && da <= 1e-3,
        detail: format!("M=3 vs M=15: omega01 rel diff {d01:.2e}, alpha rel diff {da:.2e} (limit 1e-3)"),
    }
}

fn unitarity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let g1: f64 = rng.random_range(-3000.0..3000.0);
        let g2: f64 = rng.random_range(-3000.0..3000.0);
        let r = ScatteringResponse::new(TWO_PI * 7.5e9, g1, g2).unwrap();
        let delta = rng.random_range(-20.0..20.0) * r.half_width();
        let s = transfer_functions(&r, r.omega0 + delta).unwrap();
        let err = (s.adjoint() * s - Matrix2::<Complex64>::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    Outcome { pass: worst <= 1e-12, detail: format!("max |S^H S - I| = {worst:.2e} over 10^4 draws (limit 1e-12)") }
}

fn hom_limits() -> Outcome {
    let sigma = 2.5e-6;
    let resp = ScatteringResponse::new(TWO_PI * 7.55e9, 1000.0, -1000.0).unwrap();
    let w = balanced_center_frequency(&resp).unwrap();
    let p1 = PhotonWavepacket::new(w, sigma, Port::One).unwrap();
    let p2 = PhotonWavepacket::new(w, sigma, Port::Two).unwrap();
    let grid = FrequencyGrid::for_packets(&[p1, p2], 10.0 * sigma).unwrap();
    let zero = g2(&resp, &p1, &p2, 0.0, &grid).unwrap();
    let tails = [-10.0 * sigma, 10.0 * sigma].map(|t| g2(&resp, &p1, &p2, t, &grid).unwrap());
    let tail_ok = tails.iter().all(|t| (t - 0.5).abs() <= 1e-2);
    Outcome {
        pass: zero <= 1e-3 && tail_ok,
        detail: format!(
            "g2(0) = {zero:.3e} (<= 1e-3), g2(-10s) = {:.4}, g2(+10s) = {:.4} (target 0.5 ±0.01)",
            tails[0], tails[1]
        ),
    }
}

fn hom_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let g1: f64 = rng.random_range(200.0..2000.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let g2v: f64 = rng.random_range(200.0..2000.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let resp = ScatteringResponse::new(TWO_PI * 7.5e9, g1, g2v).unwrap();
        let sigma1 = rng.random_range(0.3e-6..3e-6);
        let sigma2 = rng.random_range(0.3e-6..3e-6);
        let w1 = resp.omega0 + rng.random_range(-2.0..2.0) * resp.half_width();
        let w2 = resp.omega0 + rng.random_range(-2.0..2.0) * resp.half_width();
        let p1 = PhotonWavepacket::new(w1, sigma1, Port::One).unwrap();
        let p2 = PhotonWavepacket::new(w2, sigma2, Port::Two).unwrap();
        let n_bins = rng.random_range(4..=16);
        let span = 3.0 / sigma1.min(sigma2) + 2.0 * resp.half_width();
        let grid = FrequencyGrid::new(resp.omega0 - span, resp.omega0 + span, n_bins).unwrap();
        let tau = rng.random_range(-3.0..3.0) * sigma1;
        let t0 = rng.random_range(-1e-6..1e-6);
        let fast = correlation_terms(&resp, &p1, &p2, tau, t0, &grid).unwrap();
        let slow = brute_force_terms(&resp, &p1, &p2, tau, t0, &grid);
        let scale = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
        worst = worst.max(scale(fast.a, slow.a)).max(scale(fast.b, slow.b)).max(scale(fast.c, slow.c));
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max termwise rel diff {worst:.2e} over 100 draws (limit 1e-10)") }
}

fn jaynes_cummings() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let basis = SystemBasis::new(1, 1, 2).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let wq = TWO_PI * rng.random_range(4e9..12e9);
        let wc = TWO_PI * rng.random_range(4e9..12e9);
        let gv = Complex64::from_polar(TWO_PI * rng.random_range(1e5..2e8), rng.random_range(0.0..TWO_PI));
        let mut g = CouplingMatrix::zeros(1, 1, 1);
        g.g[0][0][0] = gv;
        let h = assemble_hamiltonian(&basis, &[vec![0.0, wq]], &[wc], &g).unwrap();
        let spec = dressed_spectrum(&h, &basis, DEFAULT_LABEL_THRESHOLD).unwrap();
        let mut got: Vec<f64> = spec.states.iter().map(|s| s.energy).collect();
        got.sort_by(f64::total_cmp);
        let d = wq - wc;
        let root = (d * d + 4.0 * gv.norm_sqr()).sqrt();
        let mut want = vec![0.0, 0.5 * (wq + wc) - 0.5 * root, 0.5 * (wq + wc) + 0.5 * root, wq + wc];
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            let scale = b.abs().max(wq + wc);
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("max rel eigenvalue error {worst:.2e} over 100 draws (limit 1e-10)"),
    }
}

fn zz_sweep() -> Outcome {
    let g = reference_geometry();
    let q = |z: f64, l_j: f64| QubitSpec {
        dipole: reference_dipole(Vector3::new(g.a / 2.0, g.b / 2.0, z)),
        c_l: 50.34e-15,
        l_j,
        c_ant_override: None,
    };
    let scene = AnalyticScene {
        geometry: g,
        probes: reference_probes(0.75e-3).to_vec(),
        modes: vec![ModeIndex::te(1, 0, 1), ModeIndex::te(1, 0, 2), ModeIndex::te(1, 0, 3)],
        qubits: vec![q(10e-3, 3.095e-9), q(30e-3, 3.374e-9)],
        m: 3,
        threshold: DEFAULT_LABEL_THRESHOLD,
        mode_frequency: FrequencyChoice::Perturbed,
        capacitance_frequency: FrequencyChoice::Perturbed,
    };
    let setup = scene.setup().unwrap();
    let sel = Selection { qubit: 1, cavity_mode: 1, other_qubit: Some(0) };
    let points = inductance_sweep(&setup, 1, &linspace(3.374e-9, 2.850e-9, 51), sel);
    let completed = points.iter().filter(|p| p.is_ok()).count();
    let zetas: Vec<(f64, bool)> =
        points.iter().flatten().filter_map(|p| p.report.zeta.as_ref().map(|z| (z.value, z.is_reliable()))).collect();
    let reliable: Vec<f64> = zetas.iter().filter(|z| z.1).map(|z| z.0).collect();
    let sign_change = reliable.windows(2).any(|w| w[0].signum() != w[1].signum());
    let flagged = zetas.iter().filter(|z| !z.1).count();
    let min_overlap = points.iter().flatten().map(|p| p.min_overlap).fold(1.0, f64::min);
    Outcome {
        pass: completed == 51 && sign_change && flagged > 0,
        detail: format!(
            "{completed}/51 points, zeta sign change: {sign_change}, flagged points: {flagged}, min label overlap {min_overlap:.3}"
        ),
    }
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "mode frequencies", s(1), mode_frequencies),
        run(2, "dipole capacitance", s(1), capacitance),
        run(3, "transmon parameters", s(5), transmon_parameters),
        run(4, "position-averaged AC-Stark shift", s(600), averaged_chi),
        run(5, "Fock-truncation convergence", s(300), fock_convergence),
        run(6, "scattering unitarity", s(1), unitarity),
        run(7, "HOM limits", s(120), hom_limits),
        run(8, "HOM brute-force oracle equivalence", s(60), hom_oracle),
        run(9, "Jaynes-Cummings equivalence", s(10), jaynes_cummings),
        run(10, "ZZ sweep shape", s(300), zz_sweep),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
