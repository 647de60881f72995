mod common;

use common::*;
use cqed::cavity_em::{CavityMode, CoaxProbe, ModeIndex, Wall};
use cqed::hom::{correlation_terms, FrequencyGrid, PhotonWavepacket, Port};
use cqed::perturbation::perturbed_frequency_tip;
use cqed::port_io::{port_coupling, ScatteringResponse};
use cqed::system_hamiltonian::{
    assemble_hamiltonian, dispersive_report, dressed_spectrum, CouplingMatrix, Selection, SystemBasis,
};
use cqed::transmon::{TransmonParams, TransmonSpectrum};
use cqed::{Complex64, Vector3};
use proptest::prelude::*;

const TWO_PI: f64 = std::f64::consts::TAU;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scattering_is_unitary_and_reciprocal(
        g1 in -2e3f64..2e3, g2 in -2e3f64..2e3, delta in -1e7f64..1e7,
    ) {
        prop_assume!(g1.abs() > 1.0 || g2.abs() > 1.0);
        let resp = ScatteringResponse::new(TWO_PI * 7.5e9, g1, g2).unwrap();
        let s = resp.transfer_detuned(delta);
        let dev = (s.adjoint() * s - nalgebra::Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12, "S†S - 1 = {dev}");
        prop_assert!((s[(0, 1)] - s[(1, 0)]).norm() < 1e-12);
    }

    #[test]
    fn mode_fields_obey_pec_walls(
        m in 0u32..4, n in 0u32..3, p in 1u32..4, tm in any::<bool>(),
        u in 0.0f64..1.0, v in 0.0f64..1.0,
    ) {
        let idx = if tm { ModeIndex::tm(m.max(1), n.max(1), p - 1) } else { ModeIndex::te(m, n, p) };
        prop_assume!(idx.validate().is_ok());
        let g = reference_geometry();
        let mode = CavityMode::new(idx, &g).unwrap();
        let scale = mode.norm_e;
        // tangential E on x, y and z walls
        for (r, tangential) in [
            (Vector3::new(0.0, u * g.b, v * g.d), [1usize, 2]),
            (Vector3::new(g.a, u * g.b, v * g.d), [1, 2]),
            (Vector3::new(u * g.a, 0.0, v * g.d), [0, 2]),
            (Vector3::new(u * g.a, g.b, v * g.d), [0, 2]),
            (Vector3::new(u * g.a, v * g.b, 0.0), [0, 1]),
            (Vector3::new(u * g.a, v * g.b, g.d), [0, 1]),
        ] {
            let (e, _) = mode.fields(&r).unwrap();
            for c in tangential {
                prop_assert!(e[c].abs() < 1e-12 * scale, "{idx} E[{c}] = {} at {r:?}", e[c]);
            }
        }
    }

    #[test]
    fn opposite_wall_mirror_flips_coupling_for_odd_p(p in 0u32..3, z0 in 6e-3f64..18e-3) {
        let p = 2 * p + 1;
        let g = reference_geometry();
        let mode = CavityMode::new(ModeIndex::te(1, 0, p), &g).unwrap();
        let probe = CoaxProbe { x0: g.a / 2.0, z0, wall: Wall::Top, r_inner: 0.05e-3, r_outer: 2.5e-3, h: 0.75e-3 };
        let mirrored = CoaxProbe { z0: g.d - z0, wall: Wall::Bottom, ..probe };
        let g1 = port_coupling(&mode, &probe, 1, mode.omega, 32, 32).unwrap().g;
        let g2 = port_coupling(&mode, &mirrored, 2, mode.omega, 32, 32).unwrap().g;
        prop_assert!((g1 + g2).abs() <= 1e-10 * g1.abs().max(1.0), "g1 = {g1}, g2 = {g2}");
    }

    #[test]
    fn tip_shift_scales_with_probe_volume(h in 0.2e-3f64..2e-3, k in 1.1f64..3.0) {
        let g = reference_geometry();
        let mode = CavityMode::new(ModeIndex::te(1, 0, 1), &g).unwrap();
        let thin = reference_probes(h);
        let thick = thin.map(|p| CoaxProbe { r_inner: p.r_inner * k, ..p });
        let a = perturbed_frequency_tip(&mode, &thin).unwrap().delta_energy_numerator;
        let b = perturbed_frequency_tip(&mode, &thick).unwrap().delta_energy_numerator;
        prop_assert!((b / a - k * k).abs() < 1e-10 * k * k);
    }

    #[test]
    fn basis_label_round_trips(nq in 1usize..3, nk in 1usize..3, m in 2usize..5, seed in any::<u64>()) {
        let basis = SystemBasis::new(nq, nk, m).unwrap();
        let idx = (seed % basis.dim() as u64) as usize;
        prop_assert_eq!(basis.index(&basis.label(idx)), Some(idx));
    }

    #[test]
    fn transmon_levels_ascend_with_negative_anharmonicity(ratio in 20.0f64..120.0) {
        let c_sigma = 60e-15;
        let e_c = cqed::transmon::charging_energy(c_sigma);
        let l_j = cqed::transmon::josephson_energy(1.0) / (ratio * e_c);
        let params = TransmonParams::new(10e-15, 50e-15, l_j).unwrap();
        let spec = TransmonSpectrum::solve(&params, 4).unwrap();
        prop_assert!(spec.omega.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(spec.anharmonicity() < 0.0);
        prop_assert!(spec.omega[0] == 0.0);
    }
}

fn two_qubit_levels(w1: f64, w2: f64) -> Vec<Vec<f64>> {
    let alpha = -TWO_PI * 0.35e9;
    [w1, w2].iter().map(|&w| vec![0.0, w, 2.0 * w + alpha]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_excitations(
        g_re in -50e6f64..50e6, g_im in -50e6f64..50e6, w2 in 10.5e9f64..12.5e9,
    ) {
        let basis = SystemBasis::new(2, 2, 3).unwrap();
        let mut c = CouplingMatrix::zeros(2, 2, 2);
        for k in 0..2 {
            for q in 0..2 {
                for j in 0..2 {
                    c.g[k][q][j] = Complex64::new(g_re, g_im) * (1.0 + 0.3 * (k + q + j) as f64);
                }
            }
        }
        let h = assemble_hamiltonian(&basis, &two_qubit_levels(TWO_PI * 11.4e9, TWO_PI * w2), &[TWO_PI * 7.5e9, TWO_PI * 9.9e9], &c).unwrap();
        prop_assert!((h.adjoint() - &h).iter().all(|z| z.norm() == 0.0));
        let excitations = |i: usize| basis.label(i).iter().sum::<usize>();
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if h[(i, j)].norm() != 0.0 {
                    prop_assert_eq!(excitations(i), excitations(j));
                }
            }
        }
    }

    #[test]
    fn chi_and_zeta_ignore_coupling_phases(theta1 in 0.0f64..TWO_PI, theta2 in 0.0f64..TWO_PI) {
        let basis = SystemBasis::new(2, 2, 3).unwrap();
        let levels = two_qubit_levels(TWO_PI * 11.4e9, TWO_PI * 11.2e9);
        let freqs = [TWO_PI * 7.5e9, TWO_PI * 9.9e9];
        let build = |phases: [f64; 2]| {
            let mut c = CouplingMatrix::zeros(2, 2, 2);
            for k in 0..2 {
                for (q, &phase) in phases.iter().enumerate() {
                    for j in 0..2 {
                        let mag = TWO_PI * 30e6 * (1.0 + 0.2 * k as f64 - 0.1 * q as f64) * ((j + 1) as f64).sqrt();
                        c.g[k][q][j] = Complex64::from_polar(mag, phase);
                    }
                }
            }
            let h = assemble_hamiltonian(&basis, &levels, &freqs, &c).unwrap();
            let spec = dressed_spectrum(&h, &basis, 0.5).unwrap();
            dispersive_report(&spec, Selection { qubit: 0, cavity_mode: 1, other_qubit: Some(1) }).unwrap()
        };
        let a = build([0.0, 0.0]);
        let b = build([theta1, theta2]);
        prop_assert!((a.chi.value - b.chi.value).abs() <= 1e-6 * a.chi.value.abs());
        let (za, zb) = (a.zeta.unwrap().value, b.zeta.unwrap().value);
        prop_assert!((za - zb).abs() <= 1e-6 * za.abs());
    }
}

fn hom_setup(sigma: f64) -> (ScatteringResponse, PhotonWavepacket, PhotonWavepacket, FrequencyGrid) {
    let resp = ScatteringResponse::new(TWO_PI * 7.5e9, 300.0, -300.0).unwrap();
    let w = resp.omega0 + resp.half_width();
    let p1 = PhotonWavepacket::new(w, sigma, Port::One).unwrap();
    let p2 = PhotonWavepacket::new(w, sigma, Port::Two).unwrap();
    let grid = FrequencyGrid::for_packets(&[p1, p2], 6.0 * sigma).unwrap();
    (resp, p1, p2, grid)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn g2_is_independent_of_reference_time(tau_s in -3.0f64..3.0, t0_s in -50.0f64..50.0) {
        let sigma = 2.5e-6;
        let (resp, p1, p2, grid) = hom_setup(sigma);
        let a = correlation_terms(&resp, &p1, &p2, tau_s * sigma, 0.0, &grid).unwrap().g2().unwrap();
        let b = correlation_terms(&resp, &p1, &p2, tau_s * sigma, t0_s * sigma, &grid).unwrap().g2().unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn g2_is_even_in_delay_for_matched_packets(tau_s in 0.0f64..4.0) {
        let sigma = 2.5e-6;
        let (resp, p1, p2, grid) = hom_setup(sigma);
        let plus = correlation_terms(&resp, &p1, &p2, tau_s * sigma, 0.0, &grid).unwrap().g2().unwrap();
        let minus = correlation_terms(&resp, &p1, &p2, -tau_s * sigma, 0.0, &grid).unwrap().g2().unwrap();
        prop_assert!((plus - minus).abs() < 1e-9, "{plus} vs {minus}");
        prop_assert!((0.0..=1.0 + 1e-9).contains(&plus));
    }
}
