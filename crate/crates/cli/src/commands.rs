use log::info;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cqed::cavity_em::{mode_list, CavityMode, Family, ModeIndex};
use cqed::hom::{balanced_center_frequency, g2, FrequencyGrid, PhotonWavepacket, Port};
use cqed::perturbation::perturbed_frequency_tip;
use cqed::port_io::{port_coupling, ScatteringResponse};
use cqed::sweep::{
    fundamental_frequency, quadrant_grid, reliable_mean, resolve_analytic_modes, DispersiveSetup, PointResult,
    ResolvedMode,
};
use cqed::system_hamiltonian::{DispersiveReport, Flagged};

use crate::config::{mhz_to_omega, to_ff, to_ghz, to_mm, to_nh, LoadedConfig, GHZ};
use crate::error::CliError;
use crate::external;
use crate::output::{num, opt_num, Artifact, Table};

/// Artifacts of a command and where its mode data came from.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub mode_source: String,
}

const ANALYTIC: &str = "analytic";

struct Modes {
    resolved: Vec<ResolvedMode>,
    source: String,
}

fn external_source(path: &std::path::Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(format!("external:{} sha256={}", path.display(), hex::encode(Sha256::digest(&bytes))))
}

/// Port couplings of `mode` to the first two probes at resonance `omega`.
fn port_couplings(lc: &LoadedConfig, mode: &CavityMode, omega: f64) -> Result<[f64; 2], CliError> {
    let cfg = &lc.config;
    let mut g = [0.0; 2];
    for (i, (slot, p)) in g.iter_mut().zip(cfg.probes()?).enumerate() {
        *slot = port_coupling(mode, &p, i + 1, omega, cfg.modes.port_n_rho, cfg.modes.port_n_phi)?.g;
    }
    Ok(g)
}

fn resolve_modes(lc: &LoadedConfig, labels: &[String]) -> Result<Modes, CliError> {
    let cfg = &lc.config;
    if let Some(path) = lc.external_path() {
        let records = external::ingest(&path, cfg.qubits.len())?;
        let chosen = external::select(&records, labels)?;
        return Ok(Modes { resolved: chosen.iter().map(|r| r.resolved()).collect(), source: external_source(&path)? });
    }
    let geom = cfg.geometry()?;
    let indices = labels
        .iter()
        .map(|l| l.parse::<ModeIndex>().map_err(|e| CliError::Config(format!("mode '{l}': {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let dipoles = (0..cfg.qubits.len()).map(|i| Ok(cfg.qubit_spec(i)?.dipole)).collect::<Result<Vec<_>, CliError>>()?;
    let mut resolved = resolve_analytic_modes(&geom, &cfg.probes()?, &indices, &dipoles, cfg.modes.frequency.into())?;
    for (r, &idx) in resolved.iter_mut().zip(&indices) {
        r.g_ports = port_couplings(lc, &CavityMode::new(idx, &geom)?, r.omega)?;
    }
    Ok(Modes { resolved, source: ANALYTIC.into() })
}

pub fn modes(lc: &LoadedConfig) -> Result<Outcome, CliError> {
    let cfg = &lc.config;
    let geom = cfg.geometry()?;
    let probes = cfg.probes()?;
    let mut table = Table::new(["family", "m", "n", "p", "f_unperturbed_GHz", "f_perturbed_GHz"]);
    for mode in mode_list(&geom, cfg.modes.f_max_ghz * GHZ) {
        let shifted = perturbed_frequency_tip(&mode, &probes)?.omega_perturbed;
        let i = mode.index;
        let family = match i.family {
            Family::TE => "TE",
            Family::TM => "TM",
        };
        table.push(vec![
            family.into(),
            i.m.to_string(),
            i.n.to_string(),
            i.p.to_string(),
            num(to_ghz(mode.omega)),
            num(to_ghz(shifted)),
        ]);
    }
    info!("{} modes below {} GHz", table.rows.len(), cfg.modes.f_max_ghz);
    let mut artifacts = vec![Artifact::csv("modes.csv", table)];
    if !cfg.modes.select.is_empty() {
        // the selected analytic modes in the external-mode format
        let analytic = LoadedConfig { config: without_external(cfg), ..lc.clone() };
        let m = resolve_modes(&analytic, &cfg.modes.select)?;
        artifacts.push(Artifact::csv("external_modes.csv", external::export(&m.resolved)));
    }
    Ok(Outcome { artifacts, mode_source: ANALYTIC.into() })
}

fn without_external(cfg: &crate::config::ExperimentConfig) -> crate::config::ExperimentConfig {
    let mut c = cfg.clone();
    c.modes.external = None;
    c
}

pub fn hom(lc: &LoadedConfig) -> Result<Outcome, CliError> {
    let cfg = &lc.config;
    let h = cfg.hom()?;
    let modes = resolve_modes(lc, std::slice::from_ref(&h.mode))?;
    let mode = &modes.resolved[0];
    let [g1, g2v] = mode.g_ports;
    let resp = ScatteringResponse::new(mode.omega, g1, g2v)?;
    let carrier = |detuning: Option<f64>| match detuning {
        Some(d) => Ok(resp.omega0 + mhz_to_omega(d)),
        None => balanced_center_frequency(&resp),
    };
    let (s1, s2) = h.sigmas();
    let p1 = PhotonWavepacket::new(carrier(h.detuning1_mhz)?, s1, Port::One)?;
    let p2 = PhotonWavepacket::new(carrier(h.detuning2_mhz)?, s2, Port::Two)?;
    let taus = h.taus();
    let max_tau = taus.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let mut grid = FrequencyGrid::for_packets(&[p1, p2], max_tau)?;
    if let Some(n) = h.n_bins {
        grid = FrequencyGrid::new(grid.omega_min, grid.omega_max, n)?;
    }

    let values: Vec<Option<f64>> = taus
        .par_iter()
        .map(|&tau| match g2(&resp, &p1, &p2, tau, &grid) {
            Ok(v) => Ok(Some(v)),
            Err(cqed::Error::UndefinedCorrelation(msg)) => {
                log::warn!("g2 undefined at tau = {tau:e} s: {msg}");
                Ok(None)
            }
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(["tau_s", "g2"]);
    for (t, v) in taus.iter().zip(&values) {
        table.push(vec![num(*t), opt_num(*v)]);
    }
    let min = values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let sidecar = json!({
        "mode": mode.label,
        "f0_GHz": to_ghz(resp.omega0),
        "g1": g1,
        "g2": g2v,
        "half_width_MHz": resp.half_width() / mhz_to_omega(1.0),
        "carrier1_GHz": to_ghz(p1.omega_in),
        "carrier2_GHz": to_ghz(p2.omega_in),
        "sigma1_us": h.sigma1_us,
        "sigma2_us": h.sigma2_us,
        "n_bins": grid.n_bins,
        "omega_min_GHz": to_ghz(grid.omega_min),
        "omega_max_GHz": to_ghz(grid.omega_max),
        "g2_min": min.is_finite().then_some(min),
        "n_undefined": values.iter().filter(|v| v.is_none()).count(),
    });
    Ok(Outcome {
        artifacts: vec![Artifact::csv("hom.csv", table), Artifact::json("hom.json", sidecar)],
        mode_source: modes.source,
    })
}

fn flagged_ghz(f: &Flagged) -> f64 {
    to_ghz(f.value)
}

fn report_flags(r: &DispersiveReport) -> Vec<Value> {
    let mut out = Vec::new();
    let mut add = |name: &str, f: Option<&Flagged>| {
        for (label, overlap) in f.map(|f| f.unreliable.as_slice()).unwrap_or_default() {
            out.push(json!({ "quantity": name, "state": label, "overlap": overlap }));
        }
    };
    add("omega01", Some(&r.omega01));
    add("alpha", r.alpha.as_ref());
    add("omega_k", Some(&r.omega_k));
    add("chi", Some(&r.chi));
    add("zeta", r.zeta.as_ref());
    out
}

fn point_json(p: &PointResult) -> Value {
    let r = &p.report;
    let flags = report_flags(r);
    json!({
        "omega01_GHz": flagged_ghz(&r.omega01),
        "alpha_GHz": r.alpha.as_ref().map(flagged_ghz),
        "omega_k_GHz": flagged_ghz(&r.omega_k),
        "chi_GHz": flagged_ghz(&r.chi),
        "zeta_GHz": r.zeta.as_ref().map(flagged_ghz),
        "c_ant_fF": p.c_ant.iter().map(|&c| to_ff(c)).collect::<Vec<_>>(),
        "bare_omega01_GHz": p.qubit_omega01_bare.iter().map(|&w| to_ghz(w)).collect::<Vec<_>>(),
        "min_overlap": p.min_overlap,
        "flagged": !flags.is_empty(),
        "flags": flags,
    })
}

fn point_columns(p: &PointResult) -> Vec<String> {
    let r = &p.report;
    vec![
        num(flagged_ghz(&r.omega01)),
        opt_num(r.alpha.as_ref().map(flagged_ghz)),
        num(flagged_ghz(&r.omega_k)),
        num(flagged_ghz(&r.chi)),
        opt_num(r.zeta.as_ref().map(flagged_ghz)),
        num(p.min_overlap),
        u8::from(!report_flags(r).is_empty()).to_string(),
    ]
}

const POINT_HEADER: [&str; 7] =
    ["omega01_GHz", "alpha_GHz", "omega_k_GHz", "chi_GHz", "zeta_GHz", "min_overlap", "flagged"];

fn is_reliable(p: &PointResult) -> bool {
    report_flags(&p.report).is_empty()
}

pub fn dispersive(lc: &LoadedConfig) -> Result<Outcome, CliError> {
    let cfg = &lc.config;
    let d = cfg.dispersive()?;
    let sel = cfg.selection()?;
    let geom = cfg.geometry()?;
    let probes = cfg.probes()?;

    if let Some(ps) = &d.position_sweep {
        if lc.external_path().is_some() {
            return Err(CliError::Config(
                "dispersive.position_sweep needs analytic modes; external data holds fields at fixed sites only".into(),
            ));
        }
        let scene = cfg.scene()?;
        let grid = quadrant_grid(&geom, ps.nx, ps.nz, ps.margin(), ps.placement())?;
        let results: Vec<PointResult> = grid
            .par_iter()
            .map(|pos| scene.with_qubit_at(sel.qubit, *pos).setup()?.evaluate(sel))
            .collect::<Result<_, cqed::Error>>()?;
        let mut header = vec!["x_mm", "y_mm", "z_mm"];
        header.extend(POINT_HEADER);
        let mut table = Table::new(header);
        for (pos, p) in grid.iter().zip(&results) {
            let mut row: Vec<String> = pos.iter().map(|&c| num(to_mm(c))).collect();
            row.extend(point_columns(p));
            table.push(row);
        }
        let (mean, skipped) = reliable_mean(results.iter().map(|p| is_reliable(p).then_some(p.report.chi.value)));
        let summary = json!({
            "study": "position_sweep",
            "qubit": sel.qubit,
            "cavity_mode": cfg.modes.select[sel.cavity_mode],
            "nx": ps.nx,
            "nz": ps.nz,
            "margin_mm": ps.margin_mm,
            "chi_mean_GHz": mean.map(to_ghz),
            "n_points": results.len(),
            "n_flagged": skipped,
            "points": grid.iter().zip(&results).map(|(pos, p)| {
                let mut v = point_json(p);
                v["position_mm"] = json!(pos.iter().map(|&c| to_mm(c)).collect::<Vec<_>>());
                v
            }).collect::<Vec<_>>(),
        });
        return Ok(Outcome {
            artifacts: vec![Artifact::csv("dispersive_sweep.csv", table), Artifact::json("dispersive.json", summary)],
            mode_source: ANALYTIC.into(),
        });
    }

    let modes = resolve_modes(lc, &cfg.modes.select)?;
    let setup = DispersiveSetup {
        modes: modes.resolved,
        qubits: (0..cfg.qubits.len()).map(|i| cfg.qubit_spec(i)).collect::<Result<_, _>>()?,
        m: d.m,
        threshold: d.label_threshold,
        omega_cap: fundamental_frequency(&geom, &probes, d.capacitance_frequency.into())?,
    };

    if let Some(s) = &d.inductance_sweep {
        let l_js = s.inductances();
        let results: Vec<PointResult> = l_js
            .par_iter()
            .map(|&l| {
                let mut local = setup.clone();
                local.qubits[s.qubit].l_j = l;
                local.evaluate(sel)
            })
            .collect::<Result<_, cqed::Error>>()?;
        let mut header = vec!["l_j_nH", "swept_bare_omega01_GHz"];
        header.extend(POINT_HEADER);
        let mut table = Table::new(header);
        for (l, p) in l_js.iter().zip(&results) {
            let mut row = vec![num(to_nh(*l)), num(to_ghz(p.qubit_omega01_bare[s.qubit]))];
            row.extend(point_columns(p));
            table.push(row);
        }
        let summary = json!({
            "study": "inductance_sweep",
            "swept_qubit": s.qubit,
            "qubit": sel.qubit,
            "other_qubit": sel.other_qubit,
            "cavity_mode": cfg.modes.select[sel.cavity_mode],
            "n_points": results.len(),
            "n_flagged": results.iter().filter(|p| !is_reliable(p)).count(),
            "points": l_js.iter().zip(&results).map(|(l, p)| {
                let mut v = point_json(p);
                v["l_j_nH"] = json!(to_nh(*l));
                v
            }).collect::<Vec<_>>(),
        });
        return Ok(Outcome {
            artifacts: vec![Artifact::csv("dispersive_sweep.csv", table), Artifact::json("dispersive.json", summary)],
            mode_source: modes.source,
        });
    }

    let point = setup.evaluate(sel)?;
    let body = json!({
        "study": "single_point",
        "qubit": sel.qubit,
        "other_qubit": sel.other_qubit,
        "cavity_mode": cfg.modes.select[sel.cavity_mode],
        "modes": setup.modes.iter().map(|m| json!({
            "label": m.label,
            "f_GHz": to_ghz(m.omega),
            "g_port1": m.g_ports[0],
            "g_port2": m.g_ports[1],
        })).collect::<Vec<_>>(),
        "point": point_json(&point),
    });
    Ok(Outcome { artifacts: vec![Artifact::json("dispersive.json", body)], mode_source: modes.source })
}

pub fn ingest_check(lc: &LoadedConfig, file: Option<&std::path::Path>) -> Result<Outcome, CliError> {
    let cfg = &lc.config;
    let path = match file {
        Some(p) => p.to_path_buf(),
        None => lc
            .external_path()
            .ok_or_else(|| CliError::Config("modes.external is not set and no file was given".into()))?,
    };
    let records = external::ingest(&path, cfg.qubits.len())?;
    if !cfg.modes.select.is_empty() {
        external::select(&records, &cfg.modes.select)?;
    }
    let body = json!({
        "file": path.display().to_string(),
        "n_sites": cfg.qubits.len(),
        "records": records.iter().map(|r| json!({
            "label": r.label,
            "f_GHz": r.f_ghz,
            "selected": cfg.modes.select.contains(&r.label),
        })).collect::<Vec<_>>(),
    });
    println!("{}: {} valid records for {} qubit sites", path.display(), records.len(), cfg.qubits.len());
    Ok(Outcome { artifacts: vec![Artifact::json("ingest_check.json", body)], mode_source: external_source(&path)? })
}
