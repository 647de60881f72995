//! Experiment drivers: resolving cavity modes (analytic or externally supplied), single
//! dispersive-parameter evaluations, position grids and inductance sweeps.

use nalgebra::Vector3;

use crate::cavity_em::{CavityGeometry, CavityMode, CoaxProbe, ModeIndex};
use crate::perturbation::perturbed_frequency_tip;
use crate::port_io::{port_coupling, DEFAULT_N_PHI, DEFAULT_N_RHO};
use crate::system_hamiltonian::{
    assemble_hamiltonian, coupling_from_voltage, dispersive_report, dressed_spectrum, receiving_voltage,
    receiving_voltage_from_field, CouplingMatrix, DispersiveReport, QubitInstance, Selection, SystemBasis,
};
use crate::transmon::{dipole_capacitance, DipoleSpec, TransmonParams};
use crate::{Error, Result};

/// Cavity mode data as used by the system model, whatever its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMode {
    pub label: String,
    /// Resonance used in the Hamiltonian (rad/s).
    pub omega: f64,
    /// Normalised E field at each qubit site (m^-3/2).
    pub e_at_sites: Vec<Vector3<f64>>,
    /// Overlap couplings to ports 1 and 2, (rad/s)^(1/2).
    pub g_ports: [f64; 2],
}

/// Whether resonances are shifted by the probes before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyChoice {
    #[default]
    Perturbed,
    Unperturbed,
}

/// Analytic modes `indices` with tip-sampled perturbed resonances, fields at `dipoles`' centres
/// and couplings to the first two probes (zero where a probe is missing).
pub fn resolve_analytic_modes(
    geom: &CavityGeometry,
    probes: &[CoaxProbe],
    indices: &[ModeIndex],
    dipoles: &[DipoleSpec],
    choice: FrequencyChoice,
) -> Result<Vec<ResolvedMode>> {
    indices
        .iter()
        .map(|&idx| {
            let mode = CavityMode::new(idx, geom)?;
            let omega = match choice {
                FrequencyChoice::Perturbed => perturbed_frequency_tip(&mode, probes)?.omega_perturbed,
                FrequencyChoice::Unperturbed => mode.omega,
            };
            let mut e_at_sites = Vec::with_capacity(dipoles.len());
            for d in dipoles {
                // validates placement and warns on strong field variation along the wire
                receiving_voltage(&mode, d)?;
                e_at_sites.push(mode.fields(&d.center)?.0);
            }
            let mut g_ports = [0.0; 2];
            for (slot, p) in g_ports.iter_mut().zip(probes) {
                *slot = port_coupling(&mode, p, 0, omega, DEFAULT_N_RHO, DEFAULT_N_PHI)?.g;
            }
            Ok(ResolvedMode { label: idx.to_string(), omega, e_at_sites, g_ports })
        })
        .collect()
}

/// A transmon as configured, before its capacitance is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    pub dipole: DipoleSpec,
    pub c_l: f64,
    pub l_j: f64,
    /// Replaces the dipole-formula capacitance.
    pub c_ant_override: Option<f64>,
}

impl QubitSpec {
    pub fn params(&self, omega_cap: f64) -> Result<TransmonParams> {
        let c_ant = match self.c_ant_override {
            Some(c) => c,
            None => dipole_capacitance(&self.dipole, omega_cap)?,
        };
        TransmonParams::new(c_ant, self.c_l, self.l_j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveSetup {
    pub modes: Vec<ResolvedMode>,
    pub qubits: Vec<QubitSpec>,
    /// States per mode.
    pub m: usize,
    pub threshold: f64,
    /// Frequency at which the dipole capacitance is evaluated (rad/s).
    pub omega_cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub report: DispersiveReport,
    pub c_ant: Vec<f64>,
    pub qubit_omega01_bare: Vec<f64>,
    /// Smallest label overlap among the states used.
    pub min_overlap: f64,
}

impl DispersiveSetup {
    pub fn evaluate(&self, sel: Selection) -> Result<PointResult> {
        if self.modes.is_empty() || self.qubits.is_empty() {
            return Err(Error::domain("need at least one qubit and one cavity mode"));
        }
        if let Some(m) = self.modes.iter().find(|m| m.e_at_sites.len() != self.qubits.len()) {
            return Err(Error::domain(format!(
                "mode {} carries {} field samples for {} qubits",
                m.label,
                m.e_at_sites.len(),
                self.qubits.len()
            )));
        }
        let n_levels = self.m.max(3);
        let qubits: Vec<QubitInstance> = self
            .qubits
            .iter()
            .map(|q| QubitInstance::new(q.dipole, q.params(self.omega_cap)?, n_levels))
            .collect::<Result<_>>()?;
        let basis = SystemBasis::new(qubits.len(), self.modes.len(), self.m)?;
        let mut g = CouplingMatrix::zeros(self.modes.len(), qubits.len(), self.m - 1);
        for (k, mode) in self.modes.iter().enumerate() {
            for (q, qubit) in qubits.iter().enumerate() {
                let v = receiving_voltage_from_field(&mode.e_at_sites[q], &qubit.dipole);
                for j in 0..self.m - 1 {
                    g.g[k][q][j] = coupling_from_voltage(mode.omega, v, qubit, j)?;
                }
            }
        }
        let levels: Vec<Vec<f64>> = qubits.iter().map(|q| q.spectrum.omega.clone()).collect();
        let freqs: Vec<f64> = self.modes.iter().map(|m| m.omega).collect();
        let h = assemble_hamiltonian(&basis, &levels, &freqs, &g)?;
        let spec = dressed_spectrum(&h, &basis, self.threshold)?;
        let report = dispersive_report(&spec, sel)?;

        let k = basis.n_qubits + sel.cavity_mode;
        let mut used = vec![
            basis.excited(&[]),
            basis.excited(&[(sel.qubit, 1)]),
            basis.excited(&[(k, 1)]),
            basis.excited(&[(sel.qubit, 1), (k, 1)]),
        ];
        if self.m >= 3 {
            used.push(basis.excited(&[(sel.qubit, 2)]));
        }
        if let Some(o) = sel.other_qubit {
            used.push(basis.excited(&[(o, 1)]));
            used.push(basis.excited(&[(sel.qubit, 1), (o, 1)]));
        }
        let min_overlap = used.iter().map(|l| spec.get(l).expect("label in basis").overlap).fold(1.0, f64::min);
        Ok(PointResult {
            report,
            c_ant: qubits.iter().map(|q| q.params.c_ant).collect(),
            qubit_omega01_bare: qubits.iter().map(|q| q.spectrum.omega01()).collect(),
            min_overlap,
        })
    }
}

/// Lowest resonance of the cavity, from TE101, TE011 and TM110 (rad/s).
pub fn fundamental_frequency(geom: &CavityGeometry, probes: &[CoaxProbe], choice: FrequencyChoice) -> Result<f64> {
    let mode = [ModeIndex::te(1, 0, 1), ModeIndex::te(0, 1, 1), ModeIndex::tm(1, 1, 0)]
        .into_iter()
        .map(|i| CavityMode::new(i, geom))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.omega.total_cmp(&b.omega))
        .expect("three candidates");
    match choice {
        FrequencyChoice::Perturbed => Ok(perturbed_frequency_tip(&mode, probes)?.omega_perturbed),
        FrequencyChoice::Unperturbed => Ok(mode.omega),
    }
}

/// Qubits in an analytic cavity; resolves to a [`DispersiveSetup`] for given qubit positions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticScene {
    pub geometry: CavityGeometry,
    pub probes: Vec<CoaxProbe>,
    pub modes: Vec<ModeIndex>,
    pub qubits: Vec<QubitSpec>,
    pub m: usize,
    pub threshold: f64,
    /// Resonances entering the Hamiltonian.
    pub mode_frequency: FrequencyChoice,
    /// Fundamental used for the dipole capacitance.
    pub capacitance_frequency: FrequencyChoice,
}

impl AnalyticScene {
    pub fn setup(&self) -> Result<DispersiveSetup> {
        let dipoles: Vec<DipoleSpec> = self.qubits.iter().map(|q| q.dipole).collect();
        Ok(DispersiveSetup {
            modes: resolve_analytic_modes(&self.geometry, &self.probes, &self.modes, &dipoles, self.mode_frequency)?,
            qubits: self.qubits.clone(),
            m: self.m,
            threshold: self.threshold,
            omega_cap: fundamental_frequency(&self.geometry, &self.probes, self.capacitance_frequency)?,
        })
    }

    /// The same scene with qubit `q` moved to `center`.
    pub fn with_qubit_at(&self, q: usize, center: Vector3<f64>) -> Self {
        let mut s = self.clone();
        s.qubits[q].dipole.center = center;
        s
    }

    /// The same scene with qubit `q` given junction inductance `l_j`.
    pub fn with_inductance(&self, q: usize, l_j: f64) -> Self {
        let mut s = self.clone();
        s.qubits[q].l_j = l_j;
        s
    }
}

/// Evaluates `setup` with qubit `swept` stepped through `l_js`.
pub fn inductance_sweep(
    setup: &DispersiveSetup,
    swept: usize,
    l_js: &[f64],
    sel: Selection,
) -> Vec<Result<PointResult>> {
    l_js.iter()
        .map(|&l| {
            let mut s = setup.clone();
            s.qubits[swept].l_j = l;
            s.evaluate(sel)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridPlacement {
    /// Points at the centres of equal cells.
    #[default]
    CellCentred,
    /// Points including both ends of each axis.
    Endpoints,
}

/// Positions over one quadrant of the mid-height cross-section, `x ∈ [margin, a/2]`,
/// `z ∈ [margin, d/2]`, `y = b/2`, ordered with `z` fastest.
pub fn quadrant_grid(
    geom: &CavityGeometry,
    nx: usize,
    nz: usize,
    margin: f64,
    placement: GridPlacement,
) -> Result<Vec<Vector3<f64>>> {
    if nx == 0 || nz == 0 {
        return Err(Error::domain("grid needs at least one point per axis"));
    }
    if !(margin >= 0.0 && margin < geom.a / 2.0 && margin < geom.d / 2.0) {
        return Err(Error::domain(format!("wall margin {margin} leaves no quadrant")));
    }
    let axis = |hi: f64, n: usize| -> Vec<f64> {
        let span = hi - margin;
        match placement {
            GridPlacement::CellCentred => (0..n).map(|i| margin + (i as f64 + 0.5) * span / n as f64).collect(),
            GridPlacement::Endpoints if n == 1 => vec![margin + 0.5 * span],
            GridPlacement::Endpoints => (0..n).map(|i| margin + i as f64 * span / (n - 1) as f64).collect(),
        }
    };
    let xs = axis(geom.a / 2.0, nx);
    let zs = axis(geom.d / 2.0, nz);
    Ok(xs.iter().flat_map(|&x| zs.iter().map(move |&z| Vector3::new(x, geom.b / 2.0, z))).collect())
}

/// Mean of the reliable values, with the number of points excluded.
pub fn reliable_mean(values: impl IntoIterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (mut sum, mut n, mut skipped) = (0.0, 0usize, 0usize);
    for v in values {
        match v {
            Some(x) => {
                sum += x;
                n += 1;
            }
            None => skipped += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), skipped)
}

/// `n` inductances linearly spaced from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect(),
    }
}
