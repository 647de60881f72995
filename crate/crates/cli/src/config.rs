//! Experiment configuration: a TOML document with explicit units in every key name.
//!
//! Lengths are mm, frequencies GHz, times µs, capacitances fF and inductances nH. Values are
//! converted to SI in [`ExperimentConfig::scene`] and friends, nowhere else.

use std::path::{Path, PathBuf};

use cqed::cavity_em::{CavityGeometry, CoaxProbe, ModeIndex, Wall};
use cqed::sweep::{AnalyticScene, FrequencyChoice, GridPlacement, QubitSpec};
use cqed::system_hamiltonian::{Selection, DEFAULT_LABEL_THRESHOLD};
use cqed::transmon::DipoleSpec;
use cqed::Vector3;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

const MM: f64 = 1e-3;
pub const GHZ: f64 = 1e9;
const US: f64 = 1e-6;
const FF: f64 = 1e-15;
const NH: f64 = 1e-9;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub cavity: CavityConfig,
    #[serde(default)]
    pub probes: Vec<ProbeConfig>,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub qubits: Vec<QubitConfig>,
    pub hom: Option<HomConfig>,
    pub dispersive: Option<DispersiveConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub a_mm: f64,
    pub b_mm: f64,
    pub d_mm: f64,
    #[serde(default = "one")]
    pub eps_r: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum WallName {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub x_mm: f64,
    pub z_mm: f64,
    pub wall: WallName,
    pub r_inner_mm: f64,
    pub r_outer_mm: f64,
    pub length_mm: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyName {
    #[default]
    Perturbed,
    Unperturbed,
}

impl From<FrequencyName> for FrequencyChoice {
    fn from(f: FrequencyName) -> Self {
        match f {
            FrequencyName::Perturbed => FrequencyChoice::Perturbed,
            FrequencyName::Unperturbed => FrequencyChoice::Unperturbed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    /// Upper frequency for the `modes` listing.
    #[serde(default = "default_f_max")]
    pub f_max_ghz: f64,
    /// Modes entering the system model, e.g. `["TE101", "TE102"]`.
    #[serde(default)]
    pub select: Vec<String>,
    /// Resonances used in the Hamiltonian and the scattering response.
    #[serde(default)]
    pub frequency: FrequencyName,
    /// Externally computed mode data replacing the analytic modes.
    pub external: Option<PathBuf>,
    #[serde(default = "default_port_nodes")]
    pub port_n_rho: usize,
    #[serde(default = "default_port_nodes")]
    pub port_n_phi: usize,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self {
            f_max_ghz: default_f_max(),
            select: Vec::new(),
            frequency: FrequencyName::default(),
            external: None,
            port_n_rho: default_port_nodes(),
            port_n_phi: default_port_nodes(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub x_mm: f64,
    pub y_mm: f64,
    pub z_mm: f64,
    pub length_mm: f64,
    pub radius_mm: f64,
    pub gap_mm: f64,
    #[serde(default = "default_orientation")]
    pub orientation: [f64; 3],
    pub c_l_ff: f64,
    pub l_j_nh: f64,
    /// Replaces the dipole-formula antenna capacitance.
    pub c_ant_ff: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomConfig {
    /// Mode whose resonance forms the two-port response.
    #[serde(default = "default_hom_mode")]
    pub mode: String,
    pub sigma1_us: f64,
    pub sigma2_us: f64,
    /// Carrier offsets from the resonance; default is the balanced point of each packet.
    pub detuning1_mhz: Option<f64>,
    pub detuning2_mhz: Option<f64>,
    pub tau_max_us: f64,
    pub n_tau: usize,
    /// Frequency bins; default sized from the packets and the delay range.
    pub n_bins: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersiveConfig {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_threshold")]
    pub label_threshold: f64,
    #[serde(default)]
    pub capacitance_frequency: FrequencyName,
    /// Zero-based indices into `qubits` and `modes.select`.
    #[serde(default)]
    pub qubit: usize,
    #[serde(default)]
    pub cavity_mode: usize,
    pub other_qubit: Option<usize>,
    pub position_sweep: Option<PositionSweepConfig>,
    pub inductance_sweep: Option<InductanceSweepConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementName {
    #[default]
    CellCentred,
    Endpoints,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionSweepConfig {
    #[serde(default = "default_grid")]
    pub nx: usize,
    #[serde(default = "default_grid")]
    pub nz: usize,
    #[serde(default)]
    pub margin_mm: f64,
    #[serde(default)]
    pub placement: PlacementName,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductanceSweepConfig {
    pub qubit: usize,
    pub l_j_start_nh: f64,
    pub l_j_end_nh: f64,
    pub points: usize,
}

fn one() -> f64 {
    1.0
}
fn default_f_max() -> f64 {
    10.0
}
fn default_port_nodes() -> usize {
    cqed::port_io::DEFAULT_N_RHO
}
fn default_orientation() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}
fn default_hom_mode() -> String {
    "TE101".into()
}
fn default_m() -> usize {
    3
}
fn default_threshold() -> f64 {
    DEFAULT_LABEL_THRESHOLD
}
fn default_grid() -> usize {
    11
}

/// A validated configuration together with the identity of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// SHA-256 of the canonical (override-applied, key-sorted) document.
    pub hash: String,
    /// Directory that relative paths in the document are resolved against.
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, overrides, base_dir)
    }

    pub fn from_str(text: &str, overrides: &[String], base_dir: PathBuf) -> Result<Self, CliError> {
        let mut doc: toml::Table = text.parse().map_err(|e| CliError::Config(format!("invalid TOML: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let canonical = toml::to_string(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        let config: ExperimentConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        config.validate()?;
        let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
        Ok(Self { config, hash, base_dir })
    }

    pub fn external_path(&self) -> Option<PathBuf> {
        self.config.modes.external.as_ref().map(|p| self.base_dir.join(p))
    }
}

/// `key.path=value`; the value is read as a TOML literal, falling back to a bare string.
/// Numeric segments index arrays of tables, e.g. `qubits.1.l_j_nh=3.0`.
fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let bad = |msg: &str| CliError::Config(format!("override '{spec}': {msg}"));
    let (path, raw) = spec.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad("empty key segment"));
    }
    let (last, parents) = keys.split_last().expect("split yields a segment");
    let mut root = toml::Value::Table(std::mem::take(doc));
    let result = set_path(&mut root, parents, last, value).map_err(bad);
    let toml::Value::Table(t) = root else { unreachable!("root stays a table") };
    *doc = t;
    result
}

fn set_path(root: &mut toml::Value, parents: &[&str], last: &str, value: toml::Value) -> Result<(), &'static str> {
    let mut cur = root;
    for k in parents {
        cur = match cur {
            toml::Value::Table(t) => t.entry(k.to_string()).or_insert_with(|| toml::Value::Table(Default::default())),
            toml::Value::Array(a) => {
                let i: usize = k.parse().map_err(|_| "array segment must be an index")?;
                a.get_mut(i).ok_or("array index out of range")?
            }
            _ => return Err("path passes through a scalar"),
        };
    }
    match cur {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => {
            let i: usize = last.parse().map_err(|_| "array segment must be an index")?;
            *a.get_mut(i).ok_or("array index out of range")? = value;
        }
        _ => return Err("path passes through a scalar"),
    }
    Ok(())
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Every check that does not need a physics computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let geom = self.geometry()?;
        for (i, p) in self.probes()?.iter().enumerate() {
            p.validate(&geom).map_err(|e| invalid(&format!("probes[{i}]"), e))?;
        }
        positive("modes.f_max_ghz", self.modes.f_max_ghz)?;
        if self.modes.port_n_rho < 2 || self.modes.port_n_phi < 4 {
            return Err(invalid("modes.port_n_rho/port_n_phi", "need at least 2 radial and 4 angular nodes"));
        }
        self.mode_indices()?;
        for (i, q) in self.qubits.iter().enumerate() {
            let field = format!("qubits[{i}]");
            let spec = self.qubit_spec(i)?;
            spec.dipole.validate().map_err(|e| invalid(&field, e))?;
            let (p0, p1) = spec.dipole.endpoints();
            if !geom.contains(&p0) || !geom.contains(&p1) {
                return Err(invalid(&field, "dipole does not fit inside the cavity"));
            }
            positive(&format!("{field}.c_l_ff"), q.c_l_ff)?;
            positive(&format!("{field}.l_j_nh"), q.l_j_nh)?;
            if let Some(c) = q.c_ant_ff {
                positive(&format!("{field}.c_ant_ff"), c)?;
            }
        }
        if let Some(h) = &self.hom {
            h.mode.parse::<ModeIndex>().map_err(|e| invalid("hom.mode", e))?;
            positive("hom.sigma1_us", h.sigma1_us)?;
            positive("hom.sigma2_us", h.sigma2_us)?;
            if !(h.tau_max_us >= 0.0 && h.tau_max_us.is_finite()) {
                return Err(invalid("hom.tau_max_us", "must be non-negative"));
            }
            if h.n_tau == 0 {
                return Err(invalid("hom.n_tau", "need at least one delay"));
            }
            if h.n_bins.is_some_and(|n| n < 2) {
                return Err(invalid("hom.n_bins", "need at least two bins"));
            }
        }
        if let Some(d) = &self.dispersive {
            if !(2..=15).contains(&d.m) {
                return Err(invalid("dispersive.m", format!("states per mode must be in 2..=15, got {}", d.m)));
            }
            if !(d.label_threshold > 0.0 && d.label_threshold < 1.0) {
                return Err(invalid("dispersive.label_threshold", "must lie in (0, 1)"));
            }
            let nq = self.qubits.len();
            if d.qubit >= nq {
                return Err(invalid("dispersive.qubit", format!("index {} but {nq} qubits configured", d.qubit)));
            }
            if d.cavity_mode >= self.modes.select.len() {
                return Err(invalid(
                    "dispersive.cavity_mode",
                    format!("index {} but {} modes selected", d.cavity_mode, self.modes.select.len()),
                ));
            }
            if let Some(o) = d.other_qubit {
                if o >= nq || o == d.qubit {
                    return Err(invalid("dispersive.other_qubit", "must name a different configured qubit"));
                }
            }
            if let Some(p) = &d.position_sweep {
                if p.nx == 0 || p.nz == 0 {
                    return Err(invalid("dispersive.position_sweep", "nx and nz must be positive"));
                }
                if !(p.margin_mm >= 0.0 && p.margin_mm < self.cavity.a_mm.min(self.cavity.d_mm) / 2.0) {
                    return Err(invalid("dispersive.position_sweep.margin_mm", "leaves no quadrant"));
                }
            }
            if let Some(s) = &d.inductance_sweep {
                if s.qubit >= nq {
                    return Err(invalid("dispersive.inductance_sweep.qubit", "no such qubit"));
                }
                positive("dispersive.inductance_sweep.l_j_start_nh", s.l_j_start_nh)?;
                positive("dispersive.inductance_sweep.l_j_end_nh", s.l_j_end_nh)?;
                if s.points == 0 {
                    return Err(invalid("dispersive.inductance_sweep.points", "need at least one point"));
                }
            }
            if d.position_sweep.is_some() && d.inductance_sweep.is_some() {
                return Err(invalid("dispersive", "position_sweep and inductance_sweep are exclusive"));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<CavityGeometry, CliError> {
        let c = &self.cavity;
        CavityGeometry::with_permittivity(c.a_mm * MM, c.b_mm * MM, c.d_mm * MM, c.eps_r)
            .map_err(|e| invalid("cavity", e))
    }

    pub fn probes(&self) -> Result<Vec<CoaxProbe>, CliError> {
        Ok(self
            .probes
            .iter()
            .map(|p| CoaxProbe {
                x0: p.x_mm * MM,
                z0: p.z_mm * MM,
                wall: match p.wall {
                    WallName::Top => Wall::Top,
                    WallName::Bottom => Wall::Bottom,
                },
                r_inner: p.r_inner_mm * MM,
                r_outer: p.r_outer_mm * MM,
                h: p.length_mm * MM,
            })
            .collect())
    }

    pub fn mode_indices(&self) -> Result<Vec<ModeIndex>, CliError> {
        self.modes
            .select
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let idx: ModeIndex = s.parse().map_err(|e| invalid(&format!("modes.select[{i}]"), e))?;
                idx.validate().map_err(|e| invalid(&format!("modes.select[{i}]"), e))?;
                Ok(idx)
            })
            .collect()
    }

    pub fn qubit_spec(&self, i: usize) -> Result<QubitSpec, CliError> {
        let q = &self.qubits[i];
        let o = Vector3::from(q.orientation);
        if !(o.norm() > 0.0) {
            return Err(invalid(&format!("qubits[{i}].orientation"), "must be non-zero"));
        }
        Ok(QubitSpec {
            dipole: DipoleSpec {
                length: q.length_mm * MM,
                radius: q.radius_mm * MM,
                gap: q.gap_mm * MM,
                center: Vector3::new(q.x_mm, q.y_mm, q.z_mm) * MM,
                orientation: o.normalize(),
            },
            c_l: q.c_l_ff * FF,
            l_j: q.l_j_nh * NH,
            c_ant_override: q.c_ant_ff.map(|c| c * FF),
        })
    }

    pub fn dispersive(&self) -> Result<&DispersiveConfig, CliError> {
        self.dispersive.as_ref().ok_or_else(|| invalid("dispersive", "section missing"))
    }

    pub fn hom(&self) -> Result<&HomConfig, CliError> {
        self.hom.as_ref().ok_or_else(|| invalid("hom", "section missing"))
    }

    /// The analytic scene for the dispersive study.
    pub fn scene(&self) -> Result<AnalyticScene, CliError> {
        let d = self.dispersive()?;
        Ok(AnalyticScene {
            geometry: self.geometry()?,
            probes: self.probes()?,
            modes: self.mode_indices()?,
            qubits: (0..self.qubits.len()).map(|i| self.qubit_spec(i)).collect::<Result<_, _>>()?,
            m: d.m,
            threshold: d.label_threshold,
            mode_frequency: self.modes.frequency.into(),
            capacitance_frequency: d.capacitance_frequency.into(),
        })
    }

    pub fn selection(&self) -> Result<Selection, CliError> {
        let d = self.dispersive()?;
        Ok(Selection { qubit: d.qubit, cavity_mode: d.cavity_mode, other_qubit: d.other_qubit })
    }
}

impl PositionSweepConfig {
    pub fn margin(&self) -> f64 {
        self.margin_mm * MM
    }

    pub fn placement(&self) -> GridPlacement {
        match self.placement {
            PlacementName::CellCentred => GridPlacement::CellCentred,
            PlacementName::Endpoints => GridPlacement::Endpoints,
        }
    }
}

impl InductanceSweepConfig {
    pub fn inductances(&self) -> Vec<f64> {
        cqed::sweep::linspace(self.l_j_start_nh * NH, self.l_j_end_nh * NH, self.points)
    }
}

impl HomConfig {
    pub fn sigmas(&self) -> (f64, f64) {
        (self.sigma1_us * US, self.sigma2_us * US)
    }

    pub fn taus(&self) -> Vec<f64> {
        let t = self.tau_max_us * US;
        cqed::sweep::linspace(-t, t, self.n_tau)
    }
}

pub fn to_mm(x: f64) -> f64 {
    x / MM
}

pub fn to_nh(x: f64) -> f64 {
    x / NH
}

pub fn to_ff(x: f64) -> f64 {
    x / FF
}

/// Angular frequency (rad/s) to GHz.
pub fn to_ghz(omega: f64) -> f64 {
    omega / (std::f64::consts::TAU * GHZ)
}

/// MHz offset to rad/s.
pub fn mhz_to_omega(mhz: f64) -> f64 {
    std::f64::consts::TAU * mhz * 1e6
}
