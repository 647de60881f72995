//! Qubit-cavity couplings from the receiving-antenna model, the RWA system Hamiltonian on a
//! truncated Fock/transmon product basis, the labelled dressed spectrum and the dispersive
//! parameters derived from it.
//!
//! Basis ordering: qubits first, then cavity modes, each truncated to `M` states. A bare state
//! `(n_0, …, n_{N−1})` sits at index `Σ n_i M^{N−1−i}`, the ordering of `A_0 ⊗ A_1 ⊗ …`.

use log::warn;
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use crate::cavity_em::CavityMode;
use crate::constants::{EPS0, E_CHARGE, HBAR};
use crate::transmon::{DipoleSpec, TransmonParams, TransmonSpectrum};
use crate::{Error, Result};

pub const DEFAULT_LABEL_THRESHOLD: f64 = 0.5;
/// Allowed field variation along the dipole before a warning.
const FIELD_VARIATION_WARN: f64 = 0.05;

/// A transmon placed in the cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitInstance {
    pub dipole: DipoleSpec,
    pub params: TransmonParams,
    pub spectrum: TransmonSpectrum,
}

impl QubitInstance {
    pub fn new(dipole: DipoleSpec, params: TransmonParams, n_levels: usize) -> Result<Self> {
        dipole.validate()?;
        let spectrum = TransmonSpectrum::solve(&params, n_levels)?;
        Ok(Self { dipole, params, spectrum })
    }

    /// Whether the stored spectrum is what `params` produce.
    pub fn is_consistent(&self) -> bool {
        TransmonSpectrum::solve(&self.params, self.spectrum.n_levels()).is_ok_and(|s| s == self.spectrum)
    }
}

/// `½ (ℓ̂ · E_k(r0)) ℓ` for the normalised mode field (m^-1/2).
pub fn receiving_voltage(mode: &CavityMode, dipole: &DipoleSpec) -> Result<f64> {
    dipole.validate()?;
    let (p, q) = dipole.endpoints();
    let geom = &mode.geometry;
    if !geom.contains(&p) || !geom.contains(&q) {
        return Err(Error::domain(format!("dipole centred at {:?} does not fit inside the cavity", dipole.center)));
    }
    let (e0, _) = mode.fields(&dipole.center)?;
    let proj = |e: Vector3<f64>| dipole.orientation.dot(&e);
    let centre = proj(e0);
    let ends = [proj(mode.fields(&p)?.0), proj(mode.fields(&q)?.0)];
    let scale = centre.abs().max(e0.norm()).max(f64::MIN_POSITIVE);
    let variation = ends.iter().map(|v| (v - centre).abs()).fold(0.0, f64::max) / scale;
    if variation > FIELD_VARIATION_WARN {
        warn!("{}: field varies by {:.1}% along the dipole at {:?}", mode.index, 100.0 * variation, dipole.center);
    }
    Ok(receiving_voltage_from_field(&e0, dipole))
}

/// `½ (ℓ̂ · E) ℓ` for a field sample `E` at the dipole centre.
pub fn receiving_voltage_from_field(e: &Vector3<f64>, dipole: &DipoleSpec) -> f64 {
    0.5 * dipole.orientation.dot(e) * dipole.length
}

/// `∫ f(s) ℓ̂·E(r0 + s ℓ̂) ds` with the triangular current `f(s) = 1 − 2|s|/ℓ`, by the midpoint
/// rule with `n` nodes.
pub fn receiving_voltage_line_integral(mode: &CavityMode, dipole: &DipoleSpec, n: usize) -> Result<f64> {
    dipole.validate()?;
    let half = 0.5 * dipole.length;
    let mut v = 0.0;
    for (s, w) in crate::quadrature::midpoint(-half, half, n.max(1)) {
        let r = dipole.center + dipole.orientation * s;
        let (e, _) = mode.fields(&r)?;
        v += w * (1.0 - s.abs() / half) * dipole.orientation.dot(&e);
    }
    Ok(v)
}

/// Capacitive divider `C_ant/(C_ant + C_L) · V_RX`.
pub fn terminal_voltage(v_rx: f64, c_ant: f64, c_l: f64) -> f64 {
    v_rx * c_ant / (c_ant + c_l)
}

/// `2e ⟨j|n̂|j+1⟩ √(ω_k/(2 eps0 ħ)) V_t` (rad/s) from the mode frequency and the receiving
/// voltage at the qubit.
pub fn coupling_from_voltage(omega_k: f64, v_rx: f64, qubit: &QubitInstance, j: usize) -> Result<Complex64> {
    let n = qubit.spectrum.n_elems.get(j).ok_or_else(|| {
        Error::domain(format!(
            "transition {j}->{} needs {} transmon levels, spectrum has {}",
            j + 1,
            j + 2,
            qubit.spectrum.n_levels()
        ))
    })?;
    let vt = terminal_voltage(v_rx, qubit.params.c_ant, qubit.params.c_l);
    Ok(*n * (2.0 * E_CHARGE * (omega_k / (2.0 * EPS0 * HBAR)).sqrt() * vt))
}

/// `g_{k,j}` for the analytic mode `mode` at the qubit's dipole.
pub fn qubit_cavity_coupling(mode: &CavityMode, omega_k: f64, qubit: &QubitInstance, j: usize) -> Result<Complex64> {
    let v = receiving_voltage(mode, &qubit.dipole)?;
    coupling_from_voltage(omega_k, v, qubit, j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemBasis {
    pub n_qubits: usize,
    pub n_cavity_modes: usize,
    /// States kept per mode.
    pub m: usize,
}

impl SystemBasis {
    pub fn new(n_qubits: usize, n_cavity_modes: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain("need at least two states per mode"));
        }
        if n_qubits + n_cavity_modes == 0 {
            return Err(Error::domain("empty system"));
        }
        let b = Self { n_qubits, n_cavity_modes, m };
        (m as u64)
            .checked_pow(b.n_modes() as u32)
            .filter(|&d| d <= 1 << 16)
            .ok_or_else(|| Error::domain(format!("basis dimension {m}^{} is too large", b.n_modes())))?;
        Ok(b)
    }

    pub fn n_modes(&self) -> usize {
        self.n_qubits + self.n_cavity_modes
    }

    pub fn dim(&self) -> usize {
        self.m.pow(self.n_modes() as u32)
    }

    pub fn index(&self, label: &[usize]) -> Option<usize> {
        if label.len() != self.n_modes() || label.iter().any(|&n| n >= self.m) {
            return None;
        }
        Some(label.iter().fold(0, |acc, &n| acc * self.m + n))
    }

    pub fn label(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_modes()];
        for slot in out.iter_mut().rev() {
            *slot = index % self.m;
            index /= self.m;
        }
        out
    }

    /// Label with a single excitation pattern, e.g. `excited(&[(0, 1), (2, 1)])`.
    pub fn excited(&self, occupations: &[(usize, usize)]) -> Vec<usize> {
        let mut l = vec![0; self.n_modes()];
        for &(slot, n) in occupations {
            l[slot] = n;
        }
        l
    }

    fn stride(&self, slot: usize) -> usize {
        self.m.pow((self.n_modes() - 1 - slot) as u32)
    }
}

/// `g[k][q][j]`: cavity mode `k`, qubit `q`, transition `j → j+1` (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub g: Vec<Vec<Vec<Complex64>>>,
}

impl CouplingMatrix {
    pub fn zeros(n_cavity_modes: usize, n_qubits: usize, n_transitions: usize) -> Self {
        Self { g: vec![vec![vec![Complex64::new(0.0, 0.0); n_transitions]; n_qubits]; n_cavity_modes] }
    }
}

/// Dense `H/ħ` (rad/s):
/// `Σ_k ω_k a†_k a_k + Σ_{q,j} ω_j^{(q)} |j⟩⟨j|_q + Σ_{k,q,j} (g_{k,j}^{(q)} a†_k |j⟩⟨j+1|_q + h.c.)`.
/// `qubit_levels[q]` holds the ground-referenced transmon levels, at least `M` of them.
pub fn assemble_hamiltonian(
    basis: &SystemBasis,
    qubit_levels: &[Vec<f64>],
    cavity_freqs: &[f64],
    couplings: &CouplingMatrix,
) -> Result<DMatrix<Complex64>> {
    let m = basis.m;
    if qubit_levels.len() != basis.n_qubits || cavity_freqs.len() != basis.n_cavity_modes {
        return Err(Error::domain(format!(
            "basis has {} qubits and {} cavity modes, got {} and {}",
            basis.n_qubits,
            basis.n_cavity_modes,
            qubit_levels.len(),
            cavity_freqs.len()
        )));
    }
    if let Some(q) = qubit_levels.iter().position(|l| l.len() < m) {
        return Err(Error::domain(format!("qubit {q} has fewer than M = {m} levels")));
    }
    if couplings.g.len() != basis.n_cavity_modes
        || couplings.g.iter().any(|row| row.len() != basis.n_qubits || row.iter().any(|t| t.len() < m - 1))
    {
        return Err(Error::domain("coupling matrix shape does not match the basis"));
    }

    let dim = basis.dim();
    let nq = basis.n_qubits;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for idx in 0..dim {
        let label = basis.label(idx);
        let e: f64 = qubit_levels.iter().zip(&label).map(|(lv, &n)| lv[n]).sum::<f64>()
            + cavity_freqs.iter().zip(&label[nq..]).map(|(w, &n)| w * n as f64).sum::<f64>();
        h[(idx, idx)] = Complex64::new(e, 0.0);

        // a†_k |j⟩⟨j+1|_q applied to this state
        for q in 0..nq {
            let jp1 = label[q];
            if jp1 == 0 {
                continue;
            }
            for k in 0..basis.n_cavity_modes {
                let nk = label[nq + k];
                if nk + 1 >= m {
                    continue;
                }
                let g = couplings.g[k][q][jp1 - 1];
                if g == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let target = idx - basis.stride(q) + basis.stride(nq + k);
                let amp = g * ((nk + 1) as f64).sqrt();
                h[(target, idx)] += amp;
                h[(idx, target)] += amp.conj();
            }
        }
    }
    Ok(h)
}

/// One bare label and the eigenstate assigned to it.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    pub label: Vec<usize>,
    /// Eigenvalue (rad/s).
    pub energy: f64,
    /// `|⟨label|ψ⟩|²` of the assigned eigenvector.
    pub overlap: f64,
    /// The overlap fell to the threshold or below.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedSpectrum {
    pub basis: SystemBasis,
    /// Indexed by bare basis index.
    pub states: Vec<DressedState>,
    pub threshold: f64,
}

impl DressedSpectrum {
    pub fn get(&self, label: &[usize]) -> Option<&DressedState> {
        self.basis.index(label).map(|i| &self.states[i])
    }

    pub fn ground_energy(&self) -> f64 {
        self.states[0].energy
    }
}

/// Connected components of the nonzero pattern of `h`, each sorted ascending.
fn components(h: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut head = 0;
        while head < members.len() {
            let i = members[head];
            head += 1;
            for j in 0..n {
                if comp[j] == usize::MAX
                    && (h[(i, j)] != Complex64::new(0.0, 0.0) || h[(j, i)] != Complex64::new(0.0, 0.0))
                {
                    comp[j] = id;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Full eigendecomposition (blockwise over the decoupled subspaces of `h`) with greedy
/// max-overlap labelling: over all (bare state, eigenvector) pairs in descending overlap, a
/// pair is taken when neither member is used yet. Entries whose overlap is at or below
/// `threshold` are flagged.
pub fn dressed_spectrum(h: &DMatrix<Complex64>, basis: &SystemBasis, threshold: f64) -> Result<DressedSpectrum> {
    let dim = basis.dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::domain(format!("matrix is {}x{}, basis dimension {dim}", h.nrows(), h.ncols())));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..dim {
        for j in 0..=i {
            if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-12 * scale {
                return Err(Error::domain(format!("matrix is not self-adjoint at ({i}, {j})")));
            }
        }
    }

    let mut states: Vec<Option<DressedState>> = vec![None; dim];
    for block in components(h) {
        let n = block.len();
        let sub = DMatrix::from_fn(n, n, |r, c| h[(block[r], block[c])]);
        let eig = sub.symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("eigensolver returned non-finite eigenvalues".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut pairs = Vec::with_capacity(n * n);
        for (rank, &e) in order.iter().enumerate() {
            for r in 0..n {
                pairs.push((eig.eigenvectors[(r, e)].norm_sqr(), r, rank));
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut bare_used = vec![false; n];
        let mut eig_used = vec![false; n];
        let mut left = n;
        for (ov, r, rank) in pairs {
            if left == 0 {
                break;
            }
            if bare_used[r] || eig_used[rank] {
                continue;
            }
            bare_used[r] = true;
            eig_used[rank] = true;
            left -= 1;
            states[block[r]] = Some(DressedState {
                label: basis.label(block[r]),
                energy: eig.eigenvalues[order[rank]],
                overlap: ov,
                flagged: ov <= threshold * (1.0 + 1e-9),
            });
        }
    }
    let states = states.into_iter().map(|s| s.expect("every bare state labelled")).collect();
    Ok(DressedSpectrum { basis: *basis, states, threshold })
}

/// Which qubit, cavity mode and (optionally) second qubit the parameters refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub qubit: usize,
    pub cavity_mode: usize,
    pub other_qubit: Option<usize>,
}

/// A derived quantity together with the reliability of the labels it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged {
    pub value: f64,
    /// Labels of flagged states entering `value`, with their overlaps.
    pub unreliable: Vec<(Vec<usize>, f64)>,
}

impl Flagged {
    pub fn is_reliable(&self) -> bool {
        self.unreliable.is_empty()
    }

    fn strict(&self) -> Result<f64> {
        match self.unreliable.first() {
            None => Ok(self.value),
            Some((label, overlap)) => Err(Error::DispersiveInvalid { label: label.clone(), overlap: *overlap }),
        }
    }
}

/// Energies referenced to the labelled ground state, all in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveReport {
    pub omega01: Flagged,
    /// Needs `M ≥ 3`.
    pub alpha: Option<Flagged>,
    /// Dressed cavity frequency.
    pub omega_k: Flagged,
    pub chi: Flagged,
    pub zeta: Option<Flagged>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveParams {
    pub omega01: f64,
    pub alpha: Option<f64>,
    pub omega_k: f64,
    pub chi: f64,
    pub zeta: Option<f64>,
}

/// `χ = E_{q,k} − E_q − E_k + E_0`, `ζ = E_{q,q'} − E_q − E_{q'} + E_0`, `ω01 = E_q − E_0`,
/// `α = E_{2q} − 2E_q + E_0`, keeping flags instead of failing.
pub fn dispersive_report(spec: &DressedSpectrum, sel: Selection) -> Result<DispersiveReport> {
    let b = &spec.basis;
    if sel.qubit >= b.n_qubits || sel.cavity_mode >= b.n_cavity_modes {
        return Err(Error::domain("selection out of range"));
    }
    if let Some(o) = sel.other_qubit {
        if o >= b.n_qubits || o == sel.qubit {
            return Err(Error::domain("second qubit selection invalid"));
        }
    }
    let k = b.n_qubits + sel.cavity_mode;
    let combine = |terms: &[(&[(usize, usize)], f64)]| -> Flagged {
        let mut value = 0.0;
        let mut unreliable = Vec::new();
        for (occ, sign) in terms {
            let st = spec.get(&b.excited(occ)).expect("label within basis");
            value += sign * st.energy;
            if st.flagged && !unreliable.iter().any(|(l, _)| *l == st.label) {
                unreliable.push((st.label.clone(), st.overlap));
            }
        }
        Flagged { value, unreliable }
    };
    let q = sel.qubit;
    let omega01 = combine(&[(&[(q, 1)], 1.0), (&[], -1.0)]);
    let alpha = (b.m >= 3).then(|| combine(&[(&[(q, 2)], 1.0), (&[(q, 1)], -2.0), (&[], 1.0)]));
    let omega_k = combine(&[(&[(k, 1)], 1.0), (&[], -1.0)]);
    let chi = combine(&[(&[(q, 1), (k, 1)], 1.0), (&[(q, 1)], -1.0), (&[(k, 1)], -1.0), (&[], 1.0)]);
    let zeta =
        sel.other_qubit.map(|o| combine(&[(&[(q, 1), (o, 1)], 1.0), (&[(q, 1)], -1.0), (&[(o, 1)], -1.0), (&[], 1.0)]));
    Ok(DispersiveReport { omega01, alpha, omega_k, chi, zeta })
}

/// As [`dispersive_report`] but failing on any flagged label.
pub fn dispersive_params(spec: &DressedSpectrum, sel: Selection) -> Result<DispersiveParams> {
    let r = dispersive_report(spec, sel)?;
    Ok(DispersiveParams {
        omega01: r.omega01.strict()?,
        alpha: r.alpha.as_ref().map(Flagged::strict).transpose()?,
        omega_k: r.omega_k.strict()?,
        chi: r.chi.strict()?,
        zeta: r.zeta.as_ref().map(Flagged::strict).transpose()?,
    })
}

/// Two-level estimate `|g|² α / (Δ (Δ + α))`, `Δ = ω01 − ω_k`.
pub fn dispersive_chi_estimate(g: Complex64, omega01: f64, alpha: f64, omega_k: f64) -> f64 {
    let delta = omega01 - omega_k;
    g.norm_sqr() * alpha / (delta * (delta + alpha))
}
