//! Externally computed eigenmode data.
//!
//! CSV with a header row and optional `#` comment lines:
//! `mode_label,f_GHz,Ex_q1,Ey_q1,Ez_q1,...,Ex_qN,Ey_qN,Ez_qN,g_port1,g_port2`.
//! Fields are unit-normalised mode fields in SI (m^-3/2) at each qubit centre; `g_port*` are the
//! port overlap couplings in (rad/s)^(1/2).

use std::collections::HashMap;
use std::path::Path;

use cqed::sweep::ResolvedMode;
use cqed::Vector3;
use log::warn;

use crate::config::{to_ghz, GHZ};
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalModeRecord {
    pub label: String,
    pub f_ghz: f64,
    pub e_sites: Vec<Vector3<f64>>,
    pub g_ports: [f64; 2],
}

impl ExternalModeRecord {
    pub fn resolved(&self) -> ResolvedMode {
        ResolvedMode {
            label: self.label.clone(),
            omega: std::f64::consts::TAU * self.f_ghz * GHZ,
            e_at_sites: self.e_sites.clone(),
            g_ports: self.g_ports,
        }
    }
}

pub fn header(n_sites: usize) -> Vec<String> {
    let mut h = vec!["mode_label".to_string(), "f_GHz".to_string()];
    for q in 1..=n_sites {
        for c in ["Ex", "Ey", "Ez"] {
            h.push(format!("{c}_q{q}"));
        }
    }
    h.extend(["g_port1".to_string(), "g_port2".to_string()]);
    h
}

/// Reads and validates a mode file holding fields at `n_sites` qubit sites.
pub fn ingest(path: &Path, n_sites: usize) -> Result<Vec<ExternalModeRecord>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open mode file {}: {e}", path.display())))?;
    parse(file, n_sites, &path.display().to_string())
}

pub fn parse(reader: impl std::io::Read, n_sites: usize, origin: &str) -> Result<Vec<ExternalModeRecord>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::Input(format!("{origin}: unreadable header: {e}")))?.clone();
    let column: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let wanted = header(n_sites);
    let idx = wanted
        .iter()
        .map(|name| {
            column
                .get(name.as_str())
                .copied()
                .ok_or_else(|| CliError::Input(format!("{origin}: missing required field '{name}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for h in headers.iter().filter(|h| !wanted.iter().any(|w| w == h)) {
        warn!("{origin}: ignoring unknown column '{h}'");
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| -> Result<&str, CliError> {
            row.get(idx[k])
                .filter(|s| !s.is_empty())
                .ok_or_else(|| CliError::Input(format!("{origin}: line {line}: field '{}' is empty", wanted[k])))
        };
        let number = |k: usize| -> Result<f64, CliError> {
            let s = field(k)?;
            let v: f64 = s.parse().map_err(|_| {
                CliError::Input(format!("{origin}: line {line}: field '{}' is not a number: '{s}'", wanted[k]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!("{origin}: line {line}: field '{}' is not finite", wanted[k])));
            }
            Ok(v)
        };
        let label = field(0)?.to_string();
        let f_ghz = number(1)?;
        if f_ghz <= 0.0 {
            return Err(CliError::Input(format!("{origin}: line {line}: field 'f_GHz' must be positive")));
        }
        let e_sites = (0..n_sites)
            .map(|q| Ok(Vector3::new(number(2 + 3 * q)?, number(3 + 3 * q)?, number(4 + 3 * q)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let g_ports = [number(2 + 3 * n_sites)?, number(3 + 3 * n_sites)?];
        if records.iter().any(|r: &ExternalModeRecord| r.label == label) {
            return Err(CliError::Input(format!("{origin}: line {line}: duplicate mode_label '{label}'")));
        }
        records.push(ExternalModeRecord { label, f_ghz, e_sites, g_ports });
    }
    Ok(records)
}

/// The records for `labels`, in that order. Records not asked for are ignored with a warning.
pub fn select(records: &[ExternalModeRecord], labels: &[String]) -> Result<Vec<ExternalModeRecord>, CliError> {
    if records.len() < labels.len() {
        return Err(CliError::Input(format!(
            "mode file holds {} records, {} modes requested",
            records.len(),
            labels.len()
        )));
    }
    for r in records.iter().filter(|r| !labels.contains(&r.label)) {
        warn!("mode file record '{}' is not selected and is ignored", r.label);
    }
    labels
        .iter()
        .map(|l| {
            records
                .iter()
                .find(|r| &r.label == l)
                .cloned()
                .ok_or_else(|| CliError::Input(format!("mode file has no record for selected mode '{l}'")))
        })
        .collect()
}

/// Mode data in the ingestion format.
pub fn export(modes: &[ResolvedMode]) -> Table {
    let n_sites = modes.first().map_or(0, |m| m.e_at_sites.len());
    let mut t = Table::new(header(n_sites));
    t.notes.push("units: f_GHz in GHz, E in m^-3/2, g_port in (rad/s)^1/2".into());
    for m in modes {
        let mut row = vec![m.label.clone(), num(to_ghz(m.omega))];
        for e in &m.e_at_sites {
            row.extend(e.iter().map(|&c| num(c)));
        }
        row.extend(m.g_ports.iter().map(|&g| num(g)));
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "# comment\nmode_label,f_GHz,Ex_q1,Ey_q1,Ez_q1,g_port1,g_port2\n\
                        TE101,7.55,0,120.5,0,1000,-1000\nTE102,9.96,0,0,0,900,900\n";

    #[test]
    fn parses_records_and_skips_comments() {
        let r = parse(GOOD.as_bytes(), 1, "mem").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].label, "TE101");
        assert_eq!(r[0].e_sites[0].y, 120.5);
        assert_eq!(r[1].g_ports, [900.0, 900.0]);
    }

    #[test]
    fn missing_column_is_named() {
        let text = GOOD.replace(",Ez_q1", "");
        let err = parse(text.as_bytes(), 1, "mem").unwrap_err();
        assert!(err.to_string().contains("'Ez_q1'"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_value_reports_line_and_field() {
        let text = GOOD.replace("9.96", "fast");
        let err = parse(text.as_bytes(), 1, "mem").unwrap_err().to_string();
        assert!(err.contains("line 4") && err.contains("'f_GHz'"), "{err}");
    }

    #[test]
    fn nonpositive_frequency_rejected() {
        let text = GOOD.replace("7.55", "-7.55");
        assert!(parse(text.as_bytes(), 1, "mem").is_err());
    }

    #[test]
    fn selection_orders_and_ignores_extras() {
        let r = parse(GOOD.as_bytes(), 1, "mem").unwrap();
        let s = select(&r, &["TE102".into()]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, "TE102");
        assert!(select(&r, &["TE103".into()]).is_err());
    }
}
