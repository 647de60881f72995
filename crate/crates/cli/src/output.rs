//! Artifact rendering. Everything is rendered to memory first and written only once a command
//! has succeeded, so a failing run leaves no partial output behind.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::SCHEMA_VERSION;
use crate::error::CliError;

/// Provenance stamped into every artifact.
#[derive(Debug, Clone)]
pub struct Stamp {
    pub config_hash: String,
    pub mode_source: String,
}

impl Stamp {
    fn comment_lines(&self) -> String {
        format!(
            "# cqed {}\n# schema_version={SCHEMA_VERSION}\n# config_sha256={}\n# mode_source={}\n",
            env!("CARGO_PKG_VERSION"),
            self.config_hash,
            self.mode_source
        )
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".into(), num)
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key=value` lines, e.g. units.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, stamp: &Stamp) -> Result<Vec<u8>, CliError> {
        let mut out = stamp.comment_lines().into_bytes();
        for n in &self.notes {
            out.extend_from_slice(format!("# {n}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| CliError::Input(format!("CSV rendering failed: {e}"));
        w.write_record(&self.header).map_err(ser)?;
        for r in &self.rows {
            w.write_record(r).map_err(ser)?;
        }
        w.into_inner().map_err(|e| CliError::Input(format!("CSV rendering failed: {e}")))
    }
}

#[derive(Debug, Clone)]
pub enum Artifact {
    Csv { name: String, table: Table },
    Json { name: String, body: Map<String, Value> },
}

impl Artifact {
    pub fn csv(name: &str, table: Table) -> Self {
        Artifact::Csv { name: name.into(), table }
    }

    pub fn json(name: &str, body: Value) -> Self {
        let Value::Object(body) = body else { panic!("JSON artifact body must be an object") };
        Artifact::Json { name: name.into(), body }
    }

    pub fn name(&self) -> &str {
        match self {
            Artifact::Csv { name, .. } | Artifact::Json { name, .. } => name,
        }
    }

    fn render(&self, stamp: &Stamp) -> Result<Vec<u8>, CliError> {
        match self {
            Artifact::Csv { table, .. } => table.render(stamp),
            Artifact::Json { body, .. } => {
                let mut doc = Map::new();
                doc.insert("schema_version".into(), SCHEMA_VERSION.into());
                doc.insert("config_sha256".into(), stamp.config_hash.clone().into());
                doc.insert("mode_source".into(), stamp.mode_source.clone().into());
                doc.extend(body.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(doc))
                    .map_err(|e| CliError::Input(format!("JSON rendering failed: {e}")))?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }
}

/// Renders all artifacts, then writes them under `dir`. Returns the written paths.
pub fn write_all(dir: &Path, stamp: &Stamp, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let rendered =
        artifacts.iter().map(|a| Ok((dir.join(a.name()), a.render(stamp)?))).collect::<Result<Vec<_>, CliError>>()?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (path, bytes) in &rendered {
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    }
    Ok(rendered.into_iter().map(|(p, _)| p).collect())
}
