//! Run manifests and the CSV/JSON record formats written by the CLI.
//!
//! Every file starts with the manifest of the run that produced it: CSV
//! files as `#` comment lines, JSON files as a `manifest` member. Nothing
//! time- or host-dependent is recorded, so identical inputs give identical
//! bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{BoundVerdict, PhiFamily};
use crate::pauli::{Branch, PauliSpectrum};
use crate::spectrum::{BoundaryCondition, MagneticSpectrum, Provenance};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Factors,
    Disk,
    Solve,
    Verify,
    Transplant,
    Perturb,
    Pauli,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub content: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub version: String,
    pub inputs: BTreeMap<String, InputRecord>,
    pub flags: BTreeMap<String, String>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub deterministic: bool,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        RunManifest {
            command,
            version: VERSION.to_string(),
            inputs: BTreeMap::new(),
            flags: BTreeMap::new(),
            outputs: Vec::new(),
            deterministic: true,
        }
    }

    pub fn input(&mut self, role: &str, path: &str, content: serde_json::Value) -> &mut Self {
        self.inputs.insert(
            role.to_string(),
            InputRecord {
                path: path.to_string(),
                content,
            },
        );
        self
    }

    pub fn flag(&mut self, name: &str, value: impl fmt::Display) -> &mut Self {
        self.flags.insert(name.to_string(), value.to_string());
        self
    }

    pub fn header(&self) -> String {
        let mut out = format!("# magspec {}\n# command: {}\n", self.version, self.command);
        for (k, v) in &self.flags {
            out.push_str(&format!("# flag {k}: {v}\n"));
        }
        for (role, rec) in &self.inputs {
            out.push_str(&format!("# input {role}: {} {}\n", rec.path, rec.content));
        }
        out.push_str(&format!("# outputs: {}\n", self.outputs.join(",")));
        out.push_str(&format!("# deterministic: {}\n", self.deterministic));
        out
    }
}

pub fn csv_string<T: Serialize>(manifest: &RunManifest, rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut out = manifest.header();
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Precondition(e.to_string()))?);
    Ok(out)
}

pub fn read_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn json_string<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Document<'a, T> {
        manifest: &'a RunManifest,
        result: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Document { manifest, result })?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// `index,eigenvalue,lambda_times_A,bc,beta,provenance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    #[serde(rename = "lambda_times_A")]
    pub lambda_times_a: f64,
    pub bc: BoundaryCondition,
    pub beta: f64,
    pub provenance: String,
}

pub fn spectrum_rows(s: &MagneticSpectrum) -> Vec<SpectrumRow> {
    s.eigenvalues
        .iter()
        .zip(&s.normalized)
        .enumerate()
        .map(|(i, (&l, &la))| SpectrumRow {
            index: i + 1,
            eigenvalue: l,
            lambda_times_a: la,
            bc: s.bc,
            beta: s.beta,
            provenance: s.provenance.to_string(),
        })
        .collect()
}

/// Rebuilds a spectrum; the area is recovered from a row with nonzero
/// eigenvalue.
pub fn spectrum_from_rows(rows: &[SpectrumRow]) -> Result<MagneticSpectrum> {
    let first = rows.first().ok_or_else(|| Error::Precondition("no spectrum rows".into()))?;
    let area = rows
        .iter()
        .find(|r| r.eigenvalue != 0.0)
        .map(|r| r.lambda_times_a / r.eigenvalue)
        .ok_or_else(|| Error::Precondition("area cannot be recovered from zero eigenvalues".into()))?;
    let s = MagneticSpectrum::new(
        rows.iter().map(|r| r.eigenvalue).collect(),
        first.bc,
        first.beta,
        area,
        Provenance::from_str(&first.provenance)?,
    )?;
    Ok(MagneticSpectrum {
        normalized: rows.iter().map(|r| r.lambda_times_a).collect(),
        ..s
    })
}

/// `phi,n,lhs,rhs,margin,holds,error_bar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub phi: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub error_bar: f64,
}

impl From<&BoundVerdict> for VerdictRow {
    fn from(v: &BoundVerdict) -> Self {
        VerdictRow {
            phi: v.phi.to_string(),
            n: v.n,
            lhs: v.lhs,
            rhs: v.rhs,
            margin: v.margin,
            holds: v.holds,
            error_bar: v.error_bar,
        }
    }
}

impl TryFrom<&VerdictRow> for BoundVerdict {
    type Error = Error;

    fn try_from(r: &VerdictRow) -> Result<Self> {
        Ok(BoundVerdict {
            phi: PhiFamily::from_str(&r.phi)?,
            n: r.n,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            holds: r.holds,
            error_bar: r.error_bar,
        })
    }
}

/// `n,q_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QRow {
    pub n: u32,
    pub q_n: f64,
}

/// `index,eigenvalue,branch,source,shifted_normalized`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub branch: Branch,
    /// 1-based index of the magnetic eigenvalue.
    pub source: usize,
    pub shifted_normalized: f64,
}

pub fn pauli_rows(p: &PauliSpectrum) -> Vec<PauliRow> {
    p.entries
        .iter()
        .zip(&p.shifted_normalized)
        .enumerate()
        .map(|(i, (e, &s))| PauliRow {
            index: i + 1,
            eigenvalue: e.eigenvalue,
            branch: e.branch,
            source: e.source + 1,
            shifted_normalized: s,
        })
        .collect()
}

/// `beta,index,eigenvalue,lambda_times_A,dominant_mode`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub index: usize,
    pub eigenvalue: f64,
    #[serde(rename = "lambda_times_A")]
    pub lambda_times_a: f64,
    pub dominant_mode: Option<i32>,
}

/// `m,k,eigenvalue,q1_avg,q2_avg,q3_avg,identity_residual,denominator,predicted_sum_bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransplantRow {
    pub m: i32,
    pub k: u32,
    pub eigenvalue: f64,
    pub q1_avg: f64,
    pub q2_avg: f64,
    pub q3_avg: f64,
    pub identity_residual: f64,
    pub denominator: f64,
    pub predicted_sum_bound: f64,
}
