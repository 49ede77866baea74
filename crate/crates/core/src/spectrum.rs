//! Spectrum containers shared by the analytic and discrete solvers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::Precondition(format!("unknown boundary condition '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Discrete {
        n_radial: usize,
        n_angular: usize,
        /// Richardson-extrapolated from this mesh and its coarsening.
        extrapolated: bool,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Analytic => f.write_str("analytic"),
            Provenance::Discrete {
                n_radial,
                n_angular,
                extrapolated,
            } => {
                write!(f, "discrete({n_radial}x{n_angular}")?;
                if *extrapolated {
                    f.write_str(",richardson")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "analytic" {
            return Ok(Provenance::Analytic);
        }
        let bad = || Error::Precondition(format!("cannot parse provenance '{s}'"));
        let inner = s
            .strip_prefix("discrete(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (dims, extrapolated) = match inner.strip_suffix(",richardson") {
            Some(d) => (d, true),
            None => (inner, false),
        };
        let (nr, na) = dims.split_once('x').ok_or_else(bad)?;
        Ok(Provenance::Discrete {
            n_radial: nr.parse().map_err(|_| bad())?,
            n_angular: na.parse().map_err(|_| bad())?,
            extrapolated,
        })
    }
}

/// Angular and radial index of a separated disk mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub m: i32,
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticSpectrum {
    pub eigenvalues: Vec<f64>,
    pub bc: BoundaryCondition,
    pub beta: f64,
    pub area: f64,
    /// `eigenvalues[j] * area`.
    pub normalized: Vec<f64>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<ModeLabel>>,
}

impl MagneticSpectrum {
    pub fn new(
        eigenvalues: Vec<f64>,
        bc: BoundaryCondition,
        beta: f64,
        area: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("eigenvalues must be nondecreasing".into()));
        }
        let normalized = eigenvalues.iter().map(|l| l * area).collect();
        Ok(MagneticSpectrum {
            eigenvalues,
            bc,
            beta,
            area,
            normalized,
            provenance,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<ModeLabel>) -> Self {
        debug_assert_eq!(labels.len(), self.eigenvalues.len());
        self.labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.eigenvalues.truncate(n);
        s.normalized.truncate(n);
        if let Some(l) = s.labels.as_mut() {
            l.truncate(n);
        }
        s
    }
}
