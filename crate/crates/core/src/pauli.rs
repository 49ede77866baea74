//! Dirichlet Pauli spectra from the magnetic spectrum by the splitting
//! `spec(H_P) = (spec(H) - |β|/A) ∪ (spec(H) + |β|/A)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::disk_spectrum::disk_eigenvalues;
use crate::error::{Error, Result};
use crate::fem::{solve_extrapolated, SolverConfig};
use crate::functionals::{BoundInputs, BoundVerdict, PhiFamily};
use crate::geometry::{factors, RadiusProfile};
use crate::spectrum::{BoundaryCondition, MagneticSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `λ - |β|/A`.
    SpinDown,
    /// `λ + |β|/A`.
    SpinUp,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::SpinDown => "spin_down",
            Branch::SpinUp => "spin_up",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliEntry {
    pub eigenvalue: f64,
    pub branch: Branch,
    /// Index of the magnetic eigenvalue this entry is shifted from.
    pub source: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSpectrum {
    pub entries: Vec<PauliEntry>,
    pub beta: f64,
    pub area: f64,
    pub g: f64,
    /// `(λᴾ_j + |β|/A) A / G`.
    pub shifted_normalized: Vec<f64>,
}

impl PauliSpectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eigenvalue).collect()
    }

    /// Same entries with the shifted sequence rescaled by `g`.
    pub fn with_g(mut self, g: f64) -> Self {
        let shift = self.beta.abs() / self.area;
        self.shifted_normalized = self
            .entries
            .iter()
            .map(|e| (e.eigenvalue + shift) * self.area / g)
            .collect();
        self.g = g;
        self
    }

    /// Whether every computed Pauli eigenvalue is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.entries.first().is_none_or(|e| e.eigenvalue > 0.0)
    }
}

/// The `n` smallest Pauli eigenvalues determined by `magnetic`.
pub fn pauli_spectrum(magnetic: &MagneticSpectrum, n: usize) -> Result<PauliSpectrum> {
    if magnetic.bc != BoundaryCondition::Dirichlet {
        return Err(Error::Precondition(
            "the Pauli operator has no discrete Neumann spectrum; use Dirichlet".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Precondition("n must be >= 1".into()));
    }
    let have = magnetic.len();
    let shift = magnetic.beta.abs() / magnetic.area;
    let mut entries: Vec<PauliEntry> = Vec::with_capacity(2 * have);
    for (j, &l) in magnetic.eigenvalues.iter().enumerate() {
        entries.push(PauliEntry {
            eigenvalue: l - shift,
            branch: Branch::SpinDown,
            source: j,
        });
        entries.push(PauliEntry {
            eigenvalue: l + shift,
            branch: Branch::SpinUp,
            source: j,
        });
    }
    entries.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then(a.branch.cmp(&b.branch))
            .then(a.source.cmp(&b.source))
    });
    // unseen magnetic eigenvalues are >= the last one, so anything at or
    // below last - shift is final
    let determined = have > 0 && entries.len() >= n && {
        let last = magnetic.eigenvalues[have - 1];
        have >= n || entries[n - 1].eigenvalue <= last - shift
    };
    if !determined {
        return Err(Error::InsufficientInput {
            wanted: n,
            required: n,
            have,
        });
    }
    entries.truncate(n);
    Ok(PauliSpectrum {
        entries,
        beta: magnetic.beta,
        area: magnetic.area,
        g: 1.0,
        shifted_normalized: Vec::new(),
    }
    .with_g(1.0))
}

/// Shifted-Pauli verdicts for `Ω` against the disk, one per functional.
pub fn verify_pauli_bounds(
    profile: &RadiusProfile,
    beta: f64,
    n: usize,
    phis: &[PhiFamily],
    cfg: &SolverConfig,
) -> Result<Vec<BoundVerdict>> {
    pauli_bound_inputs(profile, beta, n, cfg)?.verdicts(phis, n)
}

/// Verdict inputs whose sequences are `(λᴾ_j + |β|/A) A` for the domain and
/// `(λᴾ_j(D) + |β|/π) π` for the disk.
pub fn pauli_bound_inputs(profile: &RadiusProfile, beta: f64, n: usize, cfg: &SolverConfig) -> Result<BoundInputs> {
    let cfg = SolverConfig {
        bc: BoundaryCondition::Dirichlet,
        beta,
        n_eigs: n,
        ..*cfg
    };
    let f = factors(profile);
    let ex = solve_extrapolated(profile, &cfg)?;
    let dom = pauli_spectrum(&ex.spectrum, n)?;
    let disk_mag = disk_eigenvalues(beta, n)?;
    let disk = pauli_spectrum(&disk_mag, n)?;
    let shift_dom = beta.abs() / dom.area;
    let shift_disk = beta.abs() / disk.area;
    Ok(BoundInputs {
        factors: f,
        bc: BoundaryCondition::Dirichlet,
        beta,
        domain: dom.entries.iter().map(|e| (e.eigenvalue + shift_dom) * dom.area).collect(),
        domain_error: dom.entries.iter().map(|e| ex.error_bars[e.source] * dom.area).collect(),
        disk: disk.entries.iter().map(|e| (e.eigenvalue + shift_disk) * disk.area).collect(),
        disk_error: vec![0.0; n],
    })
}
