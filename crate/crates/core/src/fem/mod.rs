//! Finite element eigensolver for `(i∇ + F)²` on starlike domains, with
//! Richardson extrapolation and mesh-refinement studies.

pub mod eigen;
pub mod mesh;
pub mod sparse;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{factors, RadiusProfile};
use crate::spectrum::{BoundaryCondition, MagneticSpectrum, Provenance};

pub use mesh::PolarMesh;

pub const DEFAULT_N_RADIAL: usize = 96;
pub const DEFAULT_N_ANGULAR: usize = 192;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    pub bc: BoundaryCondition,
    pub beta: f64,
    pub n_eigs: usize,
    pub tolerance: f64,
}

impl SolverConfig {
    pub fn new(bc: BoundaryCondition, beta: f64, n_eigs: usize) -> Self {
        SolverConfig {
            n_radial: DEFAULT_N_RADIAL,
            n_angular: DEFAULT_N_ANGULAR,
            bc,
            beta,
            n_eigs,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_mesh(mut self, n_radial: usize, n_angular: usize) -> Self {
        self.n_radial = n_radial;
        self.n_angular = n_angular;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 8 {
            return Err(Error::Precondition(format!("n_radial must be >= 8, got {}", self.n_radial)));
        }
        if self.n_angular < 16 || self.n_angular % 2 != 0 {
            return Err(Error::Precondition(format!(
                "n_angular must be even and >= 16, got {}",
                self.n_angular
            )));
        }
        if self.n_eigs == 0 {
            return Err(Error::Precondition("n_eigs must be >= 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(Error::Precondition(format!(
                "tolerance must lie in (0, 1e-6], got {}",
                self.tolerance
            )));
        }
        if !self.beta.is_finite() {
            return Err(Error::Precondition("beta must be finite".into()));
        }
        Ok(())
    }

    /// Half resolution in both directions.
    pub fn coarsened(&self) -> Result<Self> {
        if self.n_radial % 2 != 0 || self.n_angular % 4 != 0 {
            return Err(Error::Precondition(format!(
                "mesh {}x{} cannot be halved",
                self.n_radial, self.n_angular
            )));
        }
        Ok(self.with_mesh(self.n_radial / 2, self.n_angular / 2))
    }

    fn shift(&self, area: f64) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet => 0.0,
            BoundaryCondition::Neumann => -(0.5 * self.beta.abs() + 1.0) / area,
        }
    }
}

/// Discrete eigenpairs together with the mesh they live on.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub spectrum: MagneticSpectrum,
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub mesh: PolarMesh,
}

impl DiscreteSolution {
    /// Angular index `m` carrying the largest share of `|u|²` on the
    /// outermost unconstrained ring of eigenvector `idx`.
    pub fn dominant_angular_mode(&self, idx: usize) -> i32 {
        let mesh = &self.mesh;
        let na = mesh.n_angular;
        let ring = match mesh.bc {
            BoundaryCondition::Dirichlet => mesh.n_radial - 1,
            BoundaryCondition::Neumann => mesh.n_radial,
        };
        let vals = mesh.ring_values(&self.vectors[idx], ring);
        let power: Vec<f64> = (0..na)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in vals.iter().enumerate() {
                    let angle = -2.0 * std::f64::consts::PI * ((k * j) % na) as f64 / na as f64;
                    acc += v * Complex64::from_polar(1.0, angle);
                }
                acc.norm_sqr()
            })
            .collect();
        let best = power
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc })
            .0;
        if best > na / 2 {
            best as i32 - na as i32
        } else {
            best as i32
        }
    }
}

pub fn solve_with_vectors(profile: &RadiusProfile, cfg: &SolverConfig) -> Result<DiscreteSolution> {
    cfg.validate()?;
    let area = factors(profile).area;
    let mesh = PolarMesh::new(cfg.n_radial, cfg.n_angular, cfg.bc);
    if cfg.n_eigs > mesh.n_dofs() {
        return Err(Error::Precondition(format!(
            "{} eigenvalues requested from {} unknowns",
            cfg.n_eigs,
            mesh.n_dofs()
        )));
    }
    let asm = mesh::assemble(profile, &mesh, cfg.beta, area);
    let pairs = eigen::smallest(&asm.stiffness, &asm.mass, cfg.n_eigs, cfg.shift(area), cfg.tolerance)?;
    if let Some(&worst) = pairs.residuals.iter().max_by(|a, b| a.total_cmp(b)) {
        if worst > cfg.tolerance {
            return Err(Error::EigenSolver {
                iterations: 0,
                residual: worst,
            });
        }
    }
    let provenance = Provenance::Discrete {
        n_radial: cfg.n_radial,
        n_angular: cfg.n_angular,
        extrapolated: false,
    };
    let spectrum = MagneticSpectrum::new(pairs.values, cfg.bc, cfg.beta, area, provenance)?;
    Ok(DiscreteSolution {
        spectrum,
        vectors: pairs.vectors,
        residuals: pairs.residuals,
        mesh,
    })
}

pub fn solve(profile: &RadiusProfile, cfg: &SolverConfig) -> Result<MagneticSpectrum> {
    Ok(solve_with_vectors(profile, cfg)?.spectrum)
}

/// Richardson-extrapolated spectrum from `cfg` and its half-resolution
/// mesh, assuming second-order convergence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolatedSpectrum {
    pub spectrum: MagneticSpectrum,
    /// `|λ_fine - λ_coarse|` per eigenvalue.
    pub error_bars: Vec<f64>,
    pub fine: MagneticSpectrum,
    pub coarse: MagneticSpectrum,
}

pub fn richardson(fine: f64, coarse: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

pub fn solve_extrapolated(profile: &RadiusProfile, cfg: &SolverConfig) -> Result<ExtrapolatedSpectrum> {
    let coarse_cfg = cfg.coarsened()?;
    coarse_cfg.validate()?;
    let fine = solve(profile, cfg)?;
    let coarse = solve(profile, &coarse_cfg)?;
    let values: Vec<f64> = fine
        .eigenvalues
        .iter()
        .zip(&coarse.eigenvalues)
        .map(|(f, c)| richardson(*f, *c))
        .collect();
    let error_bars = fine
        .eigenvalues
        .iter()
        .zip(&coarse.eigenvalues)
        .map(|(f, c)| (f - c).abs())
        .collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let spectrum = MagneticSpectrum::new(
        sorted,
        cfg.bc,
        cfg.beta,
        fine.area,
        Provenance::Discrete {
            n_radial: cfg.n_radial,
            n_angular: cfg.n_angular,
            extrapolated: true,
        },
    )?;
    Ok(ExtrapolatedSpectrum {
        spectrum,
        error_bars,
        fine,
        coarse,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Extrapolated lowest eigenvalue with its error bar.
pub fn ground_state_extrapolated(
    profile: &RadiusProfile,
    beta: f64,
    bc: BoundaryCondition,
    n_radial: usize,
    n_angular: usize,
) -> Result<Estimate> {
    let cfg = SolverConfig::new(bc, beta, 1).with_mesh(n_radial, n_angular);
    let ex = solve_extrapolated(profile, &cfg)?;
    Ok(Estimate {
        value: ex.spectrum.eigenvalues[0],
        error: ex.error_bars[0],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    /// Radial mesh width `1 / n_radial`.
    pub h: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub spectrum: MagneticSpectrum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    /// Observed order `log2(|λ_{l-2} - λ_{l-1}| / |λ_{l-1} - λ_l|)` from the
    /// last three levels, per eigenvalue.
    pub orders: Vec<Option<f64>>,
    /// Richardson value from the two finest levels.
    pub extrapolated: Vec<f64>,
}

/// Solves at `cfg`'s mesh and `levels - 1` successive doublings.
pub fn convergence_study(profile: &RadiusProfile, cfg: &SolverConfig, levels: usize) -> Result<ConvergenceStudy> {
    if levels < 2 {
        return Err(Error::Precondition("convergence study needs at least 2 levels".into()));
    }
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let c = cfg.with_mesh(cfg.n_radial << l, cfg.n_angular << l);
        out.push(ConvergenceLevel {
            h: 1.0 / c.n_radial as f64,
            n_radial: c.n_radial,
            n_angular: c.n_angular,
            spectrum: solve(profile, &c)?,
        });
    }
    let n = cfg.n_eigs;
    let value = |l: usize, j: usize| out[l].spectrum.eigenvalues[j];
    let orders = (0..n)
        .map(|j| {
            if levels < 3 {
                return None;
            }
            let d1 = (value(levels - 3, j) - value(levels - 2, j)).abs();
            let d2 = (value(levels - 2, j) - value(levels - 1, j)).abs();
            (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).log2())
        })
        .collect();
    let extrapolated = (0..n)
        .map(|j| richardson(value(levels - 1, j), value(levels - 2, j)))
        .collect();
    Ok(ConvergenceStudy {
        levels: out,
        orders,
        extrapolated,
    })
}
