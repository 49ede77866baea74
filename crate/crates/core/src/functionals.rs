//! Scale-invariant eigenvalue functionals `Σ Φ(λ_j A / G)` and the verdicts
//! comparing a domain against the disk.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::disk_spectrum::disk_eigenvalues;
use crate::error::{Error, Result};
use crate::fem::{solve_extrapolated, SolverConfig};
use crate::geometry::{factors, GeometricFactors, RadiusProfile};
use crate::spectrum::{BoundaryCondition, MagneticSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum PhiFamily {
    Identity,
    /// `x^s`, `0 < s ≤ 1`.
    Power { s: f64 },
    Log,
    /// Zeta partial sums `Σ x^s`, `s < 0`; minimal at the disk.
    NegPower { s: f64 },
    /// Heat-trace partial sums `Σ e^{-tx}`, `t > 0`; minimal at the disk.
    NegExp { t: f64 },
}

impl PhiFamily {
    /// The default set used by `--phi all`.
    pub fn standard() -> Vec<PhiFamily> {
        vec![
            PhiFamily::Identity,
            PhiFamily::Power { s: 0.5 },
            PhiFamily::Log,
            PhiFamily::NegPower { s: -1.0 },
            PhiFamily::NegExp { t: 1.0 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PhiFamily::Power { s } => s > 0.0 && s <= 1.0,
            PhiFamily::NegPower { s } => s < 0.0 && s.is_finite(),
            PhiFamily::NegExp { t } => t > 0.0 && t.is_finite(),
            PhiFamily::Identity | PhiFamily::Log => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid functional {self}")))
        }
    }

    /// True for the forms whose sum is smallest, not largest, at the disk.
    pub fn is_minimality(&self) -> bool {
        matches!(self, PhiFamily::NegPower { .. } | PhiFamily::NegExp { .. })
    }

    /// Summand as reported: `x`, `x^s`, `ln x`, `x^s` (s<0) or `e^{-tx}`.
    pub fn term(&self, x: f64) -> Result<f64> {
        match *self {
            PhiFamily::Identity => Ok(x),
            PhiFamily::Power { s } => {
                if x < 0.0 {
                    return Err(Error::Domain(format!("power of negative argument {x}")));
                }
                Ok(x.powf(s))
            }
            PhiFamily::Log => {
                if x <= 0.0 {
                    return Err(Error::Domain(format!("log of non-positive argument {x}")));
                }
                Ok(x.ln())
            }
            PhiFamily::NegPower { s } => {
                if x <= 0.0 {
                    return Err(Error::Domain(format!("negative power of non-positive argument {x}")));
                }
                Ok(x.powf(s))
            }
            PhiFamily::NegExp { t } => Ok((-t * x).exp()),
        }
    }

    /// `|d term / dx|`, non-increasing in `x > 0` for every tag.
    fn slope(&self, x: f64) -> f64 {
        match *self {
            PhiFamily::Identity => 1.0,
            PhiFamily::Power { s } => s * x.max(f64::MIN_POSITIVE).powf(s - 1.0),
            PhiFamily::Log => 1.0 / x.max(f64::MIN_POSITIVE),
            PhiFamily::NegPower { s } => -s * x.max(f64::MIN_POSITIVE).powf(s - 1.0),
            PhiFamily::NegExp { t } => t * (-t * x.max(0.0)).exp(),
        }
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFamily::Identity => write!(f, "identity"),
            PhiFamily::Power { s } => write!(f, "power({s})"),
            PhiFamily::Log => write!(f, "log"),
            PhiFamily::NegPower { s } => write!(f, "negpower({s})"),
            PhiFamily::NegExp { t } => write!(f, "negexp({t})"),
        }
    }
}

impl FromStr for PhiFamily {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("unknown functional '{text}'"));
        let t = text.trim().to_ascii_lowercase();
        let (name, arg) = match t.split_once('(') {
            Some((n, rest)) => {
                let v: f64 = rest.strip_suffix(')').ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                (n.to_string(), Some(v))
            }
            None => (t.clone(), None),
        };
        let phi = match (name.as_str(), arg) {
            ("identity", None) => PhiFamily::Identity,
            ("log", None) => PhiFamily::Log,
            ("power", Some(s)) => PhiFamily::Power { s },
            ("power", None) => PhiFamily::Power { s: 0.5 },
            ("negpower", Some(s)) => PhiFamily::NegPower { s },
            ("negpower", None) => PhiFamily::NegPower { s: -1.0 },
            ("negexp", Some(t)) => PhiFamily::NegExp { t },
            ("negexp", None) => PhiFamily::NegExp { t: 1.0 },
            _ => return Err(bad()),
        };
        phi.validate()?;
        Ok(phi)
    }
}

/// `Σ_{j≤n} term(λ_j A / g)`.
pub fn phi_sum(spectrum: &MagneticSpectrum, g: f64, phi: PhiFamily, n: usize) -> Result<f64> {
    phi_sum_values(&spectrum.normalized, g, phi, n)
}

fn phi_sum_values(normalized: &[f64], g: f64, phi: PhiFamily, n: usize) -> Result<f64> {
    if normalized.len() < n {
        return Err(Error::Precondition(format!(
            "spectrum has {} entries, {n} needed",
            normalized.len()
        )));
    }
    if !(g >= 1.0) {
        return Err(Error::Precondition(format!("G must be >= 1, got {g}")));
    }
    normalized[..n].iter().map(|&x| phi.term(x / g)).sum()
}

/// Largest change of the sum when each argument moves by at most `delta_j`.
fn propagate(args: &[f64], deltas: &[f64], phi: PhiFamily) -> f64 {
    args.iter()
        .zip(deltas)
        .map(|(&a, &d)| phi.slope((a - d).max(0.0)) * d)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub phi: PhiFamily,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub error_bar: f64,
}

impl BoundVerdict {
    fn new(phi: PhiFamily, n: usize, lhs: f64, rhs: f64, error_bar: f64) -> Self {
        let margin = if phi.is_minimality() { lhs - rhs } else { rhs - lhs };
        BoundVerdict {
            phi,
            n,
            lhs,
            rhs,
            margin,
            holds: margin >= -error_bar,
            error_bar,
        }
    }
}

/// `1 ≤ λ₁A / (λ₁(D)π) ≤ G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub ratio: f64,
    pub g: f64,
    pub error_bar: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

/// Domain and disk spectra shared by all verdicts at one `(Ω, β, bc)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub factors: GeometricFactors,
    pub bc: BoundaryCondition,
    pub beta: f64,
    /// Extrapolated `λ_j A` of the domain.
    pub domain: Vec<f64>,
    pub domain_error: Vec<f64>,
    /// `λ_j(D) π`.
    pub disk: Vec<f64>,
    pub disk_error: Vec<f64>,
}

impl BoundInputs {
    pub fn compute(profile: &RadiusProfile, beta: f64, bc: BoundaryCondition, n: usize, cfg: &SolverConfig) -> Result<Self> {
        if bc == BoundaryCondition::Neumann && beta == 0.0 {
            return Err(Error::Hypothesis("the Neumann bound needs a nonzero field".into()));
        }
        let cfg = SolverConfig { bc, beta, n_eigs: n, ..*cfg };
        let f = factors(profile);
        let ex = solve_extrapolated(profile, &cfg)?;
        let domain_error = ex.error_bars.iter().map(|e| e * ex.spectrum.area).collect();
        let (disk, disk_error) = match bc {
            BoundaryCondition::Dirichlet => {
                let d = disk_eigenvalues(beta, n)?;
                (d.normalized, vec![0.0; n])
            }
            BoundaryCondition::Neumann => {
                let d = solve_extrapolated(&RadiusProfile::disk(), &cfg)?;
                let err = d.error_bars.iter().map(|e| e * d.spectrum.area).collect();
                (d.spectrum.normalized, err)
            }
        };
        Ok(BoundInputs {
            factors: f,
            bc,
            beta,
            domain: ex.spectrum.normalized,
            domain_error,
            disk,
            disk_error,
        })
    }

    pub fn verdict(&self, phi: PhiFamily, n: usize) -> Result<BoundVerdict> {
        phi.validate()?;
        let g = self.factors.g;
        let lhs = phi_sum_values(&self.domain, g, phi, n)?;
        let rhs = phi_sum_values(&self.disk, 1.0, phi, n)?;
        let args: Vec<f64> = self.domain[..n].iter().map(|x| x / g).collect();
        let deltas: Vec<f64> = self.domain_error[..n].iter().map(|e| e / g).collect();
        let err = propagate(&args, &deltas, phi) + propagate(&self.disk[..n], &self.disk_error[..n], phi);
        Ok(BoundVerdict::new(phi, n, lhs, rhs, err))
    }

    pub fn verdicts(&self, phis: &[PhiFamily], n: usize) -> Result<Vec<BoundVerdict>> {
        phis.iter().map(|&p| self.verdict(p, n)).collect()
    }

    pub fn sandwich(&self) -> Sandwich {
        let ratio = self.domain[0] / self.disk[0];
        let error_bar = (self.domain_error[0] + ratio * self.disk_error[0]) / self.disk[0];
        Sandwich {
            ratio,
            g: self.factors.g,
            error_bar,
            lower_holds: ratio >= 1.0 - error_bar,
            upper_holds: ratio <= self.factors.g + error_bar,
        }
    }
}

/// One verdict per functional for the first `n` eigenvalues.
pub fn verify_bounds(
    profile: &RadiusProfile,
    beta: f64,
    bc: BoundaryCondition,
    n: usize,
    phis: &[PhiFamily],
    cfg: &SolverConfig,
) -> Result<Vec<BoundVerdict>> {
    BoundInputs::compute(profile, beta, bc, n, cfg)?.verdicts(phis, n)
}

/// Weak majorization `Σ_{j≤k} domain_j / g ≤ Σ_{j≤k} disk_j` for every `k`.
pub fn majorization_check(domain_norm: &[f64], disk_norm: &[f64], g: f64) -> Result<bool> {
    if domain_norm.len() != disk_norm.len() {
        return Err(Error::Precondition("lists differ in length".into()));
    }
    for list in [domain_norm, disk_norm] {
        if list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("lists must be sorted ascending".into()));
        }
    }
    let (mut a, mut b) = (0.0, 0.0);
    for (x, y) in domain_norm.iter().zip(disk_norm) {
        a += x / g;
        b += y;
        if a > b {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Provenance;
    use approx::assert_relative_eq;

    fn disk0(n: usize) -> MagneticSpectrum {
        disk_eigenvalues(0.0, n).unwrap()
    }

    #[test]
    fn identity_on_disk_is_normalized_ground_state() {
        let v = phi_sum(&disk0(1), 1.0, PhiFamily::Identity, 1).unwrap();
        assert_relative_eq!(v, 5.783185962946785 * std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn power_half_matches_bessel_oracle() {
        let pi = std::f64::consts::PI;
        // squared zeros j_{0,1}², j_{1,1}² from a 30-digit root finder
        let expect = (5.783185962946784 * pi).sqrt() + 2.0 * (14.681970642123893 * pi).sqrt();
        let v = phi_sum(&disk0(3), 1.0, PhiFamily::Power { s: 0.5 }, 3).unwrap();
        assert_relative_eq!(v, expect, max_relative = 1e-12);
    }

    #[test]
    fn heat_trace_range_and_monotonicity() {
        let s = disk0(4);
        let mut prev = f64::INFINITY;
        for t in [0.001, 0.01, 0.1, 1.0] {
            let v = phi_sum(&s, 1.0, PhiFamily::NegExp { t }, 4).unwrap();
            assert!(v > 0.0 && v < 4.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(phi_sum(&disk0(2), 1.0, PhiFamily::Identity, 3).is_err());
        assert!(phi_sum(&disk0(2), 0.5, PhiFamily::Identity, 1).is_err());
        let neg = MagneticSpectrum::new(vec![-1.0], BoundaryCondition::Neumann, 0.0, 1.0, Provenance::Analytic).unwrap();
        assert!(phi_sum(&neg, 1.0, PhiFamily::Log, 1).is_err());
        assert!("power(2)".parse::<PhiFamily>().is_err());
        assert!("negpower(0.5)".parse::<PhiFamily>().is_err());
    }

    #[test]
    fn tag_round_trip() {
        for p in PhiFamily::standard() {
            assert_eq!(p.to_string().parse::<PhiFamily>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<PhiFamily>(&json).unwrap(), p);
        }
    }

    #[test]
    fn majorization_examples() {
        let a = [1.0, 2.0, 3.0];
        assert!(majorization_check(&a, &a, 1.0).unwrap());
        assert!(!majorization_check(&[1.5, 2.5, 3.5], &a, 1.0).unwrap());
        assert!(majorization_check(&[3.0, 1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn majorization_orders_concave_sums() {
        let disk = [2.0, 3.0, 7.0];
        let dom = [2.1, 3.2, 7.5];
        let g = 1.1;
        assert!(majorization_check(&dom, &disk, g).unwrap());
        for phi in [PhiFamily::Identity, PhiFamily::Power { s: 0.5 }, PhiFamily::Log] {
            let l = phi_sum_values(&dom, g, phi, 3).unwrap();
            let r = phi_sum_values(&disk, 1.0, phi, 3).unwrap();
            assert!(l <= r, "{phi}");
        }
    }

    #[test]
    fn verdict_signs() {
        let v = BoundVerdict::new(PhiFamily::Identity, 1, 1.0, 2.0, 0.0);
        assert!(v.holds && v.margin == 1.0);
        let v = BoundVerdict::new(PhiFamily::NegExp { t: 1.0 }, 1, 1.0, 2.0, 0.5);
        assert!(!v.holds);
        let v = BoundVerdict::new(PhiFamily::NegExp { t: 1.0 }, 1, 1.0, 1.2, 0.5);
        assert!(v.holds);
    }

    #[test]
    fn neumann_needs_field() {
        let cfg = SolverConfig::new(BoundaryCondition::Neumann, 0.0, 1).with_mesh(16, 32);
        let r = BoundInputs::compute(&RadiusProfile::disk(), 0.0, BoundaryCondition::Neumann, 1, &cfg);
        assert!(matches!(r, Err(Error::Hypothesis(_))));
    }
}
