//! Second-order perturbation of the magnetic ground state on nearly circular
//! domains `R = 1 + εP(θ)`, `P = Σ_{n≠0} p_n e^{inθ}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disk_spectrum::{disk_eigenvalues, radial_function};
use crate::error::{Error, Result};
use crate::fem::{solve_extrapolated, SolverConfig};
use crate::geometry::{factors, perturbation_factor_expansion, Harmonic, RadiusProfile};
use crate::spectrum::BoundaryCondition;
use crate::special_fn::{kummer_m, kummer_m_da, kummer_m_dz, log_derivative, KummerParams};

/// Below this `|M|` a log-derivative is treated as a pole.
const POLE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PerturbationProfile {
    p: BTreeMap<u32, Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileJson {
    p: BTreeMap<String, [f64; 2]>,
}

impl PerturbationProfile {
    /// Builds from coefficients indexed by `n ≠ 0`; negative indices are
    /// folded onto `p_{|n|} = conj(p_n)` and must agree with any explicit
    /// positive entry.
    pub fn new(entries: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut p: BTreeMap<u32, Complex64> = BTreeMap::new();
        for (n, c) in entries {
            if n == 0 {
                return Err(Error::InvalidProfile("p_0 must be absent".into()));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidProfile(format!("p_{n} is not finite")));
            }
            let key = n.unsigned_abs() as u32;
            let val = if n > 0 { c } else { c.conj() };
            if let Some(prev) = p.get(&key) {
                if (prev - val).norm() > 1e-14 * prev.norm().max(1.0) {
                    return Err(Error::InvalidProfile(format!(
                        "p_{key} and p_-{key} are not conjugate"
                    )));
                }
            }
            p.insert(key, val);
        }
        p.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(PerturbationProfile { p })
    }

    /// `P = cos(nθ)`, i.e. `p_{±n} = ½`.
    pub fn cosine(n: u32) -> Self {
        PerturbationProfile {
            p: BTreeMap::from([(n, Complex64::new(0.5, 0.0))]),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProfileJson = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(raw.p.len());
        for (k, [re, im]) in raw.p {
            let n: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidProfile(format!("bad harmonic index '{k}'")))?;
            entries.push((n, Complex64::new(re, im)));
        }
        Self::new(entries)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = ProfileJson {
            p: self
                .p
                .iter()
                .map(|(n, c)| (n.to_string(), [c.re, c.im]))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    /// `(n, p_n)` for `n ≥ 1`.
    pub fn coefficients(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.p.iter().map(|(n, c)| (*n, *c))
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        match self.p.get(&(n.unsigned_abs() as u32)) {
            Some(c) if n > 0 => *c,
            Some(c) if n < 0 => c.conj(),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// `γ = Σ_{n≠0} |p_n|²`.
    pub fn gamma(&self) -> f64 {
        2.0 * self.p.values().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Real cosine/sine coefficients: `a_n = 2 Re p_n`, `b_n = -2 Im p_n`.
    pub fn to_harmonics(&self, eps: f64) -> Vec<Harmonic> {
        self.p
            .iter()
            .map(|(n, c)| Harmonic {
                n: *n,
                a: 2.0 * eps * c.re,
                b: -2.0 * eps * c.im,
            })
            .collect()
    }

    /// Inverse of [`to_harmonics`](Self::to_harmonics).
    pub fn from_harmonics(harmonics: &[Harmonic], eps: f64) -> Result<Self> {
        if eps == 0.0 {
            return Err(Error::Precondition("eps must be nonzero".into()));
        }
        Self::new(
            harmonics
                .iter()
                .filter(|h| h.n > 0)
                .map(|h| (h.n as i64, Complex64::new(h.a, -h.b) / (2.0 * eps))),
        )
    }

    /// `R = 1 + εP`.
    pub fn to_radius_profile(&self, eps: f64) -> Result<RadiusProfile> {
        RadiusProfile::new(1.0, self.to_harmonics(eps))
    }
}

/// Ground-state Kummer data of the unit disk at flux `β > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub beta: f64,
    pub lambda0: f64,
    pub a0: f64,
    pub z: f64,
}

/// `λ₀`, `a₀ = ½(1 - λ₀π/β)` with `M(a₀, 1, z) = 0` polished by Newton.
pub fn ground_state(beta: f64) -> Result<GroundState> {
    let beta = effective_beta(beta)?;
    let lambda = disk_eigenvalues(beta, 1)?.eigenvalues[0];
    let z = beta / (2.0 * PI);
    let mut a0 = 0.5 * (1.0 - lambda * PI / beta);
    for _ in 0..4 {
        let p = KummerParams::new(a0, 1.0, z);
        let m = kummer_m(p)?;
        let d = kummer_m_da(p)?;
        if d == 0.0 {
            break;
        }
        let step = m / d;
        a0 -= step;
        if step.abs() <= 1e-16 * a0.abs().max(1.0) {
            break;
        }
    }
    Ok(GroundState {
        beta,
        lambda0: (1.0 - 2.0 * a0) * beta / PI,
        a0,
        z,
    })
}

fn effective_beta(beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta == 0.0 {
        return Err(Error::Precondition(format!("beta must be nonzero and finite, got {beta}")));
    }
    // the spectrum is even in β
    Ok(beta.abs())
}

/// `c = -M'(a₀,1,z) / ∂ₐM(a₀,1,z) · 4β²/π`.
pub fn coefficient_c(beta: f64) -> Result<f64> {
    coefficient_c_at(&ground_state(beta)?)
}

fn coefficient_c_at(g: &GroundState) -> Result<f64> {
    let p = KummerParams::new(g.a0, 1.0, g.z);
    let da = kummer_m_da(p)?;
    if da.abs() < 1e-12 {
        return Err(Error::Degenerate(format!(
            "dM/da vanishes at a0={}, z={}",
            g.a0, g.z
        )));
    }
    Ok(-kummer_m_dz(p)? / da * 4.0 * g.beta * g.beta / PI)
}

/// `q_n = 1 + n - z + z (log M)'(a₀, n+1, z) + z (log M)'(a₀+n, n+1, z)`.
pub fn q_coefficient(beta: f64, n: u32) -> Result<f64> {
    q_coefficient_at(&ground_state(beta)?, n)
}

fn q_coefficient_at(g: &GroundState, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("q_n needs n >= 1".into()));
    }
    let nf = n as f64;
    let b = nf + 1.0;
    let log_d = |a: f64| {
        log_derivative(KummerParams::new(a, b, g.z), POLE_FLOOR).map_err(|e| match e {
            Error::Degenerate(_) => Error::Pole {
                n: n as usize,
                a,
                b,
                z: g.z,
                value: kummer_m(KummerParams::new(a, b, g.z)).unwrap_or(0.0),
            },
            other => other,
        })
    };
    let (l1, _) = log_d(g.a0)?;
    let (l2, _) = log_d(g.a0 + nf)?;
    Ok(1.0 + nf - g.z + g.z * l1 + g.z * l2)
}

/// Same `q_n` through boundary log-derivatives of the disk eigenfunction
/// family: `1 + ½ f_n'/f_n + ½ f_{-n}'/f_{-n}` at `r = 1`.
pub fn q_coefficient_radial(beta: f64, n: u32) -> Result<f64> {
    let g = ground_state(beta)?;
    let ratio = |m: i32| -> Result<f64> {
        let (f, df) = radial_function(m, g.beta, g.lambda0, 1.0)?;
        if f.abs() < POLE_FLOOR {
            return Err(Error::Pole {
                n: n as usize,
                a: crate::disk_spectrum::kummer_a(m, g.beta, g.lambda0),
                b: (m.unsigned_abs() + 1) as f64,
                z: g.z,
                value: f,
            });
        }
        Ok(df / f)
    };
    let m = n as i32;
    Ok(1.0 + 0.5 * ratio(m)? + 0.5 * ratio(-m)?)
}

/// `Σ_{n≥1} c |p_n|² q_n`.
pub fn predicted_slope(beta: f64, profile: &PerturbationProfile) -> Result<f64> {
    let g = ground_state(beta)?;
    let c = coefficient_c_at(&g)?;
    let mut total = 0.0;
    for (n, p) in profile.coefficients() {
        total += p.norm_sqr() * q_coefficient_at(&g, n)?;
    }
    Ok(c * total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub beta: f64,
    pub lambda0: f64,
    pub a0: f64,
    pub z: f64,
    pub c: f64,
    pub q: BTreeMap<u32, f64>,
    pub predicted_slope: f64,
    pub measured_slope: Option<f64>,
    /// Largest per-sample error bar of the measured quotients.
    pub measured_error: Option<f64>,
    /// Discrete `λ₁(D)π` on the validation mesh.
    pub disk_lambda_area: Option<f64>,
    pub relative_mismatch: Option<f64>,
    pub samples: Vec<SlopeSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeSample {
    pub eps: f64,
    pub lambda_area: f64,
    pub lambda_area_error: f64,
    /// Fine-minus-coarse change of the quotient, disk reference included.
    pub error_bar: f64,
    /// `(λ_ε A_ε - λ₀π) / ε²`.
    pub quotient: f64,
    pub g: f64,
}

/// Coefficients and predicted slope for `profile`, plus `q_n` for every
/// `n ≤ q_upto`.
pub fn perturbation_report(beta: f64, profile: &PerturbationProfile, q_upto: u32) -> Result<PerturbationReport> {
    let g = ground_state(beta)?;
    let c = coefficient_c_at(&g)?;
    let max_n = profile.coefficients().map(|(n, _)| n).max().unwrap_or(0).max(q_upto);
    let ns: Vec<u32> = (1..=max_n).collect();
    let qs = crate::par::map(&ns, |&n| q_coefficient_at(&g, n));
    let mut q = BTreeMap::new();
    for (n, v) in ns.into_iter().zip(qs) {
        q.insert(n, v?);
    }
    let predicted_slope = c * profile
        .coefficients()
        .map(|(n, p)| p.norm_sqr() * q[&n])
        .sum::<f64>();
    Ok(PerturbationReport {
        beta: g.beta,
        lambda0: g.lambda0,
        a0: g.a0,
        z: g.z,
        c,
        q,
        predicted_slope,
        measured_slope: None,
        measured_error: None,
        disk_lambda_area: None,
        relative_mismatch: None,
        samples: Vec::new(),
    })
}

/// Mesh used by [`slope_validation`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeMesh {
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for SlopeMesh {
    fn default() -> Self {
        SlopeMesh {
            n_radial: 96,
            n_angular: 192,
        }
    }
}

pub const DEFAULT_EPS: [f64; 3] = [0.04, 0.02, 0.01];

/// Measures `(λ_ε A_ε - λ₀π)/ε²` by discrete solves on `1 + εP` and
/// extrapolates linearly in `ε` to `ε = 0`. The reference `λ₀π` is the
/// discrete disk value on the same mesh so that discretization error
/// cancels to leading order.
pub fn slope_validation(
    beta: f64,
    profile: &PerturbationProfile,
    eps_list: &[f64],
    mesh: SlopeMesh,
) -> Result<PerturbationReport> {
    if eps_list.len() < 2 {
        return Err(Error::Precondition("need at least two eps values".into()));
    }
    let mut report = perturbation_report(beta, profile, 1)?;
    let cfg = SolverConfig::new(BoundaryCondition::Dirichlet, report.beta, 1).with_mesh(mesh.n_radial, mesh.n_angular);
    let disk = solve_extrapolated(&RadiusProfile::disk(), &cfg)?;
    let disk_fine = disk.fine.normalized[0];
    let disk_coarse = disk.coarse.normalized[0];
    let disk_value = disk.spectrum.normalized[0];
    if eps_list.iter().any(|&e| e == 0.0) {
        return Err(Error::Precondition("eps must be nonzero".into()));
    }
    let runs = crate::par::map(eps_list, |&eps| -> Result<SlopeSample> {
        let r = profile.to_radius_profile(eps)?;
        let ex = solve_extrapolated(&r, &cfg)?;
        let e2 = eps * eps;
        let lambda_area = ex.spectrum.normalized[0];
        let fine_gap = ex.fine.normalized[0] - disk_fine;
        let coarse_gap = ex.coarse.normalized[0] - disk_coarse;
        Ok(SlopeSample {
            eps,
            lambda_area,
            lambda_area_error: ex.error_bars[0] * ex.spectrum.area,
            quotient: (lambda_area - disk_value) / e2,
            error_bar: (fine_gap - coarse_gap).abs() / e2,
            g: factors(&r).g,
        })
    });
    let samples = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let measured = linear_intercept(
        &samples.iter().map(|s| s.eps).collect::<Vec<_>>(),
        &samples.iter().map(|s| s.quotient).collect::<Vec<_>>(),
    );
    report.measured_slope = Some(measured);
    report.measured_error = Some(samples.iter().map(|s| s.error_bar).fold(0.0, f64::max));
    report.disk_lambda_area = Some(disk_value);
    report.relative_mismatch = Some(if report.predicted_slope != 0.0 {
        (measured - report.predicted_slope).abs() / report.predicted_slope.abs()
    } else {
        measured.abs()
    });
    report.samples = samples;
    Ok(report)
}

/// Least-squares line through `(x, y)` evaluated at `x = 0`.
fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return my;
    }
    my - sxy / sxx * mx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryBound {
    pub lower: f64,
    /// Exact `G(Ω_ε)`.
    pub upper: f64,
    /// `1 + 2ε² max{Σ n²|p_n|², 4Σ|p_n|²}` with sums over `n ≥ 1`.
    pub surrogate: f64,
}

/// Two-sided bound on `λ_ε A_ε / (λ₁(D)π)` for `R = 1 + εP`.
pub fn corollary_bound(profile: &PerturbationProfile, eps: f64) -> Result<CorollaryBound> {
    let e = perturbation_factor_expansion(profile);
    let surrogate = 1.0 + eps * eps * e.g0_quadratic.max(e.g1_quadratic);
    let upper = if eps == 0.0 {
        1.0
    } else {
        factors(&profile.to_radius_profile(eps)?).g
    };
    Ok(CorollaryBound {
        lower: 1.0,
        upper,
        surrogate,
    })
}
