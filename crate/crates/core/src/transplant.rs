//! Transplanting disk eigenfunctions onto a starlike domain through the
//! area-preserving map `T(r, θ) = (r / R(θ), φ(θ))`, averaged over
//! pre-rotations `η`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disk_spectrum::{angular_energy_fraction, disk_modes, radial_energies, radial_function, DiskMode};
use crate::error::{Error, Result};
use crate::fem::{solve_extrapolated, SolverConfig};
use crate::geometry::{angular_map, factors, AngularMap, RadiusProfile};
use crate::par;
use crate::quadrature;
use crate::spectrum::BoundaryCondition;

pub const DEFAULT_N_ETA: usize = 64;
const S_PANELS: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransplantReport {
    pub mode: DiskMode,
    pub q1_avg: f64,
    pub q2_avg: f64,
    pub q3_avg: f64,
    pub g0: f64,
    pub g1: f64,
    /// `∫_D |u_s|²` for the normalized mode.
    pub radial_energy: f64,
    /// `∫_D |i s⁻¹ u_φ + (β/2π) s u|²` for the normalized mode.
    pub angular_energy: f64,
    pub identity_residual: f64,
    /// `∫_Ω |v|²`, expected to be `A/π`.
    pub denominator: f64,
    pub area: f64,
    /// `π (q1 + q2 + q3)`, the bound on `λ A` contributed by this mode.
    pub predicted_sum_bound: f64,
}

/// Samples of the normalized radial factor on the composite `s` rule.
struct RadialTable {
    s: Vec<f64>,
    w: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
}

impl RadialTable {
    fn new(mode: &DiskMode) -> Result<Self> {
        let pts = quadrature::composite_points(0.0, 1.0, S_PANELS);
        let mut s = Vec::with_capacity(pts.len());
        let mut w = Vec::with_capacity(pts.len());
        let mut f = Vec::with_capacity(pts.len());
        let mut df = Vec::with_capacity(pts.len());
        for (si, wi) in pts {
            let (v, d) = radial_function(mode.m, mode.beta, mode.eigenvalue, si)?;
            s.push(si);
            w.push(wi);
            f.push(v);
            df.push(d);
        }
        let mass: f64 = 2.0 * PI * s.iter().zip(&w).zip(&f).map(|((s, w), f)| w * s * f * f).sum::<f64>();
        if !(mass > 0.0) {
            return Err(Error::Quadrature(format!("mode m={} has zero mass", mode.m)));
        }
        let scale = mass.sqrt().recip();
        f.iter_mut().for_each(|v| *v *= scale);
        df.iter_mut().for_each(|v| *v *= scale);
        Ok(RadialTable { s, w, f, df })
    }
}

fn theta_nodes(profile: &RadiusProfile) -> usize {
    (16 * profile.max_harmonic() as usize).max(512)
}

/// `(Q1, Q2, Q3)` for rotation `η` by direct quadrature over `(s, θ)`.
fn q_terms(
    mode: &DiskMode,
    table: &RadialTable,
    profile: &RadiusProfile,
    map: &AngularMap,
    area: f64,
    eta: f64,
    n_theta: usize,
) -> (f64, f64, f64) {
    let m = mode.m as f64;
    let b2pi = mode.beta / (2.0 * PI);
    let dtheta = 2.0 * PI / n_theta as f64;
    let (mut q1, mut q2, mut q3) = (0.0, 0.0, 0.0);
    for k in 0..n_theta {
        let theta = k as f64 * dtheta;
        let (r, dr) = profile.eval(theta);
        let phase = Complex64::from_polar(1.0, m * (map.phi_at(theta) - eta));
        let (mut a1, mut a2, mut a3) = (0.0, Complex64::new(0.0, 0.0), 0.0);
        for i in 0..table.s.len() {
            let s = table.s[i];
            let ws = table.w[i] * s;
            let u = phase * table.f[i];
            let us = phase * table.df[i];
            let uphi = Complex64::new(0.0, m) * u;
            a1 += us.norm_sqr() * ws;
            a2 += us.conj() * (-uphi / s + Complex64::new(0.0, b2pi * s) * u) * ws;
            let ang = Complex64::new(0.0, 1.0) * uphi / s + u * (b2pi * s);
            a3 += ang.norm_sqr() * ws;
        }
        let logd = dr / r;
        q1 += a1 * (1.0 + logd * logd);
        q2 += 2.0 * a2.re * (PI / area) * r * dr;
        q3 += a3 * PI * PI * r.powi(4) / (area * area);
    }
    (q1 * dtheta, q2 * dtheta, q3 * dtheta)
}

pub fn transplant_identity(profile: &RadiusProfile, mode: &DiskMode, n_eta: usize) -> Result<TransplantReport> {
    if n_eta == 0 {
        return Err(Error::Precondition("n_eta must be >= 1".into()));
    }
    let f = factors(profile);
    let map = angular_map(profile);
    let table = RadialTable::new(mode)?;
    let n_theta = theta_nodes(profile);
    let etas: Vec<f64> = (0..n_eta).map(|k| 2.0 * PI * k as f64 / n_eta as f64).collect();
    let terms = par::map(&etas, |&eta| q_terms(mode, &table, profile, &map, f.area, eta, n_theta));
    let nf = n_eta as f64;
    let q1_avg = terms.iter().map(|t| t.0).sum::<f64>() / nf;
    let q2_avg = terms.iter().map(|t| t.1).sum::<f64>() / nf;
    let q3_avg = terms.iter().map(|t| t.2).sum::<f64>() / nf;

    let e = radial_energies(mode)?;
    let radial_energy = e.radial / e.mass;
    let angular_energy = e.angular / e.mass;
    let identity_residual = (q1_avg - f.g0 * radial_energy).abs() + (q3_avg - f.g1 * angular_energy).abs();
    let denominator = overlap(profile, &map, (mode, &table), (mode, &table), 0.0, n_theta).re;
    Ok(TransplantReport {
        mode: *mode,
        q1_avg,
        q2_avg,
        q3_avg,
        g0: f.g0,
        g1: f.g1,
        radial_energy,
        angular_energy,
        identity_residual,
        denominator,
        area: f.area,
        predicted_sum_bound: PI * (q1_avg + q2_avg + q3_avg),
    })
}

/// `∫_Ω v_j conj(v_k) dx` with `dx = s R² ds dθ`.
fn overlap(
    profile: &RadiusProfile,
    map: &AngularMap,
    j: (&DiskMode, &RadialTable),
    k: (&DiskMode, &RadialTable),
    eta: f64,
    n_theta: usize,
) -> Complex64 {
    let radial: f64 = (0..j.1.s.len())
        .map(|i| j.1.w[i] * j.1.s[i] * j.1.f[i] * k.1.f[i])
        .sum();
    let dm = (j.0.m - k.0.m) as f64;
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut angular = Complex64::new(0.0, 0.0);
    for t in 0..n_theta {
        let theta = t as f64 * dtheta;
        let r = profile.radius_at(theta);
        angular += Complex64::from_polar(r * r, dm * (map.phi_at(theta) - eta));
    }
    angular * dtheta * radial
}

/// `|∫_Ω v_j conj(v_k) dx|` for two transplanted disk modes.
pub fn transplanted_overlap(profile: &RadiusProfile, a: &DiskMode, b: &DiskMode, eta: f64) -> Result<f64> {
    let map = angular_map(profile);
    let ta = RadialTable::new(a)?;
    let tb = RadialTable::new(b)?;
    Ok(overlap(profile, &map, (a, &ta), (b, &tb), eta, theta_nodes(profile)).norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumBoundChain {
    pub n: usize,
    pub g: f64,
    /// `Σ λ_j(Ω) A / G`.
    pub lhs: f64,
    /// `π Σ λ_j(D)`.
    pub rhs: f64,
    /// `Σ λ_j(Ω) A`.
    pub domain_sum: f64,
    /// `π Σ [(1 - α_j) G₀ + α_j G₁] λ_j(D)`.
    pub intermediate: f64,
    /// Discretization uncertainty of `domain_sum`.
    pub error_bar: f64,
    pub alphas: Vec<f64>,
}

impl SumBoundChain {
    /// `Σ λ_j A ≤ intermediate ≤ G · rhs`, with the solver error bar.
    pub fn holds(&self) -> bool {
        self.domain_sum <= self.intermediate + self.error_bar && self.intermediate <= self.g * self.rhs * (1.0 + 1e-12)
    }
}

pub fn sum_bound_chain(profile: &RadiusProfile, beta: f64, n: usize, cfg: &SolverConfig) -> Result<SumBoundChain> {
    if n == 0 {
        return Err(Error::Precondition("n must be >= 1".into()));
    }
    let f = factors(profile);
    let cfg = SolverConfig {
        bc: BoundaryCondition::Dirichlet,
        beta,
        n_eigs: n,
        ..*cfg
    };
    let ex = solve_extrapolated(profile, &cfg)?;
    let domain_sum: f64 = ex.spectrum.normalized.iter().sum();
    let error_bar: f64 = ex.error_bars.iter().map(|e| e * f.area).sum();
    let modes = disk_modes(beta, n)?;
    let alphas = modes.iter().map(angular_energy_fraction).collect::<Result<Vec<_>>>()?;
    let rhs = PI * modes.iter().map(|m| m.eigenvalue).sum::<f64>();
    let intermediate = PI
        * modes
            .iter()
            .zip(&alphas)
            .map(|(m, a)| ((1.0 - a) * f.g0 + a * f.g1) * m.eigenvalue)
            .sum::<f64>();
    Ok(SumBoundChain {
        n,
        g: f.g,
        lhs: domain_sum / f.g,
        rhs,
        domain_sum,
        intermediate,
        error_bar,
        alphas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Harmonic;

    fn ellipse_like() -> RadiusProfile {
        let samples: Vec<f64> = (0..256)
            .map(|k| (1.0 + 0.3 * (2.0 * 2.0 * PI * k as f64 / 256.0).cos()).sqrt())
            .collect();
        RadiusProfile::from_samples(&samples).unwrap()
    }

    #[test]
    fn disk_is_exact() {
        let mode = disk_modes(5.0, 1).unwrap()[0];
        let r = transplant_identity(&RadiusProfile::disk(), &mode, 8).unwrap();
        assert_eq!(r.q2_avg, 0.0);
        assert!(r.identity_residual <= 1e-8, "{}", r.identity_residual);
        assert!((r.denominator - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ellipse_like_identity() {
        let p = ellipse_like();
        for mode in disk_modes(5.0, 3).unwrap() {
            let r = transplant_identity(&p, &mode, 64).unwrap();
            assert!(r.identity_residual <= 1e-6, "{:?}", r);
            assert!(r.q2_avg.abs() <= 1e-8);
            assert!((r.denominator - r.area / PI).abs() <= 1e-8);
        }
    }

    #[test]
    fn eta_average_is_converged() {
        let p = RadiusProfile::new(1.0, vec![Harmonic { n: 3, a: 0.15, b: 0.05 }]).unwrap();
        let mode = disk_modes(5.0, 2).unwrap()[1];
        let a = transplant_identity(&p, &mode, 16).unwrap();
        let b = transplant_identity(&p, &mode, 32).unwrap();
        assert!((a.q1_avg - b.q1_avg).abs() < 1e-10);
        assert!((a.q3_avg - b.q3_avg).abs() < 1e-10);
    }

    #[test]
    fn transplanted_modes_stay_orthogonal() {
        let p = RadiusProfile::new(1.0, vec![Harmonic { n: 2, a: 0.2, b: 0.0 }, Harmonic { n: 5, a: 0.0, b: 0.05 }]).unwrap();
        let modes = disk_modes(5.0, 6).unwrap();
        for i in 0..modes.len() {
            for j in 0..i {
                let o = transplanted_overlap(&p, &modes[i], &modes[j], 0.7).unwrap();
                assert!(o <= 1e-8, "{i} {j} {o}");
            }
        }
    }
}
