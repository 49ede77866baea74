//! Starlike domains `{ r e^{iθ} : r < R(θ) }` described by a positive
//! trigonometric polynomial `R`, their scale-invariant geometric factors,
//! and the area-preserving angular map onto the disk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::PerturbationProfile;

/// Default number of nodes for periodic trapezoidal quadrature in θ.
pub const DEFAULT_N_THETA: usize = 4096;

const POSITIVITY_GRID: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub n: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// On-disk domain description: either Fourier coefficients or uniform
/// samples of `R` on `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DomainConfig {
    Fourier {
        r0: f64,
        #[serde(default)]
        harmonics: Vec<Harmonic>,
    },
    Samples {
        samples: Vec<f64>,
    },
}

impl DomainConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_profile(&self) -> Result<RadiusProfile> {
        match self {
            DomainConfig::Fourier { r0, harmonics } => RadiusProfile::new(*r0, harmonics.clone()),
            DomainConfig::Samples { samples } => RadiusProfile::from_samples(samples),
        }
    }
}

/// `R(θ) = r0 + Σ (a_n cos nθ + b_n sin nθ)`, positive everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusProfile {
    r0: f64,
    harmonics: Vec<Harmonic>,
}

impl RadiusProfile {
    pub fn new(r0: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        if !r0.is_finite() || harmonics.iter().any(|h| !h.a.is_finite() || !h.b.is_finite()) {
            return Err(Error::InvalidProfile("non-finite coefficient".into()));
        }
        if harmonics.iter().any(|h| h.n == 0) {
            return Err(Error::InvalidProfile(
                "harmonic index 0 is the mean term; use r0".into(),
            ));
        }
        let mut merged: Vec<Harmonic> = Vec::with_capacity(harmonics.len());
        let mut sorted = harmonics;
        sorted.sort_by_key(|h| h.n);
        for h in sorted {
            match merged.last_mut() {
                Some(last) if last.n == h.n => {
                    last.a += h.a;
                    last.b += h.b;
                }
                _ => merged.push(h),
            }
        }
        merged.retain(|h| h.a != 0.0 || h.b != 0.0);
        let profile = RadiusProfile {
            r0,
            harmonics: merged,
        };
        profile.check_positive()?;
        Ok(profile)
    }

    /// Unit disk.
    pub fn disk() -> Self {
        RadiusProfile {
            r0: 1.0,
            harmonics: Vec::new(),
        }
    }

    /// Trigonometric interpolant of `samples[k] = R(2πk/N)`.
    ///
    /// R′ is then the spectral derivative of the interpolant.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 4 {
            return Err(Error::InvalidProfile(format!("need at least 4 samples, got {n}")));
        }
        if samples.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidProfile("samples must be positive and finite".into()));
        }
        let nf = n as f64;
        let r0 = samples.iter().sum::<f64>() / nf;
        let top = n / 2;
        let mut harmonics = Vec::with_capacity(top);
        for m in 1..=top {
            let (mut a, mut b) = (0.0, 0.0);
            for (k, &r) in samples.iter().enumerate() {
                // reduce the phase index modulo n to keep the argument small
                let t = 2.0 * PI * ((m * k) % n) as f64 / nf;
                a += r * t.cos();
                b += r * t.sin();
            }
            let scale = if 2 * m == n { 1.0 / nf } else { 2.0 / nf };
            let b = if 2 * m == n { 0.0 } else { b * scale };
            let a = a * scale;
            // coefficients at the rounding level of the DFT are noise
            let noise = 1e-15 * r0;
            harmonics.push(Harmonic {
                n: m as u32,
                a: if a.abs() > noise { a } else { 0.0 },
                b: if b.abs() > noise { b } else { 0.0 },
            });
        }
        RadiusProfile::new(r0, harmonics)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.n)
    }

    pub fn is_disk(&self) -> bool {
        self.harmonics.is_empty()
    }

    /// Dilation `t·R`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidProfile(format!("dilation factor {t} must be positive")));
        }
        Ok(RadiusProfile {
            r0: self.r0 * t,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    n: h.n,
                    a: h.a * t,
                    b: h.b * t,
                })
                .collect(),
        })
    }

    pub fn to_config(&self) -> DomainConfig {
        DomainConfig::Fourier {
            r0: self.r0,
            harmonics: self.harmonics.clone(),
        }
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        self.eval(theta).0
    }

    pub fn derivative_at(&self, theta: f64) -> f64 {
        self.eval(theta).1
    }

    /// `(R(θ), R′(θ))`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let mut r = self.r0;
        let mut dr = 0.0;
        if self.harmonics.len() <= 8 {
            for h in &self.harmonics {
                let nf = h.n as f64;
                let (s, c) = (nf * theta).sin_cos();
                r += h.a * c + h.b * s;
                dr += nf * (h.b * c - h.a * s);
            }
            return (r, dr);
        }
        // rotate e^{iθ} up to the top harmonic
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut idx = 0;
        for n in 1..=self.max_harmonic() {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            if n % 64 == 0 {
                // resynchronise to keep rounding drift at the 1e-16 level
                let (sn, cn) = (n as f64 * theta).sin_cos();
                s = sn;
                c = cn;
            }
            let h = &self.harmonics[idx];
            if h.n == n {
                let nf = n as f64;
                r += h.a * c + h.b * s;
                dr += nf * (h.b * c - h.a * s);
                idx += 1;
            }
        }
        (r, dr)
    }

    fn check_positive(&self) -> Result<()> {
        let grid = POSITIVITY_GRID.max(16 * self.max_harmonic() as usize);
        for k in 0..grid {
            let theta = 2.0 * PI * k as f64 / grid as f64;
            let r = self.radius_at(theta);
            if !(r > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "R({theta:.6}) = {r:.6e} is not positive"
                )));
            }
        }
        Ok(())
    }

    /// Points of the boundary curve, for plotting.
    pub fn boundary_polyline(&self, points: usize) -> Vec<(f64, f64)> {
        (0..=points)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / points as f64;
                let r = self.radius_at(theta);
                (r * theta.cos(), r * theta.sin())
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricFactors {
    pub area: f64,
    pub polar_moment: f64,
    pub g0: f64,
    pub g1: f64,
    pub g: f64,
}

pub fn factors(p: &RadiusProfile) -> GeometricFactors {
    factors_with(p, DEFAULT_N_THETA)
}

/// Area, polar moment and `G0`, `G1`, `G = max(G0, G1)` by the periodic
/// trapezoidal rule on `n_theta` nodes.
pub fn factors_with(p: &RadiusProfile, n_theta: usize) -> GeometricFactors {
    let (mut m2, mut m4, mut logd) = (0.0, 0.0, 0.0);
    for k in 0..n_theta {
        let theta = 2.0 * PI * k as f64 / n_theta as f64;
        let (r, dr) = p.eval(theta);
        let r2 = r * r;
        m2 += r2;
        m4 += r2 * r2;
        logd += (dr / r).powi(2);
    }
    let nf = n_theta as f64;
    let (m2, m4, logd) = (m2 / nf, m4 / nf, logd / nf);
    let area = PI * m2;
    let polar_moment = 0.5 * PI * m4;
    let g0 = 1.0 + logd;
    let g1 = m4 / (m2 * m2);
    GeometricFactors {
        area,
        polar_moment,
        g0,
        g1,
        g: g0.max(g1),
    }
}

/// The angle map `φ` with `φ′ = R² π / A`, `φ(0) = 0`.
///
/// `R²` is a trigonometric polynomial, so `φ` is integrated exactly from
/// its Fourier coefficients; `phi_values` samples it on `theta_grid`.
#[derive(Clone, Debug)]
pub struct AngularMap {
    pub theta_grid: Vec<f64>,
    pub phi_values: Vec<f64>,
    mean_r2: f64,
    // (n, cos coefficient, sin coefficient) of R²
    r2_modes: Vec<(u32, f64, f64)>,
}

impl AngularMap {
    pub fn phi_at(&self, theta: f64) -> f64 {
        let mut phi = theta;
        for &(n, c, d) in &self.r2_modes {
            let nf = n as f64;
            let (s, co) = (nf * theta).sin_cos();
            phi += (c * s + d * (1.0 - co)) / (nf * self.mean_r2);
        }
        phi
    }

    pub fn phi_prime_at(&self, theta: f64) -> f64 {
        let mut r2 = self.mean_r2;
        for &(n, c, d) in &self.r2_modes {
            let (s, co) = (n as f64 * theta).sin_cos();
            r2 += c * co + d * s;
        }
        r2 / self.mean_r2
    }

    /// `φ(2π)`.
    pub fn closure(&self) -> f64 {
        self.phi_at(2.0 * PI)
    }
}

pub fn angular_map(p: &RadiusProfile) -> AngularMap {
    angular_map_with(p, DEFAULT_N_THETA)
}

pub fn angular_map_with(p: &RadiusProfile, n_theta: usize) -> AngularMap {
    let top = 2 * p.max_harmonic() as usize;
    let m = (2 * top + 2).max(16);
    let samples: Vec<f64> = (0..m)
        .map(|k| p.radius_at(2.0 * PI * k as f64 / m as f64).powi(2))
        .collect();
    let mf = m as f64;
    let mean_r2 = samples.iter().sum::<f64>() / mf;
    let mut r2_modes = Vec::new();
    for n in 1..=top {
        let (mut c, mut d) = (0.0, 0.0);
        for (k, &v) in samples.iter().enumerate() {
            let t = 2.0 * PI * ((n * k) % m) as f64 / mf;
            c += v * t.cos();
            d += v * t.sin();
        }
        let (c, d) = (2.0 * c / mf, 2.0 * d / mf);
        if c.abs() > 1e-17 * mean_r2 || d.abs() > 1e-17 * mean_r2 {
            r2_modes.push((n as u32, c, d));
        }
    }
    let mut map = AngularMap {
        theta_grid: Vec::new(),
        phi_values: Vec::new(),
        mean_r2,
        r2_modes,
    };
    map.theta_grid = (0..n_theta)
        .map(|k| 2.0 * PI * k as f64 / n_theta as f64)
        .collect();
    map.phi_values = map.theta_grid.iter().map(|&t| map.phi_at(t)).collect();
    map
}

/// ε² coefficients of `G0(1 + εP)` and `G1(1 + εP)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorExpansion {
    pub g0_quadratic: f64,
    pub g1_quadratic: f64,
}

impl FactorExpansion {
    /// Quadratic surrogate for `(G0, G1)` at `eps`.
    pub fn predict(&self, eps: f64) -> (f64, f64) {
        (
            1.0 + self.g0_quadratic * eps * eps,
            1.0 + self.g1_quadratic * eps * eps,
        )
    }
}

/// `G0 = 1 + 2ε² Σ_{n≥1} n²|p_n|² + O(ε³)`, `G1 = 1 + 8ε² Σ_{n≥1} |p_n|² + O(ε³)`.
pub fn perturbation_factor_expansion(profile: &PerturbationProfile) -> FactorExpansion {
    let (mut s_n2, mut s_1) = (0.0, 0.0);
    for (n, p) in profile.coefficients() {
        let w = p.norm_sqr();
        s_n2 += (n as f64).powi(2) * w;
        s_1 += w;
    }
    FactorExpansion {
        g0_quadratic: 2.0 * s_n2,
        g1_quadratic: 8.0 * s_1,
    }
}
