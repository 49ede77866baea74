//! Analytic Dirichlet spectrum of `(i∇ + F)²` on the unit disk.
//!
//! Separating `u = f(s) e^{imφ}` reduces the problem to Kummer's equation:
//! with `z = |β|/2π` the radial factor is
//! `f_m(s) = (s²/π)^{|m|/2} e^{-|β|s²/4π} M(a, |m|+1, |β|s²/2π)`,
//! `a = (1 + |m| - sgn(β) m - λπ/|β|) / 2`, and the Dirichlet condition
//! `f_m(1) = 0` picks out the eigenvalues. At `β = 0` the radial factor is
//! `J_|m|(√λ s)` and the eigenvalues are squared Bessel zeros.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature;
use crate::special_fn::{bessel_j, bessel_j_prime, bessel_j_zero, bisect, kummer_m, kummer_m_dz, KummerParams};
use crate::spectrum::{BoundaryCondition, MagneticSpectrum, ModeLabel, Provenance};

/// Root-scan step in λ.
const SCAN_STEP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskMode {
    pub m: i32,
    pub k: u32,
    pub eigenvalue: f64,
    /// Kummer first parameter at the eigenvalue (0 when `beta == 0`).
    pub a: f64,
    /// `|β| / 2π`; zero selects the Bessel branch.
    pub z: f64,
    pub beta: f64,
}

impl DiskMode {
    pub fn label(&self) -> ModeLabel {
        ModeLabel { m: self.m, k: self.k }
    }

    pub fn kummer_params(&self) -> KummerParams {
        KummerParams::new(self.a, (self.m.unsigned_abs() + 1) as f64, self.z)
    }

    /// `f_m(1)` for this mode, which vanishes at an eigenvalue.
    pub fn boundary_residual(&self) -> Result<f64> {
        if self.beta == 0.0 {
            Ok(bessel_j(self.m.unsigned_abs(), self.eigenvalue.sqrt()))
        } else {
            kummer_m(self.kummer_params())
        }
    }
}

/// Kummer first parameter for angular index `m` at eigenvalue `lambda`.
pub fn kummer_a(m: i32, beta: f64, lambda: f64) -> f64 {
    let sign = beta.signum();
    (1.0 + m.abs() as f64 - sign * m as f64 - lambda * PI / beta.abs()) / 2.0
}

/// Radial factor `f_m(s)` and `f_m'(s)` at spectral parameter `lambda`
/// (an eigenvalue of the unit disk, or any positive value).
pub fn radial_function(m: i32, beta: f64, lambda: f64, s: f64) -> Result<(f64, f64)> {
    let am = m.unsigned_abs();
    if beta == 0.0 {
        let k = lambda.sqrt();
        return Ok((bessel_j(am, k * s), k * bessel_j_prime(am, k * s)));
    }
    let b = beta.abs();
    let zs = b * s * s / (2.0 * PI);
    let p = KummerParams::new(kummer_a(m, beta, lambda), (am + 1) as f64, zs);
    let mv = kummer_m(p)?;
    let dm = kummer_m_dz(p)?;
    let gauss = (-b * s * s / (4.0 * PI)).exp();
    let pre = if am == 0 {
        1.0
    } else {
        (s * s / PI).powf(am as f64 / 2.0)
    };
    let f = pre * gauss * mv;
    // d/ds [pre] = pre |m|/s ; d/ds [gauss] = -gauss |β| s / 2π ; dz/ds = |β| s / π
    let dpre = if am == 0 { 0.0 } else { pre * am as f64 / s };
    let df = dpre * gauss * mv - pre * gauss * mv * b * s / (2.0 * PI) + pre * gauss * dm * b * s / PI;
    Ok((f, df))
}

/// `f_m(s)` on a grid of radii.
pub fn disk_radial_profile(mode: &DiskMode, s_grid: &[f64]) -> Result<Vec<f64>> {
    s_grid
        .iter()
        .map(|&s| radial_function(mode.m, mode.beta, mode.eigenvalue, s).map(|(f, _)| f))
        .collect()
}

fn boundary_function(m: i32, beta: f64) -> impl Fn(f64) -> f64 {
    let b = (m.unsigned_abs() + 1) as f64;
    let z = beta.abs() / (2.0 * PI);
    move |lambda: f64| {
        kummer_m(KummerParams::new(kummer_a(m, beta, lambda), b, z)).unwrap_or(f64::NAN)
    }
}

/// Eigenvalues of angular mode `m` strictly below `cutoff`, ascending.
fn mode_roots(m: i32, beta: f64, cutoff: f64) -> Result<Vec<f64>> {
    let am = m.unsigned_abs();
    if beta == 0.0 {
        let mut out = Vec::new();
        for k in 1.. {
            let j = bessel_j_zero(am, k);
            if j * j >= cutoff {
                break;
            }
            out.push(j * j);
        }
        return Ok(out);
    }
    let g = boundary_function(m, beta);
    // M(a, b, z) > 0 while a >= 0, so roots lie above this Landau level
    let landau = beta.abs() / PI * (1.0 + am as f64 - beta.signum() * m as f64);
    let mut lo = landau;
    let mut g_lo = g(lo);
    let mut roots = Vec::new();
    while lo < cutoff {
        let hi = (lo + SCAN_STEP).min(cutoff);
        let g_hi = g(hi);
        if !g_hi.is_finite() {
            return Err(Error::Domain(format!(
                "Kummer evaluation failed for mode m={m} at lambda={hi}"
            )));
        }
        if g_lo * g_hi < 0.0 {
            roots.push(bisect(&g, lo, hi, g_lo));
        } else if g_hi == 0.0 && hi < cutoff {
            roots.push(hi);
        }
        lo = hi;
        g_lo = g_hi;
    }
    Ok(roots)
}

/// The `n` lowest Dirichlet modes of the unit disk with flux `beta`.
pub fn disk_modes(beta: f64, n: usize) -> Result<Vec<DiskMode>> {
    if n == 0 {
        return Err(Error::Precondition("need n >= 1".into()));
    }
    let scan_limit = 1e4 * beta.abs().max(1.0);
    let mut cutoff = 4.0 * n as f64 + 24.0 + beta.abs() / PI;
    loop {
        let mut found: Vec<(f64, i32, u32)> = Vec::new();
        let mut empty_run = 0;
        let mut am = 0i32;
        while empty_run < 2 {
            let ms: Vec<i32> = if am == 0 { vec![0] } else { vec![am, -am] };
            let per_mode = par::map(&ms, |&m| mode_roots(m, beta, cutoff));
            let mut any = false;
            for (m, roots) in ms.iter().zip(per_mode) {
                let roots = roots?;
                any |= !roots.is_empty();
                found.extend(roots.into_iter().enumerate().map(|(i, l)| (l, *m, i as u32 + 1)));
            }
            empty_run = if any { 0 } else { empty_run + 1 };
            am += 1;
        }
        if found.len() >= n {
            found.sort_by(|x, y| {
                x.0.total_cmp(&y.0)
                    .then(x.1.cmp(&y.1))
                    .then(x.2.cmp(&y.2))
            });
            found.truncate(n);
            let z = beta.abs() / (2.0 * PI);
            return Ok(found
                .into_iter()
                .map(|(eigenvalue, m, k)| DiskMode {
                    m,
                    k,
                    eigenvalue,
                    a: if beta == 0.0 { 0.0 } else { kummer_a(m, beta, eigenvalue) },
                    z,
                    beta,
                })
                .collect());
        }
        if cutoff >= scan_limit {
            let modes = found
                .iter()
                .map(|(l, m, k)| format!("(m={m},k={k},λ={l:.6})"))
                .collect::<Vec<_>>()
                .join(" ");
            return Err(Error::IncompleteSpectrum {
                wanted: n,
                found: found.len(),
                limit: cutoff,
                modes,
            });
        }
        cutoff = (2.0 * cutoff).min(scan_limit);
    }
}

/// The `n` smallest Dirichlet eigenvalues of the unit disk (area π).
pub fn disk_eigenvalues(beta: f64, n: usize) -> Result<MagneticSpectrum> {
    let modes = disk_modes(beta, n)?;
    let eig = modes.iter().map(|m| m.eigenvalue).collect();
    let labels = modes.iter().map(DiskMode::label).collect();
    Ok(MagneticSpectrum::new(eig, BoundaryCondition::Dirichlet, beta, PI, Provenance::Analytic)?
        .with_labels(labels))
}

/// Whether the lowest disk eigenvalue belongs to the radial (`m = 0`) family.
pub fn ground_state_is_radial(beta: f64) -> Result<bool> {
    Ok(disk_modes(beta, 1)?[0].m == 0)
}

/// Energy split of a disk mode `u = f(s) e^{imφ}`:
/// `radial = ∫|u_s|²`, `angular = ∫|i s⁻¹u_φ + (β/2π) s u|²`, `mass = ∫|u|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialEnergies {
    pub radial: f64,
    pub angular: f64,
    pub mass: f64,
}

impl RadialEnergies {
    /// Rayleigh quotient `(radial + angular) / mass`.
    pub fn rayleigh(&self) -> f64 {
        (self.radial + self.angular) / self.mass
    }
}

const ENERGY_TOL: f64 = 1e-10;

pub fn radial_energies(mode: &DiskMode) -> Result<RadialEnergies> {
    let (m, beta, lambda) = (mode.m, mode.beta, mode.eigenvalue);
    let weight = |s: f64| (beta / (2.0 * PI)) * s - m as f64 / s;
    let two_pi = 2.0 * PI;
    let radial = quadrature::adaptive(
        |s| radial_function(m, beta, lambda, s).map_or(f64::NAN, |(_, d)| d * d * s),
        0.0,
        1.0,
        ENERGY_TOL,
    )?;
    let angular = quadrature::adaptive(
        |s| radial_function(m, beta, lambda, s).map_or(f64::NAN, |(f, _)| weight(s).powi(2) * f * f * s),
        0.0,
        1.0,
        ENERGY_TOL,
    )?;
    let mass = quadrature::adaptive(
        |s| radial_function(m, beta, lambda, s).map_or(f64::NAN, |(f, _)| f * f * s),
        0.0,
        1.0,
        ENERGY_TOL,
    )?;
    if !(radial.is_finite() && angular.is_finite() && mass.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite energy for mode m={m}, k={}", mode.k)));
    }
    Ok(RadialEnergies {
        radial: two_pi * radial,
        angular: two_pi * angular,
        mass: two_pi * mass,
    })
}

/// Share `α ∈ [0, 1]` of the magnetic energy carried by the angular term.
pub fn angular_energy_fraction(mode: &DiskMode) -> Result<f64> {
    let e = radial_energies(mode)?;
    let total = e.radial + e.angular;
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(e.angular / total)
}
