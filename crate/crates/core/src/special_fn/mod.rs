//! Special functions: Kummer `M(a, b, z)` with its z- and a-derivatives,
//! and Bessel functions of the first kind with their zeros.

mod bessel;
mod dd;
mod kummer;

pub use bessel::{bessel_j, bessel_j_prime, bessel_j_zero};
pub(crate) use bessel::bisect;
pub use kummer::{kummer_m, kummer_m_da, kummer_m_dz, kummer_m_dz2, KummerParams, Z_MAX};
pub(crate) use kummer::log_derivative;
