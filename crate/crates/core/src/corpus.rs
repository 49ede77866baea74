//! Fixed test domains with reference geometric factors.
//!
//! Domain files live in `corpus/` in the geometry JSON format and are
//! compiled into the library. `corpus/reference.json` holds the factors
//! computed with `REFERENCE_N_THETA` quadrature nodes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainConfig, GeometricFactors, Harmonic, RadiusProfile};

pub const REFERENCE_N_THETA: usize = 1 << 16;

/// Samples used for the `√(1+δcos2θ)` entries.
pub const ELLIPSE_SAMPLES: usize = 256;

const FILES: [(&str, &str); 15] = [
    ("disk", include_str!("../corpus/disk.json")),
    ("disk_scaled_2", include_str!("../corpus/disk_scaled_2.json")),
    ("ellipse_0.3", include_str!("../corpus/ellipse_0.3.json")),
    ("ellipse_0.6", include_str!("../corpus/ellipse_0.6.json")),
    ("oscillatory_8", include_str!("../corpus/oscillatory_8.json")),
    ("flower_5", include_str!("../corpus/flower_5.json")),
    ("harmonic_1_0.01", include_str!("../corpus/harmonic_1_0.01.json")),
    ("harmonic_1_0.02", include_str!("../corpus/harmonic_1_0.02.json")),
    ("harmonic_1_0.04", include_str!("../corpus/harmonic_1_0.04.json")),
    ("harmonic_2_0.01", include_str!("../corpus/harmonic_2_0.01.json")),
    ("harmonic_2_0.02", include_str!("../corpus/harmonic_2_0.02.json")),
    ("harmonic_2_0.04", include_str!("../corpus/harmonic_2_0.04.json")),
    ("harmonic_3_0.01", include_str!("../corpus/harmonic_3_0.01.json")),
    ("harmonic_3_0.02", include_str!("../corpus/harmonic_3_0.02.json")),
    ("harmonic_3_0.04", include_str!("../corpus/harmonic_3_0.04.json")),
];

const REFERENCE: &str = include_str!("../corpus/reference.json");

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub profile: RadiusProfile,
    pub reference: GeometricFactors,
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub name: String,
    pub notes: String,
    pub factors: GeometricFactors,
}

/// Every corpus entry, in a fixed order.
pub fn load_corpus() -> Vec<CorpusEntry> {
    let refs: Vec<ReferenceRecord> = serde_json::from_str(REFERENCE).expect("bundled reference table parses");
    FILES
        .iter()
        .map(|(name, text)| {
            let profile = DomainConfig::from_json(text)
                .and_then(|c| c.to_profile())
                .expect("bundled domain parses");
            let r = refs
                .iter()
                .find(|r| r.name == *name)
                .expect("every bundled domain has a reference record");
            CorpusEntry {
                name: name.to_string(),
                profile,
                reference: r.factors,
                notes: r.notes.clone(),
            }
        })
        .collect()
}

pub fn corpus_entry(name: &str) -> Result<CorpusEntry> {
    load_corpus()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Precondition(format!("no corpus entry named {name:?}")))
}

pub fn names() -> Vec<&'static str> {
    FILES.iter().map(|(n, _)| *n).collect()
}

fn single(r0: f64, n: u32, a: f64) -> DomainConfig {
    DomainConfig::Fourier {
        r0,
        harmonics: vec![Harmonic { n, a, b: 0.0 }],
    }
}

/// The corpus as built from its defining formulas: `(name, config, notes)`.
pub fn definitions() -> Vec<(String, DomainConfig, String)> {
    let mut out = vec![
        (
            "disk".to_string(),
            DomainConfig::Fourier { r0: 1.0, harmonics: vec![] },
            "unit disk".to_string(),
        ),
        (
            "disk_scaled_2".to_string(),
            DomainConfig::Fourier { r0: 2.0, harmonics: vec![] },
            "disk of radius 2".to_string(),
        ),
    ];
    for delta in [0.3, 0.6] {
        let samples = (0..ELLIPSE_SAMPLES)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / ELLIPSE_SAMPLES as f64;
                (1.0 + delta * (2.0 * t).cos()).sqrt()
            })
            .collect();
        out.push((
            format!("ellipse_{delta}"),
            DomainConfig::Samples { samples },
            format!("R = sqrt(1 + {delta} cos 2θ), {ELLIPSE_SAMPLES} samples"),
        ));
    }
    out.push(("oscillatory_8".into(), single(1.0, 8, 0.1), "R = 1 + 0.1 cos 8θ".into()));
    out.push(("flower_5".into(), single(1.0, 5, 0.2), "R = 1 + 0.2 cos 5θ".into()));
    for n in 1..=3u32 {
        for eps in [0.01, 0.02, 0.04] {
            out.push((
                format!("harmonic_{n}_{eps}"),
                single(1.0, n, eps),
                format!("R = 1 + {eps} cos {n}θ"),
            ));
        }
    }
    out
}
