//! Regenerates `fixtures/observations.csv`, the synthetic 22-state ×
//! 31-indicator table used by the end-to-end tests.
//!
//! Each state gets a latent development level; every indicator mixes that
//! level with a per-pillar factor and idiosyncratic noise, then maps the
//! result into a plausible raw range. Negative indicators move against the
//! latent level. The values are synthetic and carry no empirical meaning.
//!
//! ```text
//! cargo run -p smi-core --example make_fixture -- fixtures
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use smi_core::dataset::{self, DataMatrix, Direction};

const SEED: u64 = 0x5eed_2022;

// latent development level per state, loosely spread over [0, 1]
const STATES: [(&str, f64); 22] = [
    ("Andhra Pradesh", 0.25),
    ("Assam", 0.35),
    ("Bihar", 0.26),
    ("Chhattisgarh", 0.20),
    ("Delhi", 0.85),
    ("Gujarat", 0.32),
    ("Haryana", 0.55),
    ("Himachal Pradesh", 0.64),
    ("Jammu and Kashmir", 0.60),
    ("Jharkhand", 0.28),
    ("Karnataka", 0.36),
    ("Kerala", 0.75),
    ("Madhya Pradesh", 0.21),
    ("Maharashtra", 0.51),
    ("Odisha", 0.21),
    ("Punjab", 0.52),
    ("Rajasthan", 0.26),
    ("Tamil Nadu", 0.45),
    ("Telangana", 0.40),
    ("Uttar Pradesh", 0.28),
    ("Uttarakhand", 0.63),
    ("West Bengal", 0.26),
];

fn raw_range(id: &str) -> (f64, f64) {
    match id {
        "LIFEEXP" => (63.0, 76.0),
        "ADB" => (5.0, 60.0),
        "UW" => (12.0, 48.0),
        "RUSCH" => (40.0, 95.0),
        "DRPOU" => (5.0, 25.0),
        "MEDU" => (5.0, 10.5),
        "GEPAR" => (0.7, 1.3),
        "CWSN" => (5.0, 60.0),
        "PUPMY" => (12.0, 45.0),
        "PUPUP" => (10.0, 40.0),
        "COMF" | "INTFAC" => (3.0, 45.0),
        "RUREL" => (60.0, 100.0),
        "ABUIN" | "OPCOM" => (5.0, 55.0),
        "VOCTR" => (10.0, 150.0),
        "UNPG" => (5.0, 30.0),
        "UNRUR" => (10.0, 90.0),
        "FERUR" => (8.0, 45.0),
        "SSB" => (30.0, 75.0),
        "HEAIN" => (5.0, 75.0),
        "CRST" | "CRSC" => (0.5, 60.0),
        "DISHIG" => (1.0, 15.0),
        "GERHC" | "GERHT" => (5.0, 40.0),
        "WORM" => (20.0, 60.0),
        "WPAIL" | "WJOCO" => (30.0, 80.0),
        "TAXPA" => (1.0, 12.0),
        "AVGWA" => (100.0, 300.0),
        _ => (0.0, 100.0),
    }
}

fn main() {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "fixtures".to_owned()),
    );
    let registry = Arc::new(
        dataset::load_indicator_metadata(&dir.join("indicators.csv")).expect("indicators.csv"),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let latent: Vec<f64> = {
        let mean = STATES.iter().map(|s| s.1).sum::<f64>() / STATES.len() as f64;
        STATES.iter().map(|s| (s.1 - mean) / 0.2).collect()
    };
    let mut pillar_factor: BTreeMap<(usize, dataset::Pillar), f64> = BTreeMap::new();
    for s in 0..STATES.len() {
        for p in dataset::Pillar::ALL {
            pillar_factor.insert((s, p), rng.sample(StandardNormal));
        }
    }

    let (n, p) = (STATES.len(), registry.len());
    let mut values = DMatrix::zeros(n, p);
    for (j, spec) in registry.specs().iter().enumerate() {
        let strength: f64 = rng.random_range(0.3..0.9);
        let (lo, hi) = raw_range(&spec.id);
        for s in 0..n {
            let noise: f64 = rng.sample(StandardNormal);
            let mut u = strength * latent[s]
                + 0.5 * pillar_factor[&(s, spec.pillar)]
                + (1.0 - strength) * noise;
            if spec.direction == Direction::Negative {
                u = -u;
            }
            let share = 1.0 / (1.0 + (-1.2 * u).exp());
            values[(s, j)] = ((lo + (hi - lo) * share) * 100.0).round() / 100.0;
        }
    }
    let states = STATES.iter().map(|s| s.0.to_owned()).collect();
    let matrix = DataMatrix::new(registry, states, values).expect("valid fixture");
    let report = dataset::validate(&matrix);
    assert!(report.is_ok(), "generated a constant column");
    let path = dir.join("observations.csv");
    matrix.write_csv(&path).expect("write observations.csv");
    println!("wrote {}", path.display());
}
