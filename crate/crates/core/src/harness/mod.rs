//! Generators, experiment runner, JSON helpers and SVG output.

pub mod experiment;
pub mod generate;
pub mod svg;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::family::Family;
use crate::measures::Measure;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, TrialRecord};
pub use generate::{generate, generate_planted, GeneratorKind, GeneratorSpec, Generated};
pub use svg::{render_svg, Style, SvgObject};

/// Seed of trial `index` under `base`: one ChaCha stream per trial.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng.next_u64()
}

/// SHA-256 of the family's canonical JSON, hex encoded.
pub fn instance_hash(family: &Family) -> String {
    let text = serde_json::to_string(&family.to_json()).expect("family serializes");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

/// Reads a measure from a JSON value. Plain strings name the common kinds:
/// `volume`, `perimeter`, `nonempty`, `integer` (the integer lattice).
pub fn parse_measure(v: &Value, dim: usize) -> Result<Measure> {
    match v {
        Value::String(s) => measure_by_name(s, dim),
        _ => Ok(serde_json::from_value(v.clone())?),
    }
}

pub fn measure_by_name(name: &str, dim: usize) -> Result<Measure> {
    match name {
        "volume" => Ok(Measure::volume()),
        "perimeter" => Ok(Measure::perimeter()),
        "nonempty" => Ok(Measure::nonempty()),
        "integer" | "lattice" => Ok(Measure::integer_points(dim)),
        other => Err(Error::Invalid(format!("unknown measure {other:?}"))),
    }
}

/// Accepts either a bare schema-less document or one whose `schema` matches.
pub fn check_schema(v: &Value, expected: &str) -> Result<()> {
    match v.get("schema") {
        None => Ok(()),
        Some(Value::String(s)) if s == expected => Ok(()),
        Some(other) => Err(Error::Invalid(format!("expected schema {expected:?}, found {other}"))),
    }
}
