//! Shared test support: seeded generators, independent oracles, frozen
//! oracle results, and the acceptance checks.
//!
//! The oracles deliberately share no code with the engine: they work from the
//! plain generator data (or from document text) and use the most naive
//! algorithm that is obviously correct.

#![allow(dead_code)]

pub mod checks;
pub mod gen;
pub mod golden;
pub mod oracle;

use std::path::PathBuf;

/// Path of a bundled fixture file, e.g. `fixture_path("minimal/minimal.net")`.
pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn fixture(rel: &str) -> String {
    let path = fixture_path(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}
