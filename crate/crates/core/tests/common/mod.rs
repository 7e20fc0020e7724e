#![allow(dead_code)]

pub mod oracle;
pub mod random;

use std::path::PathBuf;

use semtl::domain::{load_lso_bundle, LearningDomain};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

/// The reconstructed road-traffic pair: (source, target).
pub fn uk_ie() -> (LearningDomain, LearningDomain) {
    (load_lso_bundle(fixture("uk_ie/source")).unwrap(), load_lso_bundle(fixture("uk_ie/target")).unwrap())
}
