//! Shared fixtures for the benchmarks.

use cmspress::gallery::{instantiate, GalleryEntry};
use cmspress::potential::{Formula, Potential};
use cmspress::shift::{truncate, Generator, ShiftSpec, TruncatedSFT};

pub fn renewal() -> ShiftSpec {
    ShiftSpec::Generator(Generator::Renewal)
}

pub fn renewal_truncation(n: u64) -> TruncatedSFT {
    truncate(&renewal(), n)
}

/// 1/x₀ with limit 0 at the renewal boundary point.
pub fn reciprocal() -> Potential {
    Potential::formula_with_limit(Formula::Reciprocal, "inf", 0.0)
}

pub fn entry(name: &str) -> GalleryEntry {
    instantiate(name).expect("catalogue entry")
}
