//! Coding diagnostics, induced potentials, variations and the truncated
//! summability sums for an inducing scheme.

pub mod cylinder;
pub mod potential;
pub mod summability;
pub mod symbolic;
pub mod variation;

pub use cylinder::{check_h2, cylinder, cylinder_levels, enumerate_cylinders, Cylinder};
pub use potential::{induced_potential, Potential};
pub use summability::{recc_summability, Quantity, ReccReport, SumRecord, TailFlag};
pub use symbolic::SymbolicReal;
pub use variation::{holder_fit, variation_range, variation_vn, FitVerdict, HolderFit, Variation};

/// Renders an `f64` with the precision claim carried by every numeric record.
pub fn render_numeric(x: f64) -> String {
    format!("{x:.15e}@2^-{}", crate::config::RENDER_PRECISION_BITS)
}

pub(crate) fn render_word(word: &[usize]) -> String {
    word.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
