//! Tunable caps and thresholds shared by the pipeline stages.

use crate::scalar::{q, Rational};

pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;
pub const DEFAULT_ELEMENT_BUDGET: usize = 100_000;
pub const DEFAULT_WORD_BUDGET: usize = 100_000;
pub const DEFAULT_SAMPLE_BUDGET: usize = 256;
pub const DEFAULT_TEST_DEPTH: usize = 6;

/// Entropy floor (nats) standing in for `h_top(f) > 0` at finite depth.
pub const DEFAULT_ENTROPY_FLOOR: f64 = 0.05;

/// Bits of precision claimed when transcendental values are rendered.
pub const RENDER_PRECISION_BITS: u32 = 50;

#[derive(Clone, Debug)]
pub struct Budgets {
    pub cells: usize,
    pub elements: usize,
    pub words: usize,
    pub samples: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            cells: DEFAULT_CELL_BUDGET,
            elements: DEFAULT_ELEMENT_BUDGET,
            words: DEFAULT_WORD_BUDGET,
            samples: DEFAULT_SAMPLE_BUDGET,
        }
    }
}

impl Budgets {
    /// Same cap for every enumeration (CLI `--budget`).
    pub fn uniform(cap: usize) -> Self {
        Self {
            cells: cap,
            elements: cap,
            words: cap,
            samples: DEFAULT_SAMPLE_BUDGET.min(cap),
        }
    }
}

/// Thresholds for the (P1)/(P2) diagnostics.
#[derive(Clone, Debug)]
pub struct DiagnosticConfig {
    pub entropy_floor: f64,
    /// Fraction of the ambient length the finest max-diameter must reach.
    pub diameter_threshold: Rational,
    pub cell_budget: usize,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        Self {
            entropy_floor: DEFAULT_ENTROPY_FLOOR,
            diameter_threshold: q(1, 16),
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}
