//! Connected Markov extensions, canonical inducing schemes and measure
//! lifting for finite-branch piecewise invertible interval maps.
//!
//! Everything is generic over [`Scalar`]: [`Rational`] gives exact,
//! certifying arithmetic and `f64` gives the uncertified numeric mode.

pub mod config;
pub mod error;
pub mod examples;
pub mod inducing;
pub mod interval;
pub mod io;
pub mod linalg;
pub mod map;
pub mod measure;
pub mod partition;
pub mod report;
pub mod scalar;
pub mod thermo;
pub mod tower;

pub use error::{Error, Result};
pub use interval::Interval;
pub use map::{Branch, BranchKind, Mode, PiecewiseMap, Side};
pub use partition::{check_p1_p2, lap_entropy, refine_partition, RefinedPartition};
pub use report::{Condition, ConditionReport, Verdict};
pub use scalar::{Rational, Scalar};
pub use tower::{
    build_tower, check_markov, homeomorphic_lift_path, tower_step, Tower, TowerElement, Transition,
};

pub type ExactMap = PiecewiseMap<Rational>;
pub type NumericMap = PiecewiseMap<f64>;
pub type ExactTower = Tower<Rational>;
pub type ExactScheme = inducing::InducingScheme<Rational>;
pub type RationalMeasure = measure::PiecewiseMeasure<Rational>;
