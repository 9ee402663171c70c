//! Digit maps, subshifts, multiplicatively invariant integer sets, discrete
//! Hausdorff content, leveled trees, discrete projections, and the
//! projection-tree construction that ties them together.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod digits;
pub mod fractal;
pub mod interval;
pub mod intset;
pub mod pipeline;
pub mod projection;
pub mod stats;
pub mod subshift;
pub mod tree;

pub use digits::{DigitError, DigitWord, Radix};
pub use interval::Interval;
pub use intset::IntSet;
