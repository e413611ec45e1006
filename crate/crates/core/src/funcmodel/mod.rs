//! Time-function descriptors and the bound queries consumed by the
//! stability tests.

mod bounds;
mod enclose;
mod function;
mod integrate;
mod interval;
mod simplify;
mod text;

pub use bounds::{
    extreme, inf_val, integral, ratio_sup, sup_abs, sup_val, window_integral_extreme, BoundReport,
    Direction, ExtremeKind, ScanConfig, ScanWindow, Soundness, Window,
};
pub use function::{common_period, Extension, Periodicity, Table, TimeFunction};
pub use integrate::quadrature;
pub use interval::Interval;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncError {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("evaluation outside the tabulated domain at t = {0}")]
    Domain(f64),
    #[error("reversed integration bounds [{a}, {b}]")]
    ReversedBounds { a: f64, b: f64 },
    #[error("delay lag is unbounded")]
    UnboundedLag,
    #[error("denominator not separated from zero (infimum {0})")]
    DenominatorNotSeparated(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Pointwise enclosure `lower(t) <= c(t) <= upper(t)` of an unknown coefficient.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntervalFunction {
    pub lower: TimeFunction,
    pub upper: TimeFunction,
}

impl IntervalFunction {
    /// Build an enclosure, checking `lower <= upper` on a scan lattice of
    /// `samples` points over `[start, end]`.
    pub fn new(
        lower: TimeFunction,
        upper: TimeFunction,
        start: f64,
        end: f64,
        samples: usize,
    ) -> Result<Self, FuncError> {
        let n = samples.max(2);
        for k in 0..n {
            let t = start + (end - start) * k as f64 / (n - 1) as f64;
            let (lo, hi) = (lower.eval(t), upper.eval(t));
            if lo > hi + 1e-12 * hi.abs().max(1.0) {
                return Err(FuncError::InvalidDescriptor(format!(
                    "enclosure inverted at t = {t}: {lo} > {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn point(f: TimeFunction) -> Self {
        Self {
            lower: f.clone(),
            upper: f,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }
}
