//! n-ary aggregation operators over unit-interval vectors.
//!
//! Every operator here acts on the order statistics of its input, so all of
//! them are symmetric in their arguments. Fuzzy integrals take a symmetric
//! (cardinality-based) [`FuzzyMeasure`]; the uniform dispatcher
//! [`aggregate`] builds the cardinal measure and the OWA weights for the
//! input length on the fly.
//!
//! ```
//! use emf_core::aggregation::{aggregate, AggregatorId, UnitVector};
//!
//! let x = UnitVector::new(vec![0.2, 0.5, 0.9]).unwrap();
//! let c = aggregate(AggregatorId::Choquet, &x);
//! assert!((c - 0.533_333_333_333_333_3).abs() < 1e-12);
//! ```

mod classical;
mod id;
mod integrals;
mod measure;
mod owa;

pub use classical::{classical, overlap, ClassicalKind, OverlapKind};
pub use id::{Aggregation, AggregatorId, BinaryFusion, Cf1f2Pair};
pub use integrals::{cf1f2, cf_hamacher, choquet, hamacher_tnorm, sugeno, sugeno_f, sugeno_hamacher};
pub use measure::{cardinal_measure, FuzzyMeasure};
pub use owa::{owa, owa_weights, quantifier, OwaWeights};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("invalid arity: an aggregation needs at least one source")]
    InvalidArity,
    #[error("arity mismatch: input has {input} values but the operator expects {expected}")]
    ArityMismatch { input: usize, expected: usize },
    #[error("value {value} at index {index} is not a finite number in [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("invalid quantifier: need 0 <= a < b <= 1, got a = {a}, b = {b}")]
    InvalidQuantifier { a: f64, b: f64 },
    #[error("invalid fuzzy measure: {0}")]
    InvalidMeasure(String),
    #[error("unknown aggregator `{0}`")]
    UnknownAggregator(String),
    #[error("unknown binary fusion function `{0}`")]
    UnknownFusion(String),
}

pub type Result<T> = std::result::Result<T, AggregationError>;

/// A nonempty list of finite values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(AggregationError::InvalidArity);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(AggregationError::OutOfRange { index, value });
        }
        Ok(Self(values))
    }

    /// Clamps finite values into `[0, 1]`; non-finite values are still rejected.
    pub fn clamped(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(AggregationError::OutOfRange { index, value });
        }
        Self::new(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Ascending rearrangement of an input together with the measure of each
/// upper set `A_i = {σ(i), …, σ(n)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedInput {
    /// Values in ascending order.
    pub sorted: Vec<f64>,
    /// `perm[i]` is the original index of `sorted[i]`; ties keep input order.
    pub perm: Vec<usize>,
    /// `tail_measures[i] = m(A_{i+1})`, so the first entry is always 1.
    pub tail_measures: Vec<f64>,
}

impl SortedInput {
    pub fn new(x: &UnitVector, m: &FuzzyMeasure) -> Result<Self> {
        if x.len() != m.n() {
            return Err(AggregationError::ArityMismatch {
                input: x.len(),
                expected: m.n(),
            });
        }
        let values = x.as_slice();
        let mut perm: Vec<usize> = (0..values.len()).collect();
        perm.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted = perm.iter().map(|&i| values[i]).collect();
        let n = values.len();
        let tail_measures = (0..n).map(|i| m.value(n - i)).collect();
        Ok(Self {
            sorted,
            perm,
            tail_measures,
        })
    }

    /// `x_{σ(i-1)}` for the 0-based position `i`, with `x_{σ(0)} = 0`.
    pub fn previous(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.sorted[i - 1]
        }
    }
}

/// Evaluates `id` on `x` with the cardinal measure and default parameters.
/// The result is clamped to `[0, 1]`.
pub fn aggregate(id: AggregatorId, x: &UnitVector) -> f64 {
    Aggregation::from(id).eval(x.as_slice())
}

/// Sorts `values` ascending into a scratch buffer and hands it to `f`.
/// Inputs of up to 16 values never touch the heap.
pub(crate) fn with_sorted<R>(values: &[f64], f: impl FnOnce(&[f64]) -> R) -> R {
    const INLINE: usize = 16;
    if values.len() <= INLINE {
        let mut buf = [0.0f64; INLINE];
        let buf = &mut buf[..values.len()];
        buf.copy_from_slice(values);
        insertion_sort(buf);
        f(buf)
    } else {
        let mut buf = values.to_vec();
        buf.sort_by(f64::total_cmp);
        f(&buf)
    }
}

fn insertion_sort(v: &mut [f64]) {
    for i in 1..v.len() {
        let key = v[i];
        let mut j = i;
        while j > 0 && v[j - 1].total_cmp(&key).is_gt() {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = key;
    }
}
