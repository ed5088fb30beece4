use super::{AggregationError, Result};

/// A symmetric fuzzy measure: the measure of a subset depends only on its
/// cardinality, so it is stored as `values[k] = m(|A| = k)` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyMeasure {
    values: Vec<f64>,
}

impl FuzzyMeasure {
    /// Builds a measure from its cardinality profile, checking the
    /// boundary conditions and monotonicity.
    pub fn from_cardinalities(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(AggregationError::InvalidArity);
        }
        let n = values.len() - 1;
        if values[0] != 0.0 || values[n] != 1.0 {
            return Err(AggregationError::InvalidMeasure(format!(
                "boundary conditions require m(0) = 0 and m({n}) = 1, got {} and {}",
                values[0], values[n]
            )));
        }
        if let Some(k) = values
            .windows(2)
            .position(|w| !(w[0] <= w[1]) || !(0.0..=1.0).contains(&w[1]))
        {
            return Err(AggregationError::InvalidMeasure(format!(
                "measure must be nondecreasing within [0, 1]; fails between cardinality {k} and {}",
                k + 1
            )));
        }
        Ok(Self { values })
    }

    /// Number of sources.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// Measure of any subset with `k` elements.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn cardinalities(&self) -> &[f64] {
        &self.values
    }
}

/// The cardinal measure `m(k) = k / n`.
pub fn cardinal_measure(n: usize) -> Result<FuzzyMeasure> {
    if n == 0 {
        return Err(AggregationError::InvalidArity);
    }
    let values = (0..=n).map(|k| k as f64 / n as f64).collect();
    Ok(FuzzyMeasure { values })
}
