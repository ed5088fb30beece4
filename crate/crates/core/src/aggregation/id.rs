use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::classical::{classical_sorted, overlap_values, ClassicalKind, OverlapKind};
use super::integrals::{cf1f2_sorted, cf_sorted, choquet_sorted, hamacher_tnorm, sugeno_sorted};
use super::owa::owa_sorted;
use super::{with_sorted, AggregationError};

/// The seventeen operators available to both fusion phases.
///
/// Serialized with the lowercase tokens used throughout configs, reports
/// and CLI flags (`mean`, `h_sugeno`, `cf1f2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorId {
    Mean,
    Median,
    Choquet,
    CfMm,
    Sugeno,
    HSugeno,
    FSugeno,
    Min,
    Max,
    Cf1f2,
    Owa1,
    Owa2,
    Owa3,
    Cf,
    Gm,
    So,
    Hm,
}

impl AggregatorId {
    /// Catalog order, which is also the row/column order of aggregator grids.
    pub const ALL: [AggregatorId; 17] = [
        AggregatorId::Mean,
        AggregatorId::Median,
        AggregatorId::Choquet,
        AggregatorId::CfMm,
        AggregatorId::Sugeno,
        AggregatorId::HSugeno,
        AggregatorId::FSugeno,
        AggregatorId::Min,
        AggregatorId::Max,
        AggregatorId::Cf1f2,
        AggregatorId::Owa1,
        AggregatorId::Owa2,
        AggregatorId::Owa3,
        AggregatorId::Cf,
        AggregatorId::Gm,
        AggregatorId::So,
        AggregatorId::Hm,
    ];

    pub fn token(self) -> &'static str {
        match self {
            AggregatorId::Mean => "mean",
            AggregatorId::Median => "median",
            AggregatorId::Choquet => "choquet",
            AggregatorId::CfMm => "cf_mm",
            AggregatorId::Sugeno => "sugeno",
            AggregatorId::HSugeno => "h_sugeno",
            AggregatorId::FSugeno => "f_sugeno",
            AggregatorId::Min => "min",
            AggregatorId::Max => "max",
            AggregatorId::Cf1f2 => "cf1f2",
            AggregatorId::Owa1 => "owa1",
            AggregatorId::Owa2 => "owa2",
            AggregatorId::Owa3 => "owa3",
            AggregatorId::Cf => "cf",
            AggregatorId::Gm => "gm",
            AggregatorId::So => "so",
            AggregatorId::Hm => "hm",
        }
    }

    /// Position in [`AggregatorId::ALL`].
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&id| id == self).unwrap()
    }

    /// Quantifier parameters `(a, b)` of the three OWA operators.
    pub fn owa_params(self) -> Option<(f64, f64)> {
        match self {
            AggregatorId::Owa1 => Some((0.1, 0.5)),
            AggregatorId::Owa2 => Some((0.5, 1.0)),
            AggregatorId::Owa3 => Some((0.3, 0.8)),
            _ => None,
        }
    }
}

impl fmt::Display for AggregatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for AggregatorId {
    type Err = AggregationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.token() == s)
            .ok_or_else(|| AggregationError::UnknownAggregator(s.to_string()))
    }
}

/// Binary functions admissible as `F1`/`F2` in the `C_{F1,F2}` integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryFusion {
    Product,
    Minimum,
    Hamacher,
}

impl BinaryFusion {
    pub const ALL: [BinaryFusion; 3] = [BinaryFusion::Product, BinaryFusion::Minimum, BinaryFusion::Hamacher];

    pub fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            BinaryFusion::Product => x * y,
            BinaryFusion::Minimum => x.min(y),
            BinaryFusion::Hamacher => hamacher_tnorm(x, y),
        }
    }
}

impl FromStr for BinaryFusion {
    type Err = AggregationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "product" => Ok(BinaryFusion::Product),
            "minimum" | "min" => Ok(BinaryFusion::Minimum),
            "hamacher" => Ok(BinaryFusion::Hamacher),
            other => Err(AggregationError::UnknownFusion(other.to_string())),
        }
    }
}

/// The `(F1, F2)` pair behind [`AggregatorId::Cf1f2`]. Defaults to
/// (product, minimum).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cf1f2Pair {
    pub f1: BinaryFusion,
    pub f2: BinaryFusion,
}

impl Default for Cf1f2Pair {
    fn default() -> Self {
        Self {
            f1: BinaryFusion::Product,
            f2: BinaryFusion::Minimum,
        }
    }
}

impl Cf1f2Pair {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// An operator id together with its tunable parameters, evaluated with the
/// cardinal measure for whatever input length it receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Aggregation {
    pub id: AggregatorId,
    pub cf1f2: Cf1f2Pair,
}

impl From<AggregatorId> for Aggregation {
    fn from(id: AggregatorId) -> Self {
        Self {
            id,
            cf1f2: Cf1f2Pair::default(),
        }
    }
}

impl Aggregation {
    pub fn new(id: AggregatorId, cf1f2: Cf1f2Pair) -> Self {
        Self { id, cf1f2 }
    }

    /// Evaluates on raw values, which must be nonempty and lie in `[0, 1]`.
    /// The result is clamped to `[0, 1]`.
    pub fn eval(&self, values: &[f64]) -> f64 {
        debug_assert!(!values.is_empty());
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        let value = match self.id {
            AggregatorId::Gm => overlap_values(values, OverlapKind::Gm),
            AggregatorId::So => overlap_values(values, OverlapKind::So),
            AggregatorId::Hm => overlap_values(values, OverlapKind::Hm),
            id => with_sorted(values, |s| self.eval_sorted(id, s)),
        };
        value.clamp(0.0, 1.0)
    }

    fn eval_sorted(&self, id: AggregatorId, sorted: &[f64]) -> f64 {
        let n = sorted.len();
        let nf = n as f64;
        let tail = |i: usize| (n - i) as f64 / nf;
        match id {
            AggregatorId::Mean => classical_sorted(sorted, ClassicalKind::Mean),
            AggregatorId::Median => classical_sorted(sorted, ClassicalKind::Median),
            AggregatorId::Min => classical_sorted(sorted, ClassicalKind::Min),
            AggregatorId::Max => classical_sorted(sorted, ClassicalKind::Max),
            AggregatorId::Choquet => choquet_sorted(sorted, tail),
            AggregatorId::Cf => cf_sorted(sorted, tail),
            AggregatorId::CfMm => cf1f2_sorted(sorted, tail, BinaryFusion::Minimum, BinaryFusion::Minimum),
            AggregatorId::Cf1f2 => cf1f2_sorted(sorted, tail, self.cf1f2.f1, self.cf1f2.f2),
            AggregatorId::Sugeno => sugeno_sorted(sorted, tail, f64::min),
            AggregatorId::HSugeno => sugeno_sorted(sorted, tail, hamacher_tnorm),
            AggregatorId::FSugeno => sugeno_sorted(sorted, tail, |a, b| a * b),
            AggregatorId::Owa1 | AggregatorId::Owa2 | AggregatorId::Owa3 => {
                let (a, b) = id.owa_params().unwrap();
                owa_sorted(sorted, a, b)
            }
            AggregatorId::Gm | AggregatorId::So | AggregatorId::Hm => unreachable!("overlaps are order-free"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{aggregate, UnitVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn tokens_round_trip_through_serde_and_from_str() {
        let tokens: Vec<&str> = AggregatorId::ALL.iter().map(|id| id.token()).collect();
        assert_eq!(
            tokens,
            [
                "mean", "median", "choquet", "cf_mm", "sugeno", "h_sugeno", "f_sugeno", "min", "max", "cf1f2",
                "owa1", "owa2", "owa3", "cf", "gm", "so", "hm"
            ]
        );
        for id in AggregatorId::ALL {
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.token()));
            assert_eq!(serde_json::from_str::<AggregatorId>(&json).unwrap(), id);
            assert_eq!(id.token().parse::<AggregatorId>().unwrap(), id);
            assert_eq!(AggregatorId::ALL[id.index()], id);
        }
        assert!("choquet2".parse::<AggregatorId>().is_err());
    }

    #[test]
    fn dispatch_examples() {
        let x = UnitVector::new(vec![0.2, 0.5, 0.9]).unwrap();
        assert_abs_diff_eq!(aggregate(AggregatorId::Choquet, &x), 1.6 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(aggregate(AggregatorId::Owa2, &x), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(aggregate(AggregatorId::Cf1f2, &x), 0.3, epsilon = 1e-12);
        let c = UnitVector::new(vec![0.61; 7]).unwrap();
        assert_abs_diff_eq!(aggregate(AggregatorId::Mean, &c), 0.61, epsilon = 1e-12);
    }

    #[test]
    fn cf1f2_pair_is_a_parameter() {
        let x = [0.2, 0.5, 0.9];
        let product = Aggregation::new(
            AggregatorId::Cf1f2,
            Cf1f2Pair {
                f1: BinaryFusion::Product,
                f2: BinaryFusion::Product,
            },
        );
        assert_abs_diff_eq!(product.eval(&x), 1.6 / 3.0, epsilon = 1e-12);
        assert!(Cf1f2Pair::default().is_default());
        assert_eq!("min".parse::<BinaryFusion>().unwrap(), BinaryFusion::Minimum);
        assert!("max".parse::<BinaryFusion>().is_err());
    }
}
