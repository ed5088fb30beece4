use std::f64::consts::FRAC_PI_2;

use super::{with_sorted, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalKind {
    Mean,
    Median,
    Min,
    Max,
}

/// n-ary overlap functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapKind {
    /// Harmonic mean; 0 as soon as any input is 0.
    Hm,
    /// `sin(π/2 · Π x_i)`.
    So,
    /// Geometric mean.
    Gm,
    Min,
}

pub fn classical(x: &UnitVector, kind: ClassicalKind) -> f64 {
    with_sorted(x.as_slice(), |s| classical_sorted(s, kind))
}

pub fn overlap(x: &UnitVector, kind: OverlapKind) -> f64 {
    overlap_values(x.as_slice(), kind)
}

pub(crate) fn classical_sorted(sorted: &[f64], kind: ClassicalKind) -> f64 {
    let n = sorted.len();
    match kind {
        ClassicalKind::Mean => sorted.iter().sum::<f64>() / n as f64,
        ClassicalKind::Median => {
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
        ClassicalKind::Min => sorted[0],
        ClassicalKind::Max => sorted[n - 1],
    }
}

pub(crate) fn overlap_values(values: &[f64], kind: OverlapKind) -> f64 {
    let n = values.len() as f64;
    match kind {
        OverlapKind::Hm => {
            if values.contains(&0.0) {
                0.0
            } else {
                n / values.iter().map(|v| 1.0 / v).sum::<f64>()
            }
        }
        OverlapKind::So => (FRAC_PI_2 * values.iter().product::<f64>()).sin(),
        OverlapKind::Gm => values.iter().product::<f64>().powf(1.0 / n),
        OverlapKind::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
    }
}
