//! Choquet and Sugeno integrals and their t-norm generalizations.
//!
//! The `*_sorted` kernels take an ascending slice plus a closure returning
//! `m(A_i)` for each 0-based rank, which lets [`super::Aggregation`] run
//! them on stack buffers with the cardinal measure.

use super::id::BinaryFusion;
use super::{FuzzyMeasure, Result, SortedInput, UnitVector};

/// Hamacher product: `xy / (x + y - xy)`, and 0 at the origin.
pub fn hamacher_tnorm(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        0.0
    } else {
        x * y / (x + y - x * y)
    }
}

/// Discrete Choquet integral with respect to `m`.
pub fn choquet(x: &UnitVector, m: &FuzzyMeasure) -> Result<f64> {
    let s = SortedInput::new(x, m)?;
    Ok(choquet_sorted(&s.sorted, |i| s.tail_measures[i]))
}

/// Choquet integral with the product replaced by the Hamacher t-norm,
/// clamped to `[0, 1]`.
pub fn cf_hamacher(x: &UnitVector, m: &FuzzyMeasure) -> Result<f64> {
    let s = SortedInput::new(x, m)?;
    Ok(cf_sorted(&s.sorted, |i| s.tail_measures[i]))
}

/// `Σ F1(x_σ(i), m(A_i)) − F2(x_σ(i−1), m(A_i))`, clamped to `[0, 1]`.
pub fn cf1f2(x: &UnitVector, m: &FuzzyMeasure, f1: BinaryFusion, f2: BinaryFusion) -> Result<f64> {
    let s = SortedInput::new(x, m)?;
    Ok(cf1f2_sorted(&s.sorted, |i| s.tail_measures[i], f1, f2))
}

/// Discrete Sugeno integral: `max_i min(x_σ(i), m(A_i))`.
pub fn sugeno(x: &UnitVector, m: &FuzzyMeasure) -> Result<f64> {
    let s = SortedInput::new(x, m)?;
    Ok(sugeno_sorted(&s.sorted, |i| s.tail_measures[i], f64::min))
}

/// Sugeno integral with the Hamacher t-norm in place of the minimum.
pub fn sugeno_hamacher(x: &UnitVector, m: &FuzzyMeasure) -> Result<f64> {
    let s = SortedInput::new(x, m)?;
    Ok(sugeno_sorted(&s.sorted, |i| s.tail_measures[i], hamacher_tnorm))
}

/// Sugeno integral with the product t-norm in place of the minimum.
pub fn sugeno_f(x: &UnitVector, m: &FuzzyMeasure) -> Result<f64> {
    let s = SortedInput::new(x, m)?;
    Ok(sugeno_sorted(&s.sorted, |i| s.tail_measures[i], |a, b| a * b))
}

pub(crate) fn choquet_sorted(sorted: &[f64], tail: impl Fn(usize) -> f64) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        acc += (v - prev) * tail(i);
        prev = v;
    }
    acc
}

pub(crate) fn cf_sorted(sorted: &[f64], tail: impl Fn(usize) -> f64) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        acc += hamacher_tnorm(v - prev, tail(i));
        prev = v;
    }
    acc.clamp(0.0, 1.0)
}

pub(crate) fn cf1f2_sorted(
    sorted: &[f64],
    tail: impl Fn(usize) -> f64,
    f1: BinaryFusion,
    f2: BinaryFusion,
) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        let m = tail(i);
        acc += f1.apply(v, m) - f2.apply(prev, m);
        prev = v;
    }
    acc.clamp(0.0, 1.0)
}

pub(crate) fn sugeno_sorted(
    sorted: &[f64],
    tail: impl Fn(usize) -> f64,
    tnorm: impl Fn(f64, f64) -> f64,
) -> f64 {
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| tnorm(v, tail(i)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::cardinal_measure;
    use approx::assert_abs_diff_eq;

    fn x3() -> (UnitVector, FuzzyMeasure) {
        (
            UnitVector::new(vec![0.2, 0.5, 0.9]).unwrap(),
            cardinal_measure(3).unwrap(),
        )
    }

    #[test]
    fn hamacher_examples() {
        assert_eq!(hamacher_tnorm(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(hamacher_tnorm(0.5, 1.0), 0.5, epsilon = 1e-15);
        assert_eq!(hamacher_tnorm(1.0, 1.0), 1.0);
    }

    #[test]
    fn choquet_examples() {
        let (x, m) = x3();
        let expected = 0.2 * 1.0 + 0.3 * (2.0 / 3.0) + 0.4 * (1.0 / 3.0);
        assert_abs_diff_eq!(choquet(&x, &m).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.533_333_333_333_333, epsilon = 1e-12);
        for n in 1..=6 {
            let m = cardinal_measure(n).unwrap();
            for c in [0.0, 0.37, 1.0] {
                let x = UnitVector::new(vec![c; n]).unwrap();
                assert_abs_diff_eq!(choquet(&x, &m).unwrap(), c, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn cf_examples() {
        let (x, m) = x3();
        // 0.2 + T_H(0.3, 2/3) + T_H(0.4, 1/3)
        let expected = 0.2 + 0.2 / (0.3 + 2.0 / 3.0 - 0.2) + (0.4 / 3.0) / (0.4 + 1.0 / 3.0 - 0.4 / 3.0);
        assert_abs_diff_eq!(expected, 0.683_091_787_439_613_5, epsilon = 1e-12);
        assert_abs_diff_eq!(cf_hamacher(&x, &m).unwrap(), expected, epsilon = 1e-12);

        let zeros = UnitVector::new(vec![0.0; 4]).unwrap();
        assert_eq!(cf_hamacher(&zeros, &cardinal_measure(4).unwrap()).unwrap(), 0.0);
        for n in 1..=6 {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            let got = cf_hamacher(&UnitVector::new(v).unwrap(), &cardinal_measure(n).unwrap()).unwrap();
            assert_abs_diff_eq!(got, 1.0 / n as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn cf1f2_examples() {
        let (x, m) = x3();
        let product = cf1f2(&x, &m, BinaryFusion::Product, BinaryFusion::Product).unwrap();
        assert_abs_diff_eq!(product, choquet(&x, &m).unwrap(), epsilon = 1e-15);
        let minmin = cf1f2(&x, &m, BinaryFusion::Minimum, BinaryFusion::Minimum).unwrap();
        assert_abs_diff_eq!(minmin, 0.5, epsilon = 1e-12);
        let zeros = UnitVector::new(vec![0.0; 3]).unwrap();
        for f1 in BinaryFusion::ALL {
            for f2 in BinaryFusion::ALL {
                assert_eq!(cf1f2(&zeros, &m, f1, f2).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn sugeno_family_examples() {
        let (x, m) = x3();
        assert_abs_diff_eq!(sugeno(&x, &m).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sugeno_hamacher(&x, &m).unwrap(), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(sugeno_f(&x, &m).unwrap(), 1.0 / 3.0, epsilon = 1e-12);

        let ones = UnitVector::new(vec![1.0; 5]).unwrap();
        let zeros = UnitVector::new(vec![0.0; 5]).unwrap();
        let m5 = cardinal_measure(5).unwrap();
        for f in [sugeno, sugeno_hamacher, sugeno_f] {
            assert_eq!(f(&ones, &m5).unwrap(), 1.0);
            assert_eq!(f(&zeros, &m5).unwrap(), 0.0);
        }
        let single = UnitVector::new(vec![0.42]).unwrap();
        assert_abs_diff_eq!(
            sugeno_hamacher(&single, &cardinal_measure(1).unwrap()).unwrap(),
            0.42,
            epsilon = 1e-15
        );
        let c = UnitVector::new(vec![0.3; 4]).unwrap();
        assert_eq!(sugeno(&c, &cardinal_measure(4).unwrap()).unwrap(), 0.3);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let x = UnitVector::new(vec![0.1, 0.2]).unwrap();
        let m = cardinal_measure(3).unwrap();
        assert!(choquet(&x, &m).is_err());
        assert!(sugeno(&x, &m).is_err());
        assert!(cf_hamacher(&x, &m).is_err());
    }
}
