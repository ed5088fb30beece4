use super::{AggregationError, Result, UnitVector};

/// Weighting vector derived from the piecewise-linear quantifier `Q_{a,b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OwaWeights {
    pub a: f64,
    pub b: f64,
    pub weights: Vec<f64>,
}

/// `Q_{a,b}(r)`: 0 below `a`, 1 above `b`, linear in between.
pub fn quantifier(a: f64, b: f64, r: f64) -> f64 {
    if r < a {
        0.0
    } else if r > b {
        1.0
    } else {
        (r - a) / (b - a)
    }
}

pub fn owa_weights(a: f64, b: f64, n: usize) -> Result<OwaWeights> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
        return Err(AggregationError::InvalidQuantifier { a, b });
    }
    if n == 0 {
        return Err(AggregationError::InvalidArity);
    }
    let weights = (1..=n).map(|i| owa_weight(a, b, i, n)).collect();
    Ok(OwaWeights { a, b, weights })
}

/// `w_i = Q(i/n) − Q((i−1)/n)` for the 1-based rank `i`.
pub(crate) fn owa_weight(a: f64, b: f64, i: usize, n: usize) -> f64 {
    let n = n as f64;
    quantifier(a, b, i as f64 / n) - quantifier(a, b, (i - 1) as f64 / n)
}

/// `Σ w_i · x_γ(i)` with `γ` sorting `x` in descending order.
pub fn owa(x: &UnitVector, w: &OwaWeights) -> Result<f64> {
    if x.len() != w.weights.len() {
        return Err(AggregationError::ArityMismatch {
            input: x.len(),
            expected: w.weights.len(),
        });
    }
    let mut desc = x.as_slice().to_vec();
    desc.sort_by(|p, q| q.total_cmp(p));
    Ok(desc.iter().zip(&w.weights).map(|(v, w)| v * w).sum())
}

/// OWA over an ascending slice, weights computed on the fly.
pub(crate) fn owa_sorted(sorted: &[f64], a: f64, b: f64) -> f64 {
    let n = sorted.len();
    sorted
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &v)| v * owa_weight(a, b, i + 1, n))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weight_examples() {
        let w = owa_weights(0.1, 0.5, 3).unwrap();
        let q1 = (1.0 / 3.0 - 0.1) / 0.4;
        assert_abs_diff_eq!(w.weights[0], q1, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weights[0], 0.583_333_333_333_333, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weights[1], 1.0 - q1, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weights[2], 0.0, epsilon = 1e-12);

        assert_eq!(owa_weights(0.0, 1.0, 2).unwrap().weights, vec![0.5, 0.5]);
        let w2 = owa_weights(0.5, 1.0, 2).unwrap();
        assert_abs_diff_eq!(w2.weights[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w2.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        for (a, b) in [(0.1, 0.5), (0.5, 1.0), (0.3, 0.8), (0.0, 1.0), (0.0, 0.01)] {
            for n in 1..=20 {
                let w = owa_weights(a, b, n).unwrap();
                assert_abs_diff_eq!(w.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                assert!(w.weights.iter().all(|w| (0.0..=1.0).contains(w)));
            }
        }
    }

    #[test]
    fn invalid_quantifiers_are_rejected() {
        assert!(matches!(
            owa_weights(0.5, 0.5, 3),
            Err(AggregationError::InvalidQuantifier { .. })
        ));
        assert!(owa_weights(0.6, 0.2, 3).is_err());
        assert!(owa_weights(-0.1, 0.2, 3).is_err());
        assert!(owa_weights(0.1, 0.2, 0).is_err());
    }

    #[test]
    fn owa_examples() {
        let x = UnitVector::new(vec![0.2, 0.5, 0.9]).unwrap();
        let w1 = owa_weights(0.1, 0.5, 3).unwrap();
        let expected = 0.9 * w1.weights[0] + 0.5 * w1.weights[1];
        assert_abs_diff_eq!(owa(&x, &w1).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.733_333_333_333_333, epsilon = 1e-12);

        let uniform = OwaWeights {
            a: 0.0,
            b: 1.0,
            weights: vec![1.0 / 3.0; 3],
        };
        assert_abs_diff_eq!(owa(&x, &uniform).unwrap(), 1.6 / 3.0, epsilon = 1e-12);
        let top = OwaWeights {
            a: 0.0,
            b: 1e-9,
            weights: vec![1.0, 0.0, 0.0],
        };
        assert_eq!(owa(&x, &top).unwrap(), 0.9);
        assert!(owa(&UnitVector::new(vec![0.1]).unwrap(), &w1).is_err());
    }

    #[test]
    fn sorted_kernel_matches_public_op() {
        let x = UnitVector::new(vec![0.7, 0.1, 0.4, 0.95]).unwrap();
        let mut asc = x.as_slice().to_vec();
        asc.sort_by(f64::total_cmp);
        let w = owa_weights(0.3, 0.8, 4).unwrap();
        assert_abs_diff_eq!(owa_sorted(&asc, 0.3, 0.8), owa(&x, &w).unwrap(), epsilon = 1e-15);
    }
}
