use serde::{Deserialize, Serialize};

use super::{EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItrInput {
    /// Number of target classes `N`.
    pub n_classes: usize,
    /// Accuracy `P`.
    pub accuracy: f64,
    /// Observations (trials) `S`.
    pub observations: f64,
    /// Total time `T` in minutes.
    pub minutes: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItrOutput {
    pub bits_per_trial: f64,
    pub trials_per_minute: f64,
    pub bits_per_minute: f64,
}

fn xlog2(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Wolpaw information transfer rate:
/// `B = log2 N + P log2 P + (1-P) log2((1-P)/(N-1))`, `ITR = B · S/T`.
/// Zero-probability terms take their limit 0.
pub fn itr(input: &ItrInput) -> Result<ItrOutput> {
    let ItrInput {
        n_classes,
        accuracy: p,
        observations,
        minutes,
    } = *input;
    if n_classes < 2 {
        return Err(EvalError::InvalidInput(format!("N must be >= 2, got {n_classes}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(EvalError::InvalidInput(format!("P must lie in [0, 1], got {p}")));
    }
    if !(minutes > 0.0) {
        return Err(EvalError::InvalidInput(format!("T must be positive, got {minutes}")));
    }
    if !(observations >= 0.0) {
        return Err(EvalError::InvalidInput(format!("S must be nonnegative, got {observations}")));
    }
    let n = n_classes as f64;
    let q = 1.0 - p;
    // (1-P) log2((1-P)/(N-1)) = xlog2(1-P) - (1-P) log2(N-1)
    let bits = n.log2() + xlog2(p) + xlog2(q) - q * (n - 1.0).log2();
    let rate = observations / minutes;
    Ok(ItrOutput {
        bits_per_trial: bits,
        trials_per_minute: rate,
        bits_per_minute: bits * rate,
    })
}

/// Joint correctness counts of two classifiers over the same trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub n11: usize,
    pub n10: usize,
    pub n01: usize,
    pub n00: usize,
}

impl ContingencyCounts {
    pub fn from_correctness(a: &[bool], b: &[bool]) -> Self {
        let mut c = Self::default();
        for (&x, &y) in a.iter().zip(b) {
            match (x, y) {
                (true, true) => c.n11 += 1,
                (true, false) => c.n10 += 1,
                (false, true) => c.n01 += 1,
                (false, false) => c.n00 += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    /// Yule's Q; 0 when the denominator vanishes.
    pub fn q(&self) -> f64 {
        let agree = (self.n11 * self.n00) as f64;
        let disagree = (self.n01 * self.n10) as f64;
        let den = agree + disagree;
        if den == 0.0 {
            0.0
        } else {
            (agree - disagree) / den
        }
    }
}

/// Mean pairwise Q-statistic of an ensemble's correctness vectors.
pub fn q_statistic(outputs: &[Vec<bool>]) -> Result<f64> {
    if outputs.len() < 2 {
        return Err(EvalError::InvalidInput(format!(
            "Q-statistic needs at least 2 classifiers, got {}",
            outputs.len()
        )));
    }
    let n = outputs[0].len();
    if outputs.iter().any(|o| o.len() != n) {
        return Err(EvalError::InvalidInput("correctness vectors differ in length".into()));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            sum += ContingencyCounts::from_correctness(&outputs[i], &outputs[j]).q();
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: usize, p: f64) -> f64 {
        itr(&ItrInput {
            n_classes: n,
            accuracy: p,
            observations: 60.0,
            minutes: 1.0,
        })
        .unwrap()
        .bits_per_trial
    }

    #[test]
    fn itr_anchors() {
        assert_eq!(b(2, 1.0), 1.0);
        assert_eq!(b(2, 0.5), 0.0);
        assert_eq!(b(4, 1.0), 2.0);
        // Direct formula at an interior point.
        let (n, p): (f64, f64) = (4.0, 0.7);
        let direct = n.log2() + p * p.log2() + (1.0 - p) * ((1.0 - p) / (n - 1.0)).log2();
        assert!((b(4, 0.7) - direct).abs() < 1e-12);
        let out = itr(&ItrInput {
            n_classes: 2,
            accuracy: 1.0,
            observations: 30.0,
            minutes: 2.0,
        })
        .unwrap();
        assert_eq!(out.bits_per_minute, 15.0);
        assert!(itr(&ItrInput {
            n_classes: 2,
            accuracy: 1.0,
            observations: 30.0,
            minutes: 0.0
        })
        .is_err());
    }

    #[test]
    fn q_anchors() {
        let a = vec![true, true, false, true, false];
        assert_eq!(q_statistic(&[a.clone(), a.clone()]).unwrap(), 1.0);
        let not_a: Vec<bool> = a.iter().map(|x| !x).collect();
        assert_eq!(q_statistic(&[a.clone(), not_a]).unwrap(), -1.0);
        // All correct: zero denominator.
        assert_eq!(q_statistic(&[vec![true; 4], vec![true; 4]]).unwrap(), 0.0);
        assert!(q_statistic(&[a]).is_err());
        let c = ContingencyCounts::from_correctness(&[true, false, true], &[true, true, false]);
        assert_eq!(c, ContingencyCounts { n11: 1, n10: 1, n01: 1, n00: 0 });
        assert_eq!(c.total(), 3);
    }
}
