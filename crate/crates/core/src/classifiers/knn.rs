use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::util::row_major;

use super::Dataset;

/// Euclidean k-nearest-neighbours with vote-fraction scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    #[serde(with = "row_major")]
    pub x: DMatrix<f64>,
    pub y: Vec<usize>,
    pub k: usize,
    pub n_classes: usize,
}

impl KnnModel {
    pub fn fit(data: &Dataset, k: usize) -> Self {
        Self {
            x: data.x.clone(),
            y: data.y.clone(),
            k: k.clamp(1, data.len()),
            n_classes: data.n_classes,
        }
    }

    pub fn features(&self) -> usize {
        self.x.ncols()
    }

    /// Vote fractions among the `k` nearest training points (distance ties
    /// resolved by training index). When several classes share the top vote
    /// count, the nearest neighbour among them takes one extra vote from the
    /// others' share, so the argmax is unique and points at that class.
    pub(super) fn predict(&self, q: &[f64]) -> Vec<f64> {
        let mut order: Vec<(f64, usize)> = self
            .x
            .row_iter()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &order[..self.k];
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in nearest {
            votes[self.y[i]] += 1;
        }
        let top = *votes.iter().max().unwrap();
        if votes.iter().filter(|&&v| v == top).count() > 1 {
            let winner = nearest.iter().map(|&(_, i)| self.y[i]).find(|&c| votes[c] == top).unwrap();
            let kf = self.k as f64;
            let mut scores: Vec<f64> = votes.iter().map(|&v| v as f64 / kf).collect();
            // Break the tie by a half vote, taken evenly from the other tied classes.
            let tied: Vec<usize> = (0..self.n_classes).filter(|&c| votes[c] == top && c != winner).collect();
            let bonus = 0.5 / kf;
            scores[winner] += bonus;
            for c in &tied {
                scores[*c] -= bonus / tied.len() as f64;
            }
            return scores;
        }
        votes.iter().map(|&v| v as f64 / self.k as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Dataset {
        let rows: Vec<Vec<f64>> = [0.0, 0.1, 0.2, 1.0, 1.1, 1.2].iter().map(|&v| vec![v]).collect();
        Dataset::from_rows(&rows, vec![0, 0, 0, 1, 1, 1], 2).unwrap()
    }

    #[test]
    fn k1_returns_self_label() {
        let data = line();
        let m = KnnModel::fit(&data, 1);
        for (i, row) in data.x.row_iter().enumerate() {
            let s = m.predict(&[row[0]]);
            assert_eq!(s[data.y[i]], 1.0);
        }
    }

    #[test]
    fn vote_fractions() {
        let m = KnnModel::fit(&line(), 5);
        let s = m.predict(&[0.05]);
        assert_eq!(s, vec![0.6, 0.4]);
    }

    #[test]
    fn ties_go_to_the_nearest_class() {
        let m = KnnModel::fit(&line(), 4);
        // Two neighbours from each class; the closest is class 1.
        let s = m.predict(&[0.61]);
        assert!(s[1] > s[0]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_is_capped_at_training_size() {
        assert_eq!(KnnModel::fit(&line(), 50).k, 6);
    }
}
