use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the coordinate sum of a weighting.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A point of the standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Entries within [`SUM_TOLERANCE`] of `[0,1]` are clamped into it.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no coordinates".into()));
        }
        let range = -SUM_TOLERANCE..=1.0 + SUM_TOLERANCE;
        if let Some(w) = weights.iter().find(|w| !range.contains(*w)) {
            return Err(Error::InvalidWeights(format!("entry {w} outside [0,1]")));
        }
        weights.iter_mut().for_each(|w| *w = w.clamp(0.0, 1.0));
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("entries sum to {sum}")));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidWeights("no coordinates".into()));
        }
        Ok(WeightVector(vec![1.0 / len as f64; len]))
    }

    /// The simplex vertex `e_i`.
    pub fn vertex(len: usize, i: usize) -> Result<Self> {
        if i >= len {
            return Err(Error::InvalidWeights(format!("vertex {i} of a {len}-simplex")));
        }
        let mut w = vec![0.0; len];
        w[i] = 1.0;
        Ok(WeightVector(w))
    }

    /// Scales a nonnegative vector onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if raw.iter().any(|&w| w < 0.0 || !w.is_finite()) || sum <= 0.0 {
            return Err(Error::InvalidWeights("cannot normalize".into()));
        }
        Ok(WeightVector(raw.iter().map(|w| w / sum).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_to_simplex(&[0.9, 0.8, -3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[0] - 0.55).abs() < 1e-12 && (p[1] - 0.45).abs() < 1e-12);
        assert_eq!(p[2], 0.0);
        let q = project_to_simplex(&[0.2, 0.3, 0.5]);
        assert!((q[2] - 0.5).abs() < 1e-12);
    }
}
