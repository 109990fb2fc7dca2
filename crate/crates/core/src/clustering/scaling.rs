use serde::{Deserialize, Serialize};

use super::{check_points, ClusterError};

/// Per-dimension z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaling {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Fits means and population standard deviations. A dimension whose
    /// spread is negligible relative to its magnitude is recorded with
    /// standard deviation 1, so it scales to zeros.
    pub fn fit(data: &[Vec<f64>]) -> Result<Self, ClusterError> {
        let dim = check_points(data)?;
        let n = data.len() as f64;
        let mut mean = vec![0.0; dim];
        for p in data {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);

        let mut var = vec![0.0; dim];
        for p in data {
            for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                if sd <= 1e-12 * m.abs().max(1.0) {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, scaled: &[f64]) -> Vec<f64> {
        scaled
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

/// Standardizes `data`, returning the scaled points and the fitted scaling.
pub fn standardize(data: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Scaling), ClusterError> {
    let scaling = Scaling::fit(data)?;
    let scaled = data.iter().map(|p| scaling.apply(p)).collect();
    Ok((scaled, scaling))
}

/// Raw points together with their standardized images.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    raw: Vec<Vec<f64>>,
    scaled: Vec<Vec<f64>>,
    scaling: Scaling,
}

impl Dataset {
    pub fn standardized(raw: Vec<Vec<f64>>) -> Result<Self, ClusterError> {
        let (scaled, scaling) = standardize(&raw)?;
        Ok(Self {
            raw,
            scaled,
            scaling,
        })
    }

    /// Uses the raw coordinates as-is (identity scaling).
    pub fn unscaled(raw: Vec<Vec<f64>>) -> Result<Self, ClusterError> {
        Self::with_scaling(raw, None)
    }

    /// Applies a previously fitted scaling, or the identity when `None`.
    pub fn with_scaling(
        raw: Vec<Vec<f64>>,
        scaling: Option<Scaling>,
    ) -> Result<Self, ClusterError> {
        let dim = check_points(&raw)?;
        let scaling = scaling.unwrap_or_else(|| Scaling::identity(dim));
        if scaling.dim() != dim {
            return Err(ClusterError::Dimension {
                index: 0,
                expected: scaling.dim(),
                found: dim,
            });
        }
        let scaled = raw.iter().map(|p| scaling.apply(p)).collect();
        Ok(Self {
            raw,
            scaled,
            scaling,
        })
    }

    pub fn raw(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn scaled(&self) -> &[Vec<f64>] {
        &self.scaled
    }

    pub fn scaling(&self) -> &Scaling {
        &self.scaling
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_standardization() {
        let (scaled, scaling) = standardize(&[vec![0.0, 5.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(scaled[0][0], -1.0);
        assert_eq!(scaled[1][0], 1.0);
        assert_eq!(scaling.std, vec![1.0, 1.0]);
        assert_eq!(scaling.mean, vec![1.0, 5.0]);
    }

    #[test]
    fn constant_dimension_scales_to_zero() {
        let data = vec![vec![0.1], vec![0.1], vec![0.1]];
        let (scaled, scaling) = standardize(&data).unwrap();
        assert_eq!(scaling.std, vec![1.0]);
        assert!(scaled.iter().all(|p| p[0].abs() < 1e-15));
    }

    #[test]
    fn round_trip() {
        let data = vec![
            vec![1.87, 162.85, 17.67, 234.666, 6.40],
            vec![1.97, 186.97, 16.75, 226.01, 5.839],
            vec![1.359, 114.589, 18.28, 168.88, 4.95],
        ];
        let (scaled, scaling) = standardize(&data).unwrap();
        for (raw, s) in data.iter().zip(&scaled) {
            for (a, b) in raw.iter().zip(scaling.invert(s)) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
        for d in 0..5 {
            let m: f64 = scaled.iter().map(|p| p[d]).sum::<f64>() / 3.0;
            assert!(m.abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_ragged_input() {
        assert!(matches!(standardize(&[]), Err(ClusterError::Empty)));
        assert!(matches!(
            standardize(&[vec![1.0], vec![1.0, 2.0]]),
            Err(ClusterError::Dimension { index: 1, .. })
        ));
    }
}
