use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial kernel `(scale * <a, b> + offset) ^ degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub degree: u32,
    pub offset: f64,
    pub scale: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { degree: 3, offset: 1.0, scale: 1.0 }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 || !(self.scale > 0.0) || !self.offset.is_finite() || !self.scale.is_finite() {
            return Err(Error::InvalidConfig(format!("invalid kernel {self:?}")));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, dot: f64) -> f64 {
        (self.scale * dot + self.offset).powi(self.degree as i32)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn kernel_eval(a: &[f64], b: &[f64], params: &KernelParams) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(params.apply(dot(a, b)))
}

/// Symmetric matrix of pairwise inner products, row-major.
pub fn gram_matrix(inputs: &[Vec<f64>]) -> Vec<f64> {
    let n = inputs.len();
    let upper: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|i| (i..n).map(|j| dot(&inputs[i], &inputs[j])).collect()).collect();
    let mut g = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Kernel matrix of `inputs`, row-major and exactly symmetric.
pub fn kernel_matrix(inputs: &[Vec<f64>], params: &KernelParams) -> Result<Vec<f64>> {
    if let Some(first) = inputs.first() {
        if let Some(bad) = inputs.iter().find(|x| x.len() != first.len()) {
            return Err(Error::DimensionMismatch { expected: first.len(), actual: bad.len() });
        }
    }
    Ok(gram_matrix(inputs).into_iter().map(|d| params.apply(d)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let p = KernelParams { degree: 3, offset: 1.0, scale: 1.0 };
        assert_eq!(kernel_eval(&[0.0, 0.0], &[0.0, 0.0], &p).unwrap(), 1.0);
        let lin = KernelParams { degree: 1, offset: 0.0, scale: 1.0 };
        assert_eq!(kernel_eval(&[1.0, 2.0, 3.0], &[4.0, -5.0, 6.0], &lin).unwrap(), 12.0);
        assert!(kernel_eval(&[1.0], &[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn matches_high_precision_recomputation() {
        // Compensated (Kahan) dot product and repeated multiplication as oracle.
        let a: Vec<f64> = (0..257).map(|i| ((i * 37 % 101) as f64 / 50.0 - 1.0) * 0.3).collect();
        let b: Vec<f64> = (0..257).map(|i| ((i * 53 % 97) as f64 / 48.0 - 1.0) * 0.2).collect();
        let p = KernelParams { degree: 3, offset: 1.0, scale: 0.05 };
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for (x, y) in a.iter().zip(&b) {
            let term = x * y - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
        }
        let base = p.scale * sum + p.offset;
        let oracle = base * base * base;
        let got = kernel_eval(&a, &b, &p).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs());
    }

    #[test]
    fn kernel_matrix_is_symmetric() {
        let xs: Vec<Vec<f64>> = (0..7).map(|i| (0..5).map(|j| ((i * 5 + j) as f64).sin()).collect()).collect();
        let k = kernel_matrix(&xs, &KernelParams::default()).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(k[i * 7 + j], k[j * 7 + i]);
            }
        }
    }
}
