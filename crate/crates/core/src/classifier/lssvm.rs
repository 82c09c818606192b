use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::{gram_matrix, kernel_eval, KernelParams};
use crate::error::{Error, Result};

/// Trained binary LS-SVM.
///
/// Decision function: `score(x) = sum_i alphas[i] * K(x, support_inputs[i]) + bias`.
/// The label sign is folded into `alphas`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsSvmModel {
    pub support_inputs: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelParams,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub score: f64,
    /// `+1` or `-1`; a zero score maps to `+1`.
    pub label: i8,
}

/// The `(n + 1) x (n + 1)` saddle-point system
///
/// ```text
/// [ 0   1^T         ] [ b     ]   [ 0 ]
/// [ 1   K + I/gamma ] [ alpha ] = [ y ]
/// ```
///
/// returned as a row-major matrix and right-hand side.
pub fn lssvm_system(
    inputs: &[Vec<f64>],
    labels: &[f64],
    kernel: &KernelParams,
    gamma: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(inputs, labels, kernel, gamma)?;
    let gram = gram_matrix(inputs);
    Ok(system_from_gram(&gram, inputs.len(), labels, kernel, gamma))
}

fn system_from_gram(gram: &[f64], n: usize, labels: &[f64], kernel: &KernelParams, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let m = n + 1;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        a[i + 1] = 1.0;
        a[(i + 1) * m] = 1.0;
        for j in 0..n {
            a[(i + 1) * m + j + 1] = kernel.apply(gram[i * n + j]);
        }
        a[(i + 1) * m + i + 1] += 1.0 / gamma;
    }
    let mut rhs = vec![0.0; m];
    rhs[1..].copy_from_slice(labels);
    (a, rhs)
}

fn check_inputs(inputs: &[Vec<f64>], labels: &[f64], kernel: &KernelParams, gamma: f64) -> Result<()> {
    kernel.validate()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidConfig(format!("gamma {gamma} must be positive")));
    }
    if inputs.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), actual: labels.len() });
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidConfig("labels must be +1 or -1".into()));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(Error::OneClassInput);
    }
    let dim = inputs[0].len();
    if let Some(bad) = inputs.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
    }
    if inputs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("training inputs must be finite".into()));
    }
    Ok(())
}

/// Solves the LS-SVM system by LU with partial pivoting, plus one round of
/// iterative refinement.
pub fn lssvm_train(inputs: &[Vec<f64>], labels: &[f64], kernel: &KernelParams, gamma: f64) -> Result<LsSvmModel> {
    check_inputs(inputs, labels, kernel, gamma)?;
    let gram = gram_matrix(inputs);
    train_from_gram(inputs, &gram, labels, kernel, gamma)
}

/// Training from a precomputed inner-product matrix of `inputs`.
pub(crate) fn train_from_gram(
    inputs: &[Vec<f64>],
    gram: &[f64],
    labels: &[f64],
    kernel: &KernelParams,
    gamma: f64,
) -> Result<LsSvmModel> {
    check_inputs(inputs, labels, kernel, gamma)?;
    let n = inputs.len();
    let (a, rhs) = system_from_gram(gram, n, labels, kernel, gamma);
    let m = n + 1;
    let matrix = DMatrix::from_row_slice(m, m, &a);
    let b = DVector::from_vec(rhs);
    let lu = matrix.clone().lu();
    let mut x = lu.solve(&b).ok_or(Error::SingularSystem)?;
    let r = &b - &matrix * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let residual = (&b - &matrix * &x).norm() / b.norm();
    if !residual.is_finite() || residual > 1e-8 || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(LsSvmModel {
        support_inputs: inputs.to_vec(),
        alphas: x.iter().skip(1).copied().collect(),
        bias: x[0],
        kernel: *kernel,
        gamma,
    })
}

pub fn lssvm_decide(model: &LsSvmModel, x: &[f64]) -> Result<Decision> {
    let dim = model.support_inputs.first().map_or(0, Vec::len);
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: x.len() });
    }
    let mut score = model.bias;
    for (sv, a) in model.support_inputs.iter().zip(&model.alphas) {
        score += a * kernel_eval(sv, x, &model.kernel)?;
    }
    Ok(Decision { score, label: if score >= 0.0 { 1 } else { -1 } })
}

impl LsSvmModel {
    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        lssvm_decide(self, x)
    }

    pub fn dimension(&self) -> usize {
        self.support_inputs.first().map_or(0, Vec::len)
    }

    /// Number of misclassified points in `(inputs, labels)`.
    pub fn errors(&self, inputs: &[Vec<f64>], labels: &[f64]) -> Result<usize> {
        let mut wrong = 0;
        for (x, &y) in inputs.iter().zip(labels) {
            if f64::from(self.decide(x)?.label) != y {
                wrong += 1;
            }
        }
        Ok(wrong)
    }
}
