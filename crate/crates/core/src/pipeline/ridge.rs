//! Closed-form ridge regression for readout fitting.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::SimError;

use super::PipelineError;

/// A fitted linear readout: score = <weights, x> + bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
}

impl ReadoutModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

/// Solves the centered normal equations (Xc'Xc + lambda I) w = Xc'yc by
/// Cholesky factorization, with binary labels mapped to -1/+1 and the bias
/// recovered from the means. Deterministic; requires lambda > 0.
pub fn fit_ridge(
    train_x: &[Vec<f64>],
    train_y: &[u8],
    lambda: f64,
) -> Result<ReadoutModel, PipelineError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(PipelineError::SingularSystem);
    }
    let first = train_x.first().ok_or_else(|| {
        PipelineError::Sim(SimError::InvalidParams(
            "ridge fitting needs at least one training row".into(),
        ))
    })?;
    let dim = first.len();
    if dim == 0 {
        return Err(PipelineError::Sim(SimError::InvalidParams(
            "ridge features must be nonempty".into(),
        )));
    }
    if train_y.len() != train_x.len() {
        return Err(PipelineError::DimensionMismatch {
            line: 0,
            expected: train_x.len(),
            got: train_y.len(),
        });
    }
    for row in train_x {
        if row.len() != dim {
            return Err(PipelineError::DimensionMismatch {
                line: 0,
                expected: dim,
                got: row.len(),
            });
        }
    }
    if train_y.iter().any(|&y| y > 1) {
        return Err(PipelineError::Sim(SimError::InvalidParams(
            "ridge labels must be 0 or 1".into(),
        )));
    }

    let n = train_x.len() as f64;
    let y: Vec<f64> = train_y
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let x_mean: Vec<f64> = (0..dim)
        .map(|j| train_x.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let y_mean = y.iter().sum::<f64>() / n;

    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for (row, &yi) in train_x.iter().zip(&y) {
        let centered: Vec<f64> = row.iter().zip(&x_mean).map(|(v, m)| v - m).collect();
        for (j, &cj) in centered.iter().enumerate() {
            rhs[j] += cj * (yi - y_mean);
            for (k, &ck) in centered.iter().enumerate() {
                gram[(j, k)] += cj * ck;
            }
        }
    }
    for j in 0..dim {
        gram[(j, j)] += lambda;
    }

    let chol = Cholesky::new(gram).ok_or(PipelineError::SingularSystem)?;
    let w = chol.solve(&rhs);
    let bias = y_mean - w.iter().zip(&x_mean).map(|(wj, mj)| wj * mj).sum::<f64>();
    Ok(ReadoutModel {
        weights: w.iter().copied().collect(),
        bias,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn two_point_fit_approaches_the_exact_interpolant() {
        let x = vec![vec![1.0], vec![-1.0]];
        let y = vec![1u8, 0u8];
        let model = fit_ridge(&x, &y, 1e-9).unwrap();
        assert!((model.weights[0] - 1.0).abs() < 1e-6);
        assert!(model.bias.abs() < 1e-9);
    }

    #[test]
    fn heavy_regularization_collapses_to_the_label_mean() {
        let x = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.25, -2.0]];
        let y = vec![1u8, 0u8, 1u8];
        let model = fit_ridge(&x, &y, 1e9).unwrap();
        assert!(model.weights.iter().all(|w| w.abs() < 1e-6));
        assert!((model.bias - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn nonpositive_lambda_is_rejected() {
        let x = vec![vec![1.0], vec![-1.0]];
        let y = vec![1u8, 0u8];
        assert!(matches!(
            fit_ridge(&x, &y, 0.0),
            Err(PipelineError::SingularSystem)
        ));
        assert!(matches!(
            fit_ridge(&x, &y, -1.0),
            Err(PipelineError::SingularSystem)
        ));
    }

    /// Gauss-Jordan elimination over the same centered system, kept free of
    /// matrix libraries so it can disagree with the Cholesky path.
    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            let p = a[col][col];
            for v in a[col].iter_mut() {
                *v /= p;
            }
            b[col] /= p;
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[row][col];
                if factor == 0.0 {
                    continue;
                }
                let pivot_row = a[col].clone();
                for (entry, pivot) in a[row].iter_mut().zip(&pivot_row) {
                    *entry -= factor * pivot;
                }
                b[row] -= factor * b[col];
            }
        }
        b
    }

    #[test]
    fn matches_an_elimination_solve_on_random_systems() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        for _ in 0..5 {
            let x: Vec<Vec<f64>> = (0..50)
                .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let y: Vec<u8> = (0..50).map(|_| u8::from(rng.random::<f64>() < 0.5)).collect();
            let lambda = 0.5;
            let model = fit_ridge(&x, &y, lambda).unwrap();

            let n = 50.0;
            let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
            let xm: Vec<f64> = (0..8).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
            let ym = ys.iter().sum::<f64>() / n;
            let mut gram = vec![vec![0.0; 8]; 8];
            let mut rhs = vec![0.0; 8];
            for (row, &yi) in x.iter().zip(&ys) {
                let c: Vec<f64> = row.iter().zip(&xm).map(|(v, m)| v - m).collect();
                for j in 0..8 {
                    rhs[j] += c[j] * (yi - ym);
                    for k in 0..8 {
                        gram[j][k] += c[j] * c[k];
                    }
                }
            }
            for (j, row) in gram.iter_mut().enumerate() {
                row[j] += lambda;
            }
            let w = solve_dense(gram, rhs);
            for (a, b) in model.weights.iter().zip(&w) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            let bias = ym - w.iter().zip(&xm).map(|(wj, mj)| wj * mj).sum::<f64>();
            assert!((model.bias - bias).abs() < 1e-9);
        }
    }
}
