//! Train-normalized random projection with clipping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::SimError;

use super::PipelineError;

/// Symmetric bound the projected features are clamped to.
pub const FEATURE_CLIP: f64 = 1.0;

/// Lower bound on per-coordinate training standard deviations.
pub const STD_FLOOR: f64 = 1e-6;

/// A fitted projection: the seeded matrix plus the train-split statistics
/// that normalize its outputs. Immutable once fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec {
    pub seed: u64,
    pub input_dim: usize,
    pub output_width: usize,
    pub matrix: Vec<Vec<f64>>,
    pub train_mean: Vec<f64>,
    pub train_std: Vec<f64>,
    pub clip_bound: f64,
}

impl ProjectionSpec {
    fn project_raw(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
            .collect()
    }
}

/// Draws the projection matrix from a seeded standard normal scaled by
/// 1/sqrt(input_dim) and records per-coordinate mean and std of the
/// projected training rows. The std floor keeps constant coordinates from
/// dividing by zero; a training set with no variation at all is rejected.
pub fn fit_projection(
    train_rows: &[Vec<f64>],
    seed: u64,
    output_width: usize,
) -> Result<ProjectionSpec, PipelineError> {
    let first = train_rows.first().ok_or_else(|| {
        PipelineError::Sim(SimError::InvalidParams(
            "projection fitting needs at least one training row".into(),
        ))
    })?;
    let input_dim = first.len();
    if input_dim == 0 || output_width == 0 {
        return Err(PipelineError::Sim(SimError::InvalidParams(
            "projection dimensions must be positive".into(),
        )));
    }
    for row in train_rows {
        if row.len() != input_dim {
            return Err(PipelineError::DimensionMismatch {
                line: 0,
                expected: input_dim,
                got: row.len(),
            });
        }
    }
    if train_rows.iter().all(|r| r == first) {
        return Err(PipelineError::DegenerateTraining);
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = 1.0 / (input_dim as f64).sqrt();
    let matrix: Vec<Vec<f64>> = (0..output_width)
        .map(|_| {
            (0..input_dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
                .collect()
        })
        .collect();

    let mut spec = ProjectionSpec {
        seed,
        input_dim,
        output_width,
        matrix,
        train_mean: vec![0.0; output_width],
        train_std: vec![1.0; output_width],
        clip_bound: FEATURE_CLIP,
    };
    let projected: Vec<Vec<f64>> = train_rows.iter().map(|r| spec.project_raw(r)).collect();
    let n = projected.len() as f64;
    for j in 0..output_width {
        let mean = projected.iter().map(|p| p[j]).sum::<f64>() / n;
        let var = projected.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / n;
        spec.train_mean[j] = mean;
        spec.train_std[j] = var.sqrt().max(STD_FLOOR);
    }
    Ok(spec)
}

/// Projects, normalizes against the training statistics, and clamps each
/// coordinate to the clip bound. One call maps a whole example: `chunks`
/// rows in, `chunks` bounded rows of `output_width` scalars out.
pub fn project_clip(
    chunks: &[Vec<f64>],
    spec: &ProjectionSpec,
) -> Result<Vec<Vec<f64>>, PipelineError> {
    chunks
        .iter()
        .map(|chunk| {
            if chunk.len() != spec.input_dim {
                return Err(PipelineError::Sim(SimError::ShapeMismatch {
                    expected: spec.input_dim,
                    got: chunk.len(),
                }));
            }
            Ok(spec
                .project_raw(chunk)
                .iter()
                .enumerate()
                .map(|(j, y)| {
                    let z = (y - spec.train_mean[j]) / spec.train_std[j];
                    z.clamp(-spec.clip_bound, spec.clip_bound)
                })
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn seeded_rows(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| (rng.next_u32() as f64 / u32::MAX as f64) * 2.0 - 1.0)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn same_seed_refits_identically() {
        let rows = seeded_rows(3, 40, 16);
        let a = fit_projection(&rows, 11, 8).unwrap();
        let b = fit_projection(&rows, 11, 8).unwrap();
        assert_eq!(a, b);
        let c = fit_projection(&rows, 12, 8).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn training_rows_normalize_to_zero_mean_unit_std() {
        let rows = seeded_rows(5, 60, 16);
        let spec = fit_projection(&rows, 11, 8).unwrap();
        let normalized: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                spec.project_raw(r)
                    .iter()
                    .enumerate()
                    .map(|(j, y)| (y - spec.train_mean[j]) / spec.train_std[j])
                    .collect()
            })
            .collect();
        let n = normalized.len() as f64;
        for j in 0..8 {
            let mean = normalized.iter().map(|p| p[j]).sum::<f64>() / n;
            let var = normalized.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-6, "coordinate {j} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-6, "coordinate {j} std {}", var.sqrt());
        }
    }

    #[test]
    fn constant_coordinate_floors_instead_of_dividing_by_zero() {
        let mut rows = seeded_rows(9, 30, 4);
        for r in &mut rows {
            r[2] = 0.75;
        }
        let spec = fit_projection(&rows, 11, 4).unwrap();
        assert!(spec.train_std.iter().all(|&s| s >= STD_FLOOR));
        let out = project_clip(&rows[..3], &spec).unwrap();
        assert!(out.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let rows = vec![vec![0.25, -0.5, 0.75]; 10];
        match fit_projection(&rows, 11, 4) {
            Err(PipelineError::DegenerateTraining) => {}
            other => panic!("expected degenerate training, got {other:?}"),
        }
    }

    #[test]
    fn outputs_stay_inside_the_clip_bound() {
        let rows = seeded_rows(13, 50, 12);
        let spec = fit_projection(&rows, 11, 8).unwrap();
        // Fresh draws from a wider range than the training rows.
        let mut wide = seeded_rows(14, 50, 12);
        for r in &mut wide {
            for v in r.iter_mut() {
                *v *= 25.0;
            }
        }
        for out in project_clip(&wide, &spec).unwrap() {
            assert_eq!(out.len(), 8);
            assert!(out.iter().all(|v| v.abs() <= FEATURE_CLIP));
        }
    }

    #[test]
    fn zero_chunk_maps_to_clamped_negated_normalized_mean() {
        let rows = seeded_rows(17, 40, 6);
        let spec = fit_projection(&rows, 11, 4).unwrap();
        let out = project_clip(&[vec![0.0; 6]], &spec).unwrap();
        for (j, v) in out[0].iter().enumerate() {
            let expected = (-spec.train_mean[j] / spec.train_std[j])
                .clamp(-FEATURE_CLIP, FEATURE_CLIP);
            assert_eq!(*v, expected);
        }
    }

    #[test]
    fn wrong_width_chunk_is_a_shape_mismatch() {
        let rows = seeded_rows(19, 20, 6);
        let spec = fit_projection(&rows, 11, 4).unwrap();
        match project_clip(&[vec![0.0; 5]], &spec) {
            Err(PipelineError::Sim(SimError::ShapeMismatch {
                expected: 6,
                got: 5,
            })) => {}
            other => panic!("expected shape mismatch, got {other:?}"),
        }
    }
}
