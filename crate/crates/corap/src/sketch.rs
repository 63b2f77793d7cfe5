//! Random-projection structures: per-mode sketches, projection triads, and
//! multi-mode compression into small core tensors.
//!
//! A triad `{U, V, W}` holds one orthonormal projector per mode. The coupled
//! construction builds `M` triads whose first- and second-mode projectors
//! come from power orders `m = 1..M` while a single third-mode projector `W`
//! is built once and shared, so the compressed cores all carry the same
//! third-mode factor space and can be decomposed jointly.

use ndarray::Array2;
use std::sync::Arc;

use crate::error::{CorapError, Result};
use crate::linalg::{normalized_subspace_iteration, truncated_svd};
use crate::random::{derive_seed, gaussian_matrix, salts};
use crate::tensor::{matricize, project_all_modes, DenseTensor3, SharedProjector};

/// Sketching parameters: target rank `R`, oversampled sketch width `R' > R`,
/// maximal power order `M ≥ 1`, and the seed for the test matrices.
#[derive(Clone, Copy, Debug)]
pub struct SketchConfig {
    pub target_rank: usize,
    pub oversampled_rank: usize,
    pub max_power: usize,
    pub seed: u64,
}

impl SketchConfig {
    pub fn new(target_rank: usize, oversampled_rank: usize, max_power: usize, seed: u64) -> Self {
        Self {
            target_rank,
            oversampled_rank,
            max_power,
            seed,
        }
    }

    /// Check the config against the dimensions of the tensor to sketch.
    pub fn validate_for(&self, dims: (usize, usize, usize)) -> Result<()> {
        let min_dim = dims.0.min(dims.1).min(dims.2);
        if self.target_rank == 0 {
            return Err(CorapError::InvalidConfig("target rank must be ≥ 1".into()));
        }
        if self.oversampled_rank <= self.target_rank {
            return Err(CorapError::InvalidConfig(format!(
                "oversampled rank {} must exceed target rank {}",
                self.oversampled_rank, self.target_rank
            )));
        }
        if self.oversampled_rank > min_dim {
            return Err(CorapError::InvalidConfig(format!(
                "oversampled rank {} exceeds smallest tensor dimension {min_dim}",
                self.oversampled_rank
            )));
        }
        if self.max_power == 0 {
            return Err(CorapError::InvalidConfig("max power must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// One set of orthonormal projection matrices `{U, V, W}` for modes 1–3.
///
/// `W` is held behind a shared handle: coupled triads reference one identical
/// third-mode projector.
#[derive(Clone, Debug)]
pub struct ProjectionTriad {
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    pub w: SharedProjector,
    pub power_order: usize,
}

/// The `M` coupled core tensors together with the triads that produced them.
#[derive(Clone, Debug)]
pub struct CompressedEnsemble {
    pub cores: Vec<DenseTensor3>,
    pub triads: Vec<ProjectionTriad>,
}

impl CompressedEnsemble {
    /// Number of coupled cores, `M`.
    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    /// The third-mode projector common to every triad.
    pub fn shared_w(&self) -> &SharedProjector {
        &self.triads[0].w
    }
}

/// Sketch one mode of `t` at the given power order and return the top-`R'`
/// left singular vectors of the sketch.
fn mode_projector(
    t: &DenseTensor3,
    cfg: &SketchConfig,
    mode: usize,
    power: usize,
) -> Result<Array2<f64>> {
    let unfolded = matricize(t, mode)?;
    let seed = derive_seed(cfg.seed, &[salts::SKETCH, mode as u64, power as u64]);
    let omega = gaussian_matrix(unfolded.ncols(), cfg.oversampled_rank, seed);
    let sketch = normalized_subspace_iteration(&unfolded, &omega.view(), power)?;
    Ok(truncated_svd(&sketch.view(), cfg.oversampled_rank)?.u)
}

/// Build one triad of projectors, all three modes sketched at power order
/// `power`, each from a fresh seeded Gaussian test matrix.
pub fn build_rap_projectors(
    t: &DenseTensor3,
    cfg: &SketchConfig,
    power: usize,
) -> Result<ProjectionTriad> {
    cfg.validate_for(t.dims())?;
    let u = mode_projector(t, cfg, 1, power)?;
    let v = mode_projector(t, cfg, 2, power)?;
    let w = mode_projector(t, cfg, 3, power)?;
    Ok(ProjectionTriad {
        u,
        v,
        w: Arc::new(w),
        power_order: power,
    })
}

/// Build the `M` coupled triads: `U^(m)`, `V^(m)` at power orders `m = 1..M`
/// in modes 1 and 2, plus a single shared third-mode projector `W` (built
/// once, at the maximal power order `M`).
///
/// W is shared by every triad, so its subspace error bounds the third-mode
/// factor accuracy of the whole coupled pipeline; building it at the
/// strongest power order keeps that bound as tight as the best single
/// projection gets.
pub fn build_corap_triads(t: &DenseTensor3, cfg: &SketchConfig) -> Result<Vec<ProjectionTriad>> {
    cfg.validate_for(t.dims())?;
    let w: SharedProjector = Arc::new(mode_projector(t, cfg, 3, cfg.max_power)?);
    let mut triads = Vec::with_capacity(cfg.max_power);
    for power in 1..=cfg.max_power {
        triads.push(ProjectionTriad {
            u: mode_projector(t, cfg, 1, power)?,
            v: mode_projector(t, cfg, 2, power)?,
            w: Arc::clone(&w),
            power_order: power,
        });
    }
    Ok(triads)
}

/// Compress `t` into the core `t ×₁ Uᵀ ×₂ Vᵀ ×₃ Wᵀ`.
pub fn compress(t: &DenseTensor3, triad: &ProjectionTriad) -> Result<DenseTensor3> {
    let (i, j, k) = t.dims();
    if triad.u.nrows() != i || triad.v.nrows() != j || triad.w.nrows() != k {
        return Err(CorapError::ShapeMismatch(format!(
            "triad projects from dims ({}, {}, {}), tensor has ({i}, {j}, {k})",
            triad.u.nrows(),
            triad.v.nrows(),
            triad.w.nrows()
        )));
    }
    project_all_modes(t, &triad.u.view(), &triad.v.view(), &triad.w.view())
}

/// Build the coupled triads and compress `t` through each of them.
pub fn build_ensemble(t: &DenseTensor3, cfg: &SketchConfig) -> Result<CompressedEnsemble> {
    let triads = build_corap_triads(t, cfg)?;
    let mut cores = Vec::with_capacity(triads.len());
    for triad in &triads {
        cores.push(compress(t, triad)?);
    }

    // Build-time verification (test builds only — it costs a recompression):
    // redo each projection with the mode products applied in reverse order,
    // which must agree with the stored core to rounding.
    #[cfg(debug_assertions)]
    for (core, triad) in cores.iter().zip(&triads) {
        use crate::tensor::mode_n_product;
        let alt = mode_n_product(t, &triad.w.t(), 3)
            .and_then(|g| mode_n_product(&g, &triad.v.t(), 2))
            .and_then(|g| mode_n_product(&g, &triad.u.t(), 1))
            .expect("verification projection");
        let diff = core
            .array()
            .iter()
            .zip(alt.array().iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = core.frobenius_norm().max(1e-300);
        debug_assert!(diff / scale < 1e-10, "core verification failed: {diff}");
    }

    Ok(CompressedEnsemble { cores, triads })
}
