//! Single-tensor CPD via alternating least squares, plus the compress /
//! decompose / back-project pipeline that runs the same solver on a single
//! randomly projected core.
//!
//! Each ALS sweep solves the three matricized normal-equation subproblems in
//! turn, e.g. `A ← T1 (B ⊙ C) ((BᵀB) ∘ (CᵀC))⁺`, normalizing the columns of
//! `A` and `B` to unit norm so the scales accumulate in `C`. The sweep ends
//! with an exact residual evaluation; iteration stops once the relative
//! residual changes by less than `rel_tol` between sweeps.

use ndarray::Array2;
use std::time::Instant;

use crate::error::{CorapError, Result};
use crate::linalg::pinv;
use crate::random::{derive_seed, gaussian_matrix, salts};
use crate::sketch::{build_rap_projectors, compress, SketchConfig};
use crate::tensor::{khatri_rao, matricize, DenseTensor3, FactorTriple};

/// Initial factors for the ALS iteration.
#[derive(Clone, Debug)]
pub enum FactorInit {
    /// Seeded standard-Gaussian factor matrices.
    Random,
    /// Leading singular vectors of each unfolding for the first start,
    /// seeded Gaussian factors for any further restarts. Much less prone to
    /// the slow swamps that random starts occasionally hit on compressed
    /// cores, where the rank is a sizable fraction of the dimensions.
    Svd,
    /// Caller-provided starting point.
    Given(FactorTriple),
}

/// Options controlling one ALS solve.
#[derive(Clone, Debug)]
pub struct AlsOptions {
    pub max_iters: usize,
    /// Stop once the relative residual changes by less than this between
    /// sweeps.
    pub rel_tol: f64,
    pub init: FactorInit,
    pub seed: u64,
    /// Number of random starts; the run with the smallest residual wins.
    /// Ignored (treated as 1) when `init` is [`FactorInit::Given`].
    pub restarts: usize,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tol: 1e-8,
            init: FactorInit::Random,
            seed: 0,
            restarts: 1,
        }
    }
}

impl AlsOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of an ALS solve. `rel_residual` is `‖T − ⟦A,B,C⟧‖_F / ‖T‖_F`
/// evaluated exactly for the returned factors.
#[derive(Clone, Debug)]
pub struct CpdResult {
    pub factors: FactorTriple,
    pub rel_residual: f64,
    pub iters: usize,
    pub converged: bool,
    pub wall_time: f64,
}

fn normalize_columns(m: &mut Array2<f64>) {
    for mut col in m.columns_mut() {
        let n = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            col.mapv_inplace(|v| v / n);
        }
    }
}

/// Exact relative residual of a factor triple against the full tensor.
pub fn full_rel_residual(t: &DenseTensor3, f: &FactorTriple) -> Result<f64> {
    if t.dims() != f.dims() {
        return Err(CorapError::ShapeMismatch(format!(
            "factors imply dims {:?}, tensor has {:?}",
            f.dims(),
            t.dims()
        )));
    }
    let t3 = matricize(t, 3)?;
    let tnorm = t3.iter().map(|v| v * v).sum::<f64>().sqrt();
    if tnorm == 0.0 {
        let model = crate::tensor::cpd_reconstruct(f)?;
        return Ok(if model.frobenius_norm() == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let k3 = khatri_rao(&f.a.view(), &f.b.view())?;
    let recon = f.c.dot(&k3.t());
    let diff = (&t3 - &recon).iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(diff / tnorm)
}

struct Unfoldings {
    t1: Array2<f64>,
    t2: Array2<f64>,
    t3: Array2<f64>,
    norm: f64,
}

impl Unfoldings {
    fn of(t: &DenseTensor3) -> Result<Self> {
        let t1 = matricize(t, 1)?;
        let t2 = matricize(t, 2)?;
        let t3 = matricize(t, 3)?;
        let norm = t1.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self { t1, t2, t3, norm })
    }
}

fn run_sweeps(
    unf: &Unfoldings,
    mut f: FactorTriple,
    max_iters: usize,
    rel_tol: f64,
) -> Result<(FactorTriple, f64, usize, bool)> {
    let mut prev: Option<f64> = None;
    let mut rel = f64::INFINITY;
    let mut iters = 0;
    let mut converged = false;

    for sweep in 1..=max_iters {
        iters = sweep;

        let k1 = khatri_rao(&f.b.view(), &f.c.view())?;
        let gram = f.b.t().dot(&f.b) * &f.c.t().dot(&f.c);
        f.a = unf.t1.dot(&k1).dot(&pinv(&gram.view()));
        normalize_columns(&mut f.a);

        let k2 = khatri_rao(&f.a.view(), &f.c.view())?;
        let gram = f.a.t().dot(&f.a) * &f.c.t().dot(&f.c);
        f.b = unf.t2.dot(&k2).dot(&pinv(&gram.view()));
        normalize_columns(&mut f.b);

        let k3 = khatri_rao(&f.a.view(), &f.b.view())?;
        let gram = f.a.t().dot(&f.a) * &f.b.t().dot(&f.b);
        f.c = unf.t3.dot(&k3).dot(&pinv(&gram.view()));

        let recon = f.c.dot(&k3.t());
        let diff = (&unf.t3 - &recon).iter().map(|v| v * v).sum::<f64>().sqrt();
        rel = diff / unf.norm;

        if let Some(p) = prev {
            debug_assert!(
                rel <= p + 1e-12,
                "ALS residual increased: {p} -> {rel} at sweep {sweep}"
            );
            if (p - rel).abs() < rel_tol {
                converged = true;
                break;
            }
        }
        prev = Some(rel);
    }
    Ok((f, rel, iters, converged))
}

fn random_init(dims: (usize, usize, usize), rank: usize, seed: u64) -> FactorTriple {
    FactorTriple {
        a: gaussian_matrix(dims.0, rank, derive_seed(seed, &[salts::ALS_INIT, 1])),
        b: gaussian_matrix(dims.1, rank, derive_seed(seed, &[salts::ALS_INIT, 2])),
        c: gaussian_matrix(dims.2, rank, derive_seed(seed, &[salts::ALS_INIT, 3])),
    }
}

fn svd_init(unf: &Unfoldings, rank: usize) -> Result<FactorTriple> {
    FactorTriple::new(
        crate::linalg::truncated_svd(&unf.t1.view(), rank)?.u,
        crate::linalg::truncated_svd(&unf.t2.view(), rank)?.u,
        crate::linalg::truncated_svd(&unf.t3.view(), rank)?.u,
    )
}

/// Alternating least squares CPD of rank `rank`.
///
/// With [`FactorInit::Random`] and `restarts > 1`, the solve is repeated from
/// independently seeded starting points and the best fit is returned.
pub fn als_cpd(t: &DenseTensor3, rank: usize, opts: &AlsOptions) -> Result<CpdResult> {
    let start = Instant::now();
    let dims = t.dims();
    let min_dim = dims.0.min(dims.1).min(dims.2);
    if rank == 0 || rank > min_dim {
        return Err(CorapError::RankOutOfRange(format!(
            "rank {rank} invalid for tensor dims {dims:?}"
        )));
    }
    if opts.max_iters == 0 {
        return Err(CorapError::InvalidConfig("max_iters must be ≥ 1".into()));
    }
    if opts.rel_tol.is_nan() || opts.rel_tol < 0.0 {
        return Err(CorapError::InvalidConfig("rel_tol must be ≥ 0".into()));
    }

    let unf = Unfoldings::of(t)?;
    if unf.norm == 0.0 {
        let zeros = FactorTriple {
            a: Array2::zeros((dims.0, rank)),
            b: Array2::zeros((dims.1, rank)),
            c: Array2::zeros((dims.2, rank)),
        };
        return Ok(CpdResult {
            factors: zeros,
            rel_residual: 0.0,
            iters: 0,
            converged: true,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }

    let mut best: Option<(FactorTriple, f64, usize, bool)> = None;
    match &opts.init {
        FactorInit::Given(init) => {
            if init.dims() != dims || init.rank() != rank {
                return Err(CorapError::ShapeMismatch(format!(
                    "given init has dims {:?} rank {}, expected {dims:?} rank {rank}",
                    init.dims(),
                    init.rank()
                )));
            }
            best = Some(run_sweeps(&unf, init.clone(), opts.max_iters, opts.rel_tol)?);
        }
        FactorInit::Random | FactorInit::Svd => {
            let restarts = opts.restarts.max(1);
            for attempt in 0..restarts {
                let init = if attempt == 0 && matches!(opts.init, FactorInit::Svd) {
                    svd_init(&unf, rank)?
                } else {
                    let seed = derive_seed(opts.seed, &[salts::RESTART, attempt as u64]);
                    random_init(dims, rank, seed)
                };
                let run = run_sweeps(&unf, init, opts.max_iters, opts.rel_tol)?;
                let better = match &best {
                    None => true,
                    Some((_, best_rel, _, _)) => run.1 < *best_rel,
                };
                if better {
                    best = Some(run);
                }
            }
        }
    }

    let (factors, rel_residual, iters, converged) = best.expect("at least one ALS run");
    Ok(CpdResult {
        factors,
        rel_residual,
        iters,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Random-projection CPD: sketch one triad of projectors at power order
/// `power`, decompose the compressed core, and back-project the factors.
/// The reported residual is measured against the full-size tensor.
pub fn rap_cpd(
    t: &DenseTensor3,
    cfg: &SketchConfig,
    power: usize,
    opts: &AlsOptions,
) -> Result<CpdResult> {
    let start = Instant::now();
    let triad = build_rap_projectors(t, cfg, power)?;
    let core = compress(t, &triad)?;
    let core_result = als_cpd(&core, cfg.target_rank, opts)?;
    let factors = FactorTriple::new(
        triad.u.dot(&core_result.factors.a),
        triad.v.dot(&core_result.factors.b),
        triad.w.dot(&core_result.factors.c),
    )?;
    let rel_residual = full_rel_residual(t, &factors)?;
    Ok(CpdResult {
        factors,
        rel_residual,
        iters: core_result.iters,
        converged: core_result.converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
