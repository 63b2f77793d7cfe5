//! Coupled CPD of a compressed ensemble: algebraic initialization, coupled
//! alternating least squares under a shared third-mode factor, selection of
//! the best-fitting core, and back-projection to full-size factors.
//!
//! The `M` cores share one third-mode factor `C'` because every triad reuses
//! the same third-mode projector. The algebraic initializer decomposes one
//! anchor core, then transfers its `C'` to the remaining cores: each column
//! of `G3^(m)ᵀ (C'ᵀ)⁺` unvectorizes to a near-rank-1 matrix whose best
//! rank-1 factors are that core's per-component vectors. Column order is
//! inherited from the anchor through `C'`, so no permutation matching across
//! cores is needed (and adding one would break the coupling).

use ndarray::Array2;
use std::time::Instant;

use crate::cpd::{als_cpd, AlsOptions, FactorInit};
use crate::error::{CorapError, Result, StageExt};
use crate::linalg::pinv;
use crate::random::{derive_seed, salts};
use crate::sketch::{build_ensemble, CompressedEnsemble, SketchConfig};
use crate::tensor::{khatri_rao, matricize, unvectorize, DenseTensor3, FactorTriple};

/// Factors of the coupled model: per-core pairs `(A^(m), B^(m))` plus the
/// shared third-mode factor `C'`. Column `r` of every per-core pair belongs
/// to the same rank-1 term, tied through `C'`.
#[derive(Clone, Debug)]
pub struct CoupledFactors {
    pub per_core: Vec<(Array2<f64>, Array2<f64>)>,
    pub shared_c: Array2<f64>,
    /// Set when the shared factor was ill-conditioned enough that the
    /// pseudoinverse transfer step relied on singular-value thresholding.
    pub conditioning_warning: bool,
}

impl CoupledFactors {
    pub fn rank(&self) -> usize {
        self.shared_c.ncols()
    }

    pub fn num_cores(&self) -> usize {
        self.per_core.len()
    }
}

/// Result of the full coupled pipeline.
#[derive(Clone, Debug)]
pub struct CcpdResult {
    pub coupled: CoupledFactors,
    /// Relative residual of each core under its coupled factors, evaluated
    /// after refinement.
    pub per_core_rel_residuals: Vec<f64>,
    /// 1-based index of the selected power order: the candidate whose
    /// back-projected factors fit the full data tensor best in the least
    /// squares sense, ties toward the smallest index. (The per-core fit
    /// residuals barely separate the candidates once their noise floor
    /// dominates; the full-tensor fit still does — see [`select_m_opt`] for
    /// the core-level variant.)
    pub m_opt: usize,
    pub full_factors: FactorTriple,
    pub total_time: f64,
}

fn core_unfoldings(core: &DenseTensor3) -> Result<[Array2<f64>; 3]> {
    Ok([matricize(core, 1)?, matricize(core, 2)?, matricize(core, 3)?])
}

/// Algebraic coupled CPD anchored on the first core.
pub fn algebraic_ccpd(
    ensemble: &CompressedEnsemble,
    rank: usize,
    opts: &AlsOptions,
) -> Result<CoupledFactors> {
    algebraic_ccpd_anchored(ensemble, rank, opts, 1)
}

/// Algebraic coupled CPD with an explicit 1-based anchor core.
///
/// The anchor core is decomposed by ALS; its third-mode factor is then
/// shared, and the other cores' factors are recovered column by column from
/// rank-1 approximations of the unvectorized transfer columns.
pub fn algebraic_ccpd_anchored(
    ensemble: &CompressedEnsemble,
    rank: usize,
    opts: &AlsOptions,
    anchor: usize,
) -> Result<CoupledFactors> {
    let m_count = ensemble.len();
    if m_count == 0 {
        return Err(CorapError::InvalidConfig("ensemble is empty".into()));
    }
    if !(1..=m_count).contains(&anchor) {
        return Err(CorapError::InvalidConfig(format!(
            "anchor {anchor} outside 1..={m_count}"
        )));
    }
    let rprime = ensemble.cores[0].dims().0;
    if rank > rprime {
        return Err(CorapError::RankOutOfRange(format!(
            "rank {rank} exceeds core dimension {rprime}"
        )));
    }

    let anchor_idx = anchor - 1;
    let anchor_fit = als_cpd(&ensemble.cores[anchor_idx], rank, opts)?;
    let shared_c = anchor_fit.factors.c.clone();

    // Conditioning of C' decides how trustworthy the pseudoinverse transfer
    // is; thresholding keeps it defined either way.
    let c_svd = crate::linalg::truncated_svd(&shared_c.view(), rank.min(shared_c.nrows()))?;
    let sigma_max = c_svd.s[0];
    let sigma_min = c_svd.s[c_svd.s.len() - 1];
    let conditioning_warning = sigma_min <= 0.0 || sigma_max / sigma_min > 1e8;

    let transfer = pinv(&shared_c.t());

    let mut per_core: Vec<(Array2<f64>, Array2<f64>)> = Vec::with_capacity(m_count);
    for (idx, core) in ensemble.cores.iter().enumerate() {
        if idx == anchor_idx {
            per_core.push((anchor_fit.factors.a.clone(), anchor_fit.factors.b.clone()));
            continue;
        }
        let g3 = matricize(core, 3)?;
        // G3ᵀ (C'ᵀ)⁺ ≈ A^(m) ⊙ B^(m): column r unvectorizes to b_r a_rᵀ
        // under column stacking.
        let kr_est = g3.t().dot(&transfer);
        let mut a_m = Array2::<f64>::zeros((rprime, rank));
        let mut b_m = Array2::<f64>::zeros((rprime, rank));
        for r in 0..rank {
            let col = kr_est.column(r).to_owned();
            let mat = unvectorize(&col, rprime, rprime)?;
            let (u, v) = crate::linalg::best_rank1(&mat.view()).map_err(|_| {
                CorapError::DegenerateComponent {
                    core: idx + 1,
                    component: r + 1,
                }
            })?;
            b_m.column_mut(r).assign(&u);
            a_m.column_mut(r).assign(&v);
        }
        per_core.push((a_m, b_m));
    }

    Ok(CoupledFactors {
        per_core,
        shared_c,
        conditioning_warning,
    })
}

/// Squared Frobenius residual of core `m` under the coupled factors.
fn core_sq_residual(
    g3: &Array2<f64>,
    a: &Array2<f64>,
    b: &Array2<f64>,
    c: &Array2<f64>,
) -> Result<f64> {
    let kr = khatri_rao(&a.view(), &b.view())?;
    let recon = c.dot(&kr.t());
    Ok((g3 - &recon).iter().map(|v| v * v).sum::<f64>())
}

/// Pooled objective `Σ_m ‖G^(m) − ⟦A^(m), B^(m), C'⟧‖²_F`.
pub fn pooled_objective(ensemble: &CompressedEnsemble, coupled: &CoupledFactors) -> Result<f64> {
    let mut total = 0.0;
    for (core, (a, b)) in ensemble.cores.iter().zip(&coupled.per_core) {
        let g3 = matricize(core, 3)?;
        total += core_sq_residual(&g3, a, b, &coupled.shared_c)?;
    }
    Ok(total)
}

/// Relative residual of every core under the coupled factors.
pub fn per_core_rel_residuals(
    ensemble: &CompressedEnsemble,
    coupled: &CoupledFactors,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ensemble.len());
    for (core, (a, b)) in ensemble.cores.iter().zip(&coupled.per_core) {
        let g3 = matricize(core, 3)?;
        let sq = core_sq_residual(&g3, a, b, &coupled.shared_c)?;
        let norm = core.frobenius_norm().max(1e-300);
        out.push(sq.sqrt() / norm);
    }
    Ok(out)
}

/// Coupled ALS refinement: per sweep, update `A^(m)` then `B^(m)` on each
/// core alone, then update the shared `C'` from the least squares problem
/// pooling all cores' mode-3 unfoldings. The pooled objective is
/// nonincreasing across sweeps.
pub fn coupled_als(
    ensemble: &CompressedEnsemble,
    init: CoupledFactors,
    opts: &AlsOptions,
) -> Result<CoupledFactors> {
    let m_count = ensemble.len();
    if m_count == 0 {
        return Err(CorapError::InvalidConfig("ensemble is empty".into()));
    }
    if init.num_cores() != m_count {
        return Err(CorapError::ShapeMismatch(format!(
            "init covers {} cores, ensemble has {m_count}",
            init.num_cores()
        )));
    }
    let rank = init.rank();

    // A single core is an ordinary CPD; run the identical single-tensor
    // sweep so the reduction is exact.
    if m_count == 1 {
        let triple = FactorTriple::new(
            init.per_core[0].0.clone(),
            init.per_core[0].1.clone(),
            init.shared_c.clone(),
        )?;
        let single = als_cpd(
            &ensemble.cores[0],
            rank,
            &AlsOptions {
                init: FactorInit::Given(triple),
                restarts: 1,
                ..opts.clone()
            },
        )?;
        return Ok(CoupledFactors {
            per_core: vec![(single.factors.a, single.factors.b)],
            shared_c: single.factors.c,
            conditioning_warning: init.conditioning_warning,
        });
    }

    let unfolded: Vec<[Array2<f64>; 3]> = ensemble
        .cores
        .iter()
        .map(core_unfoldings)
        .collect::<Result<_>>()?;
    let pooled_norm = ensemble
        .cores
        .iter()
        .map(|c| c.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt()
        .max(1e-300);

    let mut factors = init.per_core.clone();
    let mut c = init.shared_c.clone();
    let mut prev: Option<f64> = None;

    for _sweep in 1..=opts.max_iters {
        let gram_c = c.t().dot(&c);
        for (m, (a, b)) in factors.iter_mut().enumerate() {
            let kr = khatri_rao(&b.view(), &c.view())?;
            let gram = b.t().dot(b as &Array2<f64>) * &gram_c;
            *a = unfolded[m][0].dot(&kr).dot(&pinv(&gram.view()));

            let kr = khatri_rao(&a.view(), &c.view())?;
            let gram = a.t().dot(a as &Array2<f64>) * &gram_c;
            *b = unfolded[m][1].dot(&kr).dot(&pinv(&gram.view()));

            // Unit-norm b columns; per-core magnitude moves to a, which is
            // legal because each core owns its own (a, b) pair.
            for r in 0..rank {
                let n = b.column(r).iter().map(|v| v * v).sum::<f64>().sqrt();
                if n > 0.0 {
                    b.column_mut(r).mapv_inplace(|v| v / n);
                    a.column_mut(r).mapv_inplace(|v| v * n);
                }
            }
        }

        // Shared C' from the stacked problem over all cores.
        let mut numerator = Array2::<f64>::zeros((c.nrows(), rank));
        let mut denominator = Array2::<f64>::zeros((rank, rank));
        for (m, (a, b)) in factors.iter().enumerate() {
            let kr = khatri_rao(&a.view(), &b.view())?;
            numerator = numerator + unfolded[m][2].dot(&kr);
            denominator = denominator + a.t().dot(a) * &b.t().dot(b);
        }
        c = numerator.dot(&pinv(&denominator.view()));

        // Unit-norm shared columns; scales go into every core's a factor so
        // the models are unchanged.
        for r in 0..rank {
            let n = c.column(r).iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                c.column_mut(r).mapv_inplace(|v| v / n);
                for (a, _) in factors.iter_mut() {
                    a.column_mut(r).mapv_inplace(|v| v * n);
                }
            }
        }

        let mut objective = 0.0;
        for (m, (a, b)) in factors.iter().enumerate() {
            let kr = khatri_rao(&a.view(), &b.view())?;
            let recon = c.dot(&kr.t());
            objective += (&unfolded[m][2] - &recon).iter().map(|v| v * v).sum::<f64>();
        }
        let rel = objective.sqrt() / pooled_norm;

        if let Some(p) = prev {
            debug_assert!(
                rel <= p + 1e-12,
                "coupled objective increased: {p} -> {rel}"
            );
            if (p - rel).abs() < opts.rel_tol {
                break;
            }
        }
        prev = Some(rel);
    }

    Ok(CoupledFactors {
        per_core: factors,
        shared_c: c,
        conditioning_warning: init.conditioning_warning,
    })
}

/// 1-based index of the core whose coupled factors fit it best in the least
/// squares sense; ties break toward the smallest index.
///
/// Fit is judged by the relative residual. The cores capture slightly
/// different amounts of energy, and the raw squared residual would bias the
/// pick toward whichever projection captured least.
pub fn select_m_opt(ensemble: &CompressedEnsemble, coupled: &CoupledFactors) -> Result<usize> {
    let residuals = per_core_rel_residuals(ensemble, coupled)?;
    let mut best = 1;
    let mut best_rel = f64::INFINITY;
    for (idx, &rel) in residuals.iter().enumerate() {
        if rel < best_rel {
            best_rel = rel;
            best = idx + 1;
        }
    }
    Ok(best)
}

/// Lift the coupled factors of core `m_opt` (1-based) back to full size:
/// `A = U^(m) A^(m)`, `B = V^(m) B^(m)`, `C = W C'`.
pub fn back_project(
    ensemble: &CompressedEnsemble,
    coupled: &CoupledFactors,
    m_opt: usize,
) -> Result<FactorTriple> {
    if !(1..=ensemble.len()).contains(&m_opt) {
        return Err(CorapError::InvalidConfig(format!(
            "m_opt {m_opt} outside 1..={}",
            ensemble.len()
        )));
    }
    let triad = &ensemble.triads[m_opt - 1];
    let (a, b) = &coupled.per_core[m_opt - 1];
    FactorTriple::new(
        triad.u.dot(a),
        triad.v.dot(b),
        triad.w.dot(&coupled.shared_c),
    )
}

/// The full coupled pipeline: build the ensemble, initialize algebraically
/// (anchoring on each core in turn and keeping the best-fitting chain),
/// refine with coupled ALS, pick the candidate power order whose lifted
/// factors fit the data tensor best, and back-project.
pub fn corap_cpd(
    t: &DenseTensor3,
    cfg: &SketchConfig,
    rank: usize,
    opts: &AlsOptions,
) -> Result<CcpdResult> {
    let start = Instant::now();
    if rank > cfg.oversampled_rank {
        return Err(CorapError::RankOutOfRange(format!(
            "rank {rank} exceeds sketch width {}",
            cfg.oversampled_rank
        )));
    }
    let ensemble = build_ensemble(t, cfg).stage("build_ensemble")?;

    // The anchor decomposition seeds everything downstream, and coupled
    // refinement cannot escape an anchor that converged to a spurious local
    // minimum — it drags the other cores into the same basin through the
    // shared factor. Anchoring each core in turn (independent restart
    // streams, cores are cheap) and keeping the chain with the best pooled
    // fit removes that single point of failure.
    let mut refined: Option<(CoupledFactors, f64)> = None;
    for anchor in 1..=ensemble.len() {
        let anchor_opts = AlsOptions {
            seed: derive_seed(opts.seed, &[salts::ALGO, anchor as u64]),
            ..opts.clone()
        };
        let init = algebraic_ccpd_anchored(&ensemble, rank, &anchor_opts, anchor)
            .stage("algebraic_ccpd")?;
        let candidate = coupled_als(&ensemble, init, opts).stage("coupled_als")?;
        let objective = pooled_objective(&ensemble, &candidate).stage("coupled_als")?;
        let better = match &refined {
            None => true,
            Some((_, best)) => objective < *best,
        };
        if better {
            refined = Some((candidate, objective));
        }
    }
    let (refined, _) = refined.expect("at least one anchor");
    let per_core = per_core_rel_residuals(&ensemble, &refined).stage("residuals")?;

    // Judge every candidate against the full tensor. One lift and residual
    // per candidate costs O(IJK·R), a sliver of the sketching work, and
    // unlike the per-core fit it still separates the candidates once their
    // compressed-domain residuals sit on a common noise floor.
    let mut m_opt = 1;
    let mut best_rel = f64::INFINITY;
    let mut full_factors: Option<FactorTriple> = None;
    for m in 1..=ensemble.len() {
        let candidate = back_project(&ensemble, &refined, m).stage("back_project")?;
        let rel = crate::cpd::full_rel_residual(t, &candidate).stage("select_m_opt")?;
        if rel < best_rel {
            best_rel = rel;
            m_opt = m;
            full_factors = Some(candidate);
        }
    }
    let full_factors = full_factors.expect("at least one candidate");

    Ok(CcpdResult {
        coupled: refined,
        per_core_rel_residuals: per_core,
        m_opt,
        full_factors,
        total_time: start.elapsed().as_secs_f64(),
    })
}
