//! Synthetic instance generation, the permutation/scale-invariant factor
//! error metric, and the Monte Carlo experiment runner with CSV persistence.
//!
//! Instances follow the additive model `T = S + β·N` with `S` built from
//! i.i.d. standard Gaussian factors and `N` i.i.d. standard Gaussian noise.
//! `β` is set from the realized norms so the signal/noise power ratio hits
//! the requested SNR exactly: `10·log10(‖S‖²/‖βN‖²) = snr_db`.
//!
//! Within one experiment cell (trial × SNR × rank) every algorithm sees the
//! identical instance, derived from the master seed, so comparisons are
//! paired. Records stream to CSV as they finish; the runner returns them in
//! a deterministic order regardless of thread count.

use ndarray::{Array2, ArrayView2};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use crate::assignment::minimize_assignment;
use crate::ccpd::corap_cpd;
use crate::cpd::{als_cpd, rap_cpd, AlsOptions};
use crate::error::{CorapError, Result};
use crate::random::{derive_seed, gaussian_matrix, gaussian_vec, salts};
use crate::sketch::SketchConfig;
use crate::tensor::{cpd_reconstruct, DenseTensor3, FactorTriple};

/// CSV header of the per-run record file.
pub const RECORD_HEADER: &str =
    "trial,algorithm,I,J,K,R,Rprime,M,snr_db,mre,wall_time_s,m_opt,status";

/// Restarts used for the direct full-size ALS baseline.
pub const DIRECT_RESTARTS: usize = 5;
/// Restarts used for the compressed-core solves inside RAP and CoRAP.
pub const CORE_RESTARTS: usize = 3;

/// Solver options for the direct full-size baseline: plain ALS, five random
/// restarts, keep the best fit.
pub fn direct_solver_opts(seed: u64) -> AlsOptions {
    AlsOptions {
        restarts: DIRECT_RESTARTS,
        seed,
        ..Default::default()
    }
}

/// Solver options for compressed-core CPDs: a singular-vector start plus
/// random restarts. Cores have rank comparable to their dimensions, where
/// random starts occasionally swamp.
pub fn core_solver_opts(seed: u64) -> AlsOptions {
    AlsOptions {
        restarts: CORE_RESTARTS,
        init: crate::cpd::FactorInit::Svd,
        seed,
        ..Default::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Direct,
    Rap,
    Corap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Direct, Algorithm::Rap, Algorithm::Corap];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Direct => "direct",
            Algorithm::Rap => "rap",
            Algorithm::Corap => "corap",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "direct" => Ok(Algorithm::Direct),
            "rap" => Ok(Algorithm::Rap),
            "corap" => Ok(Algorithm::Corap),
            other => Err(CorapError::InvalidConfig(format!(
                "unknown algorithm {other:?} (expected direct, rap, or corap)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One Monte Carlo sweep: dimensions, ranks, SNR points, algorithms, trial
/// count, seeding, and output location.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dims: (usize, usize, usize),
    pub rank: usize,
    /// Sketch width `R'` for the projection-based algorithms.
    pub oversample: usize,
    /// Number of coupled projections `M` (also the power order the single
    /// projection baseline runs at).
    pub max_power: usize,
    /// SNR points in dB; `f64::INFINITY` means noiseless.
    pub snr_db: Vec<f64>,
    /// Optional rank sweep; when present it replaces `rank` as the swept
    /// variable.
    pub rank_sweep: Option<Vec<usize>>,
    pub algorithms: Vec<Algorithm>,
    pub n_trials: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// 1 forces serial execution (timing mode); 0 uses the default thread
    /// pool; anything else sizes a dedicated pool.
    pub threads: usize,
    /// Use one common column permutation across all three factors in the
    /// error metric instead of matching each factor independently.
    pub strict_perm: bool,
}

impl ExperimentConfig {
    pub fn new(dims: (usize, usize, usize), rank: usize) -> Self {
        Self {
            dims,
            rank,
            oversample: 2 * rank,
            max_power: 2,
            snr_db: vec![f64::INFINITY],
            rank_sweep: None,
            algorithms: Algorithm::ALL.to_vec(),
            n_trials: 1,
            seed: 0,
            output_path: None,
            threads: 0,
            strict_perm: false,
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.rank_sweep.clone().unwrap_or_else(|| vec![self.rank])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(CorapError::InvalidConfig("trials must be ≥ 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(CorapError::InvalidConfig("no SNR points given".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CorapError::InvalidConfig("no algorithms selected".into()));
        }
        let min_dim = self.dims.0.min(self.dims.1).min(self.dims.2);
        for &r in &self.ranks() {
            if r == 0 || r > self.oversample || self.oversample > min_dim {
                return Err(CorapError::InvalidConfig(format!(
                    "need rank ≤ oversample ≤ min dims, got rank {r}, oversample {}, min dim {min_dim}",
                    self.oversample
                )));
            }
        }
        if self.max_power == 0 {
            return Err(CorapError::InvalidConfig("max power must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// One algorithm run inside one Monte Carlo cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub dims: (usize, usize, usize),
    pub rank: usize,
    pub oversample: usize,
    pub max_power: usize,
    pub snr_db: f64,
    /// Mean relative factor error; NaN when the run failed.
    pub mre: f64,
    pub wall_time_s: f64,
    pub m_opt: Option<usize>,
    pub status: String,
}

/// Draw a synthetic instance: Gaussian factors and Gaussian noise, with the
/// noise scaled so the realized signal/noise power ratio equals `snr_db`
/// exactly. Returns the tensor and the ground-truth factors.
pub fn generate_instance(
    dims: (usize, usize, usize),
    rank: usize,
    snr_db: f64,
    seed: u64,
) -> Result<(DenseTensor3, FactorTriple)> {
    let truth = FactorTriple::new(
        gaussian_matrix(dims.0, rank, derive_seed(seed, &[salts::INSTANCE, 1])),
        gaussian_matrix(dims.1, rank, derive_seed(seed, &[salts::INSTANCE, 2])),
        gaussian_matrix(dims.2, rank, derive_seed(seed, &[salts::INSTANCE, 3])),
    )?;
    let signal = cpd_reconstruct(&truth)?;
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok((signal, truth));
    }
    let len = dims.0 * dims.1 * dims.2;
    let noise = DenseTensor3::new(
        dims,
        gaussian_vec(len, derive_seed(seed, &[salts::INSTANCE, 4])),
    )?;
    let scale = signal.frobenius_norm() / noise.frobenius_norm() * 10f64.powf(-snr_db / 20.0);
    let tensor = signal.add_scaled(&noise, scale)?;
    debug_assert!(tensor.array().iter().all(|v| v.is_finite()));
    Ok((tensor, truth))
}

/// Per-column least squares matching costs: entry `(r, s)` is
/// `min_a ‖h_r − a·ĥ_s‖²`, with the optimal scalar `a = ĥ_sᵀh_r / ‖ĥ_s‖²`
/// and cost `‖h_r‖²` when the estimated column is zero.
fn column_match_costs(truth: &ArrayView2<f64>, est: &ArrayView2<f64>) -> Array2<f64> {
    let r = truth.ncols();
    let mut cost = Array2::<f64>::zeros((r, r));
    let truth_sq: Vec<f64> = (0..r)
        .map(|c| truth.column(c).iter().map(|v| v * v).sum())
        .collect();
    let est_sq: Vec<f64> = (0..r)
        .map(|c| est.column(c).iter().map(|v| v * v).sum())
        .collect();
    let cross = truth.t().dot(est);
    for a in 0..r {
        for b in 0..r {
            let value = if est_sq[b] > 0.0 {
                truth_sq[a] - cross[[a, b]] * cross[[a, b]] / est_sq[b]
            } else {
                truth_sq[a]
            };
            cost[[a, b]] = value.max(0.0);
        }
    }
    cost
}

fn factor_norms_sq(f: &FactorTriple) -> [f64; 3] {
    [
        f.a.iter().map(|v| v * v).sum(),
        f.b.iter().map(|v| v * v).sum(),
        f.c.iter().map(|v| v * v).sum(),
    ]
}

fn check_metric_shapes(truth: &FactorTriple, est: &FactorTriple) -> Result<()> {
    if truth.dims() != est.dims() || truth.rank() != est.rank() {
        return Err(CorapError::ShapeMismatch(format!(
            "metric needs matching factors, got dims {:?} rank {} vs dims {:?} rank {}",
            truth.dims(),
            truth.rank(),
            est.dims(),
            est.rank()
        )));
    }
    Ok(())
}

/// Mean relative factor error: each factor pair is matched by the optimal
/// column permutation and per-column scaling, and the three relative squared
/// errors are averaged. Zero iff the estimate equals the truth up to
/// per-factor column permutation and scaling.
pub fn mean_relative_error(truth: &FactorTriple, est: &FactorTriple) -> Result<f64> {
    check_metric_shapes(truth, est)?;
    let norms = factor_norms_sq(truth);
    let mut total = 0.0;
    for (idx, (h, h_est)) in [
        (&truth.a, &est.a),
        (&truth.b, &est.b),
        (&truth.c, &est.c),
    ]
    .into_iter()
    .enumerate()
    {
        let cost = column_match_costs(&h.view(), &h_est.view());
        let perm = minimize_assignment(&cost.view());
        let matched: f64 = perm.iter().enumerate().map(|(r, &s)| cost[[r, s]]).sum();
        if norms[idx] > 0.0 {
            total += matched / norms[idx];
        }
    }
    Ok(total / 3.0)
}

/// Stricter variant of [`mean_relative_error`] that forces one common column
/// permutation across all three factors (scales stay per column per factor).
pub fn mean_relative_error_strict(truth: &FactorTriple, est: &FactorTriple) -> Result<f64> {
    check_metric_shapes(truth, est)?;
    let norms = factor_norms_sq(truth);
    let rank = truth.rank();
    let mut combined = Array2::<f64>::zeros((rank, rank));
    for (idx, (h, h_est)) in [
        (&truth.a, &est.a),
        (&truth.b, &est.b),
        (&truth.c, &est.c),
    ]
    .into_iter()
    .enumerate()
    {
        let cost = column_match_costs(&h.view(), &h_est.view());
        if norms[idx] > 0.0 {
            combined = combined + cost / norms[idx];
        }
    }
    let perm = minimize_assignment(&combined.view());
    let total: f64 = perm
        .iter()
        .enumerate()
        .map(|(r, &s)| combined[[r, s]])
        .sum();
    Ok(total / 3.0)
}

fn run_algorithm(
    algorithm: Algorithm,
    tensor: &DenseTensor3,
    rank: usize,
    cfg: &ExperimentConfig,
    cell_seed: u64,
) -> Result<(FactorTriple, Option<usize>)> {
    let sketch = SketchConfig::new(
        rank,
        cfg.oversample,
        cfg.max_power,
        derive_seed(cell_seed, &[salts::SKETCH]),
    );
    match algorithm {
        Algorithm::Direct => {
            let opts = direct_solver_opts(derive_seed(cell_seed, &[salts::ALGO, 0]));
            Ok((als_cpd(tensor, rank, &opts)?.factors, None))
        }
        Algorithm::Rap => {
            // The single-projection baseline runs at the base power order;
            // exploring higher orders is what the coupled pipeline adds.
            let opts = core_solver_opts(derive_seed(cell_seed, &[salts::ALGO, 1]));
            Ok((rap_cpd(tensor, &sketch, 1, &opts)?.factors, None))
        }
        Algorithm::Corap => {
            let opts = core_solver_opts(derive_seed(cell_seed, &[salts::ALGO, 2]));
            let result = corap_cpd(tensor, &sketch, rank, &opts)?;
            Ok((result.full_factors, Some(result.m_opt)))
        }
    }
}

/// Derive the instance seed of one cell, exposed so tests and tooling can
/// regenerate the exact tensor a record used.
pub fn cell_instance_seed(master: u64, trial: usize, snr_idx: usize, rank_idx: usize) -> u64 {
    let cell = derive_seed(
        master,
        &[salts::CELL, trial as u64, snr_idx as u64, rank_idx as u64],
    );
    derive_seed(cell, &[salts::INSTANCE])
}

fn run_cell(
    cfg: &ExperimentConfig,
    rank_idx: usize,
    rank: usize,
    snr_idx: usize,
    snr_db: f64,
    trial: usize,
) -> Result<Vec<RunRecord>> {
    let cell_seed = derive_seed(
        cfg.seed,
        &[salts::CELL, trial as u64, snr_idx as u64, rank_idx as u64],
    );
    let (tensor, truth) =
        generate_instance(cfg.dims, rank, snr_db, derive_seed(cell_seed, &[salts::INSTANCE]))?;
    let mut records = Vec::with_capacity(cfg.algorithms.len());
    for &algorithm in &cfg.algorithms {
        let started = Instant::now();
        let outcome = run_algorithm(algorithm, &tensor, rank, cfg, cell_seed);
        let wall_time_s = started.elapsed().as_secs_f64();
        let (mre, m_opt, status) = match outcome {
            Ok((factors, m_opt)) => {
                let mre = if cfg.strict_perm {
                    mean_relative_error_strict(&truth, &factors)?
                } else {
                    mean_relative_error(&truth, &factors)?
                };
                (mre, m_opt, "ok".to_string())
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                (f64::NAN, None, format!("error:{msg}"))
            }
        };
        records.push(RunRecord {
            trial,
            algorithm,
            dims: cfg.dims,
            rank,
            oversample: cfg.oversample,
            max_power: cfg.max_power,
            snr_db,
            mre,
            wall_time_s,
            m_opt,
            status,
        });
    }
    Ok(records)
}

/// Run the full sweep: every trial × SNR × rank cell, every configured
/// algorithm on the identical instance. Records stream to the CSV file (when
/// configured) as they complete; the returned list is ordered by cell then
/// algorithm regardless of parallelism.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let writer: Option<Mutex<BufWriter<File>>> = match &cfg.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "{RECORD_HEADER}")?;
            w.flush()?;
            Some(Mutex::new(w))
        }
        None => None,
    };

    let ranks = cfg.ranks();
    let mut cells = Vec::new();
    for (rank_idx, &rank) in ranks.iter().enumerate() {
        for (snr_idx, &snr) in cfg.snr_db.iter().enumerate() {
            for trial in 0..cfg.n_trials {
                cells.push((rank_idx, rank, snr_idx, snr, trial));
            }
        }
    }

    let persist = |records: &[RunRecord]| -> Result<()> {
        if let Some(w) = &writer {
            let mut guard = w.lock().unwrap_or_else(|p| p.into_inner());
            for record in records {
                writeln!(guard, "{}", record.to_csv_line())?;
            }
            guard.flush()?;
        }
        Ok(())
    };

    let mut indexed: Vec<(usize, Vec<RunRecord>)> = if cfg.threads == 1 {
        let mut out = Vec::with_capacity(cells.len());
        for (idx, &(rank_idx, rank, snr_idx, snr, trial)) in cells.iter().enumerate() {
            let records = run_cell(cfg, rank_idx, rank, snr_idx, snr, trial)?;
            persist(&records)?;
            out.push((idx, records));
        }
        out
    } else {
        use rayon::prelude::*;
        let body = || -> Result<Vec<(usize, Vec<RunRecord>)>> {
            cells
                .par_iter()
                .enumerate()
                .map(|(idx, &(rank_idx, rank, snr_idx, snr, trial))| {
                    let records = run_cell(cfg, rank_idx, rank, snr_idx, snr, trial)?;
                    persist(&records)?;
                    Ok((idx, records))
                })
                .collect()
        };
        if cfg.threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| CorapError::InvalidConfig(e.to_string()))?;
            pool.install(body)?
        } else {
            body()?
        }
    };

    indexed.sort_by_key(|(idx, _)| *idx);
    Ok(indexed.into_iter().flat_map(|(_, r)| r).collect())
}

/// Aggregate of one `(algorithm, snr, rank)` cell.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub snr_db: f64,
    pub rank: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean_mre: f64,
    pub stderr_mre: f64,
    pub mean_wall_time_s: f64,
}

/// Per-cell means and standard errors. Failed runs (NaN error) are excluded
/// from the means but counted. Rows come back ordered by rank, SNR, then
/// algorithm.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    use std::collections::HashMap;
    let mut groups: HashMap<(usize, u64, Algorithm), Vec<&RunRecord>> = HashMap::new();
    for record in records {
        groups
            .entry((record.rank, record.snr_db.to_bits(), record.algorithm))
            .or_default()
            .push(record);
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_values()
        .map(|group| {
            let ok: Vec<&&RunRecord> = group.iter().filter(|r| !r.mre.is_nan()).collect();
            let n_ok = ok.len();
            let mean = |xs: &dyn Fn(&RunRecord) -> f64| -> f64 {
                if n_ok == 0 {
                    f64::NAN
                } else {
                    ok.iter().map(|r| xs(r)).sum::<f64>() / n_ok as f64
                }
            };
            let mean_mre = mean(&|r| r.mre);
            let stderr_mre = if n_ok > 1 {
                let var = ok
                    .iter()
                    .map(|r| (r.mre - mean_mre).powi(2))
                    .sum::<f64>()
                    / (n_ok - 1) as f64;
                (var / n_ok as f64).sqrt()
            } else {
                0.0
            };
            let sample = group[0];
            SummaryRow {
                algorithm: sample.algorithm,
                snr_db: sample.snr_db,
                rank: sample.rank,
                n_ok,
                n_failed: group.len() - n_ok,
                mean_mre,
                stderr_mre,
                mean_wall_time_s: mean(&|r| r.wall_time_s),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.algorithm.cmp(&b.algorithm))
    });
    rows
}

/// Format a float with 17 significant digits so a read-back parses to the
/// identical bits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl RunRecord {
    pub fn to_csv_line(&self) -> String {
        let m_opt = self
            .m_opt
            .map(|m| m.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.algorithm,
            self.dims.0,
            self.dims.1,
            self.dims.2,
            self.rank,
            self.oversample,
            self.max_power,
            format_float(self.snr_db),
            format_float(self.mre),
            format_float(self.wall_time_s),
            m_opt,
            self.status
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(CorapError::MalformedFile(format!(
                "expected 13 CSV fields, got {}: {line:?}",
                fields.len()
            )));
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| CorapError::MalformedFile(format!("bad {what}: {s:?}")))
        };
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| CorapError::MalformedFile(format!("bad {what}: {s:?}")))
        };
        Ok(RunRecord {
            trial: parse_usize(fields[0], "trial")?,
            algorithm: Algorithm::parse(fields[1])?,
            dims: (
                parse_usize(fields[2], "I")?,
                parse_usize(fields[3], "J")?,
                parse_usize(fields[4], "K")?,
            ),
            rank: parse_usize(fields[5], "R")?,
            oversample: parse_usize(fields[6], "Rprime")?,
            max_power: parse_usize(fields[7], "M")?,
            snr_db: parse_f64(fields[8], "snr_db")?,
            mre: parse_f64(fields[9], "mre")?,
            wall_time_s: parse_f64(fields[10], "wall_time_s")?,
            m_opt: if fields[11].is_empty() {
                None
            } else {
                Some(parse_usize(fields[11], "m_opt")?)
            },
            status: fields[12].to_string(),
        })
    }
}

/// Read a record CSV produced by [`run_experiment`].
pub fn read_records_csv<P: AsRef<Path>>(path: P) -> Result<Vec<RunRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header.trim() != RECORD_HEADER {
                return Err(CorapError::MalformedFile(format!(
                    "unexpected header {header:?}"
                )));
            }
        }
        None => return Err(CorapError::MalformedFile("empty file".into())),
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(RunRecord::from_csv_line(&line)?);
    }
    Ok(records)
}

/// Write summary rows as CSV.
pub fn write_summary_csv<P: AsRef<Path>>(rows: &[SummaryRow], path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "algorithm,snr_db,rank,n_ok,n_failed,mean_mre,stderr_mre,mean_wall_time_s"
    )?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.algorithm,
            format_float(row.snr_db),
            row.rank,
            row.n_ok,
            row.n_failed,
            format_float(row.mean_mre),
            format_float(row.stderr_mre),
            format_float(row.mean_wall_time_s)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table of summary rows.
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:>8} {:>5} {:>5} {:>5} {:>13} {:>13} {:>11}\n",
        "algo", "snr_db", "rank", "ok", "fail", "mean_mre", "stderr", "time_s"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<8} {:>8} {:>5} {:>5} {:>5} {:>13.6e} {:>13.6e} {:>11.4}\n",
            row.algorithm.to_string(),
            if row.snr_db.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.1}", row.snr_db)
            },
            row.rank,
            row.n_ok,
            row.n_failed,
            row.mean_mre,
            row.stderr_mre,
            row.mean_wall_time_s
        ));
    }
    out
}

/// Partially specified configuration, as parsed from a config file or CLI
/// flags. Later sources override earlier ones field by field.
#[derive(Clone, Debug, Default)]
pub struct PartialConfig {
    pub dims: Option<(usize, usize, usize)>,
    pub rank: Option<usize>,
    pub oversample: Option<usize>,
    pub max_power: Option<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub rank_sweep: Option<Vec<usize>>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub n_trials: Option<usize>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
    pub strict_perm: Option<bool>,
}

impl PartialConfig {
    /// Apply one `key = value` pair using the same key names as the CLI
    /// flags (without the leading dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| CorapError::InvalidConfig(format!("bad {what}: {value:?}"));
        match key {
            "dims" => {
                let parts: Vec<usize> = value
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("dims"))?;
                if parts.len() != 3 {
                    return Err(bad("dims"));
                }
                self.dims = Some((parts[0], parts[1], parts[2]));
            }
            "rank" => self.rank = Some(value.trim().parse().map_err(|_| bad("rank"))?),
            "oversample" => {
                self.oversample = Some(value.trim().parse().map_err(|_| bad("oversample"))?)
            }
            "max-power" => {
                self.max_power = Some(value.trim().parse().map_err(|_| bad("max-power"))?)
            }
            "snr" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("snr"))?;
                if parts.is_empty() {
                    return Err(bad("snr"));
                }
                self.snr_db = Some(parts);
            }
            "rank-sweep" => {
                let parts: Vec<usize> = value
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("rank-sweep"))?;
                self.rank_sweep = Some(parts);
            }
            "algos" => {
                let parts: Vec<Algorithm> = value
                    .split(',')
                    .map(Algorithm::parse)
                    .collect::<Result<_>>()?;
                self.algorithms = Some(parts);
            }
            "trials" => self.n_trials = Some(value.trim().parse().map_err(|_| bad("trials"))?),
            "seed" => self.seed = Some(value.trim().parse().map_err(|_| bad("seed"))?),
            "out" => self.output_path = Some(PathBuf::from(value.trim())),
            "threads" => self.threads = Some(value.trim().parse().map_err(|_| bad("threads"))?),
            "strict-perm" => {
                self.strict_perm = Some(value.trim().parse().map_err(|_| bad("strict-perm"))?)
            }
            other => {
                return Err(CorapError::InvalidConfig(format!(
                    "unknown configuration key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Overlay `other` on top of `self` (fields set in `other` win).
    pub fn overlay(mut self, other: PartialConfig) -> PartialConfig {
        macro_rules! take {
            ($field:ident) => {
                if other.$field.is_some() {
                    self.$field = other.$field;
                }
            };
        }
        take!(dims);
        take!(rank);
        take!(oversample);
        take!(max_power);
        take!(snr_db);
        take!(rank_sweep);
        take!(algorithms);
        take!(n_trials);
        take!(seed);
        take!(output_path);
        take!(threads);
        take!(strict_perm);
        self
    }

    /// Finish into a runnable configuration; `dims` and `rank` are required.
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let dims = self
            .dims
            .ok_or_else(|| CorapError::InvalidConfig("dims not specified".into()))?;
        let rank = self
            .rank
            .ok_or_else(|| CorapError::InvalidConfig("rank not specified".into()))?;
        let mut cfg = ExperimentConfig::new(dims, rank);
        if let Some(v) = self.oversample {
            cfg.oversample = v;
        }
        if let Some(v) = self.max_power {
            cfg.max_power = v;
        }
        if let Some(v) = self.snr_db {
            cfg.snr_db = v;
        }
        cfg.rank_sweep = self.rank_sweep;
        if let Some(v) = self.algorithms {
            cfg.algorithms = v;
        }
        if let Some(v) = self.n_trials {
            cfg.n_trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.output_path = self.output_path;
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = self.strict_perm {
            cfg.strict_perm = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse a flat `key = value` configuration file mirroring the CLI flags.
/// Blank lines and `#` comments are ignored.
pub fn parse_config_file<P: AsRef<Path>>(path: P) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut partial = PartialConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CorapError::InvalidConfig(format!(
                "line {}: expected key = value, got {raw:?}",
                lineno + 1
            )));
        };
        partial.set(key.trim(), value.trim())?;
    }
    Ok(partial)
}
