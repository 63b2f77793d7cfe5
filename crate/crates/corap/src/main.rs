//! Command-line entry points for the benchmark harness and the tensor file
//! tooling. See `corap --help`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use corap::bench::{
    format_summary_table, parse_config_file, run_experiment, summarize, write_summary_csv,
    Algorithm, PartialConfig,
};
use corap::cpd::{als_cpd, rap_cpd};
use corap::tensor::{read_crt3_file, write_crt3_file, FactorTriple};
use corap::{corap_cpd, CorapError, SketchConfig};

const USAGE: &str = "\
corap — coupled random projection CPD toolkit

USAGE:
  corap bench [FLAGS]       run a Monte Carlo sweep and write records as CSV
  corap decompose [FLAGS]   decompose one tensor file into factor files
  corap gen [FLAGS]         write a synthetic instance in the CRT3 format

BENCH FLAGS (also valid as `key = value` lines in --config; CLI wins):
  --dims I,J,K          tensor dimensions (required unless in config)
  --rank R              CP rank (required unless in config)
  --oversample R'       sketch width, default 2·R
  --max-power M         number of coupled projections, default 2
  --snr LIST|inf        SNR points in dB, e.g. -2,2,6,10 or inf (default inf)
  --algos LIST          subset of direct,rap,corap (default all)
  --trials N            Monte Carlo trials per cell (default 1)
  --seed S              master seed (default 0)
  --out PATH            per-run record CSV (summary goes to PATH.summary.csv)
  --threads N           1 = serial timing mode, 0 = default pool (default 0)
  --rank-sweep LIST     sweep these ranks instead of --rank
  --strict-perm BOOL    common-permutation error metric (default false)
  --config FILE         flat key = value file mirroring the flags

DECOMPOSE FLAGS:
  --in PATH             input tensor in CRT3 format (required)
  --rank R              CP rank (required)
  --algo NAME           direct | rap | corap (default corap)
  --oversample R'       sketch width, default 2·R
  --max-power M         default 2
  --seed S              default 0
  --out PREFIX          writes PREFIX.A.csv, PREFIX.B.csv, PREFIX.C.csv

GEN FLAGS:
  --dims I,J,K          tensor dimensions (required)
  --rank R              CP rank (required)
  --snr DB|inf          SNR in dB (default inf = noiseless)
  --seed S              default 0
  --out PATH            output CRT3 file (required)
  --truth PREFIX        also write ground-truth factors as CSV
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some((command, rest)) = args.split_first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    };
    let result = match command.as_str() {
        "bench" => cmd_bench(rest),
        "decompose" => cmd_decompose(rest),
        "gen" => cmd_gen(rest),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        other => Err(CorapError::InvalidConfig(format!(
            "unknown subcommand {other:?}"
        ))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Split `--key value` pairs; returns (key, value) tuples.
fn parse_flags(args: &[String]) -> Result<Vec<(String, String)>, CorapError> {
    let mut out = Vec::new();
    let mut iter = args.iter();
    while let Some(flag) = iter.next() {
        let Some(key) = flag.strip_prefix("--") else {
            return Err(CorapError::InvalidConfig(format!(
                "expected --flag, got {flag:?}"
            )));
        };
        let Some(value) = iter.next() else {
            return Err(CorapError::InvalidConfig(format!(
                "flag --{key} needs a value"
            )));
        };
        out.push((key.to_string(), value.clone()));
    }
    Ok(out)
}

fn cmd_bench(args: &[String]) -> Result<(), CorapError> {
    let flags = parse_flags(args)?;
    let mut from_file = PartialConfig::default();
    let mut from_cli = PartialConfig::default();
    for (key, value) in &flags {
        if key == "config" {
            from_file = parse_config_file(value).map_err(|e| e.at_stage("config"))?;
        } else {
            from_cli
                .set(key, value)
                .map_err(|e| e.at_stage("flags"))?;
        }
    }
    let cfg = from_file
        .overlay(from_cli)
        .into_config()
        .map_err(|e| e.at_stage("config"))?;

    eprintln!(
        "bench: dims {:?}, ranks {:?}, snr {:?}, algos {:?}, {} trial(s), seed {}",
        cfg.dims,
        cfg.ranks(),
        cfg.snr_db,
        cfg.algorithms.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
        cfg.n_trials,
        cfg.seed
    );
    let records = run_experiment(&cfg).map_err(|e| e.at_stage("experiment"))?;
    let rows = summarize(&records);
    print!("{}", format_summary_table(&rows));
    if let Some(path) = &cfg.output_path {
        let summary_path = summary_path_for(path);
        write_summary_csv(&rows, &summary_path).map_err(|e| e.at_stage("summary"))?;
        eprintln!(
            "wrote {} record(s) to {} and summary to {}",
            records.len(),
            path.display(),
            summary_path.display()
        );
    }
    let failures = records.iter().filter(|r| r.mre.is_nan()).count();
    if failures > 0 {
        return Err(CorapError::InvalidConfig(format!(
            "{failures} run(s) failed; see the status column"
        ))
        .at_stage("experiment"));
    }
    Ok(())
}

fn summary_path_for(records_path: &Path) -> PathBuf {
    let mut name = records_path.to_path_buf().into_os_string();
    name.push(".summary.csv");
    PathBuf::from(name)
}

fn write_factor_csv(path: &Path, m: &ndarray::Array2<f64>) -> Result<(), CorapError> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| corap::bench::format_float(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn write_factors(prefix: &str, f: &FactorTriple) -> Result<(), CorapError> {
    for (suffix, m) in [("A", &f.a), ("B", &f.b), ("C", &f.c)] {
        let path = PathBuf::from(format!("{prefix}.{suffix}.csv"));
        write_factor_csv(&path, m)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_decompose(args: &[String]) -> Result<(), CorapError> {
    let flags = parse_flags(args)?;
    let mut input: Option<PathBuf> = None;
    let mut rank: Option<usize> = None;
    let mut algo = Algorithm::Corap;
    let mut oversample: Option<usize> = None;
    let mut max_power = 2usize;
    let mut seed = 0u64;
    let mut out: Option<String> = None;
    for (key, value) in &flags {
        let bad = || CorapError::InvalidConfig(format!("bad --{key}: {value:?}"));
        match key.as_str() {
            "in" => input = Some(PathBuf::from(value)),
            "rank" => rank = Some(value.parse().map_err(|_| bad())?),
            "algo" => algo = Algorithm::parse(value)?,
            "oversample" => oversample = Some(value.parse().map_err(|_| bad())?),
            "max-power" => max_power = value.parse().map_err(|_| bad())?,
            "seed" => seed = value.parse().map_err(|_| bad())?,
            "out" => out = Some(value.clone()),
            _ => return Err(CorapError::InvalidConfig(format!("unknown flag --{key}"))),
        }
    }
    let input = input.ok_or_else(|| CorapError::InvalidConfig("--in is required".into()))?;
    let rank = rank.ok_or_else(|| CorapError::InvalidConfig("--rank is required".into()))?;

    let tensor = read_crt3_file(&input).map_err(|e| e.at_stage("read"))?;
    eprintln!(
        "decompose: {} with dims {:?}, rank {rank}, algorithm {algo}",
        input.display(),
        tensor.dims()
    );
    let opts = corap::bench::core_solver_opts(seed);
    let sketch = SketchConfig::new(rank, oversample.unwrap_or(2 * rank), max_power, seed);
    let (factors, residual, m_opt) = match algo {
        Algorithm::Direct => {
            let opts = corap::bench::direct_solver_opts(seed);
            let r = als_cpd(&tensor, rank, &opts).map_err(|e| e.at_stage("direct"))?;
            (r.factors, r.rel_residual, None)
        }
        Algorithm::Rap => {
            let r = rap_cpd(&tensor, &sketch, 1, &opts).map_err(|e| e.at_stage("rap"))?;
            (r.factors, r.rel_residual, None)
        }
        Algorithm::Corap => {
            let r = corap_cpd(&tensor, &sketch, rank, &opts).map_err(|e| e.at_stage("corap"))?;
            let residual = corap::cpd::full_rel_residual(&tensor, &r.full_factors)
                .map_err(|e| e.at_stage("corap"))?;
            (r.full_factors, residual, Some(r.m_opt))
        }
    };
    println!("relative residual: {residual:.6e}");
    if let Some(m) = m_opt {
        println!("selected power order m_opt: {m}");
    }
    if let Some(prefix) = out {
        write_factors(&prefix, &factors).map_err(|e| e.at_stage("write"))?;
    }
    Ok(())
}

fn cmd_gen(args: &[String]) -> Result<(), CorapError> {
    let flags = parse_flags(args)?;
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut rank: Option<usize> = None;
    let mut snr = f64::INFINITY;
    let mut seed = 0u64;
    let mut out: Option<PathBuf> = None;
    let mut truth_prefix: Option<String> = None;
    for (key, value) in &flags {
        let bad = || CorapError::InvalidConfig(format!("bad --{key}: {value:?}"));
        match key.as_str() {
            "dims" => {
                let parts: Vec<usize> = value
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if parts.len() != 3 {
                    return Err(bad());
                }
                dims = Some((parts[0], parts[1], parts[2]));
            }
            "rank" => rank = Some(value.parse().map_err(|_| bad())?),
            "snr" => snr = value.parse().map_err(|_| bad())?,
            "seed" => seed = value.parse().map_err(|_| bad())?,
            "out" => out = Some(PathBuf::from(value)),
            "truth" => truth_prefix = Some(value.clone()),
            _ => return Err(CorapError::InvalidConfig(format!("unknown flag --{key}"))),
        }
    }
    let dims = dims.ok_or_else(|| CorapError::InvalidConfig("--dims is required".into()))?;
    let rank = rank.ok_or_else(|| CorapError::InvalidConfig("--rank is required".into()))?;
    let out = out.ok_or_else(|| CorapError::InvalidConfig("--out is required".into()))?;

    let (tensor, truth) =
        corap::bench::generate_instance(dims, rank, snr, seed).map_err(|e| e.at_stage("gen"))?;
    write_crt3_file(&tensor, &out).map_err(|e| CorapError::from(e).at_stage("write"))?;
    eprintln!(
        "wrote {:?} tensor (snr {snr} dB, seed {seed}) to {}",
        dims,
        out.display()
    );
    if let Some(prefix) = truth_prefix {
        write_factors(&prefix, &truth).map_err(|e| e.at_stage("write"))?;
    }
    Ok(())
}
