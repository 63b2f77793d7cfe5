//! The CRT3 tensor file format round trip, library side.
//!
//! Writes a synthetic instance to disk, reads it back, decomposes it, and
//! scores the recovered factors against the ground truth. The same flow is
//! available from the shell via `corap gen` and `corap decompose`.
//!
//! ```bash
//! cargo run --example tensor_file_io --release
//! ```

use anyhow::Result;

use corap::bench::{core_solver_opts, generate_instance, mean_relative_error};
use corap::tensor::{read_crt3_file, write_crt3_file};
use corap::{corap_cpd, SketchConfig};

fn main() -> Result<()> {
    let dims = (30, 30, 30);
    let rank = 4;
    let (tensor, truth) = generate_instance(dims, rank, 20.0, 77)?;

    let path = std::env::temp_dir().join("corap_example.crt3");
    write_crt3_file(&tensor, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!(
        "wrote {:?} tensor to {} ({} bytes: 4 magic + 3x8 dims + {}x8 data)",
        dims,
        path.display(),
        bytes,
        dims.0 * dims.1 * dims.2
    );

    let loaded = read_crt3_file(&path)?;
    assert_eq!(loaded, tensor, "round trip is bit exact");
    println!("read back bit-identical");

    let sketch = SketchConfig::new(rank, 2 * rank, 2, 5);
    let result = corap_cpd(&loaded, &sketch, rank, &core_solver_opts(6))?;
    println!(
        "decomposed at rank {rank}: mre {:.3e}, m_opt {}",
        mean_relative_error(&truth, &result.full_factors)?,
        result.m_opt
    );

    std::fs::remove_file(&path).ok();
    Ok(())
}
