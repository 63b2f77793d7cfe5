//! Dense third-order tensor storage and multilinear algebra primitives.
//!
//! Layout convention: entries are stored row-major by `(i, j, k)` — the first
//! index varies slowest, the third fastest. Under that layout the mode-1
//! matricization is a plain reshape, and the matricized factor forms are
//!
//! ```text
//! T1 = A (B ⊙ C)ᵀ,   T2 = B (A ⊙ C)ᵀ,   T3 = C (A ⊙ B)ᵀ,
//! ```
//!
//! where `⊙` is the column-wise Khatri-Rao product built by [`khatri_rao`].
//! Indices are 1-based in formulas and documentation, 0-based in code; the
//! boundary stays inside this module.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, ArrayView2};

use crate::error::{CorapError, Result};

/// Magic bytes opening the binary tensor file format.
pub const CRT3_MAGIC: &[u8; 4] = b"CRT3";

/// A dense real third-order tensor with fixed `(i, j, k)` row-major layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor3 {
    data: Array3<f64>,
}

impl DenseTensor3 {
    /// Wrap a flat buffer (layout order) of length `I·J·K`.
    pub fn new(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let (i, j, k) = dims;
        if data.len() != i * j * k {
            return Err(CorapError::ShapeMismatch(format!(
                "buffer of length {} cannot hold a {i}x{j}x{k} tensor",
                data.len()
            )));
        }
        let data = Array3::from_shape_vec((i, j, k), data)
            .map_err(|e| CorapError::ShapeMismatch(e.to_string()))?;
        Ok(Self { data })
    }

    pub fn from_array(data: Array3<f64>) -> Self {
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().to_owned()
        };
        Self { data }
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            data: Array3::zeros(dims),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    pub fn array(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[[i, j, k]]
    }

    /// Square root of the sum of squared entries; 0 iff the tensor is zero.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self + scale · other`, entrywise.
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(CorapError::ShapeMismatch(format!(
                "cannot combine tensors of dims {:?} and {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(Self {
            data: &self.data + &(&other.data * scale),
        })
    }
}

impl std::ops::Index<(usize, usize, usize)> for DenseTensor3 {
    type Output = f64;
    fn index(&self, idx: (usize, usize, usize)) -> &f64 {
        &self.data[[idx.0, idx.1, idx.2]]
    }
}

/// The three CPD factor matrices `A (I×R)`, `B (J×R)`, `C (K×R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorTriple {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Array2<f64>,
}

impl FactorTriple {
    pub fn new(a: Array2<f64>, b: Array2<f64>, c: Array2<f64>) -> Result<Self> {
        let r = a.ncols();
        if b.ncols() != r || c.ncols() != r {
            return Err(CorapError::ShapeMismatch(format!(
                "factor column counts differ: {} / {} / {}",
                r,
                b.ncols(),
                c.ncols()
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn rank(&self) -> usize {
        self.a.ncols()
    }

    /// Tensor dimensions implied by the factor row counts.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.nrows(), self.b.nrows(), self.c.nrows())
    }
}

fn check_mode(mode: usize) -> Result<()> {
    if (1..=3).contains(&mode) {
        Ok(())
    } else {
        Err(CorapError::InvalidMode(mode))
    }
}

/// Mode-n matricization.
///
/// With 1-based index arithmetic the three unfoldings satisfy
/// `(T1)_{i,(j−1)K+k} = (T2)_{j,(i−1)K+k} = (T3)_{k,(i−1)J+j} = t_{i,j,k}`.
pub fn matricize(t: &DenseTensor3, mode: usize) -> Result<Array2<f64>> {
    check_mode(mode)?;
    let (i, j, k) = t.dims();
    let a = t.array();
    let out = match mode {
        1 => a
            .view()
            .into_shape_with_order((i, j * k))
            .expect("standard layout reshapes")
            .to_owned(),
        2 => {
            let perm = a.view().permuted_axes([1, 0, 2]);
            let owned = perm.as_standard_layout().to_owned();
            owned
                .into_shape_with_order((j, i * k))
                .expect("contiguous reshape")
        }
        _ => {
            let perm = a.view().permuted_axes([2, 0, 1]);
            let owned = perm.as_standard_layout().to_owned();
            owned
                .into_shape_with_order((k, i * j))
                .expect("contiguous reshape")
        }
    };
    Ok(out)
}

/// Inverse of [`matricize`]: rebuild the tensor from its mode-n unfolding.
pub fn dematricize(
    m: &ArrayView2<f64>,
    mode: usize,
    dims: (usize, usize, usize),
) -> Result<DenseTensor3> {
    check_mode(mode)?;
    let (i, j, k) = dims;
    let expected = match mode {
        1 => (i, j * k),
        2 => (j, i * k),
        _ => (k, i * j),
    };
    if m.dim() != expected {
        return Err(CorapError::ShapeMismatch(format!(
            "mode-{mode} unfolding of a {i}x{j}x{k} tensor must be {}x{}, got {}x{}",
            expected.0,
            expected.1,
            m.nrows(),
            m.ncols()
        )));
    }
    let owned = m.as_standard_layout().to_owned();
    let data = match mode {
        1 => owned
            .into_shape_with_order((i, j, k))
            .expect("contiguous reshape"),
        2 => {
            let t = owned
                .into_shape_with_order((j, i, k))
                .expect("contiguous reshape");
            t.permuted_axes([1, 0, 2]).as_standard_layout().to_owned()
        }
        _ => {
            let t = owned
                .into_shape_with_order((k, i, j))
                .expect("contiguous reshape");
            t.permuted_axes([1, 2, 0]).as_standard_layout().to_owned()
        }
    };
    Ok(DenseTensor3::from_array(data))
}

/// Mode-n product `t ×_n g`: contracts the mode-n index of `t` against the
/// columns of `g`, replacing that dimension with `g`'s row count.
pub fn mode_n_product(t: &DenseTensor3, g: &ArrayView2<f64>, mode: usize) -> Result<DenseTensor3> {
    check_mode(mode)?;
    let (i, j, k) = t.dims();
    let mode_dim = [i, j, k][mode - 1];
    if g.ncols() != mode_dim {
        return Err(CorapError::ShapeMismatch(format!(
            "mode-{mode} product needs {mode_dim} columns, got {}",
            g.ncols()
        )));
    }
    let unfolded = matricize(t, mode)?;
    let product = g.dot(&unfolded);
    let mut dims = [i, j, k];
    dims[mode - 1] = g.nrows();
    dematricize(&product.view(), mode, (dims[0], dims[1], dims[2]))
}

/// Column-wise Khatri-Rao product: column `r` of the result is the Kronecker
/// product of column `r` of `a` with column `r` of `b`.
pub fn khatri_rao(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let (ia, r) = a.dim();
    let (jb, rb) = b.dim();
    if r != rb {
        return Err(CorapError::ShapeMismatch(format!(
            "Khatri-Rao column counts differ: {r} vs {rb}"
        )));
    }
    let mut out = Array2::<f64>::zeros((ia * jb, r));
    for i in 0..ia {
        for j in 0..jb {
            let mut row = out.row_mut(i * jb + j);
            for c in 0..r {
                row[c] = a[[i, c]] * b[[j, c]];
            }
        }
    }
    Ok(out)
}

/// Sum of rank-1 terms `Σ_r a_r ∘ b_r ∘ c_r` as a dense tensor.
pub fn cpd_reconstruct(f: &FactorTriple) -> Result<DenseTensor3> {
    let kr = khatri_rao(&f.b.view(), &f.c.view())?;
    let t1 = f.a.dot(&kr.t());
    dematricize(&t1.view(), 1, f.dims())
}

/// Column-stacking vectorization: entry `(i, j)` lands at `j·rows + i`.
pub fn vectorize(m: &ArrayView2<f64>) -> Array1<f64> {
    Array1::from_iter(m.t().iter().copied())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &Array1<f64>, rows: usize, cols: usize) -> Result<Array2<f64>> {
    if v.len() != rows * cols {
        return Err(CorapError::ShapeMismatch(format!(
            "vector of length {} cannot fill a {rows}x{cols} matrix",
            v.len()
        )));
    }
    Ok(Array2::from_shape_fn((rows, cols), |(r, c)| v[c * rows + r]))
}

/// Write a tensor in the binary format: magic `CRT3`, three little-endian
/// `u64` dims, then `I·J·K` little-endian IEEE-754 doubles in layout order.
pub fn write_crt3<W: Write>(t: &DenseTensor3, w: &mut W) -> std::io::Result<()> {
    let (i, j, k) = t.dims();
    w.write_all(CRT3_MAGIC)?;
    for d in [i, j, k] {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let slice = t.array().as_slice().expect("standard layout");
    let mut buf = Vec::with_capacity(8 * 1024);
    for chunk in slice.chunks(1024) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Read a tensor written by [`write_crt3`].
pub fn read_crt3<R: Read>(r: &mut R) -> Result<DenseTensor3> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CRT3_MAGIC {
        return Err(CorapError::MalformedFile(format!(
            "bad magic {magic:?}, expected {CRT3_MAGIC:?}"
        )));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let v = u64::from_le_bytes(b);
        *d = usize::try_from(v)
            .map_err(|_| CorapError::MalformedFile(format!("dimension {v} too large")))?;
    }
    let len = dims[0]
        .checked_mul(dims[1])
        .and_then(|p| p.checked_mul(dims[2]))
        .ok_or_else(|| CorapError::MalformedFile(format!("dims {dims:?} overflow")))?;
    let mut data = Vec::with_capacity(len);
    let mut b = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut b)?;
        data.push(f64::from_le_bytes(b));
    }
    DenseTensor3::new((dims[0], dims[1], dims[2]), data)
}

pub fn write_crt3_file<P: AsRef<Path>>(t: &DenseTensor3, path: P) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_crt3(t, &mut w)?;
    w.flush()
}

pub fn read_crt3_file<P: AsRef<Path>>(path: P) -> Result<DenseTensor3> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_crt3(&mut r)
}

/// Orthonormal projector triple helper used across the sketch pipeline:
/// `t ×₁ Uᵀ ×₂ Vᵀ ×₃ Wᵀ`.
pub(crate) fn project_all_modes(
    t: &DenseTensor3,
    u: &ArrayView2<f64>,
    v: &ArrayView2<f64>,
    w: &ArrayView2<f64>,
) -> Result<DenseTensor3> {
    let g = mode_n_product(t, &u.t(), 1)?;
    let g = mode_n_product(&g, &v.t(), 2)?;
    mode_n_product(&g, &w.t(), 3)
}

/// Shared handle for the third-mode projector reused by every triad.
pub type SharedProjector = Arc<Array2<f64>>;
