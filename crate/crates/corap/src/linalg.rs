//! Matrix kernels for the sketching pipeline: economy QR, truncated SVD,
//! best rank-1 approximation, Moore-Penrose pseudoinverse, and normalized
//! subspace (power) iteration.
//!
//! Every SVD in the pipeline is tall and skinny (at most a few dozen
//! columns), so a one-sided Jacobi sweep on the short side is accurate and
//! fast enough; there is no dependency on an external LAPACK. Column signs of
//! QR and SVD outputs are fixed so the first nonzero entry of each left
//! vector is nonnegative, which keeps seeded runs bit-reproducible.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{CorapError, Result};

/// Result of a truncated singular value decomposition: `U diag(s) Vᵀ`
/// approximates the input, `s` sorted nonincreasing, `U`/`V` orthonormal.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: Array2<f64>,
    pub s: Array1<f64>,
    pub v: Array2<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Economy QR of a `p×q` matrix with `p ≥ q` via Householder reflections.
///
/// Returns `(Q, R)` with `Q` `p×q` orthonormal and `R` `q×q` upper
/// triangular. Rank-deficient input is permitted; `R` may then carry zero
/// diagonal entries.
pub fn economy_qr(m: &ArrayView2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let (p, q) = m.dim();
    if p < q {
        return Err(CorapError::ShapeMismatch(format!(
            "economy QR needs at least as many rows as columns, got {p}x{q}"
        )));
    }
    // Work on transposed storage so each matrix column is a contiguous row.
    let mut cols: Vec<Vec<f64>> = (0..q).map(|c| m.column(c).to_vec()).collect();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(q);

    for k in 0..q {
        let x_norm = norm(&cols[k][k..]);
        if x_norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = cols[k][k];
        let alpha = if x0 >= 0.0 { -x_norm } else { x_norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let v_norm = norm(&v);
        for t in v.iter_mut() {
            *t /= v_norm;
        }
        for col in cols.iter_mut().skip(k) {
            let tail = &mut col[k..];
            let c = 2.0 * dot(&v, tail);
            for (t, vt) in tail.iter_mut().zip(&v) {
                *t -= c * vt;
            }
        }
        reflectors.push(Some(v));
    }

    let mut r = Array2::<f64>::zeros((q, q));
    for (c, col) in cols.iter().enumerate() {
        for row in 0..=c {
            r[[row, c]] = col[row];
        }
    }

    // Accumulate Q = H_1 … H_q · I economy, applying reflectors in reverse.
    let mut q_cols: Vec<Vec<f64>> = (0..q)
        .map(|c| {
            let mut e = vec![0.0; p];
            e[c] = 1.0;
            e
        })
        .collect();
    for k in (0..q).rev() {
        if let Some(v) = &reflectors[k] {
            for col in q_cols.iter_mut() {
                let tail = &mut col[k..];
                let c = 2.0 * dot(v, tail);
                for (t, vt) in tail.iter_mut().zip(v) {
                    *t -= c * vt;
                }
            }
        }
    }

    // Fix signs: first nonzero entry of each Q column nonnegative.
    for (c, col) in q_cols.iter_mut().enumerate() {
        if let Some(first) = col.iter().find(|v| **v != 0.0) {
            if *first < 0.0 {
                for t in col.iter_mut() {
                    *t = -*t;
                }
                for entry in r.row_mut(c) {
                    *entry = -*entry;
                }
            }
        }
    }

    let mut q_mat = Array2::<f64>::zeros((p, q));
    for (c, col) in q_cols.iter().enumerate() {
        for (row, &val) in col.iter().enumerate() {
            q_mat[[row, c]] = val;
        }
    }
    Ok((q_mat, r))
}

/// Full economy SVD via cyclic one-sided Jacobi on the short side.
fn jacobi_svd(m: &ArrayView2<f64>) -> TruncatedSvd {
    let (p, q) = m.dim();
    if p < q {
        let t = jacobi_svd(&m.t());
        return TruncatedSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }

    let mut a: Vec<Vec<f64>> = (0..q).map(|c| m.column(c).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..q)
        .map(|c| {
            let mut e = vec![0.0; q];
            e[c] = 1.0;
            e
        })
        .collect();

    const TOL: f64 = 1e-15;
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..q.saturating_sub(1) {
            for j in (i + 1)..q {
                let alpha = dot(&a[i], &a[i]);
                let beta = dot(&a[j], &a[j]);
                let gamma = dot(&a[i], &a[j]);
                if alpha * beta == 0.0 || gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = a.split_at_mut(j);
                rotate(&mut head[i], &mut tail[0], c, s);
                let (head, tail) = v.split_at_mut(j);
                rotate(&mut head[i], &mut tail[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..q).collect();
    let norms: Vec<f64> = a.iter().map(|col| norm(col)).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(q);
    let mut s = Array1::<f64>::zeros(q);
    let mut v_out = Array2::<f64>::zeros((q, q));
    let sigma_max = norms[order[0]];
    let cutoff = (p.max(q) as f64) * f64::EPSILON * sigma_max;

    for (slot, &idx) in order.iter().enumerate() {
        s[slot] = norms[idx];
        let mut col = a[idx].clone();
        if norms[idx] > cutoff && norms[idx] > 0.0 {
            for t in col.iter_mut() {
                *t /= norms[idx];
            }
        } else {
            // Numerically zero direction: deterministic orthonormal
            // completion keeps U's columns orthonormal.
            col = complete_column(&u_cols, p);
        }
        u_cols.push(col);
        for row in 0..q {
            v_out[[row, slot]] = v[idx][row];
        }
    }

    // Sign convention: first nonzero entry of each left vector nonnegative.
    for (c, col) in u_cols.iter_mut().enumerate() {
        if let Some(first) = col.iter().find(|x| **x != 0.0) {
            if *first < 0.0 {
                for t in col.iter_mut() {
                    *t = -*t;
                }
                for row in 0..q {
                    v_out[[row, c]] = -v_out[[row, c]];
                }
            }
        }
    }

    let mut u = Array2::<f64>::zeros((p, q));
    for (c, col) in u_cols.iter().enumerate() {
        for (row, &val) in col.iter().enumerate() {
            u[[row, c]] = val;
        }
    }
    TruncatedSvd { u, s, v: v_out }
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Gram-Schmidt a standard basis vector against the columns gathered so far.
fn complete_column(existing: &[Vec<f64>], p: usize) -> Vec<f64> {
    for basis in 0..p {
        let mut w = vec![0.0; p];
        w[basis] = 1.0;
        for col in existing {
            let c = dot(col, &w);
            for (wt, ct) in w.iter_mut().zip(col) {
                *wt -= c * ct;
            }
        }
        let n = norm(&w);
        if n > 0.5 {
            for t in w.iter_mut() {
                *t /= n;
            }
            return w;
        }
    }
    unreachable!("fewer completions than dimensions");
}

/// Top-`r` singular triplets of `m`.
pub fn truncated_svd(m: &ArrayView2<f64>, r: usize) -> Result<TruncatedSvd> {
    let (p, q) = m.dim();
    if r == 0 || r > p.min(q) {
        return Err(CorapError::RankOutOfRange(format!(
            "truncation rank {r} invalid for a {p}x{q} matrix"
        )));
    }
    let full = jacobi_svd(m);
    let svd = TruncatedSvd {
        u: full.u.slice(ndarray::s![.., ..r]).to_owned(),
        s: full.s.slice(ndarray::s![..r]).to_owned(),
        v: full.v.slice(ndarray::s![.., ..r]).to_owned(),
    };
    debug_assert!(orthonormality_defect(&svd.u.view()) < 1e-10);
    debug_assert!(orthonormality_defect(&svd.v.view()) < 1e-10);
    Ok(svd)
}

/// `‖MᵀM − I‖_max`, handy for checking orthonormal columns.
pub fn orthonormality_defect(m: &ArrayView2<f64>) -> f64 {
    let gram = m.t().dot(m);
    let q = gram.nrows();
    let mut worst = 0.0f64;
    for i in 0..q {
        for j in 0..q {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[[i, j]] - want).abs());
        }
    }
    worst
}

/// Best Frobenius rank-1 approximation `m ≈ u vᵀ`, with the singular value
/// absorbed into `u` and `v` unit norm.
pub fn best_rank1(m: &ArrayView2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    if m.iter().all(|&x| x == 0.0) {
        return Err(CorapError::DegenerateRank1);
    }
    let svd = truncated_svd(m, 1)?;
    let sigma = svd.s[0];
    if sigma == 0.0 {
        return Err(CorapError::DegenerateRank1);
    }
    let u = svd.u.column(0).mapv(|x| x * sigma);
    let v = svd.v.column(0).to_owned();
    Ok((u, v))
}

/// Moore-Penrose pseudoinverse with singular values below
/// `max(rows,cols)·eps·σ_max` treated as zero.
pub fn pinv(m: &ArrayView2<f64>) -> Array2<f64> {
    let (p, q) = m.dim();
    if p == 0 || q == 0 {
        return Array2::zeros((q, p));
    }
    let svd = jacobi_svd(m);
    let cutoff = (p.max(q) as f64) * f64::EPSILON * svd.s[0];
    let rank = svd.s.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    if rank == 0 {
        return Array2::zeros((q, p));
    }
    let mut vs = svd.v.slice(ndarray::s![.., ..rank]).to_owned();
    for (c, mut col) in vs.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|x| x / svd.s[c]);
    }
    vs.dot(&svd.u.slice(ndarray::s![.., ..rank]).t())
}

/// Matrix-times-matrix oracle over an implicit matrix `T`, used by the
/// subspace iteration so callers never materialize `Tᵀ`.
pub trait MatrixOp {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `T · x`
    fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64>;
    /// `Tᵀ · x`
    fn apply_t(&self, x: &ArrayView2<f64>) -> Array2<f64>;
}

impl MatrixOp for ArrayView2<'_, f64> {
    fn nrows(&self) -> usize {
        self.dim().0
    }
    fn ncols(&self) -> usize {
        self.dim().1
    }
    fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        self.dot(x)
    }
    fn apply_t(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        self.t().dot(x)
    }
}

impl MatrixOp for Array2<f64> {
    fn nrows(&self) -> usize {
        self.dim().0
    }
    fn ncols(&self) -> usize {
        self.dim().1
    }
    fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        self.dot(x)
    }
    fn apply_t(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        self.t().dot(x)
    }
}

/// Orthonormal basis for the column space of `(T Tᵀ)^power · T · omega`.
///
/// The power-iterated product is never formed explicitly: `T` and `Tᵀ` are
/// applied alternately with an economy QR after every application, so the
/// basis cannot collapse onto the dominant singular direction in floating
/// point. One sweep is one application of `Tᵀ` followed by `T`; `power`
/// counts sweeps after the initial `T · omega`.
pub fn normalized_subspace_iteration<O: MatrixOp>(
    op: &O,
    omega: &ArrayView2<f64>,
    power: usize,
) -> Result<Array2<f64>> {
    let sketch_cols = omega.ncols();
    if sketch_cols > op.nrows().min(op.ncols()) {
        return Err(CorapError::RankOutOfRange(format!(
            "sketch width {sketch_cols} exceeds the smaller matrix dimension {}",
            op.nrows().min(op.ncols())
        )));
    }
    if omega.nrows() != op.ncols() {
        return Err(CorapError::ShapeMismatch(format!(
            "test matrix has {} rows, operator has {} columns",
            omega.nrows(),
            op.ncols()
        )));
    }
    let y = op.apply(omega);
    let (mut basis, _) = economy_qr(&y.view())?;
    for _ in 0..power {
        let z = op.apply_t(&basis.view());
        let (zq, _) = economy_qr(&z.view())?;
        let y = op.apply(&zq.view());
        basis = economy_qr(&y.view())?.0;
    }
    Ok(basis)
}
