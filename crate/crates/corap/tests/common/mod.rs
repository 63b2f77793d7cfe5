//! Shared oracles and the module property checks, used by both the
//! standalone property suite and the acceptance suite.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView2};

use corap::bench::{generate_instance, mean_relative_error};
use corap::ccpd::{algebraic_ccpd, back_project, coupled_als, per_core_rel_residuals, pooled_objective};
use corap::cpd::{als_cpd, AlsOptions, FactorInit};
use corap::linalg::{normalized_subspace_iteration, truncated_svd};
use corap::random::{gaussian_matrix, gaussian_vec};
use corap::sketch::{build_corap_triads, build_ensemble, compress};
use corap::tensor::{cpd_reconstruct, khatri_rao, matricize, mode_n_product, DenseTensor3, FactorTriple};
use corap::{corap_cpd, SketchConfig};

pub fn frob(m: &ArrayView2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_diff(got: &Array2<f64>, want: &Array2<f64>) -> f64 {
    let denom = frob(&want.view()).max(1e-300);
    frob(&(got - want).view()) / denom
}

pub fn tensor_rel_diff(got: &DenseTensor3, want: &DenseTensor3) -> f64 {
    let diff: f64 = got
        .array()
        .iter()
        .zip(want.array().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    diff / want.frobenius_norm().max(1e-300)
}

/// Reference singular values through the Gram matrix and a two-sided cyclic
/// Jacobi eigensolver — an algorithm and code path independent of the
/// library's one-sided Jacobi SVD.
pub mod oracle {
    use super::*;

    fn jacobi_eigenvalues(mut a: Array2<f64>) -> Vec<f64> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        for _ in 0..100 {
            let mut rotated = false;
            for p in 0..n.saturating_sub(1) {
                for q in (p + 1)..n {
                    let apq = a[[p, q]];
                    let app = a[[p, p]];
                    let aqq = a[[q, q]];
                    if apq.abs() <= 1e-18 * (app.abs() * aqq.abs()).sqrt().max(1e-300) {
                        continue;
                    }
                    rotated = true;
                    let theta = 0.5 * (2.0 * apq).atan2(aqq - app);
                    let (s, c) = theta.sin_cos();
                    for k in 0..n {
                        let akp = a[[k, p]];
                        let akq = a[[k, q]];
                        a[[k, p]] = c * akp - s * akq;
                        a[[k, q]] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[[p, k]];
                        let aqk = a[[q, k]];
                        a[[p, k]] = c * apk - s * aqk;
                        a[[q, k]] = s * apk + c * aqk;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
        eigs.sort_by(|x, y| y.total_cmp(x));
        eigs
    }

    /// Singular values of `m`, descending.
    pub fn singular_values(m: &ArrayView2<f64>) -> Vec<f64> {
        let (p, q) = m.dim();
        let gram = if p >= q { m.t().dot(m) } else { m.dot(&m.t()) };
        jacobi_eigenvalues(gram)
            .into_iter()
            .map(|l| l.max(0.0).sqrt())
            .collect()
    }

    /// Largest principal angle between the column spaces of two orthonormal
    /// bases, via the sine formulation.
    pub fn max_principal_angle(q1: &ArrayView2<f64>, q2: &ArrayView2<f64>) -> f64 {
        let resid = &q1.to_owned() - &q2.dot(&q2.t().dot(q1));
        let s = singular_values(&resid.view());
        s[0].clamp(-1.0, 1.0).asin()
    }
}

pub fn noiseless_instance(
    dims: (usize, usize, usize),
    rank: usize,
    seed: u64,
) -> (DenseTensor3, FactorTriple) {
    generate_instance(dims, rank, f64::INFINITY, seed).expect("generator")
}

pub fn random_tensor(dims: (usize, usize, usize), seed: u64) -> DenseTensor3 {
    let (i, j, k) = dims;
    DenseTensor3::new(dims, gaussian_vec(i * j * k, seed)).unwrap()
}

/// The per-module invariants, each runnable on its own. The acceptance
/// suite's property criterion runs every entry of [`ALL`].
pub mod props {
    use super::*;

    pub fn matricization_round_trip() {
        for (dims, seed) in [((7, 5, 6), 1u64), ((4, 9, 3), 2), ((6, 6, 6), 3)] {
            let t = random_tensor(dims, 9100 + seed);
            for mode in 1..=3 {
                let m = matricize(&t, mode).unwrap();
                let back = corap::tensor::dematricize(&m.view(), mode, dims).unwrap();
                assert_eq!(&back, &t, "mode {mode} dims {dims:?}");
            }
        }
    }

    pub fn mode_product_composition() {
        let t = random_tensor((6, 7, 5), 9201);
        let p = gaussian_matrix(4, 6, 9202);
        let q = gaussian_matrix(3, 7, 9203);
        let left = mode_n_product(&mode_n_product(&t, &p.view(), 1).unwrap(), &q.view(), 2).unwrap();
        let right = mode_n_product(&mode_n_product(&t, &q.view(), 2).unwrap(), &p.view(), 1).unwrap();
        assert!(
            tensor_rel_diff(&left, &right) < 1e-12,
            "composition mismatch {}",
            tensor_rel_diff(&left, &right)
        );
    }

    pub fn cpd_matricization_consistency() {
        let f = FactorTriple::new(
            gaussian_matrix(5, 3, 9301),
            gaussian_matrix(6, 3, 9302),
            gaussian_matrix(4, 3, 9303),
        )
        .unwrap();
        let t = cpd_reconstruct(&f).unwrap();
        let (i, j, k) = t.dims();
        // Triple-loop oracle per unfolding entry.
        for mode in 1..=3 {
            let got = matricize(&t, mode).unwrap();
            for ii in 0..i {
                for jj in 0..j {
                    for kk in 0..k {
                        let want: f64 = (0..3)
                            .map(|r| f.a[[ii, r]] * f.b[[jj, r]] * f.c[[kk, r]])
                            .sum();
                        let entry = match mode {
                            1 => got[[ii, jj * k + kk]],
                            2 => got[[jj, ii * k + kk]],
                            _ => got[[kk, ii * j + jj]],
                        };
                        assert!(
                            (entry - want).abs() <= 1e-12 * want.abs().max(1.0),
                            "mode {mode} entry ({ii},{jj},{kk})"
                        );
                    }
                }
            }
        }
    }

    pub fn khatri_rao_column_property() {
        let a = gaussian_matrix(5, 4, 9401);
        let b = gaussian_matrix(3, 4, 9402);
        let kr = khatri_rao(&a.view(), &b.view()).unwrap();
        for r in 0..4 {
            for i in 0..5 {
                for j in 0..3 {
                    assert_eq!(kr[[i * 3 + j, r]], a[[i, r]] * b[[j, r]]);
                }
            }
        }
    }

    pub fn sketch_exact_rank_containment() {
        let (t, _) = noiseless_instance((18, 16, 17), 4, 9501);
        for mode in 1..=3 {
            let unfolded = matricize(&t, mode).unwrap();
            for power in [0usize, 1, 3] {
                let omega = gaussian_matrix(unfolded.ncols(), 7, 9502 + power as u64);
                let basis =
                    normalized_subspace_iteration(&unfolded, &omega.view(), power).unwrap();
                let resid = &unfolded - &basis.dot(&basis.t().dot(&unfolded));
                let rel = frob(&resid.view()) / frob(&unfolded.view());
                assert!(rel < 1e-8, "mode {mode} power {power}: leak {rel}");
            }
        }
    }

    pub fn power_iteration_spectral_law() {
        // Random orthogonal factors with a controlled spectrum: the Gram
        // route of the reference oracle needs the dynamic range of σ^(2m+1)
        // to stay representable.
        let (qu, _) = corap::linalg::economy_qr(&gaussian_matrix(10, 10, 9601).view()).unwrap();
        let (qv, _) = corap::linalg::economy_qr(&gaussian_matrix(10, 10, 9602).view()).unwrap();
        let spectrum: Vec<f64> = (0..10).map(|i| 6.0 - 0.35 * i as f64).collect();
        let t = qu.dot(&Array2::from_diag(&Array1::from_vec(spectrum.clone()))).dot(&qv.t());
        let base = oracle::singular_values(&t.view());
        for m in 1..=3usize {
            let mut powered = t.clone();
            for _ in 0..m {
                powered = t.dot(&t.t()).dot(&powered);
            }
            let got = oracle::singular_values(&powered.view());
            for (r, sigma) in base.iter().enumerate() {
                let want = sigma.powi(2 * m as i32 + 1);
                let rel = (got[r] - want).abs() / want;
                assert!(rel < 1e-6, "m {m} sigma_{r}: rel {rel}");
            }
        }
    }

    pub fn tsvd_of_orthonormal_matrix() {
        let (q, _) = corap::linalg::economy_qr(&gaussian_matrix(12, 5, 9701).view()).unwrap();
        let svd = truncated_svd(&q.view(), 5).unwrap();
        for s in svd.s.iter() {
            assert!((s - 1.0).abs() < 1e-10, "singular value {s}");
        }
    }

    pub fn coupling_invariant_noiseless() {
        let (t, f) = noiseless_instance((20, 20, 20), 3, 9801);
        let cfg = SketchConfig::new(3, 6, 3, 9802);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        let shared = ensemble.shared_w();
        // Exact-rank case: every core's third-mode factor is W'C, a single
        // shared matrix, so the mode-3 column spaces of the cores coincide.
        let c_proj = shared.t().dot(&f.c);
        let (c_basis, _) = corap::linalg::economy_qr(&c_proj.view()).unwrap();
        for (idx, core) in ensemble.cores.iter().enumerate() {
            let g3 = matricize(core, 3).unwrap();
            let basis = truncated_svd(&g3.view(), 3).unwrap().u;
            let angle = oracle::max_principal_angle(&basis.view(), &c_basis.view());
            assert!(angle < 1e-6, "core {idx} mode-3 angle {angle}");
        }
    }

    pub fn projector_orthonormality() {
        let (t, _) = noiseless_instance((15, 14, 13), 3, 9901);
        let cfg = SketchConfig::new(3, 6, 2, 9902);
        for triad in build_corap_triads(&t, &cfg).unwrap() {
            for m in [&triad.u, &triad.v, triad.w.as_ref()] {
                let defect = corap::linalg::orthonormality_defect(&m.view());
                assert!(defect < 1e-10, "defect {defect}");
            }
        }
    }

    pub fn compression_linearity() {
        let (t1, _) = noiseless_instance((12, 12, 12), 2, 10001);
        let t2 = random_tensor((12, 12, 12), 10002);
        let cfg = SketchConfig::new(2, 5, 1, 10003);
        let triad = &build_corap_triads(&t1, &cfg).unwrap()[0];
        let (alpha, beta) = (0.7, -1.3);
        let combined = DenseTensor3::from_array(t1.array() * alpha + &(t2.array() * beta));
        let lhs = compress(&combined, triad).unwrap();
        let c1 = compress(&t1, triad).unwrap();
        let c2 = compress(&t2, triad).unwrap();
        let rhs = DenseTensor3::from_array(c1.array() * alpha + &(c2.array() * beta));
        assert!(
            tensor_rel_diff(&lhs, &rhs) < 1e-12,
            "linearity violated: {}",
            tensor_rel_diff(&lhs, &rhs)
        );
    }

    pub fn back_projected_reconstruction() {
        let (t, _) = noiseless_instance((18, 18, 18), 3, 10101);
        let cfg = SketchConfig::new(3, 7, 2, 10102);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        for (core, triad) in ensemble.cores.iter().zip(&ensemble.triads) {
            let lifted = mode_n_product(core, &triad.u.view(), 1)
                .and_then(|x| mode_n_product(&x, &triad.v.view(), 2))
                .and_then(|x| mode_n_product(&x, &triad.w.view(), 3))
                .unwrap();
            let rel = tensor_rel_diff(&lifted, &t);
            assert!(rel < 1e-8, "back projection residual {rel}");
        }
    }

    pub fn als_monotonicity() {
        let noisy = {
            let (clean, _) = noiseless_instance((10, 10, 10), 3, 10201);
            let noise = random_tensor((10, 10, 10), 10202);
            clean.add_scaled(&noise, 0.3).unwrap()
        };
        // Identical init, growing sweep budgets: the residual sequence the
        // solver walks is shared prefix by prefix, so this traces it.
        let mut previous = f64::INFINITY;
        for sweeps in 1..=12 {
            let opts = AlsOptions {
                max_iters: sweeps,
                rel_tol: 0.0,
                seed: 10203,
                ..Default::default()
            };
            let run = als_cpd(&noisy, 3, &opts).unwrap();
            assert!(
                run.rel_residual <= previous + 1e-12,
                "sweep {sweeps}: {previous} -> {}",
                run.rel_residual
            );
            previous = run.rel_residual;
        }
    }

    pub fn scaling_indeterminacy() {
        let f = FactorTriple::new(
            gaussian_matrix(6, 3, 10301),
            gaussian_matrix(5, 3, 10302),
            gaussian_matrix(7, 3, 10303),
        )
        .unwrap();
        let d1 = [2.0, -0.5, 4.0];
        let d2 = [0.25, -1.0, 0.125];
        // d3 = 1 / (d1·d2) so the product of the three scalings is one.
        let scale = |m: &Array2<f64>, d: &[f64]| {
            let mut out = m.clone();
            for (c, &s) in d.iter().enumerate() {
                out.column_mut(c).mapv_inplace(|v| v * s);
            }
            out
        };
        let d3: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| 1.0 / (a * b)).collect();
        let g = FactorTriple::new(
            scale(&f.a, &d1),
            scale(&f.b, &d2),
            scale(&f.c, &d3),
        )
        .unwrap();
        let t1 = cpd_reconstruct(&f).unwrap();
        let t2 = cpd_reconstruct(&g).unwrap();
        assert!(tensor_rel_diff(&t2, &t1) < 1e-12);
    }

    pub fn permutation_indeterminacy() {
        let f = FactorTriple::new(
            gaussian_matrix(6, 4, 10401),
            gaussian_matrix(5, 4, 10402),
            gaussian_matrix(7, 4, 10403),
        )
        .unwrap();
        let perm = [3usize, 0, 2, 1];
        let permute = |m: &Array2<f64>| {
            let mut out = Array2::zeros(m.raw_dim());
            for (dst, &src) in perm.iter().enumerate() {
                out.column_mut(dst).assign(&m.column(src));
            }
            out
        };
        let g = FactorTriple::new(permute(&f.a), permute(&f.b), permute(&f.c)).unwrap();
        let t1 = cpd_reconstruct(&f).unwrap();
        let t2 = cpd_reconstruct(&g).unwrap();
        assert!(tensor_rel_diff(&t2, &t1) <= 1e-12);
    }

    pub fn algebraic_exactness() {
        let (t, _) = noiseless_instance((24, 24, 24), 3, 10501);
        let cfg = SketchConfig::new(3, 6, 3, 10502);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        let opts = AlsOptions {
            rel_tol: 1e-12,
            restarts: 3,
            init: FactorInit::Svd,
            seed: 10503,
            ..Default::default()
        };
        let coupled = algebraic_ccpd(&ensemble, 3, &opts).unwrap();
        for (idx, res) in per_core_rel_residuals(&ensemble, &coupled)
            .unwrap()
            .iter()
            .enumerate()
        {
            assert!(*res < 1e-7, "core {idx}: residual {res}");
        }
    }

    pub fn coupled_als_monotonicity() {
        let (clean, _) = noiseless_instance((16, 16, 16), 3, 10601);
        let noise = random_tensor((16, 16, 16), 10602);
        let t = clean.add_scaled(&noise, 0.5).unwrap();
        let cfg = SketchConfig::new(3, 7, 2, 10603);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        let opts = AlsOptions {
            rel_tol: 0.0,
            restarts: 1,
            init: FactorInit::Svd,
            seed: 10604,
            ..Default::default()
        };
        let init = algebraic_ccpd(&ensemble, 3, &opts).unwrap();
        let mut previous = f64::INFINITY;
        for sweeps in 1..=10 {
            let refined = coupled_als(
                &ensemble,
                init.clone(),
                &AlsOptions {
                    max_iters: sweeps,
                    ..opts.clone()
                },
            )
            .unwrap();
            let objective = pooled_objective(&ensemble, &refined).unwrap();
            assert!(
                objective <= previous + 1e-12,
                "sweeps {sweeps}: {previous} -> {objective}"
            );
            previous = objective;
        }
    }

    pub fn coupling_preserved() {
        let (t, _) = noiseless_instance((14, 14, 14), 2, 10701);
        let cfg = SketchConfig::new(2, 5, 3, 10702);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        for triad in &ensemble.triads {
            assert!(std::sync::Arc::ptr_eq(&triad.w, ensemble.shared_w()));
        }
        let opts = AlsOptions {
            restarts: 1,
            init: FactorInit::Svd,
            seed: 10703,
            ..Default::default()
        };
        let coupled = algebraic_ccpd(&ensemble, 2, &opts).unwrap();
        // One shared matrix serves every core both structurally and in the
        // back-projection: C = W C' for each selected index.
        for m in 1..=ensemble.len() {
            let full = back_project(&ensemble, &coupled, m).unwrap();
            let want = ensemble.shared_w().dot(&coupled.shared_c);
            assert!(rel_diff(&full.c, &want) < 1e-15);
        }
    }

    pub fn refinement_dominance() {
        let (clean, _) = noiseless_instance((18, 18, 18), 3, 10801);
        let noise = random_tensor((18, 18, 18), 10802);
        let t = clean.add_scaled(&noise, 1.0).unwrap();
        let cfg = SketchConfig::new(3, 7, 3, 10803);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        let opts = AlsOptions {
            restarts: 1,
            init: FactorInit::Svd,
            seed: 10804,
            ..Default::default()
        };
        let init = algebraic_ccpd(&ensemble, 3, &opts).unwrap();
        let before = pooled_objective(&ensemble, &init).unwrap();
        let refined = coupled_als(&ensemble, init, &opts).unwrap();
        let after = pooled_objective(&ensemble, &refined).unwrap();
        assert!(after <= before + 1e-12, "{before} -> {after}");
    }

    pub fn transfer_structure_noiseless() {
        let (t, f) = noiseless_instance((20, 20, 20), 3, 10901);
        let cfg = SketchConfig::new(3, 6, 2, 10902);
        let ensemble = build_ensemble(&t, &cfg).unwrap();
        // Exact shared factor from the ground truth.
        let c_exact = ensemble.shared_w().t().dot(&f.c);
        let transfer = corap::linalg::pinv(&c_exact.t().view());
        for (idx, (core, triad)) in ensemble.cores.iter().zip(&ensemble.triads).enumerate() {
            let g3 = matricize(core, 3).unwrap();
            let got = g3.t().dot(&transfer);
            let want = khatri_rao(
                &triad.u.t().dot(&f.a).view(),
                &triad.v.t().dot(&f.b).view(),
            )
            .unwrap();
            let rel = rel_diff(&got, &want);
            assert!(rel < 1e-7, "core {idx}: transfer mismatch {rel}");
        }
    }

    pub fn snr_concentration() {
        for (snr, seed) in [(-2.0f64, 11001u64), (4.0, 11002), (10.0, 11003)] {
            let (t, truth) = generate_instance((50, 50, 50), 5, snr, seed).unwrap();
            let signal = cpd_reconstruct(&truth).unwrap();
            let noise = t.add_scaled(&signal, -1.0).unwrap();
            let empirical = 10.0
                * (signal.frobenius_norm().powi(2) / noise.frobenius_norm().powi(2)).log10();
            assert!(
                (empirical - snr).abs() < 1.0,
                "snr {snr}: empirical {empirical}"
            );
        }
    }

    pub fn mre_invariance_under_column_symmetry() {
        let (_, truth) = generate_instance((9, 8, 7), 4, f64::INFINITY, 11101).unwrap();
        let est = {
            let bump = gaussian_matrix(9, 4, 11102) * 1e-2;
            FactorTriple::new(&truth.a + &bump, truth.b.clone(), truth.c.clone()).unwrap()
        };
        let base = mean_relative_error(&truth, &est).unwrap();
        // Permute and rescale the estimate by powers of two: the matching
        // absorbs both exactly, so the metric must not move at all.
        let perm = [2usize, 3, 0, 1];
        let scales = [2.0, -0.5, 4.0, -0.25];
        let transform = |m: &Array2<f64>| {
            let mut out = Array2::zeros(m.raw_dim());
            for (dst, (&src, &s)) in perm.iter().zip(&scales).enumerate() {
                let scaled = m.column(src).mapv(|v| v * s);
                out.column_mut(dst).assign(&scaled);
            }
            out
        };
        let transformed = FactorTriple::new(
            transform(&est.a),
            transform(&est.b),
            transform(&est.c),
        )
        .unwrap();
        let moved = mean_relative_error(&truth, &transformed).unwrap();
        assert_eq!(base, moved, "matching must absorb column symmetry exactly");
    }

    pub fn mre_symmetric_under_common_relabeling() {
        let (_, truth) = generate_instance((8, 8, 8), 3, f64::INFINITY, 11201).unwrap();
        let est = {
            let bump = gaussian_matrix(8, 3, 11202) * 1e-2;
            FactorTriple::new(&truth.a + &bump, truth.b.clone(), truth.c.clone()).unwrap()
        };
        let base = mean_relative_error(&truth, &est).unwrap();
        let perm = [1usize, 2, 0];
        let permute = |m: &Array2<f64>| {
            let mut out = Array2::zeros(m.raw_dim());
            for (dst, &src) in perm.iter().enumerate() {
                out.column_mut(dst).assign(&m.column(src));
            }
            out
        };
        let truth_p = FactorTriple::new(permute(&truth.a), permute(&truth.b), permute(&truth.c))
            .unwrap();
        let est_p =
            FactorTriple::new(permute(&est.a), permute(&est.b), permute(&est.c)).unwrap();
        let relabeled = mean_relative_error(&truth_p, &est_p).unwrap();
        assert!(
            (base - relabeled).abs() <= 1e-15 * base.max(1e-300),
            "{base} vs {relabeled}"
        );
    }

    pub fn csv_round_trip() {
        use corap::bench::{read_records_csv, Algorithm, RunRecord, RECORD_HEADER};
        use std::io::Write;
        let records: Vec<RunRecord> = (0..4)
            .map(|i| RunRecord {
                trial: i,
                algorithm: [Algorithm::Direct, Algorithm::Rap, Algorithm::Corap][i % 3],
                dims: (30, 31, 32),
                rank: 4,
                oversample: 8,
                max_power: 2,
                snr_db: [-2.0, f64::INFINITY][i % 2],
                mre: 0.1 / (i as f64 + 1.0) * std::f64::consts::PI,
                wall_time_s: 0.25 * (i as f64 + 1.0),
                m_opt: if i % 3 == 2 { Some(1 + i % 2) } else { None },
                status: "ok".into(),
            })
            .collect();
        let path = std::env::temp_dir().join(format!(
            "corap-props-{}-{:?}.csv",
            std::process::id(),
            std::thread::current().id()
        ));
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
        writeln!(w, "{RECORD_HEADER}").unwrap();
        for r in &records {
            writeln!(w, "{}", r.to_csv_line()).unwrap();
        }
        w.flush().unwrap();
        drop(w);
        let back = read_records_csv(&path).unwrap();
        assert_eq!(back, records);
        std::fs::remove_file(&path).ok();
    }

    pub fn corap_bit_determinism() {
        let (clean, _) = noiseless_instance((20, 20, 20), 3, 11301);
        let noise = random_tensor((20, 20, 20), 11302);
        let t = clean.add_scaled(&noise, 0.4).unwrap();
        let cfg = SketchConfig::new(3, 7, 2, 11303);
        let opts = AlsOptions {
            restarts: 2,
            init: FactorInit::Svd,
            seed: 11304,
            ..Default::default()
        };
        let r1 = corap_cpd(&t, &cfg, 3, &opts).unwrap();
        let r2 = corap_cpd(&t, &cfg, 3, &opts).unwrap();
        assert_eq!(r1.full_factors.a, r2.full_factors.a);
        assert_eq!(r1.full_factors.b, r2.full_factors.b);
        assert_eq!(r1.full_factors.c, r2.full_factors.c);
        assert_eq!(r1.m_opt, r2.m_opt);
        assert_eq!(r1.per_core_rel_residuals, r2.per_core_rel_residuals);
    }

    /// Every property in one list, for the acceptance suite.
    pub const ALL: &[(&str, fn())] = &[
        ("matricization round trip", matricization_round_trip),
        ("mode product composition", mode_product_composition),
        ("cpd/matricization consistency", cpd_matricization_consistency),
        ("khatri-rao column property", khatri_rao_column_property),
        ("sketch exact-rank containment", sketch_exact_rank_containment),
        ("power iteration spectral law", power_iteration_spectral_law),
        ("tsvd of orthonormal matrix", tsvd_of_orthonormal_matrix),
        ("coupling invariant (noiseless)", coupling_invariant_noiseless),
        ("projector orthonormality", projector_orthonormality),
        ("compression linearity", compression_linearity),
        ("back-projected reconstruction", back_projected_reconstruction),
        ("ALS monotonicity", als_monotonicity),
        ("scaling indeterminacy", scaling_indeterminacy),
        ("permutation indeterminacy", permutation_indeterminacy),
        ("algebraic exactness", algebraic_exactness),
        ("coupled ALS monotonicity", coupled_als_monotonicity),
        ("coupling preserved", coupling_preserved),
        ("refinement dominance", refinement_dominance),
        ("transfer structure (noiseless)", transfer_structure_noiseless),
        ("SNR concentration", snr_concentration),
        ("MRE column-symmetry invariance", mre_invariance_under_column_symmetry),
        ("MRE relabeling symmetry", mre_symmetric_under_common_relabeling),
        ("CSV round trip", csv_round_trip),
        ("corap bit determinism", corap_bit_determinism),
    ];
}

