//! Acceptance gate: eleven end-to-end criteria, one test per criterion.
//!
//! Each test prints a single `acceptance criterion N: PASS` line on success
//! (visible under `--nocapture`); a failed assertion marks the criterion
//! failed. Criteria 1-9 exercise the library directly; 10 and 11 drive the
//! compiled binary on the bundled dataset.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ahsc_core::convexity::{
    covering_bound, hessian_fd, sc_proxy_batch, sharpness, CoveringBoundInput, ProxyDenominator,
    SharpnessParams,
};
use ahsc_core::data::synthetic_blobs;
use ahsc_core::hpo::{ahsc_with, random_search, HyperSpace, MetricKind};
use ahsc_core::linalg::{frobenius_norm, spectral_norm, sym_eig_extremes, Matrix, SymmetricMatrix};
use ahsc_core::nn::{backward, forward, init_model, loss_ce, Model};
use ahsc_core::seed::derive_seed;
use ahsc_core::theoryverify::{default_problems, gd_trace, run_default_suite};

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Matrix::new(rows, cols, entries).unwrap()
}

fn gaussian_psd(n: usize, seed: u64) -> Matrix {
    let g = gaussian_matrix(n, n, seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..n {
                s += g.get(k, i) * g.get(k, j);
            }
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    m
}

/// Loss of the model on a fixed batch as a function of the flat parameter
/// vector, for finite-difference probing.
fn loss_at(model: &Model, params: &[f64], features: &Matrix, labels: &[usize]) -> f64 {
    let mut probe = model.clone();
    probe.set_params(params).unwrap();
    let cache = forward(&probe, features).unwrap();
    loss_ce(cache.probs(), labels).unwrap()
}

/// Criterion 1: analytic gradients match central finite differences to
/// 1e-5 per coordinate on ten random architectures, in under ten seconds.
#[test]
fn criterion_01_gradient_correctness() {
    let started = Instant::now();
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    for trial in 0..10u64 {
        let n_dims = rng.random_range(2..=6usize);
        let mut dims: Vec<usize> = (0..n_dims).map(|_| rng.random_range(2..=16usize)).collect();
        // At least two classes so cross-entropy is meaningful.
        let last = dims.len() - 1;
        dims[last] = dims[last].max(2);
        let m = rng.random_range(1..=8usize);

        let model = init_model(&dims, derive_seed(0xACC1, trial * 2)).unwrap();
        let features = gaussian_matrix(m, dims[0], derive_seed(0xACC1, trial * 2 + 1));
        let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..dims[last])).collect();

        let cache = forward(&model, &features).unwrap();
        let analytic = backward(&model, &cache, &labels).unwrap().flatten();

        let mut params = model.get_params();
        assert_eq!(analytic.len(), params.len());
        for i in 0..params.len() {
            let orig = params[i];
            params[i] = orig + h;
            let up = loss_at(&model, &params, &features, &labels);
            params[i] = orig - h;
            let down = loss_at(&model, &params, &features, &labels);
            params[i] = orig;
            let fd = (up - down) / (2.0 * h);
            let a = analytic[i];
            let err = (a - fd).abs();
            if a.abs() < 1e-8 {
                assert!(err <= 1e-5, "trial {trial} coord {i}: |{a} - {fd}| = {err}");
            } else {
                assert!(
                    err / a.abs() <= 1e-5,
                    "trial {trial} coord {i}: rel err {} (analytic {a}, fd {fd})",
                    err / a.abs()
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "acceptance criterion 1: PASS (10 models, per-coordinate rel err <= 1e-5, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: tied zero logits with true class 0 give head gradient
/// (-0.5, 0.5) exactly.
#[test]
fn criterion_02_head_gradient_anchor() {
    let mut model = init_model(&[2, 2], 0).unwrap();
    model.set_params(&vec![0.0; model.param_count()]).unwrap();
    let x = Matrix::zeros(1, 2);
    let cache = forward(&model, &x).unwrap();
    // Zero weights and zero input leave the logits at (0, 0); with one
    // sample the last-layer bias gradient IS the logit gradient.
    let grads = backward(&model, &cache, &[0]).unwrap();
    let head = grads.d_biases.last().unwrap();
    assert!((head[0] - (-0.5)).abs() <= 1e-15, "got {}", head[0]);
    assert!((head[1] - 0.5).abs() <= 1e-15, "got {}", head[1]);
    println!("acceptance criterion 2: PASS (logit gradient ({}, {}))", head[0], head[1]);
}

/// Criterion 3: the finite-difference last-layer Hessian of a softmax
/// regression matches the closed form (1/m) sum_i (diag(p_i) - p_i p_i^T)
/// (x) x_i x_i^T to relative 1e-3.
#[test]
fn criterion_03_hessian_oracle_matches_closed_form() {
    let model = init_model(&[3, 3], 0xACC3).unwrap();
    let features = gaussian_matrix(10, 3, derive_seed(0xACC3, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xACC3, 2));
    let labels: Vec<usize> = (0..10).map(|_| rng.random_range(0..3usize)).collect();

    // Closed form, flat index (class, input) = class * width + input to
    // match the row-major weight layout.
    let cache = forward(&model, &features).unwrap();
    let probs = cache.probs();
    let m = features.rows();
    let classes = 3;
    let width = 3;
    let n = classes * width;
    let mut want = Matrix::zeros(n, n);
    for i in 0..m {
        for c in 0..classes {
            for cp in 0..classes {
                let delta = if c == cp { 1.0 } else { 0.0 };
                let coupling = probs.get(i, c) * (delta - probs.get(i, cp));
                for j in 0..width {
                    for jp in 0..width {
                        let idx = (c * width + j, cp * width + jp);
                        let v = want.get(idx.0, idx.1)
                            + coupling * features.get(i, j) * features.get(i, jp) / m as f64;
                        want.set(idx.0, idx.1, v);
                    }
                }
            }
        }
    }

    // Finite differences over the last-layer weights only.
    let w0: Vec<f64> = model.weights.last().unwrap().as_slice().to_vec();
    let base = model.clone();
    let f = |w: &[f64]| -> f64 {
        let mut probe = base.clone();
        probe
            .weights
            .last_mut()
            .unwrap()
            .as_mut_slice()
            .copy_from_slice(w);
        let cache = forward(&probe, &features).unwrap();
        loss_ce(cache.probs(), &labels).unwrap()
    };
    let got = hessian_fd(f, &w0, 1e-4).unwrap();

    let mut diff = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            diff.set(i, j, got.get(i, j) - want.get(i, j));
        }
    }
    let gap = frobenius_norm(&diff) / frobenius_norm(&want);
    assert!(gap <= 1e-3, "relative gap {gap}");
    println!("acceptance criterion 3: PASS (relative Frobenius gap {gap:.2e})");
}

fn ulp_distance(a: f64, b: f64) -> u64 {
    assert!(a.is_finite() && b.is_finite() && a.signum() == b.signum());
    let (ia, ib) = (a.abs().to_bits() as i64, b.abs().to_bits() as i64);
    ia.abs_diff(ib)
}

/// Criterion 4: scaling the head weights by c rescales the proxy by exactly
/// 1/c, to at most 4 ulp, across twenty random models.
#[test]
fn criterion_04_proxy_inverse_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
    for trial in 0..20u64 {
        let depth = rng.random_range(1..=3usize);
        let mut dims = vec![rng.random_range(2..=8usize)];
        for _ in 0..depth {
            dims.push(rng.random_range(2..=8usize));
        }
        dims.push(rng.random_range(2..=5usize));
        let m = rng.random_range(1..=8usize);

        let model = init_model(&dims, derive_seed(0xACC4, trial * 2)).unwrap();
        let features = gaussian_matrix(m, dims[0], derive_seed(0xACC4, trial * 2 + 1));
        let base = sc_proxy_batch(&model, &features).unwrap();
        assert!(base.is_finite() && base > 0.0);

        for c in [0.5, 2.0, 10.0] {
            let mut scaled = model.clone();
            let last = scaled.weights.last_mut().unwrap();
            *last = last.scaled(c);
            let got = sc_proxy_batch(&scaled, &features).unwrap();
            let want = base / c;
            let dist = ulp_distance(got, want);
            assert!(dist <= 4, "trial {trial}, c = {c}: {got} vs {want} is {dist} ulp");
        }
    }
    println!("acceptance criterion 4: PASS (20 models x c in {{0.5, 2, 10}}, <= 4 ulp)");
}

/// Criterion 5: spectral <= Frobenius <= sqrt(rank) * spectral on random
/// matrices, and adding a PSD term never shrinks the spectral norm.
#[test]
fn criterion_05_norm_sandwich_and_psd_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    for trial in 0..100u64 {
        let rows = rng.random_range(1..=32usize);
        let cols = rng.random_range(1..=32usize);
        let m = gaussian_matrix(rows, cols, derive_seed(0xACC5, trial));
        let spec = spectral_norm(&m, 1e-12, 10_000).value;
        let fro = frobenius_norm(&m);
        // A dense Gaussian draw has full rank min(rows, cols).
        let rank = rows.min(cols) as f64;
        assert!(spec <= fro + 1e-9 * fro.max(1.0), "trial {trial}: {spec} > {fro}");
        assert!(
            fro <= rank.sqrt() * spec + 1e-9 * fro.max(1.0),
            "trial {trial}: {fro} > sqrt({rank}) * {spec}"
        );
    }
    for trial in 0..100u64 {
        let n = rng.random_range(1..=12usize);
        let b = gaussian_psd(n, derive_seed(0xACC5, 1000 + trial * 2));
        let c = gaussian_psd(n, derive_seed(0xACC5, 1001 + trial * 2));
        let mut sum = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                sum.set(i, j, b.get(i, j) + c.get(i, j));
            }
        }
        let nb = sym_eig_extremes(&SymmetricMatrix::new(b).unwrap(), 1e-12).unwrap().1;
        let nsum = sym_eig_extremes(&SymmetricMatrix::new(sum).unwrap(), 1e-12).unwrap().1;
        assert!(nsum >= nb - 1e-9 * nsum.max(1.0), "trial {trial}: {nsum} < {nb}");
    }
    println!("acceptance criterion 5: PASS (100 sandwich draws, 100 PSD pairs)");
}

/// Criterion 6: the tail bound hits its three reference values to relative
/// 1e-8 and is monotone along every axis of a randomized 5^4 grid.
#[test]
fn criterion_06_covering_bound_values_and_monotonicity() {
    let eval = |m, t, beta, lc| covering_bound(&CoveringBoundInput::new(m, t, beta, lc).unwrap());

    let cases = [
        (7, 0.0, 2.0, 0.0, 1.0),
        (18, 1.0, 1.0, 1.0, 1.0),
        (180, 1.0, 1.0, 1.0, (-9.0f64).exp()),
    ];
    for (m, t, beta, lc, want) in cases {
        let got = eval(m, t, beta, lc);
        let rel = (got - want).abs() / want.abs();
        assert!(rel <= 1e-8, "bound({m}, {t}, {beta}, {lc}) = {got}, want {want}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    let mut ms: Vec<usize> = (0..5).map(|_| rng.random_range(1..=500usize)).collect();
    let mut ts: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut betas: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..5.0)).collect();
    let mut lcs: Vec<f64> = (0..5).map(|_| rng.random_range(-5.0..5.0)).collect();
    ms.sort_unstable();
    ts.sort_by(f64::total_cmp);
    betas.sort_by(f64::total_cmp);
    lcs.sort_by(f64::total_cmp);

    for im in 0..5 {
        for it in 0..5 {
            for ib in 0..5 {
                for il in 0..5 {
                    let here = eval(ms[im], ts[it], betas[ib], lcs[il]);
                    assert!((0.0..=1.0).contains(&here));
                    if im + 1 < 5 {
                        assert!(eval(ms[im + 1], ts[it], betas[ib], lcs[il]) <= here);
                    }
                    if it + 1 < 5 {
                        assert!(eval(ms[im], ts[it + 1], betas[ib], lcs[il]) <= here);
                    }
                    if ib + 1 < 5 {
                        assert!(eval(ms[im], ts[it], betas[ib + 1], lcs[il]) >= here);
                    }
                    if il + 1 < 5 {
                        assert!(eval(ms[im], ts[it], betas[ib], lcs[il + 1]) >= here);
                    }
                }
            }
        }
    }
    println!("acceptance criterion 6: PASS (3 reference values, 5^4 monotone grid)");
}

/// Criterion 7: the whole theory suite passes on the three reference
/// problems, and the descent iterates obey the linear-rate bound at every
/// step k <= 100.
#[test]
fn criterion_07_theory_suite_and_gd_bound() {
    let reports = run_default_suite().unwrap();
    assert_eq!(reports.len(), 18);
    for r in &reports {
        assert!(r.pass, "{} on {}: violation {}", r.check, r.problem, r.max_violation);
    }

    for p in default_problems().unwrap() {
        let x0 = vec![1.0; p.dim()];
        let trace = gd_trace(&p, &x0, 100).unwrap();
        assert_eq!(trace.len(), 101);
        let rate = 1.0 - p.mu() / p.beta();
        for (k, &fk) in trace.iter().enumerate() {
            let bound = rate.powi(k as i32) * trace[0];
            assert!(
                fk <= bound + 1e-9 * bound.max(1.0),
                "{}: step {k}: f = {fk} exceeds {bound}",
                p.label()
            );
        }
    }
    println!("acceptance criterion 7: PASS (18/18 checks, GD bound at every k <= 100)");
}

/// Criterion 8: sharpness of the quadratic diag(1, 9) bowl at radius 0.1
/// lands within 2% of the analytic 0.045.
#[test]
fn criterion_08_sharpness_reference_value() {
    let loss = |v: &[f64]| 0.5 * (v[0] * v[0] + 9.0 * v[1] * v[1]);
    let params = SharpnessParams {
        epsilon: 0.1,
        ascent_iters: 10,
        restarts: 5,
        seed: 0xACC8,
    };
    let zeta = sharpness(loss, &[0.0, 0.0], &params).unwrap();
    let want = 0.045;
    assert!(
        (zeta - want).abs() <= 0.02 * want,
        "zeta = {zeta}, want {want} within 2%"
    );
    println!("acceptance criterion 8: PASS (zeta = {zeta:.6})");
}

/// Criterion 9: on 300-sample synthetic blobs the screened search spends
/// exactly 20 probe epochs and at most 100 full epochs, while plain random
/// search spends between 101 and 400 full epochs — strictly more in total.
#[test]
fn criterion_09_budget_advantage() {
    let data = synthetic_blobs(100, 3, 4, 4.0, 1.0, 0xACC9).unwrap();
    assert_eq!(data.features.rows(), 300);
    let space = HyperSpace::default();
    let seed = 5;

    let screened = ahsc_with(
        &space,
        &data,
        20,
        5,
        seed,
        20,
        MetricKind::Accuracy,
        ProxyDenominator::FullMatrix,
    )
    .unwrap();
    assert_eq!(screened.probe_epochs, 20, "one probe epoch per sampled config");
    assert!(screened.full_epochs <= 100, "got {}", screened.full_epochs);

    let random = random_search(&space, &data, 20, seed, 20, MetricKind::Accuracy).unwrap();
    assert_eq!(random.probe_epochs, 0);
    assert!(random.full_epochs <= 400, "got {}", random.full_epochs);
    assert!(random.full_epochs >= 101, "got {}", random.full_epochs);

    assert!(
        screened.total_epochs() < random.total_epochs(),
        "screened {} vs random {}",
        screened.total_epochs(),
        random.total_epochs()
    );
    println!(
        "acceptance criterion 9: PASS (screened {} epochs vs random {})",
        screened.total_epochs(),
        random.total_epochs()
    );
}

fn bundled_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/blobs150.csv")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ahsc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir.join(name)
}

/// Criterion 10: the documented search invocation on the bundled dataset
/// finishes in under a minute, reaches held-out accuracy >= 0.90, and two
/// identical invocations produce byte-identical logs.
#[test]
fn criterion_10_end_to_end_sanity() {
    let csv = bundled_csv();
    let out_a = scratch("sanity-a.jsonl");
    let out_b = scratch("sanity-b.jsonl");
    let mut elapsed = Vec::new();
    for out in [&out_a, &out_b] {
        let started = Instant::now();
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_ahsc"))
            .args([
                "search",
                "--data",
                csv.to_str().unwrap(),
                "--n1",
                "20",
                "--n2",
                "5",
                "--seed",
                "7",
                "--epochs",
                "50",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        elapsed.push(started.elapsed());
        assert!(status.success());
    }
    for e in &elapsed {
        assert!(e.as_secs_f64() < 60.0, "run took {e:?}");
    }

    let log_a = std::fs::read(&out_a).unwrap();
    let log_b = std::fs::read(&out_b).unwrap();
    assert!(!log_a.is_empty());
    assert_eq!(log_a, log_b, "reruns must be byte-identical");

    let last = String::from_utf8(log_a).unwrap();
    let best: serde_json::Value = serde_json::from_str(last.lines().last().unwrap()).unwrap();
    let score = best["score"].as_f64().unwrap();
    assert!(score >= 0.90, "held-out accuracy {score}");
    println!(
        "acceptance criterion 10: PASS (accuracy {score:.4}, {:.2}s + {:.2}s, byte-identical)",
        elapsed[0].as_secs_f64(),
        elapsed[1].as_secs_f64()
    );
}

/// Criterion 11: the proxy-oracle diagnostic emits 20 non-discarded paired
/// values and a finite rank correlation.
#[test]
fn criterion_11_proxy_oracle_diagnostic() {
    let csv = bundled_csv();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ahsc"))
        .args([
            "oracle-validate",
            "--data",
            csv.to_str().unwrap(),
            "--n",
            "20",
            "--seed",
            "11",
        ])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();

    let rows: Vec<_> = lines.iter().filter(|v| v.get("config_id").is_some()).collect();
    assert_eq!(rows.len(), 20, "all twenty sampled configs survive the screen");
    for r in &rows {
        assert!(r["mu_max"].as_f64().unwrap().is_finite());
        assert!(r["oracle"].as_f64().unwrap().is_finite());
    }
    let summary = lines.last().unwrap();
    assert_eq!(summary["count"], 20);
    let rho = summary["spearman"].as_f64().unwrap();
    assert!(rho.is_finite(), "rho = {rho}");
    println!("acceptance criterion 11: PASS (20 pairs, spearman rho = {rho:.4})");
}
