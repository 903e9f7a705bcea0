//! Release acceptance suite: one test per shipping criterion. Every test
//! pins its tolerances as constants, checks real behavior end to end (library
//! calls or the installed binary), and prints a single `ACCEPTANCE nn PASS`
//! line with the measured values once its assertions hold. Run with
//! `cargo test --test acceptance -- --test-threads=1 --nocapture` to see the
//! lines in order.

mod oracle;

use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tempfile::TempDir;
use trigsvm::audit::{eigen_audit, leading_minor_audit, leading_minors, SurveyReport};
use trigsvm::data::{gen_circles, gen_svr_sine, load_model, save_model, Dataset, Model, Target};
use trigsvm::select::{
    accuracy, class_distance_stats, grid_search, holdout_split, log2_grid, recommend_sigma_range,
    ClassDistance, DistanceStats, SigmaRegime,
};
use trigsvm::svc::{count_stats, fit_svc};
use trigsvm::svr::fit_svr;
use trigsvm::{KernelSpec, SolverConfig};

// Pinned tolerances and budgets, one block per criterion.
const IDENTITY_BUDGET: Duration = Duration::from_secs(1);
const DECOMPOSITION_TOL: f64 = 1e-15;
const AGREEMENT_BUDGET: Duration = Duration::from_secs(5);
const MINOR_DECISIVE_FLOOR: f64 = 1e-8;
const AUDIT_TOL: f64 = 1e-10;
const SURVEY_EIG_TOL: f64 = 1e-8;
const SOLVER_ORACLE_BUDGET: Duration = Duration::from_secs(30);
const TWO_POINT_ALPHA_TOL: f64 = 1e-6;
const TWO_POINT_BIAS_TOL: f64 = 1e-8;
const CIRCLES_BUDGET: Duration = Duration::from_secs(20);
const LINEAR_ACCURACY_CEILING: f64 = 0.65;
const TUNED_TRIG_ACCURACY_FLOOR: f64 = 0.95;
const SVR_RMSE_CEILING: f64 = 0.15;
const PERSISTENCE_TOL: f64 = 1e-12;

fn pass(number: u32, name: &str, detail: &str) {
    println!("ACCEPTANCE {number:02} PASS  {name}: {detail}");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trigsvm"))
}

fn run_cli(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary launches");
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

fn report_json(stdout: &str) -> serde_json::Value {
    let marker = "--- report json ---";
    let pos = stdout.find(marker).expect("report marker present");
    serde_json::from_str(stdout[pos + marker.len()..].trim()).expect("report JSON parses")
}

fn labels_of(ds: &Dataset) -> Vec<f64> {
    ds.target.as_slice().to_vec()
}

/// Criterion 1 — kernel identities on 1000 seeded random inputs: exact 1 at
/// zero distance, bitwise symmetry, trig confined to (0, 1]; under 1 s.
#[test]
fn criterion_01_kernel_identities() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let widths = log2_grid();
    for trial in 0..1000usize {
        let d = rng.gen_range(1..=6);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let sigma = widths[rng.gen_range(0..widths.len())];
        let beta = rng.gen_range(0.0..=1.0);
        for spec in [
            KernelSpec::trig(sigma),
            KernelSpec::gaussian(sigma),
            KernelSpec::mixed(sigma, beta),
        ] {
            let at_zero = spec.eval(&x, &x).unwrap();
            assert_eq!(
                at_zero.to_bits(),
                1.0f64.to_bits(),
                "trial {trial}: {} self-similarity is {at_zero}, not exactly 1",
                spec.family_name()
            );
            let xz = spec.eval(&x, &z).unwrap();
            let zx = spec.eval(&z, &x).unwrap();
            assert_eq!(
                xz.to_bits(),
                zx.to_bits(),
                "trial {trial}: {} is not bitwise symmetric",
                spec.family_name()
            );
        }
        let t = KernelSpec::trig(sigma).eval(&x, &z).unwrap();
        assert!(
            t > 0.0 && t <= 1.0,
            "trial {trial}: trig value {t} outside (0, 1]"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < IDENTITY_BUDGET, "took {elapsed:?}");
    pass(
        1,
        "kernel identities",
        &format!("1000 random inputs, 3 kernels each, in {elapsed:?}"),
    );
}

/// Criterion 2 — the mixture decomposes as beta*trig + (1-beta)*gaussian to
/// within 1e-15 on 1000 seeded random inputs.
#[test]
fn criterion_02_mixed_kernel_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=6);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let sigma = [0.03125, 0.5, 1.0, 2.0, 4.0, 1024.0][rng.gen_range(0..6)];
        let beta = [0.0, 0.25, 0.5, 0.75, 1.0][rng.gen_range(0..5)];
        let gaussian = KernelSpec::gaussian(sigma).eval(&x, &z).unwrap();
        let trig = KernelSpec::trig(sigma).eval(&x, &z).unwrap();
        let mixed = KernelSpec::mixed(sigma, beta).eval(&x, &z).unwrap();
        let gap = (mixed - (beta * trig + (1.0 - beta) * gaussian)).abs();
        worst = worst.max(gap);
        assert!(
            gap <= DECOMPOSITION_TOL,
            "decomposition gap {gap} at sigma {sigma}, beta {beta}"
        );
    }
    pass(
        2,
        "mixed-kernel decomposition",
        &format!("worst gap {worst:.3e} <= {DECOMPOSITION_TOL:.0e}"),
    );
}

/// Criterion 3 — the leading-minor audit and the eigenvalue audit agree on
/// PD-vs-not for 500 random unit-diagonal symmetric matrices (n <= 6)
/// whenever every minor is decisive (|minor| > 1e-8); under 5 s.
#[test]
fn criterion_03_audit_agreement() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut compared = 0usize;
    let mut skipped = 0usize;
    for trial in 0..500usize {
        let n = rng.gen_range(1..=6);
        let mut g = Array2::<f64>::eye(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(-1.0..1.0);
                g[[i, j]] = v;
                g[[j, i]] = v;
            }
        }
        let minors = leading_minors(&g.view()).unwrap();
        if minors.iter().any(|m| m.abs() <= MINOR_DECISIVE_FLOOR) {
            skipped += 1;
            continue;
        }
        let by_minors = leading_minor_audit(&g.view(), AUDIT_TOL).unwrap();
        let by_eigen = eigen_audit(&g.view(), AUDIT_TOL).unwrap();
        assert_eq!(
            by_minors.is_positive_definite(),
            by_eigen.is_positive_definite(),
            "trial {trial}: minors say {:?}, eigenvalues say {:?} for\n{g:?}",
            by_minors.classification,
            by_eigen.classification
        );
        compared += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed < AGREEMENT_BUDGET, "took {elapsed:?}");
    assert!(compared >= 400, "only {compared} decisive matrices");
    pass(
        3,
        "PSD audit agreement",
        &format!(
            "{compared} decisive matrices agreed ({skipped} near-singular skipped) in {elapsed:?}"
        ),
    );
}

/// The survey's published per-trial seeding protocol (SplitMix64 finalizer
/// over the master seed and trial index), restated here so the reference
/// can regenerate any trial's points without touching the library path.
fn survey_trial_seed(seed: u64, t: u64) -> u64 {
    let mut z = seed.wrapping_add((t.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Regenerate one survey trial from the protocol: draw n, d, a width from
/// the 16-value power-of-two grid, then standard-normal coordinates.
fn survey_trial_points(seed: u64, t: u64, n_max: usize, d_max: usize) -> (Array2<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(survey_trial_seed(seed, t));
    let n = rng.gen_range(1..=n_max);
    let d = rng.gen_range(1..=d_max);
    let widths = log2_grid();
    let sigma = widths[rng.gen_range(0..widths.len())];
    let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
    (x, sigma)
}

/// Criterion 4 — the 1000-trial randomized indefiniteness survey (n <= 15,
/// d <= 4, widths from the power-of-two grid, seed 42) run through the
/// binary: the artifact exists, reruns are byte-identical, and every
/// recorded eigenvalue matches an independent eigensolver within 1e-8 on
/// independently regenerated points. The PSD verdict itself is reported,
/// not asserted.
#[test]
fn criterion_04_trig_survey_determinism_and_eigen_oracle() {
    let dir = TempDir::new().unwrap();
    let s1 = dir.path().join("survey_a.json");
    let s2 = dir.path().join("survey_b.json");
    for out in [&s1, &s2] {
        run_cli(&[
            "audit",
            "--kernel",
            "trig",
            "--trials",
            "1000",
            "--n-max",
            "15",
            "--d-max",
            "4",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let bytes_a = std::fs::read(&s1).unwrap();
    let bytes_b = std::fs::read(&s2).unwrap();
    assert_eq!(bytes_a, bytes_b, "survey artifact is not deterministic");

    let report: SurveyReport = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(report.kernel, "trig");
    assert_eq!(report.trials, 1000);
    assert!(report.min_eigenvalue.is_finite());

    // Reference eigensolver on independently rebuilt Grams, one per
    // recorded violation.
    let mut checked = 0usize;
    let mut worst_gap = 0.0f64;
    for v in &report.violations {
        let (x, sigma) = survey_trial_points(42, v.seed_offset, 15, 4);
        assert_eq!(x.nrows(), v.n, "trial {} shape drifted", v.seed_offset);
        assert_eq!(x.ncols(), v.d, "trial {} shape drifted", v.seed_offset);
        assert_eq!(
            Some(sigma),
            v.sigma,
            "trial {} width drifted",
            v.seed_offset
        );
        let kernel = oracle::OracleKernel::Trig(sigma);
        let n = x.nrows();
        let gram = oracle::base_gram(&x, kernel, 0.0);
        let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| gram[i][j]);
        let reference = nalgebra::SymmetricEigen::new(dm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let gap = (reference - v.min_eig).abs();
        worst_gap = worst_gap.max(gap);
        assert!(
            gap <= SURVEY_EIG_TOL,
            "trial {}: reported eigenvalue {} vs reference {reference}",
            v.seed_offset,
            v.min_eig
        );
        checked += 1;
    }
    assert!(
        checked > 0,
        "a 1000-trial trig survey should record at least one sub-tolerance eigenvalue"
    );
    let min_recorded = report
        .violations
        .iter()
        .map(|v| v.min_eig)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(
        report.min_eigenvalue, min_recorded,
        "global minimum must be the smallest recorded eigenvalue"
    );
    pass(
        4,
        "indefiniteness stress survey",
        &format!(
            "deterministic artifact, {checked} eigenvalues oracle-verified (worst gap {worst_gap:.2e}), global min {:.6}",
            report.min_eigenvalue
        ),
    );
}

/// Criterion 5 — the solver matches a from-scratch brute-force oracle on 50
/// seeded problems (n <= 8): KKT violation <= 1e-3, objective within 1e-6
/// of an enumerated KKT point (the global optimum when convex); under 30 s.
#[test]
fn criterion_05_solver_equals_brute_force() {
    let started = Instant::now();
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4242 + trial);
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(1..=3);
        let c = if rng.gen::<bool>() { 1.0 } else { 10.0 };
        let sigma = [0.5, 1.0, 2.0, 4.0][rng.gen_range(0..4)];
        let kernel = if trial % 2 == 0 {
            oracle::OracleKernel::Trig(sigma)
        } else {
            oracle::OracleKernel::Gaussian(sigma)
        };
        let spec = match kernel {
            oracle::OracleKernel::Trig(s) => KernelSpec::trig(s),
            oracle::OracleKernel::Gaussian(s) => KernelSpec::gaussian(s),
        };
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
        let mut y: Vec<f64> = (0..n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;

        let config = SolverConfig {
            c,
            kkt_tol: 1e-6,
            max_iter: None,
            seed: 42,
        };
        let model = fit_svc(&x.view(), &y, &spec, &config)
            .unwrap_or_else(|e| panic!("trial {trial}: fit failed: {e}"));

        let mut alpha = vec![0.0; n];
        for (k, &i) in model.support_indices.iter().enumerate() {
            alpha[i] = model.dual_coef[k] * y[i];
        }
        let lambda = model.jitter_lambda.unwrap_or(0.0);
        let k = oracle::base_gram(&x, kernel, lambda);
        let q: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect())
            .collect();
        let p = vec![-1.0; n];

        oracle::check_against_oracles(
            &format!("problem {trial}"),
            &q,
            &p,
            &y,
            c,
            &alpha,
            kernel.convex() && lambda == 0.0,
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < SOLVER_ORACLE_BUDGET, "took {elapsed:?}");
    pass(
        5,
        "solver vs brute force",
        &format!(
            "50 problems within {:.0e} of enumerated optima, KKT <= {:.0e}, in {elapsed:?}",
            oracle::OBJECTIVE_TOL,
            oracle::KKT_TOL
        ),
    );
}

/// Criterion 6 — the distance-1 two-point problem with the trig kernel at
/// sigma = 1 and C = 10 has the closed-form solution
/// alpha = 1 / (1 - sin(pi/3)), b = 0.
#[test]
fn criterion_06_two_point_closed_form() {
    let x = array![[0.0], [1.0]];
    let y = vec![1.0, -1.0];
    let config = SolverConfig {
        kkt_tol: 1e-10,
        ..SolverConfig::with_c(10.0)
    };
    let model = fit_svc(&x.view(), &y, &KernelSpec::trig(1.0), &config).unwrap();
    let expected = 1.0 / (1.0 - (std::f64::consts::PI / 3.0).sin());
    assert_eq!(model.support_indices, vec![0, 1]);
    assert!(
        (model.dual_coef[0] - expected).abs() <= TWO_POINT_ALPHA_TOL,
        "alpha_1 = {} vs {expected}",
        model.dual_coef[0]
    );
    assert!(
        (model.dual_coef[1] + expected).abs() <= TWO_POINT_ALPHA_TOL,
        "alpha_2 = {} vs -{expected}",
        model.dual_coef[1]
    );
    assert!(
        model.bias.abs() <= TWO_POINT_BIAS_TOL,
        "bias = {}",
        model.bias
    );
    pass(
        6,
        "two-point closed form",
        &format!(
            "alpha = {:.7} (expected {expected:.7}), |b| = {:.1e}",
            model.dual_coef[0],
            model.bias.abs()
        ),
    );
}

/// Criterion 7 — on the 400-point concentric-circles set (seed 42, 80/20
/// split) a degree-1 polynomial kernel stays at or below 0.65 test accuracy
/// while a grid-tuned trig kernel reaches at least 0.95; under 20 s.
#[test]
fn criterion_07_circles_separation() {
    let started = Instant::now();
    let ds = gen_circles(400, 42).unwrap();
    let (train, test) = holdout_split(&ds, 0.8, 42).unwrap();
    let train_labels = labels_of(&train);
    let test_labels = labels_of(&test);

    let linear = fit_svc(
        &train.features.view(),
        &train_labels,
        &KernelSpec::poly(1),
        &SolverConfig::with_c(1.0),
    )
    .unwrap();
    let linear_acc = accuracy(
        &linear.predict_batch(&test.features.view()).unwrap(),
        &test_labels,
    )
    .unwrap();
    assert!(
        linear_acc <= LINEAR_ACCURACY_CEILING,
        "degree-1 polynomial reached {linear_acc}, expected <= {LINEAR_ACCURACY_CEILING}"
    );

    let stats = class_distance_stats(&train).unwrap();
    let (_, sigma_grid) = recommend_sigma_range(&stats);
    let grid = grid_search(
        &train,
        &KernelSpec::trig(1.0),
        &log2_grid(),
        &sigma_grid,
        5,
        42,
    )
    .unwrap();
    let best = grid.best_cell();
    let tuned = fit_svc(
        &train.features.view(),
        &train_labels,
        &KernelSpec::trig(best.sigma),
        &SolverConfig::with_c(best.c),
    )
    .unwrap();
    let tuned_acc = accuracy(
        &tuned.predict_batch(&test.features.view()).unwrap(),
        &test_labels,
    )
    .unwrap();
    assert!(
        tuned_acc >= TUNED_TRIG_ACCURACY_FLOOR,
        "tuned trig reached only {tuned_acc}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed < CIRCLES_BUDGET, "took {elapsed:?}");
    pass(
        7,
        "circles separation",
        &format!(
            "linear {linear_acc:.4} <= {LINEAR_ACCURACY_CEILING}, trig(C={}, sigma={}) {tuned_acc:.4} >= {TUNED_TRIG_ACCURACY_FLOOR}, in {elapsed:?}",
            best.c, best.sigma
        ),
    );
}

/// Criterion 8 — on the regenerated compact circles data at C = 1, training
/// errors at sigma = 100 are strictly fewer than at sigma = 0.1.
#[test]
fn criterion_08_width_sweep_trend() {
    let ds = gen_circles(400, 42).unwrap();
    let labels = labels_of(&ds);
    let empty = Dataset::new(
        Array2::zeros((0, ds.features.ncols())),
        Target::Labels(vec![]),
    )
    .unwrap();
    let errors_at = |sigma: f64| -> usize {
        let model = fit_svc(
            &ds.features.view(),
            &labels,
            &KernelSpec::trig(sigma),
            &SolverConfig::with_c(1.0),
        )
        .unwrap();
        let (_, train_errors, _) = count_stats(&model, &ds, &empty).unwrap();
        train_errors
    };
    let narrow = errors_at(0.1);
    let wide = errors_at(100.0);
    assert!(
        wide < narrow,
        "training errors should fall as the width grows: sigma=0.1 gave {narrow}, sigma=100 gave {wide}"
    );
    pass(
        8,
        "width-sweep trend",
        &format!("training errors fell {narrow} -> {wide} as sigma went 0.1 -> 100"),
    );
}

/// Criterion 9 — the width heuristic maps max-distance 5.8477 to the
/// compact regime (upper half of the grid) and 47861 to the sparse regime
/// (lower half).
#[test]
fn criterion_09_heuristic_regimes() {
    let stats_with_max = |max: f64| DistanceStats {
        classes: vec![ClassDistance {
            label: 1.0,
            min_pairwise: 0.01,
            max_pairwise: max,
            sample_count: 50,
        }],
    };
    let grid = log2_grid();

    let (regime, sub) = recommend_sigma_range(&stats_with_max(5.8477));
    assert_eq!(regime, SigmaRegime::Compact);
    assert_eq!(sub, grid[8..].to_vec());
    assert_eq!(sub.first().copied(), Some(8.0));
    assert_eq!(sub.last().copied(), Some(1024.0));

    let (regime, sub) = recommend_sigma_range(&stats_with_max(47_861.0));
    assert_eq!(regime, SigmaRegime::Sparse);
    assert_eq!(sub, grid[..8].to_vec());
    assert_eq!(sub.first().copied(), Some(0.03125));
    assert_eq!(sub.last().copied(), Some(4.0));

    pass(
        9,
        "width-heuristic regimes",
        "5.8477 -> compact/upper sub-grid, 47861 -> sparse/lower sub-grid",
    );
}

/// Criterion 10 — the regression demo (200-point sine, seed 42, noise 0.1,
/// mixture kernel, epsilon = 0.1) run through the binary lands within
/// RMSE 0.15 of the noiseless curve and emits a 200-row curve CSV.
#[test]
fn criterion_10_svr_demo() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve.csv");
    let stdout = run_cli(&[
        "svr-demo",
        "--kernel",
        "mixed",
        "--sigma",
        "0.5",
        "--beta",
        "0.5",
        "--C",
        "10",
        "--epsilon",
        "0.1",
        "--n",
        "200",
        "--noise",
        "0.1",
        "--seed",
        "42",
        "--out",
        curve.to_str().unwrap(),
    ]);
    let report = report_json(&stdout);
    let rmse = report["metrics"][0]["rmse_vs_true"].as_f64().unwrap();
    assert!(
        rmse <= SVR_RMSE_CEILING,
        "rmse vs noiseless curve is {rmse}"
    );
    let text = std::fs::read_to_string(&curve).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y_noisy,y_true,y_pred");
    assert_eq!(lines.len() - 1, 200, "curve CSV must carry 200 rows");
    pass(
        10,
        "regression demo",
        &format!("rmse {rmse:.4} <= {SVR_RMSE_CEILING}, 200-row curve emitted"),
    );
}

/// Criterion 11 — JSON persistence round-trips both model kinds with
/// decision values preserved within 1e-12 on 100 random probes.
#[test]
fn criterion_11_model_persistence() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);

    // Classifier on the circles data, probed over its bounding box.
    let ds = gen_circles(150, 8).unwrap();
    let labels = labels_of(&ds);
    let svc = fit_svc(
        &ds.features.view(),
        &labels,
        &KernelSpec::trig(2.0),
        &SolverConfig::with_c(10.0),
    )
    .unwrap();
    let probes = Array2::from_shape_fn((100, 2), |_| rng.gen_range(-3.0..3.0));
    let before = svc.decision_batch(&probes.view()).unwrap();
    let path = dir.path().join("svc.json");
    save_model(&Model::Svc(svc), &path).unwrap();
    let Model::Svc(restored) = load_model(&path).unwrap() else {
        panic!("classifier round-tripped into the wrong variant");
    };
    let after = restored.decision_batch(&probes.view()).unwrap();
    let svc_gap = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(svc_gap <= PERSISTENCE_TOL, "classifier gap {svc_gap}");

    // Regressor on the sine curve, probed over its x-range.
    let sample = gen_svr_sine(80, 9, 0.1).unwrap();
    let x = Array2::from_shape_vec((sample.x.len(), 1), sample.x.clone()).unwrap();
    let svr = fit_svr(
        &x.view(),
        &sample.y_noisy,
        &KernelSpec::mixed(0.5, 0.5),
        10.0,
        0.1,
        &SolverConfig::default(),
    )
    .unwrap();
    let probes = Array2::from_shape_fn((100, 1), |_| rng.gen_range(0.0..10.0));
    let before = svr.predict_batch(&probes.view()).unwrap();
    let path = dir.path().join("svr.json");
    save_model(&Model::Svr(svr), &path).unwrap();
    let Model::Svr(restored) = load_model(&path).unwrap() else {
        panic!("regressor round-tripped into the wrong variant");
    };
    let after = restored.predict_batch(&probes.view()).unwrap();
    let svr_gap = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(svr_gap <= PERSISTENCE_TOL, "regressor gap {svr_gap}");

    pass(
        11,
        "model persistence",
        &format!(
            "worst decision-value gap {:.2e} over 200 probes",
            svc_gap.max(svr_gap)
        ),
    );
}
