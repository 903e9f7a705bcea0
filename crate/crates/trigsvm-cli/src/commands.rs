//! One function per subcommand. Each builds its artifact(s), then emits a
//! human table plus a JSON `RunReport` echoing the full resolved
//! configuration.

use anyhow::{bail, Context, Result};
use ndarray::Array2;
use serde_json::json;
use std::fs;
use std::path::Path;
use std::time::Instant;

use trigsvm::audit::randomized_psd_survey;
use trigsvm::data::{
    gen_circles, gen_svr_sine, load_csv, save_csv, save_model, standardize, CsvOptions, Dataset,
    LabelColumn, Model, Target, TargetKind,
};
use trigsvm::select::{
    accuracy, class_distance_stats, grid_search, holdout_split, log2_grid, recommend_sigma_range,
};
use trigsvm::svc::{count_stats, fit_svc};
use trigsvm::svr::{fit_svr, svr_rmse};
use trigsvm::{KernelSpec, SolverConfig};

use crate::report::{elapsed_ms, emit, render_table, RunReport};
use crate::{
    AuditArgs, CompareArgs, HeuristicArgs, PredictArgs, SvrDemoArgs, SweepArgs, SynthArgs,
    SynthName, TrainArgs, TuneArgs,
};

fn csv_options(label_column: &Option<String>, kind: TargetKind) -> CsvOptions {
    CsvOptions {
        label_column: match label_column {
            Some(name) => LabelColumn::Named(name.clone()),
            None => LabelColumn::Last,
        },
        has_header: true,
        target_kind: kind,
    }
}

fn load_classification(path: &Path, label_column: &Option<String>) -> Result<Dataset> {
    load_csv(path, &csv_options(label_column, TargetKind::Classification))
        .with_context(|| format!("loading {}", path.display()))
}

fn labels_of(dataset: &Dataset) -> &[f64] {
    match &dataset.target {
        Target::Labels(l) => l,
        Target::Values(v) => v,
    }
}

/// Zero-row stand-in so `count_stats` can score a train-only run.
fn empty_like(dataset: &Dataset) -> Result<Dataset> {
    Ok(Dataset::new(
        Array2::zeros((0, dataset.d())),
        Target::Labels(Vec::new()),
    )?)
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let start = Instant::now();
    let (name, dataset) = match args.name {
        SynthName::Circles => (
            "circles",
            gen_circles(args.n, args.seed).context("generating circles")?,
        ),
        SynthName::SvrSine => {
            let sample =
                gen_svr_sine(args.n, args.seed, args.noise).context("generating sine curve")?;
            ("svr-sine", sample.to_dataset()?)
        }
    };
    save_csv(&dataset, &args.out).with_context(|| format!("writing {}", args.out.display()))?;

    let kind = match dataset.target {
        Target::Labels(_) => "labels in {-1,+1}",
        Target::Values(_) => "real values",
    };
    let row = vec![
        name.to_string(),
        dataset.n().to_string(),
        dataset.d().to_string(),
        kind.to_string(),
        args.out.display().to_string(),
    ];
    let table = render_table(
        &["dataset", "rows", "features", "target", "out"].map(String::from),
        &[row],
    );
    emit(
        &table,
        &RunReport {
            command: "synth".into(),
            config: json!({
                "name": name,
                "n": args.n,
                "seed": args.seed,
                "noise": if args.name == SynthName::SvrSine { Some(args.noise) } else { None },
                "out": args.out.display().to_string(),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics: vec![json!({
                "rows": dataset.n(),
                "features": dataset.d(),
            })],
        },
    );
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let start = Instant::now();
    let raw = load_classification(&args.data, &args.label_column)?;
    let spec = args.kernel.spec();
    let config = SolverConfig {
        c: args.c,
        seed: args.seed,
        ..SolverConfig::default()
    };

    let (fit_data, stats) = if args.standardize {
        let (scaled, _, stats) = standardize(&raw, &raw)?;
        (scaled, Some(stats))
    } else {
        (raw.clone(), None)
    };
    let labels = labels_of(&fit_data).to_vec();
    let mut model =
        fit_svc(&fit_data.features.view(), &labels, &spec, &config).context("fitting")?;
    model.scaling = stats;

    // With scaling attached the model standardizes probes itself, so the
    // error count runs on the raw rows.
    let (sv, train_errors, _) = count_stats(&model, &raw, &empty_like(&raw)?)?;
    let train_accuracy = 1.0 - train_errors as f64 / raw.n() as f64;
    save_model(&Model::Svc(model), &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;

    let table = render_table(
        &["kernel", "C", "#SV", "#TrE", "train_acc", "model"].map(String::from),
        &[vec![
            spec.family_name().to_string(),
            fmt(args.c),
            sv.to_string(),
            train_errors.to_string(),
            fmt4(train_accuracy),
            args.out.display().to_string(),
        ]],
    );
    emit(
        &table,
        &RunReport {
            command: "train".into(),
            config: json!({
                "data": args.data.display().to_string(),
                "kernel": spec,
                "C": args.c,
                "seed": args.seed,
                "standardize": args.standardize,
                "label_column": args.label_column,
                "out": args.out.display().to_string(),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics: vec![json!({
                "sv_count": sv,
                "train_errors": train_errors,
                "train_accuracy": train_accuracy,
            })],
        },
    );
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let start = Instant::now();
    let model = trigsvm::data::load_model(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let kind = match model {
        Model::Svc(_) => TargetKind::Classification,
        Model::Svr(_) => TargetKind::Regression,
    };
    let dataset = load_csv(&args.data, &csv_options(&args.label_column, kind))
        .with_context(|| format!("loading {}", args.data.display()))?;

    let (predictions, metric) = match &model {
        Model::Svc(m) => {
            let preds = m.predict_batch(&dataset.features.view())?;
            let acc = accuracy(&preds, labels_of(&dataset))?;
            let errors = preds
                .iter()
                .zip(labels_of(&dataset))
                .filter(|(p, l)| p != l)
                .count();
            (preds, json!({"accuracy": acc, "errors": errors}))
        }
        Model::Svr(m) => {
            let preds = m.predict_batch(&dataset.features.view())?;
            let rmse = svr_rmse(m, &dataset.features.view(), labels_of(&dataset))?;
            (preds, json!({"rmse": rmse}))
        }
    };

    // Echo the input schema and append the prediction column.
    let names: Vec<String> = match &dataset.feature_names {
        Some(names) => names.clone(),
        None => (1..=dataset.d()).map(|i| format!("x{i}")).collect(),
    };
    let target_name = match kind {
        TargetKind::Classification => "label",
        TargetKind::Regression => "target",
    };
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push_str(&format!(",{target_name},prediction\n"));
    for i in 0..dataset.n() {
        for v in dataset.features.row(i) {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(&labels_of(&dataset)[i].to_string());
        out.push(',');
        out.push_str(&predictions[i].to_string());
        out.push('\n');
    }
    write_text(&args.out, &out)?;

    let table = render_table(
        &["model", "rows", "score", "out"].map(String::from),
        &[vec![
            model.kernel().family_name().to_string(),
            dataset.n().to_string(),
            metric.to_string(),
            args.out.display().to_string(),
        ]],
    );
    emit(
        &table,
        &RunReport {
            command: "predict".into(),
            config: json!({
                "data": args.data.display().to_string(),
                "model": args.model.display().to_string(),
                "label_column": args.label_column,
                "out": args.out.display().to_string(),
            }),
            seed: 0,
            timing_ms: elapsed_ms(start),
            metrics: vec![metric],
        },
    );
    Ok(())
}

pub fn tune(args: &TuneArgs) -> Result<()> {
    let start = Instant::now();
    let dataset = load_classification(&args.data, &args.label_column)?;
    let spec = args.kernel.spec();

    let c_grid = match &args.c_grid {
        Some(grid) => grid.clone(),
        None => log2_grid(),
    };
    let sigma_grid = match &args.sigma_grid {
        Some(grid) => grid.clone(),
        None if spec.has_width() => {
            let stats = class_distance_stats(&dataset)?;
            recommend_sigma_range(&stats).1
        }
        None => vec![args.kernel.sigma],
    };

    let grid = grid_search(&dataset, &spec, &c_grid, &sigma_grid, args.folds, args.seed)
        .context("grid search")?;
    let mut json_text = serde_json::to_string_pretty(&grid)?;
    json_text.push('\n');
    write_text(&args.out, &json_text)?;
    let csv_path = args.out.with_extension("csv");
    write_text(&csv_path, &grid.to_csv_string())?;

    let best = grid.best_cell();
    let table = render_table(
        &[
            "kernel",
            "cells",
            "folds",
            "best C",
            "best sigma",
            "cv_acc",
            "std",
            "mean_sv",
        ]
        .map(String::from),
        &[vec![
            grid.kernel_family.clone(),
            grid.cells.len().to_string(),
            grid.folds.to_string(),
            fmt(best.c),
            fmt(best.sigma),
            fmt4(best.mean_cv_accuracy),
            fmt4(best.fold_std),
            fmt(best.sv_count_mean),
        ]],
    );
    emit(
        &table,
        &RunReport {
            command: "tune".into(),
            config: json!({
                "data": args.data.display().to_string(),
                "kernel": spec,
                "c_grid": c_grid,
                "sigma_grid": sigma_grid,
                "folds": args.folds,
                "seed": args.seed,
                "label_column": args.label_column,
                "out": args.out.display().to_string(),
                "out_csv": csv_path.display().to_string(),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics: vec![json!({
                "best_c": best.c,
                "best_sigma": best.sigma,
                "mean_cv_accuracy": best.mean_cv_accuracy,
                "fold_std": best.fold_std,
                "sv_count_mean": best.sv_count_mean,
            })],
        },
    );
    Ok(())
}

pub fn heuristic(args: &HeuristicArgs) -> Result<()> {
    let start = Instant::now();
    let raw = load_classification(&args.data, &args.label_column)?;
    let dataset = if args.standardize {
        standardize(&raw, &raw)?.0
    } else {
        raw
    };
    let stats = class_distance_stats(&dataset)?;
    let (regime, subgrid) = recommend_sigma_range(&stats);

    let mut rows: Vec<Vec<String>> = stats
        .classes
        .iter()
        .map(|c| {
            vec![
                fmt(c.label),
                c.sample_count.to_string(),
                fmt(c.min_pairwise),
                fmt(c.max_pairwise),
            ]
        })
        .collect();
    rows.push(vec![
        "overall".into(),
        dataset.n().to_string(),
        String::new(),
        fmt(stats.overall_max()),
    ]);
    let table = render_table(
        &["class", "samples", "min_dist", "max_dist"].map(String::from),
        &rows,
    );
    let grid_text = subgrid
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let table = format!("{table}\n\nregime: {regime}\nsigma sub-grid: [{grid_text}]");

    emit(
        &table,
        &RunReport {
            command: "heuristic".into(),
            config: json!({
                "data": args.data.display().to_string(),
                "standardize": args.standardize,
                "label_column": args.label_column,
            }),
            seed: 0,
            timing_ms: elapsed_ms(start),
            metrics: vec![json!({
                "classes": stats.classes,
                "overall_max_distance": stats.overall_max(),
                "regime": regime.to_string(),
                "sigma_subgrid": subgrid,
            })],
        },
    );
    Ok(())
}

pub fn audit(args: &AuditArgs) -> Result<()> {
    let start = Instant::now();
    let spec = args.kernel.spec();
    let survey = randomized_psd_survey(&spec, args.trials, args.n_max, args.d_max, args.seed)
        .context("running survey")?;
    let mut json_text = serde_json::to_string_pretty(&survey)?;
    json_text.push('\n');
    match &args.out {
        Some(path) => write_text(path, &json_text)?,
        None => print!("{json_text}"),
    }

    let table = render_table(
        &["kernel", "trials", "min_eigenvalue", "violations"].map(String::from),
        &[vec![
            survey.kernel.clone(),
            survey.trials.to_string(),
            fmt(survey.min_eigenvalue),
            survey.violations.len().to_string(),
        ]],
    );
    emit(
        &table,
        &RunReport {
            command: "audit".into(),
            config: json!({
                "kernel": spec,
                "trials": args.trials,
                "n_max": args.n_max,
                "d_max": args.d_max,
                "seed": args.seed,
                "out": args.out.as_ref().map(|p| p.display().to_string()),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics: vec![json!({
                "min_eigenvalue": survey.min_eigenvalue,
                "violation_count": survey.violations.len(),
            })],
        },
    );
    Ok(())
}

pub fn svr_demo(args: &SvrDemoArgs) -> Result<()> {
    let start = Instant::now();
    let spec = args.spec();
    let sample = gen_svr_sine(args.n, args.seed, args.noise).context("generating sine curve")?;
    let x = Array2::from_shape_vec((sample.x.len(), 1), sample.x.clone())
        .expect("curve shape is consistent");
    let config = SolverConfig {
        seed: args.seed,
        ..SolverConfig::default()
    };
    let model = fit_svr(
        &x.view(),
        &sample.y_noisy,
        &spec,
        args.c,
        args.epsilon,
        &config,
    )
    .context("fitting")?;
    let predictions = model.predict_batch(&x.view())?;
    let rmse_true = svr_rmse(&model, &x.view(), &sample.y_true)?;
    let rmse_noisy = svr_rmse(&model, &x.view(), &sample.y_noisy)?;

    let mut curve = String::from("x,y_noisy,y_true,y_pred\n");
    for i in 0..sample.x.len() {
        curve.push_str(&format!(
            "{},{},{},{}\n",
            sample.x[i], sample.y_noisy[i], sample.y_true[i], predictions[i]
        ));
    }
    write_text(&args.out, &curve)?;

    let table = render_table(
        &[
            "kernel",
            "C",
            "epsilon",
            "n",
            "#SV",
            "rmse_vs_true",
            "rmse_vs_noisy",
            "out",
        ]
        .map(String::from),
        &[vec![
            spec.family_name().to_string(),
            fmt(args.c),
            fmt(args.epsilon),
            args.n.to_string(),
            model.dual_coef.len().to_string(),
            fmt4(rmse_true),
            fmt4(rmse_noisy),
            args.out.display().to_string(),
        ]],
    );
    emit(
        &table,
        &RunReport {
            command: "svr-demo".into(),
            config: json!({
                "kernel": spec,
                "C": args.c,
                "epsilon": args.epsilon,
                "n": args.n,
                "noise": args.noise,
                "seed": args.seed,
                "out": args.out.display().to_string(),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics: vec![json!({
                "sv_count": model.dual_coef.len(),
                "rmse_vs_true": rmse_true,
                "rmse_vs_noisy": rmse_noisy,
            })],
        },
    );
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let start = Instant::now();
    let spec = args.kernel.spec();
    if !spec.has_width() && args.sigmas.len() > 1 {
        bail!(
            "kernel family {} has no width parameter to sweep",
            spec.family_name()
        );
    }
    let dataset = load_classification(&args.data, &args.label_column)?;
    let (train, test) = holdout_split(&dataset, args.train_fraction, args.seed)?;
    let train_labels = labels_of(&train).to_vec();

    let mut sv_row = vec!["#SV".to_string()];
    let mut tre_row = vec!["#TrE".to_string()];
    let mut tse_row = vec!["#TsE".to_string()];
    let mut metrics = Vec::new();
    for &sigma in &args.sigmas {
        let cell_spec = spec.with_width(sigma);
        let config = SolverConfig {
            c: args.c,
            seed: args.seed,
            ..SolverConfig::default()
        };
        let model = fit_svc(&train.features.view(), &train_labels, &cell_spec, &config)
            .with_context(|| format!("fitting at sigma {sigma}"))?;
        let (sv, tre, tse) = count_stats(&model, &train, &test)?;
        sv_row.push(sv.to_string());
        tre_row.push(tre.to_string());
        tse_row.push(tse.to_string());
        metrics.push(json!({
            "sigma": sigma,
            "sv_count": sv,
            "train_errors": tre,
            "test_errors": tse,
            "test_accuracy": 1.0 - tse as f64 / test.n().max(1) as f64,
        }));
    }

    let mut headers = vec![String::new()];
    headers.extend(args.sigmas.iter().map(|s| format!("sigma={s}")));
    let table = render_table(&headers, &[sv_row, tre_row, tse_row]);
    emit(
        &table,
        &RunReport {
            command: "sweep".into(),
            config: json!({
                "data": args.data.display().to_string(),
                "kernel": spec,
                "C": args.c,
                "sigmas": args.sigmas,
                "seed": args.seed,
                "train_fraction": args.train_fraction,
                "label_column": args.label_column,
                "train_rows": train.n(),
                "test_rows": test.n(),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics,
        },
    );
    Ok(())
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let start = Instant::now();
    let dataset = load_classification(&args.data, &args.label_column)?;
    let (train, test) = holdout_split(&dataset, args.train_fraction, args.seed)?;
    let train_labels = labels_of(&train).to_vec();
    let stats = class_distance_stats(&train)?;
    let (regime, subgrid) = recommend_sigma_range(&stats);

    let kernels: [(&str, KernelSpec); 4] = [
        ("K1", KernelSpec::Poly { p: args.p }),
        ("K2", KernelSpec::Gaussian { sigma: 1.0 }),
        ("K3", KernelSpec::Trig { sigma: 1.0 }),
        (
            "K4",
            KernelSpec::Mixed {
                sigma: 1.0,
                beta: args.beta,
            },
        ),
    ];

    let mut rows = Vec::new();
    let mut metrics = Vec::new();
    for (label, template) in kernels {
        let sigma_grid = if template.has_width() {
            subgrid.clone()
        } else {
            vec![1.0]
        };
        let grid = grid_search(
            &train,
            &template,
            &log2_grid(),
            &sigma_grid,
            args.folds,
            args.seed,
        )
        .with_context(|| format!("tuning {label}"))?;
        let best = grid.best_cell();
        let spec = template.with_width(best.sigma);
        let config = SolverConfig {
            c: best.c,
            seed: args.seed,
            ..SolverConfig::default()
        };
        let model = fit_svc(&train.features.view(), &train_labels, &spec, &config)
            .with_context(|| format!("fitting {label}"))?;
        let (sv, tre, tse) = count_stats(&model, &train, &test)?;
        let test_accuracy = 1.0 - tse as f64 / test.n().max(1) as f64;
        rows.push(vec![
            label.to_string(),
            template.family_name().to_string(),
            fmt(best.c),
            if template.has_width() {
                fmt(best.sigma)
            } else {
                "-".to_string()
            },
            fmt4(best.mean_cv_accuracy),
            fmt4(test_accuracy),
            sv.to_string(),
            tre.to_string(),
            tse.to_string(),
        ]);
        metrics.push(json!({
            "label": label,
            "kernel": spec,
            "best_c": best.c,
            "best_sigma": best.sigma,
            "cv_accuracy": best.mean_cv_accuracy,
            "test_accuracy": test_accuracy,
            "sv_count": sv,
            "train_errors": tre,
            "test_errors": tse,
        }));
    }

    let table = render_table(
        &[
            "", "kernel", "C", "sigma", "cv_acc", "test_acc", "#SV", "#TrE", "#TsE",
        ]
        .map(String::from),
        &rows,
    );
    emit(
        &table,
        &RunReport {
            command: "compare".into(),
            config: json!({
                "data": args.data.display().to_string(),
                "p": args.p,
                "beta": args.beta,
                "folds": args.folds,
                "seed": args.seed,
                "train_fraction": args.train_fraction,
                "label_column": args.label_column,
                "sigma_regime": regime.to_string(),
                "sigma_subgrid": subgrid,
                "train_rows": train.n(),
                "test_rows": test.n(),
            }),
            seed: args.seed,
            timing_ms: elapsed_ms(start),
            metrics,
        },
    );
    Ok(())
}
