use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ndarray::{Array2, ArrayView2};
use tsk_core::fcm::fit_fcm_pipeline;
use tsk_core::mbgd::{gradcheck_suite, init_mbgd_model, train};
use tsk_core::metrics::{r_squared, rmse};
use tsk_core::{load_model, save_model, Targets, Task, TskModel64};

use crate::config::{MethodConfig, RunConfig};
use crate::data::{load_csv, read_table, Dataset, TargetColumn};

/// Largest finite-difference disagreement `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;
/// Random models per grid point in `gradcheck`.
pub const GRADCHECK_PER_COMBO: usize = 7;

fn targets_of(data: &Dataset) -> Result<Targets<f64>> {
    Ok(match &data.target {
        TargetColumn::Labels { ids, names } => {
            if names.len() < 2 {
                bail!("classification needs at least two classes, found {}", names.len());
            }
            Targets::labels(ids.clone(), names.len())?
        }
        TargetColumn::Values(y) => Targets::values(y),
    })
}

/// Training-set metric line shared by `fit` and `eval`.
fn metric_line(model: &TskModel64, x: ArrayView2<'_, f64>, truth: &Truth) -> Result<String> {
    Ok(match truth {
        Truth::Labels(ids) => {
            let pred: Vec<Option<usize>> = model.predict_classes(x)?.into_iter().map(Some).collect();
            let hits = pred.iter().zip(ids).filter(|(p, t)| p == t).count();
            format!("accuracy={:.6}", hits as f64 / ids.len() as f64)
        }
        Truth::Values(y) => {
            let pred = single_output(model, x)?;
            let p = Array2::from_shape_vec((pred.len(), 1), pred.clone()).expect("column");
            let t = Array2::from_shape_vec((y.len(), 1), y.clone()).expect("column");
            format!("rmse={:.6} r2={:.6}", rmse(p.view(), t.view()), r_squared(&pred, y))
        }
    })
}

/// Ground truth in model space; labels the model has never seen are `None`.
enum Truth {
    Labels(Vec<Option<usize>>),
    Values(Vec<f64>),
}

fn single_output(model: &TskModel64, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if model.out_dim() != 1 {
        bail!(
            "expected a single-output regression model, found {} outputs",
            model.out_dim()
        );
    }
    Ok(model.forward_batch_eval(x)?.column(0).to_vec())
}

fn label_names(model: &TskModel64) -> Vec<String> {
    model
        .labels
        .clone()
        .unwrap_or_else(|| (0..model.out_dim()).map(|k| k.to_string()).collect())
}

pub fn cmd_fit(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let data = load_csv(&cfg.data, &cfg.target, cfg.task)?;
    let targets = targets_of(&data)?;
    let x = data.features.view();
    let mut model = match &cfg.method {
        MethodConfig::FcmRidge { fcm, alpha } => fit_fcm_pipeline(x, &targets, fcm, *alpha)?,
        MethodConfig::Mbgd { train: tc, htsk } => {
            let mut model = init_mbgd_model(x, &targets, cfg.n_rules, *htsk, cfg.seed)?;
            train(&mut model, x, &targets, tc)?;
            model
        }
    };
    if let TargetColumn::Labels { names, .. } = &data.target {
        model.labels = Some(names.clone());
    }
    model.target_name = Some(data.target_name.clone());
    save_model(&model, &cfg.model).with_context(|| format!("writing {}", cfg.model.display()))?;

    let truth = match &data.target {
        TargetColumn::Labels { ids, .. } => Truth::Labels(ids.iter().map(|&i| Some(i)).collect()),
        TargetColumn::Values(y) => Truth::Values(y.clone()),
    };
    let line = metric_line(&model, x, &truth)?;
    writeln!(out, "method={} rules={} {line}", cfg.method_name(), model.n_rules())?;
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    Ok(())
}

/// Loads a model and the feature columns of `data`, dropping the target
/// column when present.
fn model_and_features(
    model_path: &Path,
    data_path: &Path,
    target: Option<&str>,
) -> Result<(TskModel64, crate::data::Table, Option<usize>, Array2<f64>)> {
    let model: TskModel64 = load_model(model_path).with_context(|| format!("loading {}", model_path.display()))?;
    let table = read_table(data_path)?;
    let name = target.map(str::to_owned).or_else(|| model.target_name.clone());
    let tj = name.as_deref().and_then(|n| table.column_index(n));
    let (_, x) = table.features(tj)?;
    if x.ncols() != model.n_dims() {
        bail!("expected {} features, got {}", model.n_dims(), x.ncols());
    }
    Ok((model, table, tj, x))
}

pub fn cmd_predict(model_path: &Path, data_path: &Path, target: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let (model, _, _, x) = model_and_features(model_path, data_path, target)?;
    let header = model.target_name.clone().unwrap_or_else(|| "prediction".into());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([header])?;
    match model.task() {
        Task::Classification => {
            let names = label_names(&model);
            for k in model.predict_classes(x.view())? {
                w.write_record([&names[k]])?;
            }
        }
        Task::Regression => {
            for v in single_output(&model, x.view())? {
                w.write_record([v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_eval(model_path: &Path, data_path: &Path, target: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let (model, table, tj, x) = model_and_features(model_path, data_path, target)?;
    let tj = tj.context("missing target column in evaluation data")?;
    let truth = match model.task() {
        Task::Classification => {
            let names = label_names(&model);
            Truth::Labels(table.column(tj).map(|c| names.iter().position(|n| n == c)).collect())
        }
        Task::Regression => Truth::Values(
            table
                .column(tj)
                .enumerate()
                .map(|(i, c)| crate::data::parse_cell(c, i + 1, tj + 1))
                .collect::<Result<_>>()?,
        ),
    };
    writeln!(out, "{}", metric_line(&model, x.view(), &truth)?)?;
    Ok(())
}

/// Prints one line per random configuration and a summary; returns whether
/// every configuration stayed under [`GRADCHECK_TOLERANCE`].
pub fn cmd_gradcheck(seed: u64, out: &mut dyn Write) -> Result<bool> {
    let cases = gradcheck_suite(seed, GRADCHECK_PER_COMBO, 1e-6)?;
    for case in &cases {
        writeln!(out, "{case}")?;
    }
    let worst = cases.iter().map(|c| c.max_rel_error).fold(0.0, f64::max);
    let pass = worst < GRADCHECK_TOLERANCE;
    writeln!(
        out,
        "{} configurations, max_rel_err={worst:.3e} ({})",
        cases.len(),
        if pass { "ok" } else { "FAILED" }
    )?;
    Ok(pass)
}
