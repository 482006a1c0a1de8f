mod common;

use common::*;
use tsk_core::{load_model, TskModel64};

fn fit(args: &[&str]) -> std::process::Output {
    let mut all = vec!["fit"];
    all.extend_from_slice(args);
    tsk(&all)
}

#[test]
fn fcm_ridge_fit_predict_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = two_blobs_csv(dir.path());
    let model = dir.path().join("m.json");
    let out = fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "cls",
        "--rules",
        "2",
        "--model",
        path_str(&model),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out);
    assert!(line.starts_with("method=fcm-ridge rules=2 "), "{line}");
    let acc = field(&line, "accuracy").unwrap();
    assert!(acc >= 0.98);
    assert!(stderr(&out).contains("elapsed"));

    let eval = tsk(&["eval", "--model", path_str(&model), "--data", path_str(&data)]);
    assert!(eval.status.success());
    assert_eq!(field(&stdout(&eval), "accuracy"), Some(acc));

    let preds = dir.path().join("p.csv");
    let p = tsk(&[
        "predict",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
        "--out",
        path_str(&preds),
    ]);
    assert!(p.status.success(), "{}", stderr(&p));
    let text = std::fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y"));
    let written: Vec<&str> = lines.collect();
    assert_eq!(written.len(), 100);

    // API equivalence
    let loaded: TskModel64 = load_model(&model).unwrap();
    let (x, _) = tsk_core::fixtures::two_blobs(0);
    let names = loaded.labels.clone().unwrap();
    let api: Vec<&str> = loaded
        .predict_classes(x.view())
        .unwrap()
        .into_iter()
        .map(|k| names[k].as_str())
        .collect();
    assert_eq!(written, api);
}

#[test]
fn predict_to_stdout_without_target_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = linear_csv(dir.path());
    let model = dir.path().join("m.json");
    assert!(fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "reg",
        "--rules",
        "1",
        "--model",
        path_str(&model)
    ])
    .status
    .success());
    let bare = dir.path().join("bare.csv");
    std::fs::write(&bare, "x0\n0.5\n-1\n").unwrap();
    let p = tsk(&["predict", "--model", path_str(&model), "--data", path_str(&bare)]);
    assert!(p.status.success(), "{}", stderr(&p));
    let vals: Vec<f64> = stdout(&p).lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(vals.len(), 2);
    assert!(
        (vals[0] - -0.5).abs() < 1e-6 && (vals[1] - -5.0).abs() < 1e-6,
        "{vals:?}"
    );
}

#[test]
fn feature_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let data = two_blobs_csv(dir.path());
    let model = dir.path().join("m.json");
    assert!(fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "cls",
        "--model",
        path_str(&model)
    ])
    .status
    .success());
    let wide = dir.path().join("wide.csv");
    std::fs::write(&wide, "a,b,c\n1,2,3\n").unwrap();
    let p = tsk(&["predict", "--model", path_str(&model), "--data", path_str(&wide)]);
    assert!(!p.status.success());
    assert!(stderr(&p).contains("expected 2 features"), "{}", stderr(&p));
}

#[test]
fn too_many_rules() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.csv");
    std::fs::write(&data, "a,y\n0,p\n1,q\n2,p\n").unwrap();
    let model = dir.path().join("m.json");
    for method in ["fcm-ridge", "mbgd"] {
        let out = fit(&[
            "--data",
            path_str(&data),
            "--target",
            "y",
            "--task",
            "cls",
            "--rules",
            "5",
            "--method",
            method,
            "--model",
            path_str(&model),
        ]);
        assert!(!out.status.success());
        assert!(stderr(&out).contains("N < R"), "{method}: {}", stderr(&out));
    }
    assert!(!model.exists());
}

#[test]
fn bad_inputs_are_diagnosed() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("nan.csv");
    std::fs::write(&data, "a,y\n0,1\nNaN,2\n").unwrap();
    let model = dir.path().join("m.json");
    let out = fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "reg",
        "--model",
        path_str(&model),
    ]);
    assert!(
        stderr(&out).contains("non-finite value at row 2, column 1"),
        "{}",
        stderr(&out)
    );
    let out = fit(&[
        "--data",
        path_str(&data),
        "--target",
        "z",
        "--task",
        "reg",
        "--model",
        path_str(&model),
    ]);
    assert!(stderr(&out).contains("missing target column"));
    let out = fit(&["--data", path_str(&data), "--target", "y", "--model", path_str(&model)]);
    assert!(stderr(&out).contains("missing setting: task"));
    let out = fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "reg",
        "--method",
        "mbgd",
        "--epochs",
        "0",
        "--model",
        path_str(&model),
    ]);
    assert!(stderr(&out).contains("epochs"));
    let out = tsk(&["fit", "--bogus"]);
    assert!(!out.status.success());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let data = xor_csv(dir.path());
    let model = dir.path().join("m.json");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "method = \"mbgd\"\ndata = {:?}\ntarget = \"y\"\ntask = \"cls\"\nn_rules = 4\nepochs = 5\nmodel = {:?}\n",
            path_str(&data),
            path_str(&model)
        ),
    )
    .unwrap();
    let out = fit(&["--config", path_str(&cfg), "--rules", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("method=mbgd rules=3 "));
    std::fs::write(&cfg, "rules = 3\n").unwrap();
    let out = fit(&["--config", path_str(&cfg)]);
    assert!(!out.status.success());
}

#[test]
fn eval_metrics_match_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ten.csv");
    let rows = [
        (0.0, 1.0),
        (1.0, 2.5),
        (2.0, 2.9),
        (3.0, 4.2),
        (4.0, 5.1),
        (5.0, 5.8),
        (6.0, 7.4),
        (7.0, 7.9),
        (8.0, 9.3),
        (9.0, 9.8),
    ];
    let mut text = String::from("a,y\n");
    for (a, y) in rows {
        text.push_str(&format!("{a},{y}\n"));
    }
    std::fs::write(&data, text).unwrap();
    let model = dir.path().join("m.json");
    assert!(fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "reg",
        "--rules",
        "2",
        "--alpha",
        "0.5",
        "--model",
        path_str(&model)
    ])
    .status
    .success());
    let p = tsk(&["predict", "--model", path_str(&model), "--data", path_str(&data)]);
    let pred: Vec<f64> = stdout(&p).lines().skip(1).map(|l| l.parse().unwrap()).collect();
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let sse: f64 = rows.iter().zip(&pred).map(|(r, p)| (r.1 - p) * (r.1 - p)).sum();
    let sst: f64 = rows.iter().map(|r| (r.1 - mean) * (r.1 - mean)).sum();
    let expect = format!("rmse={:.6} r2={:.6}\n", (sse / n).sqrt(), 1.0 - sse / sst);
    let e = tsk(&["eval", "--model", path_str(&model), "--data", path_str(&data)]);
    assert_eq!(stdout(&e), expect);
}

#[test]
fn eval_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let data = two_blobs_csv(dir.path());
    let model = dir.path().join("m.json");
    assert!(fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "cls",
        "--model",
        path_str(&model)
    ])
    .status
    .success());
    let e = tsk(&["eval", "--model", path_str(&model), "--data", path_str(&data)]);
    assert_eq!(stdout(&e), "accuracy=1.000000\n");

    // zero learning rate leaves the all-zero consequent: a constant predictor
    let lin = linear_csv(dir.path());
    let flat = dir.path().join("flat.json");
    let out = fit(&[
        "--data",
        path_str(&lin),
        "--target",
        "y",
        "--task",
        "reg",
        "--method",
        "mbgd",
        "--epochs",
        "1",
        "--lr",
        "0",
        "--model",
        path_str(&flat),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let e = tsk(&["eval", "--model", path_str(&flat), "--data", path_str(&lin)]);
    let r2 = field(&stdout(&e), "r2").unwrap();
    assert!(r2 <= 0.0, "{r2}");
}

#[test]
fn fit_metric_reproduced_by_eval_for_mbgd() {
    let dir = tempfile::tempdir().unwrap();
    let data = xor_csv(dir.path());
    let model = dir.path().join("m.json");
    let out = fit(&[
        "--data",
        path_str(&data),
        "--target",
        "y",
        "--task",
        "cls",
        "--method",
        "mbgd",
        "--rules",
        "4",
        "--epochs",
        "30",
        "--htsk",
        "--ur",
        "0.1",
        "--droprule",
        "0.1",
        "--model",
        path_str(&model),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let e = tsk(&["eval", "--model", path_str(&model), "--data", path_str(&data)]);
    assert_eq!(field(&stdout(&out), "accuracy"), field(&stdout(&e), "accuracy"));
}

#[test]
fn gradcheck_is_deterministic() {
    let a = tsk(&["gradcheck", "--seed", "3"]);
    let b = tsk(&["gradcheck", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 113);
    assert!(lines[112].starts_with("112 configurations, max_rel_err="));
}
