#![allow(dead_code)]

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::Array2;
use tsk_core::fixtures;

pub fn write_csv<T: Display>(path: &Path, x: &Array2<f64>, target: &[T]) {
    let mut text = String::new();
    let names: Vec<String> = (0..x.ncols()).map(|j| format!("x{j}")).collect();
    text.push_str(&names.join(","));
    text.push_str(",y\n");
    for (row, t) in x.rows().into_iter().zip(target) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("{},{t}\n", cells.join(",")));
    }
    std::fs::write(path, text).unwrap();
}

pub fn two_blobs_csv(dir: &Path) -> PathBuf {
    let (x, y) = fixtures::two_blobs(0);
    let labels: Vec<&str> = y.iter().map(|&l| if l == 0 { "low" } else { "high" }).collect();
    let path = dir.join("two_blobs.csv");
    write_csv(&path, &x, &labels);
    path
}

pub fn xor_csv(dir: &Path) -> PathBuf {
    let (x, y) = fixtures::xor(7);
    let path = dir.join("xor.csv");
    write_csv(&path, &x, &y);
    path
}

pub fn linear_csv(dir: &Path) -> PathBuf {
    let (x, y) = fixtures::linear_1d(3, 100);
    let path = dir.join("linear.csv");
    write_csv(&path, &x, &y);
    path
}

pub fn tsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsk"))
        .args(args)
        .output()
        .expect("spawn tsk")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Value of `key=...` in a whitespace-separated summary line.
pub fn field(line: &str, key: &str) -> Option<f64> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
