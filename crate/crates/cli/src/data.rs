//! CSV ingestion. Row numbers in messages count data rows from 1; column
//! numbers count file columns from 1.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ndarray::Array2;
use tsk_core::Task;

#[derive(Clone, Debug, PartialEq)]
pub enum TargetColumn {
    /// Class indices in first-appearance order of `names`.
    Labels {
        ids: Vec<usize>,
        names: Vec<String>,
    },
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub target: TargetColumn,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub task: Task,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }
}

/// Raw table: header plus string cells.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = rdr
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        bail!("empty file: {}", path.display());
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading row {}", i + 1))?;
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    Ok(Table { headers, rows })
}

pub fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| anyhow::anyhow!("cannot parse {cell:?} as a number at row {row}, column {col}"))?;
    if !v.is_finite() {
        bail!("non-finite value at row {row}, column {col}");
    }
    Ok(v)
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Numeric matrix of every column except `skip`.
    pub fn features(&self, skip: Option<usize>) -> Result<(Vec<String>, Array2<f64>)> {
        let cols: Vec<usize> = (0..self.headers.len()).filter(|&j| Some(j) != skip).collect();
        let names = cols.iter().map(|&j| self.headers[j].clone()).collect();
        let mut x = Array2::zeros((self.rows.len(), cols.len()));
        for (i, row) in self.rows.iter().enumerate() {
            for (k, &j) in cols.iter().enumerate() {
                x[[i, k]] = parse_cell(&row[j], i + 1, j + 1)?;
            }
        }
        Ok((names, x))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &str> {
        self.rows.iter().map(move |r| r[j].as_str())
    }
}

/// Label indices by first appearance.
pub fn map_labels<'a>(cells: impl Iterator<Item = &'a str>) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let ids = cells
        .map(|c| match names.iter().position(|n| n == c) {
            Some(k) => k,
            None => {
                names.push(c.to_owned());
                names.len() - 1
            }
        })
        .collect();
    (ids, names)
}

pub fn load_csv(path: &Path, target: &str, task: Task) -> Result<Dataset> {
    let table = read_table(path)?;
    let tj = table
        .column_index(target)
        .with_context(|| format!("missing target column {target:?} in {}", path.display()))?;
    let (feature_names, features) = table.features(Some(tj))?;
    if features.ncols() == 0 {
        bail!("no feature columns in {}", path.display());
    }
    let target_col = match task {
        Task::Classification => {
            let (ids, names) = map_labels(table.column(tj));
            TargetColumn::Labels { ids, names }
        }
        Task::Regression => TargetColumn::Values(
            table
                .column(tj)
                .enumerate()
                .map(|(i, c)| parse_cell(c, i + 1, tj + 1))
                .collect::<Result<_>>()?,
        ),
    };
    Ok(Dataset {
        features,
        target: target_col,
        feature_names,
        target_name: target.to_owned(),
        task,
    })
}
