//! Model files.
//!
//! A model is stored as one JSON document:
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "task": "classification" | "regression",
//!   "out_dim": K,
//!   "antecedent": { "kind": "gaussian", "n_rules": R, "n_dims": D, "htsk": false,
//!                   "centers": [[..D..] x R], "sigmas": [[..D..] x R] }
//!               | { "kind": "triangular", ..., "left": .., "peak": .., "right": .. }
//!               | { "kind": "fcm", ..., "centers": .., "fuzzifier": m },
//!   "fl_chain": [ {"kind": "rule_weights", "weights": [..R..]}
//!               | {"kind": "drop_rule", "p": p} | {"kind": "renormalize"} ],
//!   "input_tf": {"kind": "identity"} | {"kind": "standardize", "mean": [..], "std": [..]},
//!   "consequent": [[[..D+1..] x K] x R],
//!   "labels": ["class names", ...],        (optional)
//!   "target": "target column name"         (optional)
//! }
//! ```
//!
//! Reals are written with 17 significant digits. Unknown fields are rejected.

use std::fs;
use std::io;
use std::path::Path;

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Result, TskError};
use crate::fcm::FcmModel;
use crate::membership::{Antecedent, AntecedentKind, FlTransform, GaussianMf, TriangularMf};
use crate::model::{Consequent, InputTransform, Task, TskModel};
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: i64 = 1;

type Grid = Vec<Vec<f64>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    schema_version: i64,
    task: Task,
    out_dim: usize,
    antecedent: AntecedentDoc,
    fl_chain: Vec<TransformDoc>,
    input_tf: InputDoc,
    consequent: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum AntecedentDoc {
    Gaussian {
        n_rules: usize,
        n_dims: usize,
        htsk: bool,
        centers: Grid,
        sigmas: Grid,
    },
    Triangular {
        n_rules: usize,
        n_dims: usize,
        htsk: bool,
        left: Grid,
        peak: Grid,
        right: Grid,
    },
    Fcm {
        n_rules: usize,
        n_dims: usize,
        htsk: bool,
        centers: Grid,
        fuzzifier: f64,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TransformDoc {
    RuleWeights { weights: Vec<f64> },
    DropRule { p: f64 },
    Renormalize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum InputDoc {
    Identity,
    Standardize { mean: Vec<f64>, std: Vec<f64> },
}

fn grid_of<T: Scalar, U>(a: &Array2<U>, f: impl Fn(&U) -> T) -> Grid {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| f(v).as_f64()).collect())
        .collect()
}

fn vec_of<T: Scalar>(a: &Array1<T>) -> Vec<f64> {
    a.iter().map(|v| v.as_f64()).collect()
}

fn to_doc<T: Scalar>(model: &TskModel<T>) -> ModelDoc {
    let ant = &model.antecedent;
    let (n_rules, n_dims, htsk) = (ant.n_rules(), ant.n_dims(), ant.htsk);
    let antecedent = match &ant.kind {
        AntecedentKind::GaussianGrid(g) => AntecedentDoc::Gaussian {
            n_rules,
            n_dims,
            htsk,
            centers: grid_of(g, |m| m.center),
            sigmas: grid_of(g, |m| m.sigma),
        },
        AntecedentKind::TriangularGrid(g) => AntecedentDoc::Triangular {
            n_rules,
            n_dims,
            htsk,
            left: grid_of(g, |m| m.left),
            peak: grid_of(g, |m| m.peak),
            right: grid_of(g, |m| m.right),
        },
        AntecedentKind::FcmInverseDistance(m) => AntecedentDoc::Fcm {
            n_rules,
            n_dims,
            htsk,
            centers: grid_of(m.centers(), |&v| v),
            fuzzifier: m.fuzzifier().as_f64(),
        },
    };
    let fl_chain = model
        .fl_chain
        .iter()
        .map(|t| match t {
            FlTransform::RuleWeights(w) => TransformDoc::RuleWeights { weights: vec_of(w) },
            FlTransform::DropRule(p) => TransformDoc::DropRule { p: p.as_f64() },
            FlTransform::Renormalize => TransformDoc::Renormalize,
        })
        .collect();
    let input_tf = match &model.input_tf {
        InputTransform::Identity => InputDoc::Identity,
        InputTransform::Standardize { mean, std } => InputDoc::Standardize {
            mean: vec_of(mean),
            std: vec_of(std),
        },
    };
    let c = &model.consequent.coeffs;
    let (r, o, _) = c.dim();
    let consequent = (0..r)
        .map(|i| {
            (0..o)
                .map(|k| c.slice(ndarray::s![i, k, ..]).iter().map(|v| v.as_f64()).collect())
                .collect()
        })
        .collect();
    ModelDoc {
        schema_version: SCHEMA_VERSION,
        task: model.task,
        out_dim: model.out_dim(),
        antecedent,
        fl_chain,
        input_tf,
        consequent,
        labels: model.labels.clone(),
        target: model.target_name.clone(),
    }
}

fn field(name: &'static str) -> impl Fn(TskError) -> TskError {
    move |e| bad(name, e)
}

fn bad(field: &str, detail: impl std::fmt::Display) -> TskError {
    TskError::Format(format!("{field}: {detail}"))
}

fn scalar<T: Scalar>(field: &str, v: f64) -> Result<T> {
    if !v.is_finite() {
        return Err(bad(field, "value is not finite"));
    }
    T::from_f64(v).ok_or_else(|| bad(field, "value not representable"))
}

fn to_array2<T: Scalar>(field: &str, g: &Grid, rows: usize, cols: usize) -> Result<Array2<T>> {
    if g.len() != rows {
        return Err(bad(field, format!("expected {rows} rows, got {}", g.len())));
    }
    let mut out = Array2::zeros((rows, cols));
    for (i, row) in g.iter().enumerate() {
        if row.len() != cols {
            return Err(bad(
                &format!("{field}[{i}]"),
                format!("expected {cols} entries, got {}", row.len()),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            out[[i, j]] = scalar(&format!("{field}[{i}][{j}]"), v)?;
        }
    }
    Ok(out)
}

fn to_array1<T: Scalar>(field: &str, v: &[f64], len: usize) -> Result<Array1<T>> {
    if v.len() != len {
        return Err(bad(field, format!("expected {len} entries, got {}", v.len())));
    }
    v.iter()
        .enumerate()
        .map(|(i, &x)| scalar(&format!("{field}[{i}]"), x))
        .collect::<Result<Vec<T>>>()
        .map(Array1::from)
}

fn from_doc<T: Scalar>(doc: ModelDoc) -> Result<TskModel<T>> {
    let antecedent = match &doc.antecedent {
        AntecedentDoc::Gaussian {
            n_rules,
            n_dims,
            htsk,
            centers,
            sigmas,
        } => {
            let c = to_array2::<T>("antecedent.centers", centers, *n_rules, *n_dims)?;
            let s = to_array2::<T>("antecedent.sigmas", sigmas, *n_rules, *n_dims)?;
            let mut mfs = Vec::with_capacity(c.len());
            for (&cv, &sv) in c.iter().zip(s.iter()) {
                mfs.push(GaussianMf::new(cv, sv).map_err(field("antecedent.sigmas"))?);
            }
            let grid = Array2::from_shape_vec(c.dim(), mfs).expect("shape checked");
            Antecedent::new(AntecedentKind::GaussianGrid(grid), *htsk).map_err(field("antecedent"))?
        }
        AntecedentDoc::Triangular {
            n_rules,
            n_dims,
            htsk,
            left,
            peak,
            right,
        } => {
            let l = to_array2::<T>("antecedent.left", left, *n_rules, *n_dims)?;
            let p = to_array2::<T>("antecedent.peak", peak, *n_rules, *n_dims)?;
            let r = to_array2::<T>("antecedent.right", right, *n_rules, *n_dims)?;
            let mut mfs = Vec::with_capacity(l.len());
            for ((&a, &b), &c) in l.iter().zip(p.iter()).zip(r.iter()) {
                mfs.push(TriangularMf::new(a, b, c).map_err(field("antecedent.peak"))?);
            }
            let grid = Array2::from_shape_vec(l.dim(), mfs).expect("shape checked");
            Antecedent::new(AntecedentKind::TriangularGrid(grid), *htsk).map_err(field("antecedent"))?
        }
        AntecedentDoc::Fcm {
            n_rules,
            n_dims,
            htsk,
            centers,
            fuzzifier,
        } => {
            let c = to_array2::<T>("antecedent.centers", centers, *n_rules, *n_dims)?;
            let m =
                FcmModel::new(c, scalar("antecedent.fuzzifier", *fuzzifier)?).map_err(field("antecedent.fuzzifier"))?;
            Antecedent::new(AntecedentKind::FcmInverseDistance(m), *htsk).map_err(field("antecedent"))?
        }
    };
    let (r, d) = (antecedent.n_rules(), antecedent.n_dims());

    let mut fl_chain = Vec::with_capacity(doc.fl_chain.len());
    for (i, t) in doc.fl_chain.iter().enumerate() {
        let name = format!("fl_chain[{i}]");
        fl_chain.push(match t {
            TransformDoc::RuleWeights { weights } => {
                FlTransform::rule_weights(to_array1(&format!("{name}.weights"), weights, r)?)
                    .map_err(|e| bad(&name, e))?
            }
            TransformDoc::DropRule { p } => FlTransform::drop_rule(scalar(&name, *p)?).map_err(|e| bad(&name, e))?,
            TransformDoc::Renormalize => FlTransform::Renormalize,
        });
    }

    let input_tf = match &doc.input_tf {
        InputDoc::Identity => InputTransform::Identity,
        InputDoc::Standardize { mean, std } => {
            InputTransform::standardize(to_array1("input_tf.mean", mean, d)?, to_array1("input_tf.std", std, d)?)
                .map_err(field("input_tf"))?
        }
    };

    let o = doc.out_dim;
    if doc.consequent.len() != r {
        return Err(bad(
            "consequent",
            format!("expected {r} rules, got {}", doc.consequent.len()),
        ));
    }
    let mut coeffs = Array3::zeros((r, o, d + 1));
    for (i, rule) in doc.consequent.iter().enumerate() {
        if rule.len() != o {
            return Err(bad(
                &format!("consequent[{i}]"),
                format!("expected {o} outputs, got {}", rule.len()),
            ));
        }
        for (k, row) in rule.iter().enumerate() {
            if row.len() != d + 1 {
                return Err(bad(
                    &format!("consequent[{i}][{k}]"),
                    format!("expected {} coefficients, got {}", d + 1, row.len()),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                coeffs[[i, k, j]] = scalar(&format!("consequent[{i}][{k}][{j}]"), v)?;
            }
        }
    }
    let consequent = Consequent::new(coeffs).map_err(field("consequent"))?;
    if let Some(labels) = &doc.labels {
        if labels.len() != o {
            return Err(bad("labels", format!("expected {o} labels, got {}", labels.len())));
        }
    }
    let mut model = TskModel::new(antecedent, fl_chain, input_tf, consequent, doc.task).map_err(field("model"))?;
    model.labels = doc.labels;
    model.target_name = doc.target;
    Ok(model)
}

/// Pretty JSON with every real printed to 17 significant digits.
struct FullPrecision(PrettyFormatter<'static>);

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

impl<T: Scalar> TskModel<T> {
    /// Same model in another scalar type; values pass through `f64`.
    pub fn cast<U: Scalar>(&self) -> Result<TskModel<U>> {
        from_doc(to_doc(self))
    }
}

pub fn to_json_string<T: Scalar>(model: &TskModel<T>) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    to_doc(model).serialize(&mut ser).expect("model document serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn from_json_str<T: Scalar>(text: &str) -> Result<TskModel<T>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TskError::Format(e.to_string()))?;
    match value.get("schema_version") {
        None => return Err(bad("schema_version", "missing")),
        Some(v) => match v.as_i64() {
            Some(SCHEMA_VERSION) => {}
            Some(other) => return Err(TskError::UnsupportedSchema(other)),
            None => return Err(bad("schema_version", "not an integer")),
        },
    }
    let doc: ModelDoc = serde_json::from_value(value).map_err(|e| TskError::Format(e.to_string()))?;
    from_doc(doc)
}

pub fn save_model<T: Scalar>(model: &TskModel<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(model))?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<TskModel<T>> {
    from_json_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "task": "regression",
        "out_dim": 1,
        "antecedent": {"kind": "gaussian", "n_rules": 1, "n_dims": 1, "htsk": false,
                       "centers": [[0.0]], "sigmas": [[1.0]]},
        "fl_chain": [],
        "input_tf": {"kind": "identity"},
        "consequent": [[[0.5, -2.0]]]
    }"#;

    #[test]
    fn hand_written_minimal_model() {
        let m: TskModel<f64> = from_json_str(MINIMAL).unwrap();
        for x in [-1.0, 0.0, 3.5] {
            assert_eq!(m.forward_eval(array![x].view()).unwrap()[0], 0.5 - 2.0 * x);
        }
    }

    #[test]
    fn rejects_future_schema() {
        let text = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 999");
        let err = from_json_str::<f64>(&text).unwrap_err();
        assert!(err.to_string().contains("unsupported schema"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = MINIMAL.replace("\"out_dim\": 1,", "\"out_dim\": 1, \"extra\": true,");
        let err = from_json_str::<f64>(&text).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
        let text = MINIMAL.replace("\"htsk\": false,", "\"htsk\": false, \"bogus\": 1,");
        let err = from_json_str::<f64>(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn shape_errors_name_the_field() {
        let text = MINIMAL.replace("[[[0.5, -2.0]]]", "[[[0.5]]]");
        let err = from_json_str::<f64>(&text).unwrap_err();
        assert!(err.to_string().contains("consequent[0][0]"), "{err}");
        let text = MINIMAL.replace("\"sigmas\": [[1.0]]", "\"sigmas\": [[1.0], [2.0]]");
        let err = from_json_str::<f64>(&text).unwrap_err();
        assert!(err.to_string().contains("antecedent.sigmas"), "{err}");
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let m: TskModel<f64> = from_json_str(MINIMAL).unwrap();
        let text = to_json_string(&m);
        assert!(text.contains("5.0000000000000000e-1"), "{text}");
        let back: TskModel<f64> = from_json_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn f32_models_round_trip() {
        let m: TskModel<f32> = from_json_str(MINIMAL).unwrap();
        let back: TskModel<f32> = from_json_str(&to_json_string(&m)).unwrap();
        assert_eq!(back, m);
    }
}
