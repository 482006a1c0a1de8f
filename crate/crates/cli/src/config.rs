//! `fit` settings: a flat TOML file whose keys are the [`Settings`] field
//! names, overridden by command-line flags and validated as a whole.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;
use tsk_core::{FcmConfig, LossKind, Optimizer, Task, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FcmRidge,
    Mbgd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FcmRidge => "fcm-ridge",
            Method::Mbgd => "mbgd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    #[serde(alias = "classification")]
    Cls,
    #[serde(alias = "regression")]
    Reg,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Cls => Task::Classification,
            TaskArg::Reg => Task::Regression,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

/// Every `fit` setting, as read from flags or from the config file.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Training CSV
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Target column name
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Number of rules
    #[arg(long = "rules")]
    pub n_rules: Option<usize>,
    /// Ridge penalty (fcm-ridge)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// FCM fuzzifier m
    #[arg(long)]
    pub fuzzifier: Option<f64>,
    #[arg(long)]
    pub fcm_tol: Option<f64>,
    #[arg(long)]
    pub fcm_max_iter: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    /// SGD momentum
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Uniform-regularization weight
    #[arg(long = "ur")]
    pub ur_weight: Option<f64>,
    /// DropRule probability
    #[arg(long = "droprule")]
    pub droprule_p: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Validation fraction for early stopping
    #[arg(long = "val-frac")]
    pub val_fraction: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Train membership-function parameters (mbgd)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub train_antecedent: Option<bool>,
    /// HTSK normalization (mbgd)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub htsk: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output model file
    #[arg(long)]
    pub model: Option<PathBuf>,
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set here win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            data: self.data.or(base.data),
            target: self.target.or(base.target),
            task: self.task.or(base.task),
            method: self.method.or(base.method),
            n_rules: self.n_rules.or(base.n_rules),
            alpha: self.alpha.or(base.alpha),
            fuzzifier: self.fuzzifier.or(base.fuzzifier),
            fcm_tol: self.fcm_tol.or(base.fcm_tol),
            fcm_max_iter: self.fcm_max_iter.or(base.fcm_max_iter),
            epochs: self.epochs.or(base.epochs),
            batch_size: self.batch_size.or(base.batch_size),
            lr: self.lr.or(base.lr),
            optimizer: self.optimizer.or(base.optimizer),
            momentum: self.momentum.or(base.momentum),
            ur_weight: self.ur_weight.or(base.ur_weight),
            droprule_p: self.droprule_p.or(base.droprule_p),
            weight_decay: self.weight_decay.or(base.weight_decay),
            val_fraction: self.val_fraction.or(base.val_fraction),
            patience: self.patience.or(base.patience),
            train_antecedent: self.train_antecedent.or(base.train_antecedent),
            htsk: self.htsk.or(base.htsk),
            seed: self.seed.or(base.seed),
            model: self.model.or(base.model),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MethodConfig {
    FcmRidge { fcm: FcmConfig<f64>, alpha: f64 },
    Mbgd { train: TrainConfig<f64>, htsk: bool },
}

/// A fully resolved and validated `fit` run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    pub target: String,
    pub task: Task,
    pub n_rules: usize,
    pub seed: u64,
    pub model: PathBuf,
    pub method: MethodConfig,
}

impl RunConfig {
    pub fn method_name(&self) -> &'static str {
        match self.method {
            MethodConfig::FcmRidge { .. } => Method::FcmRidge.name(),
            MethodConfig::Mbgd { .. } => Method::Mbgd.name(),
        }
    }

    pub fn resolve(s: Settings) -> Result<Self> {
        let data = s.data.context("missing setting: data")?;
        let target = s.target.context("missing setting: target")?;
        let task: Task = s.task.context("missing setting: task")?.into();
        let model = s.model.context("missing setting: model")?;
        let n_rules = s.n_rules.unwrap_or(2);
        if n_rules == 0 {
            bail!("rules must be at least 1");
        }
        let seed = s.seed.unwrap_or(0);

        let method = match s.method.unwrap_or(Method::FcmRidge) {
            Method::FcmRidge => {
                let mut fcm = FcmConfig::new(n_rules, seed);
                if let Some(m) = s.fuzzifier {
                    fcm.fuzzifier = m;
                }
                if let Some(tol) = s.fcm_tol {
                    fcm.tol = tol;
                }
                if let Some(it) = s.fcm_max_iter {
                    fcm.max_iter = it;
                }
                fcm.validate()?;
                let alpha = s.alpha.unwrap_or(0.0);
                if !(alpha.is_finite() && alpha >= 0.0) {
                    bail!("alpha must be finite and >= 0, got {alpha}");
                }
                MethodConfig::FcmRidge { fcm, alpha }
            }
            Method::Mbgd => {
                let lr = s.lr.unwrap_or(0.01);
                let optimizer = match s.optimizer.unwrap_or(OptimizerArg::Adam) {
                    OptimizerArg::Adam => Optimizer::adam(lr),
                    OptimizerArg::Sgd => Optimizer::sgd(lr, s.momentum.unwrap_or(0.9)),
                };
                let loss = match task {
                    Task::Classification => LossKind::SoftmaxCrossEntropy,
                    Task::Regression => LossKind::Mse,
                };
                let mut train = TrainConfig::new(s.epochs.unwrap_or(100), optimizer, loss)?;
                train.batch_size = s.batch_size.unwrap_or(64);
                train.ur_weight = s.ur_weight.unwrap_or(0.0);
                train.droprule_p = s.droprule_p.unwrap_or(0.0);
                train.weight_decay = s.weight_decay.unwrap_or(0.0);
                train.val_fraction = s.val_fraction.unwrap_or(0.0);
                train.patience = s.patience.unwrap_or(0);
                train.train_antecedent = s.train_antecedent.unwrap_or(true);
                train.seed = seed;
                train.validate()?;
                MethodConfig::Mbgd {
                    train,
                    htsk: s.htsk.unwrap_or(false),
                }
            }
        };
        Ok(RunConfig {
            data,
            target,
            task,
            n_rules,
            seed,
            model,
            method,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Settings {
        Settings {
            data: Some("d.csv".into()),
            target: Some("y".into()),
            task: Some(TaskArg::Cls),
            model: Some("m.json".into()),
            ..Settings::default()
        }
    }

    #[test]
    fn defaults_to_fcm_ridge() {
        let cfg = RunConfig::resolve(base()).unwrap();
        assert_eq!(cfg.n_rules, 2);
        assert!(matches!(cfg.method, MethodConfig::FcmRidge { alpha, .. } if alpha == 0.0));
    }

    #[test]
    fn flags_override_file() {
        let file: Settings = toml::from_str("method = \"mbgd\"\nn_rules = 5\nlr = 0.5\nhtsk = true\n").unwrap();
        let flags = Settings {
            n_rules: Some(3),
            ..base()
        };
        let cfg = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!(cfg.n_rules, 3);
        let MethodConfig::Mbgd { train, htsk } = cfg.method else {
            panic!()
        };
        assert!(htsk);
        assert_eq!(train.optimizer.lr(), 0.5);
        assert_eq!(train.loss, LossKind::SoftmaxCrossEntropy);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<Settings>("rules = 3\n").is_err());
        let bad = |s: Settings| RunConfig::resolve(s.over(base())).is_err();
        assert!(bad(Settings {
            alpha: Some(-1.0),
            ..Default::default()
        }));
        assert!(bad(Settings {
            fuzzifier: Some(1.0),
            ..Default::default()
        }));
        assert!(bad(Settings {
            n_rules: Some(0),
            ..Default::default()
        }));
        let mbgd = |s: Settings| Settings {
            method: Some(Method::Mbgd),
            ..s
        };
        assert!(bad(mbgd(Settings {
            epochs: Some(0),
            ..Default::default()
        })));
        assert!(bad(mbgd(Settings {
            droprule_p: Some(1.0),
            ..Default::default()
        })));
        assert!(bad(mbgd(Settings {
            val_fraction: Some(-0.1),
            ..Default::default()
        })));
        assert!(RunConfig::resolve(Settings { task: None, ..base() }).is_err());
    }
}
