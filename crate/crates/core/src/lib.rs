//! Takagi-Sugeno-Kang fuzzy systems with two optimization paths: fuzzy
//! c-means clustering followed by closed-form ridge consequents, and
//! mini-batch gradient descent with uniform regularization, HTSK
//! normalization and DropRule.
//!
//! All numerics are generic over [`Scalar`], implemented for `f32`, `f64`
//! and [`DoubleDouble`] (used as a high-precision reference when checking
//! gradients). The `*64` and `*32` aliases name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fcm;
pub mod fixtures;
pub mod mbgd;
pub mod membership;
pub mod metrics;
pub mod model;
pub mod persist;
pub mod ridge;
pub mod scalar;

pub use error::{Result, TskError};
pub use fcm::{FcmConfig, FcmModel};
pub use mbgd::{LossKind, Optimizer, TrainConfig, TrainHistory};
pub use membership::{Antecedent, AntecedentKind, FlTransform, GaussianMf, Mode, TriangularMf};
pub use model::{Consequent, InputTransform, Targets, Task, TskModel};
pub use persist::{load_model, save_model};
pub use scalar::{DoubleDouble, Scalar};

pub type TskModel64 = TskModel<f64>;
pub type TskModel32 = TskModel<f32>;
pub type Antecedent64 = Antecedent<f64>;
pub type FcmModel64 = FcmModel<f64>;
pub type FcmConfig64 = FcmConfig<f64>;
pub type TrainConfig64 = TrainConfig<f64>;
pub type Targets64 = Targets<f64>;
