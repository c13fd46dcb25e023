//! Additive models with total-variation-bounded step functions: fitting,
//! complexity estimation and generalization certificates.

pub mod bounds;
pub mod complexity;
pub mod data;
pub mod error;
pub mod loss;
pub mod model;
mod rng;
pub mod solver;
pub mod step;
pub mod tv;

pub use complexity::{estimate_complexity, theorem_bound, BoundInputs, ComplexityReport, NoiseKind};
pub use data::{Dataset, FeatureOrder};
pub use error::{GamError, Result};
pub use loss::{LossKind, LossSpec, Range};
pub use model::GamModel;
pub use solver::{fit, fit_oracle_l1, objective, FitConfig, FitReport, StepRule};
pub use step::{Extension, StepFunction};
