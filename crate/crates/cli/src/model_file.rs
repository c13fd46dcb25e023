//! JSON persistence of fitted models.
//!
//! Numbers are written in shortest round-trip decimal form, so a canonical
//! document re-serializes to identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tvgam::{Extension, GamModel, LossKind, StepFunction};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitMetadata {
    pub lambda: f64,
    pub loss: LossKind,
    pub seed: u64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub solver: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub p: usize,
    pub intercept: f64,
    pub extension_mode: Extension,
    pub budget_used: f64,
    pub feature_names: Vec<String>,
    pub fit: FitMetadata,
    /// Per feature, `[knot, value]` pairs with strictly increasing knots.
    pub weight_functions: Vec<Vec<[f64; 2]>>,
}

impl ModelFile {
    pub fn from_model(model: &GamModel, feature_names: Vec<String>, fit: FitMetadata) -> Self {
        let extension_mode = model
            .weight_functions()
            .first()
            .map_or(Extension::Compact, StepFunction::extension);
        Self {
            format_version: FORMAT_VERSION,
            p: model.p(),
            intercept: model.intercept(),
            extension_mode,
            budget_used: model.budget_used(),
            feature_names,
            fit,
            weight_functions: model
                .weight_functions()
                .iter()
                .map(|f| f.knots().iter().zip(f.values()).map(|(&k, &v)| [k, v]).collect())
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<GamModel, CliError> {
        let fs = self
            .weight_functions
            .iter()
            .enumerate()
            .map(|(j, pairs)| {
                let (knots, values) = pairs.iter().map(|&[k, v]| (k, v)).unzip();
                StepFunction::new(knots, values, self.extension_mode)
                    .map_err(|e| CliError::Data(format!("weight function {j}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GamModel::new(fs, self.intercept))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| CliError::Data(format!("model file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Data(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        if self.weight_functions.len() != self.p || self.feature_names.len() != self.p {
            return Err(CliError::Data(format!(
                "model declares p = {} but lists {} weight functions and {} feature names",
                self.p,
                self.weight_functions.len(),
                self.feature_names.len()
            )));
        }
        self.to_model().map(|_| ())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }
}
