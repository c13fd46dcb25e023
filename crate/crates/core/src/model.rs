//! Additive predictors built from one step function per feature.

use crate::error::{GamError, Result};
use crate::step::{Extension, StepFunction};
use crate::tv::compact_total_variation;

/// `f(x) = intercept + sum_j f_j(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GamModel {
    weight_functions: Vec<StepFunction>,
    intercept: f64,
    budget_used: f64,
}

impl GamModel {
    pub fn new(weight_functions: Vec<StepFunction>, intercept: f64) -> Self {
        let budget_used = weight_functions.iter().map(compact_total_variation).sum();
        Self {
            weight_functions,
            intercept,
            budget_used,
        }
    }

    /// The zero predictor on `p` features.
    pub fn zero(p: usize) -> Self {
        Self::new(vec![StepFunction::zero(Extension::Compact); p], 0.0)
    }

    pub fn p(&self) -> usize {
        self.weight_functions.len()
    }

    pub fn weight_functions(&self) -> &[StepFunction] {
        &self.weight_functions
    }

    pub fn weight_function(&self, j: usize) -> &StepFunction {
        &self.weight_functions[j]
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// Sum of the compact-support total variations of the weight functions.
    pub fn budget_used(&self) -> f64 {
        self.budget_used
    }

    /// Same functions under a different extension mode.
    pub fn with_extension(&self, extension: Extension) -> Self {
        Self {
            weight_functions: self
                .weight_functions
                .iter()
                .map(|f| f.clone().with_extension(extension))
                .collect(),
            ..self.clone()
        }
    }

    /// Replaces the weight function of feature `j`.
    pub fn with_weight_function(&self, j: usize, f: StepFunction) -> Self {
        let mut fs = self.weight_functions.clone();
        fs[j] = f;
        Self::new(fs, self.intercept)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.p() {
            return Err(GamError::DimensionMismatch {
                what: "prediction input",
                expected: self.p(),
                got: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.weight_functions
            .iter()
            .zip(x)
            .fold(self.intercept, |acc, (f, &xj)| acc + f.evaluate(xj))
    }
}
