//! Piecewise-constant univariate weight functions.

use serde::{Deserialize, Serialize};

use crate::error::{GamError, Result};

/// How a step function behaves outside its knot range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// Zero before the first knot and zero right after the last knot. This is
    /// the compactly supported function whose total variation includes the
    /// jumps from and back to zero.
    #[default]
    Compact,
    /// Holds the first value to the left and the last value to the right.
    Clamp,
}

impl std::str::FromStr for Extension {
    type Err = GamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(Self::Compact),
            "clamp" => Ok(Self::Clamp),
            other => Err(GamError::InvalidParameter(format!(
                "unknown extension mode '{other}' (expected compact or clamp)"
            ))),
        }
    }
}

impl std::fmt::Display for Extension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Compact => "compact",
            Self::Clamp => "clamp",
        })
    }
}

/// Right-continuous step function: `f(x) = values[t]` on `[knots[t], knots[t+1])`.
///
/// At and after the last knot the function equals the last value at `knots[n-1]`
/// itself; beyond it the value depends on the [`Extension`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    extension: Extension,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, extension: Extension) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(GamError::DimensionMismatch {
                what: "step function values",
                expected: knots.len(),
                got: values.len(),
            });
        }
        for (t, k) in knots.iter().enumerate() {
            if !k.is_finite() || (t > 0 && knots[t - 1] >= *k) {
                return Err(GamError::InvalidKnots { index: t });
            }
        }
        if let Some(t) = values.iter().position(|v| !v.is_finite()) {
            return Err(GamError::InvalidParameter(format!(
                "step value {t} is not finite"
            )));
        }
        Ok(Self {
            knots,
            values,
            extension,
        })
    }

    /// The identically zero function.
    pub fn zero(extension: Extension) -> Self {
        Self {
            knots: Vec::new(),
            values: Vec::new(),
            extension,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if n == 0 {
            return 0.0;
        }
        // number of knots <= x
        let t = self.knots.partition_point(|&k| k <= x);
        if t == 0 {
            return match self.extension {
                Extension::Compact => 0.0,
                Extension::Clamp => self.values[0],
            };
        }
        if t == n && x > self.knots[n - 1] && self.extension == Extension::Compact {
            return 0.0;
        }
        self.values[t - 1]
    }

    /// Drops interior knots that do not change the value, and collapses an
    /// all-zero function to the empty one. The function is unchanged on the
    /// closed knot range in both extension modes.
    pub fn simplified(&self) -> Self {
        if self.values.iter().all(|&v| v == 0.0) {
            return Self::zero(self.extension);
        }
        let n = self.knots.len();
        let mut knots = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for t in 0..n {
            let interior = t > 0 && t + 1 < n;
            if interior && self.values[t] == self.values[t - 1] {
                continue;
            }
            knots.push(self.knots[t]);
            values.push(self.values[t]);
        }
        Self {
            knots,
            values,
            extension: self.extension,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_right_continuous() {
        let f = StepFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, -1.0, 3.0], Extension::Compact)
            .unwrap();
        for (t, &k) in f.knots().iter().enumerate() {
            assert_eq!(f.evaluate(k), f.values()[t]);
        }
        assert_eq!(f.evaluate(0.5), 1.0);
        assert_eq!(f.evaluate(1.999), -1.0);
        assert_eq!(f.evaluate(-0.1), 0.0);
        assert_eq!(f.evaluate(2.0), 3.0);
        assert_eq!(f.evaluate(2.1), 0.0);

        let g = f.with_extension(Extension::Clamp);
        assert_eq!(g.evaluate(-5.0), 1.0);
        assert_eq!(g.evaluate(9.0), 3.0);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(matches!(
            StepFunction::new(vec![0.0, 0.0], vec![1.0, 2.0], Extension::Clamp),
            Err(GamError::InvalidKnots { index: 1 })
        ));
        assert!(StepFunction::new(vec![0.0], vec![1.0, 2.0], Extension::Clamp).is_err());
    }

    #[test]
    fn simplify_keeps_function() {
        let f = StepFunction::new(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![1.0, 1.0, 2.0, 2.0],
            Extension::Compact,
        )
        .unwrap();
        let g = f.simplified();
        assert_eq!(g.knots(), &[0.0, 2.0, 3.0]);
        for x in [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5] {
            assert_eq!(f.evaluate(x), g.evaluate(x), "x = {x}");
        }
        let z = StepFunction::new(vec![0.0, 1.0], vec![0.0, 0.0], Extension::Clamp).unwrap();
        assert!(z.simplified().is_empty());
    }
}
