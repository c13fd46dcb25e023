//! Loss functions with their Lipschitz constants and bounds.

use serde::{Deserialize, Serialize};

use crate::error::{GamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Squared,
    Logistic,
    Hinge,
    Absolute,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Squared => "squared",
            Self::Logistic => "logistic",
            Self::Hinge => "hinge",
            Self::Absolute => "absolute",
        }
    }

    /// Classification losses expect labels in {-1, +1}.
    pub fn is_classification(self) -> bool {
        matches!(self, Self::Logistic | Self::Hinge)
    }

    /// Differentiable with a Lipschitz derivative in the prediction.
    pub fn is_smooth(self) -> bool {
        matches!(self, Self::Squared | Self::Logistic)
    }
}

impl std::str::FromStr for LossKind {
    type Err = GamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Self::Squared),
            "logistic" => Ok(Self::Logistic),
            "hinge" => Ok(Self::Hinge),
            "absolute" => Ok(Self::Absolute),
            other => Err(GamError::InvalidParameter(format!(
                "unknown loss '{other}' (expected squared, logistic, hinge or absolute)"
            ))),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Declared box `|prediction| <= prediction_bound`, `|target| <= target_bound`
/// on which Lipschitz constants and bounds are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub prediction_bound: f64,
    pub target_bound: f64,
}

/// A loss together with the constants a generalization bound needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub range: Option<Range>,
    /// Loss values are capped at this level (`min(loss, clip)`).
    pub clip: Option<f64>,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        Self {
            kind,
            range: None,
            clip: None,
        }
    }

    pub fn squared() -> Self {
        Self::new(LossKind::Squared)
    }

    pub fn logistic() -> Self {
        Self::new(LossKind::Logistic)
    }

    pub fn hinge() -> Self {
        Self::new(LossKind::Hinge)
    }

    pub fn absolute() -> Self {
        Self::new(LossKind::Absolute)
    }

    pub fn with_range(mut self, prediction_bound: f64, target_bound: f64) -> Self {
        self.range = Some(Range {
            prediction_bound: prediction_bound.abs(),
            target_bound: target_bound.abs(),
        });
        self
    }

    /// Caps the loss at `c`. The capped loss is bounded by `c` and keeps the
    /// Lipschitz constant of the original, but is no longer convex.
    pub fn clipped(mut self, c: f64) -> Self {
        self.clip = Some(c);
        self
    }

    pub fn is_convex(&self) -> bool {
        self.clip.is_none()
    }

    /// Lipschitz constant of `a -> loss(a, y)`, uniformly in `y`.
    pub fn lipschitz(&self) -> Result<f64> {
        match self.kind {
            LossKind::Logistic | LossKind::Hinge | LossKind::Absolute => Ok(1.0),
            LossKind::Squared => match self.range {
                Some(r) => Ok(2.0 * (r.prediction_bound + r.target_bound)),
                None => Err(GamError::UnboundedLoss {
                    quantity: "Lipschitz constant",
                    loss: "squared",
                }),
            },
        }
    }

    /// Upper bound `c` on the loss value.
    pub fn bound(&self) -> Result<f64> {
        let from_range = self.range.map(|r| {
            let a = r.prediction_bound;
            let y = r.target_bound;
            match self.kind {
                LossKind::Squared => (a + y) * (a + y),
                LossKind::Absolute => a + y,
                LossKind::Hinge => 1.0 + a,
                LossKind::Logistic => softplus(a),
            }
        });
        match (from_range, self.clip) {
            (Some(b), Some(c)) => Ok(b.min(c)),
            (Some(b), None) => Ok(b),
            (None, Some(c)) => Ok(c),
            (None, None) => Err(GamError::UnboundedLoss {
                quantity: "bound",
                loss: self.kind.name(),
            }),
        }
    }

    pub fn check_target(&self, target: f64, row: usize) -> Result<()> {
        if self.kind.is_classification() && target != 1.0 && target != -1.0 {
            return Err(GamError::InvalidLabel {
                label: target,
                row,
                loss: self.kind.name(),
            });
        }
        Ok(())
    }

    pub fn check_targets(&self, targets: &[f64]) -> Result<()> {
        targets
            .iter()
            .enumerate()
            .try_for_each(|(row, &y)| self.check_target(y, row))
    }

    /// Loss value; the target is assumed to have been validated.
    pub fn value_unchecked(&self, prediction: f64, target: f64) -> f64 {
        let raw = match self.kind {
            LossKind::Squared => (prediction - target) * (prediction - target),
            LossKind::Logistic => softplus(-prediction * target),
            LossKind::Hinge => (1.0 - prediction * target).max(0.0),
            LossKind::Absolute => (prediction - target).abs(),
        };
        match self.clip {
            Some(c) => raw.min(c),
            None => raw,
        }
    }

    pub fn value(&self, prediction: f64, target: f64) -> Result<f64> {
        self.check_target(target, 0)?;
        Ok(self.value_unchecked(prediction, target))
    }

    /// First and second derivative in the prediction (smooth, unclipped losses).
    pub(crate) fn derivatives(&self, prediction: f64, target: f64) -> (f64, f64) {
        match self.kind {
            LossKind::Squared => (2.0 * (prediction - target), 2.0),
            LossKind::Logistic => {
                let margin = prediction * target;
                let s = sigmoid(-margin);
                (-target * s, s * (1.0 - s))
            }
            LossKind::Hinge | LossKind::Absolute => unreachable!("nonsmooth loss"),
        }
    }

    /// Global bound on the second derivative (smooth, unclipped losses).
    pub(crate) fn curvature_bound(&self) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0,
            LossKind::Logistic => 0.25,
            LossKind::Hinge | LossKind::Absolute => f64::INFINITY,
        }
    }

    /// A subgradient in the prediction.
    pub(crate) fn subgradient(&self, prediction: f64, target: f64) -> f64 {
        match self.kind {
            LossKind::Squared | LossKind::Logistic => self.derivatives(prediction, target).0,
            LossKind::Hinge => {
                if prediction * target < 1.0 {
                    -target
                } else {
                    0.0
                }
            }
            LossKind::Absolute => {
                let d = prediction - target;
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
