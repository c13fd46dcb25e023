//! High-probability generalization certificates for `GAM_p(C)` with a
//! `rho`-Lipschitz loss bounded by `c`.

use serde::Serialize;

use crate::complexity::{ceil_ln, check_positive};
use crate::data::Dataset;
use crate::error::{GamError, Result};
use crate::loss::LossSpec;
use crate::model::GamModel;
use crate::tv::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Bound on `sup_f |expected risk - empirical risk|`.
    UniformDeviation,
    /// Bound on `expected risk of the ERM - best expected risk`.
    ErmExcess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateInputs {
    pub p: usize,
    pub m: usize,
    #[serde(rename = "C")]
    pub budget: f64,
    pub rho: f64,
    pub c: f64,
    pub delta: f64,
}

/// `value = complexity_term + confidence_term`, holding with probability at
/// least `1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub value: f64,
    pub delta: f64,
    pub complexity_term: f64,
    pub confidence_term: f64,
    pub inputs: CertificateInputs,
}

fn certificate(kind: CertificateKind, inputs: CertificateInputs) -> Result<Certificate> {
    let CertificateInputs {
        p,
        m,
        budget,
        rho,
        c,
        delta,
    } = inputs;
    if p <= 2 {
        return Err(GamError::FeatureCountTooSmall { p, min: 3 });
    }
    if m == 0 {
        return Err(GamError::InvalidParameter("m must be at least 1".into()));
    }
    check_positive("C", budget)?;
    check_positive("rho", rho)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(GamError::InvalidParameter(format!(
            "c must be nonnegative and finite, got {c}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GamError::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let m = m as f64;
    let complexity_term = rho * budget * (5.0 * ceil_ln(p) / m).sqrt();
    let base = c * (2.0 * (2.0 / delta).ln() / m).sqrt();
    let confidence_term = match kind {
        CertificateKind::UniformDeviation => base,
        CertificateKind::ErmExcess => 5.0 * base,
    };
    Ok(Certificate {
        kind,
        value: complexity_term + confidence_term,
        delta,
        complexity_term,
        confidence_term,
        inputs,
    })
}

/// `rho C sqrt(5 ceil(ln p) / m) + c sqrt(2 ln(2/delta) / m)`; requires `p > 2`.
pub fn uniform_deviation_bound(
    p: usize,
    m: usize,
    budget: f64,
    rho: f64,
    c: f64,
    delta: f64,
) -> Result<Certificate> {
    certificate(
        CertificateKind::UniformDeviation,
        CertificateInputs {
            p,
            m,
            budget,
            rho,
            c,
            delta,
        },
    )
}

/// `rho C sqrt(5 ceil(ln p) / m) + 5 c sqrt(2 ln(2/delta) / m)`; requires `p > 2`.
pub fn erm_excess_bound(
    p: usize,
    m: usize,
    budget: f64,
    rho: f64,
    c: f64,
    delta: f64,
) -> Result<Certificate> {
    certificate(
        CertificateKind::ErmExcess,
        CertificateInputs {
            p,
            m,
            budget,
            rho,
            c,
            delta,
        },
    )
}

/// Certificate with `rho` and `c` taken from the loss. Fails for losses
/// without a declared bound.
pub fn certify(
    kind: CertificateKind,
    loss: &LossSpec,
    p: usize,
    m: usize,
    budget: f64,
    delta: f64,
) -> Result<Certificate> {
    let rho = loss.lipschitz()?;
    let c = loss.bound()?;
    certificate(
        kind,
        CertificateInputs {
            p,
            m,
            budget,
            rho,
            c,
            delta,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    /// Largest `test risk - train risk` over the models.
    pub max_gap: f64,
    pub gaps: Vec<f64>,
    /// Smallest budget containing every model.
    pub budget_cover: f64,
}

fn mean_risk(model: &GamModel, data: &Dataset, loss: &LossSpec) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in 0..data.m() {
        acc.add(loss.value_unchecked(model.predict_unchecked(data.row(i)), data.targets()[i]));
    }
    acc.value() / data.m() as f64
}

/// Realized generalization gap (mean test loss minus mean training loss) of
/// each model.
pub fn empirical_deviation(
    models: &[GamModel],
    train: &Dataset,
    test: &Dataset,
    loss: &LossSpec,
) -> Result<DeviationReport> {
    if models.is_empty() {
        return Err(GamError::InvalidParameter("model sweep is empty".into()));
    }
    if train.p() != test.p() {
        return Err(GamError::DimensionMismatch {
            what: "test features",
            expected: train.p(),
            got: test.p(),
        });
    }
    if let Some(model) = models.iter().find(|f| f.p() != train.p()) {
        return Err(GamError::DimensionMismatch {
            what: "model features",
            expected: train.p(),
            got: model.p(),
        });
    }
    loss.check_targets(train.targets())?;
    loss.check_targets(test.targets())?;
    let gaps: Vec<f64> = models
        .iter()
        .map(|f| mean_risk(f, test, loss) - mean_risk(f, train, loss))
        .collect();
    Ok(DeviationReport {
        max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        gaps,
        budget_cover: models.iter().map(GamModel::budget_used).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let u = uniform_deviation_bound(1024, 10000, 1.0, 1.0, 1.0, 0.05).unwrap();
        assert!((u.complexity_term - 0.059161).abs() < 1e-6);
        assert!((u.confidence_term - 0.027163).abs() < 1e-6);
        // Reference figures are sums of terms rounded to six places.
        assert!((u.value - 0.086324).abs() < 1e-5);
        assert!((u.value - 0.0863228281458).abs() < 1e-12);
        assert_eq!(u.value, u.complexity_term + u.confidence_term);
        let e = erm_excess_bound(1024, 10000, 1.0, 1.0, 1.0, 0.05).unwrap();
        assert!((e.value - 0.194976).abs() < 1e-5);
        assert!((e.value - 0.1949709494051).abs() < 1e-12);
        assert_eq!(e.complexity_term, u.complexity_term);
    }

    #[test]
    fn refusals() {
        assert!(matches!(
            uniform_deviation_bound(2, 100, 1.0, 1.0, 1.0, 0.05),
            Err(GamError::FeatureCountTooSmall { p: 2, min: 3 })
        ));
        for delta in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(erm_excess_bound(5, 100, 1.0, 1.0, 1.0, delta).is_err());
        }
        assert!(uniform_deviation_bound(5, 0, 1.0, 1.0, 1.0, 0.1).is_err());
        assert!(uniform_deviation_bound(5, 10, 0.0, 1.0, 1.0, 0.1).is_err());
        assert!(matches!(
            certify(CertificateKind::UniformDeviation, &LossSpec::squared(), 5, 10, 1.0, 0.1),
            Err(GamError::UnboundedLoss { .. })
        ));
    }

    #[test]
    fn certify_reads_loss_constants() {
        let loss = LossSpec::hinge().clipped(2.0);
        let a = certify(CertificateKind::UniformDeviation, &loss, 5, 400, 3.0, 0.05).unwrap();
        let b = uniform_deviation_bound(5, 400, 3.0, 1.0, 2.0, 0.05).unwrap();
        assert_eq!(a, b);
        let sq = LossSpec::squared().with_range(1.0, 2.0);
        let c = certify(CertificateKind::ErmExcess, &sq, 5, 400, 3.0, 0.05).unwrap();
        assert_eq!(c.inputs.rho, 6.0);
        assert_eq!(c.inputs.c, 9.0);
    }

    #[test]
    fn zero_model_gap() {
        let train = Dataset::new(&[vec![0.0], vec![1.0]], &[1.0, 3.0]).unwrap();
        let test = Dataset::new(&[vec![0.5]], &[-1.0]).unwrap();
        let r = empirical_deviation(&[GamModel::zero(1)], &train, &test, &LossSpec::squared()).unwrap();
        assert_eq!(r.max_gap, 1.0 - 5.0);
        assert_eq!(r.budget_cover, 0.0);
        let same = empirical_deviation(&[GamModel::zero(1)], &train, &train, &LossSpec::squared()).unwrap();
        assert_eq!(same.max_gap, 0.0);
        assert!(empirical_deviation(&[], &train, &test, &LossSpec::squared()).is_err());
    }
}
